import filecmp
import os

import pytest

from mmfnoise.cli import main, manifest_text
from mmfnoise.config import load_config
from mmfnoise.io import read_csv, read_meta

SMALL_COHERENCE = ["--set", "coherence.hurst_values=0.6", "--set", "coherence.temperatures_k=0.05, 0.5",
                   "--set", "coherence.n_times=6", "--set", "coherence.t_max=2"]


def _tree(d):
    return sorted(os.path.relpath(os.path.join(r, f), d) for r, _, fs in os.walk(d) for f in fs)


@pytest.mark.parametrize("cmd,extra", [
    ("generate", ["--set", "generate.n_paths=20", "--set", "generate.n_points=64"]),
    ("psd", ["--set", "generate.n_paths=4"]),
    ("sde", ["--set", "sde.n_paths=8", "--set", "sde.n_points=64"]),
    ("coherence", SMALL_COHERENCE),
    ("gate-opt", []),
    ("extract-hurst", []),
])
def test_determinism_and_confinement(tmp_path, monkeypatch, cmd, extra):
    monkeypatch.chdir(tmp_path)
    assert main([cmd, "--out", "a", "--seed", "5", "--threads", "2"] + extra) == 0
    assert main(["run", "--config", "a/manifest.txt", "--out", "b", "--threads", "1"]) == 0
    assert sorted(os.listdir(tmp_path)) == ["a", "b"]
    files = _tree(tmp_path / "a")
    assert files == _tree(tmp_path / "b") and "manifest.txt" in files
    for f in files:
        if f != "manifest.txt":
            assert filecmp.cmp(tmp_path / "a" / f, tmp_path / "b" / f, shallow=False), f
    for f in files:
        if f.endswith(".csv"):
            meta = read_meta(tmp_path / "a" / (f + ".meta"))
            assert meta["schema_version"] == "1" and meta["config_hash"]


def test_manifest_reparses_to_same_config(tmp_path):
    out = tmp_path / "o"
    assert main(["gate-opt", "--out", str(out), "--seed", "2"]) == 0
    text = (out / "manifest.txt").read_text()
    cfg = load_config(out / "manifest.txt")
    assert manifest_text(cfg).split("\n\n", 1)[1] == text.split("\n\n", 1)[1]
    assert "# config_hash = " + cfg.hash() in text
    assert "k_B = " in text and "GHz" in text


def test_validate_exit_code(tmp_path, capsys):
    assert main(["validate", "--out", str(tmp_path / "v")]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 8
    d = read_csv(tmp_path / "v" / "validate.csv")
    assert set(d["passed"]) == {"1"}


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[run]\nexperiment = sde\n[sde]\nlamda = 1\n")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "lamda" in err and "line 4" in err
    assert not (tmp_path / "o").exists()


def test_module_error_names_operation(tmp_path, capsys):
    code = main(["sde", "--out", str(tmp_path / "o"), "--set", "sde.lam=1e6", "--set", "sde.sigma0=0"])
    assert code == 3
    assert "simulate_energy" in capsys.readouterr().err
    code = main(["generate", "--out", str(tmp_path / "s"), "--strict"])
    assert code == 3
    assert "build_covariance_matrix" in capsys.readouterr().err


def test_circulant_requires_constant_profile(tmp_path):
    assert main(["generate", "--out", str(tmp_path / "o"), "--set", "generate.variant=circulant"]) == 2
    assert main(["generate", "--out", str(tmp_path / "o"), "--set", "generate.variant=circulant",
                 "--set", "profile.kind=constant", "--set", "generate.n_paths=10"]) == 0


def test_coherence_outputs_one_file_per_h(tmp_path):
    out = tmp_path / "c"
    args = ["coherence", "--out", str(out), "--omega-min", "0.01"] + SMALL_COHERENCE
    args[args.index("coherence.hurst_values=0.6")] = "coherence.hurst_values=0.55, 0.75"
    assert main(args) == 0
    names = sorted(p.name for p in out.glob("*.csv"))
    assert names == ["coherence_H0.55.csv", "coherence_H0.75.csv"]
    d = read_csv(out / names[0])
    assert set(d["temperature"]) == {"0.050000000000000003", "0.5"}
    assert set(d["filter"]) == {"ramsey", "echo"}
    assert read_meta(out / (names[0] + ".meta"))["omega_min"] == "0.01"


def test_extract_hurst_from_input_file(tmp_path):
    out = tmp_path / "c"
    assert main(["coherence", "--out", str(out), "--set", "coherence.mode=phenomenological",
                 "--set", "coherence.n_times=24", "--set", "coherence.hurst_values=0.7",
                 "--set", "coherence.filters=ramsey"]) == 0
    src = out / "coherence_H0.7.csv"
    assert main(["extract-hurst", "--out", str(tmp_path / "h"), "--set", f"extract-hurst.input={src}"]) == 0
    d = read_csv(tmp_path / "h" / "hurst_ramsey.csv")
    assert abs(sum(map(float, d["H"])) / len(d["H"]) - 0.7) < 0.05


def test_plot_script(tmp_path, capsys):
    out = tmp_path / "g"
    assert main(["gate-opt", "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["plot-script", "gate", str(out / "gate_sweep.csv")]) == 0
    script = capsys.readouterr().out
    assert "plot " in script and "is_optimal" not in script and "$5 == 1" in script
    assert main(["plot-script", "variance", str(out / "gate_sweep.csv")]) == 3
    assert main(["plot-script", "gate", str(out / "gate_sweep.csv"), "--out", str(tmp_path / "p")]) == 0
    assert (tmp_path / "p" / "gate.gp").exists()
