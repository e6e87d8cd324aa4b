import pytest
from hypothesis import given, strategies as st

from mmfnoise.config import SCHEMA, apply_overrides, default_config, load_config, parse_config
from mmfnoise.errors import ConfigError


def test_defaults_round_trip():
    cfg = default_config()
    again = parse_config(cfg.to_text())
    assert again == cfg
    assert again.to_text() == cfg.to_text()
    assert cfg["coherence"]["hurst_values"] == (0.55, 0.65, 0.75)
    assert cfg["coherence"]["omega0_ghz"] == 5.0 and cfg["coherence"]["omega_c_ghz"] == 10.0


@given(st.integers(0, 2**31), st.floats(0.51, 0.99), st.sampled_from(["generate", "sde", "coherence"]))
def test_round_trip_property(seed, h, exp):
    cfg = apply_overrides(default_config(), [f"run.seed={seed}", f"profile.H0={h!r}", f"run.experiment={exp}"])
    assert parse_config(cfg.to_text()) == cfg
    assert cfg.seed == seed and cfg.experiment == exp


def test_unknown_section_and_key_report_line():
    with pytest.raises(ConfigError) as exc:
        parse_config("[run]\nseed = 1\n\n[psdd]\nx = 1\n")
    assert exc.value.line == 4
    with pytest.raises(ConfigError) as exc:
        parse_config("[run]\nseed = 1\nsede = 2\n")
    assert exc.value.key == "sede" and exc.value.line == 3


@pytest.mark.parametrize("text,key", [
    ("[run]\nseed = -3\n", "seed"),
    ("[run]\nseed = abc\n", "seed"),
    ("[profile]\nH0 = 1.2\n", "H0"),
    ("[coherence]\nhurst_values = 0.4, 0.6\n", "hurst_values"),
    ("[coherence]\ntemperatures_k = 0.01, -0.1\n", "temperatures_k"),
    ("[coherence]\nt_min = 5\nt_max = 1\n", "t_min"),
    ("[generate]\nvariant = spline\n", "variant"),
    ("[units]\ntime = s\n", "time"),
    ("[sde]\nlam = nan\n", "lam"),
    ("[run]\nstrict = maybe\n", "strict"),
])
def test_range_checks(text, key):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.key == key


def test_duplicate_and_malformed():
    with pytest.raises(ConfigError):
        parse_config("[run]\nseed = 1\nseed = 2\n")
    with pytest.raises(ConfigError):
        parse_config("seed = 1\n")


def test_overrides():
    cfg = apply_overrides(default_config(), ["sde.lam=0.5", "coherence.filters=ramsey, cpmg8"])
    assert cfg["sde"]["lam"] == 0.5 and cfg["coherence"]["filters"] == ("ramsey", "cpmg8")
    for bad in ["sde.lam", "lam=1", "nope.x=1", "sde.nope=1", "sde.lam=-1"]:
        with pytest.raises(ConfigError):
            apply_overrides(default_config(), [bad])


def test_hash_ignores_plumbing():
    cfg = default_config()
    a = apply_overrides(cfg, ["run.output_dir=elsewhere", "run.threads=4"])
    assert a.hash() == cfg.hash()
    assert apply_overrides(cfg, ["run.seed=9"]).hash() != cfg.hash()


def test_load_config(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("# comment\n[run]\nexperiment = gate-opt\n[gate-opt]\nt1 = 40\n")
    cfg = load_config(p)
    assert cfg.experiment == "gate-opt" and cfg["gate-opt"]["t1"] == 40.0
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_every_schema_default_passes_its_check():
    for sec, keys in SCHEMA.items():
        for k, spec in keys.items():
            if spec.check is not None:
                assert spec.check(spec.default), (sec, k)
