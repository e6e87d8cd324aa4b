"""Command-line front end.

Each subcommand resolves a :class:`~mmfnoise.config.RunConfig` from the
defaults, an optional ``--config`` file, ``--set section.key=value``
overrides and the common flags, writes its CSV outputs (each with a
``.meta`` sidecar) into the output directory and finishes with
``manifest.txt``, which is the resolved configuration in canonical form.

Exit status: 0 success, 1 a validation check failed, 2 configuration
error, 3 a numerical module failed (the message names the operation).
"""
from __future__ import annotations

import argparse
import contextlib
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, _backend
from .bath import (HBAR, K_B, BathSpec, FilterKind, PowerLawNoise, bath_correlation_time, coherence_curves,
                   crossover_time, dephasing_chi, effective_temperature, friction_coefficient,
                   write_coherence_csv, write_kernel_csv)
from .config import EXPERIMENTS, RunConfig, apply_overrides, default_config, load_config
from .errors import AdiabaticityWarning, ConfigError, MmfError, NumericWarning, SchemaError
from .gateopt import GateModel, optimal_gate_time, write_sweep_csv
from .io import fmt, read_csv, write_csv
from .mmfbm import (CovarianceModel, HurstProfile, NoiseEnsemble, TimeGrid, build_covariance_matrix,
                    cumulative_paths, sample_fgn_circulant, sample_paths_cholesky, write_paths_csv)
from .plotting import FIGURES, emit_plot_script
from .sde import (SdeConfig, carrier_frequency, dephasing_signal, estimate_t1, estimate_t2, simulate_ensemble,
                  write_ensemble_csv, write_trajectory_csv)
from .spectral import (PsdEstimate, consistency_check, fit_psd_exponent, hurst_from_coherence,
                       hurst_from_variance, synthetic_coherence, welch_psd, write_hurst_csv)
from .validation import run_suite

__all__ = ["main", "build_parser", "resolve_config", "run", "profile_from_config"]

CHUNK = 64  # paths per random stream block; fixed so results do not depend on --threads


class OperationError(Exception):
    def __init__(self, op, exc):
        super().__init__(f"{op}: {exc}")
        self.op = op
        self.exc = exc


@contextlib.contextmanager
def _op(name):
    try:
        yield
    except (MmfError, Warning) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise OperationError(name, exc) from exc


class _Run:
    """Output bookkeeping for one experiment."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = cfg.output_dir
        self.files: list[Path] = []
        self.notes: list[str] = []

    def path(self, name: str) -> Path:
        p = (self.out / name).resolve()
        if self.out.resolve() not in p.parents:
            raise ConfigError(f"output {name!r} escapes the output directory", "output_dir")
        return p

    def meta(self, **kw):
        m = {"config_hash": self.cfg.hash(), "experiment": self.cfg.experiment, "seed": self.cfg.seed}
        m.update(kw)
        return m

    def add(self, paths):
        if isinstance(paths, (str, Path)):
            paths = [paths]
        self.files.extend(Path(p) for p in paths)

    @property
    def threads(self) -> int:
        return self.cfg["run"]["threads"]

    def map(self, fn, items):
        items = list(items)
        if self.threads <= 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(self.threads) as ex:
            return list(ex.map(fn, items))


def profile_from_config(sec: dict) -> HurstProfile:
    kind = sec["kind"]
    if kind == "constant":
        return HurstProfile.constant(sec["H0"])
    if kind == "sinusoid":
        return HurstProfile.sinusoid(sec["H0"], sec["amplitude"], sec["period"])
    if kind == "cosinusoid":
        return HurstProfile.cosinusoid(sec["H0"], sec["amplitude"], sec["period"])
    pairs = [p for p in sec["table"].split(",") if p.strip()]
    try:
        tt, hh = zip(*((float(a), float(b)) for a, b in (p.split(":") for p in pairs)))
    except ValueError:
        raise ConfigError("[profile] table must be t:H pairs separated by commas", "table") from None
    return HurstProfile.tabulated(tt, hh)


def _chunks(n):
    return [(k, min(CHUNK, n - k * CHUNK)) for k in range((n + CHUNK - 1) // CHUNK)]


def _generate_ensemble(r: _Run, strict: bool):
    """Paths and their model variance from the [generate] and [profile] sections."""
    g = r.cfg["generate"]
    prof = profile_from_config(r.cfg["profile"])
    grid = TimeGrid.spanning(g["t_end"], g["n_points"])
    sigma = g["sigma"]
    seed = r.cfg.seed
    if g["variant"] == "circulant":
        if not prof.is_constant:
            raise ConfigError("[generate] variant = circulant requires [profile] kind = constant", "variant")
        with _op("sample_fgn_circulant"):
            parts = r.map(lambda c: sample_fgn_circulant(prof.H0, grid, c[1], seed, sigma=sigma,
                                                         strict=strict, stream_id=c[0]), _chunks(g["n_paths"]))
        inc = NoiseEnsemble(grid, np.vstack([p.values for p in parts]), seed, prof, "increments",
                            tuple(dict.fromkeys(w for p in parts for w in p.warnings)))
        with _op("cumulative_paths"):
            ens = cumulative_paths(inc)
        theory = sigma**2 * grid.times ** (2.0 * prof.H0)
        return ens, inc, theory
    with _op("build_covariance_matrix"):
        cov = build_covariance_matrix(grid, CovarianceModel(g["variant"], prof))
    with _op("sample_paths_cholesky"):
        parts = r.map(lambda c: sample_paths_cholesky(cov, c[1], seed, stream_id=c[0]), _chunks(g["n_paths"]))
    vals = sigma * np.vstack([p.values for p in parts])
    ens = NoiseEnsemble(grid, vals, seed, prof, "path", cov.warnings)
    inc_vals = np.zeros_like(vals)
    inc_vals[:, :-1] = np.diff(vals, axis=1)
    inc = NoiseEnsemble(grid, inc_vals, seed, prof, "increments", cov.warnings)
    return ens, inc, sigma**2 * np.diag(cov.matrix)


def _exp_generate(r: _Run, strict: bool):
    g = r.cfg["generate"]
    ens, _, theory = _generate_ensemble(r, strict)
    meta = r.meta(variant=g["variant"], sigma=g["sigma"], warnings=list(ens.warnings))
    r.add(write_paths_csv(ens, r.path("paths.csv"), g["long_format"], meta))
    r.add(write_csv(r.path("variance.csv"), ["t", "variance", "theory"],
                    [ens.grid.times, ens.variance(), theory], meta))
    mx = float(np.max(np.abs(ens.variance()[1:] / theory[1:] - 1.0)))
    print(f"generate: {ens.n_paths} paths x {ens.grid.n_points} points; max |Var/theory - 1| = {mx:.4g}")


def _exp_psd(r: _Run, strict: bool):
    p = r.cfg["psd"]
    ens, inc, _ = _generate_ensemble(r, strict)
    src = inc if p["source"] == "increments" else ens
    n = src.values.shape[1] - (1 if p["source"] == "increments" else 0)
    dt = src.grid.dt
    with _op("welch_psd"):
        ests = [welch_psd(row[:n], p["segment_length"], p["overlap"], dt=dt) for row in src.values]
    power = np.mean([e.power for e in ests], axis=0)
    avg = PsdEstimate(ests[0].frequencies, power, p["segment_length"], p["overlap"])
    with _op("fit_psd_exponent"):
        fit = fit_psd_exponent(avg, p["f_low"] or None, p["f_high"] or None)
    hbar = float(np.mean(ens.hurst(ens.grid.times[1:])))
    theory = 2.0 * hbar - 1.0 if p["source"] == "increments" else 2.0 * hbar + 1.0
    meta = r.meta(psd_source=p["source"], beta_fit=fit.slope, beta_stderr=fit.stderr_slope,
                  beta_theory=theory, mean_hurst=hbar, n_paths=len(ests), warnings=list(ens.warnings))
    r.add(write_csv(r.path("psd.csv"), ["frequency", "power"], [avg.frequencies, avg.power], meta))
    print(f"psd ({p['source']}): beta_fit = {fit.slope:.4f} +/- {fit.stderr_slope:.4f}, "
          f"theory {theory:.4f} from mean H = {hbar:.4f}")


def _exp_sde(r: _Run, strict: bool):
    s = r.cfg["sde"]
    cfg = SdeConfig(lam=s["lam"], sigma0=s["sigma0"], profile=profile_from_config(r.cfg["profile"]),
                    kernel=s["kernel"], gamma=s["gamma"] if s["kernel"] == "fixed" else None,
                    grid=TimeGrid.spanning(s["t_end"], s["n_points"]), epsilon0=s["epsilon0"],
                    seed=r.cfg.seed)
    with _op("simulate_energy"):
        parts = r.map(lambda c: simulate_ensemble(cfg, c[1], first_stream=c[0] * CHUNK).values,
                      _chunks(s["n_paths"]))
    from .sde import EnergyEnsemble

    ens = EnergyEnsemble(cfg.grid, np.vstack(parts), cfg)
    extra = {"kernel": cfg.label(), "backend": _backend.BACKEND}
    if s["estimate"] == "t1":
        with _op("estimate_t1"):
            t1, fit = estimate_t1(ens)
        extra.update(t1_ns=t1, t1_fit_r2=fit.r_squared)
        print(f"sde: T1 = {t1:.6g} ns (1/lambda = {1 / s['lam'] if s['lam'] else math.inf:.6g} ns)")
    elif s["estimate"] == "t2":
        f = carrier_frequency(cfg, s["carrier_steps"])
        with _op("estimate_t2"):
            t2, fit = estimate_t2(dephasing_signal(ens, f))
        extra.update(t2_ns=t2, t2_fit_r2=fit.r_squared, carrier_frequency=f)
        print(f"sde: T2 = {t2:.6g} ns (carrier {f:.6g} 1/ns)")
    meta = r.meta(**extra)
    r.add(write_ensemble_csv(ens, r.path("sde_ensemble.csv"), meta))
    r.add(write_trajectory_csv(ens[0], r.path("sde_trajectory.csv"), meta))
    if s["estimate"] == "none":
        print(f"sde: {ens.n_paths} trajectories x {cfg.grid.n_points} steps")


def _ghz(f):
    return 2.0 * math.pi * f


def _exp_coherence(r: _Run, strict: bool):
    c = r.cfg["coherence"]
    times = np.logspace(math.log10(c["t_min"]), math.log10(c["t_max"]), c["n_times"])
    wmin = c["omega_min"] or None
    try:
        filters = [FilterKind.parse(f) for f in c["filters"]]
    except MmfError as exc:
        raise ConfigError(f"[coherence] filters: {exc}", "filters") from None
    tasks = [(h, f) for h in c["hurst_values"] for f in filters]

    def job(task):
        h, filt = task
        prof = HurstProfile.constant(h)
        if c["mode"] == "phenomenological":
            with _op("dephasing_chi"):
                return [dephasing_chi(times, PowerLawNoise(c["amplitude"], prof), filt, wmin)]
        spec = BathSpec.from_coupling(_ghz(c["coupling_mhz"] * 1e-3), _ghz(c["omega_c_ghz"]), prof,
                                      c["temperatures_k"][0])
        with _op("coherence_curves"):
            return coherence_curves(spec, times, c["temperatures_k"], filt, wmin)

    results = r.map(job, tasks)
    for h in c["hurst_values"]:
        group = [res for (hh, _), rs in zip(tasks, results) if hh == h for res in rs]
        name = f"coherence_H{h:.4g}.csv"
        meta = r.meta(mode=c["mode"], hurst=h, omega0_ghz=c["omega0_ghz"], omega_c_ghz=c["omega_c_ghz"],
                      coupling_mhz=c["coupling_mhz"])
        r.add(write_coherence_csv(group, r.path(name), meta))
        worst = min(float(res.coherence[-1]) for res in group)
        print(f"coherence: {name}: {len(group)} curves, min C(t_max) = {worst:.4g}")


def _exp_bath_kernels(r: _Run, strict: bool):
    b = r.cfg["bath-kernels"]
    prof = profile_from_config(r.cfg["profile"])
    spec = BathSpec.from_coupling(_ghz(b["coupling_mhz"] * 1e-3), _ghz(b["omega_c_ghz"]), prof, b["temperature_k"])
    taus = np.linspace(0.0, b["tau_max"], b["n_tau"])
    tm = b["t_m"]
    with _op("effective_temperature"):
        teff = effective_temperature(tm, spec)
    with _op("friction_coefficient"):
        fr = friction_coefficient(tm, spec, 1e-3 * spec.omega_c)
    meta = r.meta(t_m=tm, hurst=float(prof(tm)), ohmicity=spec.ohmicity(tm), eta=spec.eta(tm),
                  effective_temperature_k=teff, friction_coefficient=fr.value, friction_omega=1e-3 * spec.omega_c,
                  friction_divergent=fr.divergent, crossover_time_ns=crossover_time(b["temperature_k"], spec),
                  bath_correlation_time_ns=bath_correlation_time(spec))
    with _op("noise_kernel"):
        r.add(write_kernel_csv(taus, tm, spec, r.path("kernels.csv"), meta))
    print(f"bath-kernels: s = {spec.ohmicity(tm):.4g}, T_eff = {teff:.6g} K, "
          f"t_cross = {crossover_time(b['temperature_k'], spec):.6g} ns")


def _exp_gate_opt(r: _Run, strict: bool):
    g = r.cfg["gate-opt"]
    model = GateModel(g["t1"], g["alpha"], g["hurst"], omega_min_t=g["omega_min_t"])
    with _op("optimal_gate_time"):
        opt = optimal_gate_time(model, "auto")
    grid = np.logspace(math.log10(g["t_min"]), math.log10(g["t_max"]), g["n_points"])
    mark = opt.numeric if opt.interior else None
    meta = r.meta(a_r=model.a_r, t_opt_closed_form=opt.closed_form,
                  t_opt_numeric="none" if opt.numeric is None else opt.numeric,
                  interior_minimum=opt.interior,
                  ratio_numeric_to_closed_form="none" if opt.agreement is None else opt.agreement,
                  marked="numeric minimum" if mark is not None else "grid minimum")
    with _op("total_cost"):
        r.add(write_sweep_csv(model, grid, r.path("gate_sweep.csv"), mark, meta))
    tail = f"numeric {opt.numeric:.6g} ns" if opt.interior else "no interior minimum of the cost"
    print(f"gate-opt: closed form t_opt = {opt.closed_form:.6g} ns; {tail}")


def _exp_extract_hurst(r: _Run, strict: bool):
    e = r.cfg["extract-hurst"]
    prof = profile_from_config(r.cfg["profile"])
    if e["method"] == "variance":
        ens, _, _ = _generate_ensemble(r, strict)
        with _op("hurst_from_variance"):
            est = hurst_from_variance(ens, profile=prof)
        r.add(write_hurst_csv(est, r.path("hurst_variance.csv"), r.meta(h_mean=est.h_mean)))
        print(f"extract-hurst (variance): H = {est.h_mean:.4f} +/- {est.stat_err:.4f} (sys {est.sys_err:.4f})")
        return
    if e["input"]:
        data = read_csv(e["input"])
        for col in ("t", "coherence"):
            if col not in data:
                raise SchemaError(f"{e['input']}: missing column {col!r}", col)
        filt = data.get("filter", ["ramsey"] * len(data["t"]))
        series = {}
        for kind in ("ramsey", "echo"):
            rows = [i for i, f in enumerate(filt) if f == kind]
            if rows:
                series[kind] = (np.array([float(data["t"][i]) for i in rows]),
                                np.array([float(data["coherence"][i]) for i in rows]))
    else:
        times = np.logspace(math.log10(e["t_min"]), math.log10(e["t_max"]), e["n_times"])
        with _op("synthetic_coherence"):
            series = {k: (times, synthetic_coherence(times, prof, k)) for k in ("ramsey", "echo")}
    ests = {}
    for kind, (t, cval) in series.items():
        keep = cval > 0
        with _op("hurst_from_coherence"):
            ests[kind] = hurst_from_coherence((t[keep], cval[keep]), e["window_length"], kind, prof)
        r.add(write_hurst_csv(ests[kind], r.path(f"hurst_{kind}.csv"), r.meta(h_mean=ests[kind].h_mean)))
        print(f"extract-hurst ({kind}): H = {ests[kind].h_mean:.4f} +/- {ests[kind].stat_err:.4f}")
    if "ramsey" in ests and "echo" in ests:
        rep = consistency_check(ests["ramsey"], ests["echo"], e["threshold"])
        print(f"consistency: max |H_R - H_E| = {rep.max_difference:.4f} "
              f"({'consistent' if rep.passed else 'inconsistent'} at {rep.threshold})")
        r.notes.append(f"consistency max_difference = {rep.max_difference:.6g}, passed = {rep.passed}")


def _exp_validate(r: _Run, strict: bool):
    with _op("validate"):
        checks = run_suite(r.cfg.seed)
    for c in checks:
        print(c.line())
    r.add(write_csv(r.path("validate.csv"), ["check", "passed", "value", "target"],
                    [[c.name for c in checks], [c.passed for c in checks], [c.value for c in checks],
                     [c.target for c in checks]], r.meta()))
    return 0 if all(c.passed for c in checks) else 1


_EXPERIMENTS = {
    "generate": _exp_generate,
    "psd": _exp_psd,
    "sde": _exp_sde,
    "coherence": _exp_coherence,
    "bath-kernels": _exp_bath_kernels,
    "gate-opt": _exp_gate_opt,
    "extract-hurst": _exp_extract_hurst,
    "validate": _exp_validate,
}


def manifest_text(cfg: RunConfig, files=(), notes=()) -> str:
    head = [
        f"# mmfnoise {__version__} manifest",
        f"# config_hash = {cfg.hash()}",
        "# units: time ns; frequency GHz, omega = 2*pi*f rad/ns; temperature K",
        f"# hbar = {fmt(HBAR)} (simulation units); k_B = {fmt(K_B)} rad/ns/K",
        "# coupling_mhz is A/2pi; A = 2*pi*1e-3*coupling_mhz rad/ns",
    ]
    head += [f"# output = {p.name}" for p in files]
    head += [f"# note: {n}" for n in notes]
    return "\n".join(head) + "\n\n" + cfg.to_text()


def run(cfg: RunConfig) -> int:
    """Execute ``cfg.experiment``; returns the exit status (0 or 1)."""
    r = _Run(cfg)
    r.out.mkdir(parents=True, exist_ok=True)
    strict = cfg["run"]["strict"]
    with warnings.catch_warnings(record=not strict) as caught:
        if strict:
            warnings.simplefilter("error", AdiabaticityWarning)
            warnings.simplefilter("error", NumericWarning)
        else:
            warnings.simplefilter("always", AdiabaticityWarning)
            warnings.simplefilter("always", NumericWarning)
        status = _EXPERIMENTS[cfg.experiment](r, strict) or 0
    for w in dict.fromkeys(str(w.message) for w in (caught or [])):
        print(f"warning: {w}", file=sys.stderr)
        r.notes.append(f"warning: {w}")
    r.path("manifest.txt").write_text(manifest_text(cfg, r.files, r.notes))
    return status


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--seed", type=int, help="random seed (overrides [run] seed)")
    p.add_argument("--out", help="output directory (overrides [run] output_dir)")
    p.add_argument("--strict", action="store_true", help="turn adiabaticity and numeric warnings into errors")
    p.add_argument("--threads", type=int, help="worker threads for sweeps and path blocks")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one configuration value (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mmfnoise", description="mmfBm noise and qubit decoherence simulations")
    ap.add_argument("--version", action="version", version=f"mmfnoise {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        _common(p)
        if name == "coherence":
            p.add_argument("--omega-min", type=float, help="infrared cutoff in rad/ns")
    p = sub.add_parser("run", help="run the experiment named in [run] experiment")
    _common(p)
    p = sub.add_parser("plot-script", help="emit a gnuplot script for CSV outputs")
    p.add_argument("kind", choices=sorted(FIGURES))
    p.add_argument("csv", nargs="+")
    p.add_argument("--png", help="PNG file name the script renders to")
    p.add_argument("--out", help="directory to write <kind>.gp into (default: stdout)")
    return ap


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else default_config()
    sets = list(args.set)
    if args.command != "run":
        sets.insert(0, f"run.experiment={args.command}")
    if args.seed is not None:
        sets.append(f"run.seed={args.seed}")
    if args.out is not None:
        sets.append(f"run.output_dir={args.out}")
    if args.strict:
        sets.append("run.strict=true")
    if args.threads is not None:
        sets.append(f"run.threads={args.threads}")
    if getattr(args, "omega_min", None) is not None:
        sets.append(f"coherence.omega_min={args.omega_min}")
    return apply_overrides(cfg, sets)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plot-script":
            text = emit_plot_script(args.csv, args.kind, args.png)
            if args.out:
                d = Path(args.out)
                d.mkdir(parents=True, exist_ok=True)
                (d / f"{args.kind}.gp").write_text(text)
            else:
                sys.stdout.write(text)
            return 0
        cfg = resolve_config(args)
        return run(cfg)
    except ConfigError as exc:
        print(f"mmfnoise: configuration error: {exc}", file=sys.stderr)
        return 2
    except SchemaError as exc:
        print(f"mmfnoise: schema error: {exc}", file=sys.stderr)
        return 3
    except OperationError as exc:
        print(f"mmfnoise: {args.command} failed in {exc.op}: {exc.exc}", file=sys.stderr)
        return 3
    except MmfError as exc:
        print(f"mmfnoise: {args.command} failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
