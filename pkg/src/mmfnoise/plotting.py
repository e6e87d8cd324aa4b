"""Emit gnuplot scripts for the CSV outputs.

Scripts only select columns and set axes; no values are computed.  Each
figure kind declares the columns it needs and a missing column raises
:class:`~mmfnoise.errors.SchemaError` naming it.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

from .errors import SchemaError
from .io import read_csv

__all__ = ["FIGURES", "emit_plot_script"]

FIGURES = {
    "paths": ("t", "value"),
    "variance": ("t", "variance", "theory"),
    "psd": ("frequency", "power"),
    "hurst": ("t", "H", "stat_err"),
    "sde": ("t", "mean", "variance"),
    "trajectory": ("t", "epsilon"),
    "coherence": ("t", "coherence", "temperature", "filter"),
    "chi": ("t", "chi", "gamma_phi", "temperature", "filter"),
    "kernels": ("tau", "L", "alpha"),
    "gate": ("t_g", "relaxation_term", "dephasing_term", "total", "is_optimal"),
}

_HEAD = """set datafile separator ','
set key autotitle columnhead
set grid
"""


def _cols(path, need):
    data = read_csv(path)
    for c in need:
        if c not in data:
            raise SchemaError(f"{path}: missing column {c!r}", c)
    return data, {h: i + 1 for i, h in enumerate(data)}


def _q(path):
    return "'" + str(path).replace("'", "''") + "'"


def emit_plot_script(csv_paths: Sequence, kind: str, output: str | None = None) -> str:
    """Return a gnuplot script plotting ``csv_paths`` as figure ``kind``."""
    if kind not in FIGURES:
        raise SchemaError(f"unknown figure kind {kind!r}; choose from {', '.join(FIGURES)}")
    need = FIGURES[kind]
    lines = [_HEAD]
    if output:
        lines.append(f"set terminal pngcairo size 900,600\nset output {_q(output)}\n")
    clauses = []
    for p in csv_paths:
        data, ix = _cols(p, need)
        q = _q(p)
        if kind == "paths":
            lines.append("set xlabel 't (ns)'\nset ylabel 'M(t)'\n")
            clauses.append(f"{q} using {ix['t']}:{ix['value']} with lines title 'path'")
        elif kind == "variance":
            lines.append("set logscale xy\nset xlabel 't (ns)'\nset ylabel 'Var[M(t)]'\n")
            clauses.append(f"{q} using {ix['t']}:{ix['variance']} with points pt 7 ps 0.5 title 'ensemble'")
            clauses.append(f"{q} using {ix['t']}:{ix['theory']} with lines lw 2 title 'theory'")
        elif kind == "psd":
            lines.append("set logscale xy\nset xlabel 'f (1/ns)'\nset ylabel 'S(f)'\n")
            clauses.append(f"{q} using {ix['frequency']}:{ix['power']} with lines title 'Welch PSD'")
        elif kind == "hurst":
            lines.append("set xlabel 't (ns)'\nset ylabel 'H(t)'\n")
            clauses.append(f"{q} using {ix['t']}:{ix['H']}:{ix['stat_err']} with yerrorbars title 'H(t)'")
        elif kind == "sde":
            lines.append("set xlabel 't (ns)'\nset ylabel 'energy'\n")
            clauses.append(f"{q} using {ix['t']}:{ix['mean']} with lines title 'mean'")
            clauses.append(f"{q} using {ix['t']}:{ix['variance']} with lines axes x1y2 title 'variance'")
        elif kind == "trajectory":
            lines.append("set xlabel 't (ns)'\nset ylabel 'epsilon(t)'\n")
            clauses.append(f"{q} using {ix['t']}:{ix['epsilon']} with lines title 'epsilon'")
        elif kind in ("coherence", "chi"):
            ycol = "coherence" if kind == "coherence" else "chi"
            lines.append("set logscale x\nset xlabel 't (ns)'\n"
                         f"set ylabel '{ycol}'\n" + ("set logscale y\n" if kind == "chi" else ""))
            pairs = sorted(set(zip(data["temperature"], data["filter"])), key=lambda x: (x[1], float(x[0])))
            for T, f in pairs:
                sel = f"(strcol({ix['filter']}) eq '{f}' && strcol({ix['temperature']}) eq '{T}' ? ${ix[ycol]} : NaN)"
                clauses.append(f"{q} using {ix['t']}:{sel} with lines title '{f}, T = {float(T):g} K'")
        elif kind == "kernels":
            lines.append("set xlabel 'tau (ns)'\n")
            clauses.append(f"{q} using {ix['tau']}:{ix['L']} with lines title 'L(tau)'")
            clauses.append(f"{q} using {ix['tau']}:{ix['alpha']} with lines title 'alpha(tau)'")
        elif kind == "gate":
            lines.append("set logscale xy\nset xlabel 't_g (ns)'\nset ylabel 'error'\n")
            clauses.append(f"{q} using {ix['t_g']}:{ix['relaxation_term']} with lines title 't_g/T1'")
            clauses.append(f"{q} using {ix['t_g']}:{ix['dephasing_term']} with lines title 'chi/3'")
            clauses.append(f"{q} using {ix['t_g']}:{ix['total']} with lines lw 2 title 'total'")
            clauses.append(f"{q} using {ix['t_g']}:(${ix['is_optimal']} == 1 ? ${ix['total']} : NaN) "
                           "with points pt 7 ps 1.5 title 'optimum'")
    # header lines repeat per file; keep one copy of each in order
    seen, head = set(), []
    for chunk in lines:
        for ln in chunk.splitlines():
            if ln and ln not in seen:
                seen.add(ln)
                head.append(ln)
    return "\n".join(head) + "\nplot " + ", \\\n     ".join(clauses) + "\n"
