import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mmfnoise.errors import DomainError, OptimizationError
from mmfnoise.gateopt import (GateModel, c_of_h, dd_suppression, dd_suppression_quadrature, gate_error,
                              golden_section, noise_coupling_from_fit, optimal_gate_time, table_gate_time,
                              total_cost, write_sweep_csv)
from mmfnoise.io import read_csv

from oracles import C_OF_H_07, T_OPT_TABLE


def test_c_of_h_reference_and_branches():
    assert c_of_h(0.7) == pytest.approx(C_OF_H_07, rel=1e-12)
    assert c_of_h(0.75) == pytest.approx(1 / (1.5 * 0.5 * math.gamma(1.25) ** 2))
    base = 1 / (1.6 * 0.6 * math.gamma(1.3) ** 2)
    assert c_of_h(0.8, 100.0) == pytest.approx(base * (1 - 100.0**-0.6))
    with pytest.raises(DomainError):
        c_of_h(0.5)
    with pytest.raises(DomainError):
        c_of_h(0.8)
    with pytest.raises(DomainError):
        c_of_h(1.0)


def test_table_gate_time_reference():
    m = GateModel(30.0, 0.5, 0.7)
    assert table_gate_time(m) == pytest.approx(T_OPT_TABLE, rel=1e-10)
    # stationary point of t/T1 - χ/3
    h = 1e-9 * T_OPT_TABLE
    d = lambda t: t / 30.0 - gate_error(t, m)
    assert (d(T_OPT_TABLE + h) - d(T_OPT_TABLE - h)) / (2 * h) == pytest.approx(0.0, abs=1e-6)


@given(st.floats(0.51, 0.74), st.floats(0.05, 2.0), st.floats(1.0, 1e4))
def test_cost_is_increasing(H, alpha, t1):
    m = GateModel(t1, alpha, H)
    t = np.geomspace(1e-6, 1e3, 30)
    assert np.all(np.diff(total_cost(t, m)) > 0)


def test_no_interior_minimum():
    m = GateModel(30.0, 0.5, 0.7)
    with pytest.raises(OptimizationError) as exc:
        optimal_gate_time(m, "numeric")
    assert exc.value.best is not None
    auto = optimal_gate_time(m)
    assert auto.closed_form == pytest.approx(T_OPT_TABLE) and not auto.interior and auto.numeric is None
    cf = optimal_gate_time(m, "closed_form")
    assert cf.t_opt == pytest.approx(T_OPT_TABLE)
    with pytest.raises(DomainError):
        optimal_gate_time(m, "brent")


def test_interior_minimum_from_chi_source():
    # χ with a dip: minimum of t/T1 + χ/3 lies inside the support
    t = np.geomspace(0.1, 10.0, 400)
    chi = 3.0 * (np.log(t) - np.log(2.0)) ** 2
    m = GateModel(1e6, chi_source=(t, chi))
    opt = optimal_gate_time(m)
    assert opt.interior and opt.closed_form is None
    assert opt.t_opt == pytest.approx(2.0, rel=0.01)
    with pytest.raises(DomainError):
        m.chi(20.0)


def test_golden_section():
    x, fx, inner = golden_section(lambda x: (math.log(x) - 1.0) ** 2, 0.1, 100.0)
    assert x == pytest.approx(math.e, rel=1e-6) and inner
    x, _, inner = golden_section(lambda x: x, 1.0, 2.0, log=False)
    assert not inner and x == pytest.approx(1.0, abs=1e-6)


def test_dd_suppression_formula_and_quadrature_monotone():
    assert dd_suppression(2, 0.7) == 1.0
    assert dd_suppression(8, 0.6) == pytest.approx(4**-1.2)
    with pytest.raises(DomainError):
        dd_suppression(3, 0.7)
    r = [dd_suppression_quadrature(n, 0.7) for n in (2, 8)]
    assert 0 < r[1] < r[0] < 1


def test_coupling_inversion_and_model_checks():
    a = noise_coupling_from_fit(0.25 * c_of_h(0.7), 0.7)
    assert a == pytest.approx(0.5)
    with pytest.raises(DomainError):
        GateModel(0.0)
    with pytest.raises(DomainError):
        GateModel(30.0, hurst=0.4)
    with pytest.raises(DomainError):
        GateModel(30.0).chi(0.0)


def test_sweep_csv(tmp_path):
    m = GateModel(30.0, 0.5, 0.7)
    t = np.geomspace(1e-4, 1.0, 50)
    d = read_csv(write_sweep_csv(m, t, tmp_path / "g.csv", T_OPT_TABLE))
    assert list(d) == ["t_g", "relaxation_term", "dephasing_term", "total", "is_optimal"]
    assert d["is_optimal"].count("1") == 1
    k = d["is_optimal"].index("1")
    assert float(d["t_g"][k]) == pytest.approx(T_OPT_TABLE, rel=0.2)
