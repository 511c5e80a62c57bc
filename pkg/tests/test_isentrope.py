import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from realgas import (NoRootError, ParamError, VirialCoefficient, VirialSpec, evaluate_state,
                     ideal_gas, isentrope_from_constant, make_isentrope, pr_reduced,
                     pressure_on_isentrope, sound_speed_on_isentrope, sound_speed_sq,
                     spinodal_T, vdw_reduced, virial_model)
from realgas.isentrope import IsentropeForm, sigma0_from_constant, sigma0_from_offset_free
from realgas.thermo_core import entropy

VDW = vdw_reduced(3)
PR = pr_reduced(3)


def test_ideal_isentrope_offset_free_level():
    m = ideal_gas(3)
    s = 0.7
    iso = make_isentrope(m, sigma0_from_offset_free(m, s))
    for v in (0.5, 1.0, 4.0):
        assert iso.tau(v) == pytest.approx((math.exp(s) / v) ** (2 / 3), rel=1e-14)
    assert iso.form is IsentropeForm.IDEAL_POWER


def test_vdw_unit_constant():
    iso = isentrope_from_constant(VDW, 1.0)
    assert iso.tau(1.0) == pytest.approx(2 ** (-2 / 3), rel=1e-15)
    assert iso.tau_numeric(1.0) == pytest.approx(2 ** (-2 / 3), rel=1e-10)
    assert iso.form is IsentropeForm.VDW_POWER


def test_pr_unit_constant():
    iso = isentrope_from_constant(PR, 1.0)
    assert iso.tau(2.0) == pytest.approx(1.0, rel=1e-15)
    assert iso.tau_numeric(2.0) == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("n", [3, 5])
def test_offset_free_constants(n):
    # with the entropy shifted by -R n/2 the prefactors are exp(3 s/(4n)) and exp(2 s/n)
    s = 0.4
    vdw, pr = vdw_reduced(n), pr_reduced(n)
    assert make_isentrope(vdw, sigma0_from_offset_free(vdw, s)).c == pytest.approx(
        math.exp(3 * s / (4 * n)), rel=1e-14)
    assert make_isentrope(pr, sigma0_from_offset_free(pr, s)).c == pytest.approx(
        math.exp(2 * s / n), rel=1e-14)


def test_nonpositive_constant_rejected():
    with pytest.raises(ParamError):
        sigma0_from_constant(VDW, 0.0)


@pytest.mark.parametrize("model", [VDW, PR, vdw_reduced(5), pr_reduced(6)], ids=str)
@pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
def test_closed_form_matches_numeric(model, c):
    iso = isentrope_from_constant(model, c)
    v = model.v_min + np.geomspace(0.01, 100 - model.v_min, 200)
    closed, numeric = iso.tau(v), iso.tau_numeric(v)
    assert np.max(np.abs(numeric / closed - 1)) <= 1e-10
    assert np.all(closed > 0)
    assert np.max(np.abs(iso.entropy_residual(v))) <= 1e-10


def test_virial_isentrope_residual():
    vm = virial_model(VirialSpec(3, (VirialCoefficient.poly_inv_T([0.3, -0.5]),)))
    iso = make_isentrope(vm, 1.2)
    assert iso.form is IsentropeForm.NUMERIC
    v = np.linspace(vm.v_min + 0.1, 30, 50)
    T = iso.tau(v)
    lhs = vm.phi(T, v) + T * vm.phi_T(T, v)
    assert np.max(np.abs(lhs - iso.level)) <= 1e-10


def test_unreachable_level_names_volume():
    vm = virial_model(VirialSpec(3, ()))
    iso = make_isentrope(vm, 1e3)
    with pytest.raises(NoRootError, match="v=2.5"):
        iso.tau(2.5)


@pytest.mark.parametrize("model", [VDW, PR], ids=str)
@given(v=st.floats(0.05, 50))
def test_entropy_constant_along_isentrope(model, v):
    iso = isentrope_from_constant(model, 1.3)
    v = model.v_min + v
    h = 1e-6
    ds = (entropy(model, iso.tau(v + h), v + h) - entropy(model, iso.tau(v - h), v - h)) / (2 * h)
    assert abs(ds) <= 1e-8


# pressure ------------------------------------------------------------------------
@pytest.mark.parametrize("model", [VDW, PR, ideal_gas(3)], ids=str)
def test_pressure_matches_state(model):
    iso = isentrope_from_constant(model, 1.1)
    for v in model.v_min + np.array([0.02, 0.4, 2.0, 30.0]):
        p_state = evaluate_state(model, iso.tau(v), v).p
        assert pressure_on_isentrope(iso, v) == pytest.approx(p_state, rel=1e-10, abs=1e-14)


def test_vdw_pressure_through_critical_point():
    iso = isentrope_from_constant(VDW, 2 ** (2 / 3))
    assert iso.tau(1.0) == pytest.approx(1.0, rel=1e-15)
    assert pressure_on_isentrope(iso, 1.0) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("n", [3, 5])
def test_vdw_pressure_closed_form(n):
    c = 0.8
    iso = isentrope_from_constant(vdw_reduced(n), c)
    alpha = 1 + 2 / n
    for v in (0.4, 1.0, 3.0):
        expected = 8 * c * (3 * v - 1) ** (-alpha) - 3 / v ** 2
        assert pressure_on_isentrope(iso, v) == pytest.approx(expected, rel=1e-14)


def test_ideal_pressure_decreasing():
    iso = make_isentrope(ideal_gas(3), 2.0)
    v = np.geomspace(0.1, 100, 100)
    p = pressure_on_isentrope(iso, v)
    assert np.allclose(p, iso.tau(v) / v, rtol=1e-14)
    assert np.all(np.diff(p) < 0)


# sound speed ---------------------------------------------------------------------
@pytest.mark.parametrize("model,c", [(VDW, 1.0), (VDW, 3.0), (PR, 0.2), (PR, 1.0)], ids=str)
def test_sound_speed_equals_adiabatic_slope(model, c):
    iso = isentrope_from_constant(model, c)
    for v in model.v_min + np.array([0.05, 0.3, 1.5, 8.0, 40.0]):
        cs = sound_speed_on_isentrope(iso, v)
        assert cs == pytest.approx(sound_speed_sq(model, iso.tau(v), v), rel=1e-14)
        if abs(cs) < 1e-3:
            continue
        h = 1e-6 * v
        dp = (pressure_on_isentrope(iso, v + h) - pressure_on_isentrope(iso, v - h)) / (2 * h)
        assert -v ** 2 * dp == pytest.approx(cs, rel=1e-6)


def test_ideal_sound_speed_positive():
    iso = make_isentrope(ideal_gas(3), 0.3)
    v = np.geomspace(0.01, 100, 60)
    assert np.allclose(sound_speed_on_isentrope(iso, v), iso.tau(v) * 5 / 3, rtol=1e-14)


@pytest.mark.xfail(strict=True, reason="ideal-gas sound speed carries (n+2)/n, not (n+2)/2")
def test_ideal_sound_speed_stated_factor():
    iso = make_isentrope(ideal_gas(3), 0.3)
    assert sound_speed_on_isentrope(iso, 2.0) == pytest.approx(iso.tau(2.0) * 5 / 2, rel=1e-12)


def _sound_speed_root(iso, lo, hi):
    return brentq(lambda v: sound_speed_on_isentrope(iso, v), lo, hi, xtol=1e-15, rtol=1e-15)


@pytest.mark.xfail(strict=True, reason="C_s vanishes on the C_p numerator curve, not on phi_vv = 0")
def test_sound_speed_root_at_spinodal_crossing():
    iso = isentrope_from_constant(VDW, 1.0)
    cross = brentq(lambda v: iso.tau(v) - spinodal_T(VDW, v), 0.4, 1.0, xtol=1e-15)
    root = _sound_speed_root(iso, 0.4, 1.5)
    assert abs(root - cross) <= 1e-8


@pytest.mark.parametrize("n", [3, 5])
def test_sound_speed_root_two_solvers(n):
    m = vdw_reduced(n)
    c = 0.8
    iso = isentrope_from_constant(m, c)
    # C_s = 0 where c (3v-1)^(-2/n) = n (3v-1)^2 / (4 (n+2) v^3); solve that in log form
    g = lambda v: (math.log(c) - 2 / n * math.log(3 * v - 1)
                   - math.log(n * (3 * v - 1) ** 2 / (4 * (n + 2) * v ** 3)))
    grid = np.linspace(0.34, 60, 4000)
    vals = np.array([sound_speed_on_isentrope(iso, v) for v in grid])
    roots = [_sound_speed_root(iso, a, b) for a, b, fa, fb
             in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]) if fa * fb < 0]
    assert len(roots) == 2
    for r in roots:
        other = brentq(g, r - 0.05, r + 0.05, xtol=1e-15)
        assert abs(other - r) <= 1e-8
        # and the root sits strictly inside the spinodal
        assert iso.tau(r) < spinodal_T(m, r)


def test_sound_speed_tends_to_ideal_value():
    # tau ~ v^(-2/3), so the attraction term a/(v tau) decays like v^(-1/3)
    iso = isentrope_from_constant(VDW, 1.0)
    vs = (1e4, 1e5, 1e6, 1e7)
    errs = [abs(sound_speed_on_isentrope(iso, v) / (VDW.R_eff * iso.tau(v) * 5 / 3) - 1)
            for v in vs]
    rates = [b / a for a, b in zip(errs[:-1], errs[1:])]
    assert all(r == pytest.approx(10 ** (-1 / 3), rel=0.05) for r in rates)
    assert all(b < a for a, b in zip(errs[:-1], errs[1:]))
