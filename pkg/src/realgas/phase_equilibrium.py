"""Spinodal and binodal (coexistence) curves of a gas model.

Two states ``(v1, T)`` and ``(v2, T)`` coexist when they share pressure and
specific Gibbs energy.  In terms of the potential this is the 2x2 system::

    phi_v(v2) - phi_v(v1) = 0
    phi(v2) - phi(v1) - v2 phi_v(v2) + v1 phi_v(v1) = 0

solved here by damped Newton in ``(v1, v2)`` at fixed ``T``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from ._numerics import bounded_max
from .errors import ConvergenceError, NoRootError, SupercriticalError
from .thermo_core import pressure

log = logging.getLogger(__name__)

NEAR_CRITICAL = 1e-4
SPINODAL_EXCLUSION = 1e-6
RESIDUAL_TOL = 1e-10
MAX_NEWTON = 100


@dataclass(frozen=True)
class SpinodalPoint:
    v: float
    T: float


@dataclass(frozen=True)
class CoexistencePoint:
    T: float
    v1: float
    v2: float
    p: float
    dQ: float
    dW: float
    dEps: float


class CriticalPoint(NamedTuple):
    T: float
    v: float
    p: float


# spinodal ------------------------------------------------------------------------
def spinodal_T(model, v):
    """Temperature at which ``phi_vv(T, v) = 0``.

    Uses the model's closed form when it has one, otherwise bisects in
    ``log T`` over ``[1e-8, 1e8]``.
    """
    closed = model.spinodal_temperature(v)
    if closed is not None:
        return float(closed)

    def g(logT):
        return float(model.phi_vv(np.exp(logT), v))

    lo, hi = np.log(1e-8), np.log(1e8)
    g_lo, g_hi = g(lo), g(hi)
    if np.sign(g_lo) == np.sign(g_hi):
        raise NoRootError(f"phi_vv has constant sign in T at v={v}")
    return float(np.exp(brentq(g, lo, hi, xtol=1e-15, rtol=1e-15)))


def _spinodal_T_dv(model, v):
    closed = model.spinodal_temperature_dv(v)
    if closed is not None:
        return float(closed)
    h = 1e-6 * max(abs(v), 1.0)
    return (spinodal_T(model, v + h) - spinodal_T(model, v - h)) / (2 * h)


def _volume_grid(model, num=400):
    scale = max(model.v_min, 1.0)
    return model.v_min + scale * np.geomspace(1e-3, 1e3, num)


def critical_point(model):
    """Maximum of the spinodal curve ``T_s(v)``: ``(T*, v*, p*)``."""
    vs = _volume_grid(model)
    Ts = np.array([spinodal_T(model, v) for v in vs])
    i = int(np.argmax(Ts))
    if i == 0 or i == len(vs) - 1:
        raise NoRootError(f"spinodal of {model!r} has no interior maximum")
    a, b = vs[i - 1], vs[i + 1]
    da, db = _spinodal_T_dv(model, a), _spinodal_T_dv(model, b)
    if da > 0 > db:
        v_star = brentq(lambda v: _spinodal_T_dv(model, v), a, b, xtol=1e-15, rtol=1e-15)
    else:
        v_star, _ = bounded_max(lambda v: spinodal_T(model, v), a, b)
    T_star = spinodal_T(model, v_star)
    return CriticalPoint(T_star, float(v_star), float(pressure(model, T_star, v_star)))


def spinodal_volumes(model, T, crit=None):
    """The two volumes ``v_left < v* < v_right`` with ``phi_vv(T, v) = 0``."""
    crit = crit or critical_point(model)
    if T >= crit.T:
        raise SupercriticalError(f"T={T} is not below the critical temperature {crit.T}")

    def g(v):
        return float(model.phi_vv(T, v))

    if not g(crit.v) > 0:
        raise NoRootError(f"phi_vv(T={T}, v*) is not positive")
    lo = _left_probe(model, crit.v, lambda v: g(v) < 0)
    hi = _right_probe(crit.v, lambda v: g(v) < 0)
    v_left = brentq(g, lo, crit.v, xtol=1e-15, rtol=1e-15)
    v_right = brentq(g, crit.v, hi, xtol=1e-15, rtol=1e-15)
    return float(v_left), float(v_right)


def _left_probe(model, v_start, ok, max_steps=60):
    gap = v_start - model.v_min
    for k in range(1, max_steps):
        v = model.v_min + gap * 0.5 ** k
        if ok(v):
            return v
    raise NoRootError(f"no bracket found left of v={v_start}")


def _right_probe(v_start, ok, max_steps=200):
    v = v_start
    for _ in range(max_steps):
        v *= 2.0
        if ok(v):
            return v
    raise NoRootError(f"no bracket found right of v={v_start}")


# coexistence ----------------------------------------------------------------------
def _residuals(model, T, v1, v2):
    f1v = float(model.phi_v(T, v1))
    f2v = float(model.phi_v(T, v2))
    r1 = f2v - f1v
    r2 = float(model.phi(T, v2) - model.phi(T, v1)) - v2 * f2v + v1 * f1v
    return np.array([r1, r2])


def _jacobian(model, T, v1, v2):
    a = float(model.phi_vv(T, v1))
    b = float(model.phi_vv(T, v2))
    return np.array([[-a, b], [v1 * a, -v2 * b]])


def _pressure_level_solve(model, T, v_left, v_right, rtol):
    """Solve for coexistence along the level ``y = phi_v`` (one unknown).

    Each level fixes ``v1`` on the liquid branch and ``v2`` on the gas
    branch; the Gibbs difference is monotone in the level.
    """
    def phi_v(v):
        return float(model.phi_v(T, v))

    m = phi_v(v_left)
    M = phi_v(v_right)

    def volumes(y):
        lo = _left_probe(model, v_left, lambda v: phi_v(v) > y)
        v1 = brentq(lambda v: phi_v(v) - y, lo, v_left, xtol=1e-15, rtol=1e-15)
        hi = _right_probe(v_right, lambda v: phi_v(v) < y)
        v2 = brentq(lambda v: phi_v(v) - y, v_right, hi, xtol=1e-15, rtol=1e-15)
        return v1, v2

    def gibbs_gap(log_y):
        y = np.exp(log_y)
        v1, v2 = volumes(y)
        return float(model.phi(T, v2) - model.phi(T, v1)) - y * (v2 - v1)

    y_hi = M * (1 - 1e-13)
    if m > 0:
        y_lo = m * (1 + 1e-13)
    else:
        # the gap grows without bound as the level drops to zero
        y_lo = 0.5 * M
        while gibbs_gap(np.log(y_lo)) <= 0:
            y_lo *= 0.1
            if y_lo < 1e-300:
                raise NoRootError(f"coexistence level not bracketed at T={T}")
    log_y = brentq(gibbs_gap, np.log(y_lo), np.log(y_hi), xtol=rtol, rtol=max(rtol, 1e-15))
    return volumes(np.exp(log_y))


def _damped_newton(model, T, v1, v2, v_left, v_right):
    """Newton on ``(log(v1 - v_min), log v2)``, halving steps until the
    residual drops.  The log chart keeps the Jacobian well scaled when the
    gas volume runs to very large values at low temperature.
    """
    vm = model.v_min

    def to_v(z):
        return vm + np.exp(z[0]), np.exp(z[1])

    z = np.array([np.log(v1 - vm), np.log(v2)])
    F = _residuals(model, T, v1, v2)
    trace = [float(np.max(np.abs(F)))]
    for _ in range(MAX_NEWTON):
        if trace[-1] <= 1e-15:
            break
        a, b = to_v(z)
        J = _jacobian(model, T, a, b) * np.array([a - vm, b])
        step = np.linalg.solve(J, -F)
        if np.all(np.abs(step) <= 1e-16):
            break
        lam = 1.0
        while lam > 1e-10:
            zn = z + lam * step
            a, b = to_v(zn)
            if a < v_left and b > v_right:
                Fn = _residuals(model, T, a, b)
                if np.linalg.norm(Fn) < np.linalg.norm(F):
                    break
            lam *= 0.5
        else:
            # no decreasing step left: roundoff floor reached
            break
        z, F = zn, Fn
        trace.append(float(np.max(np.abs(F))))
    else:
        raise ConvergenceError(f"coexistence Newton at T={T} hit {MAX_NEWTON} iterations", trace)
    if trace[-1] > RESIDUAL_TOL:
        raise ConvergenceError(f"coexistence Newton at T={T} stalled at residual {trace[-1]:.3g}",
                               trace)
    return tuple(float(x) for x in to_v(z))


def coexistence_at_T(model, T, crit=None, guess=None):
    """Coexisting liquid/gas volumes at temperature ``T < T*``."""
    crit = crit or critical_point(model)
    if T >= crit.T:
        raise SupercriticalError(f"T={T} is not below the critical temperature {crit.T}")
    v_left, v_right = spinodal_volumes(model, T, crit)
    near_critical = crit.T - T < NEAR_CRITICAL

    if near_critical:
        # Jacobian degenerates as v1, v2 -> v*; solve in the single level unknown
        v1, v2 = _pressure_level_solve(model, T, v_left, v_right, rtol=1e-15)
    else:
        v1 = v2 = None
        if guess is not None and model.v_min < guess[0] < v_left and guess[1] > v_right:
            try:
                v1, v2 = _damped_newton(model, T, guess[0], guess[1], v_left, v_right)
            except ConvergenceError:
                log.debug("continuation guess failed at T=%g, restarting", T)
                v1 = None
        if v1 is None:
            g1, g2 = _pressure_level_solve(model, T, v_left, v_right, rtol=1e-6)
            v1, v2 = _damped_newton(model, T, g1, g2, v_left, v_right)
        if (v_left - v1 < SPINODAL_EXCLUSION) or (v2 - v_right < SPINODAL_EXCLUSION):
            raise ConvergenceError(f"coexistence pair at T={T} collapsed onto the spinodal")

    F = _residuals(model, T, v1, v2)
    if np.max(np.abs(F)) > RESIDUAL_TOL:
        raise ConvergenceError(f"coexistence at T={T}: residual {np.max(np.abs(F)):.3g}",
                               [float(np.max(np.abs(F)))])
    p = float(pressure(model, T, v1))
    dQ, dW, dEps = _jumps(model, T, v1, v2)
    return CoexistencePoint(float(T), v1, v2, p, dQ, dW, dEps)


def _jumps(model, T, v1, v2):
    R = model.R_eff
    d_phi = float(model.phi(T, v2) - model.phi(T, v1))
    d_phi_T = float(model.phi_T(T, v2) - model.phi_T(T, v1))
    dQ = R * T * (d_phi + T * d_phi_T)
    dW = -R * T * d_phi
    dEps = R * T ** 2 * d_phi_T
    return dQ, dW, dEps


def transition_jumps(model, cp):
    """Heat, work and inner-energy jumps ``(dQ, dW, dEps)`` across a transition."""
    return _jumps(model, cp.T, cp.v1, cp.v2)


def critical_coexistence_point(model, crit=None):
    """Degenerate coexistence point at the critical point (all jumps zero)."""
    crit = crit or critical_point(model)
    return CoexistencePoint(crit.T, crit.v, crit.v, crit.p, 0.0, 0.0, 0.0)


def binodal_curve(model, T_grid, crit=None):
    """Coexistence points along ``T_grid`` by continuation."""
    crit = crit or critical_point(model)
    points = []
    guess = None
    for T in T_grid:
        cp = coexistence_at_T(model, float(T), crit=crit, guess=guess)
        points.append(cp)
        guess = (cp.v1, cp.v2)
    return points


def binodal_charts(points):
    """Project coexistence points onto the ``(v1, v2)``, ``(p, T)``, ``(T, v)``
    and ``(p, v, T)`` charts.

    The ``(T, v)`` and ``(p, v, T)`` charts run down the liquid side and back
    up the gas side, forming one closed dome.
    """
    pts = sorted(points, key=lambda c: c.T)
    T = np.array([c.T for c in pts])
    v1 = np.array([c.v1 for c in pts])
    v2 = np.array([c.v2 for c in pts])
    p = np.array([c.p for c in pts])
    dome_v = np.concatenate([v1, v2[::-1]])
    dome_T = np.concatenate([T, T[::-1]])
    dome_p = np.concatenate([p, p[::-1]])
    return {
        "v1v2": np.column_stack([v1, v2]),
        "pT": np.column_stack([p, T]),
        "Tv": np.column_stack([dome_T, dome_v]),
        "pvT": np.column_stack([dome_p, dome_v, dome_T]),
    }
