"""Small vectorised numerical kernels used across modules."""
from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .errors import ConvergenceError, QuadratureError

_GL_LO = leggauss(10)
_GL_HI = leggauss(20)


def bracketed_newton(f, fprime, lo, hi, xtol=1e-15, maxiter=200):
    """Solve ``f(x) = 0`` elementwise inside brackets ``[lo, hi]``.

    ``f(x, idx)`` and ``fprime(x, idx)`` evaluate element ``idx`` of the
    problem at ``x`` (both arrays), so converged elements drop out of the
    work.  ``f(lo)`` and ``f(hi)`` must differ in sign for every element (the
    caller checks).  Newton steps leaving the current bracket are replaced
    by bisection, so convergence is guaranteed for continuous ``f``.
    """
    lo = np.array(lo, dtype=float, copy=True).ravel()
    hi = np.array(hi, dtype=float, copy=True).ravel()
    all_idx = np.arange(lo.size)
    rising = f(lo, all_idx) < 0
    x = 0.5 * (lo + hi)
    active = all_idx
    for _ in range(maxiter):
        if active.size == 0:
            return x
        xa = x[active]
        fx = f(xa, active)
        below = (fx < 0) == rising[active]
        la = np.where(below, xa, lo[active])
        ha = np.where(below, hi[active], xa)
        lo[active], hi[active] = la, ha
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xa - fx / fprime(xa, active)
        ok = np.isfinite(xn) & (xn > la) & (xn < ha)
        xn = np.where(ok, xn, 0.5 * (la + ha))
        scale = xtol * np.maximum(1.0, np.abs(xa))
        done = (fx == 0) | (np.abs(xn - xa) <= scale) | (ha - la <= scale)
        x[active] = np.where(fx == 0, xa, xn)
        active = active[~done]
    raise ConvergenceError("bracketed Newton did not converge",
                           history=[float(np.max(hi[active] - lo[active]))])


def bounded_min(f, a, b, tol=1e-12, maxiter=500):
    """Minimise a unimodal scalar function on ``[a, b]``; returns ``(x, f(x))``."""
    res = minimize_scalar(f, bounds=(a, b), method="bounded",
                          options={"xatol": tol * max(1.0, abs(a), abs(b)), "maxiter": maxiter})
    return float(res.x), f(float(res.x))


def bounded_max(f, a, b, tol=1e-12, maxiter=500):
    x, fx = bounded_min(lambda t: -f(t), a, b, tol, maxiter)
    return x, -fx


def gauss_legendre_pair(f, a, b):
    """Integrate ``f`` over each ``[a_i, b_i]`` with 10- and 20-point rules.

    Returns ``(value, error_estimate)`` arrays; ``f`` must accept an array
    of shape ``(npoints, m)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    out = []
    for nodes, weights in (_GL_LO, _GL_HI):
        x = mid[None, ...] + half[None, ...] * nodes[:, None]
        out.append(half * np.tensordot(weights, f(x), axes=1))
    return out[1], np.abs(out[1] - out[0])


def integrate_segments(f, a, b, rtol=1e-12, atol=1e-14):
    """Vectorised integral of ``f`` over segments ``[a_i, b_i]``.

    Uses a Gauss-Legendre pair and falls back to adaptive Gauss-Kronrod
    (QUADPACK) on segments whose pair estimate misses the tolerance.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    val, err = gauss_legendre_pair(f, a, b)
    bad = np.flatnonzero(err > atol + rtol * np.abs(val))
    for i in bad:
        res, abserr = _quad_scalar(f, a[i], b[i], atol, rtol)
        if abserr > max(1e2 * (atol + rtol * abs(res)), 1e-10 * max(1.0, abs(res))):
            raise QuadratureError(f"segment [{a[i]}, {b[i]}]: error estimate {abserr:.3g}")
        val[i] = res
    return val


def _quad_scalar(f, a, b, atol, rtol):
    res, abserr = quad(lambda t: float(f(np.array([[t]]))[0, 0]), a, b,
                       epsabs=atol, epsrel=rtol, limit=200)[:2]
    return res, abserr
