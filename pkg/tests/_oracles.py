"""Reference computations sharing no code with ``realgas``.

Potentials are typed in again and differentiated with mpmath at 40 digits.
Coexistence is rebuilt from the equal-area rule on the vdW cubic and from a
brute-force scan of the pressure/chemical-potential mismatch.
"""
import math
import warnings

import mpmath as mp
import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, fsolve

mp.mp.dps = 40


# potentials --------------------------------------------------------------------
def phi_ideal(n):
    return lambda T, v: mp.mpf(n) / 2 * mp.log(T) + mp.log(v)


def phi_vdw(n):
    return lambda T, v: mp.mpf(n) / 2 * mp.log(T) + mp.log(3 * v - 1) + mp.mpf(9) / (8 * v * T)


def phi_pr(n):
    s2 = mp.sqrt(2)
    return lambda T, v: (mp.mpf(n) / 2 * mp.log(T) + mp.log(v - 1)
                         + mp.acoth((v + 1) / s2) / (s2 * T))


class RefGas:
    """State functions from a bare potential by high-precision differentiation."""

    def __init__(self, phi, R):
        self.phi = phi
        self.R = mp.mpf(R)

    def d(self, T, v, nT, nv):
        return mp.diff(self.phi, (mp.mpf(T), mp.mpf(v)), (nT, nv))

    def p(self, T, v):
        return self.R * T * self.d(T, v, 0, 1)

    def eps(self, T, v):
        return self.R * T ** 2 * self.d(T, v, 1, 0)

    def sigma(self, T, v):
        return self.R * (self.phi(T, v) + T * self.d(T, v, 1, 0))

    def _partials(self, f, T, v):
        T, v = mp.mpf(T), mp.mpf(v)
        return (mp.diff(lambda t: f(t, v), T), mp.diff(lambda w: f(T, w), v))

    def cv(self, T, v):
        return float(self._partials(self.eps, T, v)[0])

    def cp(self, T, v):
        """``T (d sigma / dT)`` at constant pressure."""
        sT, sv = self._partials(self.sigma, T, v)
        pT, pv = self._partials(self.p, T, v)
        return float(T * (sT - sv * pT / pv))

    def cs(self, T, v):
        """``-v^2 (dp/dv)`` at constant entropy."""
        sT, sv = self._partials(self.sigma, T, v)
        pT, pv = self._partials(self.p, T, v)
        return float(-mp.mpf(v) ** 2 * (pv - pT * sv / sT))


# van der Waals coexistence ------------------------------------------------------
def vdw_p(T, v):
    return 8 * T / (3 * v - 1) - 3 / v ** 2


def vdw_mu(T, v):
    """Reduced chemical potential up to a function of T alone."""
    return -8 * T / 3 * math.log(3 * v - 1) + 8 * T * v / (3 * v - 1) - 6 / v


def _vdw_extrema(T):
    r = np.roots([4 * T, -9, 6, -1])
    r = np.sort(r[np.abs(r.imag) < 1e-12].real)
    r = r[r > 1 / 3]
    return float(r[0]), float(r[-1])


def _outer_roots(T, ps, v_a, v_b):
    f = lambda v: vdw_p(T, v) - ps
    lo = 1 / 3 + 1e-15
    a = brentq(f, lo, v_a, xtol=1e-15, rtol=1e-15)
    hi = 2 * v_b
    while f(hi) > 0:
        hi *= 2
    c = brentq(f, v_b, hi, xtol=1e-15, rtol=1e-15)
    return a, c


def vdw_equal_area(T):
    """``(v1, v2, p*)`` with equal areas of ``p(v) - p*`` between the outer roots."""
    v_a, v_b = _vdw_extrema(T)
    p_lo = max(vdw_p(T, v_a), 0.0)
    p_hi = vdw_p(T, v_b)

    def area(ps):
        a, c = _outer_roots(T, ps, v_a, v_b)
        # split at the extrema so every piece is smooth and one-signed near ends
        pts = [a, v_a, v_b, c]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return sum(quad(lambda v: vdw_p(T, v) - ps, x, y, epsabs=0.0, epsrel=1e-13,
                            limit=500)[0] for x, y in zip(pts[:-1], pts[1:]))

    lo = p_lo + 1e-12 * (p_hi - p_lo) if p_lo > 0 else 1e-12 * p_hi
    ps = brentq(area, lo, p_hi * (1 - 1e-12), xtol=1e-17, rtol=1e-15, maxiter=500)
    a, c = _outer_roots(T, ps, v_a, v_b)
    return a, c, ps


def vdw_scan(T, coarse=400, resolution=1e-4):
    """Brute-force coexistence: grid scan of the mismatch, refine, polish."""
    v_a, v_b = _vdw_extrema(T)

    def mismatch(v1, v2):
        dp = vdw_p(T, v1) - vdw_p(T, v2)
        dmu = vdw_mu(T, v1) - vdw_mu(T, v2)
        return dp * dp + dmu * dmu

    g1 = np.linspace(1 / 3 + 1e-6, v_a, coarse)
    g2 = np.geomspace(v_b, 200 * v_b, coarse)
    M = np.array([[mismatch(a, b) for b in g2] for a in g1])
    i, j = np.unravel_index(np.argmin(M), M.shape)
    c1, c2 = g1[i], g2[j]
    w1 = g1[1] - g1[0]
    w2 = g2[min(j + 1, coarse - 1)] - g2[max(j - 1, 0)]
    while max(w1, w2) > resolution:
        s1 = np.linspace(max(c1 - w1, 1 / 3 + 1e-9), min(c1 + w1, v_a), 21)
        s2 = np.linspace(max(c2 - w2, v_b), c2 + w2, 21)
        M = np.array([[mismatch(a, b) for b in s2] for a in s1])
        i, j = np.unravel_index(np.argmin(M), M.shape)
        c1, c2 = s1[i], s2[j]
        w1, w2 = s1[1] - s1[0], s2[1] - s2[0]

    def eqs(x):
        return [vdw_p(T, x[0]) - vdw_p(T, x[1]), vdw_mu(T, x[0]) - vdw_mu(T, x[1])]

    sol = fsolve(eqs, [c1, c2], xtol=1e-13)
    return float(sol[0]), float(sol[1])


# miscellany --------------------------------------------------------------------
def golden_section_max(f, a, b, tol=1e-13):
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * max(1.0, abs(a)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def bisect(f, lo, hi, iters=200):
    f_lo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if (f(mid) > 0) == (f_lo > 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def trapezoid_integral(f, a, b, num=100_001):
    """Composite trapezoid rule with one Richardson step."""
    def rule(m):
        x = np.linspace(a, b, m)
        y = f(x)
        return (x[1] - x[0]) * (y.sum() - 0.5 * (y[0] + y[-1]))
    coarse, fine = rule(num), rule(2 * num - 1)
    return float((4 * fine - coarse) / 3)
