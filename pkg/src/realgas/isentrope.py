"""Isentropes ``T = tau(v)`` at a fixed entropy level.

Entropy here is ``sigma = R_eff (phi + T phi_T)`` with additive constant 0.
The isentrope therefore solves ``phi + T phi_T = sigma0 / R_eff``.  The
left-hand side increases in ``T`` wherever ``eps_T > 0``, so a bracketed
Newton in ``log T`` always finds the root when one exists.

For the ideal, van der Waals and Peng-Robinson potentials the thermal part
of ``phi`` is ``(n/2) ln T`` plus a volume-only term, which gives power laws::

    ideal:  T = c v^(-2/n)
    vdW:    T = c (3v - 1)^(-2/n)
    PR:     T = c (v - 1)^(-2/n)

with ``c = exp(2 sigma0 / (n R_eff) - 1)``.  Other conventions drop the
``+ R_eff n / 2`` entropy offset; :func:`sigma0_from_offset_free` converts.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._numerics import bracketed_newton
from .errors import NoRootError, ParamError
from .gas_models import IdealGas, PengRobinson, VanDerWaals
from .thermo_core import sound_speed_sq_unchecked

T_BRACKET = (1e-6, 1e6)


class IsentropeForm(str, enum.Enum):
    IDEAL_POWER = "IdealPower"
    VDW_POWER = "VdwPower"
    PR_POWER = "PrPower"
    NUMERIC = "Numeric"


def _closed_form_kind(model):
    if isinstance(model, VanDerWaals):
        return IsentropeForm.VDW_POWER
    if isinstance(model, PengRobinson):
        return IsentropeForm.PR_POWER
    if isinstance(model, IdealGas):
        return IsentropeForm.IDEAL_POWER
    return IsentropeForm.NUMERIC


def sigma0_from_offset_free(model, sigma0_offset_free):
    """Shift an entropy level from the ``sigma = R ln(T^(n/2) ...)`` convention."""
    return sigma0_offset_free + 0.5 * model.R_eff * model.n


def sigma0_from_constant(model, c):
    """Entropy level whose power-law isentrope has prefactor ``c``."""
    if not c > 0:
        raise ParamError(f"isentrope constant must be positive, got {c!r}")
    return model.R_eff * 0.5 * model.n * (np.log(c) + 1.0)


@dataclass(frozen=True)
class Isentrope:
    model: object
    sigma0: float
    form: IsentropeForm
    c: float | None
    exponent: float

    @property
    def level(self):
        """Right-hand side ``sigma0 / R_eff`` of ``phi + T phi_T = level``."""
        return self.sigma0 / self.model.R_eff

    @property
    def alpha(self):
        return 1.0 + 2.0 / self.model.n

    def _base(self, v):
        if self.form is IsentropeForm.VDW_POWER:
            return 3 * v - 1
        if self.form is IsentropeForm.PR_POWER:
            return v - 1
        return v

    def tau(self, v):
        """Temperature on the isentrope at volume ``v`` (scalar or array)."""
        v_arr = np.asarray(v, dtype=float)
        self.model.check_domain(1.0, v_arr)
        if self.form is IsentropeForm.NUMERIC:
            return self.tau_numeric(v)
        out = self.c * self._base(v_arr) ** self.exponent
        return float(out) if out.ndim == 0 else out

    def tau_numeric(self, v):
        """Root of ``phi + T phi_T = level`` by bracketed Newton in ``log T``."""
        model = self.model
        v_arr = np.atleast_1d(np.asarray(v, dtype=float)).ravel()
        model.check_domain(1.0, v_arr)
        level = self.level

        def g(logT, idx):
            T = np.exp(logT)
            vi = v_arr[idx]
            return model.phi(T, vi) + T * model.phi_T(T, vi) - level

        def dg(logT, idx):
            T = np.exp(logT)
            vi = v_arr[idx]
            return T * (2 * model.phi_T(T, vi) + T * model.phi_TT(T, vi))

        all_idx = np.arange(v_arr.size)
        lo = np.full(v_arr.size, np.log(T_BRACKET[0]))
        hi = np.full(v_arr.size, np.log(T_BRACKET[1]))
        g_lo, g_hi = g(lo, all_idx), g(hi, all_idx)
        bad = ~((g_lo < 0) & (g_hi > 0))
        if bad.any():
            v_bad = float(v_arr[np.flatnonzero(bad)[0]])
            raise NoRootError(
                f"entropy level {self.sigma0!r} not reached for T in {T_BRACKET} at v={v_bad!r}")
        out = np.exp(bracketed_newton(g, dg, lo, hi, xtol=1e-15))
        return float(out[0]) if np.ndim(v) == 0 else out.reshape(np.shape(v))

    def entropy_residual(self, v):
        T = self.tau(v)
        return self.model.phi(T, v) + T * self.model.phi_T(T, v) - self.level


def make_isentrope(model, sigma0):
    """Isentrope of ``model`` at entropy ``sigma0`` (``sigma = R_eff (phi + T phi_T)``)."""
    form = _closed_form_kind(model)
    exponent = -2.0 / model.n
    c = None
    if form is not IsentropeForm.NUMERIC:
        c = float(np.exp(2.0 * sigma0 / (model.n * model.R_eff) - 1.0))
    return Isentrope(model, float(sigma0), form, c, exponent)


def isentrope_from_constant(model, c):
    """Power-law isentrope ``T = c base(v)^(-2/n)`` selected by its prefactor."""
    return make_isentrope(model, sigma0_from_constant(model, c))


def pressure_on_isentrope(iso, v):
    """Pressure along the isentrope.

    Uses ``8c(3v-1)^-alpha - 3/v^2`` (vdW) and ``c(v-1)^-alpha - 1/(v^2+2v-1)``
    (PR) when available, else ``R_eff tau phi_v``.
    """
    v_arr = np.asarray(v, dtype=float)
    if iso.form is IsentropeForm.VDW_POWER:
        iso.model.check_domain(1.0, v_arr)
        out = 8 * iso.c * (3 * v_arr - 1) ** (-iso.alpha) - 3.0 / v_arr ** 2
    elif iso.form is IsentropeForm.PR_POWER:
        iso.model.check_domain(1.0, v_arr)
        out = iso.c * (v_arr - 1) ** (-iso.alpha) - 1.0 / (v_arr ** 2 + 2 * v_arr - 1)
    else:
        T = iso.tau(v_arr)
        out = iso.model.R_eff * T * iso.model.phi_v(T, v_arr)
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def sound_speed_on_isentrope(iso, v):
    """``C_s(tau(v), v)``; negative where ``(dp/dv)`` at fixed entropy is positive.

    The zeros lie where the numerator of ``C_p`` vanishes, strictly inside
    the spinodal, not on it.
    """
    v_arr = np.asarray(v, dtype=float)
    out = np.asarray(sound_speed_sq_unchecked(iso.model, iso.tau(v_arr), v_arr))
    return float(out) if out.ndim == 0 else out
