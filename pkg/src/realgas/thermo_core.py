"""Thermodynamic state surfaces generated by a Massieu-Planck potential.

A gas is described by a single potential ``phi(T, v)``.  Pressure, inner
energy, entropy and the rest follow from ``phi`` and its first and second
partial derivatives::

    p     = R T phi_v
    eps   = R T^2 phi_T
    sigma = R (phi + T phi_T)
    gamma = R T (v phi_v - phi)
    eta   = R T (T phi_T + v phi_v)

``R`` is the model's effective gas constant ``R_eff``; in reduced
coordinates it absorbs the scale factors of the reduction.

All functions accept scalars or numpy arrays for ``T`` and ``v``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParamError, SingularError

BOUNDARY_TOL = 1e-12
SINGULAR_TOL = 1e-14


class Applicability(str, enum.Enum):
    APPLICABLE = "Applicable"
    SIGMA_I = "SigmaI"
    SIGMA_E = "SigmaE"
    NON_APPLICABLE = "NonApplicable"


@dataclass(frozen=True)
class Derivatives:
    phi: np.ndarray
    phi_T: np.ndarray
    phi_v: np.ndarray
    phi_TT: np.ndarray
    phi_Tv: np.ndarray
    phi_vv: np.ndarray


class GasModel:
    """Abstract Massieu-Planck potential on the domain ``T > 0, v_min < v < v_max``.

    Subclasses implement ``phi`` and its five partial derivatives
    analytically.  Models with a closed-form spinodal override
    :meth:`spinodal_temperature` (and its derivative) so that phase-boundary
    solvers do not need to root-find.
    """

    name = "abstract"

    def __init__(self, n, R_eff=1.0, v_min=0.0, v_max=np.inf):
        if not n > 0:
            raise ParamError(f"degrees of freedom must be positive, got {n!r}")
        if not R_eff > 0:
            raise ParamError(f"R_eff must be positive, got {R_eff!r}")
        if not v_max > v_min:
            raise ParamError("empty volume domain")
        self.n = float(n)
        self.R_eff = float(R_eff)
        self.v_min = float(v_min)
        self.v_max = float(v_max)

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n:g}, R_eff={self.R_eff:g})"

    # potential and derivatives -------------------------------------------
    def phi(self, T, v):
        raise NotImplementedError

    def phi_T(self, T, v):
        raise NotImplementedError

    def phi_v(self, T, v):
        raise NotImplementedError

    def phi_TT(self, T, v):
        raise NotImplementedError

    def phi_Tv(self, T, v):
        raise NotImplementedError

    def phi_vv(self, T, v):
        raise NotImplementedError

    def derivatives(self, T, v):
        return Derivatives(
            self.phi(T, v),
            self.phi_T(T, v),
            self.phi_v(T, v),
            self.phi_TT(T, v),
            self.phi_Tv(T, v),
            self.phi_vv(T, v),
        )

    # optional closed forms -------------------------------------------------
    def spinodal_temperature(self, v):
        """Closed-form T with ``phi_vv(T, v) = 0``, or None if unavailable."""
        return None

    def spinodal_temperature_dv(self, v):
        return None

    def state_equations(self):
        """Return the thermic/caloric pair ``(A(v, T), B(v, T))``."""
        R = self.R_eff
        return (lambda v, T: R * T * self.phi_v(T, v),
                lambda v, T: R * T ** 2 * self.phi_T(T, v))

    # domain ------------------------------------------------------------------
    def in_domain(self, T, v):
        T = np.asarray(T, dtype=float)
        v = np.asarray(v, dtype=float)
        return (T > 0) & np.isfinite(T) & (v > self.v_min) & (v < self.v_max)

    def check_domain(self, T, v):
        ok = self.in_domain(T, v)
        if not np.all(ok):
            Tb, vb = np.broadcast_arrays(np.asarray(T, float), np.asarray(v, float))
            i = np.flatnonzero(~np.broadcast_to(ok, Tb.shape))[0]
            raise DomainError(
                f"(T={float(Tb.flat[i])!r}, v={float(vb.flat[i])!r}) outside {self.name} domain "
                f"T > 0, {self.v_min:g} < v < {self.v_max:g}")


@dataclass(frozen=True)
class ThermoState:
    T: float
    v: float
    p: float
    eps: float
    sigma: float
    gamma: float
    eta: float
    applicability: Applicability


@dataclass(frozen=True)
class KappaForm:
    """Diagonal quadratic form ``coeff_TT dT^2 + coeff_vv dv^2``."""

    coeff_TT: float
    coeff_vv: float

    @property
    def negative_definite(self):
        return bool(np.all(self.coeff_TT < 0) and np.all(self.coeff_vv < 0))


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


# state functions -------------------------------------------------------------
def pressure(model, T, v):
    return _scalar(model.R_eff * T * model.phi_v(T, v))


def inner_energy(model, T, v):
    return _scalar(model.R_eff * T ** 2 * model.phi_T(T, v))


def entropy(model, T, v):
    return _scalar(model.R_eff * (model.phi(T, v) + T * model.phi_T(T, v)))


def gibbs_energy(model, T, v):
    return _scalar(model.R_eff * T * (v * model.phi_v(T, v) - model.phi(T, v)))


def enthalpy(model, T, v):
    return _scalar(model.R_eff * T * (T * model.phi_T(T, v) + v * model.phi_v(T, v)))


def pressure_T(model, T, v):
    """Partial derivative of pressure in T at fixed v."""
    return _scalar(model.R_eff * (model.phi_v(T, v) + T * model.phi_Tv(T, v)))


def pressure_v(model, T, v):
    """Partial derivative of pressure in v at fixed T."""
    return _scalar(model.R_eff * T * model.phi_vv(T, v))


def _classify(fvv, fe):
    if abs(fvv) <= BOUNDARY_TOL:
        return Applicability.SIGMA_I
    if abs(fe) <= BOUNDARY_TOL:
        return Applicability.SIGMA_E
    if fvv < 0 and fe > 0:
        return Applicability.APPLICABLE
    return Applicability.NON_APPLICABLE


def applicability(model, T, v):
    """Classify a point by the signs of ``phi_vv`` and ``T phi_TT + 2 phi_T``.

    Values within ``1e-12`` of zero land on the boundary labels.
    """
    model.check_domain(T, v)
    fvv = float(model.phi_vv(T, v))
    fe = float(T * model.phi_TT(T, v) + 2 * model.phi_T(T, v))
    return _classify(fvv, fe)


def applicable_mask(model, T, v):
    """Vectorised strict test of the applicable region (no boundary band)."""
    fvv = model.phi_vv(T, v)
    fe = T * model.phi_TT(T, v) + 2 * model.phi_T(T, v)
    return (fvv < -BOUNDARY_TOL) & (fe > BOUNDARY_TOL)


def evaluate_state(model, T, v):
    model.check_domain(T, v)
    T = float(T)
    v = float(v)
    d = model.derivatives(T, v)
    R = model.R_eff
    return ThermoState(
        T=T,
        v=v,
        p=float(R * T * d.phi_v),
        eps=float(R * T ** 2 * d.phi_T),
        sigma=float(R * (d.phi + T * d.phi_T)),
        gamma=float(R * T * (v * d.phi_v - d.phi)),
        eta=float(R * T * (T * d.phi_T + v * d.phi_v)),
        applicability=_classify(float(d.phi_vv), float(T * d.phi_TT + 2 * d.phi_T)),
    )


# heat capacities and sound speed ---------------------------------------------
def _bracket(d, T):
    # T^2 (phi_Tv^2 - phi_TT phi_vv) + 2T (phi_v phi_Tv - phi_T phi_vv) + phi_v^2
    return (T ** 2 * (d.phi_Tv ** 2 - d.phi_TT * d.phi_vv)
            + 2 * T * (d.phi_v * d.phi_Tv - d.phi_T * d.phi_vv)
            + d.phi_v ** 2)


def heat_capacity_v(model, T, v):
    model.check_domain(T, v)
    return _scalar(model.R_eff * T * (2 * model.phi_T(T, v) + T * model.phi_TT(T, v)))


def heat_capacity_p(model, T, v):
    model.check_domain(T, v)
    d = model.derivatives(T, v)
    if np.any(np.abs(d.phi_vv) <= SINGULAR_TOL):
        raise SingularError(f"phi_vv vanishes at (T={T}, v={v}); C_p diverges on the spinodal")
    return _scalar(-model.R_eff * _bracket(d, T) / d.phi_vv)


def sound_speed_sq_unchecked(model, T, v):
    """``C_s`` without domain or singularity checks (inf/nan propagate)."""
    d = model.derivatives(T, v)
    with np.errstate(divide="ignore", invalid="ignore"):
        return model.R_eff * v ** 2 * _bracket(d, T) / (2 * d.phi_T + T * d.phi_TT)


def sound_speed_sq(model, T, v):
    """Squared sound speed ``C_s = -v^2 (dp/dv)`` at constant entropy.

    Negative values are returned as-is: outside the applicable region the
    sign still tells which way the filtration potential bends.
    """
    model.check_domain(T, v)
    d = model.derivatives(T, v)
    e = 2 * d.phi_T + T * d.phi_TT
    if np.any(np.abs(e) <= SINGULAR_TOL):
        raise SingularError(f"2 phi_T + T phi_TT vanishes at (T={T}, v={v})")
    return _scalar(model.R_eff * v ** 2 * _bracket(d, T) / e)


def kappa_form(model, T, v):
    model.check_domain(T, v)
    R = model.R_eff
    coeff_TT = -R * (model.phi_TT(T, v) + 2 * model.phi_T(T, v) / T)
    coeff_vv = R * model.phi_vv(T, v)
    return KappaForm(_scalar(coeff_TT), _scalar(coeff_vv))


def monge_ampere_residual(model, F, T, v):
    """Residual of the sound-speed Monge-Ampere equation for ``phi``.

    ``F(v, T)`` prescribes the sound speed through ``c^2 = R_eff F v^2``;
    the residual is zero exactly when the model reproduces it.
    """
    model.check_domain(T, v)
    d = model.derivatives(T, v)
    return _scalar(_bracket(d, T) - F(v, T) * (2 * d.phi_T + T * d.phi_TT))
