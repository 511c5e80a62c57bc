"""Concrete gas models: ideal, reduced van der Waals, reduced Peng-Robinson
and truncated virial expansions.

van der Waals and Peng-Robinson work in reduced coordinates.  For vdW the
coordinates are scaled by the critical point and the effective gas
constant is ``R_eff = 8/3``; for Peng-Robinson they are scaled by
``(alpha, b)`` and ``R_eff = 1``.  :class:`ReductionMap` converts to and from
physical units.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ParamError
from .thermo_core import GasModel

SQRT2 = math.sqrt(2.0)


def arccoth(x):
    """Real inverse hyperbolic cotangent, ``0.5 ln((x+1)/(x-1))`` for ``|x| > 1``.

    This is the real-valued reading of ``arctanh`` outside ``(-1, 1)`` used by
    the Peng-Robinson caloric equation.
    """
    x = np.asarray(x, dtype=float)
    return 0.5 * np.log((x + 1.0) / (x - 1.0))


class IdealGas(GasModel):
    """``phi = (n/2) ln T + ln v``."""

    name = "ideal"

    def __init__(self, n=3, R=1.0):
        super().__init__(n, R_eff=R, v_min=0.0)

    def phi(self, T, v):
        return 0.5 * self.n * np.log(T) + np.log(v)

    def phi_T(self, T, v):
        return 0.5 * self.n / T + 0.0 * v

    def phi_v(self, T, v):
        return 1.0 / v + 0.0 * T

    def phi_TT(self, T, v):
        return -0.5 * self.n / T ** 2 + 0.0 * v

    def phi_Tv(self, T, v):
        return 0.0 * (T * v)

    def phi_vv(self, T, v):
        return -1.0 / v ** 2 + 0.0 * T


class VanDerWaals(GasModel):
    """Reduced van der Waals gas, ``phi = ln(T^{n/2}(3v-1)) + 9/(8vT)``."""

    name = "vdw"

    def __init__(self, n=3):
        super().__init__(n, R_eff=8.0 / 3.0, v_min=1.0 / 3.0)

    def phi(self, T, v):
        return 0.5 * self.n * np.log(T) + np.log(3 * v - 1) + 9.0 / (8 * v * T)

    def phi_T(self, T, v):
        return 0.5 * self.n / T - 9.0 / (8 * v * T ** 2)

    def phi_v(self, T, v):
        return 3.0 / (3 * v - 1) - 9.0 / (8 * v ** 2 * T)

    def phi_TT(self, T, v):
        return -0.5 * self.n / T ** 2 + 9.0 / (4 * v * T ** 3)

    def phi_Tv(self, T, v):
        return 9.0 / (8 * v ** 2 * T ** 2)

    def phi_vv(self, T, v):
        return -9.0 / (3 * v - 1) ** 2 + 9.0 / (4 * v ** 3 * T)

    def spinodal_temperature(self, v):
        return (3 * v - 1) ** 2 / (4 * v ** 3)

    def spinodal_temperature_dv(self, v):
        return self.spinodal_temperature(v) * (6.0 / (3 * v - 1) - 3.0 / v)


class PengRobinson(GasModel):
    """Reduced Peng-Robinson gas.

    ``phi = ln(T^{n/2}(v-1)) + arccoth((v+1)/sqrt2) / (sqrt2 T)`` on ``v > 1``.
    """

    name = "pr"

    def __init__(self, n=3):
        super().__init__(n, R_eff=1.0, v_min=1.0)

    @staticmethod
    def _h(v):
        return arccoth((v + 1) / SQRT2) / SQRT2

    @staticmethod
    def _h1(v):
        return -1.0 / (v ** 2 + 2 * v - 1)

    @staticmethod
    def _h2(v):
        return (2 * v + 2) / (v ** 2 + 2 * v - 1) ** 2

    def phi(self, T, v):
        return 0.5 * self.n * np.log(T) + np.log(v - 1) + self._h(v) / T

    def phi_T(self, T, v):
        return 0.5 * self.n / T - self._h(v) / T ** 2

    def phi_v(self, T, v):
        return 1.0 / (v - 1) + self._h1(v) / T

    def phi_TT(self, T, v):
        return -0.5 * self.n / T ** 2 + 2 * self._h(v) / T ** 3

    def phi_Tv(self, T, v):
        return -self._h1(v) / T ** 2

    def phi_vv(self, T, v):
        return -1.0 / (v - 1) ** 2 + self._h2(v) / T

    def spinodal_temperature(self, v):
        return 2 * (v + 1) * (v - 1) ** 2 / (v ** 2 + 2 * v - 1) ** 2

    def spinodal_temperature_dv(self, v):
        log_dv = 1.0 / (v + 1) + 2.0 / (v - 1) - 4 * (v + 1) / (v ** 2 + 2 * v - 1)
        return self.spinodal_temperature(v) * log_dv


# virial models -----------------------------------------------------------------
@dataclass(frozen=True)
class VirialCoefficient:
    """A virial coefficient ``A_k(T)`` with its first two T-derivatives."""

    f: Callable
    df: Callable
    d2f: Callable
    label: str = ""

    @classmethod
    def constant(cls, b):
        b = float(b)
        return cls(lambda T: b + 0.0 * T, lambda T: 0.0 * T, lambda T: 0.0 * T, f"{b:g}")

    @classmethod
    def poly_inv_T(cls, coeffs: Sequence[float]):
        """``A(T) = sum_j coeffs[j] T^-j``."""
        a = [float(c) for c in coeffs]

        def f(T):
            return sum(c * T ** (-j) for j, c in enumerate(a)) + 0.0 * T

        def df(T):
            return sum(-j * c * T ** (-j - 1) for j, c in enumerate(a)) + 0.0 * T

        def d2f(T):
            return sum(j * (j + 1) * c * T ** (-j - 2) for j, c in enumerate(a)) + 0.0 * T

        return cls(f, df, d2f, "poly1/T" + str(a))


@dataclass(frozen=True)
class VirialSpec:
    n: float
    coefficients: Sequence[VirialCoefficient] = field(default_factory=tuple)


class VirialModel(GasModel):
    """Truncated virial potential ``(n/2) ln T + ln v - sum_k A_k(T) v^-k / k``."""

    name = "virial"

    def __init__(self, spec: VirialSpec, R=1.0, v_min=None):
        coeffs = tuple(spec.coefficients)
        if v_min is None:
            # truncation cutoff heuristic, evaluated at T = 1
            mags = [abs(float(c.f(1.0))) ** (1.0 / k) for k, c in enumerate(coeffs, 1)]
            v_min = 2 * max(mags, default=0.0)
        super().__init__(spec.n, R_eff=R, v_min=v_min)
        self.coefficients = coeffs

    def _sum(self, v, which, power_shift, weight):
        total = 0.0
        for k, c in enumerate(self.coefficients, 1):
            total = total + weight(k) * which(c) * v ** (-(k + power_shift))
        return total

    def phi(self, T, v):
        s = self._sum(v, lambda c: c.f(T), 0, lambda k: 1.0 / k)
        return 0.5 * self.n * np.log(T) + np.log(v) - s

    def phi_T(self, T, v):
        s = self._sum(v, lambda c: c.df(T), 0, lambda k: 1.0 / k)
        return 0.5 * self.n / T - s + 0.0 * v

    def phi_TT(self, T, v):
        s = self._sum(v, lambda c: c.d2f(T), 0, lambda k: 1.0 / k)
        return -0.5 * self.n / T ** 2 - s + 0.0 * v

    def phi_v(self, T, v):
        s = self._sum(v, lambda c: c.f(T), 1, lambda k: 1.0)
        return 1.0 / v + s + 0.0 * T

    def phi_Tv(self, T, v):
        s = self._sum(v, lambda c: c.df(T), 1, lambda k: 1.0)
        return s + 0.0 * (T * v)

    def phi_vv(self, T, v):
        s = self._sum(v, lambda c: c.f(T), 2, lambda k: k + 1.0)
        return -1.0 / v ** 2 - s + 0.0 * T


# constructors ------------------------------------------------------------------
def ideal_gas(n=3, R=1.0):
    return IdealGas(n, R)


def vdw_reduced(n=3):
    return VanDerWaals(n)


def pr_reduced(n=3):
    return PengRobinson(n)


def virial_model(spec: VirialSpec, R=1.0, v_min=None):
    return VirialModel(spec, R=R, v_min=v_min)


def load_virial_spec(path, n):
    """Read a JSON list of polynomial-in-1/T coefficient lists, one per ``A_k``."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list) or not all(isinstance(row, list) for row in data):
        raise ParamError(f"{path}: expected a JSON list of coefficient lists")
    return VirialSpec(n, tuple(VirialCoefficient.poly_inv_T(row) for row in data))


def model_from_string(spec: str, n=3.0):
    """Build a model from a CLI selector: ``ideal``, ``vdw``, ``pr`` or ``virial:<file>``."""
    if spec == "ideal":
        return ideal_gas(n)
    if spec == "vdw":
        return vdw_reduced(n)
    if spec == "pr":
        return pr_reduced(n)
    if spec.startswith("virial:"):
        return virial_model(load_virial_spec(spec[len("virial:"):], n))
    raise ParamError(f"unknown model {spec!r}; expected ideal, vdw, pr or virial:<file>")


# physical units ----------------------------------------------------------------
@dataclass(frozen=True)
class ReductionMap:
    """Scale factors such that ``physical = scale * reduced``."""

    T: float
    v: float
    p: float
    eps: float
    sigma: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("T", "v", "p", "eps", "sigma"):
            if not getattr(self, name) > 0:
                raise ParamError(f"scale for {name} must be positive")

    @classmethod
    def vdw(cls, a, b, R):
        if not (a > 0 and b > 0 and R > 0):
            raise ParamError("van der Waals parameters must be positive")
        return cls(T=8 * a / (27 * R * b), v=3 * b, p=a / (27 * b ** 2),
                   eps=a / (9 * b), sigma=3 * R / 8, params={"a": a, "b": b, "R": R})

    @classmethod
    def pr(cls, alpha, b, R):
        if not (alpha > 0 and b > 0 and R > 0):
            raise ParamError("Peng-Robinson parameters must be positive")
        return cls(T=alpha / (b * R), v=b, p=alpha / b ** 2, eps=alpha / b,
                   sigma=R, params={"alpha": alpha, "b": b, "R": R})

    def to_reduced(self, **quantities):
        return {k: val / getattr(self, k) for k, val in quantities.items()}

    def to_physical(self, **quantities):
        return {k: val * getattr(self, k) for k, val in quantities.items()}


def vdw_state_equations(a, b, R, n):
    """Physical van der Waals pair ``A(v, T)`` (pressure), ``B(v, T)`` (energy)."""
    def A(v, T):
        return (R * T * v ** 2 - a * (v - b)) / (v ** 2 * (v - b))

    def B(v, T):
        return 0.5 * n * R * T - a / v

    return A, B


def pr_state_equations(alpha, b, R, n):
    """Physical Peng-Robinson pair with the real ``arccoth`` caloric branch."""
    def A(v, T):
        return R * T / (v - b) - alpha / ((v + b) ** 2 - 2 * b ** 2)

    def B(v, T):
        return 0.5 * n * R * T - alpha * arccoth((v + b) / (SQRT2 * b)) / (SQRT2 * b)

    return A, B


def compatibility_residual(A, B, T, v, h=1e-5):
    """``(B/T^2)_v - (A/T)_T`` by central differences with relative step ``h``.

    Zero (to truncation error) when the thermic and caloric equations come
    from a common potential.
    """
    dv = h * abs(v)
    dT = h * abs(T)
    left = (B(v + dv, T) / T ** 2 - B(v - dv, T) / T ** 2) / (2 * dv)
    right = (A(v, T + dT) / (T + dT) - A(v, T - dT) / (T - dT)) / (2 * dT)
    return float(left - right)
