"""Phase labels for points of a filtration field.

A state ``(v, T)`` below the critical temperature is liquid left of the
binodal, gas right of it and intermediate (condensing) in between.  The
binodal is tabulated once and interpolated in ``s = sqrt(T* - T)``, in
which both branches are smooth up to the critical point.  The interpolant is
a cubic Hermite spline of ``ln v`` with slopes from implicit differentiation
of the coexistence system, limited (Fritsch-Carlson) to stay monotone.

Along an isentrope the label depends on ``v`` alone, so every phase
interface in space is a level set ``u = Q(v_b)`` for a handful of
transition volumes ``v_b``.  Interfaces are located on grid lines by
bisection on ``u`` against those levels.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import ExtrapolationError, ParamError
from .filtration import invert_many
from .phase_equilibrium import _jacobian, binodal_curve, critical_point

TIE_TOL = 1e-9


class Phase(str, enum.Enum):
    LIQUID = "Liquid"
    INTERMEDIATE = "Intermediate"
    GAS = "Gas"
    SUPERCRITICAL = "Supercritical"


@dataclass(frozen=True)
class PhaseLabel:
    phase: Phase
    branch_id: int | None
    v: float
    T: float


def _log_slopes(model, T, v1, v2):
    """``d ln v / dT`` of both coexisting volumes at one binodal point."""
    FT = np.array([
        float(model.phi_Tv(T, v2) - model.phi_Tv(T, v1)),
        float(model.phi_T(T, v2) - model.phi_T(T, v1)
              - v2 * model.phi_Tv(T, v2) + v1 * model.phi_Tv(T, v1)),
    ])
    dv = -np.linalg.solve(_jacobian(model, T, v1, v2), FT)
    return dv[0] / v1, dv[1] / v2


def _limit_slopes(x, y, d):
    """Fritsch-Carlson limiter: shrink slopes so the Hermite cubic stays monotone."""
    d = d.copy()
    secant = np.diff(y) / np.diff(x)
    for k, m in enumerate(secant):
        if m == 0.0:
            d[k] = d[k + 1] = 0.0
            continue
        a, b = d[k] / m, d[k + 1] / m
        if a < 0:
            d[k], a = 0.0, 0.0
        if b < 0:
            d[k + 1], b = 0.0, 0.0
        r = a * a + b * b
        if r > 9.0:
            t = 3.0 / np.sqrt(r)
            d[k], d[k + 1] = t * a * m, t * b * m
    return d


@dataclass(frozen=True)
class BinodalTable:
    """Monotone interpolant of ``v1(T)`` and ``v2(T)`` on ``[T_min, T*]``.

    ``d1``, ``d2`` hold ``d ln v / ds`` at the nodes.
    """

    T_crit: float
    v_crit: float
    T_min: float
    s: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    @classmethod
    def build(cls, model, T_min, num=256, crit=None):
        crit = crit or critical_point(model)
        if not 0 < T_min < crit.T:
            raise ParamError(f"T_min={T_min} must lie in (0, T*={crit.T})")
        if num < 4:
            raise ParamError("binodal table needs at least 4 nodes")
        s = np.linspace(0.0, np.sqrt(crit.T - T_min), int(num))
        pts = binodal_curve(model, crit.T - s[1:] ** 2, crit=crit)
        v1 = np.array([crit.v] + [p.v1 for p in pts])
        v2 = np.array([crit.v] + [p.v2 for p in pts])
        d1 = np.empty(len(s))
        d2 = np.empty(len(s))
        for i, p in enumerate(pts, start=1):
            g1, g2 = _log_slopes(model, p.T, p.v1, p.v2)
            # dT/ds = -2s
            d1[i], d2[i] = -2 * s[i] * g1, -2 * s[i] * g2
        # the system is singular at s = 0; extrapolate the smooth slope quadratically
        d1[0] = 3 * d1[1] - 3 * d1[2] + d1[3]
        d2[0] = 3 * d2[1] - 3 * d2[2] + d2[3]
        return cls(crit.T, crit.v, float(crit.T - s[-1] ** 2), s, v1, v2, d1, d2)

    def __post_init__(self):
        y1, y2 = np.log(self.v1), np.log(self.v2)
        object.__setattr__(self, "_i1", CubicHermiteSpline(
            self.s, y1, _limit_slopes(self.s, y1, np.asarray(self.d1))))
        object.__setattr__(self, "_i2", CubicHermiteSpline(
            self.s, y2, _limit_slopes(self.s, y2, np.asarray(self.d2))))

    def volumes(self, T):
        """Binodal volumes ``(v1, v2)`` at ``T_min <= T < T*``."""
        T = np.asarray(T, dtype=float)
        if np.any(T < self.T_min * (1 - 1e-12)):
            raise ExtrapolationError(
                f"T={float(np.min(T))} below the binodal table minimum {self.T_min}")
        s = np.sqrt(np.clip(self.T_crit - T, 0.0, self.s[-1] ** 2))
        return np.exp(self._i1(s)), np.exp(self._i2(s))


PHASES = (Phase.LIQUID, Phase.INTERMEDIATE, Phase.GAS, Phase.SUPERCRITICAL)
NO_LABEL = -1


def _phase_codes(table, v, T):
    """Integer index into :data:`PHASES` for each ``(v, T)``."""
    v, T = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(T, dtype=float))
    codes = np.full(v.shape, 1, dtype=np.int8)
    sup = T >= table.T_crit
    codes[sup] = 3
    sub = ~sup
    if sub.any():
        v1, v2 = table.volumes(T[sub])
        vv = v[sub]
        tol = TIE_TOL * np.maximum(1.0, vv)
        sub_codes = np.ones(vv.shape, dtype=np.int8)
        sub_codes[vv < v1 - tol] = 0
        sub_codes[vv > v2 + tol] = 2
        codes[sub] = sub_codes
    return codes


def phase_of(table, v, T):
    """:class:`Phase` of one state, without the domain check of :func:`classify`."""
    return PHASES[int(_phase_codes(table, float(v), float(T)))]


def classify(model, table, v, T, branch_id=None):
    """Phase of the state ``(v, T)``; ties within 1e-9 go to Intermediate."""
    model.check_domain(T, v)
    code = _phase_codes(table, float(v), float(T))
    return PhaseLabel(PHASES[int(code)], branch_id, float(v), float(T))


# interfaces along an isentrope ---------------------------------------------------
@dataclass(frozen=True)
class Transition:
    """Volume on the isentrope where the label changes from ``left`` to ``right``."""

    v: float
    u: float
    branch_id: int | None
    left: Phase
    right: Phase


def _label_along(profile, table, v):
    return _phase_codes(table, v, profile.iso.tau(v))


def transition_volumes(profile, table):
    """Label changes along the tabulated isentrope, ordered by ``v``."""
    v = profile.v
    codes = _label_along(profile, table, v)
    out = []
    for i in np.flatnonzero(codes[1:] != codes[:-1]):
        lo, hi = float(v[i]), float(v[i + 1])
        left = codes[i]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if _label_along(profile, table, np.array([mid]))[0] == left:
                lo = mid
            else:
                hi = mid
        vb = 0.5 * (lo + hi)
        out.append(Transition(vb, profile.value(vb), profile.branch_of(vb),
                              PHASES[left], PHASES[codes[i + 1]]))
    return out


# field maps ------------------------------------------------------------------------
@dataclass(frozen=True)
class Interface:
    point: tuple
    branch_id: int
    inner: Phase
    outer: Phase


@dataclass
class LabeledGrid:
    """Labels of every sampled point on every branch of ``Q^-1``."""

    points: np.ndarray
    u: np.ndarray
    branch_ids: tuple
    mask: np.ndarray
    v: np.ndarray
    T: np.ndarray
    phase: np.ndarray
    interfaces: list = field(default_factory=list)
    center: np.ndarray | None = None

    def labels_at(self, i):
        """All :class:`PhaseLabel` s at point ``i``, one per branch."""
        return [PhaseLabel(PHASES[self.phase[b, i]], bid, float(self.v[b, i]), float(self.T[b, i]))
                for b, bid in enumerate(self.branch_ids) if self.mask[b, i]]

    def records(self):
        """Rows ``(x1, x2, x3, branch_id, v, T, label)`` in point, then branch order."""
        rows = []
        for i, x in enumerate(self.points):
            for lab in self.labels_at(i):
                rows.append((float(x[0]), float(x[1]), float(x[2]), lab.branch_id,
                             lab.v, lab.T, lab.phase.value))
        return rows

    def interface_radii(self, center=None):
        """Distance statistics of interface points from ``center``, per kind."""
        c = np.asarray(self.center if center is None else center, dtype=float)
        groups = {}
        for itf in self.interfaces:
            key = (itf.branch_id, itf.inner.value, itf.outer.value)
            groups.setdefault(key, []).append(float(np.linalg.norm(np.asarray(itf.point) - c)))
        summary = []
        for (bid, inner, outer), r in sorted(groups.items()):
            r = np.asarray(r)
            summary.append({"branch_id": bid, "inner": inner, "outer": outer,
                            "count": int(r.size), "mean": float(r.mean()),
                            "min": float(r.min()), "max": float(r.max())})
        return summary


def grid_points(axes):
    """Tensor grid of three coordinate arrays as ``(N, 3)`` points (C order)."""
    return np.stack(np.meshgrid(*[np.asarray(a, dtype=float) for a in axes], indexing="ij"),
                    axis=-1).reshape(-1, 3)


def map_field(hf, profile, table, axes=None):
    """Label every point of the tensor grid ``axes`` (default: the box nodes).

    ``axes`` and all reported points are in box coordinates.

    Interfaces are searched along grid lines between neighbouring points
    whose labels differ on the same branch.
    """
    axes = tuple(hf.domain.axes if axes is None else axes)
    shape = tuple(len(a) for a in axes)
    pts = grid_points(axes)
    u = hf.u_box(pts)
    branches = invert_many(profile, u)
    nb = len(branches)
    mask = np.zeros((nb, len(pts)), dtype=bool)
    v = np.full((nb, len(pts)), np.nan)
    T = np.full((nb, len(pts)), np.nan)
    phase = np.full((nb, len(pts)), NO_LABEL, dtype=np.int8)
    for b, (m, vb) in enumerate(branches):
        mask[b] = m
        if m.any():
            v[b, m] = vb[m]
            T[b, m] = profile.iso.tau(vb[m])
            phase[b, m] = _phase_codes(table, vb[m], T[b, m])

    center = (np.asarray(hf.sources[0].position) if len(hf.sources) == 1
              else hf.domain.center)
    grid = LabeledGrid(pts, u, tuple(b.branch_id for b in profile.branches),
                       mask, v, T, phase, [], center)
    grid.interfaces = _find_interfaces(hf, profile, table, grid, shape)
    return grid


def _find_interfaces(hf, profile, table, grid, shape):
    levels = transition_volumes(profile, table)
    idx = np.arange(grid.points.shape[0]).reshape(shape)
    found = []
    for axis in range(3):
        a = np.take(idx, np.arange(shape[axis] - 1), axis=axis).ravel()
        b = np.take(idx, np.arange(1, shape[axis]), axis=axis).ravel()
        for br, bid in enumerate(grid.branch_ids):
            both = grid.mask[br, a] & grid.mask[br, b]
            differ = both & (grid.phase[br, a] != grid.phase[br, b])
            if not differ.any():
                continue
            ia, ib = a[differ], b[differ]
            for lev in levels:
                if lev.branch_id != bid:
                    continue
                ua, ub = grid.u[ia], grid.u[ib]
                hit = (ua - lev.u) * (ub - lev.u) < 0
                if not hit.any():
                    continue
                ja, jb = ia[hit], ib[hit]
                pts = _bisect_level(hf, grid.points[ja], grid.points[jb], lev.u)
                da = np.linalg.norm(grid.points[ja] - grid.center, axis=1)
                db = np.linalg.norm(grid.points[jb] - grid.center, axis=1)
                for p, near_a, pa, pb in zip(pts, da <= db, grid.phase[br, ja], grid.phase[br, jb]):
                    inner, outer = (pa, pb) if near_a else (pb, pa)
                    found.append(Interface(tuple(map(float, p)), bid, PHASES[inner], PHASES[outer]))
    return found


def _bisect_level(hf, pa, pb, level, iters=60):
    ua = hf.u_box(pa) - level
    lo = np.zeros(len(pa))
    hi = np.ones(len(pa))
    sign_a = np.sign(ua)
    d = pb - pa
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = hf.u_box(pa + mid[:, None] * d) - level
        same = np.sign(fm) == sign_a
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    t = 0.5 * (lo + hi)
    return pa + t[:, None] * d
