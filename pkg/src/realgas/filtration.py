"""The filtration potential ``Q(v)`` along an isentrope and its inverse.

``Q' = C_s k / (v^3 mu)`` so ``Q`` rises where the sound speed is real and
falls where ``C_s < 0``, a region nested inside the spinodal.  ``Q`` is
tabulated by adaptive Gauss-Kronrod quadrature on a geometric grid, normalised by
``Q(v_ref) = 0`` at the largest tabulated volume, and split into maximal
monotone branches at the zeros of ``C_s``.

A harmonic field ``u(x)`` is turned into volumes by inverting ``Q`` on each
branch.  Branches meet at fold points where ``Q' = 0``; these are excluded
from inversion because ``v`` is not locally determined there.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import quad_vec
from scipy.optimize import brentq

from ._numerics import bracketed_newton, bounded_max, bounded_min, integrate_segments
from .errors import (BranchAmbiguityError, DomainError, NoRootError, ParamError,
                     QuadratureError, SingularPointError)
from .isentrope import sound_speed_on_isentrope

MIN_SAMPLES = 64
PANEL_TOL = 1e-10
INVERT_TOL = 1e-9


# media -------------------------------------------------------------------------
@dataclass(frozen=True)
class Isotropic:
    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise ParamError(f"permeability must be positive, got {self.k!r}")


@dataclass(frozen=True)
class HomogeneousAnisotropic:
    """Constant permeability tensor ``F^T diag(eigs) F``; rows of ``frame``
    are the eigenvectors."""

    eigs: tuple
    frame: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    def __post_init__(self):
        eigs = np.asarray(self.eigs, dtype=float)
        frame = np.asarray(self.frame, dtype=float)
        if eigs.shape != (3,) or not np.all(eigs > 0):
            raise ParamError(f"need three positive eigenvalues, got {self.eigs!r}")
        if frame.shape != (3, 3) or np.max(np.abs(frame @ frame.T - np.eye(3))) > 1e-12:
            raise ParamError("eigenframe must be a 3x3 orthonormal matrix")
        object.__setattr__(self, "eigs", tuple(eigs))
        object.__setattr__(self, "frame", tuple(map(tuple, frame)))

    @property
    def tensor(self):
        F = np.asarray(self.frame)
        return F.T @ np.diag(self.eigs) @ F


@dataclass(frozen=True)
class MediumSpec:
    mu: float
    permeability: Isotropic | HomogeneousAnisotropic

    def __post_init__(self):
        if not self.mu > 0:
            raise ParamError(f"viscosity must be positive, got {self.mu!r}")

    @property
    def q_scale(self):
        """Factor ``k/mu`` in ``Q'``; 1/mu for the scalar ``q`` of anisotropic media."""
        if isinstance(self.permeability, Isotropic):
            return self.permeability.k / self.mu
        return 1.0 / self.mu


def anisotropic_to_isotropic(medium, x):
    """Map ``x`` to eigenframe coordinates scaled by ``1/sqrt(k_i)``.

    In the new coordinates ``div(k grad q) = 0`` becomes ``Laplace(q) = 0``.
    Accepts one point or an ``(N, 3)`` array.
    """
    perm = medium.permeability if isinstance(medium, MediumSpec) else medium
    if not isinstance(perm, HomogeneousAnisotropic):
        raise ParamError("anisotropic_to_isotropic needs a HomogeneousAnisotropic medium")
    F = np.asarray(perm.frame)
    x = np.asarray(x, dtype=float)
    return (x @ F.T) / np.sqrt(perm.eigs)


def isotropic_to_anisotropic(medium, y):
    perm = medium.permeability if isinstance(medium, MediumSpec) else medium
    if not isinstance(perm, HomogeneousAnisotropic):
        raise ParamError("isotropic_to_anisotropic needs a HomogeneousAnisotropic medium")
    F = np.asarray(perm.frame)
    y = np.asarray(y, dtype=float)
    return (y * np.sqrt(perm.eigs)) @ F


# profile -----------------------------------------------------------------------
@dataclass(frozen=True)
class Branch:
    """Maximal monotone piece of ``Q`` on ``[v_lo, v_hi]``.

    An end is closed when it is an end of the tabulated range and open when
    it is a fold point.
    """

    branch_id: int
    v_lo: float
    v_hi: float
    q_lo: float
    q_hi: float
    increasing: bool
    lo_closed: bool
    hi_closed: bool

    @property
    def q_range(self):
        return (min(self.q_lo, self.q_hi), max(self.q_lo, self.q_hi))

    def contains_v(self, v):
        above = v >= self.v_lo if self.lo_closed else v > self.v_lo
        below = v <= self.v_hi if self.hi_closed else v < self.v_hi
        return above & below

    def contains_u(self, u):
        lo_q, hi_q = self.q_range
        # the end that sits at v_lo is closed or open with that end
        lo_closed = self.lo_closed if self.increasing else self.hi_closed
        hi_closed = self.hi_closed if self.increasing else self.lo_closed
        above = u >= lo_q if lo_closed else u > lo_q
        below = u <= hi_q if hi_closed else u < hi_q
        return above & below


@dataclass(frozen=True)
class QProfile:
    iso: object
    medium: MediumSpec
    v_ref: float
    v: np.ndarray
    q: np.ndarray
    dq: np.ndarray
    branches: tuple
    folds: tuple = field(default_factory=tuple)

    @property
    def v_range(self):
        return float(self.v[0]), float(self.v[-1])

    def integrand(self, v):
        """``Q'(v) = C_s k / (v^3 mu)`` along the isentrope."""
        v = np.asarray(v, dtype=float)
        return self.medium.q_scale * sound_speed_on_isentrope(self.iso, v) / v ** 3

    def value(self, v):
        """``Q(v)`` for ``v`` inside the tabulated range (scalar or array)."""
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        lo, hi = self.v_range
        if np.any((v_arr < lo) | (v_arr > hi)):
            raise DomainError(f"Q requested outside the tabulated range [{lo}, {hi}]")
        idx = np.clip(np.searchsorted(self.v, v_arr) - 1, 0, len(self.v) - 2)
        left = self.v[idx]
        out = self.q[idx] + _integrate(self.integrand, left, v_arr)
        return float(out[0]) if np.ndim(v) == 0 else out.reshape(np.shape(v))

    def derivative(self, v):
        return self.integrand(v)

    def branch(self, branch_id):
        return self.branches[branch_id]

    def branch_of(self, v):
        """Branch id holding ``v``, or None at a fold point or outside the range."""
        for b in self.branches:
            if b.contains_v(v):
                return b.branch_id
        return None


def _integrate(f, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros(np.broadcast(a, b).shape)
    nz = a != b
    if nz.any():
        out[nz] = integrate_segments(lambda x: f(x), a[nz], b[nz], rtol=1e-13, atol=1e-15)
    return out


def _panel_integrals(f, nodes):
    """Integral of ``f`` over every panel ``[nodes[i], nodes[i+1]]``.

    All panels go through one vector-valued adaptive Gauss-Kronrod run.  Each
    component is divided by a rough magnitude of its panel so that the
    max-norm tolerance acts per panel.
    """
    a = nodes[:-1]
    width = np.diff(nodes)
    probe = np.abs(np.stack([f(a), f(a + 0.5 * width), f(nodes[1:])]))
    mag = np.max(probe, axis=0) * width
    mag = np.where(mag > 0, mag, 1.0)
    res, err, info = quad_vec(lambda t: f(a + t * width) * width / mag, 0.0, 1.0,
                              epsabs=1e-14, epsrel=1e-13, norm="max", quadrature="gk21",
                              limit=20000, full_output=True)
    if info.status != 0 or err > PANEL_TOL:
        raise QuadratureError(f"panel quadrature error estimate {err:.3g} above tolerance")
    return res * mag


def _sign_changes(f, nodes, vals):
    """Brackets of the zeros of ``f`` on ``nodes``.

    Adjacent sign changes are found directly.  A local extremum of ``|f|``
    that stays on one side of zero is refined by bounded minimisation so that
    near-tangent double zeros between nodes are not missed.
    """
    brackets = []
    for i in range(len(nodes) - 1):
        if vals[i] == 0.0:
            continue
        if vals[i] * vals[i + 1] < 0:
            brackets.append((nodes[i], nodes[i + 1]))
    for i in range(1, len(nodes) - 1):
        a, b = nodes[i - 1], nodes[i + 1]
        s = np.sign(vals[i])
        if s > 0 and vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]:
            x, fx = bounded_min(lambda t: float(f(t)), a, b, tol=1e-14)
        elif s < 0 and vals[i] >= vals[i - 1] and vals[i] >= vals[i + 1]:
            x, fx = bounded_max(lambda t: float(f(t)), a, b, tol=1e-14)
        else:
            continue
        if np.sign(fx) != s and np.sign(vals[i - 1]) == s and np.sign(vals[i + 1]) == s:
            brackets.extend([(a, x), (x, b)])
    return sorted(brackets)


def build_q_profile(iso, medium, v_range, samples=256):
    """Tabulate ``Q`` on ``samples`` nodes spaced geometrically in ``v - v_min``."""
    model = iso.model
    samples = int(samples)
    if samples < MIN_SAMPLES:
        raise ParamError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    v_lo, v_hi = (float(x) for x in v_range)
    if not (v_lo > model.v_min and v_hi > v_lo and v_hi < model.v_max):
        raise DomainError(f"v_range {v_range!r} not inside the {model.name} domain")
    nodes = model.v_min + np.geomspace(v_lo - model.v_min, v_hi - model.v_min, samples)
    nodes[0], nodes[-1] = v_lo, v_hi

    def f(v):
        v = np.asarray(v, dtype=float)
        return medium.q_scale * sound_speed_on_isentrope(iso, v) / v ** 3

    panels = _panel_integrals(f, nodes)
    # accumulate from v_ref so values near the normalisation point stay exact
    q = -np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])
    dq = f(nodes)

    folds = tuple(brentq(lambda t: float(f(t)), a, b, xtol=1e-15, rtol=1e-15)
                  for a, b in _sign_changes(f, nodes, dq))
    proto = QProfile(iso, medium, float(nodes[-1]), nodes, q, dq, (), folds)

    edges = [v_lo, *folds, v_hi]
    q_edges = [float(q[0]), *(proto.value(x) for x in folds), float(q[-1])]
    branches = []
    for i in range(len(edges) - 1):
        mid = 0.5 * (edges[i] + edges[i + 1])
        branches.append(Branch(
            branch_id=i, v_lo=edges[i], v_hi=edges[i + 1],
            q_lo=q_edges[i], q_hi=q_edges[i + 1],
            increasing=bool(f(mid) > 0),
            lo_closed=(i == 0), hi_closed=(i == len(edges) - 2)))
    return QProfile(iso, medium, float(nodes[-1]), nodes, q, dq, tuple(branches), folds)


# inversion -----------------------------------------------------------------------
def _invert_on_branch(profile, branch, u):
    """Volumes on ``branch`` with ``Q(v) = u`` for an array ``u`` inside its range."""
    sel = (profile.v >= branch.v_lo) & (profile.v <= branch.v_hi)
    v_nodes = np.concatenate([[branch.v_lo], profile.v[sel], [branch.v_hi]])
    q_nodes = np.concatenate([[branch.q_lo], profile.q[sel], [branch.q_hi]])
    order = 1 if branch.increasing else -1
    # bracket from the table; tiny table wiggles at folds are absorbed by clipping
    q_mono = np.maximum.accumulate(order * q_nodes)
    j = np.clip(np.searchsorted(q_mono, order * u) - 1, 0, len(v_nodes) - 2)
    lo, hi = v_nodes[j].copy(), v_nodes[j + 1].copy()
    f_lo = order * (profile.value(lo) - u)
    f_hi = order * (profile.value(hi) - u)
    # widen to the whole branch if the table bracket is not tight
    loose = ~((f_lo <= 0) & (f_hi >= 0))
    lo[loose], hi[loose] = branch.v_lo, branch.v_hi
    v = bracketed_newton(lambda x, i: order * (profile.value(x) - u[i]),
                         lambda x, i: order * profile.derivative(x),
                         lo, hi, xtol=1e-15)
    return v


def invert_many(profile, u):
    """Vectorised :func:`invert_q`: for each branch, ``(mask, v)`` arrays."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = []
    for b in profile.branches:
        mask = b.contains_u(u)
        v = np.full(u.shape, np.nan)
        if mask.any():
            v[mask] = _invert_on_branch(profile, b, u[mask])
        out.append((mask, v))
    return out


def invert_q(profile, u):
    """All ``(v, branch_id)`` with ``Q(v) = u``, ordered by ``v``."""
    hits = []
    for b, (mask, v) in zip(profile.branches, invert_many(profile, [u])):
        if mask[0]:
            hits.append((float(v[0]), b.branch_id))
    return sorted(hits)


# invertibility thresholds --------------------------------------------------------
def _alpha(n):
    if not n > 2:
        raise ParamError(f"invertibility threshold needs n > 2, got {n!r}")
    return 1.0 + 2.0 / n


def vdw_invertibility_threshold(n):
    """Smallest isentrope constant ``c`` above which the vdW ``Q`` is monotone."""
    a = _alpha(n)
    return (1 + a) ** (1 + a) * (2 - a) ** (2 - a) / (4 * a)


def pr_cubic_root(n):
    """Root ``v0 > 1`` of ``(a-2)v^3 + 3a v^2 + (a+2)v + 4 - a = 0``, ``a = 1 + 2/n``."""
    if not n > 2:
        raise NoRootError(f"no root with v0 > 1 for n={n!r} (needs n > 2)")
    a = 1.0 + 2.0 / n

    def cubic(v):
        return (a - 2) * v ** 3 + 3 * a * v ** 2 + (a + 2) * v + 4 - a

    lo, hi = 1.0, 2.0
    if not cubic(lo) > 0:
        raise NoRootError(f"cubic not positive at v=1 for n={n!r}")
    for _ in range(200):
        if cubic(hi) < 0:
            break
        lo, hi = hi, 2 * hi
    else:
        raise NoRootError(f"no sign change of the threshold cubic for n={n!r}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if cubic(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pr_invertibility_threshold(n):
    """PR analogue of :func:`vdw_invertibility_threshold`."""
    a = _alpha(n)
    v0 = pr_cubic_root(n)
    return 2.0 / a * (v0 + 1) * (v0 - 1) ** (a + 1) / (v0 ** 2 + 2 * v0 - 1) ** 2


# point sources -----------------------------------------------------------------
@dataclass(frozen=True)
class SourceSpec:
    """Point source at ``position`` contributing ``I / (4 pi |x - position|)`` to ``u``.

    Mass flux is ``grad u``, so with ``Q`` increasing in ``v`` a negative
    ``I`` lowers ``u`` and compresses the gas near the point.
    """

    position: tuple
    I: float

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (3,) or not np.all(np.isfinite(pos)):
            raise ParamError(f"source position must be a finite 3-vector, got {self.position!r}")
        if not np.isfinite(self.I):
            raise ParamError(f"source intensity must be finite, got {self.I!r}")
        object.__setattr__(self, "position", tuple(float(x) for x in pos))
        object.__setattr__(self, "I", float(self.I))


def check_distinct(sources: Sequence[SourceSpec]):
    pos = [s.position for s in sources]
    if len(set(pos)) != len(pos):
        raise ParamError("source positions must be pairwise distinct")


def source_potential(sources, x):
    """``sum I_i / (4 pi |x - a_i|)`` at points ``x`` (shape ``(..., 3)``)."""
    x = np.asarray(x, dtype=float)
    total = np.zeros(x.shape[:-1])
    for s in sources:
        r = np.linalg.norm(x - np.asarray(s.position), axis=-1)
        if np.any(r == 0):
            raise SingularPointError(f"field evaluated at the source {s.position}")
        total = total + s.I / (4 * np.pi * r)
    return total


def point_source_field(profile, src, x):
    """``(v, T, branch_id)`` triples solving ``Q(v) = I / (4 pi |x - a|)``."""
    u = float(source_potential([src], np.asarray(x, dtype=float)))
    return [(v, float(profile.iso.tau(v)), bid) for v, bid in invert_q(profile, u)]


def require_single_branch(profile, v_values):
    """Branch id holding every volume in ``v_values``; raises when there is none."""
    v_values = np.atleast_1d(np.asarray(v_values, dtype=float))
    lo, hi = profile.v_range
    if np.any((v_values < lo) | (v_values > hi)):
        raise DomainError(f"boundary volumes outside the tabulated range [{lo}, {hi}]")
    for b in profile.branches:
        if np.all(b.contains_v(v_values)):
            return b.branch_id
    raise BranchAmbiguityError("boundary volumes do not lie inside one monotone branch of Q")


__all__ = [
    "Isotropic", "HomogeneousAnisotropic", "MediumSpec", "Branch", "QProfile",
    "SourceSpec", "anisotropic_to_isotropic", "isotropic_to_anisotropic",
    "build_q_profile", "invert_q", "invert_many", "vdw_invertibility_threshold",
    "pr_cubic_root", "pr_invertibility_threshold", "point_source_field",
    "source_potential", "check_distinct", "require_single_branch",
]
