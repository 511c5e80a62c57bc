"""Harmonic fields in a box: point-source kernels plus a grid correction.

The field is ``u(x) = sum_i I_i / (4 pi |x - a_i|) + u0(x)`` where ``u0`` is
harmonic in the box and takes whatever boundary values make ``u`` equal the
prescribed data.  Sources are handled analytically and never touch the
grid; ``u0`` is smooth and is found by conjugate gradients on the 7-point
stencil, then read off by trilinear interpolation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import cg

from .errors import ConvergenceError, DomainError, ParamError
from .filtration import (HomogeneousAnisotropic, anisotropic_to_isotropic, check_distinct,
                         invert_q, isotropic_to_anisotropic, require_single_branch,
                         source_potential)

MAX_ITER = 100_000
SOLVE_RTOL = 1e-12
RESIDUAL_LIMIT = 1e-8


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box with ``shape[i]`` interior nodes along axis ``i``."""

    lower: tuple
    upper: tuple
    shape: tuple = (32, 32, 32)

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        shape = tuple(int(s) for s in self.shape)
        if lo.shape != (3,) or hi.shape != (3,) or len(shape) != 3:
            raise ParamError("box corners and shape must have three components")
        if not np.all(hi > lo):
            raise ParamError(f"upper corner {self.upper} must exceed lower corner {self.lower}")
        if min(shape) < 8:
            raise ParamError(f"need at least 8 interior nodes per axis, got {shape}")
        object.__setattr__(self, "lower", tuple(lo))
        object.__setattr__(self, "upper", tuple(hi))
        object.__setattr__(self, "shape", shape)

    @property
    def h(self):
        return (np.asarray(self.upper) - np.asarray(self.lower)) / (np.asarray(self.shape) + 1)

    @property
    def axes(self):
        """Node coordinates per axis, boundary nodes included."""
        return tuple(lo + h * np.arange(n + 2)
                     for lo, h, n in zip(self.lower, self.h, self.shape))

    @property
    def center(self):
        return 0.5 * (np.asarray(self.lower) + np.asarray(self.upper))

    def mesh(self):
        """All node coordinates as an array of shape ``(n1+2, n2+2, n3+2, 3)``."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    def boundary_mask(self):
        mask = np.ones(tuple(n + 2 for n in self.shape), dtype=bool)
        mask[1:-1, 1:-1, 1:-1] = False
        return mask

    def contains(self, x, margin=0.0):
        x = np.asarray(x, dtype=float)
        return np.all((x >= np.asarray(self.lower) + margin)
                      & (x <= np.asarray(self.upper) - margin), axis=-1)


@dataclass(frozen=True)
class GridSolution:
    """``u0`` on every node of the box, with the CG residual trace."""

    domain: BoxDomain
    values: np.ndarray
    residual: float
    history: tuple = field(default_factory=tuple)

    def interpolator(self):
        return RegularGridInterpolator(self.domain.axes, self.values, method="linear")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(self.domain.contains(x)):
            raise DomainError("point outside the box")
        return self.interpolator()(x.reshape(-1, 3)).reshape(x.shape[:-1])


def _negative_laplacian(domain):
    mats = []
    for n, h in zip(domain.shape, domain.h):
        d = sp.diags([np.ones(n - 1), -2 * np.ones(n), np.ones(n - 1)], [-1, 0, 1]) / h ** 2
        mats.append(sp.csr_matrix(d))
    n1, n2, n3 = domain.shape
    I1, I2, I3 = (sp.identity(k, format="csr") for k in (n1, n2, n3))
    L = (sp.kron(sp.kron(mats[0], I2), I3) + sp.kron(sp.kron(I1, mats[1]), I3)
         + sp.kron(sp.kron(I1, I2), mats[2]))
    return (-L).tocsr()


def _boundary_rhs(domain, G):
    hx, hy, hz = domain.h
    b = ((G[:-2, 1:-1, 1:-1] + G[2:, 1:-1, 1:-1]) / hx ** 2
         + (G[1:-1, :-2, 1:-1] + G[1:-1, 2:, 1:-1]) / hy ** 2
         + (G[1:-1, 1:-1, :-2] + G[1:-1, 1:-1, 2:]) / hz ** 2)
    return b.ravel()


def solve_dirichlet_grid(domain, G):
    """Discrete harmonic extension of the boundary entries of ``G``."""
    G = np.array(G, dtype=float, copy=True)
    G[1:-1, 1:-1, 1:-1] = 0.0
    b = _boundary_rhs(domain, G)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return GridSolution(domain, G, 0.0, (0.0,))
    A = _negative_laplacian(domain)
    history = []

    def record(xk):
        history.append(float(np.linalg.norm(b - A @ xk)) / b_norm)

    x, info = cg(A, b, x0=np.zeros_like(b), rtol=SOLVE_RTOL, atol=0.0,
                 maxiter=MAX_ITER, callback=record)
    residual = float(np.linalg.norm(b - A @ x)) / b_norm
    if info != 0 or residual > RESIDUAL_LIMIT:
        raise ConvergenceError(f"Laplace solve stopped at relative residual {residual:.3g}",
                               history)
    G[1:-1, 1:-1, 1:-1] = x.reshape(domain.shape)
    return GridSolution(domain, G, residual, tuple(history))


def solve_u0(domain, boundary_values):
    """Harmonic grid function with Dirichlet data ``boundary_values``.

    ``boundary_values`` maps an ``(N, 3)`` array of boundary points to ``N``
    values; a plain number is taken as constant data.
    """
    mask = domain.boundary_mask()
    G = np.zeros(mask.shape)
    if callable(boundary_values):
        pts = domain.mesh()[mask]
        G[mask] = np.asarray(boundary_values(pts), dtype=float).reshape(-1)
    else:
        G[mask] = float(boundary_values)
    if not np.all(np.isfinite(G[mask])):
        raise DomainError("boundary data must be finite")
    return solve_dirichlet_grid(domain, G)


# composite field -------------------------------------------------------------------
@dataclass(frozen=True)
class HarmonicField:
    """Point sources plus grid correction.

    With an anisotropic ``medium`` the box, the sources and ``u0`` live in
    the isotropic coordinates of :func:`anisotropic_to_isotropic`; ``u``
    takes physical points and maps them first.
    """

    domain: BoxDomain
    sources: tuple
    u0: GridSolution
    branch_id: int | None = None
    medium: object = None

    @property
    def residual(self):
        return self.u0.residual

    def _to_box(self, x):
        x = np.asarray(x, dtype=float)
        if self.medium is not None and _is_anisotropic(self.medium):
            return anisotropic_to_isotropic(self.medium, x)
        return x

    def u(self, x):
        """Field at physical points ``x``."""
        return self.u_box(self._to_box(x))

    def u_box(self, y):
        """Field at points given in box coordinates."""
        y = np.asarray(y, dtype=float)
        return source_potential(self.sources, y) + self.u0(y)


def _is_anisotropic(medium):
    perm = getattr(medium, "permeability", medium)
    return isinstance(perm, HomogeneousAnisotropic)


def assemble_dirichlet_field(domain, profile, sources, v0_boundary, medium=None):
    """Field whose ``Q``-preimage equals ``v0_boundary`` on the box surface.

    ``v0_boundary`` maps boundary points (physical coordinates) to volumes,
    or is a constant.  All boundary volumes must lie in one branch of ``Q``.
    """
    sources = tuple(sources)
    check_distinct(sources)
    aniso = medium is not None and _is_anisotropic(medium)
    if aniso:
        sources = tuple(type(s)(tuple(anisotropic_to_isotropic(medium, s.position)), s.I)
                        for s in sources)
    margin = 2 * float(np.max(domain.h))
    for s in sources:
        if not domain.contains(s.position, margin=margin):
            raise ParamError(f"source at {s.position} must lie at least 2h inside the box")

    mask = domain.boundary_mask()
    pts = domain.mesh()[mask]
    if callable(v0_boundary):
        phys = isotropic_to_anisotropic(medium, pts) if aniso else pts
        v0 = np.asarray(v0_boundary(phys), dtype=float).reshape(-1)
    else:
        v0 = np.full(len(pts), float(v0_boundary))
    branch_id = require_single_branch(profile, v0)

    G = np.zeros(mask.shape)
    G[mask] = profile.value(v0) - source_potential(sources, pts)
    u0 = solve_dirichlet_grid(domain, G)
    return HarmonicField(domain, sources, u0, branch_id, medium if aniso else None)


def field_value(hf, profile, x):
    """All ``(v, T, branch_id)`` with ``Q(v) = u(x)``."""
    u = float(hf.u(np.asarray(x, dtype=float)))
    return [(v, float(profile.iso.tau(v)), bid) for v, bid in invert_q(profile, u)]


def discrete_laplacian(values, h):
    """7-point Laplacian of a grid array at its interior nodes."""
    hx, hy, hz = h
    c = values[1:-1, 1:-1, 1:-1]
    return ((values[:-2, 1:-1, 1:-1] - 2 * c + values[2:, 1:-1, 1:-1]) / hx ** 2
            + (values[1:-1, :-2, 1:-1] - 2 * c + values[1:-1, 2:, 1:-1]) / hy ** 2
            + (values[1:-1, 1:-1, :-2] - 2 * c + values[1:-1, 1:-1, 2:]) / hz ** 2)
