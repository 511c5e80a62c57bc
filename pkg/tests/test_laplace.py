import math
from functools import lru_cache

import numpy as np
import pytest

import realgas.laplace as lp
from realgas import (BoxDomain, BranchAmbiguityError, ConvergenceError, DomainError,
                     HomogeneousAnisotropic, Isotropic, MediumSpec, ParamError,
                     SingularPointError, SourceSpec, assemble_dirichlet_field, build_q_profile,
                     field_value, invert_q, isentrope_from_constant, solve_u0, vdw_reduced)
from realgas.filtration import anisotropic_to_isotropic
from realgas.laplace import discrete_laplacian

UNIT = MediumSpec(1.0, Isotropic(1.0))


def cube(n, half=1.0):
    return BoxDomain((-half,) * 3, (half,) * 3, (n, n, n))


@lru_cache(maxsize=None)
def profile(c):
    return build_q_profile(isentrope_from_constant(vdw_reduced(3), c), UNIT, (0.34, 50.0))


def _max_error(n, exact):
    d = cube(n)
    sol = solve_u0(d, exact)
    X = d.mesh()
    return float(np.max(np.abs(sol.values - exact(X.reshape(-1, 3)).reshape(X.shape[:-1]))))


# grid solve --------------------------------------------------------------------------
def test_constant_data_gives_constant_interior():
    sol = solve_u0(cube(12), 2.75)
    assert np.max(np.abs(sol.values - 2.75)) <= 1e-10
    sol = solve_u0(cube(12), lambda p: np.full(len(p), -0.4))
    assert np.max(np.abs(sol.values + 0.4)) <= 1e-10


def test_quadratic_harmonic_reproduced():
    # the 7-point stencil is exact on quadratics, so only the solve error remains
    err = _max_error(15, lambda p: p[:, 0] ** 2 - p[:, 1] ** 2)
    assert err <= 1e-9


def _quartic(p):
    x, y = p[:, 0], p[:, 1]
    return x ** 4 - 6 * x ** 2 * y ** 2 + y ** 4


def test_second_order_convergence_quartic():
    errs = [_max_error(n, _quartic) for n in (15, 31, 63)]
    assert errs[0] / errs[1] >= 3.5 and errs[1] / errs[2] >= 3.5


def test_external_kernel_second_order():
    a = np.array([1.6, 0.3, -0.2])
    kernel = lambda p: 1.0 / np.linalg.norm(p - a, axis=-1)
    errs = [_max_error(n, kernel) for n in (15, 31, 63)]
    assert errs[0] / errs[1] >= 3.5 and errs[1] / errs[2] >= 3.5
    assert errs[2] <= 1e-3


def test_discrete_maximum_principle():
    rng = np.random.default_rng(11)
    d = cube(14)
    mask = d.boundary_mask()
    data = rng.uniform(-3, 5, size=int(mask.sum()))
    sol = solve_u0(d, lambda p: data)
    inner = sol.values[~mask]
    assert inner.min() >= data.min() - 1e-9 and inner.max() <= data.max() + 1e-9


def test_solve_is_bit_reproducible():
    a = solve_u0(cube(16), _quartic)
    b = solve_u0(cube(16), _quartic)
    assert np.array_equal(a.values, b.values)
    assert a.residual <= 1e-8


def test_iteration_cap(monkeypatch):
    monkeypatch.setattr(lp, "MAX_ITER", 2)
    with pytest.raises(ConvergenceError) as info:
        solve_u0(cube(16), _quartic)
    assert len(info.value.history) >= 1


def test_nonfinite_boundary_data():
    with pytest.raises(DomainError):
        solve_u0(cube(8), lambda p: np.full(len(p), np.nan))


@pytest.mark.parametrize("kw", [
    dict(lower=(0, 0, 0), upper=(1, 1, 0), shape=(8, 8, 8)),
    dict(lower=(0, 0, 0), upper=(1, 1, 1), shape=(8, 7, 8)),
    dict(lower=(0, 0), upper=(1, 1), shape=(8, 8, 8)),
])
def test_bad_box(kw):
    with pytest.raises(ParamError):
        BoxDomain(**kw)


# composite field ----------------------------------------------------------------------
def test_no_sources_constant_volume():
    prof = profile(3.0)
    hf = assemble_dirichlet_field(cube(10), prof, [], 8.0)
    q0 = prof.value(8.0)
    rng = np.random.default_rng(3)
    for x in rng.uniform(-1, 1, size=(20, 3)):
        assert hf.u(x) == pytest.approx(q0, abs=1e-10)
        (v, T, bid), = field_value(hf, prof, x)
        assert v == pytest.approx(8.0, abs=1e-8)
        assert T == pytest.approx(prof.iso.tau(8.0), rel=1e-8)


def test_boundary_point_returns_boundary_volume():
    prof = profile(3.0)
    d = cube(10)
    src = SourceSpec((0.1, -0.2, 0.0), -0.05)
    v0 = lambda p: 8.0 + p[:, 0] + 0.5 * p[:, 2]
    hf = assemble_dirichlet_field(d, prof, [src], v0)
    ax = d.axes
    for x in [(ax[0][0], ax[1][3], ax[2][5]), (ax[0][4], ax[1][-1], ax[2][2]),
              (ax[0][-1], ax[1][-1], ax[2][-1])]:
        x = np.array(x)
        expected = float(v0(x[None, :])[0])
        hits = field_value(hf, prof, x)
        assert len(hits) == 1
        assert hits[0][0] == pytest.approx(expected, abs=1e-9)
        assert hits[0][1] == pytest.approx(prof.iso.tau(expected), rel=1e-9)


def test_single_source_matches_radial_solution():
    prof = profile(3.0)
    half = 4.0
    d = cube(31, half)
    I = -0.5
    hf = assemble_dirichlet_field(d, prof, [SourceSpec((0.0, 0.0, 0.0), I)], 8.0)
    shift = float(hf.u0(np.zeros(3)))
    for r in np.linspace(0.2, 2 * half / 8, 6):
        for direction in np.eye(3):
            (v, _, _), = field_value(hf, prof, r * direction)
            (v_ref, _), = invert_q(prof, I / (4 * math.pi * r) + shift)
            assert v == pytest.approx(v_ref, rel=1e-3)


def test_two_equal_sources_mirror_symmetric():
    prof = profile(3.0)
    srcs = [SourceSpec((0.3, 0.1, 0.0), -0.05), SourceSpec((-0.3, 0.1, 0.0), -0.05)]
    hf = assemble_dirichlet_field(cube(20), prof, srcs, 8.0)
    rng = np.random.default_rng(5)
    x = rng.uniform(-0.95, 0.95, size=(200, 3))
    mirrored = x * np.array([-1.0, 1.0, 1.0])
    assert np.max(np.abs(hf.u(x) - hf.u(mirrored))) <= 1e-9


def test_composite_is_discretely_harmonic_away_from_sources():
    # compare on the coarse nodes, which the nested finer grids share
    prof = profile(3.0)
    srcs = [SourceSpec((0.2, 0.0, 0.1), -0.05), SourceSpec((-0.3, 0.2, -0.1), 0.02)]
    worst = []
    for k, n in enumerate((15, 31, 63)):
        d = cube(n)
        hf = assemble_dirichlet_field(d, prof, srcs, 8.0)
        X = d.mesh()
        far = np.ones(X.shape[:-1], dtype=bool)
        for s in srcs:
            far &= np.linalg.norm(X - np.asarray(s.position), axis=-1) > 0.3
        U = np.zeros(X.shape[:-1])
        U[far] = hf.u_box(X[far])
        lap = np.full(X.shape[:-1], np.nan)
        lap[1:-1, 1:-1, 1:-1] = discrete_laplacian(U, d.h)
        step = 2 ** k
        coarse = lap[::step, ::step, ::step][1:-1, 1:-1, 1:-1]
        X0 = X[::step, ::step, ::step][1:-1, 1:-1, 1:-1]
        keep = np.ones(coarse.shape, dtype=bool)
        for s in srcs:
            keep &= np.linalg.norm(X0 - np.asarray(s.position), axis=-1) > 0.5
        worst.append(float(np.max(np.abs(coarse[keep]))))
    assert worst[0] / worst[1] >= 3.5 and worst[1] / worst[2] >= 3.5


def test_boundary_spanning_branches_rejected():
    prof = profile(1.0)
    v0 = lambda p: np.where(p[:, 0] > 0, 30.0, 0.5)
    with pytest.raises(BranchAmbiguityError):
        assemble_dirichlet_field(cube(8), prof, [], v0)


def test_source_too_close_to_wall():
    d = cube(16)
    h = float(d.h[0])
    with pytest.raises(ParamError):
        assemble_dirichlet_field(d, profile(3.0), [SourceSpec((1 - 1.5 * h, 0, 0), -0.01)], 8.0)
    with pytest.raises(ParamError):
        assemble_dirichlet_field(d, profile(3.0), [SourceSpec((0, 0, 0), -0.01),
                                                   SourceSpec((0, 0, 0), -0.02)], 8.0)


def test_field_value_at_source_is_singular():
    prof = profile(3.0)
    hf = assemble_dirichlet_field(cube(10), prof, [SourceSpec((0.0, 0.0, 0.0), -0.05)], 8.0)
    with pytest.raises(SingularPointError):
        field_value(hf, prof, (0.0, 0.0, 0.0))


def test_folded_profile_gives_up_to_three_volumes():
    prof = profile(1.0)
    lo = max(b.q_range[0] for b in prof.branches)
    hi = min(b.q_range[1] for b in prof.branches)
    I = -1e-4
    hf = assemble_dirichlet_field(cube(16, 2.0), prof, [SourceSpec((0.0, 0.0, 0.0), I)], 30.0)
    counts = set()
    for r in np.linspace(0.05, 1.9, 60):
        x = np.array([r, 0.0, 0.0])
        u = float(hf.u(x))
        hits = field_value(hf, prof, x)
        counts.add(len(hits))
        if lo < u < hi:
            assert [b for _, _, b in hits] == [0, 1, 2]
        for v, _, _ in hits:
            assert abs(prof.value(v) - u) <= 1e-9
    assert 3 in counts and max(counts) == 3


def test_anisotropic_field_uses_mapped_coordinates():
    prof = profile(3.0)
    med = MediumSpec(1.0, HomogeneousAnisotropic((4.0, 1.0, 0.5)))
    a = np.array([0.4, 0.0, 0.1])
    hf = assemble_dirichlet_field(cube(12), prof, [SourceSpec(tuple(a), -0.05)], 8.0, medium=med)
    x = np.array([0.9, -0.3, 0.2])
    assert hf.u(x) == pytest.approx(float(hf.u_box(anisotropic_to_isotropic(med, x))), rel=1e-15)
    with pytest.raises(SingularPointError):
        hf.u(a)
