import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from geophase import models
from geophase.connection import (GaugePath, cumulative_products, finite_difference_curvature,
                                 gauge_potential_from_frames, holonomy_with_crossings, loop_holonomy,
                                 path_ordered_exp, plaquette_curvature)
from geophase.errors import ConfigError, ValidationError
from geophase.manifold import Atlas, BundleAtlas, Chart
from geophase.spectral import frames_array, smooth_transport

from conftest import random_hermitian, random_unitary

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1, -1]).astype(complex)


def su2_field(x):
    """Non-commuting field whose components at different points do not commute."""
    x = float(np.atleast_1d(x)[0])
    return (1j * (np.cos(x) * SX + np.sin(x) * SY + 0.5 * x * SZ))[None]


def test_gauge_steps_must_be_anti_hermitian():
    with pytest.raises(ValidationError):
        GaugePath(np.ones((3, 1, 1), dtype=complex))


def test_constant_abelian_field_is_exact():
    pts = np.linspace(0, 2.0, 11)
    g = GaugePath.from_field(lambda x: np.array([[[0.3j]]]), pts)
    assert path_ordered_exp(g).matrix[0, 0] == pytest.approx(np.exp(-0.6j), abs=1e-14)


def test_ordering_later_steps_on_the_left():
    A1, A2 = 1j * SX * 0.4, 1j * SZ * 0.7
    U = path_ordered_exp(GaugePath(np.stack([A1, A2]))).matrix
    assert np.allclose(U, expm(-A2) @ expm(-A1), atol=1e-14)
    assert not np.allclose(U, expm(-A1) @ expm(-A2), atol=1e-3)


def test_second_order_convergence_non_abelian():
    def hol(n):
        return path_ordered_exp(GaugePath.from_field(su2_field, np.linspace(0, 2.0, n + 1))).matrix

    ref = hol(6400)
    e1 = np.linalg.norm(hol(100) - ref)
    e2 = np.linalg.norm(hol(200) - ref)
    assert e1 / e2 > 3.5


@settings(max_examples=30, deadline=None)
@given(n_a=st.integers(1, 4), n=st.integers(1, 30), seed=st.integers(0, 2 ** 31 - 1))
def test_holonomy_unitary_and_cumulative_consistent(n_a, n, seed):
    rng = np.random.default_rng(seed)
    steps = np.stack([1j * random_hermitian(rng, n_a, 0.3) for _ in range(n)])
    g = GaugePath(steps)
    U = path_ordered_exp(g)
    assert U.unitarity_error() < 1e-12
    assert np.allclose(cumulative_products(steps)[-1], U.matrix, atol=1e-12)


def test_cumulative_products_batched():
    rng = np.random.default_rng(0)
    steps = np.stack([[1j * random_hermitian(rng, 2, 0.2) for _ in range(5)] for _ in range(3)])
    U = cumulative_products(steps)
    assert U.shape == (3, 6, 2, 2)
    for b in range(3):
        assert np.allclose(U[b, -1], path_ordered_exp(GaugePath(steps[b])).matrix)


def two_level_frames(delta, n=4000):
    m = models.two_level_model(1.0, delta)
    th = np.linspace(0, 2 * np.pi, n + 1)
    return frames_array(smooth_transport(m.hamiltonian(th[:, None]), m.branch))


def test_berry_phase_from_transported_frames():
    Z = two_level_frames(1.0)
    U = path_ordered_exp(gauge_potential_from_frames(Z, closed=True))
    assert U.phase == pytest.approx(-np.pi / (2 + np.sqrt(2)), abs=1e-6)
    assert abs(loop_holonomy(Z[:-1]).matrix[0, 0] - U.matrix[0, 0]) < 1e-6


def test_loop_holonomy_gauge_invariant(rng):
    Z = two_level_frames(0.5, 800)[:-1]
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, len(Z)))
    a = loop_holonomy(Z).matrix
    b = loop_holonomy(Z * phases[:, None, None]).matrix
    assert abs(a[0, 0] - b[0, 0]) < 1e-12


def test_non_abelian_loop_holonomy_covariant(rng):
    # degenerate pair of a 4-level system transported round a loop
    K = [1j * random_hermitian(rng, 4) for _ in range(2)]
    s = np.linspace(0, 2 * np.pi, 300, endpoint=False)
    Z = np.stack([expm(np.cos(u) * K[0] + np.sin(u) * K[1])[:, :2] for u in s])
    V = random_unitary(rng, 2)
    U = loop_holonomy(Z).matrix
    Z2 = Z.copy()
    Z2[0] = Z[0] @ V
    U2 = loop_holonomy(Z2).matrix
    assert np.allclose(U2, V.conj().T @ U @ V, atol=1e-10)
    assert np.allclose(np.sort(np.angle(np.linalg.eigvals(U))), loop_holonomy(Z2).phases, atol=1e-10)


def sphere_charts():
    # north chart: (cos t/2, e^{i p} sin t/2); south chart multiplies by e^{-i p}
    charts = (Chart("N", (0.0, -10.0), (2.0, 10.0)), Chart("S", (1.0, -10.0), (np.pi, 10.0)))
    atlas = Atlas(charts, (None, None))
    g = {("N", "S"): lambda x: np.array([[np.exp(-1j * x[1])]])}
    return BundleAtlas(atlas, transition=g)


def sphere_state(theta, phi, chart):
    v = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    return v * (np.exp(-1j * phi) if chart == "S" else 1.0)


def test_crossing_with_nontrivial_transition():
    theta0 = 1.2
    bundle = sphere_charts()
    phi = np.linspace(0, 2 * np.pi, 2001)
    charts = ["N" if p < np.pi else "S" for p in phi]
    Z = np.stack([sphere_state(theta0, p, c)[:, None] for p, c in zip(phi, charts)])
    pts = np.stack([np.full_like(phi, theta0), phi], axis=1)
    g = gauge_potential_from_frames(Z, pts, charts, bundle, closed=True)
    U = holonomy_with_crossings(g, bundle)
    assert abs(U.matrix[0, 0] - np.exp(1j * models.sphere_latitude_phase(theta0))) < 1e-5
    with pytest.raises(ConfigError):
        gauge_potential_from_frames(Z, pts, charts, BundleAtlas(bundle.atlas), closed=True)


def sphere_grid(th, ph):
    H = models.sphere_fixture(th[:, None], ph[None, :])
    w, v = np.linalg.eigh(H)
    return v[..., 1:]


def test_sphere_plaquette_matches_exact_curvature():
    th = np.linspace(0.9, 1.1, 5)
    ph = np.linspace(0.0, 0.2, 5)
    Z = sphere_grid(th, ph)
    h = (th[1] - th[0], ph[1] - ph[0])
    F = plaquette_curvature(Z, (1, 1), h)[0, 0]
    centre = 0.5 * (th[1] + th[2])
    assert F == pytest.approx(0.5j * np.sin(centre), abs=1e-3)
    Ffd = finite_difference_curvature(Z, (1, 1), h)[0, 0]
    # both are second-order estimates of the cell-centre value
    assert abs(F - Ffd) < 5e-4


def test_non_abelian_curvature_two_discretizations_agree(rng):
    Ks = [1j * random_hermitian(rng, 4, 0.5) for _ in range(3)]

    def frames(x, y):
        return expm(x * Ks[0] + y * Ks[1] + x * y * Ks[2])[:, :2]

    h = 0.01
    xs = ys = np.arange(3) * h
    Z = np.stack([[frames(x, y) for y in ys] for x in xs])
    F = plaquette_curvature(Z, (0, 0), (h, h))
    Ffd = finite_difference_curvature(Z, (0, 0), (h, h))
    assert np.linalg.norm(F) > 0.05
    assert np.linalg.norm(F - Ffd) < 0.05 * np.linalg.norm(F)
    # commutator part matters: the abelian formula alone misses it
    A1 = Z[0, 0].conj().T @ (Z[1, 0] - Z[0, 0]) / h
    A2 = Z[0, 0].conj().T @ (Z[0, 1] - Z[0, 0]) / h
    assert np.linalg.norm(A1 @ A2 - A2 @ A1) > 1e-3


@pytest.mark.parametrize("branch, sign", [(0, -1), (1, +1)])
def test_equator_curvature_sign_per_branch(branch, sign):
    h = 0.01
    th = np.pi / 2 + h * np.array([-0.5, 0.5])
    ph = np.array([0.0, h])
    H = models.sphere_fixture(th[:, None], ph[None, :])
    Z = np.linalg.eigh(H)[1][..., branch:branch + 1]
    F = plaquette_curvature(Z, (0, 0), (h, h))[0, 0]
    assert F == pytest.approx(sign * 0.5j, abs=1e-4)


def test_curvature_estimate_stable_under_cell_halving():
    centre, values = 1.0, []
    for h in (0.1, 0.05, 0.025):
        th = centre + h * np.array([-0.5, 0.5])
        Z = sphere_grid(th, np.array([0.0, h]))
        values.append(plaquette_curvature(Z, (0, 0), (h, h))[0, 0])
    exact = 0.5j * np.sin(centre)
    errs = [abs(v - exact) for v in values]
    assert errs[2] < errs[1] < errs[0] < 1e-2
