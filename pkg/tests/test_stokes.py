import numpy as np
import pytest

from flowqubo.mesh import BoundarySegment, build_mesh, channel_boundaries, tag_benchmark_boundaries
from flowqubo.stokes import (
    assemble,
    dirichlet_data,
    dissipation_energy,
    divergence_residual,
    element_kinetic_integrals,
    element_matrices,
    solve_flow,
    velocity_operators,
    viscous_dissipation,
)


@pytest.fixture(scope="module")
def poiseuille():
    m = build_mesh(8, 8)
    return m, solve_flow(m, channel_boundaries(m), 0.0)


@pytest.fixture(scope="module")
def diffuser():
    m = build_mesh(16, 16, 16.0, 16.0)
    return m, tag_benchmark_boundaries(m, "diffuser", length_scale=16.0)


def test_poiseuille_exact(poiseuille):
    m, f = poiseuille
    y = m.velocity_coords[:, 1]
    exact = 4 * y * (1 - y)
    assert np.linalg.norm(f.u[:, 0] - exact) / np.linalg.norm(exact) <= 1e-10
    assert np.abs(f.u[:, 1]).max() <= 1e-10
    # linear pressure, dp/dx = mu * u'' = -8
    px = m.pressure_coords[:, 0]
    np.testing.assert_allclose(f.p, -8 * px, atol=1e-9)


def test_poiseuille_dissipation_and_kinetic(poiseuille):
    m, f = poiseuille
    assert dissipation_energy(f, 0.0) == pytest.approx(16 / 3, rel=1e-9)
    assert element_kinetic_integrals(f).sum() == pytest.approx(8 / 15, rel=1e-12)


def test_zero_inflow_gives_rest():
    m = build_mesh(4, 4)
    f = solve_flow(m, channel_boundaries(m, peak=0.0), 1.0)
    assert np.abs(f.u).max() == 0.0
    assert np.abs(f.p).max() == 0.0
    assert dissipation_energy(f, 1.0) == 0.0


def test_system_dimensions():
    sys1 = assemble(build_mesh(1, 1), 0.0)
    assert sys1.matrix.shape == (22, 22)
    m = build_mesh(3, 2)
    s = assemble(m, np.arange(m.n_elements, dtype=float))
    assert s.matrix.shape[0] == 2 * m.n_velocity_nodes + m.n_pressure_nodes
    assert abs(s.matrix - s.matrix.T).max() <= 1e-13


def test_brinkman_block():
    m = build_mesh(3, 3)
    K0, M0, _ = velocity_operators(m, 0.0)
    assert M0.nnz == 0 or abs(M0).max() == 0.0
    K1, M1, _ = velocity_operators(m, 12.5)
    _, Mref, _ = velocity_operators(m, 1.0)
    assert abs(M1 - 12.5 * Mref).max() <= 1e-14
    assert abs(K1 - K0).max() == 0.0


def test_element_matrices_basic():
    hx, hy = 0.5, 0.25
    em = element_matrices(hx, hy)
    assert em.mass.sum() == pytest.approx(hx * hy, rel=1e-13)
    # rigid translations carry no strain and no divergence
    for comp in range(2):
        t = np.zeros(18)
        t[comp * 9:(comp + 1) * 9] = 1.0
        assert np.abs(em.stiffness @ t).max() <= 1e-12
        assert np.abs(em.div @ t).max() <= 1e-13
    # rigid rotation u = (-y, x) is strain-free too
    a = np.array([0, 0.5, 1.0] * 3) * hx
    b = np.repeat([0, 0.5, 1.0], 3) * hy
    rot = np.concatenate([-b, a])
    assert np.abs(em.stiffness @ rot).max() <= 1e-12
    np.testing.assert_allclose(em.stiffness, em.stiffness.T, atol=1e-14)


def test_constant_field_kinetic_equals_volume():
    m = build_mesh(3, 2, 1.5, 1.0)
    u = np.tile([1.0, 0.0], (m.n_velocity_nodes, 1))
    from flowqubo.stokes import _kinetic

    np.testing.assert_allclose(_kinetic(m, u), m.element_volumes, rtol=1e-13)


def test_uniform_resistance_raises_dissipation(diffuser):
    m, segs = diffuser
    f0 = solve_flow(m, segs, 0.0)
    f1 = solve_flow(m, segs, 12.5)
    J0, J1 = dissipation_energy(f0, 0.0), dissipation_energy(f1, 12.5)
    assert J1 > J0
    d = f1.kinetic.reshape(16, 16)
    assert np.all(d[:, 0] > 0)
    assert np.all(d[5:11, -1] > 0)


def test_dissipation_linear_in_alpha_for_fixed_flow(diffuser):
    m, segs = diffuser
    f = solve_flow(m, segs, 3.0)
    assert dissipation_energy(f, 12.5) - dissipation_energy(f, 0.0) == pytest.approx(12.5 * f.kinetic.sum(), rel=1e-12)


def test_quadrature_consistency(diffuser, rng):
    m, segs = diffuser
    alpha = rng.uniform(0, 12.5, m.n_elements)
    f = solve_flow(m, segs, alpha)
    K, Ma, _ = velocity_operators(m, alpha)
    u = f.velocity_vector
    assert dissipation_energy(f, alpha) == pytest.approx(u @ K @ u + u @ Ma @ u, rel=1e-10)
    assert viscous_dissipation(f) == pytest.approx(u @ K @ u, rel=1e-10)


def test_mass_conservation(diffuser, rng):
    m, segs = diffuser
    f = solve_flow(m, segs, rng.uniform(0, 12.5, m.n_elements))
    assert divergence_residual(f) <= 1e-8 * np.linalg.norm(f.u)


def test_dirichlet_values_honoured(diffuser):
    m, segs = diffuser
    f = solve_flow(m, segs, 1.0)
    fixed, value, _ = dirichlet_data(m, segs)
    np.testing.assert_array_equal(f.velocity_vector[fixed], value[fixed])


def test_dirichlet_flux_balance():
    # outlet ends at 1/3 and 2/3 fall between nodes; outflow is rescaled to match
    m = build_mesh(32, 32)
    _, value, _ = dirichlet_data(m, tag_benchmark_boundaries(m, "diffuser"))
    left = np.arange(65) * 65
    right = left + 64
    y = m.velocity_coords[left, 1]

    def simpson(v):
        return np.sum((y[2::2] - y[:-2:2]) / 6 * (v[:-2:2] + 4 * v[1::2] + v[2::2]))

    assert simpson(value[left]) == pytest.approx(simpson(value[right]), rel=1e-12)
    assert simpson(value[left]) == pytest.approx(2 / 3, rel=1e-12)


def test_monotone_in_resistance(rng):
    m = build_mesh(8, 8, 8.0, 8.0)
    segs = tag_benchmark_boundaries(m, "diffuser", length_scale=8.0)
    for _ in range(5):
        a = rng.choice([0.0, 12.5], m.n_elements)
        b = a.copy()
        b[rng.integers(m.n_elements, size=6)] = 12.5
        Ja = dissipation_energy(solve_flow(m, segs, a), a)
        Jb = dissipation_energy(solve_flow(m, segs, b), b)
        assert Jb >= Ja * (1 - 1e-12)


def test_deterministic(diffuser):
    m, segs = diffuser
    a = np.linspace(0, 12.5, m.n_elements)
    f1, f2 = solve_flow(m, segs, a), solve_flow(m, segs, a)
    assert np.array_equal(f1.u, f2.u) and np.array_equal(f1.p, f2.p)


def test_neumann_outlet_conserves_mass():
    m = build_mesh(8, 8)
    segs = channel_boundaries(m, outlet="neumann")
    f = solve_flow(m, segs, 0.0)
    assert divergence_residual(f) <= 1e-8 * np.linalg.norm(f.u)
    right = np.arange(17) * 17 + 16
    y = m.velocity_coords[right, 1]
    v = f.u[right, 0]
    outflow = np.sum((y[2::2] - y[:-2:2]) / 6 * (v[:-2:2] + 4 * v[1::2] + v[2::2]))
    assert outflow == pytest.approx(2 / 3, rel=1e-9)


def test_fully_open_boundary_keeps_corners_fixed():
    # open interiors on every side still leave the no-slip corners, so the fluid rests
    m = build_mesh(2, 2)
    segs = [BoundarySegment(side, 0.0, 1.0, "neumann") for side in ("left", "right", "bottom", "top")]
    fixed, _, has_neumann = dirichlet_data(m, segs)
    assert has_neumann and fixed.sum() == 8
    f = solve_flow(m, segs, 0.0)
    assert np.abs(f.u).max() <= 1e-12


def test_overlapping_segments_rejected():
    m = build_mesh(2, 2)
    segs = [BoundarySegment("left", 0.0, 0.6, "inlet"), BoundarySegment("left", 0.5, 1.0, "inlet")]
    with pytest.raises(ValueError):
        solve_flow(m, segs, 0.0)


def test_alpha_validation():
    m = build_mesh(2, 2)
    with pytest.raises(ValueError):
        solve_flow(m, channel_boundaries(m), np.zeros(3))
    with pytest.raises(ValueError):
        solve_flow(m, channel_boundaries(m), -1.0)
    with pytest.raises(ValueError):
        assemble(m, 0.0, mu=0.0)
