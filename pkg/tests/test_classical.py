import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flowqubo.classical import (
    DensitySettings,
    alpha_derivative,
    filter_binary,
    interpolate_alpha,
    oc_update,
    run_classical,
    sensitivity,
)
from flowqubo.config import diffuser_config
from flowqubo.mesh import build_mesh, tag_benchmark_boundaries
from flowqubo.stokes import dissipation_energy, solve_flow


def test_interpolation_examples():
    assert interpolate_alpha(1.0, 12.5) == 0.0
    assert interpolate_alpha(0.0, 12.5) == 12.5
    assert interpolate_alpha(0.5, 12.5, 0.1) == pytest.approx(12.5 * 0.1 * 0.5 / 0.6)
    assert interpolate_alpha(0.5, 12.5, 0.1) == pytest.approx(1.0417, abs=1e-4)


def test_interpolation_monotone():
    a = interpolate_alpha(np.linspace(0, 1, 101), 12.5)
    assert np.all(np.diff(a) < 0)


@pytest.mark.parametrize("q", [0.01, 0.1, 1.0])
def test_derivative_matches_finite_difference(q):
    rho = np.linspace(0.05, 0.95, 19)
    h = 1e-6
    fd = (interpolate_alpha(rho + h, 12.5, q) - interpolate_alpha(rho - h, 12.5, q)) / (2 * h)
    np.testing.assert_allclose(alpha_derivative(rho, 12.5, q), fd, rtol=1e-7)


def test_derivative_at_full_fluid():
    # d/drho [q(1-rho)/(q+rho)] = -q(1+q)/(q+rho)^2, i.e. -q/(1+q) at rho = 1
    assert alpha_derivative(1.0, 12.5, 0.1) == pytest.approx(-12.5 * 0.1 / 1.1)


@pytest.fixture(scope="module")
def small_case():
    m = build_mesh(4, 4)
    return m, tag_benchmark_boundaries(m, "diffuser")


def _J(mesh, segs, rho):
    a = interpolate_alpha(rho, 12.5)
    return dissipation_energy(solve_flow(mesh, segs, a), a)


def test_sensitivity_matches_finite_difference(small_case, rng):
    mesh, segs = small_case
    rho = rng.uniform(0.2, 0.9, mesh.n_elements)
    flow = solve_flow(mesh, segs, interpolate_alpha(rho, 12.5))
    sens = sensitivity(flow, rho, 12.5)
    h = 1e-5
    for k in range(mesh.n_elements):
        e = np.zeros(mesh.n_elements)
        e[k] = h
        fd = (_J(mesh, segs, rho + e) - _J(mesh, segs, rho - e)) / (2 * h)
        assert abs(sens[k] - fd) <= 1e-4 * abs(fd)


def test_sensitivity_zero_without_flow(small_case):
    mesh, segs = small_case
    rho = np.full(mesh.n_elements, 0.5)
    flow = solve_flow(mesh, tag_benchmark_boundaries(mesh, "diffuser", peak=0.0), interpolate_alpha(rho, 12.5))
    assert np.all(sensitivity(flow, rho, 12.5) == 0)


def test_oc_uniform():
    v = np.full(16, 1 / 16)
    out = oc_update(np.full(16, 0.6), np.full(16, -2.0), v, 0.5)
    np.testing.assert_allclose(out, 0.5, atol=1e-8)


def test_oc_move_limit_and_volume(rng):
    v = np.full(64, 1 / 64)
    rho = np.full(64, 0.5)
    out = oc_update(rho, -rng.uniform(0, 5, 64), v, 0.5, move_limit=0.2)
    assert np.all((out >= 0.3 - 1e-15) & (out <= 0.7 + 1e-15))
    assert abs(v @ out - 0.5) <= 1e-8


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 40), st.floats(0.05, 0.5), st.integers(0, 2**32 - 1))
def test_oc_volume_postcondition(n, move, seed):
    rng = np.random.default_rng(seed)
    v = rng.uniform(0.5, 2.0, n)
    rho = rng.uniform(0, 1, n)
    sens = -rng.uniform(0, 3, n) * (rng.uniform(size=n) > 0.2)
    lo, hi = np.maximum(rho - move, 0), np.minimum(rho + move, 1)
    reachable = v @ lo, v @ hi
    v_max = rng.uniform(*reachable) if reachable[1] > reachable[0] else reachable[0]
    out = oc_update(rho, sens, v, v_max, move_limit=move)
    assert np.all(out >= lo - 1e-12) and np.all(out <= hi + 1e-12)
    if sens.any():
        assert abs(v @ out - v_max) <= 1e-8 * v.sum()


def test_oc_unreachable_target_returns_box_bound():
    v = np.ones(4)
    out = oc_update(np.ones(4), -np.ones(4), v, 1.0, move_limit=0.2)
    np.testing.assert_allclose(out, 0.8)


def test_oc_zero_sensitivity_scales_uniformly():
    v = np.ones(4)
    out = oc_update(np.full(4, 0.8), np.zeros(4), v, 2.0)
    np.testing.assert_allclose(out, 0.5)


def test_oc_rejects_positive_sensitivity():
    with pytest.raises(ValueError):
        oc_update(np.full(2, 0.5), np.array([-1.0, 0.1]), np.ones(2), 1.0)


def test_filter_examples():
    assert filter_binary(np.ones(3)).chi.tolist() == [1, 1, 1]
    assert filter_binary(np.full(3, 0.95)).chi.tolist() == [0, 0, 0]
    s = filter_binary([0.99, 0.5])
    assert s.chi.tolist() == [1, 0] and s.phi.tolist() == [1.0, -1.0]


def test_step_cap_one(small_case):
    mesh, segs = small_case
    res = run_classical(mesh, segs, 0.5, settings=DensitySettings(max_steps=1))
    assert len(res.history) == 1 and res.history[0].step == 1


def test_loop_invariants(small_case):
    mesh, segs = small_case
    s = DensitySettings(max_steps=15, tol=0.0)
    rho = np.ones(mesh.n_elements)
    flow = solve_flow(mesh, segs, interpolate_alpha(rho, 12.5))
    for _ in range(s.max_steps):
        sens = sensitivity(flow, rho, 12.5)
        assert np.all(sens <= 0)
        lower = np.maximum(rho - s.move_limit, 0.0)
        rho = oc_update(rho, sens, mesh.element_volumes, 0.5, s.move_limit, s.eta)
        # from the all-fluid start the move limit caps the first steps at the lower box
        if mesh.element_volumes @ lower >= 0.5:
            np.testing.assert_array_equal(rho, lower)
        else:
            assert abs(mesh.element_volumes @ rho - 0.5) <= 1e-8
        a = interpolate_alpha(rho, 12.5)
        flow = solve_flow(mesh, segs, a)
        J = dissipation_energy(flow, a)
        assert np.isfinite(J) and J > 0
    assert abs(mesh.element_volumes @ rho - 0.5) <= 1e-8


@pytest.mark.slow
def test_diffuser_baseline():
    cfg = diffuser_config()
    res = run_classical(cfg.mesh(), cfg.segments(), cfg.v_max, cfg.alpha_max, cfg.mu, cfg.density())
    assert res.unfiltered_volume_fraction == pytest.approx(0.5, abs=1e-3)
    assert 19 / 2 <= len(res.history) <= 2 * 19
    assert res.filtered_volume_fraction < res.unfiltered_volume_fraction
    assert all(np.isfinite(r.J) and r.J > 0 for r in res.history)
