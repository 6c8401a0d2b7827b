import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from toda_growth import fixtures
from toda_growth.errors import CuspDetected, InvalidMap
from toda_growth.maps import PolyMapPair
from toda_growth.models import EvolutionState, ParamTangent
from toda_growth.moments import moments
from toda_growth.string_dynamics import (
    conserved_targets,
    ellipse_rates,
    evolve_x,
    gp_residual,
    moments_from_actions,
    newton_reconstruct,
    parameter_distance,
    require_shape,
    rk4_step,
    solve_string_ode_rhs,
    string_rank,
    string_residual,
    string_residual_norm,
)


def tangent(pair, values):
    return ParamTangent(values=np.asarray(values, dtype=np.complex128), labels=pair.param_labels())


def test_circle_residual_examples():
    circle = fixtures.circle()
    assert string_residual(circle, tangent(circle, [0.5, 0, 0])).norm() < 1e-15
    still = string_residual(circle, tangent(circle, [0, 0, 0]))
    assert still.to_dict() == {0: -1}


def test_circle_velocity():
    velocity = solve_string_ode_rhs(fixtures.circle()).values
    np.testing.assert_allclose(velocity, [0.5, 0, 0], atol=1e-13)


def test_ellipse_velocity_matches_closed_form():
    pair = fixtures.ellipse(1.0, 0.3)
    dr, du1 = ellipse_rates(1.0, 0.3)
    assert dr == pytest.approx(1 / (2 * 0.91))
    velocity = solve_string_ode_rhs(pair).values
    np.testing.assert_allclose(velocity, [dr, 0, du1, 0, du1], atol=1e-12)
    assert string_residual(pair, tangent(pair, velocity)).norm() < 1e-12


def test_formal_polynomial_solves_without_real_structure():
    pair = fixtures.formal_polynomial_n2()
    assert string_rank(pair) == pair.dimension
    assert string_residual_norm(pair) < 1e-10


@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 3))
def test_random_polynomials_satisfy_string_equation(seed, order):
    pair = fixtures.random_polynomial(np.random.default_rng(seed), order)
    assert string_residual_norm(pair) < 1e-10


@pytest.mark.parametrize("name", ["rational_n1", "logarithmic_n1"])
def test_nonpolynomial_string_residual(name):
    pair = fixtures.FIXTURES[name]()
    assert string_rank(pair) == pair.dimension
    assert string_residual_norm(pair) < 1e-9


def test_gp_residual_small_on_physical_maps():
    for pair in (fixtures.circle(), fixtures.ellipse(), fixtures.polynomial_n2(), fixtures.logarithmic_n1()):
        assert gp_residual(EvolutionState(pair, 0.0)) < 1e-9


def test_circle_evolution_follows_square_root_law():
    trajectory = evolve_x(EvolutionState(fixtures.circle(), 0.0), 3.0, 1000)
    assert len(trajectory) == 1001
    assert trajectory[-1].x == pytest.approx(3.0)
    assert trajectory[-1].map.r.real == pytest.approx(2.0, abs=1e-10)


def test_ellipse_family_is_preserved():
    alpha, r0 = 0.3, 1.0
    trajectory = evolve_x(EvolutionState(fixtures.ellipse(r0, alpha), 0.0), 0.5, 200)
    for state in trajectory[::50]:
        r = state.map.r.real
        assert r ** 2 == pytest.approx(r0 ** 2 + state.x / (1 - alpha ** 2), abs=1e-10)
        assert state.map.z_half.u[1] / r == pytest.approx(alpha, abs=1e-10)


def test_evolution_conserves_moments():
    start = EvolutionState(fixtures.polynomial_n2(), 0.0)
    before = conserved_targets(start).as_vector()
    after = conserved_targets(evolve_x(start, 0.2, 100)[-1]).as_vector()
    np.testing.assert_allclose(after, before, atol=1e-8)


def test_circle_targets():
    targets = conserved_targets(EvolutionState(fixtures.circle(), 0.0))
    assert targets.c0 == pytest.approx(1.0)
    np.testing.assert_allclose(targets.c + targets.cbar, 0, atol=1e-15)
    assert targets.labels() == ["Q-x", "M_1", "Mbar_1"]


def test_newton_recovers_circle():
    targets = conserved_targets(EvolutionState(fixtures.circle(), 0.0))
    found = newton_reconstruct(targets, 3.0, fixtures.circle(1.8))
    assert found.r.real == pytest.approx(2.0, abs=1e-10)


def test_newton_fixed_point_is_immediate():
    pair = fixtures.polynomial_n2()
    targets = conserved_targets(EvolutionState(pair, 0.0))
    found = newton_reconstruct(targets, 0.0, pair, max_iter=0)
    np.testing.assert_array_equal(found.params(), pair.params())


def random_fixture(kind, seed):
    """Seeded physical fixture; polynomial orders cycle through N = 1..4."""
    order = seed % 4 + 1 if kind == "polynomial" else 1
    return fixtures.RANDOM_FIXTURES[kind](np.random.default_rng(seed), order)


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("kind", ["polynomial", "rational", "logarithmic"])
def test_random_fixtures_have_full_string_rank(kind, seed):
    pair = random_fixture(kind, seed)
    assert string_rank(pair) == pair.dimension


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_random_polynomial_evolution_conserves_moments(N, seed):
    start = EvolutionState(fixtures.random_polynomial(np.random.default_rng(seed), N), 0.0)
    targets = conserved_targets(start)
    end = evolve_x(start, 0.1, 50)[-1]
    after = conserved_targets(end)
    np.testing.assert_allclose(after.as_vector(), targets.as_vector(), atol=1e-8)
    assert targets.as_vector().size == 2 * N + 3 == start.map.dimension


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("kind", ["polynomial", "rational", "logarithmic"])
def test_newton_agrees_with_ode(kind, seed):
    start = EvolutionState(random_fixture(kind, seed), 0.0)
    evolved = evolve_x(start, 0.1, 20)[-1]
    rebuilt = newton_reconstruct(conserved_targets(start), 0.1, start.map)
    assert parameter_distance(evolved.map, rebuilt) < 1e-8


def test_cusp_is_detected():
    near_cusp = PolyMapPair(1.0, [0.0, 0.9999999], real_structure=True, physical=True)
    with pytest.raises(CuspDetected):
        require_shape(near_cusp)


def test_moments_follow_from_actions():
    pair = fixtures.logarithmic_n1()
    targets = conserved_targets(EvolutionState(pair, 0.0))
    guess = pair.with_params(pair.params() + 1e-3)
    rebuilt = moments_from_actions(targets, 0.0, guess, 2)
    expected = moments(pair, 2)
    np.testing.assert_allclose(rebuilt.M, expected.M, atol=1e-8)
    np.testing.assert_allclose(rebuilt.Mbar, expected.Mbar, atol=1e-8)


def test_rk4_step_refuses_to_break_the_real_structure():
    pair = fixtures.ellipse()
    twist = np.zeros(pair.dimension, dtype=np.complex128)
    twist[0] = 1j
    with pytest.raises(InvalidMap, match="real structure"):
        rk4_step(pair, 1e-2, lambda p: twist)
    free = rk4_step(pair, 1e-2, lambda p: twist, real_structure=False)
    assert free.r == pytest.approx(pair.r + 1e-2j)
    kept = rk4_step(pair, 1e-2, lambda p: solve_string_ode_rhs(p).values)
    assert kept.real_structure
