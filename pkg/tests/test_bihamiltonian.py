import numpy as np
import pytest

from toda_growth import fixtures
from toda_growth.bihamiltonian import (
    LINEAR,
    QUADRATIC,
    STRUCTURES,
    FieldGrid,
    contour_radius,
    h_density,
    lax_flow,
    pencil_defect,
    poisson_flow,
    smeared_bracket,
    spectral_derivative,
    triple_agreement,
    var_derivative,
)
from toda_growth.errors import ContourThroughPole, IndexRangeViolation


def constant_grid(N, m=16):
    a = np.stack([np.full(m, 0.5 + 0.1 * i) for i in range(N + 1)])
    b = np.stack([np.full(m, 1.0 if i == N else 0.2) for i in range(N + 1)])
    return FieldGrid(2 * np.pi, m, a, b)


def test_grid_size_must_be_power_of_two():
    with pytest.raises(ValueError):
        FieldGrid(1.0, 12, np.ones((1, 12)), np.ones((1, 12)))
    with pytest.raises(ValueError):
        FieldGrid(1.0, 4, np.ones((1, 4)), np.ones((1, 4)))
    with pytest.raises(ValueError):
        FieldGrid(1.0, 8, np.ones((2, 8)), np.ones((1, 8)))


def test_grid_keys_and_frozen_leading_field():
    grid = fixtures.grid_fixture(1, m=16)
    assert grid.keys() == [("a", 0), ("a", 1), ("b", 0), ("b", 1)]
    np.testing.assert_array_equal(grid.field(("a", 2)), np.ones(16))
    assert grid.field(("b", 2)) is None


def test_spectral_derivative_of_a_sine():
    x = 2 * np.pi * np.arange(32) / 32
    np.testing.assert_allclose(spectral_derivative(np.sin(3 * x), 2 * np.pi), 3 * np.cos(3 * x), atol=1e-12)


def test_toda_chain_densities():
    grid = fixtures.grid_fixture(0, m=16)
    a0, b0 = grid.a[0], grid.b[0]
    assert contour_radius(grid) == 1.0
    np.testing.assert_allclose(h_density(grid, 0), a0 / b0, atol=1e-12)
    np.testing.assert_allclose(var_derivative(grid, 0, ("a", 0)), 1 / b0, atol=1e-12)
    np.testing.assert_allclose(var_derivative(grid, 0, ("b", 0)), -a0 / b0 ** 2, atol=1e-12)


def test_constant_fields_do_not_move():
    grid = constant_grid(1)
    for structure in (LINEAR, QUADRATIC):
        assert poisson_flow(grid, structure, 2).max_abs() < 1e-12
    assert lax_flow(grid, 2).max_abs() < 1e-12


@pytest.mark.parametrize("N", [0, 1])
@pytest.mark.parametrize("i", [1, 2])
def test_three_flows_agree(N, i):
    for m in (256, 512):
        linear, quadratic, leak = triple_agreement(fixtures.grid_fixture(N, m=m), i)
        assert linear < 1e-6
        assert quadratic < 1e-6
        assert leak < 1e-9


def test_hamiltonian_index_per_structure():
    assert LINEAR.hamiltonian_index(3) == 3
    assert QUADRATIC.hamiltonian_index(3) == 2
    assert STRUCTURES["linear"] is LINEAR
    assert (LINEAR.orientation, QUADRATIC.orientation) == (-1, 1)


@pytest.mark.parametrize("name", ["linear", "quadratic"])
def test_brackets_are_antisymmetric(name):
    grid = fixtures.grid_fixture(1, m=64)
    structure = STRUCTURES[name]
    f = np.cos(grid.x)
    g = np.sin(2 * grid.x) + 0.3
    for u in grid.keys():
        for v in grid.keys():
            forward = smeared_bracket(grid, structure, (u, f), (v, g))
            backward = smeared_bracket(grid, structure, (v, g), (u, f))
            assert abs(forward + backward) < 1e-10, (u, v)


@pytest.mark.parametrize("lam", [0.3, -0.7])
def test_shift_gives_the_pencil(lam):
    assert pencil_defect(fixtures.grid_fixture(1, m=64), lam) < 1e-10


def test_index_ranges():
    grid = fixtures.grid_fixture(1, m=16)
    with pytest.raises(IndexRangeViolation):
        h_density(grid, -1)
    with pytest.raises(IndexRangeViolation):
        var_derivative(grid, 0, ("b", 2))
    with pytest.raises(IndexRangeViolation):
        lax_flow(grid, 0)
    with pytest.raises(IndexRangeViolation):
        LINEAR.terms(("a", 0), ("c", 0), 1)


def test_vanishing_denominator_is_reported():
    grid = FieldGrid(2 * np.pi, 8, np.ones((1, 8)), np.zeros((1, 8)))
    with pytest.raises(ContourThroughPole):
        h_density(grid, 0)
