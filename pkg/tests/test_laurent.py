import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from toda_growth.errors import NonInvertibleLeading, WindowTooWide, ZeroArgument
from toda_growth.laurent import (
    LaurentSeries,
    XLaurent,
    hamiltonian_projection,
    jacobi_cyclic_sum,
    lax_bracket,
    ls_add,
    ls_deriv_w,
    ls_eval,
    ls_mul,
    ls_project,
    max_abs_diff,
    power_at_infinity,
    power_at_zero,
    series_from_terms,
    xlaurent_bracket,
    zero_curvature_defect,
)

W = LaurentSeries.monomial(1)
INV_W = LaurentSeries.monomial(-1)

coefficient = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


@st.composite
def series(draw, span=4):
    lo = draw(st.integers(-span, span))
    coeffs = draw(st.lists(coefficient, min_size=1, max_size=span + 1))
    return LaurentSeries(lo, coeffs)


def same(a: LaurentSeries, b: LaurentSeries, tol: float = 1e-12) -> bool:
    return max_abs_diff(a, b) <= tol


def test_add_disjoint_windows():
    total = ls_add(W, INV_W)
    assert total.to_dict() == {-1: 1, 1: 1}


def test_add_cancels_to_constant():
    total = ls_add(series_from_terms([(1, 2), (0, 3)]), LaurentSeries.monomial(1, -2))
    assert total.trim().to_dict() == {0: 3}


def test_mul_examples():
    assert same(ls_mul(W + 1, W - 1), series_from_terms([(2, 1), (0, -1)]))
    assert same(ls_mul(INV_W, W), LaurentSeries.constant(1))
    r, u = 1.3, 0.4 - 0.2j
    square = ls_mul(W * r + INV_W * u, W * r + INV_W * u)
    assert same(square, series_from_terms([(2, r * r), (0, 2 * r * u), (-2, u * u)]))


def test_project_parts():
    f = series_from_terms([(1, 2), (0, 3), (-1, 4)])
    assert ls_project(f, "plus").to_dict() == {1: 2}
    assert ls_project(f, "zero").to_dict() == {0: 3}
    assert ls_project(f, "minus").to_dict() == {-1: 4}


def test_project_rejects_unknown_part():
    with pytest.raises(ValueError):
        W.project("middle")  # type: ignore[arg-type]


def test_deriv_examples():
    assert same(ls_deriv_w(LaurentSeries.monomial(2)), W * 2)
    assert same(ls_deriv_w(LaurentSeries.constant(5)), LaurentSeries.zero())
    assert same(ls_deriv_w(INV_W), LaurentSeries.monomial(-2, -1))


def test_eval_examples():
    assert ls_eval(W + 1, 1j) == pytest.approx(1 + 1j)
    assert ls_eval(INV_W, 2.0) == pytest.approx(0.5)
    phi = 0.7
    assert ls_eval(W * 1.5, np.exp(1j * phi)) == pytest.approx(1.5 * np.exp(1j * phi))


def test_eval_at_zero_with_negative_exponents():
    with pytest.raises(ZeroArgument):
        ls_eval(INV_W + 1, 0.0)
    assert ls_eval(W + 2, 0.0) == pytest.approx(2.0)


def test_eval_vectorized_matches_scalar():
    f = series_from_terms([(-2, 0.3), (0, 1.0), (3, -0.5j)])
    w = np.array([0.5 + 0.2j, -1.1, 2j])
    values = ls_eval(f, w)
    for point, value in zip(w, values):
        assert value == pytest.approx(ls_eval(f, complex(point)))


def test_lax_bracket_with_x():
    bracket = lax_bracket(W, LaurentSeries.zero(), LaurentSeries.monomial(3, 0.2), LaurentSeries.constant(1))
    assert same(bracket, W)


def test_lax_bracket_circle_pair():
    r, r_dot = 1.4, 0.25
    bracket = lax_bracket(W * r, W * r_dot, INV_W * r, INV_W * r_dot)
    assert same(bracket, LaurentSeries.constant(2 * r * r_dot))


@given(series(), series())
def test_add_commutes(a, b):
    assert same(ls_add(a, b), ls_add(b, a))


@given(series(), series(), series())
def test_mul_distributes(a, b, c):
    left = ls_mul(a, ls_add(b, c))
    right = ls_add(ls_mul(a, b), ls_mul(a, c))
    assert same(left, right, 1e-10)


@given(series())
def test_projections_partition(f):
    rebuilt = ls_project(f, "plus") + ls_project(f, "zero") + ls_project(f, "minus")
    assert same(rebuilt, f)


@given(series(), series())
def test_leibniz_rule(a, b):
    left = ls_deriv_w(ls_mul(a, b))
    right = ls_mul(ls_deriv_w(a), b) + ls_mul(a, ls_deriv_w(b))
    assert same(left, right, 1e-10)


def test_power_at_infinity_exact_for_polynomials():
    f = series_from_terms([(1, 1.2), (0, 0.3), (-1, 0.5)])
    cube = power_at_infinity(f, 3, 6)
    assert not cube.truncated
    assert same(cube, f * f * f, 1e-12)


def test_power_at_infinity_negative_power_inverts():
    f = series_from_terms([(1, 1.0), (-1, 0.3)])
    inverse = power_at_infinity(f, -1, 8)
    product = (f * inverse).truncate(-6, 0)
    assert max_abs_diff(product, LaurentSeries.constant(1).truncate(-6, 0)) < 1e-12


def test_power_at_zero_mirrors():
    f = series_from_terms([(-1, 0.8), (0, 0.2), (1, 0.1)])
    square = power_at_zero(f, 2, 4)
    assert same(square, f * f, 1e-12)


def test_power_errors():
    with pytest.raises(NonInvertibleLeading):
        power_at_infinity(LaurentSeries.zero(), 2, 3)
    cut = LaurentSeries(-1, [0.2, 0.5, 1.0], truncated=True)
    with pytest.raises(WindowTooWide):
        power_at_infinity(cut, 2, 5)


def test_hamiltonian_projection_halves_zero_mode():
    f = series_from_terms([(2, 1.0), (0, 4.0), (-3, 7.0)])
    assert hamiltonian_projection(f).to_dict() == {0: 2.0, 2: 1.0}


def random_xlaurent(rng, degree=1):
    return XLaurent(
        [LaurentSeries(-2, rng.normal(size=5) + 1j * rng.normal(size=5)) for _ in range(degree + 1)]
    )


def test_jacobi_identity(rng):
    f, g, h = (random_xlaurent(rng) for _ in range(3))
    assert jacobi_cyclic_sum(f, g, h).norm() < 1e-10


def test_bracket_with_x_monomial_is_w_derivative():
    g = XLaurent.from_series(series_from_terms([(2, 1.0), (-1, 3.0)]))
    x = XLaurent.monomial(1.0, 0, 1)
    assert xlaurent_bracket(XLaurent.from_series(W), x).terms[0].trim().to_dict() == {1: 1.0}
    assert xlaurent_bracket(g, g).norm() == 0.0


@pytest.mark.parametrize("i,j", [(1, 2), (1, 3), (2, 3)])
def test_zero_curvature_on_truncated_state(i, j):
    z = XLaurent(
        [
            LaurentSeries(-2, [0.3, 0.2 - 0.1j, 0.5, 1.0]),
            LaurentSeries(-1, [0.1j, 0.2, 0.05]),
        ]
    )
    assert zero_curvature_defect(z, i, j) < 1e-10
