from fractions import Fraction

import numpy as np
import pytest

from toda_growth import fixtures
from toda_growth.errors import InvalidMap, SingularPoint, ZeroArgument
from toda_growth.laurent import LaurentSeries, max_abs_diff
from toda_growth.maps import (
    LogMapPair,
    PolyMapPair,
    RationalMapPair,
    boundary_samples,
    build_map,
    coalesce,
    dump_record,
    enclosed_area,
    load_record,
    rational_limit,
    univalence_margin,
)


def test_polynomial_expansion_examples():
    pair = PolyMapPair(1.0, [0.5], [0.0])
    assert max_abs_diff(pair.expand_z_at_infinity(4), LaurentSeries(0, [0.5, 1.0])) == 0.0
    other = PolyMapPair(2.0, [0.0], [0.0])
    assert max_abs_diff(other.expand_zbar_at_zero(4), LaurentSeries.monomial(-1, 2.0)) == 0.0


def test_dimensions_by_kind():
    assert fixtures.polynomial_n2().dimension == 2 * 2 + 3
    assert fixtures.rational_n1().dimension == 4 * 1 + 3
    assert fixtures.logarithmic_n1().dimension == 2 * 1 + 5


def test_rational_eval_example():
    r, u0 = 1.5, 0.2
    pair = RationalMapPair(r, u0, [(1.0, 0.5)], 0.0, [(0.1, 0.2)])
    assert pair.eval_z(np.array([2.0]))[0] == pytest.approx(2 * r + u0 + 1 / 1.5)


def test_zbar_is_barred_half_at_inverse():
    pair = fixtures.formal_polynomial_n2()
    w = np.array([1.3 + 0.4j, -0.8 + 1.1j])
    expected = pair.zbar_half.value(1.0 / w)
    np.testing.assert_allclose(pair.eval_zbar(w), expected)
    with pytest.raises(ZeroArgument):
        pair.eval_zbar(np.array([0.0]))


def test_logarithmic_expansion_matches_closed_form():
    pair = fixtures.logarithmic_n1()
    w = np.array([3.0 + 1.0j, -2.5 + 0.5j])
    series = pair.expand_z_at_infinity(40)
    np.testing.assert_allclose(series.evaluate(w), pair.eval_z(w), atol=1e-12)


def test_rational_expansion_matches_closed_form():
    pair = fixtures.rational_n1()
    w = np.array([2.0 + 0.5j, -1.7j])
    series = pair.expand_z_at_infinity(40)
    np.testing.assert_allclose(series.evaluate(w), pair.eval_z(w), atol=1e-12)


def test_gradient_matches_finite_difference():
    pair = fixtures.formal_rational_n1()
    w = np.array([1.4 + 0.3j, -0.9 + 1.2j])
    grad = pair.z_grad(w)
    base = pair.params()
    h = 1e-7
    for j in range(pair.dimension):
        step = base.copy()
        step[j] += h
        moved = pair.with_params(step).eval_z(w)
        np.testing.assert_allclose((moved - pair.eval_z(w)) / h, grad[:, j], atol=1e-5)


def test_charges_must_cancel_exactly():
    with pytest.raises(InvalidMap):
        LogMapPair(1.0, 0.0, [("1/10", 0.3), ("1/10", -0.2)], real_structure=True)
    with pytest.raises(InvalidMap):
        LogMapPair(1.0, 0.0, [("1/3", 0.3), (-0.3333333333333333, -0.2)], real_structure=True)
    pair = LogMapPair(1.0, 0.0, [("1/3", 0.3), ("-1/3", -0.2)], real_structure=True)
    assert pair.z_half.charge_sum() == (Fraction(0), Fraction(0))


def test_invalid_maps_rejected():
    with pytest.raises(InvalidMap):
        PolyMapPair(0.0, [0.1], [0.1])
    with pytest.raises(InvalidMap):
        PolyMapPair(1.0, [0.1])
    with pytest.raises(InvalidMap):
        RationalMapPair(1.0, 0.0, [(0.1, 0.3), (0.2, 0.3)], real_structure=True)
    with pytest.raises(InvalidMap):
        RationalMapPair(1.0, 0.0, [(0.1, 1.5)], real_structure=True, physical=True)
    with pytest.raises(InvalidMap):
        PolyMapPair(1.0, [0.1j], [0.3], real_structure=True)


def test_real_structure_projection():
    pair = fixtures.polynomial_n2()
    vec = pair.params()
    vec[1] += 1e-3
    projected = pair.with_params(vec)
    assert projected.symmetry_defect(projected.params()) < 1e-15


def test_boundary_samples_circle():
    z = boundary_samples(fixtures.circle(2.0), 8)
    np.testing.assert_allclose(z[::2], [2.0, 2j, -2.0, -2j], atol=1e-14)
    with pytest.raises(ValueError):
        boundary_samples(fixtures.circle(), 4)
    with pytest.raises(ValueError, match="power of two"):
        boundary_samples(fixtures.circle(), 12)
    assert boundary_samples(fixtures.circle(), 16).shape == (16,)


def test_boundary_rejects_singularity_on_circle():
    pair = RationalMapPair(1.0, 0.0, [(0.1, 1.0)], 0.0, [(0.1, 0.5)])
    with pytest.raises(SingularPoint):
        boundary_samples(pair, 16)


def test_univalence_margin_examples():
    assert univalence_margin(fixtures.circle(), 64) == pytest.approx(1.0)
    near_cusp = PolyMapPair(1.0, [0.0, 0.999], real_structure=True, physical=True)
    assert univalence_margin(near_cusp, 256) == pytest.approx(1e-3, rel=1e-6)


@pytest.mark.parametrize("alpha", [0.0, 0.2, 0.5])
def test_enclosed_area_of_ellipse(alpha):
    pair = fixtures.ellipse(1.3, alpha)
    assert enclosed_area(pair, 256) == pytest.approx(np.pi * 1.3 ** 2 * (1 - alpha ** 2))


def test_record_round_trip_keeps_exact_charges():
    pair = fixtures.logarithmic_n1()
    restored = load_record(dump_record(pair))
    assert isinstance(restored, LogMapPair)
    assert restored.z_half.charges == pair.z_half.charges
    np.testing.assert_array_equal(restored.params(), pair.params())
    assert restored.real_structure and restored.physical


def test_load_record_reports_bad_line():
    with pytest.raises(InvalidMap, match="line 2"):
        load_record("kind polynomial\nparam r one 0\n")


def test_build_map_from_reduction():
    pair = build_map({"kind": "rational", "r": 1.0, "u0": 0.05, "poles": [(0.1, 0.4)], "real_structure": True})
    assert isinstance(pair, RationalMapPair)
    assert pair.zbar_half.u0 == pytest.approx(0.05)


def test_coalescence_converges_linearly():
    data = fixtures.rational_n1()
    poles = [(0.1 + 0.05j, 0.4 - 0.1j)]
    target = data.eval_z(np.array([1.5 + 1.5j]))[0]
    errors = []
    for eps in (1e-2, 5e-3, 2.5e-3):
        log_map = coalesce(1.0, 0.05, poles, eps, real_structure=True, physical=True)
        errors.append(abs(log_map.eval_z(np.array([1.5 + 1.5j]))[0] - target))
    assert errors[0] / errors[1] == pytest.approx(2.0, abs=0.3)
    assert errors[1] / errors[2] == pytest.approx(2.0, abs=0.3)


def test_rational_limit_reads_back_the_poles():
    log_map = coalesce(1.0, 0.05, [(0.1, 0.4)], 1e-3, real_structure=True)
    limit = rational_limit(log_map)
    assert limit.z_half.p[0] == pytest.approx(0.4)
    assert limit.z_half.c[0] == pytest.approx(0.1)
