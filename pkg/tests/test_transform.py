import numpy as np
import pytest

from priceflow import (
    forward_transform,
    make_datum,
    periodic_mean_levels,
    preset,
    reconstruct_density,
)


def test_tent_field_values(tent_field):
    # single contributing translate on each side
    assert tent_field(-0.5) == pytest.approx(0.5, abs=1e-15)
    assert tent_field(-1.5) == pytest.approx(0.5, abs=1e-15)
    assert tent_field(0.5) == pytest.approx(-0.5, abs=1e-15)


def test_field_zero_at_p0(all_presets):
    for d in all_presets.values():
        tf = forward_transform(d)
        assert tf(d.p0) == 0.0


def test_periodic_mean_levels():
    assert periodic_mean_levels(forward_transform(preset("tent"))) == (0.5, 0.5)
    assert periodic_mean_levels(forward_transform(preset("skew"))) == (1.0, 0.5)
    assert periodic_mean_levels(forward_transform(preset("tent", a=0.5))) == (1.0, 1.0)


def test_periodic_mean_matches_numeric_tail_average(all_presets):
    # independent oracle: midpoint-rule average of the field over one tail
    # period (exact for piecewise-linear data with aligned breakpoints)
    n = 20000
    for d in all_presets.values():
        tf = forward_transform(d)
        c_plus, c_minus = periodic_mean_levels(tf)
        a = d.a
        xl = d.x_min - 5 * a + (np.arange(n) + 0.5) * (a / n)
        assert np.mean(tf(xl)) == pytest.approx(c_plus, abs=1e-10)
        xr = d.x_max + 4 * a + (np.arange(n) + 0.5) * (a / n)
        assert np.mean(tf(xr)) == pytest.approx(-c_minus, abs=1e-10)


def test_tail_periodicity(all_presets):
    for d in all_presets.values():
        tf = forward_transform(d)
        a = d.a
        xs = np.linspace(d.x_min - 6 * a, d.x_min - 3 * a, 500)
        assert np.max(np.abs(tf(xs + a) - tf(xs))) <= 1e-14
        xs = np.linspace(d.x_max + 3 * a, d.x_max + 6 * a, 500)
        assert np.max(np.abs(tf(xs - a) - tf(xs))) <= 1e-14


def test_sign_structure(all_presets):
    for d in all_presets.values():
        tf = forward_transform(d)
        xs = np.linspace(d.x_min - 3 * d.a, d.x_max + 3 * d.a, 4001)
        vals = tf(xs)
        assert np.all(vals[xs < d.p0] >= 0.0)
        assert np.all(vals[xs > d.p0] <= 0.0)
        # strictly positive just left of p0 and negative just right
        assert tf(d.p0 - 1e-6) > 0.0
        assert tf(d.p0 + 1e-6) < 0.0


def test_boundedness(all_presets):
    for d in all_presets.values():
        tf = forward_transform(d)
        xs = np.linspace(d.x_min - 3 * d.a, d.x_max + 3 * d.a, 4001)
        assert np.max(np.abs(tf(xs))) <= tf.sup_bound + 1e-15


def test_reconstruct_trivials(tent_field):
    assert reconstruct_density(tent_field, 0.0, 1.0, -0.5) == 0.5
    # the telescoping cancels the periodic tail: F(-1.5) - F(-0.5) = 0
    assert reconstruct_density(tent_field, 0.0, 1.0, -1.5) == pytest.approx(0.0, abs=1e-15)
    assert reconstruct_density(tent_field, 0.0, 1.0, 0.0) == 0.0


def test_round_trip_identity(all_presets):
    for d in all_presets.values():
        tf = forward_transform(d)
        span = d.x_max - d.x_min
        xs = np.linspace(d.x_min - span - 3 * d.a, d.x_max + span + 3 * d.a, 10_000)
        rec = reconstruct_density(tf, d.p0, d.a, xs)
        assert np.max(np.abs(rec - d(xs))) <= 1e-12


def test_round_trip_fractional_a():
    d = preset("skew", a=0.37)
    tf = forward_transform(d)
    xs = np.linspace(-8, 8, 8001)
    rec = reconstruct_density(tf, d.p0, d.a, xs)
    assert np.max(np.abs(rec - d(xs))) <= 1e-12


def test_round_trip_shifted_p0():
    d = make_datum([1.0, 2.0, 3.5], [2.0, 0.0, -1.5], p0=2.0, a=0.8)
    tf = forward_transform(d)
    # micro-offset keeps samples off the translated jump points, where a
    # one-ulp rounding of x +- a lands on the wrong side of a discontinuity
    xs = np.linspace(-6, 10, 8001) + 1e-7 * np.sqrt(2.0)
    rec = reconstruct_density(tf, d.p0, d.a, xs)
    assert np.max(np.abs(rec - d(xs))) <= 1e-12


def test_one_sided_support_is_degenerate_but_transformable():
    # all mass on the vendor side: buyer fold is empty, field is <= 0
    d = make_datum([1.0, 2.0, 3.0], [-1.0, -2.0, -1.0], p0=0.0, a=1.0)
    tf = forward_transform(d)
    assert tf(-1.0) == 0.0
    assert tf(0.5) == 0.0  # gap between p0 and the support
    assert tf(1.5) < 0.0
    xs = np.linspace(-2, 6, 2001)
    rec = reconstruct_density(tf, d.p0, d.a, xs)
    assert np.max(np.abs(rec - d(xs))) <= 1e-12
