"""Composite Simpson panels: alignment, exactness, density folding."""

import numpy as np
import pytest

from delaycrn.quadrature import aligned_bounds, interleave, simpson_weights


def test_aligned_bounds_cover_range_and_lattice():
    b = aligned_bounds(-1.0, 0.0, 0.25)
    np.testing.assert_allclose(b, [-1.0, -0.75, -0.5, -0.25, 0.0])


def test_aligned_bounds_phase_shifts_the_lattice():
    b = aligned_bounds(-1.0, 0.0, 0.25, phase=0.1)
    np.testing.assert_allclose(b, [-1.0, -0.9, -0.65, -0.4, -0.15, 0.0])


def test_forced_breakpoints_are_inserted():
    b = aligned_bounds(-1.0, 0.0, 0.5, force=(-0.3,))
    np.testing.assert_allclose(b, [-1.0, -0.5, -0.3, 0.0])


def test_near_duplicate_points_merge():
    b = aligned_bounds(-1.0, 0.0, 0.5, force=(-0.5 + 1e-12,))
    np.testing.assert_allclose(b, [-1.0, -0.5, 0.0])
    # a forced point hugging the top must not create a sliver panel
    b = aligned_bounds(-1.0, 0.0, 0.5, force=(-1e-12,))
    assert b[-1] == 0.0
    assert np.all(np.diff(b) > 1e-10)


def test_empty_range_rejected():
    with pytest.raises(ValueError):
        aligned_bounds(0.0, 0.0, 0.1)


def test_interleave_order():
    out = interleave(np.array([0.0, 2.0, 4.0]), np.array([1.0, 3.0]))
    np.testing.assert_array_equal(out, [0.0, 1.0, 2.0, 3.0, 4.0])


def test_simpson_nodes_are_bounds_and_midpoints():
    bounds = np.array([-1.0, -0.5, 0.0])
    nodes, w = simpson_weights(bounds)
    np.testing.assert_allclose(nodes, [-1.0, -0.75, -0.5, -0.25, 0.0])
    assert w.sum() == pytest.approx(1.0)  # integrates 1 over a length-1 range


@pytest.mark.parametrize("degree", [0, 1, 2, 3])
def test_exact_on_cubics_per_panel(degree):
    bounds = aligned_bounds(-2.0, 0.5, 0.4)
    nodes, w = simpson_weights(bounds)
    coeffs = np.arange(degree + 1) + 1.0
    want = np.polynomial.polynomial.Polynomial(coeffs).integ()
    got = w @ np.polynomial.polynomial.polyval(nodes, coeffs)
    assert got == pytest.approx(want(0.5) - want(-2.0), rel=1e-13)


def test_density_folds_into_weights():
    # int_{-1}^{0} x^2 * (x + 1) dx = 1/12, exact: integrand is cubic
    bounds = aligned_bounds(-1.0, 0.0, 0.5)
    nodes, w = simpson_weights(bounds, density=lambda s: s + 1.0)
    assert w @ nodes**2 == pytest.approx(1.0 / 12.0, rel=1e-14)


def test_fourth_order_convergence_on_smooth_integrand():
    f = np.sin
    exact = 1.0 - np.cos(1.0)

    def err(width):
        nodes, w = simpson_weights(aligned_bounds(0.0, 1.0, width))
        return abs(w @ f(nodes) - exact)

    e1, e2 = err(0.1), err(0.05)
    assert e2 < e1 / 12.0  # ~16x for a 4th-order rule
