"""Delay kernels: support, mass, first moments, and cumulative mass."""

import numpy as np
import pytest

from delaycrn import (
    NO_DELAY,
    NetworkValidationError,
    PointMassKernel,
    TableKernel,
    UniformKernel,
)


class TestPointMass:
    def test_no_delay_constant(self):
        assert NO_DELAY == PointMassKernel(0.0)
        assert NO_DELAY.is_point and NO_DELAY.max_delay == 0.0

    def test_support_and_moment(self):
        k = PointMassKernel(0.75)
        assert k.support == (-0.75, -0.75)
        assert k.first_moment() == 0.75

    def test_cdf_is_a_step_at_minus_delay(self):
        k = PointMassKernel(0.5)
        s = np.array([-1.0, -0.5 - 1e-12, -0.5, -0.1, 0.0])
        np.testing.assert_array_equal(k.cdf(s), [0.0, 0.0, 1.0, 1.0, 1.0])

    def test_negative_delay_rejected(self):
        with pytest.raises(NetworkValidationError):
            PointMassKernel(-0.1)

    def test_pretty(self):
        assert PointMassKernel(0.0).pretty() == "none"
        assert PointMassKernel(1.5).pretty() == "const(1.5)"


class TestUniform:
    def test_density_integrates_to_one(self):
        k = UniformKernel(0.5, 2.0)
        s = np.linspace(-2.5, 0.5, 30001)
        mass = np.trapezoid(k.density(s), s)
        assert mass == pytest.approx(1.0, abs=1e-3)

    def test_support_in_s_coordinates(self):
        assert UniformKernel(0.5, 2.0).support == (-2.0, -0.5)
        assert UniformKernel(0.5, 2.0).max_delay == 2.0

    def test_first_moment_is_midpoint(self):
        assert UniformKernel(0.0, 1.0).first_moment() == 0.5
        assert UniformKernel(1.0, 3.0).first_moment() == 2.0

    def test_cdf_linear_ramp(self):
        k = UniformKernel(0.0, 1.0)
        s = np.array([-2.0, -1.0, -0.75, -0.25, 0.0, 1.0])
        np.testing.assert_allclose(k.cdf(s), [0.0, 0.0, 0.25, 0.75, 1.0, 1.0])

    def test_no_interior_breakpoints(self):
        assert UniformKernel(0.0, 1.0).breakpoints == ()

    @pytest.mark.parametrize("a, b", [(1.0, 1.0), (2.0, 1.0), (-0.5, 1.0)])
    def test_bad_bounds_rejected(self, a, b):
        with pytest.raises(NetworkValidationError):
            UniformKernel(a, b)


class TestTable:
    def triangle(self):
        # raw mass 1/2 on [-1, 0]; renormalization doubles the values
        return TableKernel(s_points=(-1.0, -0.5, 0.0), values=(0.0, 1.0, 0.0))

    def test_renormalized_to_unit_mass(self):
        k = self.triangle()
        assert k.values == (0.0, 2.0, 0.0)
        s = np.linspace(-1.0, 0.0, 20001)
        assert np.trapezoid(k.density(s), s) == pytest.approx(1.0, abs=1e-6)

    def test_support_and_breakpoints(self):
        k = self.triangle()
        assert k.support == (-1.0, 0.0)
        assert k.max_delay == 1.0
        assert k.breakpoints == (-0.5,)

    def test_first_moment_exact_for_piecewise_linear(self):
        # symmetric triangle centered at s = -1/2: mean lag 1/2 exactly
        assert self.triangle().first_moment() == pytest.approx(0.5, abs=1e-15)

    def test_cdf_quadratic_per_segment(self):
        k = self.triangle()
        # mass below -0.5 is half; below -0.75 is 2*(0.25^2) = 1/8 by geometry
        np.testing.assert_allclose(
            k.cdf([-2.0, -0.75, -0.5, -0.25, 0.0]),
            [0.0, 0.125, 0.5, 0.875, 1.0],
        )

    def test_cdf_matches_numeric_integral_of_density(self):
        # grid jitter smears the density jump at the support top, hence 1e-5
        k = TableKernel(s_points=(-2.0, -1.2, -0.3), values=(0.4, 1.0, 0.1))
        for s in (-1.9, -1.2, -0.9, -0.31, -0.3, 0.0):
            grid = np.linspace(-2.0, s, 200001)
            want = np.trapezoid(k.density(grid), grid) if s > -2.0 else 0.0
            assert float(k.cdf(s)) == pytest.approx(want, abs=1e-5)
        assert float(k.cdf(0.0)) == 1.0

    def test_from_csv(self, tmp_path):
        p = tmp_path / "k.csv"
        p.write_text("s,density\n-1.0,0.0\n-0.5,1.0\n0.0,0.0\n")
        k = TableKernel.from_csv(str(p))
        assert k == self.triangle()
        assert k.pretty() == f"table({p})"

    @pytest.mark.parametrize(
        "s_points, values",
        [
            ((-1.0,), (1.0,)),                    # too few samples
            ((-1.0, -1.0), (1.0, 1.0)),           # not increasing
            ((-1.0, 0.5), (1.0, 1.0)),            # positive abscissa
            ((-1.0, 0.0), (1.0, -1.0)),           # negative density
            ((-1.0, 0.0), (0.0, 0.0)),            # zero mass
        ],
    )
    def test_bad_tables_rejected(self, s_points, values):
        with pytest.raises(NetworkValidationError):
            TableKernel(s_points=s_points, values=values)
