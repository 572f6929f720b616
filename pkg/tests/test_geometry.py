import numpy as np
import pytest

from eventdiv import geometry as geo
from eventdiv.events import SensorGeometry


CENTERED = SensorGeometry(100, 100)  # center at (50, 50)


class TestRadialWarp:
    def test_zero_velocity_identity(self, rng):
        x = rng.uniform(0, 100, 20)
        y = rng.uniform(0, 100, 20)
        t = rng.uniform(0, 1, 20)
        wx, wy = geo.radial_warp(x, y, t, nu=0.0, tau=1.0, geometry=CENTERED)
        np.testing.assert_allclose(wx, x)
        np.testing.assert_allclose(wy, y)

    def test_direct_substitution(self):
        # centered offset (10, 20), t=0, tau=1, nu=-0.5 -> scale 2 -> offset (20, 40)
        wx, wy = geo.radial_warp(60.0, 70.0, 0.0, nu=-0.5, tau=1.0, geometry=CENTERED)
        assert wx == pytest.approx(70.0)
        assert wy == pytest.approx(90.0)

    def test_event_at_batch_end_unchanged(self, rng):
        for nu in rng.uniform(-0.9, 0, 10):
            wx, wy = geo.radial_warp(12.0, 87.0, 1.0, nu=float(nu), tau=1.0,
                                     geometry=CENTERED)
            assert wx == pytest.approx(12.0)
            assert wy == pytest.approx(87.0)

    def test_singular_denominator(self):
        with pytest.raises(geo.CheiralityError):
            geo.radial_warp(1.0, 1.0, 0.0, nu=-2.0, tau=0.5, geometry=CENTERED)

    def test_scale_at_least_one(self, rng):
        tau = 0.7
        for _ in range(50):
            nu = rng.uniform(-(1 - 1e-6) / tau, 0)
            t = rng.uniform(0, tau)
            assert geo.warp_scale(t, nu, tau) >= 1.0 - 1e-12

    def test_collinearity(self, rng):
        # warp at any interior nu lies on the segment between the endpoint warps
        tau = 0.5
        dom = geo.velocity_domain(tau)
        for _ in range(100):
            lo, hi = np.sort(rng.uniform(dom.lo, dom.hi, 2))
            nu = rng.uniform(lo, hi)
            x, y = rng.uniform(0, 100, 2)
            t = rng.uniform(0, tau)
            p0 = np.array(geo.radial_warp(x, y, t, lo, tau, CENTERED))
            p1 = np.array(geo.radial_warp(x, y, t, hi, tau, CENTERED))
            p = np.array(geo.radial_warp(x, y, t, nu, tau, CENTERED))
            d = p1 - p0
            denom = float(d @ d)
            if denom == 0.0:
                np.testing.assert_allclose(p, p0, atol=1e-9)
                continue
            s = float((p - p0) @ d) / denom
            assert -1e-9 <= s <= 1 + 1e-9
            np.testing.assert_allclose(p, p0 + s * d, atol=1e-9)


class TestVelocityDomain:
    def test_half_second(self):
        dom = geo.velocity_domain(0.5, 1e-6)
        assert dom.lo == pytest.approx(-1.999998)
        assert dom.hi == 0.0

    def test_zero_epsilon(self):
        dom = geo.velocity_domain(1.0, 0.0)
        assert dom.lo == -1.0

    def test_two_seconds(self):
        assert geo.velocity_domain(2.0, 1e-6).lo == pytest.approx(-0.4999995)

    def test_bad_tau(self):
        with pytest.raises(ValueError):
            geo.velocity_domain(0.0)


class TestDivergence:
    def test_zero(self):
        assert geo.divergence_from_velocity(0.0, 0.5) == 0.0

    def test_substitution(self):
        assert geo.divergence_from_velocity(-0.5, 0.5) == pytest.approx(-2.0 / 3.0)
        assert geo.divergence_from_velocity(-0.9, 1.0) == pytest.approx(-9.0)

    def test_monotone_in_nu(self, rng):
        tau = 0.5
        nus = np.sort(rng.uniform(-1.9, 0, 50))
        ds = [geo.divergence_from_velocity(float(nu), tau) for nu in nus]
        assert np.all(np.diff(ds) > 0)

    def test_domain_error(self):
        with pytest.raises(geo.CheiralityError):
            geo.divergence_from_velocity(-2.0, 0.5)


class TestContinuousDivergence:
    def test_zero_velocity(self):
        for t in (0.0, 1.0, 10.0):
            assert geo.continuous_divergence(0.0, 1.0, t) == 0.0

    def test_substitution(self):
        assert geo.continuous_divergence(-0.2, 1.0, 0.0) == pytest.approx(-0.2)
        assert geo.continuous_divergence(-0.2, 2.0, 5.0) == pytest.approx(-0.2)

    def test_past_touchdown(self):
        with pytest.raises(geo.CheiralityError):
            geo.continuous_divergence(-0.5, 1.0, 3.0)


class TestVelocityInterval:
    def test_split(self):
        lo, hi = geo.VelocityInterval(-1.0, 0.0).split()
        assert lo == geo.VelocityInterval(-1.0, -0.5)
        assert hi == geo.VelocityInterval(-0.5, 0.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            geo.VelocityInterval(0.0, -1.0)
