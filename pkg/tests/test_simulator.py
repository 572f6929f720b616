import numpy as np
import pytest

from eventdiv.events import SensorGeometry, batch_stream
from eventdiv.geometry import CheiralityError, radial_warp
from eventdiv import simulator as sim


class FixedPointRng:
    """Stub generator that pins the first scene point and delegates the rest."""

    def __init__(self, px, py, seed=0):
        # scene point sampling draws the x array first, then the y array
        self._queue = [np.array([float(px)]), np.array([float(py)])]
        self._rng = np.random.default_rng(seed)

    def uniform(self, lo, hi, size=None):
        if self._queue:
            return self._queue.pop(0)
        return self._rng.uniform(lo, hi, size)

    def __getattr__(self, name):
        return getattr(self._rng, name)


def single_point_config(**kwargs):
    defaults = dict(z0=1.0, nu=-0.5, geometry=SensorGeometry(64, 64),
                    duration=0.8, n_points=1, seed=7)
    defaults.update(kwargs)
    return sim.SimConfig(**defaults)


class TestConfigValidation:
    def test_positive_nu_rejected(self):
        with pytest.raises(ValueError):
            sim.SimConfig(nu=0.1)

    def test_cheirality_violation(self):
        with pytest.raises(CheiralityError):
            sim.SimConfig(z0=1.0, nu=-0.5, duration=3.0)

    def test_bad_fraction(self):
        with pytest.raises(ValueError):
            sim.SimConfig(noise_event_fraction=1.0)


class TestGroundTruth:
    def test_values(self):
        config = sim.SimConfig(z0=1.0, nu=-0.2, duration=2.0)
        assert sim.ground_truth_divergence(config, 0.0) == pytest.approx(-0.2)
        config2 = sim.SimConfig(z0=2.0, nu=-0.2, duration=5.0)
        assert sim.ground_truth_divergence(config2, 5.0) == pytest.approx(-0.2)

    def test_sampling_rate(self):
        config = sim.SimConfig(duration=2.0)
        _, gt = sim.generate_landing_events(config)
        dt = np.diff(gt.samples[:, 0])
        np.testing.assert_allclose(dt, 1.0 / 33.0)
        np.testing.assert_allclose(
            gt.samples[:, 1],
            config.nu / (config.z0 + config.nu * gt.samples[:, 0]),
        )

    def test_past_touchdown(self):
        config = sim.SimConfig(z0=1.0, nu=-0.4, duration=2.0)
        with pytest.raises(CheiralityError):
            sim.ground_truth_divergence(config, 3.0)


class TestEventGeneration:
    def test_static_scene_emits_nothing(self):
        config = sim.SimConfig(z0=1.0, nu=0.0, duration=2.0, n_points=200)
        stream, _ = sim.generate_landing_events(config)
        assert stream.n == 0

    def test_first_event_time_closed_form(self):
        # point at centered (10, 0), z0=1, nu=-0.5, spacing 1 px:
        # first event when the radius reaches 11, at t = (1/0.5)(1 - 1/1.1)
        config = single_point_config()
        rng = FixedPointRng(10.0, 0.0)
        xs, ys, ts = sim._trajectory_events(config, rng)
        t_first = ts[0][0]
        assert t_first == pytest.approx(2.0 * (1.0 - 1.0 / 1.1))
        # event at radius 11 along +x from the center
        assert xs[0][0] == pytest.approx(32.0 + 11.0)
        assert ys[0][0] == pytest.approx(32.0)

    def test_deterministic_under_seed(self):
        config = sim.SimConfig(duration=1.0, n_points=300, noise_px=0.3,
                               noise_event_fraction=0.1, seed=11)
        a, _ = sim.generate_landing_events(config)
        b, _ = sim.generate_landing_events(config)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.t, b.t)
        np.testing.assert_array_equal(a.polarity, b.polarity)

    def test_trajectory_collapses_under_true_warp(self):
        config = single_point_config(duration=0.5)
        stream, _ = sim.generate_landing_events(config)
        assert stream.n > 3
        tau = 0.5
        nu_b = sim.normalized_velocity(config, 0.0)
        wx, wy = radial_warp(stream.x, stream.y, stream.t, nu_b, tau, config.geometry)
        assert np.ptp(wx) < 1e-6
        assert np.ptp(wy) < 1e-6

    def test_event_rate_grows_for_interior_point(self):
        # a point near the center stays in frame; its event rate rises as
        # radial speed grows during descent
        config = single_point_config(duration=1.5, nu=-0.5)
        rng = FixedPointRng(6.0, 3.0)
        xs, ys, ts = sim._trajectory_events(config, rng)
        t = ts[0]
        counts = np.histogram(t, bins=np.arange(0, 1.51, 0.5))[0]
        assert np.all(np.diff(counts) >= 0)

    def test_clutter_fraction(self):
        config = sim.SimConfig(duration=1.0, n_points=500,
                               noise_event_fraction=0.1, seed=2)
        noisy, _ = sim.generate_landing_events(config)
        clean, _ = sim.generate_landing_events(
            sim.SimConfig(duration=1.0, n_points=500, seed=2)
        )
        ratio = (noisy.n - clean.n) / noisy.n
        assert ratio == pytest.approx(0.1, abs=0.01)

    def test_normalized_velocity_matches_batches(self):
        config = sim.SimConfig(z0=2.0, nu=-0.6, duration=2.0)
        nu0 = sim.normalized_velocity(config, 0.0)
        assert nu0 == pytest.approx(-0.3)
        nu1 = sim.normalized_velocity(config, 1.0)
        assert nu1 == pytest.approx(-0.6 / 1.4)
