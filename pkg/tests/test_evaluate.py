import numpy as np
import pytest

from eventdiv import evaluate as ev


def radial_field(rng, c, n=20, foe=(80.0, 45.0)):
    positions = rng.uniform(-40, 40, size=(n, 2))
    foe_arr = np.asarray(foe)
    vectors = c * (foe_arr + positions)
    return ev.FlowField(positions, vectors, foe, tau=0.5)


class TestOfToDivergence:
    def test_zero_flow(self, rng):
        field = ev.FlowField(rng.uniform(1, 10, size=(5, 2)),
                             np.zeros((5, 2)), (0.0, 0.0), tau=1.0)
        assert ev.of_to_divergence(field) == 0.0

    def test_single_vector_substitution(self):
        field = ev.FlowField(np.array([[1.0, 0.0]]), np.array([[0.5, 0.0]]),
                             (0.0, 0.0), tau=1.0)
        assert ev.of_to_divergence(field) == pytest.approx(-0.5)

    def test_exact_radial_identity(self, rng):
        for _ in range(20):
            c = float(rng.uniform(-1.0, 1.0))
            if 1 + 0.5 * c <= 0:
                continue
            field = radial_field(rng, c)
            assert ev.of_to_divergence(field) == pytest.approx(-c, rel=1e-9, abs=1e-12)

    def test_rotation_invariance(self, rng):
        c = -0.3
        field = radial_field(rng, c)
        theta = 0.8
        rot = np.array([[np.cos(theta), -np.sin(theta)],
                        [np.sin(theta), np.cos(theta)]])
        foe = np.asarray(field.foe)
        # rotate radius vectors and flows about the FOE
        base = (foe + field.positions) @ rot.T
        rotated = ev.FlowField(base - foe, field.vectors @ rot.T, field.foe, field.tau)
        assert ev.of_to_divergence(rotated) == pytest.approx(
            ev.of_to_divergence(field), rel=1e-12
        )

    def test_zero_radius_skipped(self):
        field = ev.FlowField(
            np.array([[0.0, 0.0], [1.0, 0.0]]),
            np.array([[9.9, 9.9], [0.5, 0.0]]),
            (0.0, 0.0), tau=1.0,
        )
        assert ev.of_to_divergence(field) == pytest.approx(-0.5)


class TestFlowCsv:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "flow.csv"
        path.write_text(
            "# foe=80.0,45.0 tau=0.5\n"
            "1.0,2.0,0.1,0.2\n"
            "-3.0,4.0,0.0,-0.1\n"
        )
        field = ev.parse_flow_csv(path)
        assert field.foe == (80.0, 45.0)
        assert field.tau == 0.5
        np.testing.assert_allclose(field.positions, [[1, 2], [-3, 4]])
        np.testing.assert_allclose(field.vectors, [[0.1, 0.2], [0.0, -0.1]])

    def test_missing_header(self, tmp_path):
        path = tmp_path / "flow.csv"
        path.write_text("1.0,2.0,0.1,0.2\n")
        with pytest.raises(ValueError):
            ev.parse_flow_csv(path)


class TestDivergenceError:
    def test_identical_series(self):
        series = np.array([[0.5, -0.4], [1.0, -0.5]])
        report = ev.divergence_error(series, series)
        assert report.mean_abs_error_pct == 0.0

    def test_ten_percent(self):
        report = ev.divergence_error(
            np.array([[1.0, -0.9]]), np.array([[1.0, -1.0]])
        )
        assert report.mean_abs_error_pct == pytest.approx(10.0)

    def test_closest_in_time_selection(self):
        gt = np.array([[0.0, -1.0], [1.0, -2.0]])
        report = ev.divergence_error(np.array([[0.9, -2.0]]), gt)
        assert report.mean_abs_error_pct == 0.0

    def test_near_zero_gt_excluded(self):
        gt = np.array([[0.0, 0.0], [1.0, -1.0]])
        est = np.array([[0.0, -0.5], [1.0, -1.0]])
        report = ev.divergence_error(est, gt)
        assert len(report.per_batch_errors) == 1
        assert report.mean_abs_error_pct == 0.0

    def test_empty_inputs(self):
        with pytest.raises(ValueError):
            ev.divergence_error(np.empty((0, 2)), np.array([[0.0, -1.0]]))

    def test_mean_runtime(self):
        series = np.array([[0.5, -0.4]])
        report = ev.divergence_error(series, series, runtimes=np.array([0.2, 0.4]))
        assert report.mean_runtime_s == pytest.approx(0.3)
