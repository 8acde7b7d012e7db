"""Noise table calibration from labelled detector outputs"""

import numpy as np
import pytest

from natsearch.errors import CalibrationError
from natsearch.experiments.calibration import CalibrationSample, calibrate_noise, load_calibration_csv


EDGES = [0.0, 10.0, 20.0, 30.0]
TRUE_VARIANCES = [0.005, 0.02, 0.05]


def synthetic_samples(rng, variances=TRUE_VARIANCES, per_bin=5000, label="person", false_positive=False):
    samples = []
    for (lo, hi), var in zip(zip(EDGES[:-1], EDGES[1:]), variances):
        distance = rng.uniform(lo, hi, per_bin)
        magnitude = np.abs(rng.normal(0.0, np.sqrt(var), per_bin))
        confidence = np.clip(magnitude if false_positive else 1.0 - magnitude, 0.0, 1.0)
        samples.extend(CalibrationSample(float(d), float(c), label) for d, c in zip(distance, confidence))
    return samples


class TestCalibrateNoise:

    @pytest.mark.parametrize("estimator", ["mle", "moment"])
    def test_recovers_table(self, rng, estimator):
        model = calibrate_noise(synthetic_samples(rng), EDGES, estimator=estimator)
        np.testing.assert_allclose(model.variances, TRUE_VARIANCES, rtol=0.1)
        assert model.depths == (10.0, 20.0, 30.0)
        assert model.metric == "meters"

    def test_moment_estimator_inverts_half_normal_spread(self, rng):
        samples = synthetic_samples(rng, per_bin=20_000)
        for (lo, hi), variance in zip(zip(EDGES[:-1], EDGES[1:]), TRUE_VARIANCES):
            deviation = np.array([1.0 - s.confidence for s in samples if lo <= s.distance < hi])
            assert np.var(deviation) == pytest.approx(variance * (1 - 2 / np.pi), rel=0.05)
        model = calibrate_noise(samples, EDGES, estimator="moment")
        np.testing.assert_allclose(model.variances, TRUE_VARIANCES, rtol=0.05)

    def test_perfect_detector(self):
        samples = [CalibrationSample(d, 1.0) for d in (1.0, 2.0, 11.0, 12.0, 21.0, 30.0)]
        model = calibrate_noise(samples, EDGES)
        assert model.variances == (0.0, 0.0, 0.0)

    def test_table_is_monotone(self, rng):
        model = calibrate_noise(synthetic_samples(rng, variances=[0.04, 0.01, 0.05], per_bin=2000), EDGES)
        assert np.all(np.diff(model.variances) >= 0)
        assert model.variances[0] == pytest.approx(model.variances[1])

    def test_sparse_bin(self):
        samples = [CalibrationSample(d, 0.9) for d in (1.0, 2.0, 15.0, 21.0, 22.0)]
        with pytest.raises(CalibrationError) as excinfo:
            calibrate_noise(samples, EDGES)
        assert excinfo.value.bins == [1]

    def test_label_filter(self, rng):
        samples = synthetic_samples(rng, per_bin=2000) + synthetic_samples(
            rng, variances=[0.2, 0.2, 0.2], per_bin=2000, label="car")
        model = calibrate_noise(samples, EDGES, label="person")
        np.testing.assert_allclose(model.variances, TRUE_VARIANCES, rtol=0.15)

    def test_false_positive_mode(self, rng):
        samples = synthetic_samples(rng, false_positive=True)
        model = calibrate_noise(samples, EDGES, false_positive=True)
        np.testing.assert_allclose(model.variances, TRUE_VARIANCES, rtol=0.1)

    def test_out_of_range_ignored(self, rng):
        samples = synthetic_samples(rng, per_bin=500) + [CalibrationSample(99.0, 0.0)] * 10
        model = calibrate_noise(samples, EDGES)
        assert model.variances[-1] < 0.1

    def test_interpolation_passed_through(self, rng):
        model = calibrate_noise(synthetic_samples(rng, per_bin=200), EDGES, interpolation="linear")
        assert model.interpolation == "linear"

    def test_bad_arguments(self):
        samples = [CalibrationSample(1.0, 0.9)] * 3
        with pytest.raises(CalibrationError):
            calibrate_noise(samples, [0.0])
        with pytest.raises(CalibrationError):
            calibrate_noise(samples, [0.0, 5.0, 5.0])
        with pytest.raises(CalibrationError):
            calibrate_noise(samples, [0.0, 5.0], estimator="median")


class TestCalibrationSample:

    def test_rejects_bad_values(self):
        with pytest.raises(CalibrationError):
            CalibrationSample(-1.0, 0.5)
        with pytest.raises(CalibrationError):
            CalibrationSample(1.0, 1.5)
        with pytest.raises(CalibrationError):
            CalibrationSample(float("nan"), 0.5)


class TestLoadCalibrationCsv:

    def test_reads_rows(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("distance,confidence,label\n12.5,0.8,person\n40,0.3, car \n")
        samples = load_calibration_csv(path)
        assert samples == [CalibrationSample(12.5, 0.8, "person"), CalibrationSample(40.0, 0.3, "car")]

    def test_label_optional(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("distance,confidence\n1,1\n")
        assert load_calibration_csv(path)[0].label == ""

    def test_missing_file(self, tmp_path):
        with pytest.raises(CalibrationError):
            load_calibration_csv(tmp_path / "missing.csv")

    def test_missing_column(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("distance,label\n1,person\n")
        with pytest.raises(CalibrationError, match="confidence"):
            load_calibration_csv(path)

    def test_bad_row_reports_line(self, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("distance,confidence\n1,0.5\n2,1.7\n")
        with pytest.raises(CalibrationError, match=":3:"):
            load_calibration_csv(path)
