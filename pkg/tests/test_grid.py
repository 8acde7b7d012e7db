"""Grid indexing and ground-truth generation"""

import numpy as np
import pytest
from scipy import stats

from natsearch.errors import ConfigError, GridBoundsError
from natsearch.models.grid import GridEnvironment, GroundTruth, flatten_index, generate_ground_truth


class TestFlattenIndex:

    @pytest.mark.parametrize("row, col, expected", [(0, 0, 0), (15, 15, 255), (1, 0, 16), (2, 3, 35)])
    def test_row_major(self, env16, row, col, expected):
        assert flatten_index(row, col, env16) == expected

    def test_out_of_bounds(self, env16):
        with pytest.raises(GridBoundsError):
            flatten_index(16, 0, env16)
        with pytest.raises(IndexError):
            env16.flatten(0, -1)

    def test_unflatten_inverts(self, env16):
        for cell in (0, 17, 255):
            assert env16.flatten(*env16.unflatten(cell)) == cell

    def test_invalid_dimensions(self):
        with pytest.raises(ConfigError):
            GridEnvironment(0, 4)

    def test_distance(self):
        env = GridEnvironment(8, 8)
        assert env.distance(env.flatten(0, 0), env.flatten(3, 4)) == pytest.approx(5.0)


class TestGenerateGroundTruth:

    def test_k_nonzeros(self, env16, rng):
        truth = generate_ground_truth(env16, 5, rng)
        assert truth.beta.shape == (256,)
        assert set(np.unique(truth.beta)) <= {0.0, 1.0}
        assert len(truth.support) == 5

    def test_k_zero(self, env16, rng):
        truth = generate_ground_truth(env16, 0, rng)
        assert not truth.beta.any()

    def test_k_equals_m(self, rng):
        env = GridEnvironment(3, 3)
        truth = generate_ground_truth(env, 9, rng)
        assert truth.beta.all()

    def test_k_too_large(self, rng):
        with pytest.raises(ConfigError):
            generate_ground_truth(GridEnvironment(2, 2), 5, rng)

    def test_single_object_is_uniform(self, env16):
        rng = np.random.default_rng(17)
        counts = np.zeros(env16.size)
        for _ in range(100_000):
            counts[generate_ground_truth(env16, 1, rng).support[0]] += 1
        assert stats.chisquare(counts).pvalue > 1e-3

    def test_seeded(self, env16):
        a = generate_ground_truth(env16, 3, np.random.default_rng(5))
        b = generate_ground_truth(env16, 3, np.random.default_rng(5))
        np.testing.assert_array_equal(a.beta, b.beta)

    def test_support_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            GroundTruth(np.array([1.0, 0.0, 1.0]), 1)
