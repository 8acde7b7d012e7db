"""Action sets, the NATS reward and the comparison policies"""

import numpy as np
import pytest

from natsearch.inference.sbl import SBLPosterior, compute_posterior
from natsearch.models.grid import GridEnvironment
from natsearch.models.noise import DepthNoiseModel
from natsearch.policy import (
    ActionCatalog,
    ActionSet,
    DecisionContext,
    PointSweep,
    bints_beliefs,
    bints_select,
    candidate_rewards,
    enumerate_action_set,
    ig_select,
    information_gain,
    make_policy,
    nats_reward,
    nats_select,
    point_next,
    rnd_select,
    travel_cost,
)
from natsearch.policy.baselines import information_gains
from natsearch.sensing.detector import Measurement
from natsearch.sensing.fov import Heading, SensingAction


def random_spd(rng, size):
    A = rng.normal(0, 1, (size, size))
    return A @ A.T / size + 0.05 * np.eye(size)


class TestEnumerateActionSet:

    def test_unbounded_covers_every_pose(self, env16, noise):
        actions = enumerate_action_set(0, None, env16, noise)
        assert len(actions) == 1024

    def test_radius_zero(self, env16, noise):
        actions = enumerate_action_set(env16.flatten(5, 5), 0, env16, noise)
        assert len(actions) == 4
        assert [a.heading for a in actions.actions] == [Heading.N, Heading.S, Heading.E, Heading.W]
        assert all(a.agent_cell == env16.flatten(5, 5) for a in actions.actions)

    def test_radius_one_at_corner(self, env16, noise):
        actions = enumerate_action_set(0, 1, env16, noise)
        assert len(actions) == 16

    def test_position_major_order(self, env16, noise):
        actions = enumerate_action_set(env16.flatten(5, 5), 1, env16, noise)
        cells = [a.agent_cell for a in actions.actions]
        assert cells == sorted(cells)

    def test_padding_mask(self, env16, noise):
        actions = enumerate_action_set(0, 0, env16, noise)
        for i, action in enumerate(actions.actions):
            assert actions.mask[i].sum() == action.Q
            assert np.all(actions.precision[i][~actions.mask[i]] == 0)

    def test_catalog_matches_and_caches(self, env16, noise):
        catalog = ActionCatalog(env16, noise)
        a = catalog.around(env16.flatten(3, 3), 2)
        b = enumerate_action_set(env16.flatten(3, 3), 2, env16, noise)
        assert [x.to_record() for x in a.actions] == [x.to_record() for x in b.actions]
        assert catalog.around(env16.flatten(3, 3), 2) is a

    def test_travel_cost(self, env16):
        assert travel_cost(env16, env16.flatten(0, 0), env16.flatten(3, 4)) == pytest.approx(5.0)


class TestNatsReward:

    def test_matches_monte_carlo(self):
        rng = np.random.default_rng(0)
        within = 0
        for _ in range(25):
            size = int(rng.integers(2, 17))
            q = int(rng.integers(1, min(12, size) + 1))
            mu = rng.normal(0, 0.5, size)
            V = random_spd(rng, size)
            beta_tilde = rng.normal(0, 1, size)
            cells = tuple(int(c) for c in rng.choice(size, q, replace=False))
            sigma2 = rng.uniform(0.005, 0.2, q)
            candidate = SensingAction(0, Heading.N, cells, (1.0,) * q, tuple(sigma2))
            posterior = SBLPosterior(mu=mu, V=V, gamma=np.ones(size))

            idx = np.array(cells)
            K = V[:, idx] @ np.linalg.inv(V[np.ix_(idx, idx)] + np.diag(sigma2))
            y = beta_tilde[idx] + rng.normal(0, 1, (100_000, q)) * np.sqrt(sigma2)
            mu_next = mu + (y - mu[idx]) @ K.T
            errors = ((beta_tilde - mu_next) ** 2).sum(axis=1)

            reward = nats_reward(beta_tilde, posterior, candidate)
            se = errors.std() / np.sqrt(errors.size)
            within += abs(-reward - errors.mean()) <= 3 * se
        assert within >= 24

    def test_empty_candidate(self):
        posterior = SBLPosterior.prior(np.ones(3))
        beta_tilde = np.array([1.0, 0.0, 2.0])
        candidate = SensingAction(0, Heading.N)
        assert nats_reward(beta_tilde, posterior, candidate) == pytest.approx(-5.0)

    def test_certain_posterior_at_sample(self):
        mu = np.array([0.0, 1.0])
        posterior = SBLPosterior(mu=mu, V=np.zeros((2, 2)), gamma=np.ones(2))
        candidate = SensingAction(0, Heading.N, (0, 1), (1.0, 1.0), (0.01, 0.01))
        assert nats_reward(mu, posterior, candidate) == pytest.approx(0.0, abs=1e-12)

    def test_diagonal_batch_matches_dense(self, env16, noise, rng):
        catalog = ActionCatalog(env16, noise)
        actions = catalog.around(env16.flatten(4, 4), 2)
        measurements = [
            Measurement(a, rng.uniform(0, 1, a.Q), 0, 0.0, 1.0, uid)
            for uid, a in enumerate(actions.actions[:10])
        ]
        posterior = compute_posterior(measurements, rng.uniform(0.1, 1.0, env16.size))
        beta_tilde = rng.normal(0, 1, env16.size)
        batch = candidate_rewards(beta_tilde, posterior, actions)
        dense = [nats_reward(beta_tilde, posterior, a) for a in actions.actions]
        np.testing.assert_allclose(batch, dense, rtol=1e-9, atol=1e-9)

    def test_non_diagonal_path(self, rng):
        env = GridEnvironment(4, 4)
        noise = DepthNoiseModel()
        actions = enumerate_action_set(5, 1, env, noise)
        posterior = SBLPosterior(mu=np.zeros(16), V=random_spd(rng, 16), gamma=np.ones(16))
        beta_tilde = rng.normal(0, 1, 16)
        batch = candidate_rewards(beta_tilde, posterior, actions)
        assert batch.shape == (len(actions),)
        assert batch[0] == pytest.approx(nats_reward(beta_tilde, posterior, actions.actions[0]))


class TestNatsSelect:

    def test_ties_go_to_first(self, env16, noise, rng):
        actions = enumerate_action_set(0, 1, env16, noise)
        posterior = SBLPosterior(mu=np.zeros(256), V=np.zeros((256, 256)), gamma=np.ones(256))
        action, _ = nats_select(posterior, actions, 0, 0.0, rng, env16, beta_tilde=np.zeros(256))
        assert action is actions.actions[0]

    def test_prefers_sampled_object(self, env16, noise, rng):
        actions = enumerate_action_set(0, None, env16, noise)
        posterior = SBLPosterior.prior(np.ones(256))
        beta_tilde = np.zeros(256)
        beta_tilde[env16.flatten(10, 10)] = 1.0
        action, _ = nats_select(posterior, actions, 0, 0.0, rng, env16, beta_tilde=beta_tilde)
        assert env16.flatten(10, 10) in action.cells

    def test_travel_penalty_keeps_agent_close(self, env16, noise, rng):
        actions = enumerate_action_set(0, None, env16, noise)
        posterior = SBLPosterior.prior(np.ones(256))
        start = env16.flatten(8, 8)
        action, _ = nats_select(posterior, actions, start, 1e6, rng, env16)
        assert action.agent_cell == start

    def test_empty_action_set(self, env16, rng):
        with pytest.raises(ValueError):
            nats_select(SBLPosterior.prior(np.ones(256)), ActionSet.from_actions([]), 0, 0.0, rng, env16)

    def test_symmetric_targets_both_get_picked(self, env16, noise):
        a, b = env16.flatten(3, 3), env16.flatten(12, 12)
        mu = np.zeros(256)
        variance = np.full(256, 1e-6)
        mu[[a, b]] = 0.5
        variance[[a, b]] = 0.25
        posterior = SBLPosterior(mu=mu, V=np.diag(variance), gamma=np.ones(256))
        actions = enumerate_action_set(0, None, env16, noise)
        rng = np.random.default_rng(21)

        picks = [nats_select(posterior, actions, 0, 0.0, rng, env16)[0] for _ in range(100)]
        assert sum(a in p.cells for p in picks) >= 10
        assert sum(b in p.cells for p in picks) >= 10

    @pytest.mark.parametrize("alpha", [0.0, 0.5])
    def test_constant_reward_shift_keeps_choice(self, env16, noise, rng, alpha):
        actions = enumerate_action_set(0, 1, env16, noise)
        far = env16.flatten(15, 15)
        assert not any(far in action.cells for action in actions.actions)
        posterior = SBLPosterior.prior(np.ones(256))
        beta_tilde = rng.normal(0, 1, 256)
        shifted = beta_tilde.copy()
        shifted[far] += 3.0

        first, score = nats_select(posterior, actions, 0, alpha, rng, env16, beta_tilde=beta_tilde)
        second, shifted_score = nats_select(posterior, actions, 0, alpha, rng, env16, beta_tilde=shifted)
        assert second is first
        assert score - shifted_score == pytest.approx(shifted[far] ** 2 - beta_tilde[far] ** 2)


class TestInformationGain:

    def test_diagonal_matches_dense(self, env16, noise, rng):
        actions = enumerate_action_set(env16.flatten(8, 8), 1, env16, noise)
        posterior = SBLPosterior.prior(rng.uniform(0.1, 2.0, 256))
        gains = information_gains(posterior, actions)
        np.testing.assert_allclose(gains, [information_gain(posterior, a) for a in actions.actions])

    def test_deterministic(self, env16, noise):
        actions = enumerate_action_set(env16.flatten(8, 8), 2, env16, noise)
        posterior = SBLPosterior.prior(np.ones(256))
        assert ig_select(posterior, actions)[0] is ig_select(posterior, actions)[0]

    def test_avoids_explored_cells(self, env16, noise, rng):
        catalog = ActionCatalog(env16, noise)
        seen = catalog.action(env16.flatten(8, 8), Heading.N)
        measurements = [Measurement(seen, np.zeros(seen.Q), 0, 0.0, 1.0, uid) for uid in range(20)]
        posterior = compute_posterior(measurements, np.ones(256))
        action, _ = ig_select(posterior, catalog.around(env16.flatten(8, 8), 0))
        assert action.heading != Heading.N

    def test_empty_candidate_zero(self):
        assert information_gain(SBLPosterior.prior(np.ones(2)), SensingAction(0, Heading.N)) == 0.0

    def test_prefers_low_variance_candidate(self):
        cells = tuple(range(12))
        noisy = SensingAction(20, Heading.N, cells, (3.0,) * 12, (0.045,) * 12)
        sharp = SensingAction(20, Heading.S, cells, (1.0,) * 12, (0.005,) * 12)
        posterior = SBLPosterior.prior(np.ones(32))
        action, gain = ig_select(posterior, ActionSet.from_actions([noisy, sharp]))
        assert action is sharp
        assert gain == pytest.approx(6.0 * np.log(201.0))

    def test_identical_beliefs_give_identical_picks(self, env16, noise, rng):
        catalog = ActionCatalog(env16, noise)
        seen = catalog.action(env16.flatten(8, 8), Heading.N)
        measurements = [Measurement(seen, rng.uniform(0, 0.2, seen.Q), 0, 0.0, 1.0, 0)]
        posterior = compute_posterior(measurements, np.ones(256))
        policy = make_policy("ig", env16, noise)

        picks = [
            policy.select(DecisionContext(j, 2, env16.flatten(2 * j, 5 * j), measurements, posterior,
                                          catalog, np.random.default_rng(j)))[0]
            for j in range(2)
        ]
        assert picks[0] is picks[1]


class TestBinaryTS:

    def test_zero_rate_beliefs(self):
        np.testing.assert_array_equal(bints_beliefs([], 8, 0.0), 0.0)

    def test_prior_rate(self):
        np.testing.assert_allclose(bints_beliefs([], 8, 0.25), 0.25)

    def test_readings_move_beliefs(self):
        action = SensingAction(0, Heading.N, (1, 2), (1.0, 1.0), (0.005, 0.005))
        m = Measurement(action, np.array([1.0, 0.0]), 0, 0.0, 1.0)
        beliefs = bints_beliefs([m], 4, 0.25)
        assert beliefs[1] > 0.99
        assert beliefs[2] < 0.01
        assert beliefs[0] == pytest.approx(0.25)

    def test_all_zero_beliefs_tie(self, env16, noise, rng):
        actions = enumerate_action_set(0, 1, env16, noise)
        action, reward = bints_select(np.zeros(256), actions, rng)
        assert action is actions.actions[0]
        assert reward == 0.0

    def test_certain_object_is_targeted(self, env16, noise, rng):
        beliefs = np.zeros(256)
        beliefs[env16.flatten(3, 3)] = 0.5
        actions = enumerate_action_set(0, None, env16, noise)
        picks = [bints_select(beliefs, actions, rng)[0] for _ in range(20)]
        assert any(env16.flatten(3, 3) in a.cells for a in picks)


class TestRandomAndPoint:

    def test_rnd_roughly_uniform(self, env16, noise):
        actions = enumerate_action_set(0, 0, env16, noise)
        rng = np.random.default_rng(9)
        counts = np.zeros(4)
        for _ in range(4000):
            action, _ = rnd_select(actions, rng)
            counts[actions.actions.index(action)] += 1
        assert np.all(np.abs(counts - 1000) < 150)

    def test_point_interleaves_agents(self, env16, noise):
        sweep = PointSweep(agent_id=1, n_agents=4)
        cells = [point_next(sweep, env16, noise).cells[0] for _ in range(3)]
        assert cells == [1, 5, 9]

    def test_point_team_covers_grid(self, env16, noise):
        sweeps = [PointSweep(j, 4) for j in range(4)]
        seen = [point_next(s, env16, noise).cells[0] for _ in range(64) for s in sweeps]
        assert sorted(seen) == list(range(256))

    def test_point_uses_nearest_depth(self, env16, noise):
        action = point_next(PointSweep(0, 1), env16, noise)
        assert action.Q == 1
        assert action.variances == (0.005,)
        assert action.agent_cell == action.cells[0]


class TestPolicyRegistry:

    def test_case_insensitive(self, env16, noise):
        assert make_policy("NATS", env16, noise).name == "nats"

    def test_unknown(self, env16, noise):
        with pytest.raises(ValueError):
            make_policy("greedy", env16, noise)

    def test_point_policy_keeps_per_agent_cursor(self, env16, noise, rng):
        policy = make_policy("point", env16, noise)
        catalog = ActionCatalog(env16, noise)

        def pick(agent_id):
            context = DecisionContext(agent_id, 2, 0, [], None, catalog, rng)
            return policy.select(context)[0].cells[0]

        assert [pick(0), pick(1), pick(0), pick(1)] == [0, 1, 2, 3]
