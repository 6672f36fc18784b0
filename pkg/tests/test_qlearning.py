"""Reward shaping, temporal-difference updates, and action selection."""

import math

import numpy as np
import pytest

from gtlcirl.causal import CausalSpec
from gtlcirl.environments import GeneNetworkEnv
from gtlcirl.graphs import Graph
from gtlcirl.parsing import parse_formula
from gtlcirl.qlearning import (
    QTable,
    RlConfig,
    TauState,
    q_update,
    reward_formula,
    reward_mode,
    robustness_reward,
    run_episode,
    select_action,
)

from oracles import value_iteration

_GRAPH = Graph((0,), ())


def _window(values, tau=1):
    snapshots = tuple({0: {"x": v}} for v in values)
    return TauState(tau, snapshots)


class TestRewards:
    def test_zero_margin_eventually(self):
        window = _window([0.0])
        phi = parse_formula("(x >= 0.0)")
        assert robustness_reward(window, phi, "eventually", 1.0, _GRAPH) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_zero_margin_always(self):
        window = _window([0.0])
        phi = parse_formula("(x >= 0.0)")
        assert robustness_reward(window, phi, "always", 1.0, _GRAPH) == pytest.approx(
            -1.0, abs=1e-12
        )

    def test_half_margin_beta_two(self):
        window = _window([0.5])
        phi = parse_formula("(x >= 0.0)")
        assert robustness_reward(window, phi, "eventually", 2.0, _GRAPH) == pytest.approx(
            math.e, abs=1e-12
        )

    def test_mode_from_root_operator(self):
        assert reward_mode(parse_formula("F[0,3](x >= 0.0)")) == "eventually"
        assert reward_mode(parse_formula("G[0,3](x >= 0.0)")) == "always"
        assert reward_formula(parse_formula("F[0,3](x >= 0.0)")) == parse_formula("(x >= 0.0)")

    def test_window_shorter_than_formula_rejected(self):
        window = _window([0.0, 0.1], tau=2)
        phi = parse_formula("F[0,3](x >= 0.0)")
        with pytest.raises(Exception):
            robustness_reward(window, phi, "eventually", 1.0, _GRAPH)


class TestTauState:
    def test_initial_padding(self):
        state = TauState.initial(3, {0: {"x": 1.0}})
        assert len(state.window) == 3
        assert all(obs == {0: {"x": 1.0}} for obs in state.window)

    def test_push_slides_window(self):
        state = TauState.initial(2, {0: {"x": 1.0}})
        state = state.push({0: {"x": 2.0}})
        assert [obs[0]["x"] for obs in state.window] == [1.0, 2.0]

    def test_keys_quantize_to_two_decimals(self):
        a = TauState.initial(1, {0: {"x": 0.12349}})
        b = TauState.initial(1, {0: {"x": 0.1201}})
        assert a.key() == b.key()
        assert a == b

    def test_negative_zero_normalizes(self):
        a = TauState.initial(1, {0: {"x": -0.001}})
        b = TauState.initial(1, {0: {"x": 0.0}})
        assert a.key_string() == b.key_string()


class TestQUpdate:
    def test_single_update_from_zero(self):
        table = QTable(2)
        cfg = RlConfig(alpha=0.5, gamma=0.9)
        value = q_update(table, "s", 0, 1.0, "s2", cfg)
        assert value == pytest.approx(0.5, abs=1e-12)

    def test_full_replacement(self):
        table = QTable(2)
        table.set("s", 0, 123.0)
        cfg = RlConfig(alpha=1.0, gamma=0.0)
        value = q_update(table, "s", 0, 2.0, "s2", cfg)
        assert value == pytest.approx(2.0, abs=1e-12)

    def test_bounded_by_reward_scale(self):
        rng = np.random.default_rng(0)
        cfg = RlConfig(alpha=0.3, gamma=0.9)
        table = QTable(3)
        r_max = 2.0
        states = [f"s{i}" for i in range(5)]
        for _ in range(5000):
            s = states[int(rng.integers(5))]
            s2 = states[int(rng.integers(5))]
            r = float(rng.uniform(-r_max, r_max))
            q_update(table, s, int(rng.integers(3)), r, s2, cfg)
        bound = r_max / (1 - cfg.gamma) + 1e-9
        assert all(abs(v) <= bound for v in table.values.values())

    def test_visit_schedule_is_robbins_monro(self):
        table = QTable(1)
        cfg = RlConfig(alpha_schedule="visits", gamma=0.0)
        q_update(table, "s", 0, 1.0, "s", cfg)  # alpha = 1/2
        assert table.get("s", 0) == pytest.approx(0.5)
        q_update(table, "s", 0, 1.0, "s", cfg)  # alpha = 1/3
        assert table.get("s", 0) == pytest.approx(0.5 + (1 - 0.5) / 3)


class TestSelectAction:
    def test_greedy_argmax(self):
        table = QTable(3)
        table.set("s", 0, 0.0)
        table.set("s", 1, 3.0)
        table.set("s", 2, 1.0)
        assert select_action(table, "s", 0.0, np.random.default_rng(0)) == 1

    def test_tie_breaks_to_lowest_id(self):
        table = QTable(3)
        assert select_action(table, "s", 0.0, np.random.default_rng(0)) == 0

    def test_uniform_at_epsilon_one(self):
        """Chi-square check of uniformity over 10^4 fully random draws."""
        table = QTable(3)
        rng = np.random.default_rng(7)
        counts = np.zeros(3)
        n = 10_000
        for _ in range(n):
            counts[select_action(table, "s", 1.0, rng)] += 1
        expected = n / 3
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        # 2 degrees of freedom; 3 sigma roughly corresponds to chi2 < 16
        assert chi2 < 16.0


class TestConvergence:
    def _chain_mdp(self):
        # 5-state chain: action 1 moves right, action 0 moves left;
        # reaching the right end pays 1 and resets to the start.
        def transition(s, a):
            if s == 4:
                return 0
            return min(s + 1, 4) if a == 1 else max(s - 1, 0)

        def reward(s, a, s2):
            return 1.0 if s2 == 4 else 0.0

        return transition, reward

    def test_q_converges_to_value_iteration_fixed_point(self):
        # The 1/(1+visits) rate washes out early bootstrap error like
        # n^-(1-gamma), so the surrogate MDP uses a small discount.
        transition, reward = self._chain_mdp()
        gamma = 0.3
        q_star = value_iteration(5, 2, transition, reward, gamma)
        cfg = RlConfig(alpha_schedule="visits", gamma=gamma)
        table = QTable(2)
        rng = np.random.default_rng(13)
        episodes = 0
        for episode in range(10_000):
            s = 0
            for _ in range(20):
                a = int(rng.integers(2))  # uniform exploration
                s2 = transition(s, a)
                q_update(table, s, a, reward(s, a, s2), s2, cfg)
                s = s2
            episodes = episode + 1
            error = max(
                abs(table.get(s, a) - q_star[s, a]) for s in range(5) for a in range(2)
            )
            if error < 1e-3:
                break
        assert error < 1e-3
        assert episodes <= 10_000

    def test_greedy_policy_invariant_under_reward_scaling(self):
        transition, reward = self._chain_mdp()
        gamma = 0.9
        policies = []
        for scale in (1.0, 10.0):
            cfg = RlConfig(alpha_schedule="visits", gamma=gamma)
            table = QTable(2)
            rng = np.random.default_rng(29)
            for _ in range(3000):
                s = 0
                for _ in range(20):
                    a = int(rng.integers(2))
                    s2 = transition(s, a)
                    q_update(table, s, a, scale * reward(s, a, s2), s2, cfg)
                    s = s2
            policies.append(tuple(table.best_action(s) for s in range(5)))
        assert policies[0] == policies[1]


class TestRunEpisode:
    def _spec(self):
        cause = parse_formula("F[0,3](ModifyG1 >= 0.5)")
        effect = parse_formula("F[12,15](DiseaseProgression < 0.25)")
        return CausalSpec(cause, effect)

    def test_deterministic_replay(self):
        spec = self._spec()
        cfg = RlConfig(horizon=16)
        results = []
        for _ in range(2):
            env = GeneNetworkEnv(topology_seed=3)
            table = QTable(env.action_count)
            rng = np.random.default_rng(99)
            results.append(run_episode(env, table, spec, cfg, rng, epsilon=0.7))
        a, b = results
        assert a.trace.to_text() == b.trace.to_text()
        assert a.cumulative_reward == b.cumulative_reward
        assert a.effect_robustness == b.effect_robustness

    def test_counterexample_flag_matches_effect_sign(self):
        spec = self._spec()
        cfg = RlConfig(horizon=16)
        env = GeneNetworkEnv(topology_seed=3)
        table = QTable(env.action_count)
        result = run_episode(env, table, spec, cfg, np.random.default_rng(1), epsilon=1.0)
        assert result.counterexample == (result.effect_robustness <= 0)
