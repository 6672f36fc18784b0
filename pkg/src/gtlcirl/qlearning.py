"""Tabular Q-learning over sliding-window states with robustness rewards.

States are windows of the last tau observations (tau = look-ahead of the
reward formula plus one), keyed by a canonical discretization: real
features quantize to two decimals so continuous voltages produce finite
table keys.  Rewards exponentiate the robustness of the reward formula
over the window: eventually-shaped specifications reward high margins,
always-shaped ones penalize low margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable

import numpy as np

from .causal import CausalSpec
from .formulas import Always, Eventually, Formula
from .graphs import Graph, GraphTrajectory
from .robustness import any_node_robustness, any_node_sign
from .environments.base import Environment, Snapshot


@dataclass(frozen=True)
class RlConfig:
    alpha: float = 0.1
    gamma: float = 0.95
    beta: float = 2.0
    epsilon_start: float = 1.0
    epsilon_decay: float = 0.995
    epsilon_floor: float = 0.05
    episodes: int = 300
    horizon: int = 16
    alpha_schedule: str = "fixed"  # or "visits": alpha_k = 1 / (1 + visits)

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0 <= self.gamma < 1:
            raise ValueError("gamma must lie in [0, 1)")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if not 0 < self.epsilon_decay <= 1:
            raise ValueError("epsilon decay must lie in (0, 1]")
        if self.alpha_schedule not in ("fixed", "visits"):
            raise ValueError("alpha_schedule must be 'fixed' or 'visits'")

    def epsilon_at(self, episode: int) -> float:
        return max(self.epsilon_floor, self.epsilon_start * self.epsilon_decay**episode)


def _quantize(value: float) -> float:
    q = round(float(value), 2)
    return 0.0 if q == 0 else q


class TauState:
    """Immutable sliding window of observations.

    Before tau observations exist the window is left-padded with the
    initial observation, so rewards are defined from the first step.
    """

    __slots__ = ("tau", "_window", "_key")

    def __init__(self, tau: int, window: tuple[Snapshot, ...]) -> None:
        if tau < 1:
            raise ValueError("window length must be >= 1")
        if len(window) != tau:
            raise ValueError("window must hold exactly tau observations")
        self.tau = tau
        self._window = window
        self._key = tuple(
            tuple(
                (node, tuple((f, _quantize(rec[f])) for f in sorted(rec)))
                for node, rec in sorted(obs.items())
            )
            for obs in window
        )

    @classmethod
    def initial(cls, tau: int, observation: Snapshot) -> "TauState":
        return cls(tau, tuple(observation for _ in range(tau)))

    def push(self, observation: Snapshot) -> "TauState":
        return TauState(self.tau, self._window[1:] + (observation,))

    @property
    def window(self) -> tuple[Snapshot, ...]:
        return self._window

    def key(self) -> Hashable:
        return self._key

    def key_string(self) -> str:
        steps = []
        for obs in self._window:
            nodes = []
            for node, rec in sorted(obs.items()):
                feats = ",".join(f"{f}={_quantize(rec[f]):.2f}" for f in sorted(rec))
                nodes.append(f"{node}:{feats}")
            steps.append(";".join(nodes))
        return "||".join(steps)

    def as_trajectory(self, graph: Graph) -> GraphTrajectory:
        node_labels = {
            node: {
                feature: [obs[node][feature] for obs in self._window]
                for feature in self._window[0][node]
            }
            for node in graph.nodes
        }
        return GraphTrajectory(graph, node_labels)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TauState) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)


@dataclass
class QTable:
    """State-action values with 0.0 defaults and visit counts."""

    action_count: int
    values: dict[tuple[Hashable, int], float] = field(default_factory=dict)
    visits: dict[tuple[Hashable, int], int] = field(default_factory=dict)
    update_count: int = 0

    def get(self, state: Hashable, action: int) -> float:
        return self.values.get((_state_key(state), action), 0.0)

    def set(self, state: Hashable, action: int, value: float) -> None:
        self.values[(_state_key(state), action)] = value

    def max_value(self, state: Hashable) -> float:
        key = _state_key(state)
        return max(self.values.get((key, a), 0.0) for a in range(self.action_count))

    def best_action(self, state: Hashable) -> int:
        key = _state_key(state)
        best, best_value = 0, -math.inf
        for a in range(self.action_count):
            value = self.values.get((key, a), 0.0)
            if value > best_value:  # ties resolve to the lowest action id
                best, best_value = a, value
        return best

    def visit(self, state: Hashable, action: int) -> int:
        key = (_state_key(state), action)
        self.visits[key] = self.visits.get(key, 0) + 1
        return self.visits[key]

    def checkpoint_lines(self) -> list[str]:
        lines = []
        for (state, action), value in self.values.items():
            key = state if isinstance(state, str) else repr(state)
            lines.append(f"{key} {action} {value:.6f}")
        return sorted(lines)


def _state_key(state: Hashable) -> Hashable:
    return state.key_string() if isinstance(state, TauState) else state


def reward_mode(effect: Formula) -> str:
    """Reward branch chosen from the root operator of the effect."""
    if isinstance(effect, Always):
        return "always"
    if isinstance(effect, Eventually):
        return "eventually"
    return "eventually"


def reward_formula(effect: Formula) -> Formula:
    """The formula scored per step: the body under the root window."""
    if isinstance(effect, (Always, Eventually)):
        return effect.inner
    return effect


def robustness_reward(
    window: TauState,
    phi: Formula,
    mode: str,
    beta: float,
    graph: Graph,
) -> float:
    """exp(beta * rho) for eventually-shaped specs, -exp(-beta * rho) for
    always-shaped ones, with rho the robustness of ``phi`` over the window
    viewed as a trajectory starting at its first element."""
    traj = window.as_trajectory(graph)
    rho = any_node_robustness(traj, phi, 0)
    if mode == "eventually":
        return math.exp(beta * rho)
    if mode == "always":
        return -math.exp(-beta * rho)
    raise ValueError(f"unknown reward mode {mode!r}")


def q_update(
    table: QTable,
    state: Hashable,
    action: int,
    reward: float,
    next_state: Hashable,
    cfg: RlConfig,
) -> float:
    """One temporal-difference backup; returns the new value."""
    if cfg.alpha_schedule == "visits":
        alpha = 1.0 / (1.0 + table.visit(state, action))
    else:
        alpha = cfg.alpha
    old = table.get(state, action)
    target = reward + cfg.gamma * table.max_value(next_state)
    new = old + alpha * (target - old)
    table.set(state, action, new)
    table.update_count += 1
    return new


def select_action(
    table: QTable,
    state: Hashable,
    epsilon: float,
    rng: np.random.Generator,
) -> int:
    """Epsilon-greedy: uniform with probability epsilon, else the greedy
    action with ties broken by lowest action id."""
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    if rng.random() < epsilon:
        return int(rng.integers(0, table.action_count))
    return table.best_action(state)


@dataclass
class EpisodeResult:
    trace: GraphTrajectory
    counterexample: bool
    cumulative_reward: float
    effect_robustness: float
    cause_robustness: float


def run_episode(
    env: Environment,
    table: QTable,
    spec: CausalSpec,
    cfg: RlConfig,
    rng: np.random.Generator,
    epsilon: float | None = None,
) -> EpisodeResult:
    """One training episode against the effect-shaped reward.

    The environment is reset with a seed drawn from ``rng``, the policy
    acts epsilon-greedily for the configured horizon, and the finished
    trace is flagged as a counterexample when its effect margin is
    non-positive.  Cause robustness is evaluated for logging only; it
    never contributes to the reward.
    """
    eps = cfg.epsilon_at(0) if epsilon is None else epsilon
    phi = reward_formula(spec.effect)
    mode = reward_mode(spec.effect)
    from .formulas import horizon as formula_horizon

    tau = formula_horizon(phi) + 1
    observation = env.reset(int(rng.integers(0, 2**31 - 1)))
    state = TauState.initial(tau, observation)
    total = 0.0
    for _ in range(cfg.horizon):
        action = select_action(table, state, eps, rng)
        observation = env.step(action)
        next_state = state.push(observation)
        reward = robustness_reward(next_state, phi, mode, cfg.beta, env.graph)
        q_update(table, state, action, reward, next_state, cfg)
        total += reward
        state = next_state
    trace = env.trajectory()
    effect_rho = any_node_robustness(trace, spec.effect, 0)
    cause_rho = (
        any_node_robustness(trace, spec.cause, 0)
        if formula_horizon(spec.cause) <= trace.horizon
        else math.nan
    )
    return EpisodeResult(
        trace=trace,
        counterexample=effect_rho <= 0,
        cumulative_reward=total,
        effect_robustness=effect_rho,
        cause_robustness=cause_rho,
    )
