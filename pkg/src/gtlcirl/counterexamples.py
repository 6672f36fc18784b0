"""Counterexample synthesis and counterfactual rollouts.

A counterexample is any trajectory that violates the effect formula.
Episode traces that violate it are stored directly; around each such
violation the synthesizer perturbs individual state variables of the
initial state by +/- epsilon, replays the episode under the frozen first
action, and keeps candidates that satisfy the cause while still breaking
the effect.  Counterfactual rollouts replay a stored trace while forcing
the cause condition true or false through the environment's do-operator
hook.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from . import instrumentation
from .causal import CausalSpec
from .graphs import GraphTrajectory
from .robustness import any_node_robustness, any_node_sign
from .environments.base import Environment


class BufferViolationError(ValueError):
    """Raised when a trace that satisfies the effect is inserted."""


class CounterexampleBuffer:
    """Bounded FIFO of effect-violating trajectories with provenance tags."""

    PROVENANCES = ("episode-violation", "perturbation-synthesized")

    def __init__(self, capacity: int = 256) -> None:
        if capacity < 1:
            raise ValueError("buffer capacity must be >= 1")
        self.capacity = capacity
        self._traces: deque[GraphTrajectory] = deque(maxlen=capacity)
        self.total_added = 0
        instrumentation.increment("counterexample_buffers")

    def add(self, trace: GraphTrajectory, provenance: str, spec: CausalSpec) -> None:
        """Insert a trace; every stored trace must violate the effect."""
        if provenance not in self.PROVENANCES:
            raise ValueError(f"unknown provenance {provenance!r}")
        if any_node_sign(trace, spec.effect, 0) > 0:
            raise BufferViolationError("trace satisfies the effect formula")
        trace.meta["provenance"] = provenance
        self._traces.append(trace)  # oldest-first eviction via maxlen
        self.total_added += 1

    def __len__(self) -> int:
        return len(self._traces)

    def __getitem__(self, index: int) -> GraphTrajectory:
        return self._traces[index]

    def __iter__(self):
        return iter(self._traces)


def is_valid_counterexample(traj: GraphTrajectory, spec: CausalSpec) -> bool:
    """True iff the cause margin is strictly positive and the effect
    margin is non-positive."""
    if any_node_sign(traj, spec.effect, 0) > 0:
        return False
    return any_node_sign(traj, spec.cause, 0) > 0


def generate_counterexamples(
    env: Environment,
    snapshot: dict[int, dict[str, float]],
    action: int,
    spec: CausalSpec,
    epsilon: float | None = None,
) -> list[GraphTrajectory]:
    """Perturbation-based candidate synthesis around an effect violation.

    Only runs when the environment's current trajectory violates the
    effect.  For every perturbable variable and offset in {-eps, +eps},
    the initial snapshot is perturbed, the episode is re-simulated under
    the frozen ``action``, and valid counterexamples are returned.  With
    d perturbable variables exactly 2d rollouts are attempted.
    """
    base = env.trajectory()
    if any_node_sign(base, spec.effect, 0) > 0:
        return []
    candidates: list[GraphTrajectory] = []
    for variable in env.perturbable_variables:
        eps = epsilon if epsilon is not None else variable.epsilon
        for delta in (-eps, eps):
            sim = env.clone()
            sim.reset_from(snapshot)
            current = snapshot[variable.node][variable.feature]
            forced = min(max(current + delta, variable.low), variable.high)
            sim.force(variable.node, variable.feature, forced)
            for _ in range(env.episode_length):
                sim.step(action)
            candidate = sim.trajectory()
            candidate.meta["perturbed"] = f"{variable.node}:{variable.feature}:{delta:+g}"
            if is_valid_counterexample(candidate, spec):
                candidates.append(candidate)
    return candidates


def generate_counterfactual(
    env: Environment,
    base: GraphTrajectory,
    spec: CausalSpec,
    negate: bool,
    rng: np.random.Generator,
) -> GraphTrajectory:
    """Replay ``base`` from its initial state under an intervention that
    forces the cause to hold (or fail), letting everything else evolve
    through the normal dynamics."""
    plan = env.plan_interventions(spec.cause, negate, base, rng)
    sim = env.clone()
    sim.reset_from(base.snapshot(0))
    for node, feature, value in plan.forced.get(0, []):
        sim.force(node, feature, value)
    actions = base.meta.get("actions", ())
    for t in range(env.episode_length):
        action = int(actions[t]) if t < len(actions) else 0
        if plan.action_filter is not None:
            action = plan.action_filter(t, action)
        sim.step(action)
        for node, feature, value in plan.forced.get(t + 1, []):
            sim.force(node, feature, value)
    result = sim.trajectory()
    result.meta["provenance"] = "counterfactual"
    result.meta["negate"] = str(negate)
    return result


def counterfactual_cause_margin(traj: GraphTrajectory, spec: CausalSpec) -> float:
    """Cause robustness of a counterfactual at the episode start."""
    return any_node_robustness(traj, spec.cause, 0)
