"""A minimal scripted environment for exercising the causal machinery."""

from __future__ import annotations

import numpy as np

from gtlcirl.environments.base import Environment, InterventionPlan, PerturbableVariable
from gtlcirl.graphs import Graph, GraphTrajectory


class StubEnv(Environment):
    """One node, two features.

    ``c`` is inert unless forced; ``e`` rises to ``e_high`` one step after
    ``c`` reaches 1.0 and sits at ``e_low`` otherwise.  The intervention
    plan forces ``c`` to ``enforce_value`` or ``negate_value`` at t = 0.
    """

    def __init__(
        self,
        episode_length: int = 3,
        enforce_value: float = 1.5,
        negate_value: float = -0.5,
        e_high: float = 1.3,
        e_low: float = 0.5,
    ) -> None:
        self.graph = Graph((0,), ())
        self.action_count = 1
        self.episode_length = episode_length
        self.enforce_value = enforce_value
        self.negate_value = negate_value
        self.e_high = e_high
        self.e_low = e_low
        self._c = 0.0
        self._e = e_low
        self._hist: list[tuple[float, float]] = []
        self._actions: list[int] = []

    @property
    def action_labels(self):
        return ("NoOp",)

    def reset(self, seed: int):
        self._c, self._e = 0.0, self.e_low
        self._hist = [(self._c, self._e)]
        self._actions = []
        return self.current_snapshot()

    def reset_from(self, snapshot):
        self._c = snapshot[0]["c"]
        self._e = snapshot[0]["e"]
        self._hist = [(self._c, self._e)]
        self._actions = []
        return self.current_snapshot()

    def step(self, action: int):
        self._actions.append(action)
        self._e = self.e_high if self._c >= 1.0 else self.e_low
        self._hist.append((self._c, self._e))
        return self.current_snapshot()

    def clone(self):
        other = StubEnv(
            self.episode_length, self.enforce_value, self.negate_value,
            self.e_high, self.e_low,
        )
        other._c, other._e = self._c, self._e
        other._hist = list(self._hist)
        other._actions = list(self._actions)
        return other

    def force(self, node, feature, value):
        if feature == "c":
            self._c = value
        elif feature == "e":
            self._e = value
        else:
            raise ValueError(feature)
        self._hist[-1] = (self._c, self._e)

    def current_snapshot(self):
        return {0: {"c": self._c, "e": self._e}}

    def trajectory(self):
        return GraphTrajectory(
            self.graph,
            {0: {"c": [c for c, _ in self._hist], "e": [e for _, e in self._hist]}},
            meta={"actions": tuple(self._actions)},
        )

    def raw_reward(self):
        return self._e

    def episode_success(self):
        return self._e >= 1.0

    @property
    def perturbable_variables(self):
        return (PerturbableVariable(0, "c", 0.5, -2.0, 2.0),)

    def plan_interventions(self, cause, negate, base, rng):
        value = self.negate_value if negate else self.enforce_value
        return InterventionPlan(forced={0: [(0, "c", value)]})


class AlwaysSucceedsEnv(StubEnv):
    """Effect holds from the start; never produces counterexamples."""

    def __init__(self, episode_length: int = 3) -> None:
        super().__init__(episode_length=episode_length, e_low=1.5)


def make_buffer_trace(env: StubEnv, steps: int | None = None) -> GraphTrajectory:
    env.reset(0)
    for _ in range(steps if steps is not None else env.episode_length):
        env.step(0)
    return env.trajectory()
