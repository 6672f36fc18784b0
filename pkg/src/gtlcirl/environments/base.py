"""Uniform simulator interface consumed by the learning and mining loops.

Environments are discrete-time, deterministic given (state, action), and
seeded only through ``reset``.  They support cloning (clones never share
state with the original), a ``force`` hook that overrides state variables
in place (the do-operator), and replay from an initial snapshot, which is
what counterfactual generation builds on.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..formulas import Formula
from ..graphs import Graph, GraphTrajectory

Snapshot = dict[int, dict[str, float]]


@dataclass(frozen=True)
class PerturbableVariable:
    """A state variable eligible for boundary perturbation."""

    node: int
    feature: str
    epsilon: float
    low: float
    high: float


@dataclass
class InterventionPlan:
    """Forced assignments per time step plus an optional action rewrite.

    ``forced[t]`` lists (node, feature, value) triples applied to the
    snapshot at time ``t`` before the next transition; ``action_filter``
    maps (step, replayed action) to the action actually executed.
    """

    forced: dict[int, list[tuple[int, str, float]]] = field(default_factory=dict)
    action_filter: Callable[[int, int], int] | None = None


class UnforceableCauseError(RuntimeError):
    """The environment has no variable mapping for this cause formula."""


class Environment(ABC):
    """Contract shared by the built-in simulators."""

    graph: Graph
    action_count: int
    episode_length: int

    @abstractmethod
    def reset(self, seed: int) -> Snapshot:
        """Start a new episode; randomness is fully determined by ``seed``."""

    @abstractmethod
    def reset_from(self, snapshot: Snapshot) -> Snapshot:
        """Start an episode from an explicit initial snapshot (t = 0)."""

    @abstractmethod
    def step(self, action: int) -> Snapshot:
        """Apply an action and advance one step."""

    @abstractmethod
    def clone(self) -> "Environment":
        """Independent copy with identical state; stepping the clone never
        mutates the original."""

    @abstractmethod
    def force(self, node: int, feature: str, value: float) -> None:
        """Override a state variable in the current snapshot (do-operator)."""

    @abstractmethod
    def trajectory(self) -> GraphTrajectory:
        """The episode recorded so far as a graph-temporal trajectory."""

    @abstractmethod
    def raw_reward(self) -> float:
        """Task reward of the current state, used by baseline training."""

    @abstractmethod
    def episode_success(self) -> bool:
        """Ground-truth success indicator for the completed episode."""

    @property
    @abstractmethod
    def perturbable_variables(self) -> tuple[PerturbableVariable, ...]:
        """Variables the counterexample synthesizer may perturb."""

    @abstractmethod
    def plan_interventions(
        self,
        cause: Formula,
        negate: bool,
        base: GraphTrajectory,
        rng: np.random.Generator,
    ) -> InterventionPlan:
        """Minimal forcing plan that makes the cause hold (or fail)."""

    @property
    @abstractmethod
    def action_labels(self) -> tuple[str, ...]:
        """Human-readable action names, index-aligned with action ids."""
