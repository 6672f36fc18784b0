"""Causal specifications: parameterized cause templates and their scoring.

A causal specification pairs an interventional cause formula with an
effect formula.  Cause templates carry continuous parameter slots
(thresholds or window positions); sufficiency, necessity, and existence
degrees score a candidate instantiation against trajectory data, and the
counterfactual scorer drives the refinement objective.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from . import instrumentation
from .formulas import Formula, horizon
from .graphs import GraphTrajectory
from .parsing import parse_formula
from .robustness import any_node_robustness

if TYPE_CHECKING:
    from .counterexamples import CounterexampleBuffer
    from .environments.base import Environment


class TemplateError(ValueError):
    """Raised for malformed templates or out-of-bounds parameters."""


SLOT_KINDS = ("threshold", "window_lo", "window_hi")

_PLACEHOLDER_RE = re.compile(r"\$\{([A-Za-z_]\w*)([+-]\d+)?\}")


@dataclass(frozen=True)
class Slot:
    name: str
    kind: str
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if self.kind not in SLOT_KINDS:
            raise TemplateError(f"unknown slot kind {self.kind!r}")
        if not self.lower <= self.upper:
            raise TemplateError(f"slot {self.name}: empty bounds [{self.lower}, {self.upper}]")


@dataclass(frozen=True)
class CauseTemplate:
    """Formula skeleton with ``${slot}`` placeholders.

    Placeholders may carry an integer offset (``${w+3}``) so a single
    slot can position both ends of a fixed-width window.  Window slots
    are continuous for the optimizer and round half-up to integer steps
    at instantiation time.
    """

    skeleton: str
    slots: tuple[Slot, ...]

    def __post_init__(self) -> None:
        names = [s.name for s in self.slots]
        if len(set(names)) != len(names):
            raise TemplateError("duplicate slot names")
        referenced = {m.group(1) for m in _PLACEHOLDER_RE.finditer(self.skeleton)}
        missing = referenced - set(names)
        if missing:
            raise TemplateError(f"skeleton references undeclared slots: {sorted(missing)}")
        unused = set(names) - referenced
        if unused:
            raise TemplateError(f"slots never referenced in skeleton: {sorted(unused)}")

    @property
    def dimension(self) -> int:
        return len(self.slots)

    def bounds(self) -> tuple[tuple[float, float], ...]:
        return tuple((s.lower, s.upper) for s in self.slots)

    def instantiate(self, theta: Sequence[float]) -> Formula:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (len(self.slots),):
            raise TemplateError(f"theta must have {len(self.slots)} entries, got {theta.shape}")
        values: dict[str, float] = {}
        rounded: dict[str, int] = {}
        for slot, value in zip(self.slots, theta):
            if not slot.lower - 1e-9 <= value <= slot.upper + 1e-9:
                raise TemplateError(
                    f"slot {slot.name}={value} outside bounds [{slot.lower}, {slot.upper}]"
                )
            values[slot.name] = float(value)
            if slot.kind != "threshold":
                rounded[slot.name] = int(math.floor(value + 0.5))

        def substitute(match: re.Match[str]) -> str:
            name = match.group(1)
            offset = int(match.group(2) or 0)
            if name in rounded:
                return str(rounded[name] + offset)
            if offset:
                raise TemplateError(f"offset placeholders need a window slot: ${{{name}}}")
            return repr(values[name])

        text = _PLACEHOLDER_RE.sub(substitute, self.skeleton)
        instrumentation.increment("template_instantiations")
        return parse_formula(text)


@dataclass(frozen=True)
class CausalSpec:
    """Instantiated cause/effect pair with its generating template."""

    cause: Formula
    effect: Formula
    template: CauseTemplate | None = None
    theta: tuple[float, ...] | None = None

    def max_horizon(self) -> int:
        return max(horizon(self.cause), horizon(self.effect))


@dataclass(frozen=True)
class DegreeResult:
    """A degree value plus a flag marking an empty partition."""

    value: float
    empty: bool = False


@dataclass(frozen=True)
class SneScores:
    sufficiency: float
    necessity: float
    existence: float
    sufficiency_empty: bool = False
    necessity_empty: bool = False


def _mean(values: list[float]) -> float:
    # Left-to-right summation; the scoring contract fixes this order.
    return sum(values) / len(values)


def sufficiency_degree(dataset: Iterable[GraphTrajectory], spec: CausalSpec) -> DegreeResult:
    """Mean effect robustness over traces whose cause margin is positive.

    An empty partition yields the neutral value 0.0 with the flag set.
    """
    scores = [
        any_node_robustness(traj, spec.effect, 0)
        for traj in dataset
        if any_node_robustness(traj, spec.cause, 0) > 0
    ]
    if not scores:
        return DegreeResult(0.0, empty=True)
    return DegreeResult(_mean(scores))


def necessity_degree(dataset: Iterable[GraphTrajectory], spec: CausalSpec) -> DegreeResult:
    """Negated mean effect robustness over cause-violating traces."""
    scores = [
        any_node_robustness(traj, spec.effect, 0)
        for traj in dataset
        if any_node_robustness(traj, spec.cause, 0) < 0
    ]
    if not scores:
        return DegreeResult(0.0, empty=True)
    return DegreeResult(-_mean(scores))


def existence_degree(
    dataset: Iterable[GraphTrajectory],
    spec: CausalSpec,
    nominal: GraphTrajectory,
) -> DegreeResult:
    """Mean of exp(-(cause margin - nominal cause margin)) over the dataset.

    ``nominal`` is the reference trajectory; a no-intervention rollout of
    the environment under the run's seed is the intended choice.
    """
    reference = any_node_robustness(nominal, spec.cause, 0)
    scores = [
        math.exp(-(any_node_robustness(traj, spec.cause, 0) - reference))
        for traj in dataset
    ]
    if not scores:
        return DegreeResult(0.0, empty=True)
    return DegreeResult(_mean(scores))


def evaluate_sne(
    buffer: "CounterexampleBuffer",
    spec: CausalSpec,
    env: "Environment",
    iterations: int,
    eps_d1: float,
    eps_d2: float,
    rng: np.random.Generator,
) -> SneScores:
    """Counterfactual sufficiency/necessity/existence scoring.

    For each of ``iterations`` draws, a stored counterexample is sampled
    and replayed under an intervention that alternately enforces (even
    draws) or negates (odd draws) the cause.  The counterfactual's cause
    margin partitions it against the +eps_d1 / -eps_d2 thresholds:

      S = mean(effect margins of cause-satisfying counterfactuals)
      N = exp(-mean(effect margins of cause-violating counterfactuals))
      E = exp(-mean(all cause margins))

    Empty sufficiency/necessity partitions report the neutral value 0.0
    with the corresponding flag set.
    """
    from .counterexamples import generate_counterfactual

    if len(buffer) == 0:
        raise ValueError("counterexample buffer is empty")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if eps_d1 < 0 or eps_d2 < 0:
        raise ValueError("partition thresholds must be non-negative")

    sufficiency_scores: list[float] = []
    necessity_scores: list[float] = []
    existence_scores: list[float] = []
    for i in range(iterations):
        base = buffer[int(rng.integers(0, len(buffer)))]
        negate = i % 2 == 1
        counterfactual = generate_counterfactual(env, base, spec, negate, rng)
        rho_cause = any_node_robustness(counterfactual, spec.cause, 0)
        rho_effect = any_node_robustness(counterfactual, spec.effect, 0)
        if rho_cause > eps_d1:
            sufficiency_scores.append(rho_effect)
        if rho_cause < -eps_d2:
            necessity_scores.append(rho_effect)
        existence_scores.append(rho_cause)

    sufficiency_empty = not sufficiency_scores
    necessity_empty = not necessity_scores
    s = 0.0 if sufficiency_empty else _mean(sufficiency_scores)
    n = 0.0 if necessity_empty else math.exp(-_mean(necessity_scores))
    e = math.exp(-_mean(existence_scores))
    return SneScores(s, n, e, sufficiency_empty, necessity_empty)


def objective_J(scores: SneScores, lambda_s: float = 1.0, lambda_n: float = 1.0) -> float:
    """Refinement objective: -E + lambda_s * S + lambda_n * N."""
    return -scores.existence + lambda_s * scores.sufficiency + lambda_n * scores.necessity
