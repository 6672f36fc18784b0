"""Quantitative robustness of GTL formulas over graph trajectories.

The robustness value is a signed margin: positive means satisfied,
negative violated, zero sits on the boundary (boolean queries treat it
as not satisfied).  Evaluation is a pure function of immutable inputs
and is safe to call concurrently.
"""

from __future__ import annotations

from .formulas import (
    Always,
    And,
    Atomic,
    EdgeProp,
    Eventually,
    ExistsN,
    Formula,
    Not,
    Or,
    horizon,
)
from .graphs import GraphTrajectory, TrajectoryError

# Sentinel robustness when the neighbor quantifier cannot gather enough
# eligible nodes: a large negative constant rather than -inf so the value
# stays finite under negation and arithmetic.
MISSING_NEIGHBOR_ROBUSTNESS = -1.0e6


class EvaluationError(ValueError):
    """Raised when a formula cannot be evaluated on a trajectory."""


def eligible_neighbors(
    traj: GraphTrajectory,
    node: int,
    edge_props: tuple[EdgeProp, ...],
    t: int,
) -> set[int]:
    """Nodes reachable from ``node`` by a simple path of length
    ``len(edge_props)`` whose i-th edge satisfies the i-th predicate at
    time ``t``.  Edge predicates gate eligibility boolean-ly."""
    if node not in traj.graph.nodes:
        raise EvaluationError(f"node {node} not in graph")
    frontier: set[tuple[int, tuple[int, ...]]] = {(node, (node,))}
    for prop in edge_props:
        advanced: set[tuple[int, tuple[int, ...]]] = set()
        for current, visited in frontier:
            for nb in traj.graph.neighbors(current):
                if nb in visited:
                    continue
                try:
                    value = traj.edge_value((current, nb), prop.feature, t)
                except TrajectoryError as exc:
                    raise EvaluationError(str(exc)) from exc
                if prop.passes(value):
                    advanced.add((nb, visited + (nb,)))
        frontier = advanced
        if not frontier:
            return set()
    return {current for current, _ in frontier}


def _check_preconditions(traj: GraphTrajectory, formula: Formula, node: int, t: int) -> None:
    if node not in traj.graph.nodes:
        raise EvaluationError(f"node {node} not in graph")
    if t < 0:
        raise EvaluationError(f"negative evaluation time {t}")
    if t + horizon(formula) > traj.horizon:
        raise EvaluationError(
            f"formula window exceeds trajectory horizon: need t={t}+{horizon(formula)}"
            f" but horizon is {traj.horizon}"
        )


def robustness(traj: GraphTrajectory, formula: Formula, node: int, t: int = 0) -> float:
    """Signed satisfaction margin of ``formula`` at ``(node, t)``."""
    _check_preconditions(traj, formula, node, t)
    return _eval(traj, formula, node, t)


def _eval(traj: GraphTrajectory, formula: Formula, node: int, t: int) -> float:
    if isinstance(formula, Atomic):
        try:
            return traj.node_value(node, formula.feature, t) - formula.threshold
        except TrajectoryError as exc:
            raise EvaluationError(str(exc)) from exc
    if isinstance(formula, Not):
        return -_eval(traj, formula.inner, node, t)
    if isinstance(formula, And):
        return min(_eval(traj, formula.left, node, t), _eval(traj, formula.right, node, t))
    if isinstance(formula, Or):
        return max(_eval(traj, formula.left, node, t), _eval(traj, formula.right, node, t))
    if isinstance(formula, Eventually):
        return max(_eval(traj, formula.inner, node, k)
                   for k in range(t + formula.lo, t + formula.hi + 1))
    if isinstance(formula, Always):
        return min(_eval(traj, formula.inner, node, k)
                   for k in range(t + formula.lo, t + formula.hi + 1))
    if isinstance(formula, ExistsN):
        values = sorted(
            (_eval(traj, formula.inner, nb, t)
             for nb in eligible_neighbors(traj, node, formula.edge_props, t)),
            reverse=True,
        )
        if len(values) < formula.count:
            return MISSING_NEIGHBOR_ROBUSTNESS
        return values[formula.count - 1]
    raise EvaluationError(f"unknown formula node {formula!r}")


def robustness_sign(traj: GraphTrajectory, formula: Formula, node: int, t: int = 0) -> int:
    """Sign of the robustness margin in {-1, 0, +1}.

    Equivalent to ``sign(robustness(...))`` because sign is monotone and
    therefore commutes with the min/max/order-statistic recursion, but
    short-circuits boolean connectives and windows.
    """
    _check_preconditions(traj, formula, node, t)
    return _sign(traj, formula, node, t)


def _sign(traj: GraphTrajectory, formula: Formula, node: int, t: int) -> int:
    if isinstance(formula, Atomic):
        margin = traj.node_value(node, formula.feature, t) - formula.threshold
        return (margin > 0) - (margin < 0)
    if isinstance(formula, Not):
        return -_sign(traj, formula.inner, node, t)
    if isinstance(formula, And):
        left = _sign(traj, formula.left, node, t)
        if left == -1:
            return -1
        return min(left, _sign(traj, formula.right, node, t))
    if isinstance(formula, Or):
        left = _sign(traj, formula.left, node, t)
        if left == 1:
            return 1
        return max(left, _sign(traj, formula.right, node, t))
    if isinstance(formula, Eventually):
        best = -1
        for k in range(t + formula.lo, t + formula.hi + 1):
            best = max(best, _sign(traj, formula.inner, node, k))
            if best == 1:
                return 1
        return best
    if isinstance(formula, Always):
        worst = 1
        for k in range(t + formula.lo, t + formula.hi + 1):
            worst = min(worst, _sign(traj, formula.inner, node, k))
            if worst == -1:
                return -1
        return worst
    if isinstance(formula, ExistsN):
        signs = sorted(
            (_sign(traj, formula.inner, nb, t)
             for nb in eligible_neighbors(traj, node, formula.edge_props, t)),
            reverse=True,
        )
        if len(signs) < formula.count:
            return -1
        return signs[formula.count - 1]
    raise EvaluationError(f"unknown formula node {formula!r}")


def any_node_robustness(traj: GraphTrajectory, formula: Formula, t: int = 0) -> float:
    """Existential node aggregation: max robustness over all nodes.

    Specification-level formulas quantify over the whole network ("some
    unit satisfies ..."), which lowers to a max over per-node margins.
    """
    return max(robustness(traj, formula, node, t) for node in traj.graph.nodes)


def any_node_sign(traj: GraphTrajectory, formula: Formula, t: int = 0) -> int:
    best = -1
    for node in traj.graph.nodes:
        best = max(best, robustness_sign(traj, formula, node, t))
        if best == 1:
            return 1
    return best
