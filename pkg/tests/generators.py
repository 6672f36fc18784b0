"""Seeded random trajectories and formulas for the property tests."""

from __future__ import annotations

import numpy as np

from gtlcirl.formulas import (
    Always,
    And,
    Atomic,
    EdgeProp,
    Eventually,
    ExistsN,
    Not,
    Or,
    horizon,
)
from gtlcirl.graphs import Graph, GraphTrajectory

FEATURES = ("a", "b")
EDGE_FEATURE = "w"


def random_trajectory(rng: np.random.Generator, max_nodes: int = 5, steps: int = 8):
    n = int(rng.integers(2, max_nodes + 1))
    edges = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < 0.6
    ]
    if not edges:
        edges = [(0, 1)]
    graph = Graph(tuple(range(n)), tuple(edges))
    node_labels = {
        node: {
            feat: [round(float(x), 1) for x in rng.uniform(-1, 1, steps + 1)]
            for feat in FEATURES
        }
        for node in range(n)
    }
    edge_labels = {
        e: {EDGE_FEATURE: [round(float(x), 1) for x in rng.uniform(-1, 1, steps + 1)]}
        for e in graph.edges
    }
    return GraphTrajectory(graph, node_labels, edge_labels)


def random_formula(rng: np.random.Generator, depth: int = 3, max_horizon: int = 8):
    """Random formula whose total look-ahead stays within ``max_horizon``."""
    if depth <= 0 or max_horizon <= 0 and rng.random() < 0.5:
        return Atomic(FEATURES[int(rng.integers(len(FEATURES)))], round(float(rng.uniform(-1, 1)), 1))
    choice = int(rng.integers(0, 7))
    if choice == 0:
        return Atomic(FEATURES[int(rng.integers(len(FEATURES)))], round(float(rng.uniform(-1, 1)), 1))
    if choice == 1:
        return Not(random_formula(rng, depth - 1, max_horizon))
    if choice == 2:
        return And(
            random_formula(rng, depth - 1, max_horizon),
            random_formula(rng, depth - 1, max_horizon),
        )
    if choice == 3:
        return Or(
            random_formula(rng, depth - 1, max_horizon),
            random_formula(rng, depth - 1, max_horizon),
        )
    if choice in (4, 5):
        lo = int(rng.integers(0, max(1, max_horizon // 2)))
        hi = int(rng.integers(lo, max_horizon + 1))
        inner = random_formula(rng, depth - 1, max_horizon - hi)
        return Eventually(lo, hi, inner) if choice == 4 else Always(lo, hi, inner)
    count = int(rng.integers(1, 4))
    props = tuple(
        EdgeProp(EDGE_FEATURE, (">", ">=", "<", "<=")[int(rng.integers(4))],
                 round(float(rng.uniform(-1, 1)), 1))
        for _ in range(int(rng.integers(1, 3)))
    )
    return ExistsN(count, props, random_formula(rng, depth - 1, max_horizon))


def compatible_pair(rng: np.random.Generator, max_nodes: int = 5, steps: int = 8):
    """A trajectory and a formula whose horizon fits it at t = 0."""
    traj = random_trajectory(rng, max_nodes, steps)
    while True:
        formula = random_formula(rng, 3, steps)
        if horizon(formula) <= traj.horizon:
            return traj, formula
