"""Simplified power-grid voltage simulator on the IEEE 14-bus topology.

Full power-flow physics is out of scope; the voltage response keeps the
causal topology instead: under-voltage propagates along lines through a
neighbor-coupling term, line overloads drip voltage, and generation
increases push the whole network up on the step they occur while
directly boosting the generator bus.  Buses below the sag threshold with
no powered neighbor above it therefore recover only when generation
increases soon after.  All coefficients are configuration-exposed.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from ..formulas import Always, Atomic, ExistsN, Formula, Not, iter_subformulas
from ..graphs import Graph, GraphTrajectory
from .base import (
    Environment,
    InterventionPlan,
    PerturbableVariable,
    Snapshot,
    UnforceableCauseError,
)

# Generator buses of the IEEE 14-bus system (1-indexed: 1, 2, 3, 6, 8).
GENERATOR_BUSES = (0, 1, 2, 5, 7)

# Nominal bus loads in per-unit on a 100 MVA base (zero at generator-only
# and junction buses).
DEFAULT_LOADS = {
    1: 0.217, 2: 0.942, 3: 0.478, 4: 0.076, 5: 0.112,
    8: 0.295, 9: 0.090, 10: 0.035, 11: 0.061, 12: 0.135, 13: 0.149,
}


def load_line_data() -> tuple[tuple[tuple[int, int], ...], dict[tuple[int, int], float]]:
    """Bundled line list as 0-indexed edges plus per-line thermal limits."""
    text = (resources.files(__package__) / "data" / "ieee14_lines.txt").read_text()
    edges: list[tuple[int, int]] = []
    limits: dict[tuple[int, int], float] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        u, v, limit = line.split()
        edge = tuple(sorted((int(u) - 1, int(v) - 1)))
        edges.append(edge)  # type: ignore[arg-type]
        limits[edge] = float(limit)  # type: ignore[index]
    return tuple(edges), limits


@dataclass(frozen=True)
class GridParams:
    episode_length: int = 20
    sag_threshold: float = 0.90
    support_gain: float = 0.04
    overload_penalty: float = 0.01
    coupling: float = 0.5
    gen_boost: float = 0.05
    gen_increment: float = 0.1
    gen_limit: float = 1.0
    base_gen: float = 0.5
    shed_factor: float = 0.8
    flow_offset: float = 0.1
    v_min: float = 0.80
    v_max: float = 1.10
    base_voltage: float = 0.97
    sag_voltage: float = 0.88
    load_multipliers: tuple[float, ...] = (1.0, 1.2)
    success_window: tuple[int, int] = (1, 5)
    forcing_margin: float = 0.02


class PowerGridEnv(Environment):
    """See module docstring.  Dynamics are deterministic given the reset."""

    def __init__(self, params: GridParams | None = None) -> None:
        self.params = params or GridParams()
        self.episode_length = self.params.episode_length
        edges, limits = load_line_data()
        self._limits = limits
        self.n_buses = 14
        self.graph = Graph(tuple(range(self.n_buses)), edges)
        self.action_count = 1 + len(GENERATOR_BUSES) + self.n_buses
        self._voltages: np.ndarray | None = None
        self._loads: np.ndarray | None = None
        self._gen_output: np.ndarray | None = None
        self._indicators: np.ndarray | None = None
        self._t = 0
        self._v_hist: list[np.ndarray] = []
        self._load_hist: list[np.ndarray] = []
        self._g_hist: list[np.ndarray] = []
        self._actions: list[int] = []
        self._seed: int | None = None

    @property
    def action_labels(self) -> tuple[str, ...]:
        labels = ["NoOp"]
        labels.extend(f"IncreaseGen({g})" for g in GENERATOR_BUSES)
        labels.extend(f"ShedLoad({b})" for b in range(self.n_buses))
        return tuple(labels)

    # -- episode control ------------------------------------------------------

    def reset(self, seed: int) -> Snapshot:
        rng = np.random.default_rng(seed)
        p = self.params
        multiplier = p.load_multipliers[int(rng.integers(0, len(p.load_multipliers)))]
        loads = np.zeros(self.n_buses)
        for bus, load in DEFAULT_LOADS.items():
            loads[bus] = load * multiplier
        voltages = np.full(self.n_buses, p.base_voltage)
        sag_bus = int(rng.integers(0, self.n_buses))
        voltages[sag_bus] = p.sag_voltage
        self._voltages = voltages
        self._loads = loads
        self._gen_output = np.full(len(GENERATOR_BUSES), p.base_gen)
        self._indicators = np.zeros(self.n_buses)
        self._t = 0
        self._v_hist = [voltages.copy()]
        self._load_hist = [loads.copy()]
        self._g_hist = [self._indicators.copy()]
        self._actions = []
        self._seed = int(seed)
        return self.current_snapshot()

    def reset_from(self, snapshot: Snapshot) -> Snapshot:
        voltages = np.zeros(self.n_buses)
        loads = np.zeros(self.n_buses)
        indicators = np.zeros(self.n_buses)
        for bus in range(self.n_buses):
            rec = snapshot[bus]
            voltages[bus] = rec["V"]
            loads[bus] = rec["load"]
            indicators[bus] = rec.get("G", 0.0)
        self._voltages = voltages
        self._loads = loads
        # Generator set-points are not part of the observation; replay is
        # only valid from an initial snapshot where they sit at base.
        self._gen_output = np.full(len(GENERATOR_BUSES), self.params.base_gen)
        self._indicators = indicators
        self._t = 0
        self._v_hist = [voltages.copy()]
        self._load_hist = [loads.copy()]
        self._g_hist = [indicators.copy()]
        self._actions = []
        self._seed = None
        return self.current_snapshot()

    def clone(self) -> "PowerGridEnv":
        other = object.__new__(PowerGridEnv)
        other.params = self.params
        other.episode_length = self.episode_length
        other._limits = self._limits
        other.n_buses = self.n_buses
        other.graph = self.graph
        other.action_count = self.action_count
        other._voltages = None if self._voltages is None else self._voltages.copy()
        other._loads = None if self._loads is None else self._loads.copy()
        other._gen_output = None if self._gen_output is None else self._gen_output.copy()
        other._indicators = None if self._indicators is None else self._indicators.copy()
        other._t = self._t
        other._v_hist = [v.copy() for v in self._v_hist]
        other._load_hist = [x.copy() for x in self._load_hist]
        other._g_hist = [g.copy() for g in self._g_hist]
        other._actions = list(self._actions)
        other._seed = self._seed
        return other

    # -- dynamics ---------------------------------------------------------------

    def _flows(self, loads: np.ndarray) -> dict[tuple[int, int], float]:
        p = self.params
        return {
            e: 0.5 * (loads[e[0]] + loads[e[1]]) + p.flow_offset
            for e in self.graph.edges
        }

    def step(self, action: int) -> Snapshot:
        if self._voltages is None or self._loads is None or self._gen_output is None:
            raise RuntimeError("environment must be reset before use")
        if self._t >= self.episode_length:
            raise RuntimeError("episode already complete")
        if not 0 <= action < self.action_count:
            raise ValueError(f"invalid action id {action}")
        self._actions.append(int(action))
        p = self.params
        n_gen = len(GENERATOR_BUSES)

        boost = np.zeros(self.n_buses)
        indicators = np.zeros(self.n_buses)
        new_loads = self._loads.copy()
        support = 0.0
        if 1 <= action <= n_gen:
            g = action - 1
            bus = GENERATOR_BUSES[g]
            self._gen_output[g] = min(self._gen_output[g] + p.gen_increment, p.gen_limit)
            boost[bus] = p.gen_boost
            indicators[bus] = 1.0
            support = 1.0
        elif action > n_gen:
            bus = action - 1 - n_gen
            new_loads[bus] = self._loads[bus] * p.shed_factor

        flows = self._flows(self._loads)
        overload = np.zeros(self.n_buses)
        for e, flow in flows.items():
            if flow > self._limits[e]:
                overload[e[0]] = 1.0
                overload[e[1]] = 1.0

        new_v = np.zeros(self.n_buses)
        for b in range(self.n_buses):
            neighbors = self.graph.neighbors(b)
            deficit = sum(min(0.0, self._voltages[nb] - p.sag_threshold) for nb in neighbors)
            deficit /= max(len(neighbors), 1)
            v = (
                self._voltages[b]
                + boost[b]
                + p.support_gain * support
                - p.overload_penalty * overload[b]
                + p.coupling * deficit
            )
            new_v[b] = min(max(v, p.v_min), p.v_max)

        self._voltages = new_v
        self._loads = new_loads
        self._indicators = indicators
        self._t += 1
        self._v_hist.append(new_v.copy())
        self._load_hist.append(new_loads.copy())
        self._g_hist.append(indicators.copy())
        return self.current_snapshot()

    # -- interventions ------------------------------------------------------------

    def force(self, node: int, feature: str, value: float) -> None:
        if self._voltages is None or self._loads is None:
            raise RuntimeError("environment must be reset before use")
        p = self.params
        if feature == "V":
            self._voltages[node] = float(min(max(value, p.v_min), p.v_max))
            self._v_hist[-1] = self._voltages.copy()
        elif feature == "load":
            self._loads[node] = float(max(value, 0.0))
            self._load_hist[-1] = self._loads.copy()
        elif feature == "G":
            self._indicators[node] = 1.0 if value >= 0.5 else 0.0
            self._g_hist[-1] = self._indicators.copy()
        else:
            raise ValueError(f"unknown state variable {feature!r}")

    @property
    def perturbable_variables(self) -> tuple[PerturbableVariable, ...]:
        p = self.params
        variables = [
            PerturbableVariable(b, "V", 0.05, p.v_min, p.v_max) for b in range(self.n_buses)
        ]
        variables.extend(
            PerturbableVariable(b, "load", 0.05, 0.0, 2.0) for b in range(self.n_buses)
        )
        return tuple(variables)

    def plan_interventions(
        self,
        cause: Formula,
        negate: bool,
        base: GraphTrajectory,
        rng: np.random.Generator,
    ) -> InterventionPlan:
        threshold = _voltage_threshold(cause)
        if threshold is None:
            raise UnforceableCauseError("cause references no voltage threshold")
        margin = self.params.forcing_margin
        start = base.snapshot(0)
        if negate:
            forced = {
                0: [
                    (b, "V", threshold + margin)
                    for b in range(self.n_buses)
                    if start[b]["V"] < threshold
                ]
            }
            return InterventionPlan(forced=forced)
        target = min(range(self.n_buses), key=lambda b: (start[b]["V"], b))
        assignments = [(target, "V", threshold - margin)]
        for nb in self.graph.neighbors(target):
            if start[nb]["V"] >= threshold:
                assignments.append((nb, "V", threshold - margin))
        return InterventionPlan(forced={0: assignments})

    # -- observation ----------------------------------------------------------------

    def current_snapshot(self) -> Snapshot:
        if self._voltages is None or self._loads is None or self._indicators is None:
            raise RuntimeError("environment must be reset before use")
        return {
            b: {
                "V": float(self._voltages[b]),
                "load": float(self._loads[b]),
                "G": float(self._indicators[b]),
            }
            for b in range(self.n_buses)
        }

    def trajectory(self) -> GraphTrajectory:
        if self._voltages is None:
            raise RuntimeError("environment must be reset before use")
        node_labels = {
            b: {
                "V": [v[b] for v in self._v_hist],
                "load": [x[b] for x in self._load_hist],
                "G": [g[b] for g in self._g_hist],
            }
            for b in range(self.n_buses)
        }
        edge_labels = {
            e: {"P": [self._flows(loads)[e] for loads in self._load_hist]}
            for e in self.graph.edges
        }
        meta: dict[str, object] = {"actions": tuple(self._actions)}
        if self._seed is not None:
            meta["seed"] = str(self._seed)
        return GraphTrajectory(self.graph, node_labels, edge_labels, meta)

    def raw_reward(self) -> float:
        if self._voltages is None:
            raise RuntimeError("environment must be reset before use")
        return -float(np.sum(self._voltages < self.params.sag_threshold))

    def episode_success(self) -> bool:
        lo, hi = self.params.success_window
        for t in range(lo, min(hi, len(self._g_hist) - 1) + 1):
            if np.any(self._g_hist[t] > 0.5):
                return True
        return False


def _voltage_threshold(cause: Formula) -> float | None:
    """Sag threshold referenced by the cause, read from the first
    under-voltage atom beneath a bounded-always operator."""
    for node in iter_subformulas(cause):
        if isinstance(node, Always):
            for sub in iter_subformulas(node.inner):
                if isinstance(sub, Not) and isinstance(sub.inner, Atomic):
                    if sub.inner.feature == "V":
                        return sub.inner.threshold
                if isinstance(sub, Atomic) and sub.feature == "V":
                    return sub.threshold
    for node in iter_subformulas(cause):
        if isinstance(node, ExistsN):
            for sub in iter_subformulas(node.inner):
                if isinstance(sub, Atomic) and sub.feature == "V":
                    return sub.threshold
    return None
