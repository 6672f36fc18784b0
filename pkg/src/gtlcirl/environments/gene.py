"""Gene-regulation network simulator.

Biological units (BUs) carry four binary gene states.  A hidden rule
drives the global disease signal: when some BU keeps the diseased
pattern (G1=G2=G4=1, G3=0) through the surveillance window, has at least
one connected neighbor expressing G1, G2, or G4 at the start, and
receives the three timed gene modifications inside their windows, the
disease progression collapses to zero inside the remission window.
Otherwise progression drifts upward with the number of diseased BUs.

Modification actions are latched: the edit is recorded as an event the
step it happens, and the targeted gene integrates the zeroing once the
surveillance window closes.  Without that latency the diseased pattern
could never coexist with the edits that cure it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..formulas import (
    Always,
    And,
    Atomic,
    Eventually,
    Formula,
    Not,
    iter_subformulas,
)
from ..graphs import Graph, GraphTrajectory
from .base import (
    Environment,
    InterventionPlan,
    PerturbableVariable,
    Snapshot,
    UnforceableCauseError,
)

GENE_FEATURES = ("G1", "G2", "G3", "G4")
MODIFY_FEATURES = ("ModifyG1", "ModifyG2", "ModifyG4")
# Gene index targeted by each modification action family (G1, G2, G4).
_MODIFY_TARGETS = (0, 1, 3)
# Diseased pattern: required value per gene index.
_PATTERN = {0: 1, 1: 1, 2: 0, 3: 1}


@dataclass(frozen=True)
class GeneParams:
    bu_count: int = 8
    mean_degree: float = 3.0
    episode_length: int = 16
    drift_rate: float = 0.02
    initial_progression: float = 0.5
    pattern_window: tuple[int, int] = (0, 10)
    modify_windows: tuple[tuple[int, int], ...] = ((0, 3), (3, 6), (6, 9))
    remission_start: int = 12


@dataclass
class _GeneState:
    genes: np.ndarray  # (n, 4) ints in {0, 1}
    indicators: np.ndarray  # (n, 3) ints, modification events this step
    progression: float
    t: int
    pending_edits: set[tuple[int, int]] = field(default_factory=set)


class GeneNetworkEnv(Environment):
    """See module docstring.  Dynamics are deterministic given the reset."""

    def __init__(self, params: GeneParams | None = None, topology_seed: int = 0) -> None:
        self.params = params or GeneParams()
        self.episode_length = self.params.episode_length
        n = self.params.bu_count
        self.action_count = 1 + 3 * n
        self.graph = self._build_topology(topology_seed)
        self._edit_apply_step = self.params.pattern_window[1] + 1
        self._rule_decided_step = max(
            self._edit_apply_step + 1,
            max(hi for _, hi in self.params.modify_windows) + 1,
        )
        self._state: _GeneState | None = None
        self._history: list[_GeneState] = []
        self._actions: list[int] = []
        self._fired: bool | None = None
        self._seed: int | None = None

    # -- construction ------------------------------------------------------

    def _build_topology(self, topology_seed: int) -> Graph:
        n = self.params.bu_count
        rng = np.random.default_rng(topology_seed)
        p = min(1.0, self.params.mean_degree / max(n - 1, 1))
        edges = [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < p
        ]
        covered = {u for e in edges for u in e}
        for i in range(n):
            if i not in covered:
                edges.append(tuple(sorted((i, (i + 1) % n))))
                covered.update(edges[-1])
        edges = sorted(set(edges))
        labels = {e: {"conn": 1.0} for e in edges}
        return Graph(tuple(range(n)), tuple(edges), labels)

    @property
    def action_labels(self) -> tuple[str, ...]:
        n = self.params.bu_count
        labels = ["NoOp"]
        for feat in MODIFY_FEATURES:
            labels.extend(f"{feat}({v})" for v in range(n))
        return tuple(labels)

    # -- episode control ----------------------------------------------------

    def reset(self, seed: int) -> Snapshot:
        rng = np.random.default_rng(seed)
        n = self.params.bu_count
        genes = np.zeros((n, 4), dtype=np.int64)
        diseased = int(rng.integers(0, n))
        for idx, value in _PATTERN.items():
            genes[diseased, idx] = value
        support = self.graph.neighbors(diseased)[0]
        genes[support, 0] = 1
        self._seed = int(seed)
        self._state = _GeneState(
            genes=genes,
            indicators=np.zeros((n, 3), dtype=np.int64),
            progression=self.params.initial_progression,
            t=0,
        )
        self._history = [self._copy_state(self._state)]
        self._actions = []
        self._fired = None
        return self.current_snapshot()

    def reset_from(self, snapshot: Snapshot) -> Snapshot:
        n = self.params.bu_count
        genes = np.zeros((n, 4), dtype=np.int64)
        indicators = np.zeros((n, 3), dtype=np.int64)
        for node in range(n):
            rec = snapshot[node]
            for idx, feat in enumerate(GENE_FEATURES):
                genes[node, idx] = 1 if rec[feat] >= 0.5 else 0
            for slot, feat in enumerate(MODIFY_FEATURES):
                indicators[node, slot] = 1 if rec.get(feat, 0.0) >= 0.5 else 0
        progression = float(min(max(snapshot[0]["DiseaseProgression"], 0.0), 1.0))
        pending = {
            (node, _MODIFY_TARGETS[slot])
            for node in range(n)
            for slot in range(3)
            if indicators[node, slot]
        }
        self._seed = None
        self._state = _GeneState(genes, indicators, progression, 0, pending)
        self._history = [self._copy_state(self._state)]
        self._actions = []
        self._fired = None
        return self.current_snapshot()

    @staticmethod
    def _copy_state(state: _GeneState) -> _GeneState:
        return _GeneState(
            state.genes.copy(),
            state.indicators.copy(),
            state.progression,
            state.t,
            set(state.pending_edits),
        )

    def clone(self) -> "GeneNetworkEnv":
        other = object.__new__(GeneNetworkEnv)
        other.params = self.params
        other.episode_length = self.episode_length
        other.action_count = self.action_count
        other.graph = self.graph
        other._edit_apply_step = self._edit_apply_step
        other._rule_decided_step = self._rule_decided_step
        other._state = self._copy_state(self._state) if self._state else None
        other._history = [self._copy_state(s) for s in self._history]
        other._actions = list(self._actions)
        other._fired = self._fired
        other._seed = self._seed
        return other

    # -- dynamics -----------------------------------------------------------

    def step(self, action: int) -> Snapshot:
        state = self._require_state()
        if state.t >= self.episode_length:
            raise RuntimeError("episode already complete")
        if not 0 <= action < self.action_count:
            raise ValueError(f"invalid action id {action}")
        self._actions.append(int(action))
        n = self.params.bu_count

        new_t = state.t + 1
        indicators = np.zeros((n, 3), dtype=np.int64)
        pending = set(state.pending_edits)
        if action > 0:
            slot, bu = divmod(action - 1, n)
            indicators[bu, slot] = 1
            pending.add((bu, _MODIFY_TARGETS[slot]))

        genes = state.genes.copy()
        if new_t >= self._edit_apply_step and pending:
            for bu, gene_idx in sorted(pending):
                genes[bu, gene_idx] = 0
            pending = set()

        if self._fired is None and new_t >= self._rule_decided_step:
            self._fired = self._rule_engine_fired()

        if self._fired and new_t >= self.params.remission_start:
            progression = 0.0
        else:
            diseased = self._diseased_count(state.genes)
            progression = min(1.0, state.progression + self.params.drift_rate * diseased / n)

        self._state = _GeneState(genes, indicators, progression, new_t, pending)
        self._history.append(self._copy_state(self._state))
        return self.current_snapshot()

    def _diseased_count(self, genes: np.ndarray) -> int:
        count = 0
        for row in genes:
            if all(row[idx] == value for idx, value in _PATTERN.items()):
                count += 1
        return count

    def _rule_engine_fired(self) -> bool:
        """Plain re-check of the hidden rule from the recorded history.

        Intentionally independent of the formula monitor: straight loops
        over gene snapshots, the neighbor list, and modification events.
        Neighbor support is read at the episode start, where the rule's
        spatial precondition is anchored.
        """
        lo, hi = self.params.pattern_window
        if len(self._history) <= hi:
            return False
        for bu in self.graph.nodes:
            pattern_held = True
            for t in range(lo, hi + 1):
                genes_t = self._history[t].genes
                if not all(genes_t[bu, idx] == val for idx, val in _PATTERN.items()):
                    pattern_held = False
                    break
            if not pattern_held:
                continue
            start = self._history[0].genes
            supported = any(
                start[u, 0] == 1 or start[u, 1] == 1 or start[u, 3] == 1
                for u in self.graph.neighbors(bu)
            )
            if not supported:
                continue
            timed = True
            for slot, (w_lo, w_hi) in enumerate(self.params.modify_windows):
                hit = False
                for t in range(w_lo, min(w_hi, len(self._history) - 1) + 1):
                    if self._history[t].indicators[bu, slot] == 1:
                        hit = True
                        break
                if not hit:
                    timed = False
                    break
            if timed:
                return True
        return False

    # -- interventions -------------------------------------------------------

    def force(self, node: int, feature: str, value: float) -> None:
        state = self._require_state()
        if feature in GENE_FEATURES:
            idx = GENE_FEATURES.index(feature)
            state.genes[node, idx] = 1 if value >= 0.5 else 0
        elif feature in MODIFY_FEATURES:
            slot = MODIFY_FEATURES.index(feature)
            bit = 1 if value >= 0.5 else 0
            state.indicators[node, slot] = bit
            if bit:
                state.pending_edits.add((node, _MODIFY_TARGETS[slot]))
        elif feature == "DiseaseProgression":
            state.progression = float(min(max(value, 0.0), 1.0))
        else:
            raise ValueError(f"unknown state variable {feature!r}")
        self._history[-1] = self._copy_state(state)

    @property
    def perturbable_variables(self) -> tuple[PerturbableVariable, ...]:
        variables = [
            PerturbableVariable(node, feat, 1.0, 0.0, 1.0)
            for node in self.graph.nodes
            for feat in GENE_FEATURES
        ]
        variables.append(PerturbableVariable(0, "DiseaseProgression", 0.05, 0.0, 1.0))
        return tuple(variables)

    def plan_interventions(
        self,
        cause: Formula,
        negate: bool,
        base: GraphTrajectory,
        rng: np.random.Generator,
    ) -> InterventionPlan:
        pattern, windows = _cause_structure(cause)
        if pattern is None and not windows:
            raise UnforceableCauseError(
                "cause references no gene pattern or modification windows"
            )
        if negate:
            if windows:
                # Suppressing every modification event falsifies the timed
                # conjuncts for every BU.
                return InterventionPlan(action_filter=lambda t, a: 0)
            lo = pattern[0] if pattern else 0
            forced = {lo: [(node, "G1", 0.0) for node in self.graph.nodes]}
            return InterventionPlan(forced=forced)

        target = self.graph.nodes[0]
        support = self.graph.neighbors(target)[0]
        forced: dict[int, list[tuple[int, str, float]]] = {0: []}
        if pattern is not None:
            _, _, required = pattern
            for feat, val in required.items():
                forced[0].append((target, feat, float(val)))
        else:
            for idx, val in _PATTERN.items():
                forced[0].append((target, GENE_FEATURES[idx], float(val)))
        forced[0].append((support, "G1", 1.0))
        for feat, lo, hi in windows:
            upper = min(hi, self.episode_length)
            when = int(rng.integers(lo, upper + 1))
            forced.setdefault(when, []).append((target, feat, 1.0))
        return InterventionPlan(forced=forced)

    # -- observation ---------------------------------------------------------

    def current_snapshot(self) -> Snapshot:
        state = self._require_state()
        snap: Snapshot = {}
        for node in self.graph.nodes:
            rec = {feat: float(state.genes[node, idx]) for idx, feat in enumerate(GENE_FEATURES)}
            for slot, feat in enumerate(MODIFY_FEATURES):
                rec[feat] = float(state.indicators[node, slot])
            rec["DiseaseProgression"] = state.progression
            snap[node] = rec
        return snap

    def trajectory(self) -> GraphTrajectory:
        self._require_state()
        node_labels: dict[int, dict[str, list[float]]] = {
            node: {feat: [] for feat in (*GENE_FEATURES, *MODIFY_FEATURES, "DiseaseProgression")}
            for node in self.graph.nodes
        }
        for state in self._history:
            for node in self.graph.nodes:
                for idx, feat in enumerate(GENE_FEATURES):
                    node_labels[node][feat].append(float(state.genes[node, idx]))
                for slot, feat in enumerate(MODIFY_FEATURES):
                    node_labels[node][feat].append(float(state.indicators[node, slot]))
                node_labels[node]["DiseaseProgression"].append(state.progression)
        meta: dict[str, object] = {"actions": tuple(self._actions)}
        if self._seed is not None:
            meta["seed"] = str(self._seed)
        return GraphTrajectory(self.graph, node_labels, meta=meta)

    def raw_reward(self) -> float:
        return -self._require_state().progression

    def episode_success(self) -> bool:
        return bool(self._fired)

    def rule_fired(self) -> bool | None:
        """Ground-truth rule outcome (None until the decision step)."""
        return self._fired

    def _require_state(self) -> _GeneState:
        if self._state is None:
            raise RuntimeError("environment must be reset before use")
        return self._state


def _cause_structure(
    cause: Formula,
) -> tuple[tuple[int, int, dict[str, int]] | None, list[tuple[str, int, int]]]:
    """Extract the gene pattern window and modification windows from a
    cause formula; this is the environment's cause-to-assignment map."""
    pattern: tuple[int, int, dict[str, int]] | None = None
    windows: list[tuple[str, int, int]] = []
    for node in iter_subformulas(cause):
        if isinstance(node, Always) and pattern is None:
            required = _gene_requirements(node.inner)
            if required:
                pattern = (node.lo, node.hi, required)
        if isinstance(node, Eventually):
            inner = node.inner
            if isinstance(inner, Atomic) and inner.feature in MODIFY_FEATURES:
                windows.append((inner.feature, node.lo, node.hi))
    return pattern, windows


def _gene_requirements(formula: Formula) -> dict[str, int]:
    """Required gene values from a conjunction of gene atoms."""
    required: dict[str, int] = {}

    def walk(node: Formula) -> None:
        if isinstance(node, And):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Atomic) and node.feature in GENE_FEATURES:
            required[node.feature] = 1
        elif isinstance(node, Not) and isinstance(node.inner, Atomic):
            if node.inner.feature in GENE_FEATURES:
                required[node.inner.feature] = 0

    walk(formula)
    return required
