"""Graphs and graph-temporal trajectories.

A :class:`Graph` is a fixed undirected graph with optional static edge
labels.  A :class:`GraphTrajectory` attaches time-indexed node and edge
label records to a graph; it is the object formulas are evaluated on.
Both are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping


class TrajectoryError(ValueError):
    """Raised for malformed graphs or incomplete trajectories."""


def _normalize_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Undirected graph over small integer node identifiers.

    ``edge_labels`` holds static per-edge features (e.g. a connectivity
    flag); time-varying edge features live on the trajectory instead.
    """

    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    edge_labels: Mapping[tuple[int, int], Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise TrajectoryError("duplicate node identifiers")
        if any(n < 0 for n in self.nodes):
            raise TrajectoryError("node identifiers must be non-negative")
        seen: set[tuple[int, int]] = set()
        norm: list[tuple[int, int]] = []
        for u, v in self.edges:
            if u == v:
                raise TrajectoryError(f"self-loop on node {u}")
            if u not in node_set or v not in node_set:
                raise TrajectoryError(f"edge ({u},{v}) references undeclared node")
            e = _normalize_edge(u, v)
            if e in seen:
                raise TrajectoryError(f"duplicate edge {e}")
            seen.add(e)
            norm.append(e)
        object.__setattr__(self, "nodes", tuple(sorted(node_set)))
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        labels = {
            _normalize_edge(*e): dict(rec) for e, rec in dict(self.edge_labels).items()
        }
        for e in labels:
            if e not in seen:
                raise TrajectoryError(f"label on undeclared edge {e}")
        object.__setattr__(self, "edge_labels", labels)
        adjacency: dict[int, tuple[int, ...]] = {}
        for n in self.nodes:
            adjacency[n] = tuple(sorted({v if u == n else u for u, v in self.edges if n in (u, v)}))
        object.__setattr__(self, "_adjacency", adjacency)

    def neighbors(self, node: int) -> tuple[int, ...]:
        try:
            return self._adjacency[node]  # type: ignore[attr-defined]
        except KeyError:
            raise TrajectoryError(f"node {node} not in graph") from None

    def has_edge(self, u: int, v: int) -> bool:
        return _normalize_edge(u, v) in set(self.edges)


class GraphTrajectory:
    """Time-indexed node and edge labelings of a fixed graph.

    Node labels must be total: a value for every (node, feature, t) with
    t in 0..horizon.  Edge features fall back to the graph's static edge
    labels when no time-varying record exists.
    """

    def __init__(
        self,
        graph: Graph,
        node_labels: Mapping[int, Mapping[str, Iterable[float]]],
        edge_labels: Mapping[tuple[int, int], Mapping[str, Iterable[float]]] | None = None,
        meta: Mapping[str, object] | None = None,
    ) -> None:
        self.graph = graph
        self._node: dict[int, dict[str, tuple[float, ...]]] = {
            n: {f: tuple(float(x) for x in series) for f, series in rec.items()}
            for n, rec in node_labels.items()
        }
        self._edge: dict[tuple[int, int], dict[str, tuple[float, ...]]] = {}
        for e, rec in (edge_labels or {}).items():
            self._edge[_normalize_edge(*e)] = {
                f: tuple(float(x) for x in series) for f, series in rec.items()
            }
        self.meta: dict[str, object] = dict(meta or {})

        lengths = {len(s) for rec in self._node.values() for s in rec.values()}
        if not lengths:
            raise TrajectoryError("trajectory has no node labels")
        if len(lengths) != 1:
            raise TrajectoryError("node label series have inconsistent lengths")
        if set(self._node) != set(graph.nodes):
            raise TrajectoryError("node labels must cover every graph node")
        features = {tuple(sorted(rec)) for rec in self._node.values()}
        if len(features) != 1:
            raise TrajectoryError("every node must carry the same feature set")
        self.horizon = lengths.pop() - 1
        if self.horizon < 0:
            raise TrajectoryError("horizon must be >= 0")
        for e, rec in self._edge.items():
            for f, series in rec.items():
                if len(series) != self.horizon + 1:
                    raise TrajectoryError(f"edge series {e}/{f} has wrong length")

    # -- queries ---------------------------------------------------------

    def node_features(self) -> tuple[str, ...]:
        first = next(iter(self._node.values()))
        return tuple(sorted(first))

    def node_value(self, node: int, feature: str, t: int) -> float:
        try:
            series = self._node[node][feature]
        except KeyError:
            if node not in self._node:
                raise TrajectoryError(f"node {node} not in trajectory") from None
            raise TrajectoryError(f"unknown node feature {feature!r}") from None
        if not 0 <= t <= self.horizon:
            raise TrajectoryError(f"time {t} outside [0, {self.horizon}]")
        return series[t]

    def edge_value(self, edge: tuple[int, int], feature: str, t: int) -> float:
        e = _normalize_edge(*edge)
        rec = self._edge.get(e)
        if rec is not None and feature in rec:
            if not 0 <= t <= self.horizon:
                raise TrajectoryError(f"time {t} outside [0, {self.horizon}]")
            return rec[feature][t]
        static = self.graph.edge_labels.get(e)
        if static is not None and feature in static:
            return float(static[feature])
        raise TrajectoryError(f"unknown edge feature {feature!r} on {e}")

    def snapshot(self, t: int) -> dict[int, dict[str, float]]:
        """The full node labeling at time ``t``."""
        return {n: {f: rec[f][t] for f in rec} for n, rec in self._node.items()}

    # -- serialization ---------------------------------------------------

    def to_text(self) -> str:
        """Line-oriented dump: meta comments, headers, then one record per
        (t, node) plus edge records ``t u-v feat=val``."""
        lines: list[str] = []
        for key in sorted(self.meta):
            value = self.meta[key]
            if key == "actions":
                value = ",".join(str(int(a)) for a in value)  # type: ignore[union-attr]
            lines.append(f"# {key}={value}")
        lines.append("nodes " + " ".join(str(n) for n in self.graph.nodes))
        lines.append("edges " + " ".join(f"{u}-{v}" for u, v in self.graph.edges))
        features = self.node_features()
        edge_feats = sorted({f for rec in self._edge.values() for f in rec}
                            | {f for rec in self.graph.edge_labels.values() for f in rec})
        for t in range(self.horizon + 1):
            for n in self.graph.nodes:
                vals = " ".join(f"{f}={self._node[n][f][t]:.6f}" for f in features)
                lines.append(f"{t} {n} {vals}")
            for e in self.graph.edges:
                vals = " ".join(
                    f"{f}={self.edge_value(e, f, t):.6f}"
                    for f in edge_feats
                    if self._has_edge_feature(e, f)
                )
                if vals:
                    lines.append(f"{t} {e[0]}-{e[1]} {vals}")
        return "\n".join(lines) + "\n"

    def _has_edge_feature(self, edge: tuple[int, int], feature: str) -> bool:
        e = _normalize_edge(*edge)
        if feature in self._edge.get(e, {}):
            return True
        return feature in self.graph.edge_labels.get(e, {})

    @classmethod
    def from_text(cls, text: str) -> "GraphTrajectory":
        meta: dict[str, object] = {}
        nodes: list[int] = []
        edges: list[tuple[int, int]] = []
        node_records: dict[tuple[int, int], dict[str, float]] = {}
        edge_records: dict[tuple[tuple[int, int], int], dict[str, float]] = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    key = key.strip()
                    if key == "actions":
                        meta[key] = tuple(int(x) for x in val.split(",") if x)
                    else:
                        meta[key] = val.strip()
                continue
            if line.startswith("nodes "):
                nodes = [int(x) for x in line.split()[1:]]
                continue
            if line.startswith("edges "):
                for tok in line.split()[1:]:
                    u, _, v = tok.partition("-")
                    edges.append((int(u), int(v)))
                continue
            parts = line.split()
            t = int(parts[0])
            target = parts[1]
            feats = {}
            for tok in parts[2:]:
                name, _, val = tok.partition("=")
                feats[name] = float(val)
            if "-" in target:
                u, _, v = target.partition("-")
                edge_records[(_normalize_edge(int(u), int(v)), t)] = feats
            else:
                node_records[(int(target), t)] = feats
        if not nodes:
            nodes = sorted({n for n, _ in node_records})
        graph = Graph(tuple(nodes), tuple(edges))
        horizon = max(t for _, t in node_records)
        features = sorted({f for rec in node_records.values() for f in rec})
        node_labels = {
            n: {f: [node_records[(n, t)][f] for t in range(horizon + 1)] for f in features}
            for n in graph.nodes
        }
        edge_feats = sorted({f for rec in edge_records.values() for f in rec})
        edge_labels: dict[tuple[int, int], dict[str, list[float]]] = {}
        if edge_records:
            for e in graph.edges:
                rec = {}
                for f in edge_feats:
                    if all((e, t) in edge_records and f in edge_records[(e, t)]
                           for t in range(horizon + 1)):
                        rec[f] = [edge_records[(e, t)][f] for t in range(horizon + 1)]
                if rec:
                    edge_labels[e] = rec
        return cls(graph, node_labels, edge_labels, meta)
