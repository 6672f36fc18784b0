"""Formula AST for the bounded (eventually/always) fragment of GTL.

Formulas are immutable trees built from threshold atoms, boolean
connectives, bounded temporal windows and a counting neighbor
quantifier.  Disjunction is a first-class node with max semantics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


class FormulaError(ValueError):
    """Raised when a formula violates a structural constraint."""


@dataclass(frozen=True)
class Atomic:
    """Threshold predicate ``feature >= threshold`` on a node label."""

    feature: str
    threshold: float


@dataclass(frozen=True)
class Not:
    inner: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Eventually:
    """Bounded eventually: the inner formula holds somewhere in [lo, hi]."""

    lo: int
    hi: int
    inner: "Formula"

    def __post_init__(self) -> None:
        _check_interval(self.lo, self.hi)


@dataclass(frozen=True)
class Always:
    """Bounded always: the inner formula holds throughout [lo, hi]."""

    lo: int
    hi: int
    inner: "Formula"

    def __post_init__(self) -> None:
        _check_interval(self.lo, self.hi)


@dataclass(frozen=True)
class EdgeProp:
    """Boolean predicate on an edge label, e.g. ``P > 0``."""

    feature: str
    op: str
    value: float

    _OPS = (">=", ">", "<=", "<", "=")

    def __post_init__(self) -> None:
        if self.op not in self._OPS:
            raise FormulaError(f"unsupported edge operator {self.op!r}")

    def passes(self, value: float) -> bool:
        if self.op == ">=":
            return value >= self.value
        if self.op == ">":
            return value > self.value
        if self.op == "<=":
            return value <= self.value
        if self.op == "<":
            return value < self.value
        return value == self.value


@dataclass(frozen=True)
class ExistsN:
    """At least ``count`` nodes reached through the edge-predicate chain
    satisfy the inner formula."""

    count: int
    edge_props: tuple[EdgeProp, ...]
    inner: "Formula"

    def __post_init__(self) -> None:
        if self.count < 1:
            raise FormulaError("neighbor quantifier count must be >= 1")
        if not self.edge_props:
            raise FormulaError("neighbor quantifier needs at least one edge predicate")
        object.__setattr__(self, "edge_props", tuple(self.edge_props))


Formula = Union[Atomic, Not, And, Or, Eventually, Always, ExistsN]


def _check_interval(lo: int, hi: int) -> None:
    if lo < 0 or hi < 0:
        raise FormulaError(f"negative interval bound in [{lo},{hi}]")
    if lo > hi:
        raise FormulaError(f"inverted interval bounds [{lo},{hi}]")


def horizon(formula: Formula) -> int:
    """Maximum look-ahead, in steps, needed to evaluate the formula."""
    if isinstance(formula, Atomic):
        return 0
    if isinstance(formula, Not):
        return horizon(formula.inner)
    if isinstance(formula, (And, Or)):
        return max(horizon(formula.left), horizon(formula.right))
    if isinstance(formula, (Eventually, Always)):
        return formula.hi + horizon(formula.inner)
    if isinstance(formula, ExistsN):
        return horizon(formula.inner)
    raise FormulaError(f"unknown formula node {formula!r}")


def iter_subformulas(formula: Formula) -> Iterator[Formula]:
    """Pre-order walk over all subformulas including the root."""
    yield formula
    if isinstance(formula, Not):
        yield from iter_subformulas(formula.inner)
    elif isinstance(formula, (And, Or)):
        yield from iter_subformulas(formula.left)
        yield from iter_subformulas(formula.right)
    elif isinstance(formula, (Eventually, Always, ExistsN)):
        yield from iter_subformulas(formula.inner)


def _num(value: float) -> str:
    return repr(float(value))


def _wrap(inner: Formula) -> str:
    """Parenthesize binary children so the printed text reparses to the
    same tree."""
    text = format_formula(inner)
    if isinstance(inner, (And, Or)):
        return f"({text})"
    return text


def format_formula(formula: Formula) -> str:
    """Concrete-syntax rendering; ``parse_formula`` round-trips it."""
    if isinstance(formula, Atomic):
        return f"({formula.feature} >= {_num(formula.threshold)})"
    if isinstance(formula, Not):
        return "!" + _wrap(formula.inner)
    if isinstance(formula, And):
        left = _wrap(formula.left) if isinstance(formula.left, Or) else format_formula(formula.left)
        return f"{left} & {_wrap(formula.right)}"
    if isinstance(formula, Or):
        return f"{format_formula(formula.left)} | {_wrap(formula.right)}"
    if isinstance(formula, Eventually):
        return f"F[{formula.lo},{formula.hi}]{_wrap(formula.inner)}"
    if isinstance(formula, Always):
        return f"G[{formula.lo},{formula.hi}]{_wrap(formula.inner)}"
    if isinstance(formula, ExistsN):
        props = ",".join(f"{p.feature}{p.op}{_num(p.value)}" for p in formula.edge_props)
        return f"E{formula.count}{{{props}}}{_wrap(formula.inner)}"
    raise FormulaError(f"unknown formula node {formula!r}")
