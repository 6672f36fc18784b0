"""Lightweight construction counters.

Baseline training modes must never touch the formula, buffer, or GP
machinery; these counters let the harness and tests assert that.
"""

from __future__ import annotations

from collections import Counter

_counts: Counter[str] = Counter()


def increment(name: str) -> None:
    _counts[name] += 1


def snapshot() -> dict[str, int]:
    return dict(_counts)


def delta(before: dict[str, int]) -> dict[str, int]:
    now = snapshot()
    keys = set(before) | set(now)
    return {k: now.get(k, 0) - before.get(k, 0) for k in sorted(keys)}
