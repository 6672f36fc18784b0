"""Seeded, cloneable, interveneable discrete-time network simulators."""

from .base import Environment, InterventionPlan, PerturbableVariable
from .gene import GeneNetworkEnv, GeneParams
from .grid import PowerGridEnv, GridParams

__all__ = [
    "Environment",
    "GeneNetworkEnv",
    "GeneParams",
    "GridParams",
    "InterventionPlan",
    "PerturbableVariable",
    "PowerGridEnv",
]


def make_environment(name: str, params: dict | None = None, topology_seed: int = 0):
    """Factory over the built-in simulators."""
    if name == "gene":
        return GeneNetworkEnv(GeneParams(**(params or {})), topology_seed=topology_seed)
    if name == "grid":
        return PowerGridEnv(GridParams(**(params or {})))
    raise ValueError(f"unknown environment {name!r}")
