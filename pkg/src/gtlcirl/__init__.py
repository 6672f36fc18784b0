"""Closed-loop policy learning and causal graph-temporal-logic mining.

The package couples three pieces of machinery on top of two small network
simulators (a gene-regulation network and a simplified power grid):

- a quantitative monitor for graph temporal logic (GTL) formulas,
- tabular Q-learning whose rewards are shaped by formula robustness,
- a Gaussian-process optimizer that refines parameterized cause templates
  from counterexample trajectories.
"""

__version__ = "0.1.0"

from .formulas import (
    Always,
    And,
    Atomic,
    EdgeProp,
    Eventually,
    ExistsN,
    Not,
    Or,
    format_formula,
    horizon,
)
from .graphs import Graph, GraphTrajectory
from .parsing import ParseError, parse_formula
from .robustness import any_node_robustness, eligible_neighbors, robustness

__all__ = [
    "Always",
    "And",
    "Atomic",
    "EdgeProp",
    "Eventually",
    "ExistsN",
    "Graph",
    "GraphTrajectory",
    "Not",
    "Or",
    "ParseError",
    "any_node_robustness",
    "eligible_neighbors",
    "format_formula",
    "horizon",
    "parse_formula",
    "robustness",
    "__version__",
]
