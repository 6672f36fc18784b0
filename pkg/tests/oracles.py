"""Independent reference implementations used only by the tests.

Each oracle re-derives a result through a deliberately different route
from the library code: boolean semantics by direct enumeration, neighbor
reachability by exhaustive path listing, posterior equations by explicit
matrix inversion, optimal values by value iteration, and the
counterfactual scoring loop as a straight-line twin.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from gtlcirl.counterexamples import generate_counterfactual
from gtlcirl.formulas import (
    Always,
    And,
    Atomic,
    Eventually,
    ExistsN,
    Not,
    Or,
)
from gtlcirl.robustness import any_node_robustness


def boolean_satisfies(traj, formula, node, t):
    """Direct boolean semantics: atoms satisfied iff feature >= threshold."""
    if isinstance(formula, Atomic):
        return traj.node_value(node, formula.feature, t) >= formula.threshold
    if isinstance(formula, Not):
        return not boolean_satisfies(traj, formula.inner, node, t)
    if isinstance(formula, And):
        return boolean_satisfies(traj, formula.left, node, t) and boolean_satisfies(
            traj, formula.right, node, t
        )
    if isinstance(formula, Or):
        return boolean_satisfies(traj, formula.left, node, t) or boolean_satisfies(
            traj, formula.right, node, t
        )
    if isinstance(formula, Eventually):
        return any(
            boolean_satisfies(traj, formula.inner, node, k)
            for k in range(t + formula.lo, t + formula.hi + 1)
        )
    if isinstance(formula, Always):
        return all(
            boolean_satisfies(traj, formula.inner, node, k)
            for k in range(t + formula.lo, t + formula.hi + 1)
        )
    if isinstance(formula, ExistsN):
        reached = paths_endpoints(traj, node, formula.edge_props, t)
        count = sum(1 for nb in reached if boolean_satisfies(traj, formula.inner, nb, t))
        return count >= formula.count
    raise AssertionError(f"unknown node {formula!r}")


def paths_endpoints(traj, node, edge_props, t):
    """Endpoints of simple predicate-satisfying paths, by brute force
    enumeration of all node sequences of the right length."""
    nodes = traj.graph.nodes
    length = len(edge_props)
    endpoints = set()
    for sequence in itertools.product(nodes, repeat=length):
        path = (node, *sequence)
        if len(set(path)) != len(path):
            continue
        ok = True
        for i in range(length):
            u, v = path[i], path[i + 1]
            if not traj.graph.has_edge(u, v):
                ok = False
                break
            if not edge_props[i].passes(traj.edge_value((u, v), edge_props[i].feature, t)):
                ok = False
                break
        if ok:
            endpoints.add(path[-1])
    return endpoints


def sne_twin(buffer, spec, env, iterations, eps_d1, eps_d2, rng):
    """Straight-line re-statement of the counterfactual scoring loop."""
    sufficiency = []
    necessity = []
    existence = []
    for i in range(iterations):
        idx = int(rng.integers(0, len(buffer)))
        tau = buffer[idx]
        tau_prime = generate_counterfactual(env, tau, spec, i % 2 == 1, rng)
        rho_c = any_node_robustness(tau_prime, spec.cause, 0)
        rho_e = any_node_robustness(tau_prime, spec.effect, 0)
        if rho_c > eps_d1:
            sufficiency.append(rho_e)
        if rho_c < -eps_d2:
            necessity.append(rho_e)
        existence.append(rho_c)
    s = sum(sufficiency) / len(sufficiency) if sufficiency else 0.0
    n = math.exp(-(sum(necessity) / len(necessity))) if necessity else 0.0
    e = math.exp(-(sum(existence) / len(existence)))
    return s, n, e, not sufficiency, not necessity


def gp_posterior_direct(train_x, train_y, query, length_scale, noise, signal=1.0):
    """Posterior mean/variance via the textbook equations with an explicit
    matrix inverse (normalized inputs expected)."""
    train_x = np.atleast_2d(np.asarray(train_x, dtype=float))
    query = np.atleast_1d(np.asarray(query, dtype=float))

    def k(a, b):
        return signal * math.exp(-float(np.sum((a - b) ** 2)) / (2 * length_scale**2))

    n = train_x.shape[0]
    gram = np.array([[k(train_x[i], train_x[j]) for j in range(n)] for i in range(n)])
    gram += noise * np.eye(n)
    k_star = np.array([k(train_x[i], query) for i in range(n)])
    inv = np.linalg.inv(gram)
    mean = float(k_star @ inv @ np.asarray(train_y))
    var = float(signal - k_star @ inv @ k_star)
    return mean, var


def value_iteration(n_states, n_actions, transition, reward, gamma, tol=1e-12):
    """Q* for a small deterministic MDP given callables s,a -> s' and r."""
    q = np.zeros((n_states, n_actions))
    while True:
        q_new = np.zeros_like(q)
        for s in range(n_states):
            for a in range(n_actions):
                s2 = transition(s, a)
                q_new[s, a] = reward(s, a, s2) + gamma * np.max(q[s2])
        if np.max(np.abs(q_new - q)) < tol:
            return q_new
        q = q_new
