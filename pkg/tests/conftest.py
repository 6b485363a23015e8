"""Shared test helpers: independently coded oracles and instance builders.

The checkers here deliberately avoid the library's own vectorized code
paths (pure-Python loops, math.fsum) so that agreement is meaningful.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from hubmedian.model import Instance, Solution
from hubmedian.rng import RngStream, derive_stream


def make_instance(seed: int, n: int, p: int, *, chi: float = 1.0, alpha: float = 0.75,
                  delta: float = 1.0, symmetric: bool = True,
                  self_flow: bool = False) -> Instance:
    """Random instance built directly from an RngStream (independent of the
    library's generator)."""
    rng = derive_stream(seed, 0xBEEF)
    dist = np.array([[rng.random() * 100 for _ in range(n)] for _ in range(n)])
    if symmetric:
        dist = dist + dist.T
    np.fill_diagonal(dist, 0.0)
    flow = np.array([[float(rng.randint(101)) for _ in range(n)] for _ in range(n)])
    if not self_flow:
        np.fill_diagonal(flow, 0.0)
    return Instance(n=n, p=p, dist=dist, flow=flow, chi=chi, alpha=alpha, delta=delta,
                    name=f"test-{seed}")


def random_feasible_solution(inst: Instance, rng: RngStream) -> Solution:
    """Random hub set with a *random* (not nearest) feasible allocation."""
    nodes = list(range(inst.n))
    hubs = []
    while len(hubs) < inst.p:
        cand = nodes[rng.randint(len(nodes))]
        if cand not in hubs:
            hubs.append(cand)
    hubs.sort()
    alloc = [hubs[rng.randint(len(hubs))] for _ in range(inst.n)]
    for h in hubs:
        alloc[h] = h
    hub = np.zeros(inst.n, dtype=bool)
    hub[hubs] = True
    return Solution(hub=hub, alloc=np.array(alloc))


def naive_objective(inst: Instance, sol: Solution) -> float:
    """Per-pair path-sum: sum_ij W_ij (chi d(i,S_i) + alpha d(S_i,S_j) + delta d(j,S_j)).

    Written as the literal double loop with fsum accumulation; the library's
    aggregated evaluator must agree with this.
    """
    d = inst.dist.tolist()
    w = inst.flow.tolist()
    s = sol.alloc.tolist()
    terms = []
    for i in range(inst.n):
        for j in range(inst.n):
            if w[i][j]:
                terms.append(w[i][j] * (inst.chi * d[i][s[i]]
                                        + inst.alpha * d[s[i]][s[j]]
                                        + inst.delta * d[j][s[j]]))
    return math.fsum(terms)


def independent_feasibility_check(sol: Solution, inst: Instance) -> list[str]:
    """Re-implementation of the four feasibility rules with plain loops."""
    problems = []
    hubs = {i for i in range(inst.n) if sol.hub[i]}
    if len(hubs) != inst.p:
        problems.append("hub count")
    for i in range(inst.n):
        if int(sol.alloc[i]) not in hubs:
            problems.append(f"node {i} -> closed")
    for k in hubs:
        if int(sol.alloc[k]) != k:
            problems.append(f"hub {k} not self-allocated")
    return problems


@pytest.fixture
def small_instance():
    return make_instance(11, n=7, p=2)
