"""Genetic operators: single-point crossover, feasibility correction,
hub/spoke swap mutation, and the perturbation used to spawn island
populations from an ancestor.

Operators are pure functions of their inputs plus an owned RngStream;
replaying a stream replays the outputs.  Concurrent workers must each own
a distinct stream (see engine.resolve_rng).

Crossover produces *raw* hub indicator arrays whose hub counts may differ
from p; the correction operator restores exactly p hubs and re-allocates
every node to its nearest open hub, which makes the allocation array a
derived quantity throughout: the search effectively walks the p-subsets
of nodes.
"""

from __future__ import annotations

import numpy as np

from .model import Instance, Solution, allocate_to_nearest, middle_nodes, nearest_allocation
from .rng import RngStream, derive_stream  # re-exported for callers

__all__ = [
    "RngStream",
    "derive_stream",
    "crossover",
    "crossover_hub_arrays",
    "correction",
    "correct_hub_set",
    "mutation",
    "swap_random_hub_spoke",
    "perturb",
    "StructureMismatch",
]


class StructureMismatch(ValueError):
    """Operator arguments do not structurally agree."""


def crossover_hub_arrays(ha: np.ndarray, hb: np.ndarray,
                         rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Single-point crossover on two raw hub indicator arrays.

    Draws one cut point uniformly from {1, ..., n-1} and exchanges tails.
    For n = 1 there is no interior cut point; both children are copies and
    no draw is consumed.
    """
    n = ha.shape[0]
    if hb.shape[0] != n:
        raise StructureMismatch(f"parent lengths differ: {n} vs {hb.shape[0]}")
    if n == 1:
        return ha.copy(), hb.copy()
    cut = 1 + rng.randint(n - 1)
    child1 = np.concatenate([ha[:cut], hb[cut:]])
    child2 = np.concatenate([hb[:cut], ha[cut:]])
    return child1, child2


def crossover(a: Solution, b: Solution, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Single-point crossover of two feasible parents.

    Children are raw indicator arrays (hub counts unconstrained) and must
    go through correction before use.
    """
    return crossover_hub_arrays(a.hub, b.hub, rng)


def correct_hub_set(raw_hub: np.ndarray, inst: Instance) -> np.ndarray:
    """Repair a raw hub indicator to exactly p open hubs; returns the sorted
    hub index array.

    Too many hubs: repeatedly close the hub carrying the smallest total
    allocated flow (sum of O_i + D_i over its nearest-allocated nodes),
    re-allocating after each closure; ties close the lowest index.  Too few
    (including none): open closed nodes in middle-node rank order.  Total on
    any boolean array.
    """
    raw_hub = np.asarray(raw_hub, dtype=bool)
    if raw_hub.shape != (inst.n,):
        raise StructureMismatch(f"hub array has length {raw_hub.shape[0]}, instance n={inst.n}")
    p = inst.p
    hubs = np.flatnonzero(raw_hub)
    if hubs.size < p:
        is_open = raw_hub.copy()
        need = p - hubs.size
        for node in middle_nodes(inst, inst.n):
            if need == 0:
                break
            if not is_open[node]:
                is_open[node] = True
                need -= 1
        hubs = np.flatnonzero(is_open)
    weight = inst.out_flow + inst.in_flow
    while hubs.size > p:
        alloc = allocate_to_nearest(hubs, inst.dist)
        cluster_of = np.empty(inst.n, dtype=np.int64)
        cluster_of[hubs] = np.arange(hubs.size)
        carried = np.bincount(cluster_of[alloc], weights=weight, minlength=hubs.size)
        hubs = np.delete(hubs, int(carried.argmin()))
    return hubs


def correction(raw_hub: np.ndarray, inst: Instance, rng: RngStream | None = None) -> Solution:
    """Repair a raw hub array into a feasible solution (nearest allocation).

    The repair policy is deterministic; `rng` is accepted for pipeline
    uniformity and never consumed.
    """
    return nearest_allocation(correct_hub_set(raw_hub, inst), inst)


def swap_random_hub_spoke(raw_hub: np.ndarray, rng: RngStream) -> np.ndarray:
    """Close one uniformly chosen open node and open one uniformly chosen
    closed node.  Identity (no draws consumed) when the array is all-open or
    all-closed.  Works on raw arrays; preserves the hub count."""
    opened = np.flatnonzero(raw_hub)
    closed = np.flatnonzero(~raw_hub)
    if opened.size == 0 or closed.size == 0:
        return raw_hub.copy()
    out = raw_hub.copy()
    out[opened[rng.randint(opened.size)]] = False
    out[closed[rng.randint(closed.size)]] = True
    return out


def mutation(sol: Solution, inst: Instance, rng: RngStream) -> Solution:
    """Swap the roles of one random hub and one random non-hub, then
    re-allocate every node to its nearest hub.  Identity when p = n."""
    new_hub = swap_random_hub_spoke(np.asarray(sol.hub, dtype=bool), rng)
    return nearest_allocation(np.flatnonzero(new_hub), inst)


def perturb(ancestor: Solution, inst: Instance, rng: RngStream, strength: int) -> Solution:
    """Apply `strength` successive mutation steps to a copy of the ancestor.

    Intermediate allocations are never consulted by the next swap, so only
    one final nearest-allocation pass is performed; the result and the rng
    consumption are identical to literal mutation composition.
    """
    if not 1 <= strength <= inst.p:
        raise ValueError(f"perturbation strength {strength} outside [1, p={inst.p}]")
    hub = np.asarray(ancestor.hub, dtype=bool)
    for _ in range(strength):
        hub = swap_random_hub_spoke(hub, rng)
    return nearest_allocation(np.flatnonzero(hub), inst)
