"""Exhaustive reference solvers for small instances.

exact_optimum enumerates every p-subset of nodes as the hub set and, for
each, every assignment of the remaining spokes to those hubs — the true
optimum of the problem.  restricted_optimum enumerates only the p-subsets
under nearest allocation, i.e. the search space the GA actually walks, so
it is the sharpest target a correct engine run can reach.

Both return witnesses with deterministic tie-breaks: lexicographically
smallest hub set, then (for exact_optimum) lexicographically smallest
allocation, spokes enumerated in index order with mixed-radix counters.
All reported values come from the shared evaluation module, so engine
results compare against them without cross-implementation float noise.
"""

from __future__ import annotations

import itertools
from math import comb

import numpy as np

from .evaluation import objective
from .model import Instance, Solution, nearest_allocation

DEFAULT_LIMIT = 10_000_000

# exact screening evaluates candidates in chunks of at most this many cells
_CHUNK_CELLS = 4_000_000


class EnumerationLimitError(ValueError):
    def __init__(self, required: int, limit: int):
        self.required = required
        self.limit = limit
        super().__init__(
            f"enumeration needs {required} candidates, over the limit of {limit}; "
            f"raise `limit` explicitly to allow it"
        )


def restricted_optimum(inst: Instance, limit: int = DEFAULT_LIMIT) -> tuple[Solution, float]:
    """Best solution whose allocation is nearest-hub, by full hub-set sweep."""
    count = comb(inst.n, inst.p)
    if count > limit:
        raise EnumerationLimitError(count, limit)
    best_raw = None
    best_sol = None
    for combo in itertools.combinations(range(inst.n), inst.p):
        sol = nearest_allocation(combo, inst)
        raw = objective(inst, sol).raw_total
        if best_raw is None or raw < best_raw:
            best_raw, best_sol = raw, sol
    return best_sol, best_raw


def exact_optimum(inst: Instance, limit: int = DEFAULT_LIMIT) -> tuple[Solution, float]:
    """Global optimum by enumerating hub sets x spoke assignments."""
    n, p = inst.n, inst.p
    m = n - p
    count = comb(n, p) * p**m
    if count > limit:
        raise EnumerationLimitError(count, limit)

    digits = _mixed_radix_rows(m, p)  # (p^m, m), lexicographic
    wv = inst.chi * inst.out_flow + inst.delta * inst.in_flow
    node_idx = np.arange(n)

    best_raw = None
    best_sol = None
    for combo in itertools.combinations(range(n), p):
        hubs = np.array(combo, dtype=np.int64)
        spokes = np.setdiff1d(node_idx, hubs)
        rows = digits.shape[0]
        alloc_block = np.empty((rows, n), dtype=np.int64)
        alloc_block[:, hubs] = hubs
        if m:
            alloc_block[:, spokes] = hubs[digits]

        screened = _screen(inst, hubs, alloc_block, wv)
        smin = float(screened.min())
        margin = 1e-9 * max(abs(smin), 1.0)
        if best_raw is not None and smin > best_raw + margin:
            continue
        for row in np.flatnonzero(screened <= smin + margin):
            sol = _solution_for(hubs, alloc_block[row], n)
            raw = objective(inst, sol).raw_total
            if best_raw is None or raw < best_raw:
                best_raw, best_sol = raw, sol
    return best_sol, best_raw


def _solution_for(hubs: np.ndarray, alloc: np.ndarray, n: int) -> Solution:
    hub = np.zeros(n, dtype=bool)
    hub[hubs] = True
    return Solution(hub=hub, alloc=alloc)


def _mixed_radix_rows(m: int, p: int) -> np.ndarray:
    """All p^m digit rows of width m in lexicographic order (first digit most
    significant)."""
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*([np.arange(p, dtype=np.int64)] * m), indexing="ij")
    return np.stack(grids).reshape(m, -1).T


def _screen(inst: Instance, hubs: np.ndarray, alloc_block: np.ndarray,
            wv: np.ndarray) -> np.ndarray:
    """Approximate raw totals for a block of allocations over one hub set.

    Used only to shortlist candidates; every survivor is re-scored through
    the shared evaluator, so tiny summation-order differences cannot change
    the returned optimum.
    """
    n = inst.n
    rows = alloc_block.shape[0]
    hub_dist = inst.dist[np.ix_(hubs, hubs)]
    out = np.empty(rows)
    chunk = max(1, _CHUNK_CELLS // (n * n))
    for start in range(0, rows, chunk):
        block = alloc_block[start:start + chunk]
        legs = inst.dist[np.arange(n)[None, :], block]
        spoke_cost = legs @ wv
        clusters = np.searchsorted(hubs, block)
        pair_cost = hub_dist[clusters[:, :, None], clusters[:, None, :]]
        transfer = inst.alpha * (pair_cost * inst.flow[None, :, :]).sum(axis=(1, 2))
        out[start:start + chunk] = spoke_cost + transfer
    return out
