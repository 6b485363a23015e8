"""Problem instances, solutions, and the feasibility rules tying them together.

A problem instance is a complete flow network: per-unit transport costs
``dist``, origin-destination demands ``flow``, the three leg cost factors
(collection ``chi``, inter-hub ``alpha``, distribution ``delta``) and the
number of hubs ``p`` to open.  A solution is the two-array encoding: a
boolean hub indicator plus an allocation array mapping every node to its
serving hub (hubs serve themselves).

Node indices are 0-based everywhere in memory; file formats and display
are 1-based (see the io module).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class StructureError(ValueError):
    """Solution arrays do not structurally match the instance (wrong length,
    index out of range).  Distinct from a feasibility violation."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable problem data.  Safe to share across worker threads.

    dist[i][k] is the unit cost of routing one flow unit on arc (i, k);
    it is not required to be symmetric nor to satisfy the triangle
    inequality (internet-delay data breaks both).  flow[i][i] may be
    nonzero (postal data has self-flows).
    """

    n: int
    p: int
    dist: np.ndarray
    flow: np.ndarray
    chi: float
    alpha: float
    delta: float
    name: str = ""
    out_flow: np.ndarray = field(init=False, repr=False)
    in_flow: np.ndarray = field(init=False, repr=False)
    total_flow: float = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n
        if n < 1:
            raise ValueError(f"node count must be positive, got {n}")
        if not 1 <= self.p <= n:
            raise ValueError(f"hub count p={self.p} outside [1, {n}]")
        dist = np.asarray(self.dist, dtype=np.float64)
        flow = np.asarray(self.flow, dtype=np.float64)
        if dist.shape != (n, n):
            raise ValueError(f"dist must be {n}x{n}, got {dist.shape}")
        if flow.shape != (n, n):
            raise ValueError(f"flow must be {n}x{n}, got {flow.shape}")
        for label, m in (("dist", dist), ("flow", flow)):
            if not np.isfinite(m).all():
                raise ValueError(f"{label} contains non-finite entries")
            if (m < 0).any():
                raise ValueError(f"{label} contains negative entries")
        if np.diagonal(dist).any():
            raise ValueError("dist diagonal must be zero")
        for label, v in (("chi", self.chi), ("alpha", self.alpha), ("delta", self.delta)):
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{label} must be a positive finite real, got {v}")
        object.__setattr__(self, "dist", _readonly(dist))
        object.__setattr__(self, "flow", _readonly(flow))
        object.__setattr__(self, "out_flow", _readonly(flow.sum(axis=1)))
        object.__setattr__(self, "in_flow", _readonly(flow.sum(axis=0)))
        object.__setattr__(self, "total_flow", float(flow.sum()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.n == other.n
            and self.p == other.p
            and (self.chi, self.alpha, self.delta) == (other.chi, other.alpha, other.delta)
            and np.array_equal(self.dist, other.dist)
            and np.array_equal(self.flow, other.flow)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def middle_rank(self) -> np.ndarray:
        """All nodes ordered by ascending distance-row sum (ties: lower index).
        Computed once per instance; the race on first access is benign."""
        try:
            return self._middle_rank
        except AttributeError:
            rank = _readonly(np.argsort(self.dist.sum(axis=1), kind="stable"))
            object.__setattr__(self, "_middle_rank", rank)
            return rank

    def with_p(self, p: int) -> "Instance":
        """Same network with a different hub count."""
        return Instance(self.n, p, self.dist, self.flow,
                        self.chi, self.alpha, self.delta, name=self.name)

    def with_factors(self, chi: float | None = None, alpha: float | None = None,
                     delta: float | None = None) -> "Instance":
        """Same network with some cost factors replaced (None keeps current)."""
        return Instance(
            self.n, self.p, self.dist, self.flow,
            self.chi if chi is None else chi,
            self.alpha if alpha is None else alpha,
            self.delta if delta is None else delta,
            name=self.name,
        )


@dataclass(frozen=True, eq=False)
class Solution:
    """Hub indicator H plus allocation S; hubs are allocated to themselves."""

    hub: np.ndarray
    alloc: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "hub", _readonly(np.asarray(self.hub, dtype=bool)))
        object.__setattr__(self, "alloc", _readonly(np.asarray(self.alloc, dtype=np.int64)))

    @property
    def hubs(self) -> np.ndarray:
        """Sorted array of open hub indices."""
        return np.flatnonzero(self.hub)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Solution):
            return NotImplemented
        return np.array_equal(self.hub, other.hub) and np.array_equal(self.alloc, other.alloc)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...] = ()


def validate(sol: Solution, inst: Instance) -> ValidationResult:
    """Check the four feasibility rules of a solution against an instance.

    Rules: exactly p open hubs; every node allocated to an open hub; every
    hub allocated to itself; allocation entries are well-formed.  Structural
    mismatches (wrong array length, index out of range) raise StructureError
    instead of being reported as violations.  Node indices in violation
    messages are 1-based, matching file formats and display.
    """
    n = inst.n
    if sol.hub.shape != (n,):
        raise StructureError(f"hub array has length {sol.hub.shape[0]}, instance has n={n}")
    if sol.alloc.shape != (n,):
        raise StructureError(f"alloc array has length {sol.alloc.shape[0]}, instance has n={n}")
    if (sol.alloc < 0).any() or (sol.alloc >= n).any():
        bad = int(np.flatnonzero((sol.alloc < 0) | (sol.alloc >= n))[0])
        raise StructureError(f"alloc[{bad}]={int(sol.alloc[bad])} out of range [0, {n})")

    violations: list[str] = []
    open_count = int(sol.hub.sum())
    if open_count != inst.p:
        violations.append(f"{open_count} hubs open, expected exactly p={inst.p}")
    for i in np.flatnonzero(~sol.hub[sol.alloc]):
        violations.append(
            f"node {int(i) + 1} allocated to closed node {int(sol.alloc[i]) + 1}")
    for k in np.flatnonzero(sol.hub & (sol.alloc != np.arange(n))):
        violations.append(
            f"hub {int(k) + 1} not allocated to itself (alloc={int(sol.alloc[k]) + 1})")
    return ValidationResult(ok=not violations, violations=tuple(violations))


def nearest_allocation(hub_set: Iterable[int] | Sequence[int], inst: Instance) -> Solution:
    """Allocate every node to its nearest hub in `hub_set` (ties: lowest index).

    `hub_set` must contain exactly inst.p distinct valid node indices.
    Hubs are allocated to themselves.  The result always validates.
    """
    hubs = np.unique(np.asarray(list(hub_set), dtype=np.int64))
    if hubs.size != inst.p:
        raise ValueError(f"hub set has {hubs.size} distinct nodes, expected p={inst.p}")
    if hubs.size and (hubs[0] < 0 or hubs[-1] >= inst.n):
        raise ValueError(f"hub index out of range [0, {inst.n})")
    alloc = allocate_to_nearest(hubs, inst.dist)
    hub = np.zeros(inst.n, dtype=bool)
    hub[hubs] = True
    return Solution(hub=hub, alloc=alloc)


def allocate_to_nearest(hubs_sorted: np.ndarray, dist: np.ndarray) -> np.ndarray:
    """Allocation array for a sorted hub index array (argmin ties pick the
    first, i.e. lowest-index, hub).  Hot path: no Solution construction."""
    alloc = hubs_sorted[dist[:, hubs_sorted].argmin(axis=1)]
    alloc[hubs_sorted] = hubs_sorted
    return alloc


def middle_nodes(inst: Instance, count: int) -> np.ndarray:
    """The `count` nodes with the smallest distance-row sums, ascending.

    The ranking key is d_i = sum_j dist[i][j], taken on the matrix as given
    (no symmetrization for asymmetric data).  Equal sums break to the lower
    node index.
    """
    if not 1 <= count <= inst.n:
        raise ValueError(f"count={count} outside [1, {inst.n}]")
    return inst.middle_rank[:count]


def initial_solution(inst: Instance) -> Solution:
    """Deterministic seed solution: open the p middle nodes, allocate nearest."""
    return nearest_allocation(middle_nodes(inst, inst.p), inst)
