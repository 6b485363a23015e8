"""Island-model GA orchestration.

R independent islands each evolve a population of n individuals spawned by
perturbing a shared ancestor; an island runs N1 inner generations, each
generation pairing individuals (2j, 2j+1) for crossover, mutating both
children, correcting them to feasibility and evaluating them; the best
child becomes the island's local ancestor for the next generation.  After
N1 generations every island reports a champion, the best champion across
islands (ties to the lowest island index) is reduced at a barrier, and the
winner seeds the next of N2 outer rounds.  Islands exchange nothing else:
champion selection at the barrier replaces migration.

Default mode is elitist: the global ancestor is also inserted as individual
0 of every generation's population, and the cross-island winner replaces
the incumbent only when it improves it, so the reported trace never
increases.  `strict_paper=True` disables both retentions for fidelity
experiments: populations are fully perturbed, islands report their final
local ancestor, and the winner seeds the next round unconditionally.

Determinism: each island owns private streams derived from (seed, island,
role); islands synchronize only at round barriers and are always reduced in
island order, so results are identical for any worker count.
"""

from __future__ import annotations

import enum
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .evaluation import FitnessMode, objective
from .model import Instance, Solution, initial_solution, nearest_allocation
from .operators import correct_hub_set, crossover_hub_arrays, swap_random_hub_spoke
from .rng import RngStream, derive_stream


class Role(enum.IntEnum):
    """Stream roles: one independent stream per (island, role)."""

    POPULATION = 0
    CROSSOVER = 1
    MUTATION = 2


def resolve_rng(seed: int, island: int, role: Role | int) -> RngStream:
    """Independent deterministic stream for (seed, island, role).

    Splitting chains the SplitMix64 finalizer over the keys (see rng module);
    identical arguments always yield identical streams.
    """
    return derive_stream(seed, island, int(role))


@dataclass(frozen=True)
class GaParams:
    """Search budget and seeding knobs.

    Defaults are configuration, not contract; benchmark runs always pin
    them explicitly.  perturb_strength=None resolves to min(p, 3) for the
    instance being solved.
    """

    islands: int = 64
    pop_size: int = 64
    inner_iters: int = 50
    outer_iters: int = 10
    seed: int = 0
    perturb_strength: int | None = None
    strict_paper: bool = False

    def __post_init__(self):
        for label, v in (("islands", self.islands), ("pop_size", self.pop_size),
                         ("inner_iters", self.inner_iters), ("outer_iters", self.outer_iters)):
            if v < 1:
                raise ValueError(f"{label} must be >= 1, got {v}")
        if self.pop_size % 2:
            raise ValueError(f"pop_size must be even for pairwise crossover, got {self.pop_size}")
        if self.perturb_strength is not None and self.perturb_strength < 1:
            raise ValueError(f"perturb_strength must be >= 1, got {self.perturb_strength}")

    def resolved_strength(self, p: int) -> int:
        s = self.perturb_strength if self.perturb_strength is not None else min(p, 3)
        if s > p:
            raise ValueError(f"perturb_strength {s} exceeds p={p}")
        return s


@dataclass(frozen=True)
class SolveReport:
    best_solution: Solution
    raw_objective: float
    scaled_fitness: float
    trace: tuple[float, ...]
    evaluations: int
    wall_time: float
    interrupted: bool = False


class _Evaluator:
    """Evaluates hub sets under nearest allocation, memoizing by hub set.

    The objective is a pure function of the hub set, so the memo changes
    nothing observable.  An audit callback disables the memo and receives
    every logically evaluated Solution (tests use it with workers=1).
    """

    def __init__(self, inst: Instance, mode: FitnessMode, audit=None):
        self.inst = inst
        self.mode = mode
        self.audit = audit
        self._memo: dict[bytes, tuple[float, float]] = {}

    def evaluate(self, hubs: np.ndarray) -> tuple[float, float]:
        """(raw, scaled) cost of the sorted hub index array."""
        key = hubs.tobytes()
        if self.audit is None:
            hit = self._memo.get(key)
            if hit is not None:
                return hit
        sol = nearest_allocation(hubs, self.inst)
        bd = objective(self.inst, sol, self.mode)
        if self.audit is not None:
            self.audit(sol)
        out = (bd.raw_total, bd.scaled_fitness)
        self._memo[key] = out
        return out


def _indicator(hubs: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=bool)
    out[hubs] = True
    return out


def _run_island(inst: Instance, params: GaParams, strength: int, ancestor_hub: np.ndarray,
                rngs: tuple[RngStream, RngStream, RngStream], evaluator: _Evaluator):
    """One island for one outer round.  Returns ((raw, scaled, hubs), evals)."""
    pop_rng, cross_rng, mut_rng = rngs
    n_pop = params.pop_size
    local_hub = ancestor_hub
    best = None
    champ = None
    evals = 0
    for _ in range(params.inner_iters):
        pop = [local_hub] if not params.strict_paper else []
        while len(pop) < n_pop:
            h = local_hub
            for _ in range(strength):
                h = swap_random_hub_spoke(h, pop_rng)
            pop.append(h)
        champ = None
        for j in range(0, n_pop, 2):
            c1, c2 = crossover_hub_arrays(pop[j], pop[j + 1], cross_rng)
            for child in (c1, c2):
                child = swap_random_hub_spoke(child, mut_rng)
                hubs = correct_hub_set(child, inst)
                raw, scaled = evaluator.evaluate(hubs)
                evals += 1
                if champ is None or raw < champ[0]:
                    champ = (raw, scaled, hubs)
        local_hub = _indicator(champ[2], inst.n)
        if best is None or champ[0] < best[0]:
            best = champ
    return (champ if params.strict_paper else best), evals


def solve(inst: Instance, params: GaParams, mode: FitnessMode = FitnessMode.RAW,
          workers: int | None = None, audit=None) -> SolveReport:
    """Run the island-model GA and return the best solution found.

    `workers` sizes the thread pool executing islands; it never affects the
    result.  The default is sequential (1): the evaluation kernels hold the
    GIL, so extra threads mostly add contention.  `audit`, if given, is
    called with every Solution the engine evaluates (including the seed
    ancestor); use workers=1 with it.
    """
    t0 = time.perf_counter()
    strength = params.resolved_strength(inst.p)
    evaluator = _Evaluator(inst, mode, audit=audit)

    seed_hubs = initial_solution(inst).hubs
    inc_raw, inc_scaled = evaluator.evaluate(seed_hubs)
    inc_hubs = seed_hubs
    best_raw, best_scaled, best_hubs = inc_raw, inc_scaled, inc_hubs

    island_rngs = [
        (resolve_rng(params.seed, i, Role.POPULATION),
         resolve_rng(params.seed, i, Role.CROSSOVER),
         resolve_rng(params.seed, i, Role.MUTATION))
        for i in range(params.islands)
    ]

    trace: list[float] = []
    evaluations = 0
    interrupted = False
    n_workers = 1 if workers is None else max(1, workers)
    n_workers = min(n_workers, params.islands)

    try:
        for _ in range(params.outer_iters):
            # elitist: inc_* is the retained incumbent; strict: the last champion
            ancestor_hub = _indicator(inc_hubs, inst.n)
            if n_workers == 1:
                results = [_run_island(inst, params, strength, ancestor_hub, island_rngs[i],
                                       evaluator)
                           for i in range(params.islands)]
            else:
                with ThreadPoolExecutor(max_workers=n_workers) as pool:
                    futures = [pool.submit(_run_island, inst, params, strength, ancestor_hub,
                                           island_rngs[i], evaluator)
                               for i in range(params.islands)]
                    results = [f.result() for f in futures]
            champion = None
            for (cand, evals) in results:
                evaluations += evals
                if champion is None or cand[0] < champion[0]:
                    champion = cand
            if params.strict_paper:
                inc_raw, inc_scaled, inc_hubs = champion
                if champion[0] < best_raw:
                    best_raw, best_scaled, best_hubs = champion
                trace.append(champion[1])
            else:
                if champion[0] < inc_raw:
                    inc_raw, inc_scaled, inc_hubs = champion
                best_raw, best_scaled, best_hubs = inc_raw, inc_scaled, inc_hubs
                trace.append(inc_scaled)
    except KeyboardInterrupt:
        interrupted = True

    best_solution = nearest_allocation(best_hubs, inst)
    return SolveReport(
        best_solution=best_solution,
        raw_objective=best_raw,
        scaled_fitness=best_scaled,
        trace=tuple(trace),
        evaluations=evaluations,
        wall_time=time.perf_counter() - t0,
        interrupted=interrupted,
    )
