import numpy as np
import pytest

from hubmedian.engine import GaParams, Role, resolve_rng, solve
from hubmedian.evaluation import FitnessMode, objective
from hubmedian.model import validate
from hubmedian.oracle import exact_optimum, restricted_optimum

from conftest import make_instance

SMALL = GaParams(islands=8, pop_size=16, inner_iters=20, outer_iters=5,
                 seed=1, perturb_strength=2)


class TestResolveRng:
    def test_same_arguments_same_stream(self):
        a = resolve_rng(42, 3, Role.MUTATION)
        b = resolve_rng(42, 3, Role.MUTATION)
        assert [a.next_u64() for _ in range(1000)] == [b.next_u64() for _ in range(1000)]

    def test_islands_never_collide(self):
        # first 64 outputs pairwise distinct across all island pairs up to 256
        prefixes = {}
        for island in range(256):
            stream = resolve_rng(7, island, Role.POPULATION)
            prefix = tuple(stream.next_u64() for _ in range(64))
            assert prefix not in prefixes.values()
            prefixes[island] = prefix

    def test_adjacent_seeds_differ(self):
        for island in range(16):
            a = resolve_rng(100, island, Role.CROSSOVER)
            b = resolve_rng(101, island, Role.CROSSOVER)
            assert [a.next_u64() for _ in range(64)] != [b.next_u64() for _ in range(64)]

    def test_roles_differ(self):
        a = resolve_rng(5, 0, Role.POPULATION)
        b = resolve_rng(5, 0, Role.MUTATION)
        assert [a.next_u64() for _ in range(64)] != [b.next_u64() for _ in range(64)]


class TestGaParams:
    def test_pop_size_must_be_even(self):
        with pytest.raises(ValueError, match="even"):
            GaParams(pop_size=15)

    def test_counts_must_be_positive(self):
        with pytest.raises(ValueError):
            GaParams(islands=0)
        with pytest.raises(ValueError):
            GaParams(outer_iters=0)

    def test_perturb_strength_checked_against_p(self):
        inst = make_instance(80, n=6, p=2)
        with pytest.raises(ValueError, match="exceeds p"):
            solve(inst, GaParams(islands=1, pop_size=2, inner_iters=1, outer_iters=1,
                                 perturb_strength=5), FitnessMode.RAW)

    def test_default_strength_caps_at_three(self):
        assert GaParams().resolved_strength(2) == 2
        assert GaParams().resolved_strength(10) == 3


class TestSolve:
    def test_p_equals_n_returns_the_singleton(self):
        inst = make_instance(81, n=5, p=5, alpha=0.4)
        params = GaParams(islands=2, pop_size=4, inner_iters=2, outer_iters=3, seed=0)
        report = solve(inst, params, FitnessMode.RAW)
        assert report.best_solution.hub.all()
        expected = 0.4 * float(np.sum(inst.flow * inst.dist))
        assert report.raw_objective == pytest.approx(expected, rel=1e-12)
        assert len(set(report.trace)) == 1

    def test_reaches_restricted_optimum_on_small_instance(self):
        inst = make_instance(82, n=6, p=2)
        _, rr = restricted_optimum(inst)
        report = solve(inst, SMALL, FitnessMode.RAW)
        assert report.raw_objective == rr

    def test_never_beats_exact_optimum(self):
        inst = make_instance(83, n=7, p=2)
        _, er = exact_optimum(inst)
        report = solve(inst, SMALL, FitnessMode.RAW)
        assert objective(inst, report.best_solution).raw_total >= er

    def test_trace_monotone_and_sized(self):
        inst = make_instance(84, n=9, p=3)
        report = solve(inst, SMALL, FitnessMode.STANDARD_MILLI)
        assert len(report.trace) == SMALL.outer_iters
        assert all(b <= a for a, b in zip(report.trace, report.trace[1:]))

    def test_budget_accounting_exact(self):
        inst = make_instance(85, n=8, p=3)
        params = GaParams(islands=3, pop_size=6, inner_iters=4, outer_iters=2, seed=5)
        report = solve(inst, params, FitnessMode.RAW)
        assert report.evaluations == 3 * 6 * 4 * 2

    def test_every_evaluated_individual_is_feasible(self):
        inst = make_instance(86, n=9, p=3)
        seen = []

        def audit(sol):
            seen.append(validate(sol, inst).ok)

        params = GaParams(islands=2, pop_size=4, inner_iters=3, outer_iters=2, seed=9)
        report = solve(inst, params, FitnessMode.RAW, workers=1, audit=audit)
        assert all(seen)
        # every child evaluation plus the one-time seed evaluation
        assert len(seen) == report.evaluations + 1

    def test_returned_allocation_is_nearest(self):
        from hubmedian.model import nearest_allocation

        inst = make_instance(87, n=10, p=3)
        report = solve(inst, SMALL, FitnessMode.RAW)
        sol = report.best_solution
        assert sol == nearest_allocation(sol.hubs, inst)

    def test_worker_count_never_changes_results(self):
        inst = make_instance(88, n=9, p=3)
        reports = [solve(inst, SMALL, FitnessMode.STANDARD_MILLI, workers=w)
                   for w in (1, 4, 16)]
        ref = reports[0]
        for rep in reports[1:]:
            assert rep.raw_objective == ref.raw_objective
            assert rep.trace == ref.trace
            assert rep.evaluations == ref.evaluations
            assert rep.best_solution == ref.best_solution

    def test_scaled_fitness_consistent_with_mode(self):
        inst = make_instance(89, n=8, p=2)
        report = solve(inst, SMALL, FitnessMode.STANDARD_MILLI)
        assert report.scaled_fitness == report.raw_objective * 1e-3

    def test_same_seed_same_result_different_seed_usually_differs(self):
        inst = make_instance(90, n=12, p=4)
        tight = GaParams(islands=2, pop_size=4, inner_iters=2, outer_iters=1, seed=3)
        a = solve(inst, tight, FitnessMode.RAW)
        b = solve(inst, tight, FitnessMode.RAW)
        assert a.raw_objective == b.raw_objective
        assert a.best_solution == b.best_solution
        others = {solve(inst, GaParams(islands=2, pop_size=4, inner_iters=2, outer_iters=1,
                                       seed=s), FitnessMode.RAW).raw_objective
                  for s in range(8)}
        assert len(others) > 1


class TestInterruption:
    def test_interrupt_returns_best_so_far_with_flag(self):
        inst = make_instance(93, n=9, p=3)
        calls = {"count": 0}

        def audit(sol):
            calls["count"] += 1
            if calls["count"] > 40:
                raise KeyboardInterrupt

        params = GaParams(islands=2, pop_size=4, inner_iters=5, outer_iters=5, seed=6)
        report = solve(inst, params, FitnessMode.RAW, workers=1, audit=audit)
        assert report.interrupted
        assert validate(report.best_solution, inst).ok
        assert len(report.trace) < params.outer_iters


class TestStrictPaperMode:
    def test_runs_and_returns_feasible_best(self):
        inst = make_instance(91, n=9, p=3)
        params = GaParams(islands=4, pop_size=8, inner_iters=5, outer_iters=4,
                          seed=2, strict_paper=True)
        report = solve(inst, params, FitnessMode.RAW)
        assert validate(report.best_solution, inst).ok
        assert report.raw_objective <= max(report.trace)
        assert report.evaluations == 4 * 8 * 5 * 4

    def test_differs_from_elitist_dynamics(self):
        # same budget and seed, different retention rule: traces may diverge
        inst = make_instance(92, n=12, p=3)
        base = dict(islands=4, pop_size=8, inner_iters=5, outer_iters=5, seed=4)
        elitist = solve(inst, GaParams(**base), FitnessMode.RAW)
        strict = solve(inst, GaParams(strict_paper=True, **base), FitnessMode.RAW)
        assert elitist.raw_objective <= strict.raw_objective or \
            elitist.trace != strict.trace
