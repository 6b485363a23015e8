import numpy as np
import pytest

from hubmedian.model import Solution, middle_nodes, nearest_allocation, validate
from hubmedian.operators import (
    StructureMismatch,
    correct_hub_set,
    correction,
    crossover,
    mutation,
    perturb,
    swap_random_hub_spoke,
)
from hubmedian.rng import derive_stream

from conftest import make_instance


class ScriptedRng:
    """Stands in for RngStream where a test needs forced draws."""

    def __init__(self, values):
        self.values = list(values)

    def randint(self, bound):
        v = self.values.pop(0)
        assert 0 <= v < bound
        return v


def feasible(inst, hubs):
    return nearest_allocation(hubs, inst)


class TestCrossover:
    def test_identical_parents_give_identical_children(self):
        inst = make_instance(41, n=6, p=2)
        a = feasible(inst, {1, 4})
        c1, c2 = crossover(a, a, derive_stream(1))
        assert np.array_equal(c1, a.hub)
        assert np.array_equal(c2, a.hub)

    def test_forced_cut_point(self):
        a = Solution(hub=np.array([1, 1, 0, 0], bool), alloc=np.array([0, 1, 1, 1]))
        b = Solution(hub=np.array([0, 0, 1, 1], bool), alloc=np.array([2, 2, 2, 3]))
        c1, c2 = crossover(a, b, ScriptedRng([1]))  # randint(3)=1 -> cut=2
        assert c1.tolist() == [True, True, True, True]
        assert c2.tolist() == [False, False, False, False]

    def test_children_mirror_each_other(self):
        inst = make_instance(42, n=9, p=3)
        a = feasible(inst, {0, 4, 7})
        b = feasible(inst, {2, 3, 8})
        rng = derive_stream(2)
        for _ in range(50):
            c1, c2 = crossover(a, b, rng)
            assert (c1 | c2).tolist() == (a.hub | b.hub).tolist()
            assert (c1 & c2).tolist() == (a.hub & b.hub).tolist()

    def test_cut_points_uniform(self):
        # parents alternate so the children reveal the cut: first index where
        # child1 leaves parent a.  10,000 draws; each of the n-1 cuts within
        # 3 sigma of the uniform expectation.
        n, draws = 8, 10_000
        inst = make_instance(43, n=n, p=4)
        a = feasible(inst, {0, 2, 4, 6})
        b = feasible(inst, {1, 3, 5, 7})
        rng = derive_stream(3)
        counts = np.zeros(n, dtype=int)
        for _ in range(draws):
            c1, _ = crossover(a, b, rng)
            cut = int(np.flatnonzero(c1 != a.hub)[0])
            counts[cut] += 1
        assert counts[0] == 0 and counts.sum() == draws
        expect = draws / (n - 1)
        sigma = np.sqrt(draws * (1 / (n - 1)) * (1 - 1 / (n - 1)))
        assert (np.abs(counts[1:] - expect) <= 3 * sigma).all()

    def test_length_mismatch_rejected(self):
        inst6 = make_instance(44, n=6, p=2)
        inst7 = make_instance(45, n=7, p=2)
        with pytest.raises(StructureMismatch):
            crossover(feasible(inst6, {0, 1}), feasible(inst7, {0, 1}), derive_stream(4))


class TestCorrection:
    def test_exact_count_preserves_hub_set(self):
        inst = make_instance(46, n=7, p=3)
        raw = np.zeros(7, bool)
        raw[[1, 3, 6]] = True
        sol = correction(raw, inst)
        assert sol.hubs.tolist() == [1, 3, 6]
        assert sol == nearest_allocation({1, 3, 6}, inst)

    def test_all_false_opens_middle_nodes(self):
        inst = make_instance(47, n=8, p=2)
        sol = correction(np.zeros(8, bool), inst)
        assert sol.hubs.tolist() == sorted(middle_nodes(inst, 2).tolist())

    def test_excess_hubs_closed_to_subset(self):
        rng = derive_stream(5)
        for trial in range(50):
            inst = make_instance(4000 + trial, n=6, p=2)
            raw = np.zeros(6, bool)
            chosen = set()
            while len(chosen) < 4:
                chosen.add(rng.randint(6))
            raw[list(chosen)] = True
            sol = correction(raw, inst)
            assert validate(sol, inst).ok
            assert set(sol.hubs.tolist()) <= chosen

    def test_deficit_fills_by_middle_rank(self):
        inst = make_instance(48, n=8, p=4)
        raw = np.zeros(8, bool)
        raw[5] = True
        got = correct_hub_set(raw, inst).tolist()
        fill = [n for n in middle_nodes(inst, 8).tolist() if n != 5][:3]
        assert sorted(got) == sorted(fill + [5])

    def test_total_on_arbitrary_arrays(self):
        rng = derive_stream(6)
        for trial in range(100):
            n = 3 + rng.randint(7)
            p = 1 + rng.randint(n)
            inst = make_instance(5000 + trial, n=n, p=p)
            raw = np.array([rng.randint(2) == 1 for _ in range(n)])
            sol = correction(raw, inst)
            assert validate(sol, inst).ok
            assert int(sol.hub.sum()) == p


class TestMutation:
    def test_identity_when_all_nodes_are_hubs(self):
        inst = make_instance(49, n=5, p=5)
        sol = feasible(inst, range(5))
        assert mutation(sol, inst, derive_stream(7)) == sol

    def test_forced_swap(self):
        inst = make_instance(50, n=3, p=1)
        sol = feasible(inst, {0})
        # hub pick index 0 (only hub), non-hub pick index 1 -> node 2
        out = mutation(sol, inst, ScriptedRng([0, 1]))
        assert out.hubs.tolist() == [2]
        assert out.alloc.tolist() == [2, 2, 2]

    def test_output_feasible_with_exactly_p_hubs(self):
        inst = make_instance(51, n=9, p=3)
        rng = derive_stream(8)
        sol = feasible(inst, {0, 1, 2})
        for _ in range(200):
            sol = mutation(sol, inst, rng)
            assert validate(sol, inst).ok

    def test_reaches_every_hub_set(self):
        # ergodicity: n=6, p=2 -> all 15 hub sets within 10,000 steps
        inst = make_instance(52, n=6, p=2)
        rng = derive_stream(9)
        sol = feasible(inst, {0, 1})
        seen = {tuple(sol.hubs.tolist())}
        for _ in range(10_000):
            sol = mutation(sol, inst, rng)
            seen.add(tuple(sol.hubs.tolist()))
            if len(seen) == 15:
                break
        assert len(seen) == 15


class TestPerturb:
    def test_identity_when_p_equals_n(self):
        inst = make_instance(53, n=4, p=4)
        sol = feasible(inst, range(4))
        assert perturb(sol, inst, derive_stream(10), strength=2) == sol

    def test_strength_one_swaps_exactly_one_pair(self):
        inst = make_instance(54, n=8, p=3)
        sol = feasible(inst, {1, 4, 6})
        rng = derive_stream(11)
        for _ in range(50):
            out = perturb(sol, inst, rng, strength=1)
            opened = set(out.hubs.tolist()) - {1, 4, 6}
            closed = {1, 4, 6} - set(out.hubs.tolist())
            assert len(opened) == 1 and len(closed) == 1

    def test_population_from_one_ancestor_is_feasible_and_diverse(self):
        inst = make_instance(55, n=20, p=3)
        ancestor = feasible(inst, middle_nodes(inst, 3))
        rng = derive_stream(12)
        population = [perturb(ancestor, inst, rng, strength=2) for _ in range(20)]
        assert all(validate(s, inst).ok for s in population)
        assert len({tuple(s.hubs.tolist()) for s in population}) > 1

    def test_strength_bounds(self):
        inst = make_instance(56, n=6, p=2)
        sol = feasible(inst, {0, 1})
        with pytest.raises(ValueError):
            perturb(sol, inst, derive_stream(13), strength=0)
        with pytest.raises(ValueError):
            perturb(sol, inst, derive_stream(13), strength=3)

    def test_matches_literal_mutation_composition(self):
        inst = make_instance(57, n=10, p=4)
        sol = feasible(inst, {0, 2, 5, 8})
        got = perturb(sol, inst, derive_stream(14), strength=3)
        expected = sol
        rng = derive_stream(14)
        for _ in range(3):
            expected = mutation(expected, inst, rng)
        assert got == expected


class TestClosureAndDeterminism:
    def test_pipeline_closure(self):
        # crossover -> mutation -> correction never produces infeasible output
        rng = derive_stream(15)
        for trial in range(300):
            n = 4 + rng.randint(8)
            p = 1 + rng.randint(n)
            inst = make_instance(6000 + trial, n=n, p=p)
            hubs_a, hubs_b = set(), set()
            while len(hubs_a) < p:
                hubs_a.add(rng.randint(n))
            while len(hubs_b) < p:
                hubs_b.add(rng.randint(n))
            a, b = feasible(inst, hubs_a), feasible(inst, hubs_b)
            c1, c2 = crossover(a, b, rng)
            for raw in (c1, c2):
                mutated = swap_random_hub_spoke(raw, rng)
                sol = correction(mutated, inst)
                assert validate(sol, inst).ok

    def test_replaying_stream_replays_outputs(self):
        inst = make_instance(58, n=9, p=3)
        a = feasible(inst, {0, 1, 2})
        b = feasible(inst, {4, 6, 8})

        def run(seed):
            rng = derive_stream(seed)
            c1, c2 = crossover(a, b, rng)
            m = mutation(correction(c1, inst, rng), inst, rng)
            return m

        assert run(99) == run(99)
        results = {tuple(run(s).hubs.tolist()) for s in range(20)}
        assert len(results) > 1
