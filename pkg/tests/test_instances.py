"""Bundled instances: triangle, cycles, queueing, K4, non-matroid machinery."""
import random

import pytest

from polygame.errors import (InvalidK, NotNonMatroid, Unstable, WitnessNotFound)
from polygame.exchange import bidirectional_flow, directed_flow
from polygame.game import (SolverParams, is_equilibrium, probe_multiplicity,
                           random_profile, validate_profile)
from polygame.instances import (cycle_game, cycle_profiles, embed_counterexample,
                                find_nonmatroid_witness, graph_uniqueness_property,
                                is_matroid_base_family, queueing_game,
                                queueing_start)
from polygame.matroids import MultiGraph, enumerate_bases, make_uniform
from polygame.polymatroid import in_base_polytope

from _generators import all_antichains, random_tree_with_parallels

PARAMS = SolverParams()


class TestTriangle:
    def test_both_profiles_are_equilibria(self, triangle):
        game, direct, indirect = triangle
        assert is_equilibrium(game, direct, 1e-9).is_equilibrium
        assert is_equilibrium(game, indirect, 1e-9).is_equilibrium

    def test_probe_finds_two_with_distinct_aggregates(self, triangle):
        game, direct, indirect = triangle
        report = probe_multiplicity(game, [direct, indirect], PARAMS)
        assert report.count == 2 and report.distinct_aggregates == 2
        aggs = {tuple(sorted(r.aggregate.values())) for r in report.reports}
        assert aggs == {(1.0, 1.0, 1.0), (2.0, 2.0, 2.0)}


class TestCycle:
    def test_k3_matches_triangle_verdicts(self, triangle):
        tri_game, tri_direct, tri_indirect = triangle
        game = cycle_game(3)
        clockwise, counter = cycle_profiles(game)
        for tri_prof, cyc_prof in ((tri_direct, clockwise), (tri_indirect, counter)):
            tri_rep = is_equilibrium(tri_game, tri_prof, 1e-9)
            cyc_rep = is_equilibrium(game, cyc_prof, 1e-9)
            assert tri_rep.is_equilibrium == cyc_rep.is_equilibrium
            assert tri_rep.worst_violation == pytest.approx(cyc_rep.worst_violation)

    @pytest.mark.parametrize("k", [3, 4, 5, 7])
    def test_both_orientations_are_equilibria(self, k):
        game = cycle_game(k)
        clockwise, counter = cycle_profiles(game)
        assert validate_profile(game, clockwise) == []
        assert validate_profile(game, counter) == []
        # the 1/(k-2) scaling leaves float dust of order 1e-16, nothing more
        assert is_equilibrium(game, clockwise, 1e-9).worst_violation <= 1e-12
        assert is_equilibrium(game, counter, 1e-9).worst_violation <= 1e-12

    def test_invalid_k(self):
        with pytest.raises(InvalidK):
            cycle_game(2)


class TestQueueing:
    def test_single_player_symmetric(self):
        game = queueing_game([2.0, 2.0], [1.0])
        eq = probe_multiplicity(game, [queueing_start(game)], PARAMS)
        assert eq.count == 1
        assert eq.equilibria[0].loads["1"]["q1"] == pytest.approx(0.5, abs=1e-6)

    def test_disjoint_allowed_sets_decouple(self):
        game = queueing_game([2.0, 2.0, 2.0, 2.0], [1.0, 1.0],
                             allowed=[["q1", "q2"], ["q3", "q4"]])
        eq = probe_multiplicity(game, [queueing_start(game)], PARAMS)
        assert eq.count == 1
        loads = eq.equilibria[0].loads
        # each player solves its own symmetric two-queue problem
        assert loads["1"]["q1"] == pytest.approx(0.5, abs=1e-6)
        assert loads["1"]["q3"] == 0.0
        assert loads["2"]["q3"] == pytest.approx(0.5, abs=1e-6)

    def test_shared_queues_unique_equilibrium(self):
        game = queueing_game([3.0, 3.0], [1.0, 1.0])
        rng = random.Random(3)
        starts = [queueing_start(game)] + [random_profile(game, rng) for _ in range(4)]
        report = probe_multiplicity(game, starts, PARAMS)
        assert report.count == 1
        assert not report.failures

    def test_unstable_rejected(self):
        with pytest.raises(Unstable):
            queueing_game([1.0, 1.0], [1.5, 1.0])


class TestK4Pair:
    def test_conflicting(self, k4_pair):
        oracle, x, y = k4_pair
        assert not bidirectional_flow(oracle, x, y).feasible

    def test_directed_flow_succeeds(self, k4_pair):
        oracle, x, y = k4_pair
        flow = directed_flow(oracle, x, y)
        for e in oracle.ground:
            assert flow.balance(e) == pytest.approx(x[e] - y[e], abs=1e-9)

    def test_both_vectors_are_members(self, k4_pair):
        oracle, x, y = k4_pair
        assert in_base_polytope(oracle, x) and in_base_polytope(oracle, y)


class TestBaseFamily:
    def test_triangle_routes_are_not_a_matroid(self):
        assert not is_matroid_base_family([("e",), ("f", "g")])

    def test_uniform_bases_are(self):
        assert is_matroid_base_family(enumerate_bases(make_uniform(3, 2)))

    def test_exchange_failure_detected(self):
        assert not is_matroid_base_family([("a", "b"), ("c", "d")])


class TestWitness:
    def test_triangle_route_witness(self):
        wit = find_nonmatroid_witness([("e",), ("f", "g")])
        assert (wit.x_set, wit.y_set) == (("e",), ("f", "g")) or \
               (wit.x_set, wit.y_set) == (("f", "g"), ("e",))
        assert wit.a == "e" and {wit.b, wit.c} == {"f", "g"}

    def test_matroid_input_has_no_witness(self):
        with pytest.raises(WitnessNotFound):
            find_nonmatroid_witness(enumerate_bases(make_uniform(2, 1)))

    def test_every_nonmatroid_antichain_up_to_4_has_witness(self):
        count = 0
        for chain in all_antichains(4):
            if not is_matroid_base_family(chain):
                wit = find_nonmatroid_witness(chain)
                union = set(wit.x_set) | set(wit.y_set)
                for z in chain:
                    if set(z) <= union:
                        assert wit.a in z or {wit.b, wit.c} <= set(z)
                count += 1
        assert count == 99  # non-matroid anti-chains over 4 elements


class TestEmbedding:
    def test_three_triangle_copies(self):
        system = [("e",), ("f", "g")]
        built = embed_counterexample([system, system, system])
        rep_d = is_equilibrium(built.game, built.profile_direct, 1e-9)
        rep_i = is_equilibrium(built.game, built.profile_indirect, 1e-9)
        assert rep_d.is_equilibrium and rep_i.is_equilibrium
        probe = probe_multiplicity(built.game,
                                   [built.profile_direct, built.profile_indirect],
                                   PARAMS)
        assert probe.count == 2

    def test_extra_elements_keep_equilibria(self):
        # a larger anti-chain: strategies may drag along zero-cost resources,
        # and one route through an expensive private element exists
        system = [("e", "x"), ("f", "g"), ("h",)]
        built = embed_counterexample([system, system, system])
        assert is_equilibrium(built.game, built.profile_direct, 1e-9).is_equilibrium
        assert is_equilibrium(built.game, built.profile_indirect, 1e-9).is_equilibrium
        # the shared resources only ever see unit loads from the three players
        agg = is_equilibrium(built.game, built.profile_direct, 1e-9).aggregate
        assert agg["e"] == pytest.approx(1.0)

    def test_fourth_system_rides_along_with_zero_demand(self):
        system = [("e",), ("f", "g")]
        built = embed_counterexample([system, system, system, system])
        assert built.game.player("4").demand == 0.0
        assert is_equilibrium(built.game, built.profile_direct, 1e-9).is_equilibrium
        assert is_equilibrium(built.game, built.profile_indirect, 1e-9).is_equilibrium
        probe = probe_multiplicity(built.game,
                                   [built.profile_direct, built.profile_indirect],
                                   PARAMS)
        assert probe.count == 2

    def test_matroid_system_rejected(self):
        bases = enumerate_bases(make_uniform(2, 1))
        with pytest.raises(NotNonMatroid):
            embed_counterexample([bases, bases, bases])

    def test_embedding_maps_are_injective(self):
        system = [("e",), ("f", "g")]
        built = embed_counterexample([system, system, system])
        for tau in built.embedding.maps.values():
            assert len(set(tau.values())) == len(tau)


class TestGraphUniqueness:
    def test_triangle_cycle_fails(self):
        g = MultiGraph.create(["a", "b", "c"],
                              [("1", "a", "b"), ("2", "b", "c"), ("3", "c", "a")])
        assert not graph_uniqueness_property(g)

    def test_tree_with_parallels_passes(self):
        rng = random.Random(4)
        for _ in range(10):
            g = random_tree_with_parallels(rng, rng.randint(2, 6))
            assert graph_uniqueness_property(g)

    def test_two_vertices_many_parallels(self):
        g = MultiGraph.create(["a", "b"], [(f"e{i}", "a", "b") for i in range(5)])
        assert graph_uniqueness_property(g)

    def test_loops_are_ignored(self):
        g = MultiGraph.create(["a", "b"], [("1", "a", "a"), ("2", "a", "b")])
        assert graph_uniqueness_property(g)
