import math

import pytest

from groupform.dynamics import FORM_SINGLETON, JOIN, run_to_convergence
from groupform.model import GameConfig, Partition, PartitionError
from groupform.oracle import (
    MAX_ENUMERATION_AGENTS,
    enumerate_all_ise,
    iter_set_partitions,
    rgs_to_blocks,
    verify_ise,
)
from groupform.rng import SplitMix64
from conftest import make_scenario


def _bell_numbers(upto):
    """Bell triangle: independent count oracle for the partition enumerator."""
    row = [1]
    bells = [1]  # B(0)
    for _ in range(upto):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
        bells.append(row[0])
    return bells


class TestSetPartitionEnumeration:
    @pytest.mark.parametrize("n", range(1, 8))
    def test_count_matches_bell_number(self, n):
        bells = _bell_numbers(n)
        assert sum(1 for _ in iter_set_partitions(n)) == bells[n]

    def test_lexicographic_order_and_endpoints(self):
        rgs = list(iter_set_partitions(4))
        assert rgs == sorted(rgs)
        assert len(rgs) == len(set(rgs))
        assert rgs[0] == (0, 0, 0, 0)
        assert rgs[-1] == (0, 1, 2, 3)

    def test_n3_explicit(self):
        assert list(iter_set_partitions(3)) == [
            (0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1), (0, 1, 2)
        ]

    def test_blocks_from_rgs(self):
        assert rgs_to_blocks((0, 1, 0, 2)) == [[0, 2], [1], [3]]

    def test_every_rgs_is_a_valid_partition(self):
        for rgs in iter_set_partitions(5):
            Partition.from_blocks(rgs_to_blocks(rgs)).validate(5)


class TestVerifyIse:
    def test_far_apart_singletons_are_stable(self):
        s = make_scenario([(0, 2.0, 0, 0), (1, 2.0, 1000, 0)])
        report = verify_ise(Partition.singletons(2), s)
        assert report.is_ise
        assert report.violations == []

    def test_colocated_cross_sector_singletons_are_unstable(self):
        # merging yields 4 * (1 + 4/4) = 8 utility for both, versus 2 alone
        s = make_scenario([(0, 2.0, 5, 5), (1, 2.0, 5, 5)])
        report = verify_ise(Partition.singletons(2), s)
        assert not report.is_ise
        agents = {a for a, _ in report.violations}
        assert agents == {0, 1}
        for agent, move in report.violations:
            assert move.kind == JOIN
            assert move.mover_new_log_utility == pytest.approx(math.log(8.0), rel=1e-12)

    def test_merged_colocated_pair_is_stable(self):
        s = make_scenario([(0, 2.0, 5, 5), (1, 2.0, 5, 5)])
        assert verify_ise(Partition.from_blocks([[0, 1]]), s).is_ise

    def test_reports_singleton_deviation(self):
        # a bad far-apart pair: both members prefer solo
        s = make_scenario([(0, 10.0, 0, 0), (1, 1.0, 5, 0)])
        report = verify_ise(Partition.from_blocks([[0, 1]]), s)
        assert not report.is_ise
        kinds = {move.kind for _, move in report.violations}
        assert FORM_SINGLETON in kinds

    def test_first_violation_only_short_circuits(self):
        s = make_scenario([(0, 2.0, 5, 5), (1, 2.0, 5, 5)])
        report = verify_ise(Partition.singletons(2), s, first_violation_only=True)
        assert not report.is_ise
        assert len(report.violations) == 1

    def test_invalid_partition_rejected(self):
        s = make_scenario([(0, 1.0, 0, 0), (1, 1.0, 1, 1)])
        with pytest.raises(PartitionError):
            verify_ise(Partition.from_blocks([[0, 7]]), s)
        with pytest.raises(PartitionError):
            verify_ise(Partition.from_blocks([[0]]), s)

    def test_violation_targets_use_partition_group_indices(self):
        s = make_scenario([(0, 2.0, 5, 5), (1, 2.0, 5, 5), (2, 1.0, 400, 400)])
        p = Partition({10: frozenset({0}), 20: frozenset({1}), 30: frozenset({2})})
        report = verify_ise(p, s)
        targets = {m.target for _, m in report.violations if m.kind == JOIN}
        assert targets <= {10, 20, 30}


class TestEnumerateAllIse:
    def test_single_agent(self):
        s = make_scenario([(0, 3.0, 0, 0)])
        result = enumerate_all_ise(s)
        assert len(result) == 1
        assert result[0].blocks() == ((0,),)

    def test_attractive_pair_unique_ise(self):
        s = make_scenario([(0, 2.0, 5, 5), (1, 2.0, 5, 5)])
        result = enumerate_all_ise(s)
        assert [p.blocks() for p in result] == [((0, 1),)]

    def test_size_guard(self):
        rows = [(i % 3, 1.0, float(i), 0.0) for i in range(MAX_ENUMERATION_AGENTS + 1)]
        s = make_scenario(rows)
        with pytest.raises(ValueError, match="enumeration"):
            enumerate_all_ise(s)

    def test_nonempty_and_contains_dynamics_output(self):
        rng = SplitMix64(99)
        for trial in range(40):
            n = 3 + rng.randrange(4)  # 3..6
            rows = [
                (rng.randrange(3), 1.0 + 19.0 * rng.random(),
                 5.0 * rng.random(), 5.0 * rng.random())
                for _ in range(n)
            ]
            s = make_scenario(rows)
            ise_set = enumerate_all_ise(s)
            assert ise_set, "every instance must admit a stable partition"
            trace = run_to_convergence(s, seed=trial)
            assert trace.converged
            assert trace.final in ise_set

    def test_agrees_with_verify_ise(self):
        s = make_scenario([
            (0, 2.0, 0, 0), (1, 3.0, 0.5, 0), (2, 1.0, 3, 3), (0, 4.0, 2.5, 2.5)
        ])
        ise_blocks = {p.blocks() for p in enumerate_all_ise(s)}
        from groupform.oracle import iter_set_partitions as isp

        for rgs in isp(s.n):
            p = Partition.from_blocks(rgs_to_blocks(rgs))
            assert (p.blocks() in ise_blocks) == verify_ise(p, s).is_ise

    def test_custom_decay_changes_the_answer(self):
        rows = [(0, 2.0, 0, 0), (1, 2.0, 2, 0)]
        s = make_scenario(rows)
        tight = enumerate_all_ise(s, GameConfig(distance_decay=5.0))
        loose = enumerate_all_ise(s, GameConfig(distance_decay=0.01))
        assert [p.blocks() for p in tight] == [((0,), (1,))]
        assert [p.blocks() for p in loose] == [((0, 1),)]
