import math

import pytest
from hypothesis import given, strategies as st

from groupform.model import (
    Agent,
    CategoryRangeError,
    DuplicateAgentIdError,
    EmptyScenarioError,
    GameConfig,
    NonDenseIdError,
    NonPositiveResourceError,
    Partition,
    PartitionError,
    Scenario,
    UnknownAgentError,
    ValidationError,
    boosting_factor,
    category_totals,
    group_distance,
    group_resource,
    group_utility,
    log_group_utility,
    log_equal,
    log_improves,
    log_not_harmed,
)
from conftest import make_scenario

# Worked 3-agent group from the bundled demo: resources 10/5/10 in distinct
# sectors at (1,2), (3,1), (2,3). Expected values derived by hand:
# totals (10,5,10); boost 1 + 200/25 = 9; pooled resource 25*9 = 225;
# spread = dist((1,2),(3,1)) + dist((1,2),(2,3)) + dist((3,1),(2,3)).
DEMO_TRIO_ROWS = [(0, 10.0, 1.0, 2.0), (1, 5.0, 3.0, 1.0), (2, 10.0, 2.0, 3.0)]
DEMO_TRIO_D = 2 * math.sqrt(5) + math.sqrt(2)

REL = 1e-12


class TestCategoryTotals:
    def test_two_sector_group(self):
        s = make_scenario([(0, 3.0, 0, 0), (0, 1.0, 0, 0), (1, 2.0, 0, 0)])
        assert category_totals([0, 1, 2], s) == [4.0, 2.0, 0.0]

    def test_singleton(self):
        s = make_scenario([(0, 5.0, 0, 0)])
        assert category_totals([0], s) == [5.0, 0.0, 0.0]

    def test_demo_trio(self):
        s = make_scenario(DEMO_TRIO_ROWS)
        assert category_totals([0, 1, 2], s) == [10.0, 5.0, 10.0]

    def test_totals_sum_to_raw_resource(self):
        s = make_scenario([(0, 3.5, 0, 0), (2, 1.25, 1, 1), (1, 2.0, 2, 2)])
        assert sum(category_totals([0, 1, 2], s)) == pytest.approx(6.75, rel=REL)

    def test_unknown_agent(self):
        s = make_scenario([(0, 1.0, 0, 0)])
        with pytest.raises(UnknownAgentError):
            category_totals([0, 7], s)

    def test_empty_group(self):
        s = make_scenario([(0, 1.0, 0, 0)])
        with pytest.raises(ValidationError):
            category_totals([], s)


class TestBoostingFactor:
    @pytest.mark.parametrize(
        "totals,expected",
        [((6, 0, 0), 1.0), ((4, 2, 0), 7 / 3), ((2, 2, 2), 3.0)],
    )
    def test_three_sector_examples(self, totals, expected):
        assert boosting_factor(totals) == pytest.approx(expected, rel=REL)

    def test_all_zero_is_domain_error(self):
        with pytest.raises(ValueError):
            boosting_factor([0.0, 0.0, 0.0])

    def test_general_k(self):
        # four sectors: 1 + (1*2+1*3+1*4+2*3+2*4+3*4)/10 = 1 + 35/10
        assert boosting_factor([1, 2, 3, 4]) == pytest.approx(4.5, rel=REL)

    @given(
        st.lists(
            st.one_of(st.just(0.0), st.floats(1e-3, 1e6)), min_size=2, max_size=6
        ).filter(lambda t: sum(t) > 0)
    )
    def test_one_exactly_when_single_sector(self, totals):
        h = boosting_factor(totals)
        assert h >= 1.0
        if sum(1 for t in totals if t > 0) == 1:
            assert h == 1.0
        else:
            assert h > 1.0


class TestGroupResource:
    @pytest.mark.parametrize(
        "rows,expected",
        [
            ([(0, 6.0, 0, 0)], 6.0),
            ([(0, 4.0, 0, 0), (1, 2.0, 0, 0)], 14.0),
            ([(0, 2.0, 0, 0), (1, 2.0, 0, 0), (2, 2.0, 0, 0)], 18.0),
        ],
    )
    def test_worked_values(self, rows, expected):
        s = make_scenario(rows)
        assert group_resource(range(len(rows)), s) == pytest.approx(expected, rel=REL)

    @given(
        st.lists(
            st.tuples(st.integers(0, 2), st.floats(0.1, 1e3)),
            min_size=1,
            max_size=6,
        )
    )
    def test_never_below_raw_sum(self, pairs):
        rows = [(c, r, 0.0, 0.0) for c, r in pairs]
        s = make_scenario(rows)
        group = list(range(len(rows)))
        raw = sum(r for _, r in pairs)
        pooled = group_resource(group, s)
        assert pooled >= raw * (1 - 1e-12)
        if len({c for c, _ in pairs}) == 1:
            assert pooled == pytest.approx(raw, rel=REL)
        else:
            assert pooled > raw

    @given(
        st.lists(
            st.tuples(st.integers(0, 2), st.floats(0.1, 1e3)),
            min_size=1,
            max_size=6,
        ),
        st.permutations([0, 1, 2]),
    )
    def test_category_relabel_invariance(self, pairs, perm):
        rows = [(c, r, 0.0, 0.0) for c, r in pairs]
        relabeled = [(perm[c], r, 0.0, 0.0) for c, r in pairs]
        a = group_resource(range(len(rows)), make_scenario(rows))
        b = group_resource(range(len(rows)), make_scenario(relabeled))
        assert a == pytest.approx(b, rel=REL)

    def test_member_order_invariance(self):
        s = make_scenario(DEMO_TRIO_ROWS)
        assert group_resource([2, 0, 1], s) == group_resource([0, 1, 2], s)


class TestGroupDistance:
    def test_singleton_zero(self):
        s = make_scenario([(0, 1.0, 3.0, 4.0)])
        assert group_distance([0], s) == 0.0

    def test_three_four_five(self):
        s = make_scenario([(0, 1.0, 0.0, 0.0), (1, 1.0, 3.0, 4.0)])
        assert group_distance([0, 1], s) == pytest.approx(5.0, rel=REL)

    def test_demo_trio(self):
        s = make_scenario(DEMO_TRIO_ROWS)
        assert group_distance([0, 1, 2], s) == pytest.approx(DEMO_TRIO_D, rel=REL)

    @given(
        st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=1, max_size=6),
        st.floats(-100, 100),
        st.floats(-100, 100),
        st.floats(-math.pi, math.pi),
        st.floats(0.01, 10),
    )
    def test_rigid_motion_and_scaling(self, points, tx, ty, angle, scale):
        rows = [(0, 1.0, x, y) for x, y in points]
        base = group_distance(range(len(rows)), make_scenario(rows))
        shifted = [(0, 1.0, x + tx, y + ty) for x, y in points]
        assert group_distance(range(len(rows)), make_scenario(shifted)) == pytest.approx(
            base, rel=1e-9, abs=1e-9
        )
        c, s_ = math.cos(angle), math.sin(angle)
        rotated = [(0, 1.0, c * x - s_ * y, s_ * x + c * y) for x, y in points]
        assert group_distance(range(len(rows)), make_scenario(rotated)) == pytest.approx(
            base, rel=1e-9, abs=1e-9
        )
        scaled = [(0, 1.0, scale * x, scale * y) for x, y in points]
        assert group_distance(range(len(rows)), make_scenario(scaled)) == pytest.approx(
            scale * base, rel=1e-9, abs=1e-12
        )


class TestGroupUtility:
    def test_singleton(self):
        s = make_scenario([(0, 7.0, 2.0, 9.0)])
        assert group_utility([0], s, GameConfig()) == pytest.approx(7.0, rel=REL)

    def test_colocated_three_sectors(self):
        s = make_scenario([(0, 2.0, 1, 1), (1, 2.0, 1, 1), (2, 2.0, 1, 1)])
        assert group_utility([0, 1, 2], s, GameConfig()) == pytest.approx(18.0, rel=REL)

    def test_demo_trio(self):
        s = make_scenario(DEMO_TRIO_ROWS)
        expected = 225.0 * math.exp(-DEMO_TRIO_D)
        assert group_utility([0, 1, 2], s, GameConfig()) == pytest.approx(expected, rel=REL)

    def test_distance_decay_scales_exponent(self):
        s = make_scenario([(0, 2.0, 0, 0), (1, 3.0, 1, 0)])
        cfg2 = GameConfig(distance_decay=2.0)
        assert group_utility([0, 1], s, cfg2) == pytest.approx(
            group_resource([0, 1], s) * math.exp(-2.0), rel=REL
        )

    def test_colocated_new_sector_strictly_helps(self):
        s = make_scenario([(0, 5.0, 2.0, 2.0), (1, 0.5, 2.0, 2.0)])
        cfg = GameConfig()
        assert group_utility([0, 1], s, cfg) > group_utility([0], s, cfg)


class TestLogGroupUtility:
    def test_unit_resource_singleton(self):
        s = make_scenario([(0, 1.0, 5.0, 5.0)])
        assert log_group_utility([0], s, GameConfig()) == pytest.approx(0.0, abs=1e-15)

    def test_e_resource_singleton(self):
        s = make_scenario([(0, math.e, 5.0, 5.0)])
        assert log_group_utility([0], s, GameConfig()) == pytest.approx(1.0, abs=1e-12)

    def test_demo_trio(self):
        s = make_scenario(DEMO_TRIO_ROWS)
        expected = math.log(225.0) - DEMO_TRIO_D
        assert log_group_utility([0, 1, 2], s, GameConfig()) == pytest.approx(
            expected, rel=REL
        )

    @given(
        st.lists(
            st.tuples(st.integers(0, 2), st.floats(0.1, 100), st.floats(0, 5), st.floats(0, 5)),
            min_size=1,
            max_size=6,
        )
    )
    def test_exp_log_matches_plain(self, rows):
        s = make_scenario(rows)
        cfg = GameConfig()
        group = list(range(len(rows)))
        if group_distance(group, s) <= 50:
            assert math.exp(log_group_utility(group, s, cfg)) == pytest.approx(
                group_utility(group, s, cfg), rel=1e-12
            )

    @given(
        st.lists(
            st.tuples(st.integers(0, 2), st.floats(0.1, 100), st.floats(0, 3), st.floats(0, 3)),
            min_size=2,
            max_size=6,
        ),
        st.data(),
    )
    def test_ordering_agrees_with_plain_utility(self, rows, data):
        s = make_scenario(rows)
        cfg = GameConfig()
        n = len(rows)
        cut = data.draw(st.integers(1, n - 1))
        g1, g2 = list(range(cut)), list(range(cut, n))
        u1, u2 = group_utility(g1, s, cfg), group_utility(g2, s, cfg)
        l1, l2 = log_group_utility(g1, s, cfg), log_group_utility(g2, s, cfg)
        if u1 != u2:
            assert (u1 < u2) == (l1 < l2)


class TestComparators:
    def test_tolerance_semantics(self):
        assert log_equal(1.0, 1.0 + 5e-10)
        assert not log_improves(1.0 + 5e-10, 1.0)
        assert log_improves(1.0 + 2e-9, 1.0)
        assert log_not_harmed(1.0 - 5e-10, 1.0)
        assert not log_not_harmed(1.0 - 2e-9, 1.0)


class TestValidation:
    def test_game_config(self):
        with pytest.raises(ValidationError):
            GameConfig(k=1)
        with pytest.raises(ValidationError):
            GameConfig(distance_decay=0.0)
        with pytest.raises(ValidationError):
            GameConfig(distance_decay=-1.0)

    def test_empty_scenario(self):
        with pytest.raises(EmptyScenarioError):
            Scenario([], k=3)

    def test_duplicate_id(self):
        a = Agent(0, 0, 1.0, 0, 0)
        with pytest.raises(DuplicateAgentIdError):
            Scenario([a, Agent(0, 1, 1.0, 0, 0)], k=3)

    def test_non_dense_ids(self):
        with pytest.raises(NonDenseIdError):
            Scenario([Agent(1, 0, 1.0, 0, 0)], k=3)

    def test_category_out_of_range(self):
        with pytest.raises(CategoryRangeError):
            Scenario([Agent(0, 3, 1.0, 0, 0)], k=3)

    def test_nonpositive_resource(self):
        with pytest.raises(NonPositiveResourceError):
            Scenario([Agent(0, 0, 0.0, 0, 0)], k=3)

    def test_partition_invariants(self):
        p = Partition.from_blocks([[0, 1], [2]])
        p.validate(3)
        with pytest.raises(PartitionError):
            p.validate(4)  # not a cover
        with pytest.raises(PartitionError):
            Partition.from_blocks([[0, 1], [1, 2]]).validate(3)  # overlap
        with pytest.raises(PartitionError):
            Partition({0: frozenset()}).validate(0)  # empty group

    def test_partition_blocks_canonical(self):
        p = Partition.from_blocks([[2], [1, 0]])
        assert p.blocks() == ((0, 1), (2,))
        assert p == Partition.from_blocks([[0, 1], [2]])
