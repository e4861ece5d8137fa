from fractions import Fraction

import pytest

from matchlab.constructions import (
    Constraint,
    ConstructionBundle,
    append_block,
    example2,
    motivating_example,
    prop4,
)
from matchlab.economy import stable_outcome_map, validate_augmented
from matchlab.errors import ConstructionError
from matchlab.game import (
    expected_utility,
    is_bne,
    is_weakly_undominated,
    play,
    rank_stats,
    truthful_profile,
    unique_stable_for_reported,
)
from matchlab.market import Market, Side, worker


class TestMotivating:
    def test_values(self, motivating):
        e = motivating.economy
        assert e.firm_utils[1][1] == (1, 3, 2)
        assert e.belief == (Fraction(1, 2), Fraction(1, 2))
        assert e.worker_lists == ((1, 0, 2), (0, 1, 2), (1, 0, 2))

    def test_lambda2_state1(self, motivating):
        s1 = play(motivating.economy, motivating.profiles["lambda2"])[0]
        assert set(s1.pairs()) == {(1, 0), (2, 1), (0, 2)}

    def test_uniquely_stable_diagonal(self, motivating):
        assert all(motivating.economy.unique_stable_states())
        assert all(mt.pairs() == [(0, 0), (1, 1), (2, 2)] for mt in motivating.stable)

    @pytest.mark.parametrize("p1", [Fraction(1, 3), Fraction(3, 4)])
    def test_other_beliefs(self, p1):
        b = motivating_example(p1)
        assert b.economy.belief[0] == p1

    def test_bad_belief(self):
        with pytest.raises(ValueError):
            motivating_example(1)


def _names(b, state_pairs):
    fn, wn = b.economy.firm_names, b.economy.worker_names
    return {(wn[w], fn[f]) for f, w in state_pairs}


class TestExample2:
    @pytest.mark.parametrize("n", [3, 4, 6, 10])
    def test_stable_map_and_candidate(self, n):
        b = example2(n)
        e = b.economy
        assert stable_outcome_map(e) == b.stable
        assert all(mt.firm_partner == tuple(range(n + 1)) for mt in b.stable)
        lam = play(e, b.profiles["candidate"])
        s1, s2 = (_names(b, mt.pairs()) for mt in lam)
        fn = e.firm_names
        assert ("w", fn[n - 2]) in s1 and (f"w{n}", fn[n - 1]) in s1
        assert ("w", fn[n - 1]) in s2 and (f"w{n}", fn[n - 2]) in s2
        for s in (s1, s2):
            assert ("w1", "f") in s
            for i in range(2, n):
                assert (f"w{i}", f"f{i - 1}") in s

    @pytest.mark.parametrize("n", [3, 4, 6])
    def test_candidate_bne_undominated(self, n):
        b = example2(n)
        rep = is_bne(b.economy, b.profiles["candidate"], "full", search="comparisons")
        assert rep and all(rep.undominated)
        assert unique_stable_for_reported(b.economy, b.profiles["candidate"]) == (True, True)

    @pytest.mark.parametrize("p1", [Fraction(1, 10), Fraction(9, 10)])
    def test_other_beliefs_bne(self, p1):
        b = example2(5, p1)
        assert all(c.holds for c in b.constraints)
        assert is_bne(b.economy, b.profiles["candidate"], "full")

    @pytest.mark.parametrize("n,golden", [(6, (Fraction(5, 2), Fraction(7, 2))), (10, (Fraction(9, 2), Fraction(11, 2)))])
    def test_rank_improvement(self, n, golden):
        b = example2(n)
        agents = [worker(j + 1) for j in range(n)]
        assert rank_stats(b.economy, b.stable, b.expected["candidate"], agents) == golden

    def test_augments_base(self):
        b = example2(6)
        base = b.economy.markets[0].restrict(range(6), range(6))
        assert validate_augmented(base, b.economy, [6], [6])

    def test_small_n(self):
        with pytest.raises(ValueError):
            example2(2)


class TestProp4:
    @pytest.mark.parametrize("n,k", [(4, 1), (5, 2), (6, 3), (8, 3), (8, 6)])
    def test_outcome_clauses(self, n, k):
        b = prop4(n, k)
        e = b.economy
        lam = play(e, b.profiles["candidate"])
        for mt in lam:
            for i in range(k + 1, n):
                assert mt.worker_partner[i - 1] == i - k - 1
            for i in range(1, k + 1):
                assert mt.worker_partner[i - 1] == n + i - 1
            for i in range(2, k + 1):
                assert mt.worker_partner[n + i - 1] == n - i - 1
        assert lam[0].worker_partner[n] == n - 2 and lam[1].worker_partner[n - 1] == n - 2
        assert lam[1].worker_partner[n] == n - 1 and lam[0].worker_partner[n - 1] == n - 1

    @pytest.mark.parametrize("n,k", [(5, 2), (8, 3)])
    def test_rank_improvement_k(self, n, k):
        b = prop4(n, k)
        improved = b.info["rank_improvement"]["workers"]
        assert improved == list(range(k, n - 1)) and len(improved) == n - k - 1
        among = {Side.FIRM: range(n)}
        for j in improved:
            assert rank_stats(b.economy, b.stable, b.expected["candidate"], [worker(j + 1)], among=among) == (k, k)

    @pytest.mark.parametrize("n,k", [(5, 2), (8, 3)])
    def test_everyone_gains(self, n, k):
        b = prop4(n, k)
        e = b.economy
        truth = truthful_profile(e)
        for w in range(e.num_workers):
            assert expected_utility(e, b.profiles["candidate"], w) > expected_utility(e, truth, w)

    def test_bne_small(self):
        b = prop4(5, 2)
        e = b.economy
        classes = ["dropping"] * e.num_workers
        for w in b.info["strategic_workers"]:
            classes[w] = "full"
        rep = is_bne(e, b.profiles["candidate"], classes)
        assert rep and all(rep.undominated)
        assert all(is_weakly_undominated(r, t) for r, t in zip(b.profiles["candidate"], e.worker_lists))

    def test_base_assortative(self):
        b = prop4(6, 2)
        base = b.economy.markets[1].restrict(range(6), range(6))
        assert base.prefs.firm_lists == (tuple(range(6)),) * 6
        assert base.prefs.worker_lists == (tuple(range(6)),) * 6

    @pytest.mark.parametrize("n,k", [(2, 1), (5, 0), (5, 4)])
    def test_bad_parameters(self, n, k):
        with pytest.raises(ValueError):
            prop4(n, k)


class TestAppendBlock:
    def test_two_by_two(self):
        original = Market([[2, 1], [1, 2]], [[2, 1], [1, 2]])
        b = append_block(original)
        e = b.economy
        assert validate_augmented(original, e, b.info["added_firms"], b.info["added_workers"])
        for label in ("lambda1", "lambda2", "lambda3"):
            assert is_bne(e, b.profiles[label], "full")
            out = play(e, b.profiles[label])
            assert all(a != s for a, s in zip(out, b.stable))

    def test_original_block_keeps_stable_pairs(self):
        original = Market([[3, 1, 2], [1, 2, 3]], [[2, 1, 1], [1, 2, 2]])
        b = append_block(original)
        for mt in play(b.economy, b.profiles["lambda1"]):
            assert mt.firm_partner[:2] == b.stable[0].firm_partner[:2]

    def test_rejects_multiple_stable(self):
        with pytest.raises(ConstructionError):
            append_block(Market([[2, 1], [1, 2]], [[1, 2], [2, 1]]))


def test_failed_constraint_raises(motivating):
    bad = ConstructionBundle(
        "bad", motivating.economy, motivating.stable, {}, {}, [Constraint("one exceeds two", Fraction(1), Fraction(2))]
    )
    with pytest.raises(ConstructionError):
        bad.verify()
