import random
from fractions import Fraction

import pytest

from matchlab.constructions import example2, motivating_example
from matchlab.deviations import max_expected_utility, reachable_outcomes
from matchlab.game import best_responses, enumerate_reports, expected_utility, play, truthful_profile
from matchlab.sampling import random_economy


def random_profile(rng, economy):
    return tuple(rng.choice(enumerate_reports(t, "full", economy.num_firms)) for t in economy.worker_lists)


@pytest.mark.parametrize("seed", range(6))
def test_matches_brute_force(seed):
    rng = random.Random(seed)
    for _ in range(40):
        e = random_economy(rng, rng.randint(1, 4), rng.randint(1, 4))
        profile = random_profile(rng, e)
        w = rng.randrange(e.num_workers)
        brute, _ = best_responses(e, profile, w, "full")
        val, rep = max_expected_utility(e, profile, w)
        assert val == brute
        prof = list(profile)
        prof[w] = rep
        assert expected_utility(e, tuple(prof), w) == val


def test_reports_realise_their_outcomes():
    rng = random.Random(42)
    for _ in range(60):
        e = random_economy(rng, 3, 3)
        profile = random_profile(rng, e)
        w = rng.randrange(3)
        for rep, outcome in reachable_outcomes(e, profile, w):
            prof = list(profile)
            prof[w] = rep
            got = play(e, tuple(prof))
            assert tuple(mt.worker_partner[w] for mt in got) == outcome


def test_outcome_set_covers_every_report():
    rng = random.Random(7)
    for _ in range(40):
        e = random_economy(rng, 3, 3)
        profile = random_profile(rng, e)
        w = rng.randrange(3)
        reachable = {o for _, o in reachable_outcomes(e, profile, w)}
        for rep in enumerate_reports(e.worker_lists[w], "full", 3):
            prof = list(profile)
            prof[w] = rep
            assert tuple(mt.worker_partner[w] for mt in play(e, tuple(prof))) in reachable


def test_motivating_lambda1_w1():
    b = motivating_example()
    val, rep = max_expected_utility(b.economy, b.profiles["lambda1"], 0)
    assert val == 3


def test_example2_candidate_no_gain():
    b = example2(4)
    e = b.economy
    cand = b.profiles["candidate"]
    for w in range(e.num_workers):
        val, _ = max_expected_utility(e, cand, w)
        assert val == expected_utility(e, cand, w)
