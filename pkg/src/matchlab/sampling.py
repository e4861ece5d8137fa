"""Seeded random markets and economies for property checks and experiments."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable

from matchlab.economy import Economy, check_spc_star, find_preference_cycles
from matchlab.market import Market

BELIEFS = (Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 4), Fraction(3, 4))


def _distinct(rng: random.Random, k: int) -> list[int]:
    return rng.sample(range(1, 6 * k + 1), k)


def random_utils(rng: random.Random, m: int, n: int) -> tuple[list[list[int]], list[list[int]]]:
    """All-acceptable firm and worker utility matrices (firms x workers)."""
    fu = [_distinct(rng, n) for _ in range(m)]
    cols = [_distinct(rng, m) for _ in range(n)]
    wu = [[cols[j][i] for j in range(n)] for i in range(m)]
    return fu, wu


def random_market(rng: random.Random, m: int, n: int) -> Market:
    fu, wu = random_utils(rng, m, n)
    return Market(fu, wu)


def _assortative_firm_utils(rng: random.Random, m: int, n: int) -> list[list[int]]:
    order = rng.sample(range(n), n)  # common ranking, best first
    fu = []
    for _ in range(m):
        vals = sorted(_distinct(rng, n), reverse=True)
        row = [0] * n
        for v, j in zip(vals, order):
            row[j] = v
        fu.append(row)
    return fu


def random_economy(
    rng: random.Random,
    m: int,
    n: int,
    num_states: int = 2,
    *,
    firm_assortative: bool = False,
    belief: tuple[Fraction, ...] | None = None,
) -> Economy:
    _, wu = random_utils(rng, m, n)
    if firm_assortative:
        states = [_assortative_firm_utils(rng, m, n) for _ in range(num_states)]
    else:
        states = [random_utils(rng, m, n)[0] for _ in range(num_states)]
    if belief is None:
        if num_states == 2:
            p = rng.choice(BELIEFS)
            belief = (p, 1 - p)
        else:
            belief = tuple(Fraction(1, num_states) for _ in range(num_states))
    return Economy(states, wu, belief)


def _size(rng: random.Random, max_m: int, max_n: int) -> tuple[int, int]:
    return rng.randint(1, max_m), rng.randint(1, max_n)


def sample_economies(
    rng: random.Random,
    count: int,
    accept: Callable[[Economy], bool],
    *,
    max_m: int = 3,
    max_n: int = 3,
    min_size: int = 1,
    max_tries: int = 10**6,
    **kwargs,
) -> list[Economy]:
    """Rejection-sample ``count`` economies with random sizes passing ``accept``."""
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError(f"only {len(out)} of {count} economies accepted after {max_tries} draws")
        m, n = _size(rng, max_m, max_n)
        if min(m, n) < min_size:
            continue
        e = random_economy(rng, m, n, **kwargs)
        if accept(e):
            out.append(e)
    return out


def uniquely_stable(e: Economy) -> bool:
    return all(e.unique_stable_states())


def spc_star(e: Economy) -> bool:
    return check_spc_star(e).holds


def no_cycles(e: Economy) -> bool:
    return all(not find_preference_cycles(p) for p in e.prefs)
