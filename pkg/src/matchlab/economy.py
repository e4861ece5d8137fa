"""Economies with one-sided incomplete information and their structural conditions.

An :class:`Economy` is a family of markets over the same firms and workers,
one per state, together with a full-support belief over states. Firms'
utilities may depend on the state; workers' utilities never do.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence, Union

from matchlab.errors import NotUniquelyStableError
from matchlab.market import (
    Market,
    Matching,
    Preferences,
    Side,
    as_utility,
    deferred_acceptance,
    is_unique_stable,
)

Ordering = tuple[tuple[int, int], ...]
OutcomeMap = tuple[Matching, ...]


@dataclass(frozen=True)
class Economy:
    """Finite-state economy.

    ``firm_utils[s]`` is the firms x workers firm-utility matrix in state s;
    ``worker_utils`` is the single firms x workers worker-utility matrix.
    """

    firm_utils: tuple[tuple[tuple[Fraction, ...], ...], ...]
    worker_utils: tuple[tuple[Fraction, ...], ...]
    belief: tuple[Fraction, ...]
    states: tuple[str, ...] = ()
    firm_names: tuple[str, ...] = ()
    worker_names: tuple[str, ...] = ()
    markets: tuple[Market, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        belief = tuple(as_utility(p) for p in self.belief)
        if len(belief) != len(self.firm_utils) or not belief:
            raise ValueError("need exactly one probability per state")
        if any(p <= 0 for p in belief):
            raise ValueError("belief must have full support")
        if sum(belief) != 1:
            raise ValueError(f"state probabilities sum to {sum(belief)}, not 1")
        object.__setattr__(self, "belief", belief)
        states = tuple(self.states) or tuple(str(s + 1) for s in range(len(belief)))
        if len(states) != len(belief) or len(set(states)) != len(states):
            raise ValueError("state labels must be unique, one per state")
        object.__setattr__(self, "states", states)
        markets = tuple(
            Market(fu, self.worker_utils, tuple(self.firm_names), tuple(self.worker_names))
            for fu in self.firm_utils
        )
        object.__setattr__(self, "markets", markets)
        object.__setattr__(self, "firm_utils", tuple(mk.firm_utils for mk in markets))
        object.__setattr__(self, "worker_utils", markets[0].worker_utils)
        object.__setattr__(self, "firm_names", markets[0].firm_names)
        object.__setattr__(self, "worker_names", markets[0].worker_names)

    @classmethod
    def from_markets(cls, markets: Sequence[Market], belief: Sequence, states: Sequence[str] = ()) -> Economy:
        first = markets[0]
        for mk in markets[1:]:
            if mk.worker_utils != first.worker_utils:
                raise ValueError("worker utilities must be identical across states")
        return cls(
            tuple(mk.firm_utils for mk in markets),
            first.worker_utils,
            tuple(belief),
            tuple(states),
            first.firm_names,
            first.worker_names,
        )

    @classmethod
    def single(cls, market: Market) -> Economy:
        return cls.from_markets([market], [1])

    @property
    def num_states(self) -> int:
        return len(self.belief)

    @property
    def num_firms(self) -> int:
        return self.markets[0].num_firms

    @property
    def num_workers(self) -> int:
        return self.markets[0].num_workers

    @cached_property
    def prefs(self) -> tuple[Preferences, ...]:
        return tuple(mk.prefs for mk in self.markets)

    @property
    def worker_lists(self) -> tuple[tuple[int, ...], ...]:
        return self.prefs[0].worker_lists

    def unique_stable_states(self) -> tuple[bool, ...]:
        return tuple(is_unique_stable(p) for p in self.prefs)

    def require_unique_stable(self) -> None:
        for label, ok in zip(self.states, self.unique_stable_states()):
            if not ok:
                raise NotUniquelyStableError(f"state {label} has more than one stable matching")


def stable_outcome_map(economy: Economy) -> OutcomeMap:
    """The unique stable matching of every state."""
    economy.require_unique_stable()
    return tuple(deferred_acceptance(p, Side.FIRM) for p in economy.prefs)


MarketLike = Union[Market, Preferences]


def _prefs(market: MarketLike) -> Preferences:
    return market.prefs if isinstance(market, Market) else market


def _top_top_pairs(prefs: Preferences, firms: set[int], workers: set[int]) -> list[tuple[int, int]]:
    def top(lst, alive):
        for x in lst:
            if x in alive:
                return x
        return None

    out = []
    for f in sorted(firms):
        w = top(prefs.firm_lists[f], workers)
        if w is not None and top(prefs.worker_lists[w], firms) == f:
            out.append((f, w))
    return out


def top_top_pairs(market: MarketLike) -> list[tuple[int, int]]:
    """Pairs that are each other's favourite acceptable partner in the whole market."""
    prefs = _prefs(market)
    return _top_top_pairs(prefs, set(range(prefs.num_firms)), set(range(prefs.num_workers)))


def check_spc(market: MarketLike, limit: int | None = None) -> list[Ordering]:
    """Every sequential top-top ordering of the market (empty when none exists).

    An ordering lists min(m, n) pairs; each pair is a top-top match of the
    sub-market left after removing the pairs before it. ``limit`` stops the
    search after that many orderings.
    """
    prefs = _prefs(market)
    depth = min(prefs.num_firms, prefs.num_workers)
    found: list[Ordering] = []
    path: list[tuple[int, int]] = []

    def rec(firms: set[int], workers: set[int]) -> bool:
        if len(path) == depth:
            found.append(tuple(path))
            return limit is not None and len(found) >= limit
        for f, w in _top_top_pairs(prefs, firms, workers):
            path.append((f, w))
            stop = rec(firms - {f}, workers - {w})
            path.pop()
            if stop:
                return True
        return False

    rec(set(range(prefs.num_firms)), set(range(prefs.num_workers)))
    return found


def has_spc(market: MarketLike) -> bool:
    # greedy is exact: removing one top-top pair never destroys another
    prefs = _prefs(market)
    firms, workers = set(range(prefs.num_firms)), set(range(prefs.num_workers))
    for _ in range(min(len(firms), len(workers))):
        pairs = _top_top_pairs(prefs, firms, workers)
        if not pairs:
            return False
        f, w = pairs[0]
        firms.discard(f)
        workers.discard(w)
    return True


def check_spc_economy(economy: Economy) -> bool:
    return all(has_spc(p) for p in economy.prefs)


@dataclass(frozen=True)
class SpcStarResult:
    holds: bool
    witness: tuple[Ordering, ...] | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds


def _spc_star_ok(worker_lists, orderings: Sequence[Ordering]) -> bool:
    orders = [{f: i for i, (f, _) in enumerate(o)} for o in orderings]
    for o in orderings:
        for i, (fi, wi) in enumerate(o):
            for f in worker_lists[wi]:
                if f == fi:
                    break
                for pos in orders:
                    if pos.get(f, i) >= i:
                        return False
    return True


def check_spc_star(economy: Economy, max_combinations: int = 10**6) -> SpcStarResult:
    """SPC plus cross-state unreachability, searched over all per-state orderings.

    Holds when some choice of one sequential ordering per state has the
    property that whenever the order-i worker of some state prefers a firm to
    its order-i partner, that firm has order below i in every state.
    A failed SPC is reported as a negative verdict, not an error.
    """
    per_state = []
    for label, p in zip(economy.states, economy.prefs):
        ords = check_spc(p)
        if not ords:
            return SpcStarResult(False, None, f"SPC fails in state {label}")
        per_state.append(ords)
    total = 1
    for ords in per_state:
        total *= len(ords)
    if total > max_combinations:
        raise ValueError(f"{total} ordering combinations exceed max_combinations={max_combinations}")
    worker_lists = economy.worker_lists
    for combo in itertools.product(*per_state):
        if _spc_star_ok(worker_lists, combo):
            return SpcStarResult(True, tuple(combo))
    return SpcStarResult(False, None, "no choice of per-state orderings satisfies the cross-state condition")


def check_assortative(market: MarketLike, side: Side | str) -> bool:
    """True when every agent on ``side`` submits the same ordinal list."""
    side = Side(side) if isinstance(side, str) else side
    prefs = _prefs(market)
    lists = prefs.firm_lists if side is Side.FIRM else prefs.worker_lists
    return all(lst == lists[0] for lst in lists)


@dataclass(frozen=True)
class PreferenceCycle:
    """Alternating cycle f1, w1, ..., fk, wk.

    Each firm prefers the worker after it to the worker before it and each
    worker prefers the firm after it to the firm before it (indices mod k).
    Rotated so that the lowest firm position comes first.
    """

    firms: tuple[int, ...]
    workers: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.firms)

    def describe(self, firm_names=None, worker_names=None) -> str:
        fn = firm_names or [f"f{i + 1}" for i in range(max(self.firms) + 1)]
        wn = worker_names or [f"w{j + 1}" for j in range(max(self.workers) + 1)]
        return "(" + ", ".join(f"{fn[f]}, {wn[w]}" for f, w in zip(self.firms, self.workers)) + ")"


def _prefers(ranks: dict[int, int], a: int, b: int) -> bool:
    ra, rb = ranks.get(a), ranks.get(b)
    if ra is None:
        return False
    return rb is None or ra < rb


class _Enough(Exception):
    pass


def find_preference_cycles(market: MarketLike, max_k: int | None = None, limit: int | None = None) -> list[PreferenceCycle]:
    """All preference cycles with 2 <= k <= max_k firms (default min(m, n)).

    With ``limit`` the search stops after that many cycles.
    """
    prefs = _prefs(market)
    m, n = prefs.num_firms, prefs.num_workers
    max_k = min(m, n) if max_k is None else min(max_k, m, n)
    fr, wr = prefs.firm_ranks, prefs.worker_ranks
    found: list[PreferenceCycle] = []

    def extend(firms: list[int], workers: list[int]):
        k = len(firms)
        f_last, w_last = firms[-1], workers[-1]
        # close the cycle: w_last prefers f_1 to f_last and f_1 prefers w_1 to w_last
        if k >= 2 and _prefers(wr[w_last], firms[0], f_last) and _prefers(fr[firms[0]], workers[0], w_last):
            found.append(PreferenceCycle(tuple(firms), tuple(workers)))
            if limit is not None and len(found) >= limit:
                raise _Enough
        if k == max_k:
            return
        for f in range(firms[0] + 1, m):
            if f in firms or not _prefers(wr[w_last], f, f_last):
                continue
            for w in range(n):
                if w in workers or not _prefers(fr[f], w, w_last):
                    continue
                extend(firms + [f], workers + [w])

    try:
        for f0 in range(m):
            for w0 in range(n):
                extend([f0], [w0])
    except _Enough:
        pass
    return found


@dataclass(frozen=True)
class AugmentationReport:
    ok: bool
    failures: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def validate_augmented(
    original: Market,
    economy: Economy,
    added_firms: Sequence[int],
    added_workers: Sequence[int],
) -> AugmentationReport:
    """Check that ``economy`` augments ``original`` with the given added agents.

    Added agents are positions in ``economy``; the remaining firms and workers,
    in order, must correspond to ``original``'s agents and rank one another
    exactly as they do there (ordinal preferences, every state).
    """
    failures = []
    base_f = [i for i in range(economy.num_firms) if i not in set(added_firms)]
    base_w = [j for j in range(economy.num_workers) if j not in set(added_workers)]
    if (len(base_f), len(base_w)) != (original.num_firms, original.num_workers):
        failures.append(
            f"restriction: economy minus added agents is {len(base_f)}x{len(base_w)}, "
            f"original is {original.num_firms}x{original.num_workers}"
        )
        return AugmentationReport(False, tuple(failures))
    for label, mk in zip(economy.states, economy.markets):
        sub = mk.restrict(base_f, base_w)
        if sub.prefs != original.prefs:
            failures.append(f"restriction: state {label} preferences among the original agents differ from the original market")
    for j in added_workers:
        cols = {tuple(mk.worker_utils[i][j] for i in range(economy.num_firms)) for mk in economy.markets}
        if len(cols) != 1:
            failures.append(f"state independence: added worker {economy.worker_names[j]} has state-dependent utilities")
    if economy.num_states != 2:
        failures.append(f"belief: expected two states, got {economy.num_states}")
    elif any(p >= 1 for p in economy.belief):
        failures.append("belief: distribution is degenerate")
    for label, ok in zip(economy.states, economy.unique_stable_states()):
        if not ok:
            failures.append(f"uniqueness: state {label} has several stable matchings")
    return AugmentationReport(not failures, tuple(failures))
