"""Complete-information matching primitives.

A :class:`Market` holds cardinal match utilities for one state of the world.
Everything downstream works on the ordinal projection, :class:`Preferences`,
where agents are 0-based integer positions: firm ``i`` and worker ``j``.
:class:`AgentId` is the 1-based, side-tagged handle used at the API boundary.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from matchlab.errors import PreferenceError, SizeBoundError, StrictnessError

Utility = Fraction


class Side(enum.Enum):
    FIRM = "firm"
    WORKER = "worker"

    @property
    def other(self) -> Side:
        return Side.WORKER if self is Side.FIRM else Side.FIRM

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str) and value.lower() in ("firms", "workers"):
            return cls(value.lower()[:-1])
        return None


@dataclass(frozen=True)
class AgentId:
    side: Side
    index: int  # 1-based

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"agent index must be >= 1, got {self.index}")

    @property
    def pos(self) -> int:
        return self.index - 1

    def __str__(self) -> str:
        return f"{'f' if self.side is Side.FIRM else 'w'}{self.index}"

    def __lt__(self, other):  # firms sort before workers
        return (self.side is Side.WORKER, self.index) < (other.side is Side.WORKER, other.index)


def firm(i: int) -> AgentId:
    return AgentId(Side.FIRM, i)


def worker(j: int) -> AgentId:
    return AgentId(Side.WORKER, j)


def as_utility(value) -> Fraction:
    """Convert ints, Fractions, ``"p/q"`` strings or floats to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not utilities")
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a utility")


def _matrix(rows, m: int | None = None, n: int | None = None) -> tuple[tuple[Fraction, ...], ...]:
    out = tuple(tuple(as_utility(v) for v in row) for row in rows)
    if not out or not out[0]:
        raise ValueError("utility matrices must be non-empty")
    width = len(out[0])
    if any(len(row) != width for row in out):
        raise ValueError("ragged utility matrix")
    if m is not None and len(out) != m or n is not None and width != n:
        raise ValueError(f"expected a {m}x{n} matrix, got {len(out)}x{width}")
    return out


def _check_strict(values: Sequence[Fraction], who: str) -> None:
    if any(v == 0 for v in values):
        raise StrictnessError(f"{who} has a utility equal to the unmatched utility 0")
    if len(set(values)) != len(values):
        raise StrictnessError(f"{who} is indifferent between two partners")


@dataclass(frozen=True)
class Market:
    """One state's complete-information market.

    ``firm_utils[i][j]`` is firm i's utility from worker j and
    ``worker_utils[i][j]`` is worker j's utility from firm i; both matrices are
    firms x workers. Being unmatched is worth 0, so non-positive entries mark
    unacceptable partners.
    """

    firm_utils: tuple[tuple[Fraction, ...], ...]
    worker_utils: tuple[tuple[Fraction, ...], ...]
    firm_names: tuple[str, ...] = ()
    worker_names: tuple[str, ...] = ()

    def __post_init__(self):
        fu = _matrix(self.firm_utils)
        wu = _matrix(self.worker_utils, len(fu), len(fu[0]))
        object.__setattr__(self, "firm_utils", fu)
        object.__setattr__(self, "worker_utils", wu)
        m, n = len(fu), len(fu[0])
        if not self.firm_names:
            object.__setattr__(self, "firm_names", tuple(f"f{i + 1}" for i in range(m)))
        if not self.worker_names:
            object.__setattr__(self, "worker_names", tuple(f"w{j + 1}" for j in range(n)))
        object.__setattr__(self, "firm_names", tuple(self.firm_names))
        object.__setattr__(self, "worker_names", tuple(self.worker_names))
        if len(self.firm_names) != m or len(self.worker_names) != n:
            raise ValueError("name lists do not match matrix dimensions")
        if len(set(self.firm_names) | set(self.worker_names)) != m + n:
            raise ValueError("agent names must be unique")
        for i in range(m):
            _check_strict(fu[i], self.firm_names[i])
        for j in range(n):
            _check_strict([wu[i][j] for i in range(m)], self.worker_names[j])

    @property
    def num_firms(self) -> int:
        return len(self.firm_utils)

    @property
    def num_workers(self) -> int:
        return len(self.firm_utils[0])

    @property
    def all_acceptable(self) -> bool:
        return all(v > 0 for row in self.firm_utils for v in row) and all(
            v > 0 for row in self.worker_utils for v in row
        )

    @cached_property
    def prefs(self) -> Preferences:
        return utilities_to_ordinal(self)

    def restrict(self, firms: Sequence[int], workers: Sequence[int]) -> Market:
        """Sub-market on the given firm and worker positions (order preserved)."""
        return Market(
            [[self.firm_utils[i][j] for j in workers] for i in firms],
            [[self.worker_utils[i][j] for j in workers] for i in firms],
            tuple(self.firm_names[i] for i in firms),
            tuple(self.worker_names[j] for j in workers),
        )

    @classmethod
    def from_rankings(
        cls,
        firm_lists: Sequence[Sequence[int]],
        worker_lists: Sequence[Sequence[int]],
        firm_names: Sequence[str] = (),
        worker_names: Sequence[str] = (),
    ) -> Market:
        """Positional cardinalisation of complete ordinal lists.

        The k-th entry of a list of length L gets utility L - k (so the top
        gets L); partners missing from a list get a negative utility, i.e.
        they are unacceptable.
        """
        m, n = len(firm_lists), len(worker_lists)
        fu = [[0] * n for _ in range(m)]
        wu = [[0] * n for _ in range(m)]
        for i, lst in enumerate(firm_lists):
            missing = [j for j in range(n) if j not in lst]
            for k, j in enumerate(lst):
                fu[i][j] = len(lst) - k
            for k, j in enumerate(missing):
                fu[i][j] = -(k + 1)
        for j, lst in enumerate(worker_lists):
            missing = [i for i in range(m) if i not in lst]
            for k, i in enumerate(lst):
                wu[i][j] = len(lst) - k
            for k, i in enumerate(missing):
                wu[i][j] = -(k + 1)
        return cls(fu, wu, tuple(firm_names), tuple(worker_names))


@dataclass(frozen=True)
class Preferences:
    """Ordinal preference lists; unlisted partners are unacceptable.

    ``firm_lists[i]`` ranks worker positions for firm i, best first, and
    ``worker_lists[j]`` ranks firm positions for worker j.
    """

    firm_lists: tuple[tuple[int, ...], ...]
    worker_lists: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "firm_lists", tuple(tuple(lst) for lst in self.firm_lists))
        object.__setattr__(self, "worker_lists", tuple(tuple(lst) for lst in self.worker_lists))
        for who, lists, bound in (
            ("firm", self.firm_lists, self.num_workers),
            ("worker", self.worker_lists, self.num_firms),
        ):
            for a, lst in enumerate(lists):
                if len(set(lst)) != len(lst):
                    raise PreferenceError(f"{who} {a + 1} lists a partner twice: {lst}")
                if any(not 0 <= x < bound for x in lst):
                    raise PreferenceError(f"{who} {a + 1} lists an unknown partner: {lst}")

    @property
    def num_firms(self) -> int:
        return len(self.firm_lists)

    @property
    def num_workers(self) -> int:
        return len(self.worker_lists)

    @cached_property
    def firm_ranks(self) -> tuple[dict[int, int], ...]:
        return tuple({w: k for k, w in enumerate(lst)} for lst in self.firm_lists)

    @cached_property
    def worker_ranks(self) -> tuple[dict[int, int], ...]:
        return tuple({f: k for k, f in enumerate(lst)} for lst in self.worker_lists)

    def with_worker_lists(self, worker_lists: Sequence[Sequence[int]]) -> Preferences:
        return Preferences(self.firm_lists, tuple(tuple(r) for r in worker_lists))

    def restrict(self, firms: Sequence[int], workers: Sequence[int]) -> Preferences:
        """Sub-market preferences, re-indexed to positions within ``firms``/``workers``."""
        fpos = {f: k for k, f in enumerate(firms)}
        wpos = {w: k for k, w in enumerate(workers)}
        return Preferences(
            [[wpos[w] for w in self.firm_lists[f] if w in wpos] for f in firms],
            [[fpos[f] for f in self.worker_lists[w] if f in fpos] for w in workers],
        )


def utilities_to_ordinal(market: Market) -> Preferences:
    """Sort each agent's acceptable partners by descending utility."""
    m, n = market.num_firms, market.num_workers
    fu, wu = market.firm_utils, market.worker_utils
    firm_lists = []
    for i in range(m):
        _check_strict(fu[i], market.firm_names[i])
        firm_lists.append(sorted((j for j in range(n) if fu[i][j] > 0), key=lambda j: -fu[i][j]))
    worker_lists = []
    for j in range(n):
        col = [wu[i][j] for i in range(m)]
        _check_strict(col, market.worker_names[j])
        worker_lists.append(sorted((i for i in range(m) if col[i] > 0), key=lambda i: -col[i]))
    return Preferences(firm_lists, worker_lists)


@dataclass(frozen=True)
class Matching:
    """Partial one-to-one assignment; ``firm_partner[i]`` is a worker position or None."""

    firm_partner: tuple[int | None, ...]
    num_workers: int

    def __post_init__(self):
        object.__setattr__(self, "firm_partner", tuple(self.firm_partner))
        taken = [w for w in self.firm_partner if w is not None]
        if len(set(taken)) != len(taken):
            raise ValueError(f"worker assigned to two firms: {self.firm_partner}")
        if any(not 0 <= w < self.num_workers for w in taken):
            raise ValueError(f"unknown worker in matching: {self.firm_partner}")

    @classmethod
    def from_pairs(cls, num_firms: int, num_workers: int, pairs: Iterable[tuple[int, int]]) -> Matching:
        partner: list[int | None] = [None] * num_firms
        for f, w in pairs:
            if partner[f] is not None:
                raise ValueError(f"firm {f + 1} assigned twice")
            partner[f] = w
        return cls(tuple(partner), num_workers)

    @classmethod
    def empty(cls, num_firms: int, num_workers: int) -> Matching:
        return cls((None,) * num_firms, num_workers)

    @property
    def num_firms(self) -> int:
        return len(self.firm_partner)

    @cached_property
    def worker_partner(self) -> tuple[int | None, ...]:
        out: list[int | None] = [None] * self.num_workers
        for f, w in enumerate(self.firm_partner):
            if w is not None:
                out[w] = f
        return tuple(out)

    def pairs(self) -> list[tuple[int, int]]:
        return [(f, w) for f, w in enumerate(self.firm_partner) if w is not None]

    def sort_key(self) -> tuple[int, ...]:
        return tuple(-1 if w is None else w for w in self.firm_partner)

    def describe(self, firm_names: Sequence[str] | None = None, worker_names: Sequence[str] | None = None) -> str:
        fn = firm_names or [f"f{i + 1}" for i in range(self.num_firms)]
        wn = worker_names or [f"w{j + 1}" for j in range(self.num_workers)]
        return "{" + ", ".join(f"({fn[f]},{wn[w]})" for f, w in self.pairs()) + "}"

    def __str__(self) -> str:
        return self.describe()


def _propose(
    proposer_lists: Sequence[Sequence[int]],
    receiver_ranks: Sequence[dict[int, int]],
    schedule: str = "stack",
) -> list[int | None]:
    """Run proposer-side deferred acceptance; return each receiver's held proposer."""
    held: list[int | None] = [None] * len(receiver_ranks)
    nxt = [0] * len(proposer_lists)
    if schedule == "rounds":
        free = list(range(len(proposer_lists)))
        while free:
            offers: dict[int, list[int]] = {}
            for p in free:
                lst = proposer_lists[p]
                while nxt[p] < len(lst):
                    r = lst[nxt[p]]
                    nxt[p] += 1
                    if p in receiver_ranks[r]:
                        offers.setdefault(r, []).append(p)
                        break
            free = []
            for r, ps in offers.items():
                rank = receiver_ranks[r]
                if held[r] is not None:
                    ps.append(held[r])
                best = min(ps, key=rank.__getitem__)
                held[r] = best
                free.extend(p for p in ps if p != best)
        return held

    if schedule == "stack":
        free = list(range(len(proposer_lists) - 1, -1, -1))
        pop = free.pop
    elif schedule == "queue":
        free = deque(range(len(proposer_lists)))
        pop = free.popleft
    else:
        raise ValueError(f"unknown schedule {schedule!r}")
    while free:
        p = pop()
        lst = proposer_lists[p]
        k = nxt[p]
        while k < len(lst):
            r = lst[k]
            k += 1
            rank = receiver_ranks[r]
            rk = rank.get(p)
            if rk is None:
                continue
            cur = held[r]
            if cur is None:
                held[r] = p
                break
            if rk < rank[cur]:
                held[r] = p
                free.append(cur)
                break
        nxt[p] = k
    return held


def deferred_acceptance(prefs: Preferences, proposing: Side = Side.FIRM, schedule: str = "stack") -> Matching:
    """Gale-Shapley deferred acceptance.

    The proposing side gets its optimal stable matching for ``prefs``.
    ``schedule`` picks the order in which free proposers move (``"stack"``,
    ``"queue"`` or simultaneous ``"rounds"``); the result does not depend on it.
    """
    if proposing is Side.FIRM:
        held = _propose(prefs.firm_lists, prefs.worker_ranks, schedule)
        return Matching.from_pairs(prefs.num_firms, prefs.num_workers, ((f, w) for w, f in enumerate(held) if f is not None))
    held = _propose(prefs.worker_lists, prefs.firm_ranks, schedule)
    return Matching(tuple(held), prefs.num_workers)


def individually_irrational(matching: Matching, prefs: Preferences) -> list[tuple[int, int]]:
    """Matched pairs in which at least one side does not list the other."""
    return [
        (f, w)
        for f, w in matching.pairs()
        if w not in prefs.firm_ranks[f] or f not in prefs.worker_ranks[w]
    ]


def blocking_pairs(matching: Matching, prefs: Preferences) -> list[tuple[int, int]]:
    """All mutually acceptable (firm, worker) pairs that both prefer each other.

    Being unmatched, or matched to someone not on one's list, counts as worse
    than every listed partner. Individual-rationality violations are reported
    separately by :func:`individually_irrational`.
    """
    fr, wr = prefs.firm_ranks, prefs.worker_ranks
    big = max(prefs.num_firms, prefs.num_workers) + 1
    wp = matching.worker_partner
    out = []
    for f, lst in enumerate(prefs.firm_lists):
        cur_w = matching.firm_partner[f]
        f_cur = fr[f].get(cur_w, big) if cur_w is not None else big
        for w in lst:
            if fr[f][w] >= f_cur:
                break
            rk = wr[w].get(f)
            if rk is None:
                continue
            cur_f = wp[w]
            w_cur = wr[w].get(cur_f, big) if cur_f is not None else big
            if rk < w_cur:
                out.append((f, w))
    return out


def is_stable(matching: Matching, prefs: Preferences) -> bool:
    return not individually_irrational(matching, prefs) and not blocking_pairs(matching, prefs)


def _partial_matchings(prefs: Preferences) -> Iterator[tuple[int | None, ...]]:
    # only mutually acceptable pairs: any other match is individually irrational
    m = prefs.num_firms
    options = [[w for w in prefs.firm_lists[f] if f in prefs.worker_ranks[w]] for f in range(m)]
    partner: list[int | None] = [None] * m
    used = [False] * prefs.num_workers

    def rec(f: int):
        if f == m:
            yield tuple(partner)
            return
        partner[f] = None
        yield from rec(f + 1)
        for w in options[f]:
            if not used[w]:
                used[w] = True
                partner[f] = w
                yield from rec(f + 1)
                used[w] = False
        partner[f] = None

    yield from rec(0)


def enumerate_stable_matchings(prefs: Preferences, max_size: int = 7) -> list[Matching]:
    """Brute-force every stable matching; sorted canonically."""
    if prefs.num_firms > max_size or prefs.num_workers > max_size:
        raise SizeBoundError(
            f"{prefs.num_firms}x{prefs.num_workers} market exceeds brute-force bound {max_size}"
        )
    found = []
    for partner in _partial_matchings(prefs):
        mt = Matching(partner, prefs.num_workers)
        if not blocking_pairs(mt, prefs):
            found.append(mt)
    return sorted(found, key=Matching.sort_key)


def is_unique_stable(prefs: Preferences) -> bool:
    return deferred_acceptance(prefs, Side.FIRM) == deferred_acceptance(prefs, Side.WORKER)


def rank_of(agent: AgentId, partner: AgentId | None, prefs: Preferences) -> int | None:
    """1-based position of ``partner`` in ``agent``'s list; None when unmatched."""
    if agent.side is Side.FIRM:
        if agent.index > prefs.num_firms:
            raise PreferenceError(f"unknown agent {agent}")
        lst = prefs.firm_lists[agent.pos]
    else:
        if agent.index > prefs.num_workers:
            raise PreferenceError(f"unknown agent {agent}")
        lst = prefs.worker_lists[agent.pos]
    if partner is None:
        return None
    if partner.side is agent.side or partner.pos not in lst:
        raise PreferenceError(f"{partner} is not on {agent}'s list")
    return lst.index(partner.pos) + 1


def matched_set(matching: Matching) -> frozenset[AgentId]:
    out = set()
    for f, w in matching.pairs():
        out.add(firm(f + 1))
        out.add(worker(w + 1))
    return frozenset(out)
