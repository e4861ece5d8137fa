"""The centralized matching game: workers report, firms tell the truth, DA matches.

A worker's report is a tuple of firm positions, best first; a profile is one
report per worker. Expected utilities are exact. Sweeps over many profiles go
through a single table of outcomes so that every equilibrium check reduces to
array maxima over integer-scaled expected utilities.
"""

from __future__ import annotations

import enum
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from matchlab.economy import Economy, OutcomeMap, top_top_pairs
from matchlab.errors import BudgetExceededError, SizeBoundError
from matchlab.market import AgentId, Matching, Side, deferred_acceptance, firm, is_unique_stable, worker, _propose

Report = tuple[int, ...]
Profile = tuple[Report, ...]

DEFAULT_BUDGET = 10**8


def default_budget() -> int:
    env = os.environ.get("MATCHLAB_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


class StrategyClass(enum.Enum):
    TRUTHFUL = "truthful"
    TRUNCATION = "truncation"
    DROPPING = "dropping"
    FULL = "full"


ClassSpec = Union[StrategyClass, str, Sequence[Union[StrategyClass, str]]]


def _classes(spec: ClassSpec, num_workers: int) -> list[StrategyClass]:
    if isinstance(spec, (StrategyClass, str)):
        return [StrategyClass(spec)] * num_workers
    out = [StrategyClass(c) for c in spec]
    if len(out) != num_workers:
        raise ValueError("need one strategy class per worker")
    return out


def count_reports(true_list: Sequence[int], cls: StrategyClass | str, num_firms: int) -> int:
    cls = StrategyClass(cls)
    L = len(true_list)
    if cls is StrategyClass.TRUTHFUL:
        return 1
    if cls is StrategyClass.TRUNCATION:
        return L + 1
    if cls is StrategyClass.DROPPING:
        return 2**L
    return sum(math.perm(num_firms, k) for k in range(num_firms + 1))


def enumerate_reports(true_list: Sequence[int], cls: StrategyClass | str, num_firms: int) -> list[Report]:
    """Every report of a strategy class, without duplicates, in a fixed order.

    Truncations and droppings are taken relative to ``true_list`` (the
    worker's acceptable firms, best first); a full report is any ordered
    subset of all ``num_firms`` firms.
    """
    cls = StrategyClass(cls)
    true_list = tuple(true_list)
    if cls is StrategyClass.TRUTHFUL:
        return [true_list]
    if cls is StrategyClass.TRUNCATION:
        return [true_list[:k] for k in range(len(true_list) + 1)]
    if cls is StrategyClass.DROPPING:
        return [c for k in range(len(true_list) + 1) for c in itertools.combinations(true_list, k)]
    return [p for k in range(num_firms + 1) for p in itertools.permutations(range(num_firms), k)]


def truthful_profile(economy: Economy) -> Profile:
    return tuple(economy.worker_lists)


def is_weakly_undominated(report: Sequence[int], true_list: Sequence[int]) -> bool:
    """Sufficient criterion: the report is nonempty and starts with the true favourite."""
    return bool(report) and bool(true_list) and report[0] == true_list[0]


def play(economy: Economy, profile: Profile, proposing: Side = Side.FIRM) -> OutcomeMap:
    """State-by-state DA on firms' true lists and the workers' reports."""
    if len(profile) != economy.num_workers:
        raise ValueError(f"profile has {len(profile)} reports for {economy.num_workers} workers")
    return tuple(deferred_acceptance(p.with_worker_lists(profile), proposing) for p in economy.prefs)


def _scaled_utilities(economy: Economy) -> tuple[list[int], list[list[int]], int]:
    """Integer probability weights, integer worker utilities, and their common scale."""
    dp = math.lcm(*(p.denominator for p in economy.belief))
    du = math.lcm(*(u.denominator for row in economy.worker_utils for u in row))
    weights = [int(p * dp) for p in economy.belief]
    # util[j][f], with f = -1 (unmatched) mapped to the trailing 0
    util = [[int(economy.worker_utils[f][j] * du) for f in range(economy.num_firms)] + [0] for j in range(economy.num_workers)]
    return weights, util, dp * du


def expected_utility(economy: Economy, profile: Profile, w: int) -> Fraction:
    """Worker w's expected true utility from play; unmatched is worth 0."""
    total = Fraction(0)
    for p, mt in zip(economy.belief, play(economy, profile)):
        f = mt.worker_partner[w]
        if f is not None:
            total += p * economy.worker_utils[f][w]
    return total


class _Evaluator:
    """Fast repeated play on a fixed economy with cached per-report rank tables."""

    def __init__(self, economy: Economy):
        self.firm_lists = [p.firm_lists for p in economy.prefs]
        weights, util, scale = _scaled_utilities(economy)
        self.weights, self.util, self.scale = weights, util, scale
        self.num_workers = economy.num_workers
        self._ranks: dict[Report, dict[int, int]] = {}

    def ranks(self, report: Report) -> dict[int, int]:
        r = self._ranks.get(report)
        if r is None:
            r = self._ranks[report] = {f: k for k, f in enumerate(report)}
        return r

    def partners(self, profile: Sequence[Report]) -> tuple[tuple[int, ...], ...]:
        """Per state, each worker's firm position (-1 when unmatched)."""
        ranks = [self.ranks(r) for r in profile]
        out = []
        for fl in self.firm_lists:
            held = _propose(fl, ranks)
            out.append(tuple(-1 if f is None else f for f in held))
        return tuple(out)

    def scaled_eus(self, partners) -> list[int]:
        return [
            sum(wt * self.util[j][state[j]] for wt, state in zip(self.weights, partners))
            for j in range(self.num_workers)
        ]


def _table_chunk(economy: Economy, report_lists: Sequence[Sequence[Report]], first: Sequence[int]):
    ev = _Evaluator(economy)
    eus, keys = [], []
    rest = report_lists[1:]
    for i0 in first:
        head = (report_lists[0][i0],)
        for tail in itertools.product(*rest):
            part = ev.partners(head + tail)
            keys.append(part)
            eus.append(ev.scaled_eus(part))
    return eus, keys


@dataclass
class ProfileTable:
    """Outcomes and scaled expected utilities for every profile in a product grid."""

    report_lists: list[list[Report]]
    eu: np.ndarray  # shape (K_1, ..., K_n, n); expected utility times ``scale``
    outcome_id: np.ndarray  # shape (K_1, ..., K_n)
    outcomes: list[tuple[tuple[int, ...], ...]]  # per id: per state, worker -> firm or -1
    scale: int

    def profile(self, index: Sequence[int]) -> Profile:
        return tuple(self.report_lists[j][k] for j, k in enumerate(index))


def build_table(
    economy: Economy,
    report_lists: Sequence[Sequence[Report]],
    *,
    budget: int | None = None,
    n_jobs: int = 1,
) -> ProfileTable:
    """Play every profile in the product of ``report_lists``."""
    report_lists = [list(r) for r in report_lists]
    shape = tuple(len(r) for r in report_lists)
    size = math.prod(shape)
    budget = default_budget() if budget is None else budget
    if size > budget:
        raise BudgetExceededError(f"{size} profiles exceed the budget of {budget}")
    firsts = list(range(shape[0]))
    if n_jobs > 1 and shape[0] > 1:
        chunks = [c.tolist() for c in np.array_split(firsts, min(n_jobs, shape[0]))]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(_table_chunk, [economy] * len(chunks), [report_lists] * len(chunks), chunks))
    else:
        parts = [_table_chunk(economy, report_lists, firsts)]
    eus = [row for part in parts for row in part[0]]
    keys = [k for part in parts for k in part[1]]
    ids: dict = {}
    outcome_id = np.fromiter((ids.setdefault(k, len(ids)) for k in keys), dtype=np.int64, count=size)
    big = max((abs(x) for row in eus for x in row), default=0)
    dtype = np.int64 if big < 2**62 else object
    eu = np.array(eus, dtype=dtype).reshape(shape + (economy.num_workers,))
    _, _, scale = _scaled_utilities(economy)
    return ProfileTable(report_lists, eu, outcome_id.reshape(shape), list(ids), scale)


def bne_mask(table: ProfileTable) -> np.ndarray:
    """Boolean grid: no worker gains by switching to another report in its list."""
    eu = table.eu
    n = eu.shape[-1]
    ok = np.ones(eu.shape[:-1], dtype=bool)
    for j in range(n):
        own = eu[..., j]
        best = own.max(axis=j, keepdims=True)
        ok &= own >= best
    return ok


def _outcome_from_partners(economy: Economy, partners) -> OutcomeMap:
    out = []
    for state in partners:
        pairs = [(f, j) for j, f in enumerate(state) if f >= 0]
        out.append(Matching.from_pairs(economy.num_firms, economy.num_workers, pairs))
    return tuple(out)


@dataclass(frozen=True)
class Deviation:
    worker: int
    report: Report
    gain: Fraction


@dataclass(frozen=True)
class EquilibriumReport:
    profile: Profile
    is_bne: bool
    witness: Deviation | None
    unique_stable: tuple[bool, ...]
    undominated: tuple[bool, ...]

    def __bool__(self) -> bool:
        return self.is_bne


def _best_by_enumeration(economy: Economy, profile: Profile, w: int, reports: Iterable[Report], ev: _Evaluator):
    best_val, best = None, []
    prof = list(profile)
    for r in reports:
        prof[w] = r
        val = ev.scaled_eus(ev.partners(prof))[w]
        if best_val is None or val > best_val:
            best_val, best = val, [r]
        elif val == best_val:
            best.append(r)
    return best_val, best


def best_responses(
    economy: Economy, profile: Profile, w: int, cls: StrategyClass | str = StrategyClass.FULL, *, max_reports: int = 10**6
) -> tuple[Fraction, list[Report]]:
    """Highest expected utility worker w can reach within a class, and every report reaching it."""
    true_list = economy.worker_lists[w]
    n_rep = count_reports(true_list, cls, economy.num_firms)
    if n_rep > max_reports:
        raise SizeBoundError(f"{n_rep} reports exceed max_reports={max_reports}")
    ev = _Evaluator(economy)
    val, best = _best_by_enumeration(economy, profile, w, enumerate_reports(true_list, cls, economy.num_firms), ev)
    return Fraction(val, ev.scale), best


def unique_stable_for_reported(economy: Economy, profile: Profile) -> tuple[bool, ...]:
    return tuple(is_unique_stable(p.with_worker_lists(profile)) for p in economy.prefs)


def is_bne(
    economy: Economy,
    profile: Profile,
    cls: ClassSpec = StrategyClass.FULL,
    *,
    search: str = "auto",
    enumerate_limit: int = 50_000,
) -> EquilibriumReport:
    """Check that no worker has a strictly profitable deviation.

    ``cls`` is a strategy class for every worker or one class per worker.
    Full-class deviations are enumerated when there are at most
    ``enumerate_limit`` of them (or ``search="enumerate"``); otherwise the
    worker's reachable outcomes are explored through DA's pairwise decisions
    (see :mod:`matchlab.deviations`), which covers the same deviation set.
    """
    from matchlab.deviations import best_full_deviation

    profile = tuple(tuple(r) for r in profile)
    classes = _classes(cls, economy.num_workers)
    ev = _Evaluator(economy)
    current = ev.scaled_eus(ev.partners(profile))
    witness = None
    for w, c in enumerate(classes):
        if c is StrategyClass.TRUTHFUL and profile[w] == economy.worker_lists[w]:
            continue
        true_list = economy.worker_lists[w]
        use_search = c is StrategyClass.FULL and (
            search == "comparisons"
            or search == "auto" and count_reports(true_list, c, economy.num_firms) > enumerate_limit
        )
        if use_search:
            val, rep = best_full_deviation(economy, profile, w, ev)
        else:
            val, reps = _best_by_enumeration(economy, profile, w, enumerate_reports(true_list, c, economy.num_firms), ev)
            # prefer a witness that lists the true favourite first
            rep = next((r for r in reps if is_weakly_undominated(r, true_list)), reps[0])
        if val > current[w]:
            witness = Deviation(w, rep, Fraction(val - current[w], ev.scale))
            break
    return EquilibriumReport(
        profile,
        witness is None,
        witness,
        unique_stable_for_reported(economy, profile),
        tuple(is_weakly_undominated(r, t) for r, t in zip(profile, economy.worker_lists)),
    )


@dataclass(frozen=True)
class BneOutcome:
    outcome: OutcomeMap
    representative: Profile
    count: int


def enumerate_bne(
    economy: Economy,
    cls: StrategyClass | str = StrategyClass.FULL,
    *,
    undominated_only: bool = False,
    budget: int | None = None,
    n_jobs: int = 1,
) -> list[BneOutcome]:
    """Sweep every profile in a class and group the equilibria by outcome.

    Deviations range over the whole class; with ``undominated_only`` only
    candidate profiles whose reports list the true favourite first are kept.
    Groups come in order of their first profile in the lexicographic sweep,
    and that profile is the group's representative.
    """
    size = math.prod(count_reports(t, cls, economy.num_firms) for t in economy.worker_lists)
    limit = default_budget() if budget is None else budget
    if size > limit:
        raise BudgetExceededError(f"{size} profiles exceed the budget of {limit}")
    lists = [enumerate_reports(t, cls, economy.num_firms) for t in economy.worker_lists]
    table = build_table(economy, lists, budget=budget, n_jobs=n_jobs)
    mask = bne_mask(table)
    if undominated_only:
        for j, (reps, t) in enumerate(zip(lists, economy.worker_lists)):
            keep = np.array([is_weakly_undominated(r, t) for r in reps])
            idx = [slice(None)] * len(lists)
            idx[j] = ~keep
            mask[tuple(idx)] = False
    groups: dict[int, list] = {}
    for flat in np.flatnonzero(mask):
        index = np.unravel_index(flat, mask.shape)
        oid = int(table.outcome_id[index])
        if oid in groups:
            groups[oid][1] += 1
        else:
            groups[oid] = [table.profile(index), 1]
    return [
        BneOutcome(_outcome_from_partners(economy, table.outcomes[oid]), rep, cnt)
        for oid, (rep, cnt) in groups.items()
    ]


def is_dominated_exact(
    report: Sequence[int], w: int, economy: Economy, cls: StrategyClass | str = StrategyClass.FULL, *, max_size: int = 3
) -> bool:
    """Exact weak dominance within a class against every opposing profile of that class.

    True when some other report of the class gives worker w at least the same
    expected utility against every profile of the other workers and strictly
    more against at least one.
    """
    if economy.num_firms > max_size or economy.num_workers > max_size:
        raise SizeBoundError(f"exact dominance is limited to {max_size}x{max_size} economies")
    report = tuple(report)
    lists = [enumerate_reports(t, cls, economy.num_firms) for t in economy.worker_lists]
    own = [r for r in lists[w] if r != report]
    lists[w] = [report] + own
    table = build_table(economy, lists)
    vals = np.moveaxis(table.eu[..., w], w, 0).reshape(len(lists[w]), -1)
    base = vals[0]
    for row in vals[1:]:
        if np.all(row >= base) and np.any(row > base):
            return True
    return False


def verify_top_top_matched(economy: Economy, outcome: OutcomeMap) -> bool:
    """Every top-top pair of each state's true market is matched in that state."""
    for prefs, mt in zip(economy.prefs, outcome):
        for f, w in top_top_pairs(prefs):
            if mt.firm_partner[f] != w:
                return False
    return True


class Verdict(enum.Enum):
    PREFERS_A = "prefers_a"
    PREFERS_B = "prefers_b"
    INDIFFERENT = "indifferent"


def _verdict(a: Fraction, b: Fraction) -> Verdict:
    return Verdict.PREFERS_A if a > b else Verdict.PREFERS_B if b > a else Verdict.INDIFFERENT


def outcome_utilities(economy: Economy, outcome: OutcomeMap) -> dict[AgentId, Fraction]:
    """Expected true utility of every agent under an outcome map."""
    out: dict[AgentId, Fraction] = {}
    for i in range(economy.num_firms):
        out[firm(i + 1)] = sum(
            (p * fu[i][mt.firm_partner[i]] for p, fu, mt in zip(economy.belief, economy.firm_utils, outcome) if mt.firm_partner[i] is not None),
            Fraction(0),
        )
    for j in range(economy.num_workers):
        out[worker(j + 1)] = sum(
            (p * economy.worker_utils[mt.worker_partner[j]][j] for p, mt in zip(economy.belief, outcome) if mt.worker_partner[j] is not None),
            Fraction(0),
        )
    return out


def compare_outcomes(economy: Economy, a: OutcomeMap, b: OutcomeMap) -> dict[AgentId, Verdict]:
    """Each agent's ranking of two outcome maps by expected true utility."""
    ua, ub = outcome_utilities(economy, a), outcome_utilities(economy, b)
    return {agent: _verdict(ua[agent], ub[agent]) for agent in ua}


def _rank(lst: Sequence[int], partner: int | None) -> int:
    if partner is None or partner not in lst:
        return len(lst) + 1
    return lst.index(partner) + 1


def rank_stats(
    economy: Economy,
    base: OutcomeMap,
    alt: OutcomeMap,
    agents: Iterable[AgentId],
    *,
    among: Mapping[Side, Iterable[int]] | None = None,
) -> tuple[Fraction, ...]:
    """Per state, the mean of (rank of base partner - rank of alt partner).

    Ranks are 1-based positions in the agent's true list; unmatched (or an
    unacceptable partner) counts as one past the end. ``among`` restricts the
    lists to a subset of partner positions per side, e.g. the firms of an
    original market inside an augmented one; partners outside it raise.
    """
    agents = list(agents)
    if not agents:
        raise ValueError("need at least one agent")
    out = []
    for s, prefs in enumerate(economy.prefs):
        total = 0
        for agent in agents:
            if agent.side is Side.FIRM:
                lst, pa, pb = prefs.firm_lists[agent.pos], base[s].firm_partner[agent.pos], alt[s].firm_partner[agent.pos]
                keep = None if among is None else set(among.get(Side.WORKER, range(economy.num_workers)))
            else:
                lst, pa, pb = prefs.worker_lists[agent.pos], base[s].worker_partner[agent.pos], alt[s].worker_partner[agent.pos]
                keep = None if among is None else set(among.get(Side.FIRM, range(economy.num_firms)))
            if keep is not None:
                lst = [x for x in lst if x in keep]
                for p in (pa, pb):
                    if p is not None and p not in keep:
                        raise ValueError(f"partner of {agent} lies outside the restricted set")
            total += _rank(lst, pa) - _rank(lst, pb)
        out.append(Fraction(total, len(agents)))
    return tuple(out)
