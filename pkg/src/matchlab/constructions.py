"""Generators for the example economies and the fragility constructions.

Each generator returns a :class:`ConstructionBundle` whose expected outcome
maps have been checked against :func:`matchlab.game.play` and whose utility
inequalities have been asserted; any mismatch raises
:class:`~matchlab.errors.ConstructionError`.

Cardinal utilities come from list positions (top of a list of length L is
worth L, the bottom 1); the few entries that must be "high" or "close" are
then overridden with explicit rationals chosen from the belief.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from matchlab.economy import Economy, OutcomeMap, stable_outcome_map, validate_augmented
from matchlab.errors import ConstructionError
from matchlab.game import Profile, play, truthful_profile
from matchlab.market import Market, Matching, Side, deferred_acceptance, is_unique_stable


@dataclass(frozen=True)
class Constraint:
    """Asserted strict inequality ``left > right``."""

    description: str
    left: Fraction
    right: Fraction

    @property
    def holds(self) -> bool:
        return self.left > self.right


@dataclass
class ConstructionBundle:
    name: str
    economy: Economy
    stable: OutcomeMap
    profiles: dict[str, Profile]
    expected: dict[str, OutcomeMap]
    constraints: list[Constraint] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def verify(self) -> None:
        for c in self.constraints:
            if not c.holds:
                raise ConstructionError(f"{self.name}: constraint failed: {c.description} ({c.left} <= {c.right})")
        if stable_outcome_map(self.economy) != self.stable:
            raise ConstructionError(f"{self.name}: stable outcome map differs from the expected one")
        for label, profile in self.profiles.items():
            got = play(self.economy, profile)
            if got != self.expected[label]:
                shown = [m.describe(self.economy.firm_names, self.economy.worker_names) for m in got]
                raise ConstructionError(f"{self.name}: profile {label} plays to {shown}, not the expected outcome")


def _positional(lists_by_agent: Sequence[Sequence[int]], size: int) -> list[list[Fraction]]:
    """utils[a][b] for agent a and partner b; top of an L-long list gets L."""
    out = []
    for lst in lists_by_agent:
        if sorted(lst) != list(range(size)):
            raise ConstructionError(f"incomplete list {lst}")
        row = [Fraction(0)] * size
        for pos, b in enumerate(lst):
            row[b] = Fraction(len(lst) - pos)
        out.append(row)
    return out


def _economy(
    firm_lists_by_state: Sequence[Sequence[Sequence[int]]],
    worker_lists: Sequence[Sequence[int]],
    belief: Sequence[Fraction],
    firm_names: Sequence[str],
    worker_names: Sequence[str],
    worker_overrides: dict[tuple[int, int], Fraction] | None = None,
) -> Economy:
    m, n = len(firm_names), len(worker_names)
    firm_utils = [_positional(lists, n) for lists in firm_lists_by_state]
    per_worker = _positional(worker_lists, m)
    worker_utils = [[per_worker[j][i] for j in range(n)] for i in range(m)]
    for (i, j), v in (worker_overrides or {}).items():
        worker_utils[i][j] = v
    return Economy(firm_utils, worker_utils, tuple(belief), (), tuple(firm_names), tuple(worker_names))


def _outcome(m: int, n: int, per_state_pairs: Sequence[Sequence[tuple[int, int]]]) -> OutcomeMap:
    return tuple(Matching.from_pairs(m, n, pairs) for pairs in per_state_pairs)


def _belief(p1) -> tuple[Fraction, Fraction]:
    p1 = Fraction(p1)
    if not 0 < p1 < 1:
        raise ValueError("state-1 probability must lie strictly between 0 and 1")
    return p1, 1 - p1


MOTIVATING_FIRM_UTILS = (
    ((3, 1, 2), (2, 3, 1), (1, 2, 3)),
    ((3, 1, 2), (1, 3, 2), (1, 2, 3)),
)
MOTIVATING_WORKER_UTILS = ((2, 5, 2), (5, 2, 5), (1, 1, 1))

# reports of the three non-truthful equilibria, as firm positions
MOTIVATING_PROFILES = {
    "lambda1": ((1, 2), (0, 1, 2), (1, 2)),
    "lambda2": ((1, 2), (0, 2, 1), (1, 0, 2)),
    "lambda3": ((1, 2, 0), (0, 1, 2), (1,)),
}
MOTIVATING_OUTCOMES = {
    "lambda1": ([(1, 0), (0, 1), (2, 2)], [(2, 0), (0, 1), (1, 2)]),
    "lambda2": ([(1, 0), (2, 1), (0, 2)], [(2, 0), (0, 1), (1, 2)]),
    "lambda3": ([(1, 0), (0, 1)], [(2, 0), (0, 1), (1, 2)]),
}


def motivating_example(p1=Fraction(1, 2)) -> ConstructionBundle:
    """Three firms, three workers, two states; only firm f2's ranking of w1 and w3 moves."""
    economy = Economy(MOTIVATING_FIRM_UTILS, MOTIVATING_WORKER_UTILS, _belief(p1))
    diag = [(i, i) for i in range(3)]
    stable = _outcome(3, 3, [diag, diag])
    profiles = {"truthful": truthful_profile(economy), **MOTIVATING_PROFILES}
    expected = {"truthful": stable, **{k: _outcome(3, 3, v) for k, v in MOTIVATING_OUTCOMES.items()}}
    bundle = ConstructionBundle("motivating", economy, stable, profiles, expected)
    bundle.verify()
    return bundle


def _high_value(p: Fraction, low_other: Fraction, target: Fraction, floor: Fraction) -> Fraction:
    """Smallest convenient H >= floor with p*H + (1-p)*low_other > target."""
    need = (target - (1 - p) * low_other) / p
    return max(floor, Fraction(int(need) + 1))


def example2(n: int, p1=Fraction(1, 2)) -> ConstructionBundle:
    """n x n no-cycle market augmented with one firm ``f`` and one worker ``w``.

    Positions: original firms/workers 0..n-1, then ``f``/``w`` at position n.
    """
    if n < 3:
        raise ValueError("example2 needs n >= 3")
    p, q = _belief(p1)
    F, W = n, n  # added agents
    orig = list(range(n))

    def base_firm(i):  # 0-based i
        return orig[i:] + orig[:i][::-1]

    firm_lists = {1: [], 2: []}
    for s in (1, 2):
        for i in range(n):
            if i == n - 2:
                tail = orig[: n - 2][::-1]
                lst = [n - 2, W, n - 1] + tail if s == 1 else [n - 2, n - 1, W] + tail
            else:
                lst = base_firm(i) + [W]
            firm_lists[s].append(lst)
        firm_lists[s].append([W, n - 1, 0] + orig[1 : n - 1])
    worker_lists = []
    for i in range(n):
        if i == 0:
            worker_lists.append([F] + orig)
        else:
            worker_lists.append(orig[:i][::-1] + [F] + orig[i:])
    worker_lists.append([n - 2, F, n - 1] + orig[: n - 2])

    # w prefers the lottery (f_{n-1} in state 1, f_n in state 2) to f for sure
    u_f = Fraction(n)
    u_fn = Fraction(n - 1)
    high = _high_value(p, u_fn, u_f, Fraction(10 * (n + 1)))
    # w_n's utility from f sits just above f_n
    u_top = Fraction(n + 1)
    close = 1 + min(Fraction(1, 2), q * (u_top - 1) / 2)
    overrides = {(n - 2, W): high, (F, n - 1): close}
    names_f = [f"f{i + 1}" for i in range(n)] + ["f"]
    names_w = [f"w{i + 1}" for i in range(n)] + ["w"]
    economy = _economy([firm_lists[1], firm_lists[2]], worker_lists, (p, q), names_f, names_w, overrides)

    constraints = [
        Constraint("w: EU of f_{n-1} in state 1 and f_n in state 2 exceeds f for sure", p * high + q * u_fn, u_f),
        Constraint("w_n: EU of f_n in state 1 and f_{n-1} in state 2 exceeds f for sure", p * 1 + q * u_top, close),
    ]
    mu = [(i, i) for i in range(n + 1)]
    stable = _outcome(n + 1, n + 1, [mu, mu])

    truthful = truthful_profile(economy)
    cand = list(truthful)
    cand[W] = tuple(x for x in truthful[W] if x != F)
    cand[n - 1] = tuple(x for x in truthful[n - 1] if x != F)
    cand = tuple(cand)
    common = [(F, 0)] + [(i - 1, i) for i in range(1, n - 1)]
    lam1 = common + [(n - 2, W), (n - 1, n - 1)]
    lam2 = common + [(n - 2, n - 1), (n - 1, W)]
    expected = {"truthful": stable, "candidate": _outcome(n + 1, n + 1, [lam1, lam2])}
    bundle = ConstructionBundle(
        f"example2(n={n})",
        economy,
        stable,
        {"truthful": truthful, "candidate": cand},
        expected,
        constraints,
        {"original_firms": orig, "original_workers": orig, "added_firms": [F], "added_workers": [W]},
    )
    bundle.verify()
    return bundle


def prop4(n: int, k: int, p1=Fraction(1, 2)) -> ConstructionBundle:
    """Assortative n x n market augmented with k firms ``F1..Fk`` and k workers ``W1..Wk``.

    Positions: original agents 0..n-1, added agent ``Fi``/``Wi`` at n + i - 1.
    """
    if n < 3:
        raise ValueError("prop4 needs n >= 3")
    if not 1 <= k <= n - 2:
        raise ValueError(f"k must satisfy 1 <= k <= n-2, got k={k}, n={n}")
    p, q = _belief(p1)
    orig = list(range(n))
    new = [n + i for i in range(k)]  # new[0] is F1 / W1

    def rest(lead, universe):
        return lead + [x for x in universe if x not in lead]

    everyone = orig + new
    firm_lists = {1: [], 2: []}
    for s in (1, 2):
        for i in range(n):  # firm f_{i+1}
            if i == n - 2:
                if s == 1:
                    lst = orig[: n - 1] + [new[0], n - 1] + new[1:]
                else:
                    lst = orig + new
            elif n - k - 1 <= i <= n - 3:
                partner = new[n - (i + 1) - 1]  # W_{n-i} in 1-based terms
                lst = orig[: n - 1] + [partner, n - 1] + [x for x in new if x != partner]
            else:
                lst = orig + new
            firm_lists[s].append(lst)
        firm_lists[s].append(rest([new[0], n - 1, 0], everyone))
        for i in range(1, k):
            firm_lists[s].append(rest([new[i], i], everyone))

    worker_lists = []
    for i in range(n):  # worker w_{i+1}
        if i < k:
            worker_lists.append([new[i]] + [x for x in new if x != new[i]] + orig)
        elif i < n - 1:
            worker_lists.append(orig[:i] + new + orig[i:])
        else:
            worker_lists.append(orig[: n - 1] + [new[0], n - 1] + new[1:])
    worker_lists.append(rest([n - 2, new[0], n - 1], everyone))
    for i in range(1, k):
        worker_lists.append(rest([n - (i + 1) - 1, new[i]], everyone))

    L = n + k
    # W1: lottery over f_{n-1} / f_n beats F1 for sure
    u_F1_for_W1 = Fraction(L - 1)
    u_fn_for_W1 = Fraction(L - 2)
    high = _high_value(p, u_fn_for_W1, u_F1_for_W1, Fraction(10 * L))
    # w_n: F1 just above f_n
    u_fn_for_wn = Fraction(k)
    u_fn1_for_wn = Fraction(k + 2)
    close = u_fn_for_wn + min(Fraction(1, 2), q * (u_fn1_for_wn - u_fn_for_wn) / 2)
    W1, F1 = new[0], new[0]
    overrides = {(n - 2, W1): high, (F1, n - 1): close}
    names_f = [f"f{i + 1}" for i in range(n)] + [f"F{i + 1}" for i in range(k)]
    names_w = [f"w{i + 1}" for i in range(n)] + [f"W{i + 1}" for i in range(k)]
    economy = _economy([firm_lists[1], firm_lists[2]], worker_lists, (p, q), names_f, names_w, overrides)

    constraints = [
        Constraint("W1: EU of f_{n-1} in state 1 and f_n in state 2 exceeds F1 for sure", p * high + q * u_fn_for_W1, u_F1_for_W1),
        Constraint("w_n: EU of f_n in state 1 and f_{n-1} in state 2 exceeds F1 for sure", p * u_fn_for_wn + q * u_fn1_for_wn, close),
    ]
    mu = [(i, i) for i in range(n + k)]
    stable = _outcome(n + k, n + k, [mu, mu])

    truthful = truthful_profile(economy)
    cand = list(truthful)
    cand[W1] = tuple(x for x in truthful[W1] if x != F1)
    cand[n - 1] = tuple(x for x in truthful[n - 1] if x != F1)
    dropped = set(range(n - k - 1, n - 2))  # f_{n-k} .. f_{n-2}
    cand[n - 2] = tuple(x for x in truthful[n - 2] if x not in dropped)
    cand = tuple(cand)

    common = [(n - (i + 1) - 1, new[i]) for i in range(1, k)]  # W_i -> f_{n-i}
    common += [(new[i], i) for i in range(k)]  # w_i -> F_i
    common += [(i - k, i) for i in range(k, n - 1)]  # w_i -> f_{i-k}
    lam1 = common + [(n - 2, W1), (n - 1, n - 1)]
    lam2 = common + [(n - 2, n - 1), (n - 1, W1)]
    expected = {"truthful": stable, "candidate": _outcome(n + k, n + k, [lam1, lam2])}
    improved = list(range(k, n - 1))
    bundle = ConstructionBundle(
        f"prop4(n={n},k={k})",
        economy,
        stable,
        {"truthful": truthful, "candidate": cand},
        expected,
        constraints,
        {
            "original_firms": orig,
            "original_workers": orig,
            "added_firms": new,
            "added_workers": new,
            "strategic_workers": [W1, n - 1, n - 2],
            "rank_improvement": {"workers": improved, "k": k},
        },
    )
    bundle.verify()
    return bundle


def append_block(original: Market, p1=Fraction(1, 2)) -> ConstructionBundle:
    """Append the motivating example's three firms and workers beside an original market.

    Agents of one block find every agent of the other block unacceptable, so
    DA runs on the two blocks independently whatever the reports are.
    """
    if not is_unique_stable(original.prefs):
        raise ConstructionError("the original market must have a unique stable matching")
    p, q = _belief(p1)
    m0, n0 = original.num_firms, original.num_workers
    m, n = m0 + 3, n0 + 3
    names_f = list(original.firm_names) + [f"bf{b + 1}" for b in range(3)]
    names_w = list(original.worker_names) + [f"bw{b + 1}" for b in range(3)]
    if len(set(names_f) | set(names_w)) != m + n:
        raise ConstructionError("block agent names clash with the original market's names")

    def below(values, k):
        # k-th distinct value under every existing one and under 0
        return min([Fraction(0), *values]) - 1 - k

    worker_utils = [[Fraction(0)] * n for _ in range(m)]
    for i in range(m0):
        for j in range(n0):
            worker_utils[i][j] = original.worker_utils[i][j]
    for j in range(n0):
        col = [original.worker_utils[i][j] for i in range(m0)]
        for b in range(3):
            worker_utils[m0 + b][j] = below(col, b)
    for b in range(3):
        for i in range(m0):
            worker_utils[i][n0 + b] = Fraction(-1 - i)
        for c in range(3):
            worker_utils[m0 + c][n0 + b] = Fraction(MOTIVATING_WORKER_UTILS[c][b])

    firm_utils = []
    for state_block in MOTIVATING_FIRM_UTILS:
        fu = [[Fraction(0)] * n for _ in range(m)]
        for i in range(m0):
            row = original.firm_utils[i]
            for j in range(n0):
                fu[i][j] = row[j]
            for b in range(3):
                fu[i][n0 + b] = below(row, b)
        for c in range(3):
            for j in range(n0):
                fu[m0 + c][j] = Fraction(-1 - j)
            for b in range(3):
                fu[m0 + c][n0 + b] = Fraction(state_block[c][b])
        firm_utils.append(fu)
    economy = Economy(firm_utils, worker_utils, (p, q), (), tuple(names_f), tuple(names_w))

    base = deferred_acceptance(original.prefs, Side.FIRM).pairs()
    diag = [(m0 + b, n0 + b) for b in range(3)]
    stable = _outcome(m, n, [base + diag, base + diag])
    truthful = truthful_profile(economy)
    profiles = {"truthful": truthful}
    expected = {"truthful": stable}
    for label, reports in MOTIVATING_PROFILES.items():
        prof = list(truthful)
        for b in range(3):
            prof[n0 + b] = tuple(m0 + f for f in reports[b])
        profiles[label] = tuple(prof)
        expected[label] = _outcome(
            m, n, [base + [(m0 + f, n0 + w) for f, w in pairs] for pairs in MOTIVATING_OUTCOMES[label]]
        )
    report = validate_augmented(original, economy, list(range(m0, m)), list(range(n0, n)))
    if not report:
        raise ConstructionError("append_block: " + "; ".join(report.failures))
    bundle = ConstructionBundle(
        "append",
        economy,
        stable,
        profiles,
        expected,
        [],
        {
            "original_firms": list(range(m0)),
            "original_workers": list(range(n0)),
            "added_firms": list(range(m0, m)),
            "added_workers": list(range(n0, n)),
        },
    )
    bundle.verify()
    return bundle
