"""Exact best responses over all ordered reports without listing them.

With every other report fixed, a worker influences firm-proposing DA only
through the accept/reject decisions it makes when a firm proposes. Each
decision compares the new proposer with the firm currently held (or with being
unmatched), so a report acts on play through a set of pairwise comparisons
on firms plus an "unmatched" marker. Exploring DA while branching only on
comparisons not yet implied by earlier ones visits every outcome any report
can produce, in every state at once, and each branch is realised by any
linear extension of its comparisons.
"""

from __future__ import annotations

from fractions import Fraction
from graphlib import TopologicalSorter
from typing import Iterator, Sequence

from matchlab.economy import Economy


class _NeedDecision(Exception):
    pass


def _add(better: list[list[bool]], a: int, b: int) -> None:
    size = len(better)
    above = [x for x in range(size) if x == a or better[x][a]]
    below = [y for y in range(size) if y == b or better[b][y]]
    for x in above:
        row = better[x]
        for y in below:
            row[y] = True


def _replay(firm_lists_by_state, ranks, w: int, num_firms: int, decisions: Sequence[bool]):
    none = num_firms
    better = [[False] * (num_firms + 1) for _ in range(num_firms + 1)]
    used = 0

    def prefers(a: int, b: int) -> bool:
        nonlocal used
        if better[a][b]:
            return True
        if better[b][a]:
            return False
        if used == len(decisions):
            raise _NeedDecision
        choice = decisions[used]
        used += 1
        if choice:
            _add(better, a, b)
        else:
            _add(better, b, a)
        return choice

    outcome = []
    n = len(ranks)
    for firm_lists in firm_lists_by_state:
        held: list[int | None] = [None] * n
        nxt = [0] * num_firms
        free = list(range(num_firms - 1, -1, -1))
        while free:
            p = free.pop()
            lst = firm_lists[p]
            k = nxt[p]
            while k < len(lst):
                r = lst[k]
                k += 1
                cur = held[r]
                if r == w:
                    if prefers(p, none if cur is None else cur):
                        held[r] = p
                        if cur is not None:
                            free.append(cur)
                        break
                    continue
                rk = ranks[r].get(p)
                if rk is None:
                    continue
                if cur is None:
                    held[r] = p
                    break
                if rk < ranks[r][cur]:
                    held[r] = p
                    free.append(cur)
                    break
            nxt[p] = k
        outcome.append(held[w])
    return tuple(outcome), better


def _extension(better: list[list[bool]], num_firms: int) -> tuple[int, ...]:
    ts = TopologicalSorter({b: {a for a in range(num_firms + 1) if better[a][b]} for b in range(num_firms + 1)})
    order = list(ts.static_order())
    return tuple(order[: order.index(num_firms)])


def reachable_outcomes(economy: Economy, profile: Sequence[Sequence[int]], w: int) -> Iterator[tuple[tuple[int, ...], tuple[int | None, ...]]]:
    """Yield (report, per-state partner of w) for every distinct way w can steer DA.

    Every report of any length and order produces one of the yielded
    per-state outcomes, and each yielded report produces its outcome.
    """
    m = economy.num_firms
    firm_lists_by_state = [p.firm_lists for p in economy.prefs]
    ranks = [{f: k for k, f in enumerate(r)} for r in profile]
    stack: list[list[bool]] = [[]]
    while stack:
        decisions = stack.pop()
        try:
            outcome, better = _replay(firm_lists_by_state, ranks, w, m, decisions)
        except _NeedDecision:
            stack.append(decisions + [False])
            stack.append(decisions + [True])
            continue
        yield _extension(better, m), outcome


def best_full_deviation(economy: Economy, profile, w: int, ev=None) -> tuple[int, tuple[int, ...]]:
    """Best integer-scaled expected utility over all reports of w, with a report attaining it."""
    if ev is None:
        from matchlab.game import _Evaluator

        ev = _Evaluator(economy)
    util = ev.util[w]
    best_val, best_rep = None, ()
    for report, outcome in reachable_outcomes(economy, profile, w):
        val = sum(wt * util[-1 if f is None else f] for wt, f in zip(ev.weights, outcome))
        if best_val is None or val > best_val:
            best_val, best_rep = val, report
    return best_val, best_rep


def max_expected_utility(economy: Economy, profile, w: int) -> tuple[Fraction, tuple[int, ...]]:
    """Exact best-response value over all ordered reports, and one maximiser."""
    from matchlab.game import _Evaluator

    ev = _Evaluator(economy)
    val, rep = best_full_deviation(economy, profile, w, ev)
    return Fraction(val, ev.scale), rep
