"""Adding one firm and one worker to a well-behaved market.

The original n x n market has no preference cycles, so on its own every
equilibrium reproduces its stable matching. Add a single firm and worker
whose preferences shift between two states and a profile of undominated
reports becomes an equilibrium in which the original workers climb about
n/2 places each.

    python demos/fragility.py --n 6 10 14
"""

import argparse
import time

from matchlab.constructions import example2
from matchlab.economy import find_preference_cycles
from matchlab.game import is_bne, play, rank_stats, unique_stable_for_reported
from matchlab.market import worker


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, nargs="+", default=[4, 6, 10])
    args = parser.parse_args()

    print(f"{'n':>3} {'cycles':>7} {'BNE':>5} {'unique':>7} {'gain s1':>8} {'gain s2':>8} {'secs':>6}")
    for n in args.n:
        b = example2(n)
        e, cand = b.economy, b.profiles["candidate"]
        base_cycles = any(find_preference_cycles(mk.restrict(range(n), range(n)), limit=1) for mk in e.markets)
        start = time.perf_counter()
        rep = is_bne(e, cand, "full")
        secs = time.perf_counter() - start
        originals = [worker(j + 1) for j in b.info["original_workers"]]
        g1, g2 = rank_stats(e, b.stable, play(e, cand), originals)
        unique = all(unique_stable_for_reported(e, cand))
        print(f"{n:>3} {base_cycles!s:>7} {rep.is_bne!s:>5} {unique!s:>7} {str(g1):>8} {str(g2):>8} {secs:>6.2f}")

    b = example2(args.n[0])
    e = b.economy
    print(f"\ncandidate reports for n={args.n[0]}:")
    for name, report in zip(e.worker_names, b.profiles["candidate"]):
        print(f"  {name:>3}: {' '.join(e.firm_names[f] for f in report)}")


if __name__ == "__main__":
    main()
