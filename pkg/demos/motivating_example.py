"""Walk through the three-by-three example with two states.

Prints the stable map, the three manipulated equilibria, each worker's
expected utility, and why truncation alone does not reach the gains that
dropping a firm does.

    python demos/motivating_example.py [--p1 1/3]
"""

import argparse
from fractions import Fraction

from matchlab.constructions import motivating_example
from matchlab.game import Verdict, best_responses, compare_outcomes, enumerate_bne, expected_utility, is_bne


def show(economy, outcome):
    for s, mt in enumerate(outcome, start=1):
        print(f"    state {s}: {mt.describe(economy.firm_names, economy.worker_names)}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--p1", type=Fraction, default=Fraction(1, 2), help="probability of state 1")
    args = parser.parse_args()

    b = motivating_example(args.p1)
    e = b.economy
    print(f"belief over states: {', '.join(str(p) for p in e.belief)}")

    for label, profile in b.profiles.items():
        eus = ", ".join(f"{e.worker_names[w]}={expected_utility(e, profile, w)}" for w in range(e.num_workers))
        verdict = "equilibrium" if is_bne(e, profile, "full") else "NOT an equilibrium"
        print(f"\n{label}: {verdict}; expected utilities {eus}")
        show(e, b.expected[label])

    groups = enumerate_bne(e, "full", undominated_only=True)
    print(f"\nequilibrium outcomes over all 16^3 full-class profiles (undominated reports only): {len(groups)}")
    for g in groups:
        print(f"  {g.count} profile(s), e.g. {[[e.firm_names[f] for f in r] for r in g.representative]}")

    lam1 = b.profiles["lambda1"]
    for w in (0, 2):
        best, _ = best_responses(e, lam1, w, "truncation")
        print(f"\n{e.worker_names[w]}: best truncation earns {best}, its dropping report earns "
              f"{expected_utility(e, lam1, w)}")

    verdicts = compare_outcomes(e, b.expected["lambda2"], b.expected["lambda1"])
    names = {Verdict.PREFERS_A: "prefers lambda2", Verdict.PREFERS_B: "prefers lambda1",
             Verdict.INDIFFERENT: "indifferent"}
    print("\nlambda2 against lambda1 (neither side agrees on a favourite):")
    for agent, v in sorted(verdicts.items()):
        print(f"  {agent}: {names[v]}")


if __name__ == "__main__":
    main()
