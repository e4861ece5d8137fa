"""An assortative market where a few added agents make every worker better off.

Start from an n x n market in which everybody agrees on the ranking of the
other side, and append k firms and k workers. In the resulting equilibrium
every worker's expected utility beats the stable map, and n-k-1 of the
original workers land a firm exactly k places higher in both states.

    python demos/everyone_gains.py --n 8 --k 3
"""

import argparse

from matchlab.constructions import prop4
from matchlab.game import expected_utility, is_bne, play, truthful_profile


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=8)
    parser.add_argument("--k", type=int, default=3)
    args = parser.parse_args()

    b = prop4(args.n, args.k)
    e, cand = b.economy, b.profiles["candidate"]
    classes = ["dropping"] * e.num_workers
    for w in b.info["strategic_workers"]:
        classes[w] = "full"
    rep = is_bne(e, cand, classes)
    strategic = ", ".join(e.worker_names[w] for w in b.info["strategic_workers"])
    print(f"equilibrium (full class for {strategic}, dropping for the rest): {rep.is_bne}")

    truth = truthful_profile(e)
    outcome = play(e, cand)
    print(f"\n{'worker':>6} {'stable':>7} {'s1':>4} {'s2':>4} {'EU stable':>10} {'EU cand':>8}")
    for w, name in enumerate(e.worker_names):
        stable_partner = e.firm_names[b.stable[0].worker_partner[w]]
        s1, s2 = (e.firm_names[mt.worker_partner[w]] for mt in outcome)
        print(f"{name:>6} {stable_partner:>7} {s1:>4} {s2:>4} "
              f"{str(expected_utility(e, truth, w)):>10} {str(expected_utility(e, cand, w)):>8}")

    climbers = ", ".join(e.worker_names[w] for w in b.info["rank_improvement"]["workers"])
    print(f"\nworkers climbing exactly {args.k} places in both states: {climbers}")


if __name__ == "__main__":
    main()
