"""Bolt the small three-firm example onto any uniquely stable market.

The appended block is walled off from the original agents, so the original
pairs keep their stable partners under every profile, while the block
brings along its own non-stable equilibria. The combined economy therefore
has equilibrium outcomes that are not the stable map, whatever structure
the original market had.

    python demos/append_block.py --seed 3 --size 3
"""

import argparse
import random

from matchlab.constructions import append_block
from matchlab.economy import has_spc, validate_augmented
from matchlab.game import is_bne, play
from matchlab.sampling import random_market


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--size", type=int, default=3)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    while True:
        original = random_market(rng, args.size, args.size)
        if has_spc(original):
            break
    print(f"original {args.size}x{args.size} market satisfies SPC, so its stable matching is unique")

    b = append_block(original)
    e = b.economy
    report = validate_augmented(original, e, b.info["added_firms"], b.info["added_workers"])
    print(f"augmentation valid: {report.ok}")
    print("stable map (identical in both states):")
    print("  " + b.stable[0].describe(e.firm_names, e.worker_names))
    for label in ("lambda1", "lambda2", "lambda3"):
        profile = b.profiles[label]
        out = play(e, profile)
        print(f"\n{label}: equilibrium={bool(is_bne(e, profile, 'full'))}")
        for s, mt in enumerate(out, start=1):
            print(f"  state {s}: {mt.describe(e.firm_names, e.worker_names)}")


if __name__ == "__main__":
    main()
