"""Certified long-run revenue of cyclic schemes x^1..x^k_max and the alternating x^{2,3}."""

import argparse
import sys

from genai_forum.cyclic import best_cycle, noncyclic_beats_cyclic, revenue_table, table_csv
from genai_forum.model import example1_instance

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k-max", type=int, default=8)
    args = ap.parse_args()
    inst = example1_instance()
    sys.stdout.write(table_csv(inst, revenue_table(inst, args.k_max)))
    choice = best_cycle(inst, args.k_max)
    print(f"# best cycle k={choice.k} (undecided={choice.undecided})")
    print(f"# margin of x^2,3 over best cycle: {noncyclic_beats_cyclic(inst, 2, 3, args.k_max):.3e}")
