"""How often does the resampled Wedin percentile cover the true angle?

Run with ``python3 demos/coverage_table.py [trials]`` (default 50, about a
minute). 500 trials take roughly 10 minutes on one core.
"""

import sys

from ajive.synth import coverage_simulation


def main(trials: int = 50) -> None:
    table = coverage_simulation(trials, seed=0)
    print(f"{trials} noise realizations, {table.n_replicates} resamples each\n")
    # rows are nominal levels, columns the fitted rank; X's correct rank is 2
    print(table.format("X"))
    print()
    # the tall Y block is far from square, so its bound is very conservative
    print(table.format("Y"))
    print(f"\n{table.elapsed_seconds:.0f} s")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 50)
