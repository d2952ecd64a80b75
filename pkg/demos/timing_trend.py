#!/usr/bin/env python3
"""Why the binary restriction pays off: train-time comparison.

The binary search can stop the moment it hits an exact optimum, while the
real-valued variant keeps polishing decimals until its generation budget
runs out. Same data, same population settings, per-repeat seeds.

Usage:
    python3 demos/timing_trend.py
"""

import numpy as np

from bfmfusion.cli import bench_table, run_benchmark


def main():
    counts = (4, 6, 8)
    print(f"training on synthetic data with {counts} sources, 2 repeats each")
    print("(wall times are machine-dependent; the gap and the trend are the point)\n")

    records = run_benchmark(counts, repeats=2, cap_seconds=120.0)

    table = bench_table(records)
    widths = [max(len(row[i]) for row in table) for i in range(len(table[0]))]
    for row in table:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))

    def mean_time(algorithm, s):
        times = [r["seconds"] for r in records["runs"]
                 if r["algorithm"] == algorithm and r["source_count"] == s]
        return float(np.mean(times))

    print()
    for s in counts:
        ratio = mean_time("real", s) / mean_time("bfm", s)
        print(f"  {s} sources: real-valued training took {ratio:.1f}x longer")


if __name__ == "__main__":
    main()
