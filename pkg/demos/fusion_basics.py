#!/usr/bin/env python3
"""Fuse per-source confidences into one score and grade the result.

Three sources disagree about four detections; a measure that trusts
source 1 only when source 2 or 3 backs it up beats min/max/mean baselines.

Usage:
    python3 demos/fusion_basics.py
"""

import numpy as np

from bfmfusion import (
    Bag,
    Dataset,
    from_minimal_coalitions,
    fuse,
    fuse_naive,
    score,
)


def main():
    # rows are instances, columns are source confidences; the third source
    # is noisy on purpose
    background = Bag(0, [np.array([
        [0.15, 0.20, 0.90],
        [0.50, 0.45, 0.95],
    ])])
    targets = Bag(1, [np.array([
        [0.85, 0.90, 0.10],
        [0.80, 0.75, 0.95],
    ])])
    truth = (((0, 0),), ((1, 1),))
    data = Dataset(3, (background, targets), truth)

    g = from_minimal_coalitions(3, [{0, 1}, {0, 2}])
    fused = {
        "agreement measure": fuse(data, g),
        "min baseline": fuse_naive(data, "min"),
        "max baseline": fuse_naive(data, "max"),
        "mean baseline": fuse_naive(data, "mean"),
    }

    header = ["instance"] + [f"s{i}" for i in (1, 2, 3)] + ["truth"] + list(fused)
    print("  ".join(f"{h:>18}" for h in header))
    X = data.instance_matrix()
    flat_truth = data.flat_truth()
    for k in range(data.n_instances):
        row = [f"#{k}"] + [f"{v:.2f}" for v in X[k]] + [str(int(flat_truth[k]))]
        row += [f"{m.scores[k]:.3f}" for m in fused.values()]
        print("  ".join(f"{c:>18}" for c in row))

    print()
    for name, fmap in fused.items():
        report = score(fmap, flat_truth)
        print(f"{name:>18}:  auc {report.auc:.3f}  rmse {report.rmse:.3f}  "
              f"psnr {report.psnr:.2f} dB")


if __name__ == "__main__":
    main()
