"""Hausdorff distance of the compact tower on diag(1/j) to its spectrum across n."""

import argparse
from dataclasses import dataclass, field

import numpy as np

from specsci import hausdorff
from specsci.operators import diagonal
from specsci.sci import gamma_compact


@dataclass
class Config:
    ns: list = field(default_factory=lambda: [16, 36, 64, 100, 144, 196])
    output: str = "compact_tower_sweep.csv"


def main(cfg: Config):
    spec = diagonal(formula="1/j")
    rows = ["n,members,hausdorff,bound"]
    for n in cfg.ns:
        members = gamma_compact(spec, n).region.members()
        j = np.arange(1, n + 1)
        target = np.concatenate([[0], 1.0 / j[1.0 / j >= 1 / np.sqrt(n)]])
        d = hausdorff(members, target)
        rows.append(f"{n},{len(members)},{d:.17g},{3 / np.sqrt(n):.17g}")
        print(rows[-1])
    with open(cfg.output, "w") as fh:
        fh.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", type=int, nargs="+", default=Config().ns)
    ap.add_argument("--output", default=Config.output)
    main(Config(**vars(ap.parse_args())))
