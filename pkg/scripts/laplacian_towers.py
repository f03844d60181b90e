"""Banded one-limit tower for the free Jacobi operator: distance to the
eps-neighborhood of [-2, 2] as the grid index k grows."""

import argparse
from dataclasses import dataclass, field

import numpy as np

from specsci import hausdorff
from specsci.operators import laplacian
from specsci.sci import gamma_banded


@dataclass
class Config:
    ks: list = field(default_factory=lambda: [9, 25, 49, 100])
    eps: float = 0.1
    n: int = 0
    prefix: str = "laplacian_banded"


def main(cfg: Config):
    for k in cfg.ks:
        region = gamma_banded(laplacian(), k, cfg.n, cfg.eps).region
        re0, re1, im0, im1 = region.grid.window
        xx, yy = np.meshgrid(np.arange(re0, re1 + 1e-9, 0.01), np.arange(im0, im1 + 1e-9, 0.01))
        fine = (xx + 1j * yy).ravel()
        near = np.abs(fine - np.clip(fine.real, -2, 2)) <= cfg.eps
        d = hausdorff(region.members(), fine[near]) if region.member.any() else float("nan")
        print(f"k={k}: {int(region.member.sum())} members, d_H = {d:.4f}")
        with open(f"{cfg.prefix}_k{k}.csv", "w") as fh:
            fh.write(region.to_csv())


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ks", type=int, nargs="+", default=Config().ks)
    ap.add_argument("--eps", type=float, default=Config.eps)
    ap.add_argument("--n", type=int, default=Config.n)
    ap.add_argument("--prefix", default=Config.prefix)
    main(Config(**vars(ap.parse_args())))
