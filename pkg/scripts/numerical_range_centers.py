"""How far the disc-intersection region overshoots the numerical range of a
Hermitian matrix when the centers are confined to a window of half-width Y.

A segment of half-length L seen from centers at most Y away is only cut down
to a lens of height about sqrt(Y^2 + L^2) - Y.
"""

import argparse
from dataclasses import dataclass, field

import numpy as np

from specsci import GridSpec, hausdorff
from specsci.hulls import numerical_range_v1
from specsci.operators import dense, matrix_norm


@dataclass
class Config:
    size: int = 6
    seed: int = 7
    pitch: float = 0.05
    c_samples: int = 41
    widths: list = field(default_factory=lambda: [1.0, 2.0, 5.0, 10.0, 20.0, 40.0])


def main(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    x = rng.standard_normal((cfg.size, cfg.size)) + 1j * rng.standard_normal((cfg.size, cfg.size))
    a = (x + x.conj().T) / 2
    lam = np.linalg.eigvalsh(a)
    half = (lam[-1] - lam[0]) / 2
    e = matrix_norm(a) + 0.5
    grid = GridSpec.rectangle(-e, e, -e, e, cfg.pitch)
    target = np.linspace(lam[0], lam[-1], 4001) + 0j
    print(f"spectrum [{lam[0]:.3f}, {lam[-1]:.3f}], grid half-width {e:.3f}")
    print("center half-width, lattice pitch, d_H, predicted lens height")
    for w in [e] + cfg.widths:
        window = (-w, w, -w, w)
        region = numerical_range_v1(dense(a), cfg.c_samples, grid, center_window=window)
        d = hausdorff(region.members(), target)
        print(f"{w:8.3f}, {region.meta['center_pitch']:.4f}, {d:.4f}, {np.hypot(w, half) - w:.4f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=Config.size)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--c-samples", dest="c_samples", type=int, default=Config.c_samples)
    main(Config(**vars(ap.parse_args())))
