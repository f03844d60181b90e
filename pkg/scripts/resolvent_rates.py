"""Distribution of the observed geometric decay of the resolvent series terms
against the a priori rate rho = ||p(a)|| / |p(z)| on random triples."""

import argparse
from dataclasses import dataclass

import numpy as np

from specsci.calculus import resolvent_series
from specsci.operators import matrix_norm
from specsci.poly import MonicPoly


@dataclass
class Config:
    trials: int = 200
    seed: int = 9
    tol: float = 1e-8


def main(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    ratios, spectral = [], []
    for _ in range(cfg.trials):
        n = int(rng.integers(2, 9))
        a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
        d = int(rng.integers(1, 6))
        p = MonicPoly.from_roots(0.5 * (rng.standard_normal(d) + 1j * rng.standard_normal(d)))
        pa = p.of_matrix(a)
        while True:
            z = complex(*rng.standard_normal(2))
            z = z / abs(z) * rng.uniform(1.5, 4)
            if matrix_norm(pa) < abs(p(z)) * (1 - 1e-3):
                break
        _, rep = resolvent_series(p, a, z, cfg.tol)
        if rep.n_terms >= 8:
            ratios.append(rep.measured_ratio / rep.rho)
            spectral.append(np.abs(np.linalg.eigvals(pa)).max() / abs(p(z)) / rep.rho)
    ratios, spectral = np.array(ratios), np.array(spectral)
    print(f"{ratios.size} series with at least 8 terms")
    print(f"measured / rho: min {ratios.min():.3f}, median {np.median(ratios):.3f}, max {ratios.max():.3f}")
    print(f"below 1/2: {(ratios < 0.5).sum()}")
    print(f"spectral-radius rate / rho for those: {np.round(spectral[ratios < 0.5], 3)}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=Config.trials)
    ap.add_argument("--seed", type=int, default=Config.seed)
    main(Config(**vars(ap.parse_args())))
