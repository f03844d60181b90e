"""Recompute the frozen reference values in tests/data/frozen.json.

Every value comes from tests/oracles.py, which does not import the package.
Run from the repository root: python scripts/freeze_oracles.py
"""

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))
import oracles  # noqa: E402


def main():
    out = {}
    # attouch_wets between {0} and {0.5}
    out["attouch_wets_0_half"] = oracles.attouch_wets_brute([0], [0.5], 30)

    # ||T P_200|| for the free Jacobi operator: rectangular 201 x 200 section
    lap = oracles.laplacian_matrix(201)[:, :200]
    out["laplacian_column_norm_200"] = float(np.linalg.svd(lap, compute_uv=False)[0])

    # gamma_n on a seeded random dense matrix at a few points, 50 digits
    rng = np.random.default_rng(7)
    a = (rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))) / 2
    zs = [0.0, 0.5 + 0.5j, -1.0 + 0.25j, 1.5j, 2.0]
    out["gamma_random"] = {
        "matrix": [[[v.real, v.imag] for v in row] for row in a],
        "points": [[z.real, z.imag] for z in map(complex, zs)],
        "values": {str(n): [oracles.gamma_mp(a, z, n) for z in zs] for n in range(3)},
    }

    # numerical range of jordan(0, 2): largest modulus over random unit vectors
    j2 = np.array([[0, 1], [0, 0]], dtype=complex)
    out["jordan2_numrange_radius"] = float(np.abs(oracles.rayleigh_quotients(j2)).max())

    # residual pseudospectrum of the shift at z = 0 with m = 40, k = 60
    s = oracles.shift_matrix(60)
    out["shift_residual_zeta1"] = float(np.linalg.svd(s[:, :40], compute_uv=False).min())
    out["shift_residual_zeta2"] = float(np.linalg.svd(s.T[:, :40], compute_uv=False).min())

    path = ROOT / "tests" / "data" / "frozen.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
