"""gamma_n and the (n, eps)- and residual pseudospectrum regions.

gamma_n(z) = min(Phi_n(T, z), Phi_n(T*, conj z)) with
Phi_n(T, z) = lambda_min(((T - z)^*)^{2^n} (T - z)^{2^n})^{1/2^{n+1}},
approximated on the powered finite sections of the kernel module.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ParameterError
from .kernel import full_truncation, powered_min_root, row_norm, section_array
from .operators import OperatorSpec
from .parallel import map_blocks
from .sets import GridSpec, RegionEstimate


@dataclass(frozen=True)
class GammaParams:
    n: int = 0
    m: int = 1
    k: int | str = "full"
    tol: float = 1e-10
    precision: str = "auto"  # "auto" escalates uncertified points, "double" never does
    tau: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ParameterError("n must be a non-negative integer")
        if int(self.m) != self.m or self.m < 1:
            raise ParameterError("m must be a positive integer")
        if self.k != "full" and (int(self.k) != self.k or self.k < self.m):
            raise ParameterError(f"k must be 'full' or an integer >= m, got {self.k!r}")
        if not self.tol > 0:
            raise ParameterError("tol must be positive")
        if self.tau < 0:
            raise ParameterError("tau must be non-negative")
        if self.precision not in ("auto", "double"):
            raise ParameterError("precision must be 'auto' or 'double'")

    def resolve_k(self, spec: OperatorSpec) -> int:
        k = full_truncation(spec, self.n, self.m) if self.k == "full" else int(self.k)
        if spec.finite and (self.m > spec.dim or k > spec.dim):
            raise ParameterError(f"m={self.m}, k={k} exceed dimension {spec.dim}")
        return k


def _points(grid) -> tuple[np.ndarray, GridSpec | None]:
    if isinstance(grid, GridSpec):
        return grid.points(), grid
    return np.atleast_1d(np.asarray(grid, dtype=complex)), None


def gamma_components(spec: OperatorSpec, zs, params: GammaParams, threads: int | None = None):
    """Plain and tilde roots at every point, plus the arithmetic tier used."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    k = params.resolve_k(spec)
    a = section_array(spec, k)

    def block(z):
        out = []
        for variant in ("plain", "tilde"):
            out.extend(powered_min_root(a, z, params.n, params.m, variant, params.tol, params.precision, params.tau))
        return tuple(out)

    plain, tier_p, tilde, tier_t = map_blocks(block, zs, threads)
    return plain, tilde, np.maximum(tier_p, tier_t), k


def gamma_n(spec: OperatorSpec, z: complex, params: GammaParams) -> float:
    """Finite-section approximant of gamma_n at a single point."""
    plain, tilde, _, _ = gamma_components(spec, [z], params)
    return float(min(plain[0], tilde[0]))


def _meta(algorithm: str, params: GammaParams, k: int, tiers, **extra) -> dict:
    meta = {"algorithm": algorithm, **asdict(params), "k": k, "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S")}
    t, c = np.unique(tiers, return_counts=True)
    meta["arithmetic"] = {_tier_name(int(a)): int(b) for a, b in zip(t, c)}
    meta.update(extra)
    return meta


def _tier_name(t: int) -> str:
    return {53: "float", 54: "float_inverse"}.get(t, f"mp{t}")


def n_eps_region(
    spec: OperatorSpec,
    grid,
    n: int,
    eps: float,
    m: int,
    k: int | str = "full",
    tol: float = 1e-10,
    precision: str = "auto",
    tau: float = 0.0,
    threads: int | None = None,
) -> RegionEstimate:
    """Grid indicator of {z : gamma_n(z) < eps}; value holds gamma_n."""
    if not eps > 0:
        raise ParameterError("eps must be positive")
    params = GammaParams(n, m, k, tol, precision, tau)
    zs, g = _points(grid)
    plain, tilde, tiers, kk = gamma_components(spec, zs, params, threads)
    value = np.minimum(plain, tilde)
    meta = _meta("n_eps_pseudospectrum", params, kk, tiers, eps=eps, predicate="value < eps")
    return RegionEstimate(zs, value, value < eps, g, meta)


def residual_regions(
    spec: OperatorSpec,
    grid,
    eps: float,
    m: int,
    k: int | str = "full",
    zero_tol: float | None = None,
    tol: float = 1e-10,
    precision: str = "auto",
    threads: int | None = None,
) -> tuple[RegionEstimate, RegionEstimate]:
    """Residual pseudospectrum {zeta1 > eps, zeta2 = 0} and its adjoint
    counterpart {zeta2 > eps, zeta1 = 0}, where zeta1 = Phi_0(T, z) and
    zeta2 = Phi_0(T*, conj z).

    "= 0" means <= zero_tol; by default 10 u (||section||_inf + |z|) per point.
    value holds the zeta tested against zero_tol; meta["other_values"] holds
    the zeta compared with eps.
    """
    if not eps > 0:
        raise ParameterError("eps must be positive")
    zs, g = _points(grid)
    params0 = GammaParams(0, m, k, tol, precision, 0.0)
    scale = row_norm(section_array(spec, params0.resolve_k(spec))) + np.abs(zs)
    u = np.finfo(float).eps
    if zero_tol is None:
        zt = 10 * u * scale
        zt_doc = "10 * machine_eps * (row_norm(section) + |z|)"
    else:
        if zero_tol < 0:
            raise ParameterError("zero_tol must be non-negative")
        zt = np.full(zs.size, float(zero_tol))
        zt_doc = float(zero_tol)
    # resolve values near zero well below the zero threshold
    fine = min(tol, float(zt.min()) / 4) if zt.size and zt.min() > 0 else tol
    params = GammaParams(0, m, k, fine, precision, 0.0)
    z1, z2, tiers, kk = gamma_components(spec, zs, params, threads)
    common = dict(eps=eps, zero_tol=zt_doc)
    first = RegionEstimate(
        zs,
        z2,
        (z1 > eps) & (z2 <= zt),
        g,
        _meta("residual_pseudospectrum", params, kk, tiers, **common,
              predicate="zeta1 > eps and value <= zero_tol", other_values=z1.tolist()),
    )
    second = RegionEstimate(
        zs,
        z1,
        (z2 > eps) & (z1 <= zt),
        g,
        _meta("adjoint_residual_pseudospectrum", params, kk, tiers, **common,
              predicate="zeta2 > eps and value <= zero_tol", other_values=z2.tolist()),
    )
    return first, second
