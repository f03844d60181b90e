"""Estimating-function towers built from Cholesky-existence tests on the grid
Theta_n, and the harness for the diagonal-subsequence counterexample.

Every tower decides membership with arithmetic, square roots and comparisons
only. A dense eigensolver never enters these functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .kernel import (
    _exact_truncation,
    affine_band,
    affine_parts,
    band_factor_pass,
    cholesky_pass,
    full_truncation,
    min_eig_hermitian,
    power_stack,
    section_array,
    CHUNK_ENTRIES,
)
from .operators import OperatorSpec, Schedule, counterexample, is_banded, section
from .parallel import map_blocks
from .sets import GridSpec, RegionEstimate

PIVOT_REL = 1e-12
IDENTITY_TOL = 1e-12


@dataclass
class TowerOutput:
    level: str  # compact_n | bounded_n1_n2 | bounded_n1 | banded_k
    parameters: dict
    region: RegionEstimate

    def to_json(self) -> dict:
        return {"level": self.level, "parameters": self.parameters}


def _pivot_tau(stack: np.ndarray) -> np.ndarray:
    """Per-matrix pivot threshold 1e-12 * max |diag|, floored at 1e-300."""
    d = np.abs(np.diagonal(stack, axis1=1, axis2=2)).max(axis=1)
    return PIVOT_REL * np.maximum(d, 1e-300)


def _fails(a: np.ndarray, zs: np.ndarray, n: int, m: int, shift: float, variants) -> np.ndarray:
    """True where Cholesky of (powered section - shift I) fails for any variant."""
    k = a.shape[0]
    out = np.zeros(zs.size, dtype=bool)
    if n == 0:
        for variant in variants:
            parts = affine_parts(a, m, variant)
            probe = affine_band(parts, zs[:1], shift)
            if probe is None:
                break
            per = max(1, CHUNK_ENTRIES // probe[0].size)
            for start in range(0, zs.size, per):
                band = affine_band(parts, zs[start : start + per], shift)
                tau = PIVOT_REL * np.maximum(np.abs(band[:, 0, :m]).max(axis=1), 1e-300)
                out[start : start + per] |= ~band_factor_pass(band, m, tau)
        else:
            return out
        out[:] = False
    per = max(1, CHUNK_ENTRIES // (k * k if n else m * m))
    idx = np.arange(m)
    for start in range(0, zs.size, per):
        sl = slice(start, start + per)
        for variant in variants:
            stack = power_stack(a, zs[sl], n, m, variant)
            stack[:, idx, idx] -= shift
            out[sl] |= ~cholesky_pass(stack, _pivot_tau(stack))
    return out


def _run(a, grid: GridSpec, n, m, shift, variants, threads):
    zs = grid.points()
    (member,) = map_blocks(lambda z: (_fails(a, z, n, m, shift, variants),), zs, threads)
    return RegionEstimate(zs, member.astype(float), member, grid)


def _positive_int(name, v):
    if int(v) != v or v < 1:
        raise ParameterError(f"{name} must be a positive integer, got {v}")
    return int(v)


def _check_eps(eps):
    if not eps > 0 or not math.isfinite(eps):
        raise ParameterError("eps must be positive and finite")


def _check_n(n):
    if int(n) != n or n < 0:
        raise ParameterError("n must be a non-negative integer")
    return int(n)


def _describe(level, params, region, extra=None):
    meta = {"algorithm": level, **params, "pivot_tau": f"{PIVOT_REL:g} * max|diag|",
            "value": "1.0 for member points, 0.0 otherwise"}
    if extra:
        meta.update(extra)
    region.meta = meta
    return TowerOutput(level, params, region)


def gamma_compact(spec: OperatorSpec, n: int, threads: int | None = None) -> TowerOutput:
    """Theta_n points where (P_n(T - z)P_n)^*(P_n(T - z)P_n) - I/n^2 has no
    Cholesky factor. Finite operators use their full size when it is below n."""
    n = _positive_int("n", n)
    m = min(n, spec.dim) if spec.finite else n
    region = _run(section_array(spec, m), GridSpec.theta(n), 0, m, 1.0 / n**2, ("plain",), threads)
    return _describe("compact_n", {"n": n}, region, {"section": m})


def gamma_bounded(
    spec: OperatorSpec, n1: int, n2: int, n: int, eps: float, threads: int | None = None
) -> TowerOutput:
    """Theta_{n1} points where T_{n1,n2}(z) - eps^(2^(n+1)) or its tilde fails
    Cholesky. Finite operators cap n1 and n2 at their dimension."""
    n1, n2, n = _positive_int("n1", n1), _positive_int("n2", n2), _check_n(n)
    _check_eps(eps)
    if n2 < n1:
        raise ParameterError(f"need n2 >= n1, got n1={n1}, n2={n2}")
    m, k = (min(n1, spec.dim), min(n2, spec.dim)) if spec.finite else (n1, n2)
    region = _run(section_array(spec, k), GridSpec.theta(n1), n, m, eps ** (2 ** (n + 1)), ("plain", "tilde"), threads)
    return _describe("bounded_n1_n2", {"n1": n1, "n2": n2, "n": n, "eps": eps}, region, {"m": m, "k": k})


def gamma_bounded_limit(spec: OperatorSpec, n1: int, n: int, eps: float, threads: int | None = None) -> TowerOutput:
    """The n2 -> infinity limit of gamma_bounded, computed exactly from the full
    compression. Only banded and finite operators have one.

    The sign test min_eig <= 0 is decided by Cholesky failure with the same
    pivot threshold as the other towers.
    """
    n1, n = _positive_int("n1", n1), _check_n(n)
    _check_eps(eps)
    if not (spec.finite or is_banded(spec)):
        raise ParameterError(
            f"kind {spec.kind!r} is not banded: the inner truncation limit cannot be collapsed"
        )
    m = min(n1, spec.dim) if spec.finite else n1
    k = full_truncation(spec, n, m)
    region = _run(section_array(spec, k), GridSpec.theta(n1), n, m, eps ** (2 ** (n + 1)), ("plain", "tilde"), threads)
    return _describe("bounded_n1", {"n1": n1, "n": n, "eps": eps}, region, {"m": m, "k": k})


def gamma_banded(spec: OperatorSpec, k: int, n: int, eps: float, threads: int | None = None) -> TowerOutput:
    """One-limit tower for band width d: the (k, 2^n d + k) section test on Theta_k."""
    k, n = _positive_int("k", k), _check_n(n)
    _check_eps(eps)
    if spec.band_width is None:
        raise ParameterError("gamma_banded needs an operator with a declared band_width")
    inner = 2**n * spec.band_width + k
    m = k
    if spec.finite:
        m, inner = min(k, spec.dim), min(inner, spec.dim)
    region = _run(section_array(spec, inner), GridSpec.theta(k), n, m, eps ** (2 ** (n + 1)), ("plain", "tilde"), threads)
    return _describe("banded_k", {"k": k, "n": n, "eps": eps}, region, {"m": m, "inner": inner})


# counterexample harness

DISC_RADIUS = 1.0 / 8


def _disc_sample(radius: float, rings: int = 8, per_ring: int = 32) -> np.ndarray:
    pts = [0.0 + 0.0j]
    for r in np.linspace(radius / rings, radius, rings):
        pts.extend(r * np.exp(2j * np.pi * np.arange(per_ring) / per_ring))
    return np.array(pts)


@dataclass
class CounterexampleReport:
    eps: float
    m: int
    k_m: int
    schedule: dict
    identity_residuals: list
    identities_hold: bool
    zero_in_subsequence_tower: bool
    subsequence_min_eig_at_zero: float
    disc_misses_exact_tower: bool
    exact_min_eig_on_disc: float
    exact_truncation: int
    disc_points: int
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return dict(self.__dict__)


def counterexample_check(eps: float, m: int, schedule: Schedule | None = None) -> CounterexampleReport:
    """Evaluate T = S + S* with entries 1 + eps at (m, k_m + 1).

    Reports
    (a) whether 0 is a member of Gamma_{m, k_m} (n = 0),
    (b) whether the disc |z| <= 1/8 misses the exact Gamma_m, sampled on rings,
    (c) the residuals of P_m T*T P_m = (1+eps)^2 P_m and
        P_m T* P_{k_m} T P_m = (1+eps)^2 P_{m-1}.
    """
    _check_eps(eps)
    m = _positive_int("m", m)
    if m < 2:
        raise ParameterError("counterexample check needs m >= 2")
    schedule = schedule or Schedule()
    spec = counterexample(eps, schedule)
    k_m = schedule(m)
    scale = (1 + eps) ** 2
    shift = eps**2

    # (c): T P_m is supported on the first `reach` rows
    reach = _exact_truncation(spec, 0, m, "plain")
    t = section(spec, max(reach, k_m)).entries
    cols = t[:, :m]
    full = cols.conj().T @ cols
    part = cols[:k_m].conj().T @ cols[:k_m]
    target2 = np.diag([scale] * (m - 1) + [0.0])
    res = [float(np.abs(full - scale * np.eye(m)).max()), float(np.abs(part - target2).max())]

    # (a): the diagonal-subsequence section at z = 0
    a_sub = section_array(spec, k_m)
    zero = np.array([0j])
    in_sub = bool(_fails(a_sub, zero, 0, m, shift, ("plain", "tilde"))[0])
    lam_sub = min(
        min_eig_hermitian(power_stack(a_sub, zero, 0, m, v)[0] - shift * np.eye(m)) for v in ("plain", "tilde")
    )

    # (b): the exact compression on a disc sample
    disc = _disc_sample(DISC_RADIUS)
    a_ex = section_array(spec, reach)
    hits = _fails(a_ex, disc, 0, m, shift, ("plain", "tilde"))
    lam_ex = min(
        min(min_eig_hermitian(h - shift * np.eye(m)) for h in power_stack(a_ex, disc, 0, m, v)) for v in ("plain", "tilde")
    )
    report = CounterexampleReport(
        eps=float(eps),
        m=m,
        k_m=k_m,
        schedule=schedule.to_json(),
        identity_residuals=res,
        identities_hold=bool(max(res) <= IDENTITY_TOL),
        zero_in_subsequence_tower=in_sub,
        subsequence_min_eig_at_zero=float(lam_sub),
        disc_misses_exact_tower=bool(not hits.any()),
        exact_min_eig_on_disc=float(lam_ex),
        exact_truncation=int(reach),
        disc_points=int(disc.size),
    )
    if not report.identities_hold:
        report.notes.append(
            "column indices k_i + 1 coincide with rows of other nonzero entries, "
            "so T P_m is not a scaled isometry for this m"
        )
    return report
