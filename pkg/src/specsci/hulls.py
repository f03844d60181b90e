"""Polynomial numerical hulls V_p(a) = {z : |p(z)| <= ||p(a)||}.

Includes V_p membership and regions, the order-one hull (closure of the
numerical range), a min-norm polynomial search, a fixed enumeration of monic
polynomials with Gaussian-rational coefficients and the enumeration algorithm
that produces nested hull sets K_1 ⊃ K_2 ⊃ ...
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .errors import ParameterError
from .operators import NormEstimate, OperatorSpec, matrix_norm, norm_of_poly, section
from .poly import MonicPoly
from .sets import GridSpec, PointSet, RegionEstimate


def _norm_value(norm) -> float:
    return float(norm.value if isinstance(norm, NormEstimate) else norm)


# membership and regions


def vp_member(p: MonicPoly, norm, z):
    """|p(z)| <= ||p(a)||. Works elementwise on arrays.

    A False answer certifies z outside V_p(a) only when the norm is exact; a
    lower-bound norm can make the computed V_p too small.
    """
    out = np.abs(p(z)) <= _norm_value(norm)
    return bool(out) if np.ndim(out) == 0 else out


def vp_region(p: MonicPoly, norm, grid: GridSpec) -> RegionEstimate:
    """V_p on a grid; value = |p(z)| - ||p(a)||."""
    z = grid.points()
    n = _norm_value(norm)
    value = np.abs(p(z)) - n
    mode = norm.mode if isinstance(norm, NormEstimate) else "given"
    meta = {
        "algorithm": "vp_region",
        "poly": p.to_json(),
        "norm": n,
        "norm_mode": mode,
        "exclusion_certified": mode == "exact",
    }
    return RegionEstimate(z, value, value <= 0, grid, meta)


def numerical_range_v1(
    spec: OperatorSpec, c_samples: int, grid: GridSpec, center_window: tuple | None = None
) -> RegionEstimate:
    """Outer approximation of the closed numerical range as the intersection of
    the discs {|z - c| <= ||a - c||} over a c_samples x c_samples lattice of
    centers spanning the grid window (or center_window).

    A grid point is kept when every disc, grown by half a cell diagonal,
    contains it, so each point whose grid cell meets V^1 is a member.
    """
    if not spec.finite:
        raise ParameterError("numerical_range_v1 needs a finite operator (exact norms)")
    if int(c_samples) != c_samples or c_samples < 2:
        raise ParameterError("c_samples must be an integer >= 2")
    a = section(spec, spec.dim).entries
    re0, re1, im0, im1 = center_window if center_window is not None else grid.window
    cr, ci = np.linspace(re0, re1, int(c_samples)), np.linspace(im0, im1, int(c_samples))
    centers = (cr[None, :] + 1j * ci[:, None]).ravel()
    eye = np.eye(a.shape[0])
    radii = np.concatenate(
        [np.linalg.norm(a[None] - c[:, None, None] * eye[None], ord=2, axis=(1, 2)) for c in np.array_split(centers, max(1, centers.size // 512))]
    )
    slack = grid.pitch / math.sqrt(2)
    z = grid.points()
    value = np.full(z.size, -np.inf)
    for chunk in np.array_split(np.arange(z.size), max(1, z.size * centers.size // (1 << 22))):
        excess = np.abs(z[chunk, None] - centers[None, :]) - radii[None, :]
        value[chunk] = excess.max(axis=1)
    meta = {
        "algorithm": "numerical_range_v1",
        "c_samples": int(c_samples),
        "center_window": [re0, re1, im0, im1],
        "center_pitch": float(max(cr[1] - cr[0], ci[1] - ci[0])),
        "cell_slack": slack,
    }
    return RegionEstimate(z, value, value <= slack, grid, meta)


# min-norm search


def _norm_function(spec: OperatorSpec, norm_budget: int):
    """Objective ||p(a)|| on coefficient vectors (highest power first).

    Normal finite matrices use max |p(eigenvalue)|, which equals the spectral
    norm and is far cheaper than an SVD of p(a).
    """
    if spec.finite:
        a = section(spec, spec.dim).entries
        scale = max(1.0, float(np.abs(a).max())) ** 2
        commutator = a @ a.conj().T - a.conj().T @ a
        if np.abs(commutator).max() <= 1e-12 * scale * a.shape[0]:
            hermitian = np.abs(a - a.conj().T).max() <= 1e-14 * math.sqrt(scale)
            eig = np.linalg.eigvalsh(a).astype(complex) if hermitian else np.linalg.eigvals(a)
            return lambda c: float(np.abs(np.polyval(c, eig)).max())
        return lambda c: matrix_norm(MonicPoly(tuple(c[1:])).of_matrix(a))
    return lambda c: norm_of_poly(spec, MonicPoly(tuple(c[1:])), norm_budget).value


def _chebyshev_start(spec: OperatorSpec, j: int) -> np.ndarray:
    """Roots at Chebyshev points along the long axis of the numerical range box."""
    size = spec.dim if spec.finite else 64
    a = section(spec, size).entries
    re = np.linalg.eigvalsh((a + a.conj().T) / 2)
    im = np.linalg.eigvalsh((a - a.conj().T) / 2j)
    center = complex((re[0] + re[-1]) / 2, (im[0] + im[-1]) / 2)
    half_re, half_im = (re[-1] - re[0]) / 2, (im[-1] - im[0]) / 2
    direction = 1.0 if half_re >= half_im else 1j
    half = max(half_re, half_im)
    nodes = np.cos((2 * np.arange(1, j + 1) - 1) * np.pi / (2 * j))
    return np.poly(center + half * direction * nodes)


def _charpoly_start(spec: OperatorSpec, j: int) -> np.ndarray:
    size = min(j, spec.dim) if spec.finite else j
    eig = np.linalg.eigvals(section(spec, size).entries)
    if eig.size < j:
        eig = np.concatenate([eig, np.full(j - eig.size, eig.mean())])
    return np.poly(eig)


def min_norm_poly(
    spec: OperatorSpec, j: int, budget: int = 2000, seed: int = 0, norm_budget: int = 200
) -> tuple[MonicPoly, NormEstimate]:
    """Heuristic minimizer of ||p(a)|| over monic p of degree j.

    Starts from the better of the characteristic polynomial of the j x j
    compression and a Chebyshev-node polynomial, then runs Nelder-Mead on the
    2j real coefficient parameters with random restarts until `budget`
    objective evaluations are used. Returns the best polynomial seen, with its
    norm recomputed by norm_of_poly. No optimality certificate.
    """
    if int(j) != j or j < 1:
        raise ParameterError("j must be a positive integer")
    if budget < 1:
        raise ParameterError("budget must be positive")
    f = _norm_function(spec, norm_budget)
    state = {"count": 0, "best": math.inf, "x": None}

    def to_coeffs(x):
        return np.concatenate([[1.0], x[:j] + 1j * x[j:]])

    def objective(x):
        if state["count"] >= budget:
            return state["best"]
        state["count"] += 1
        v = f(to_coeffs(x))
        if v < state["best"]:
            state["best"], state["x"] = v, np.array(x)
        return v

    for start in (_charpoly_start(spec, j), _chebyshev_start(spec, j)):
        objective(np.concatenate([start[1:].real, start[1:].imag]))
    rng = np.random.default_rng(seed)
    x0 = state["x"]
    while state["count"] < budget:
        minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"maxfev": budget - state["count"], "xatol": 1e-12, "fatol": 1e-14},
        )
        scale = 0.1 * max(1.0, float(np.abs(state["x"]).max()))
        x0 = state["x"] + scale * rng.standard_normal(2 * j)
    p = MonicPoly(tuple(to_coeffs(state["x"])[1:]))
    return p, norm_of_poly(spec, p, norm_budget)


# enumeration of monic polynomials with Gaussian-rational coefficients
#
# Height of a rational p/q in lowest terms: max(|p|, q). Height of a complex
# value: the larger height of its real and imaginary parts.
# V_h: complex values of height <= h, ordered by (height, rank(re), rank(im)),
#      where reals are ranked by (height, |x|, x < 0). V_{h-1} is a prefix of V_h.
# Height h block: degrees d = 1..h in turn; within a degree, coefficient tuples
# (a_1, ..., a_d) in lexicographic order of their V_h ranks, skipping tuples
# that already appeared at a lower height (d < h and every a_i in V_{h-1}).
# Index 0 is z.


def _height(x: Fraction) -> int:
    return max(abs(x.numerator), x.denominator)


@lru_cache(maxsize=None)
def _reals(h: int) -> tuple:
    vals = {Fraction(p, q) for q in range(1, h + 1) for p in range(0, h + 1) if math.gcd(p, q) == 1}
    vals |= {-v for v in vals}
    return tuple(sorted(vals, key=lambda x: (_height(x), abs(x), x < 0)))


@lru_cache(maxsize=None)
def _complex(h: int) -> tuple:
    if h == 0:
        return ()
    reals = _reals(h)
    rank = {x: i for i, x in enumerate(reals)}
    pairs = [(a, b) for a in reals for b in reals]
    pairs.sort(key=lambda ab: (max(_height(ab[0]), _height(ab[1])), rank[ab[0]], rank[ab[1]]))
    return tuple(pairs)


@lru_cache(maxsize=None)
def _complex_rank(h: int) -> dict:
    return {v: i for i, v in enumerate(_complex(h))}


def _block_shape(h: int, d: int) -> tuple[int, int]:
    """(C, c0): values available at height h and the size of the excluded prefix."""
    c = len(_complex(h))
    c0 = len(_complex(h - 1)) if d < h else 0
    return c, c0


def _block_size(h: int, d: int) -> int:
    c, c0 = _block_shape(h, d)
    return c**d - c0**d


def _unrank_tuple(h: int, d: int, r: int) -> tuple:
    c, c0 = _block_shape(h, d)
    big = c0 == 0
    digits = []
    for pos in range(d):
        rem = d - pos - 1
        full = c**rem
        if big:
            x, r = divmod(r, full)
        else:
            per = full - c0**rem
            if r < c0 * per:
                x, r = divmod(r, per)
            else:
                r -= c0 * per
                q, r = divmod(r, full)
                x = c0 + q
                big = True
        digits.append(x)
    return tuple(digits)


def _rank_tuple(h: int, d: int, digits) -> int:
    c, c0 = _block_shape(h, d)
    big = c0 == 0
    r = 0
    for pos, x in enumerate(digits):
        rem = d - pos - 1
        full = c**rem
        if big:
            r += x * full
        else:
            per = full - c0**rem
            if x < c0:
                r += x * per
            else:
                r += c0 * per + (x - c0) * full
                big = True
    if not big:
        raise ParameterError("coefficient tuple belongs to a lower height")
    return r


def rational_coefficients(index: int) -> tuple:
    """Exact coefficients ((re, im), ...) of the polynomial at `index`."""
    if int(index) != index or index < 0:
        raise ParameterError("enumeration index must be a non-negative integer")
    r = int(index)
    h = 1
    while True:
        for d in range(1, h + 1):
            s = _block_size(h, d)
            if r < s:
                vals = _complex(h)
                return tuple(vals[x] for x in _unrank_tuple(h, d, r))
            r -= s
        h += 1


def enumerate_rational_monic(index: int) -> MonicPoly:
    """The monic polynomial at position `index` of the fixed enumeration."""
    return MonicPoly(tuple(complex(float(a), float(b)) for a, b in rational_coefficients(index)))


def enumeration_index(p: MonicPoly, max_denominator: int = 10**6) -> int:
    """Inverse of enumerate_rational_monic; coefficients are read back as
    rationals with denominators up to max_denominator."""
    exact = [
        (Fraction(c.real).limit_denominator(max_denominator), Fraction(c.imag).limit_denominator(max_denominator))
        for c in p.coeffs
    ]
    d = len(exact)
    h = max([d] + [max(_height(a), _height(b)) for a, b in exact])
    offset = 0
    for hh in range(1, h):
        offset += sum(_block_size(hh, dd) for dd in range(1, hh + 1))
    offset += sum(_block_size(h, dd) for dd in range(1, d))
    rank = _complex_rank(h)
    return offset + _rank_tuple(h, d, [rank[v] for v in exact])


# inclusion testing


def _lattice(window, samples: int):
    re0, re1, im0, im1 = (float(v) for v in window)
    if not (re1 > re0 and im1 > im0):
        raise ParameterError("degenerate window")
    if int(samples) != samples or samples < 3:
        raise ParameterError("samples must be an integer >= 3")
    re, im = np.linspace(re0, re1, int(samples)), np.linspace(im0, im1, int(samples))
    pitch = max(re[1] - re[0], im[1] - im[0])
    z = (re[None, :] + 1j * im[:, None])
    return z, pitch


def _boundary(z: np.ndarray) -> np.ndarray:
    return np.concatenate([z[0], z[-1], z[1:-1, 0], z[1:-1, -1]])


def _in_window(p: MonicPoly, n: float, window, z: np.ndarray, pitch: float) -> bool:
    """Is V_p strictly inside the window? Every component of V_p holds a root,
    so it suffices that the roots are inside and |p| > n along the boundary."""
    re0, re1, im0, im1 = window
    r = p.roots()
    if not np.all((r.real > re0) & (r.real < re1) & (r.imag > im0) & (r.imag < im1)):
        return False
    b = _boundary(z)
    return bool(np.all(np.abs(p(b)) > n + p.taylor_slack(b, pitch / 2)))


def hull_sample(p: MonicPoly, norm, window, samples: int = 201) -> np.ndarray:
    """Lattice points of V_p together with the roots of p (always in V_p)."""
    z, _ = _lattice(window, samples)
    z = z.ravel()
    return np.concatenate([z[np.abs(p(z)) <= _norm_value(norm)], p.roots()])


@dataclass(frozen=True)
class SubsetCertificate:
    holds: bool
    worst_margin: float  # max over samples of |q(z)| - n_q - slack; <= 0 when holds
    sample_size: int
    slack_radius: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def subset_certificate(p: MonicPoly, norm_p, q: MonicPoly, norm_q, window, samples: int = 201) -> SubsetCertificate:
    """Sampled test of V_p ⊂ V_q.

    Samples V_p by the lattice points where |p| <= n_p plus the roots of p, and
    requires |q(z)| <= n_q + S_q(z) at each, where S_q(z) bounds the change of
    |q| within half a lattice diagonal. A positive answer therefore certifies
    that the sample of V_p lies in V_q grown by that radius.
    """
    npv, nqv = _norm_value(norm_p), _norm_value(norm_q)
    z, pitch = _lattice(window, samples)
    for poly, n, name in ((p, npv, "p"), (q, nqv, "q")):
        if not _in_window(poly, n, window, z, pitch):
            raise ParameterError(f"window does not contain V_{name}")
    return _certify(p, npv, q, nqv, z.ravel(), pitch)


def _certify(p, npv, q, nqv, zflat, pitch) -> SubsetCertificate:
    pts = np.concatenate([zflat[np.abs(p(zflat)) <= npv], p.roots()])
    radius = pitch / math.sqrt(2)
    margin = np.abs(q(pts)) - nqv - q.taylor_slack(pts, radius)
    worst = float(margin.max())
    return SubsetCertificate(worst <= 0, worst, int(pts.size), radius)


def region_subset(p: MonicPoly, norm_p, q: MonicPoly, norm_q, window, samples: int = 201) -> bool:
    """True when the sampled test certifies V_p ⊂ V_q (see subset_certificate)."""
    return subset_certificate(p, norm_p, q, norm_q, window, samples).holds


# the enumeration algorithm


@dataclass
class HullState:
    """Accepted hull sets K_1 ⊃ K_2 ⊃ ... and the position of the search."""

    window: tuple
    samples: int
    accepted: list = field(default_factory=list)  # dicts: index, poly, norm, certificate
    cursor: int = 0
    budget_spent: dict = field(default_factory=lambda: {"indices": 0, "norm_evaluations": 0, "since_accept": 0})
    status: str = "running"

    def poly(self, m: int) -> MonicPoly:
        return MonicPoly.from_json(self.accepted[m]["poly"])

    def norm(self, m: int) -> NormEstimate:
        return NormEstimate.from_json(self.accepted[m]["norm"])

    def sample(self, m: int) -> PointSet:
        return PointSet(hull_sample(self.poly(m), self.norm(m), self.window, self.samples))

    def to_json(self) -> dict:
        return {
            "window": list(self.window),
            "samples": self.samples,
            "accepted": self.accepted,
            "cursor": self.cursor,
            "budget_spent": self.budget_spent,
            "status": self.status,
        }

    @classmethod
    def from_json(cls, doc: dict) -> HullState:
        return cls(tuple(doc["window"]), int(doc["samples"]), list(doc["accepted"]), int(doc["cursor"]),
                   dict(doc["budget_spent"]), doc.get("status", "running"))


def hull_enumeration(
    spec: OperatorSpec,
    steps: int,
    per_step_budget: int,
    samples: int = 201,
    state: HullState | None = None,
    norm_budget: int = 200,
) -> HullState:
    """Walk the enumeration and accept p_n whenever V_{p_n} is certified inside
    the current K_m; K_1 = V_z. Stops after `steps` accepted sets, or with
    status "budget_exhausted" when per_step_budget indices pass without an
    acceptance. Pass a previous state to resume.
    """
    if int(steps) != steps or steps < 1:
        raise ParameterError("steps must be a positive integer")
    if per_step_budget < 1:
        raise ParameterError("per_step_budget must be positive")
    if state is None:
        p0 = enumerate_rational_monic(0)
        n0 = norm_of_poly(spec, p0, norm_budget)
        r = 1.1 * n0.value + 0.25
        state = HullState((-r, r, -r, r), int(samples))
        state.accepted.append({"index": 0, "poly": p0.to_json(), "norm": n0.to_json(), "certificate": None})
        state.cursor = 1
        state.budget_spent["norm_evaluations"] += 1
    state.status = "running"
    z, pitch = _lattice(state.window, state.samples)
    zflat = z.ravel()
    radius = pitch / math.sqrt(2)
    q, nq = state.poly(-1), state.norm(-1).value
    while len(state.accepted) < steps:
        if state.budget_spent["since_accept"] >= per_step_budget:
            state.status = "budget_exhausted"
            return state
        idx = state.cursor
        p = enumerate_rational_monic(idx)
        state.cursor += 1
        state.budget_spent["indices"] += 1
        state.budget_spent["since_accept"] += 1
        # roots lie in V_p, so they must pass first; no norm needed for this
        roots = p.roots()
        if np.any(np.abs(q(roots)) > nq + q.taylor_slack(roots, radius)):
            continue
        n_p = norm_of_poly(spec, p, norm_budget)
        state.budget_spent["norm_evaluations"] += 1
        if not _in_window(p, n_p.value, state.window, z, pitch):
            continue
        cert = _certify(p, n_p.value, q, nq, zflat, pitch)
        if cert.holds:
            state.accepted.append({"index": idx, "poly": p.to_json(), "norm": n_p.to_json(), "certificate": cert.to_json()})
            state.budget_spent["since_accept"] = 0
            q, nq = p, n_p.value
    state.status = "complete"
    return state
