"""Resolvent series and multicentric holomorphic functional calculus.

For a monic p of degree d with coefficients a_1..a_d let
Q_j(z) = z^j + a_1 z^(j-1) + ... + a_j and q(z, a) = sum_j Q_{d-1-j}(z) a^j.
Then (a - z) q(z, a) = p(a) - p(z), which gives the resolvent series

    (z - a)^-1 = q(z, a)/p(z) * sum_j (p(a)/p(z))^j     for |p(z)| > ||p(a)||.

With simple roots z_1..z_d of p and the Lagrange polynomials
delta_k(z) = prod_{i != k} (z - z_i) / p'(z_k), an analytic f splits as
f(z) = sum_k delta_k(z) f_k(p(z)) with f_k(w) = sum_j alpha_kj w^j and

    alpha_kj = (1 / 2 pi i) \\oint f(z) / ((z - z_k) p(z)^j) dz.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IllConditionedRootsError,
    Inconclusive,
    NotInResolventDomainError,
    NumericalError,
    ParameterError,
    QuadratureError,
)
from .operators import dense, matrix_norm
from .poly import MonicPoly

# auxiliary polynomials and the resolvent


def aux_polys(p: MonicPoly) -> list[np.ndarray]:
    """Q_0, ..., Q_{d-1} as coefficient arrays (highest power first)."""
    return [p.prefix(j) for j in range(p.degree)]


def q_eval(p: MonicPoly, z: complex, a) -> np.ndarray:
    """q(z, a) = sum_{j<d} Q_{d-1-j}(z) a^j."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError("a must be a square matrix")
    d = p.degree
    qs = aux_polys(p)
    out = np.zeros_like(a)
    power = np.eye(a.shape[0], dtype=complex)
    for j in range(d):
        out += np.polyval(qs[d - 1 - j], z) * power
        if j < d - 1:
            power = power @ a
    return out


class TruncationWarning(RuntimeWarning):
    pass


@dataclass
class ResolventReport:
    n_terms: int  # N: the series runs over j = 0..N
    rho: float  # ||p(a)|| / |p(z)|
    residual: float  # ||(z - a) result - I||
    tail_bound: float
    measured_ratio: float  # ||(p(a)/p(z))^N||^(1/N)
    truncated: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


RHO_MARGIN = 1e-6


def resolvent_series(p: MonicPoly, a, z: complex, tol: float = 1e-8, n_max: int = 100_000):
    """Truncated series for (z - a)^-1 and a report.

    N is the smallest integer with both ||q|| rho^(N+1) / (|p(z)| (1 - rho)) < tol
    (tail of the series) and rho^(N+1) < tol (residual (z - a) S_N - I =
    -(p(a)/p(z))^(N+1)).
    """
    a = np.asarray(a, dtype=complex)
    if not tol > 0:
        raise ParameterError("tol must be positive")
    pa = p.of_matrix(a)
    pz = complex(p(z))
    npa = matrix_norm(pa)
    if pz == 0 or npa / abs(pz) >= 1 - RHO_MARGIN:
        raise NotInResolventDomainError(
            f"z = {z} lies in V_p(a): ||p(a)|| / |p(z)| = {npa / abs(pz) if pz else math.inf:.6g} >= 1 - {RHO_MARGIN:g}"
        )
    rho = npa / abs(pz)
    q = q_eval(p, z, a) / pz
    nq = matrix_norm(q)
    if rho == 0:
        n = 0
    else:
        need = max(
            math.log(tol * (1 - rho) / nq) / math.log(rho) - 1 if nq > 0 else 0.0,
            math.log(tol) / math.log(rho) - 1,
        )
        n = max(0, math.ceil(need))
    truncated = n > n_max
    n = min(n, n_max)
    m = pa / pz
    total = np.eye(a.shape[0], dtype=complex)
    term = total.copy()
    for _ in range(n):
        term = term @ m
        total = total + term
    result = q @ total
    residual = matrix_norm((z * np.eye(a.shape[0]) - a) @ result - np.eye(a.shape[0]))
    measured = matrix_norm(term) ** (1.0 / n) if n > 0 else 0.0
    tail = nq * rho ** (n + 1) / (1 - rho)
    if truncated:
        warnings.warn(f"resolvent series capped at N = {n_max}; residual {residual:.3g}", TruncationWarning)
    return result, ResolventReport(n, rho, residual, tail, measured, truncated)


# function catalog


def _wrap(angle):
    return (angle + np.pi) % (2 * np.pi) - np.pi


def _ray_distance(c: complex, theta: float) -> float:
    """Distance from c to the ray {r e^(i theta) : r >= 0}."""
    direction = cmath.exp(1j * theta)
    t = (c * direction.conjugate()).real
    return abs(c) if t <= 0 else abs(c - t * direction)


@dataclass(frozen=True)
class FunctionHandle:
    """An analytic function with its domain, drawn from a fixed catalog."""

    name: str
    params: dict = field(default_factory=dict)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        kind, pr = self.name, self.params
        if kind == "log":
            theta = pr.get("cut", -np.pi)
            return np.log(-np.exp(-1j * theta) * z) + 1j * (theta + np.pi)
        if kind == "sqrt":
            theta = pr.get("cut", -np.pi)
            return np.exp(0.5 * (np.log(-np.exp(-1j * theta) * z) + 1j * (theta + np.pi)))
        if kind == "exp":
            return np.exp(z)
        if kind == "rational":
            return np.polyval(pr["num"], z) / np.polyval(pr["den"], z)
        if kind == "power_series":
            return np.polyval(np.asarray(pr["coeffs"])[::-1], z - pr.get("center", 0))
        raise ParameterError(f"unknown function {kind!r}")

    def disc_inside(self, center: complex, radius: float) -> bool:
        """Is the closed disc inside the domain where the function is analytic?"""
        kind, pr = self.name, self.params
        if kind in ("log", "sqrt"):
            return _ray_distance(center, pr.get("cut", -np.pi)) > radius
        if kind == "exp":
            return True
        if kind == "rational":
            poles = np.roots(pr["den"]) if len(pr["den"]) > 1 else np.array([])
            return bool(np.all(np.abs(poles - center) > radius))
        if kind == "power_series":
            return abs(center - pr.get("center", 0)) + radius < pr["radius"]
        return False

    def to_json(self) -> dict:
        doc = {"name": self.name}
        for k, v in self.params.items():
            doc[k] = [[complex(x).real, complex(x).imag] for x in v] if isinstance(v, (list, tuple, np.ndarray)) else v
        return doc


def make_function(name: str, **params) -> FunctionHandle:
    """log / sqrt (optional cut angle, branch with arg in (cut, cut + 2 pi);
    the default cut -pi is the principal branch), exp, rational (num, den
    coefficients, highest power first), power_series (coeffs from the constant
    term up, center, radius)."""
    if name not in ("log", "sqrt", "exp", "rational", "power_series"):
        raise ParameterError(f"unknown function {name!r}; choose log, sqrt, exp, rational or power_series")
    if name == "rational":
        if "num" not in params or "den" not in params:
            raise ParameterError("rational function needs num and den coefficients")
        params = {**params, "num": tuple(complex(c) for c in params["num"]), "den": tuple(complex(c) for c in params["den"])}
    if name == "power_series":
        if "coeffs" not in params or "radius" not in params:
            raise ParameterError("power series needs coeffs and radius")
        params = {**params, "coeffs": tuple(complex(c) for c in params["coeffs"])}
    if "cut" in params:
        params = {**params, "cut": float(params["cut"])}
    return FunctionHandle(name, params)


# multicentric coefficients


@dataclass(frozen=True)
class Contour:
    center: complex
    radius: float
    start: int = 64  # initial node count; doubled until the coefficients settle

    def nodes(self, n: int) -> np.ndarray:
        return self.center + self.radius * np.exp(2j * np.pi * np.arange(n) / n)

    def to_json(self) -> dict:
        return {"center": [self.center.real, self.center.imag], "radius": self.radius, "start": self.start}


ROOT_SEP_REL = 1e-6
MAX_NODES = 1 << 17


def _simple_roots(p: MonicPoly, root_sep_tol: float | None) -> np.ndarray:
    roots = p.roots()
    scale = max(1.0, float(np.abs(roots).max()))
    tol = ROOT_SEP_REL * scale if root_sep_tol is None else root_sep_tol
    if roots.size > 1:
        gaps = np.abs(roots[:, None] - roots[None, :])
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() <= tol:
            raise IllConditionedRootsError(
                f"roots of p closer than {tol:.3g} (min gap {gaps.min():.3g}); choose other interpolation nodes"
            )
    return roots


def _spread(roots: np.ndarray) -> tuple[complex, float]:
    c = complex(roots.mean())
    return c, float(np.abs(roots - c).max())


def _candidate_radii(roots: np.ndarray) -> tuple[complex, float, np.ndarray]:
    c, s = _spread(roots)
    r0 = 1.5 * s if s > 0 else 0.1 * max(1.0, abs(c))
    radii = r0 * 1.1 ** np.arange(-40, 41)
    return c, r0, radii[radii > 1.01 * s]


def default_contour(f: FunctionHandle, p: MonicPoly) -> Contour:
    """Circle at the root centroid with radius 1.5 x the largest root distance,
    moved to the nearest valid radius when that disc leaves the domain of f."""
    c, r0, radii = _candidate_radii(p.roots())
    valid = [r for r in radii if f.disc_inside(c, r)]
    if not valid:
        raise ParameterError("no circle around the root centroid encloses the roots inside the domain of f")
    return Contour(c, float(min(valid, key=lambda r: abs(math.log(r / r0)))))


@dataclass
class MulticentricCoeffs:
    p: MonicPoly
    roots: np.ndarray
    alpha: np.ndarray  # (d, J + 1)
    contour: Contour
    nodes: int
    convergence_radius: float  # min |p| on the contour: f_k converge for |w| below it
    residual: float  # change of the weighted table at the last doubling
    rate: float  # fitted geometric decay of max_k |alpha_kj|
    function: dict = field(default_factory=dict)

    @property
    def J(self) -> int:
        return self.alpha.shape[1] - 1

    def delta(self, z):
        """delta_k(z) for each root; shape (d,) + z.shape."""
        z = np.asarray(z, dtype=complex)
        out = []
        for k, zk in enumerate(self.roots):
            others = np.delete(self.roots, k)
            num = np.prod(z[..., None] - others, axis=-1) if others.size else np.ones_like(z)
            out.append(num / self.p.derivative(zk))
        return np.array(out)

    def evaluate(self, z):
        """sum_k delta_k(z) f_k(p(z))."""
        z = np.asarray(z, dtype=complex)
        w = self.p(z)
        fk = np.array([np.polyval(self.alpha[k, ::-1], w) for k in range(self.roots.size)])
        return (self.delta(z) * fk).sum(axis=0)

    def tail_bound(self, z) -> np.ndarray:
        """Estimated truncation error of evaluate(z): sum_k |delta_k(z)| C x^(J+1) / (1 - x)
        with x = q |p(z)| from the fitted envelope C q^j of |alpha_kj|; inf when x >= 1."""
        z = np.asarray(z, dtype=complex)
        q, c = _fit_rate(self.alpha)
        if self.J < 2:
            q, c = 1.0 / self.convergence_radius, float(np.abs(self.alpha).max())
        x = q * np.abs(self.p(z))
        dsum = np.abs(self.delta(z)).sum(axis=0)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.where(x < 1, dsum * c * x ** (self.J + 1) / (1 - x), np.inf)
        return out

    def jacobi_coefficients(self) -> np.ndarray:
        """c_j(z) = sum_k alpha_kj delta_k(z) as polynomials of degree < d;
        shape (J + 1, d), highest power first, so f(z) = sum_j c_j(z) p(z)^j."""
        d = self.roots.size
        basis = []
        for k, zk in enumerate(self.roots):
            poly = np.poly(np.delete(self.roots, k)) if d > 1 else np.ones(1)
            basis.append(poly / self.p.derivative(zk))
        basis = np.array(basis)  # (d, d)
        return self.alpha.T @ basis

    def to_json(self) -> dict:
        pair = lambda x: [complex(x).real, complex(x).imag]
        return {
            "p": self.p.to_json(),
            "roots": [pair(r) for r in self.roots],
            "alpha": [[pair(v) for v in row] for row in self.alpha],
            "jacobi": [[pair(v) for v in row] for row in self.jacobi_coefficients()],
            "contour": self.contour.to_json(),
            "nodes": self.nodes,
            "convergence_radius": self.convergence_radius,
            "residual": self.residual,
            "rate": self.rate,
            "function": self.function,
        }


def _alpha_table(f, roots, p, contour: Contour, n: int, J: int) -> tuple[np.ndarray, float]:
    z = contour.nodes(n)
    pz = p(z)
    base = f(z) * (z - contour.center) / n
    table = np.empty((roots.size, J + 1), dtype=complex)
    inv = 1.0 / pz
    for k, zk in enumerate(roots):
        w = base / (z - zk)
        for j in range(J + 1):
            table[k, j] = w.sum()
            w = w * inv
    return table, float(np.abs(pz).min())


def _fit_rate(alpha: np.ndarray) -> tuple[float, float]:
    """Geometric envelope C q^j >= max_k |alpha_kj| (j >= 1) from a log-linear fit."""
    mags = np.abs(alpha).max(axis=0)[1:]
    j = np.arange(1, mags.size + 1)
    keep = mags > 0
    if keep.sum() < 2:
        return 0.0, float(mags.max()) if mags.size else 0.0
    slope = np.polyfit(j[keep], np.log(mags[keep]), 1)[0]
    q = float(np.exp(slope))
    c = float((mags[keep] / q ** j[keep]).max())
    return q, c


def multicentric_coeffs(
    f: FunctionHandle,
    p: MonicPoly,
    J: int,
    contour: Contour | None = None,
    coeff_tol: float = 1e-12,
    root_sep_tol: float | None = None,
    max_nodes: int = MAX_NODES,
) -> MulticentricCoeffs:
    """alpha_kj for k = 1..d, j = 0..J by the trapezoid rule on a circle.

    Node counts double from contour.start until successive tables agree to
    coeff_tol, with alpha_kj measured against the scale R^-j (R = min |p| on
    the contour) in which f_k is evaluated, and relative to max |f| there.
    """
    if int(J) != J or J < 0:
        raise ParameterError("J must be a non-negative integer")
    roots = _simple_roots(p, root_sep_tol)
    contour = contour or default_contour(f, p)
    if not np.all(np.abs(roots - contour.center) < contour.radius):
        raise ParameterError("contour does not enclose every root of p")
    if not f.disc_inside(contour.center, contour.radius):
        raise ParameterError("contour disc leaves the domain of f")
    n = int(contour.start)
    prev, big_r = _alpha_table(f, roots, p, contour, n, J)
    fscale = max(1.0, float(np.abs(f(contour.nodes(n))).max()))
    weight = big_r ** np.arange(J + 1)
    change = math.inf
    while n < max_nodes:
        n *= 2
        table, big_r = _alpha_table(f, roots, p, contour, n, J)
        change = float((np.abs(table - prev) * weight).max()) / fscale
        prev = table
        if change < coeff_tol:
            break
    else:
        raise QuadratureError(
            f"quadrature did not settle: weighted change {change:.3g} at {n} nodes (tolerance {coeff_tol:g})"
        )
    gap = float(np.abs(prev[:, 0] - f(roots)).max())
    if gap > 100 * coeff_tol * fscale:
        raise QuadratureError(f"alpha_k0 differs from f(z_k) by {gap:.3g}")
    rate, _ = _fit_rate(prev)
    return MulticentricCoeffs(p, roots, prev, contour, n, big_r, change * fscale, rate, f.to_json())


def coefficient_distance(c1: MulticentricCoeffs, c2: MulticentricCoeffs) -> float:
    """max_kj |alpha1_kj - alpha2_kj| R^j with R the smaller convergence radius:
    the difference as seen by f_k on the disc |w| <= R where both series are used."""
    if c1.alpha.shape != c2.alpha.shape:
        raise ParameterError("coefficient tables differ in shape")
    r = min(c1.convergence_radius, c2.convergence_radius)
    weight = r ** np.arange(c1.alpha.shape[1])
    return float((np.abs(c1.alpha - c2.alpha) * weight).max())


# functional calculus on matrices


@dataclass
class FuncalcReport:
    J: int
    tail_bound: float
    norm_p_of_a: float
    convergence_radius: float
    rate: float
    contour: dict
    nodes: int
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _delta_of_matrix(roots: np.ndarray, p: MonicPoly, a: np.ndarray) -> list[np.ndarray]:
    """delta_k(a) = prod_{i != k} (a - z_i) / p'(z_k), a polynomial in a."""
    eye = np.eye(a.shape[0], dtype=complex)
    out = []
    for k, zk in enumerate(roots):
        m = eye.copy()
        for i, zi in enumerate(roots):
            if i != k:
                m = m @ (a - zi * eye)
        out.append(m / p.derivative(zk))
    return out


J_START = 16
J_MAX = 1024
TARGET_RATIO = 0.5


def funcalc_contour(f: FunctionHandle, p: MonicPoly, norm_pa: float) -> Contour:
    """Circle around the roots, inside the domain of f, for which
    ||p(a)|| / min|p| <= 1/2 at the radius closest to the default one; when no
    radius gets there, the one with the smallest ratio."""
    c, r0, radii = _candidate_radii(p.roots())
    best = None
    for r in sorted(radii, key=lambda r: abs(math.log(r / r0))):
        if not f.disc_inside(c, r):
            continue
        z = c + r * np.exp(2j * np.pi * np.arange(4096) / 4096)
        ratio = norm_pa / float(np.abs(p(z)).min())
        if ratio <= TARGET_RATIO:
            return Contour(c, float(r))
        if best is None or ratio < best[0]:
            best = (ratio, r)
    if best is None:
        raise ParameterError("no circle around the root centroid encloses the roots inside the domain of f")
    if best[0] >= 1:
        raise NumericalError(
            f"||p(a)|| = {norm_pa:.6g} is not inside the convergence radius of the f_k series on any valid contour"
        )
    return Contour(c, float(best[1]))


def funcalc(
    f: FunctionHandle,
    p: MonicPoly,
    a,
    J: int | None = None,
    tol: float = 1e-10,
    contour: Contour | None = None,
    coeff_tol: float = 1e-12,
):
    """f(a) = sum_k delta_k(a) sum_{j<=J} alpha_kj p(a)^j and a report.

    With J=None the order doubles from 16 until the tail estimate, built from
    the fitted geometric decay of |alpha_kj|, drops below tol. The caller is
    responsible for V_p(a) lying inside the domain of f.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError("a must be a square matrix")
    roots = _simple_roots(p, None)
    pa = p.of_matrix(a)
    npa = matrix_norm(pa)
    contour = contour or funcalc_contour(f, p, npa)
    deltas = _delta_of_matrix(roots, p, a)
    dnorm = sum(matrix_norm(d) for d in deltas)
    order = J if J is not None else (0 if npa == 0 else J_START)
    while True:
        coeffs = multicentric_coeffs(f, p, order, contour, coeff_tol)
        if npa >= coeffs.convergence_radius:
            raise NumericalError(
                f"||p(a)|| = {npa:.6g} is not below the convergence radius {coeffs.convergence_radius:.6g}"
            )
        if npa == 0:
            tail = 0.0
        else:
            q, c = _fit_rate(coeffs.alpha) if order >= 2 else (1.0 / coeffs.convergence_radius, float(np.abs(coeffs.alpha).max()))
            x = q * npa
            tail = dnorm * c * x ** (order + 1) / (1 - x) if x < 1 else math.inf
        if J is not None or tail < tol or order >= J_MAX:
            break
        order *= 2
    eye = np.eye(a.shape[0], dtype=complex)
    result = np.zeros_like(a)
    for k, dk in enumerate(deltas):
        s = np.zeros_like(a)
        for j in range(order, -1, -1):
            s = s @ pa + coeffs.alpha[k, j] * eye
        result += dk @ s
    report = FuncalcReport(order, float(tail), npa, coeffs.convergence_radius, coeffs.rate, contour.to_json(), coeffs.nodes)
    return result, report


# log(a) from a hull that excludes 0

CUT_DIRECTIONS = 360


def _cut_direction(sample: np.ndarray) -> tuple[float, float]:
    """Ray angle in [-pi, pi) with the largest distance to the sample; ties go
    to the first angle from -pi, which is the principal cut."""
    best_theta, best = -np.pi, -1.0
    scale = max(1.0, float(np.abs(sample).max()))
    for k in range(CUT_DIRECTIONS):
        theta = -np.pi + 2 * np.pi * k / CUT_DIRECTIONS
        d = np.exp(1j * theta)
        t = np.maximum((sample * np.conj(d)).real, 0.0)
        clearance = float(np.abs(sample - t * d).min())
        if clearance > best + 1e-12 * scale:
            best_theta, best = theta, clearance
    return best_theta, best


def log_element(
    a,
    hull_budget: int = 10_000,
    max_degree: int = 4,
    search_budget: int = 2000,
    samples: int = 201,
    seed: int = 0,
    tol: float = 1e-10,
):
    """log(a) through a polynomial p with 0 outside V_p(a).

    Candidates are min-norm polynomials of degree 1..max_degree, then the hull
    enumeration with hull_budget indices per step. The branch cut is the ray
    (out of 360) farthest from the sampled V_p(a). Raises Inconclusive when no
    candidate excludes 0.
    """
    from .hulls import HullState, hull_enumeration, hull_sample, min_norm_poly

    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError("a must be a square matrix")
    spec = dense(a)
    tried = []
    found = None
    for j in range(1, max_degree + 1):
        p, norm = min_norm_poly(spec, j, search_budget, seed)
        tried.append({"source": "min_norm", "poly": p.to_json(), "norm": norm.value})
        if abs(complex(p(0))) > norm.value and _roots_simple(p):
            found = (p, norm, "min_norm")
            break
    state = None
    if found is None:
        state = hull_enumeration(spec, 1, hull_budget, samples)
        while found is None:
            p, norm = state.poly(-1), state.norm(-1)
            if abs(complex(p(0))) > norm.value and _roots_simple(p):
                found = (p, norm, "enumeration")
                break
            steps = len(state.accepted) + 1
            state = hull_enumeration(spec, steps, hull_budget, samples, state)
            if state.status == "budget_exhausted":
                report = {
                    "outcome": "inconclusive",
                    "reason": "no polynomial with 0 outside V_p(a) within budget: "
                    "either 0 is in the spectrum or the search did not get far enough",
                    "tried": tried,
                    "hull_state": state.to_json(),
                }
                raise Inconclusive("log(a): 0 not separated from V_p(a) within budget", report)
    p, norm, source = found
    r = 1.1 * matrix_norm(a) + 0.25
    window = (-r, r, -r, r)
    sample = hull_sample(p, norm, window, samples)
    theta, clearance = _cut_direction(sample)
    f = make_function("log", cut=theta)
    result, rep = funcalc(f, p, a, tol=tol)
    report = {
        "outcome": "ok",
        "poly": p.to_json(),
        "norm": norm.to_json(),
        "source": source,
        "cut_angle": theta,
        "cut_clearance": clearance,
        "funcalc": rep.to_json(),
    }
    if a.shape[0] <= 8:
        from scipy.linalg import expm

        report["exp_residual"] = float(matrix_norm(expm(result) - a))
    return result, report


def _roots_simple(p: MonicPoly) -> bool:
    try:
        _simple_roots(p, None)
        return True
    except IllConditionedRootsError:
        return False
