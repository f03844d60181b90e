"""Operators presented through their matrix entries x_ij = <T e_j, e_i>.

Indices are 1-based throughout the public API, matching the basis e_1, e_2, ...
Finite kinds (dense, jordan, diagonal with an explicit coefficient list) have a
dimension N; the others act on l^2(N).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ParameterError
from .poly import MonicPoly

KINDS = (
    "diagonal",
    "unilateral_shift",
    "bilateral_shift",
    "toeplitz_band",
    "dense",
    "jordan",
    "counterexample",
)

DIAGONAL_FORMULAS = ("1/j", "constant:<c>")


def parse_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ParameterError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise ParameterError(f"cannot parse complex value {v!r}") from exc
    if isinstance(v, (int, float, complex, np.number)):
        return complex(v)
    raise ParameterError(f"cannot parse complex value {v!r}")


@dataclass(frozen=True)
class Schedule:
    """Column schedule m -> k_m of the counterexample operator.

    Either affine, k_m = a*m + b, or an explicit finite list (k_1, k_2, ...).
    """

    affine: tuple | None = (2, 1)
    values: tuple | None = None

    def __post_init__(self):
        if self.values is not None:
            vals = tuple(int(v) for v in self.values)
            object.__setattr__(self, "values", vals)
            object.__setattr__(self, "affine", None)
            for m, k in enumerate(vals, start=1):
                if k <= m:
                    raise ParameterError(f"schedule needs k_m > m, got k_{m} = {k}")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ParameterError("schedule must be strictly increasing")
        else:
            a, b = (int(v) for v in self.affine)
            if a < 1 or (a - 1) + b <= 0:
                raise ParameterError(f"affine schedule k_m = {a}m + {b} violates k_m > m")
            object.__setattr__(self, "affine", (a, b))

    def __call__(self, m: int) -> int:
        if self.values is not None:
            if m > len(self.values):
                raise ParameterError(f"schedule list too short for m = {m}")
            return self.values[m - 1]
        a, b = self.affine
        return a * m + b

    def inverse_upto(self, limit: int) -> list[tuple[int, int]]:
        """Pairs (m, k_m) with k_m + 1 <= limit."""
        out = []
        m = 1
        while True:
            if self.values is not None and m > len(self.values):
                break
            k = self(m)
            if k + 1 > limit:
                break
            out.append((m, k))
            m += 1
        return out

    def to_json(self) -> dict:
        return {"values": list(self.values)} if self.values is not None else {"affine": list(self.affine)}


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    kind: str
    params: dict = field(default_factory=dict)
    band_width: int | None = None
    adjointed: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown operator kind {self.kind!r}; expected one of {KINDS}")
        if self.band_width is not None and self.band_width < 0:
            raise ParameterError("band_width must be non-negative")

    @property
    def dim(self) -> int | None:
        """Dimension N of finite kinds, None for operators on l^2(N)."""
        if self.kind == "dense":
            return self.params["matrix"].shape[0]
        if self.kind == "jordan":
            return self.params["n"]
        if self.kind == "diagonal" and "coeffs" in self.params:
            return len(self.params["coeffs"])
        return None

    @property
    def finite(self) -> bool:
        return self.dim is not None

    def adjoint(self) -> OperatorSpec:
        return replace(self, adjointed=not self.adjointed)

    def to_json(self) -> dict:
        doc = {"kind": self.kind}
        p = self.params
        if self.kind == "diagonal":
            if "coeffs" in p:
                doc["coeffs"] = [[c.real, c.imag] for c in p["coeffs"]]
            else:
                doc["formula"] = p["formula"]
        elif self.kind == "toeplitz_band":
            doc["offsets"] = list(p["offsets"])
            doc["coeffs"] = [[c.real, c.imag] for c in p["coeffs"]]
        elif self.kind == "dense":
            a = p["matrix"]
            doc["n"] = a.shape[0]
            doc["data"] = [[v.real, v.imag] for v in a.ravel()]
        elif self.kind == "jordan":
            doc["eigenvalue"] = [p["eigenvalue"].real, p["eigenvalue"].imag]
            doc["n"] = p["n"]
        elif self.kind == "counterexample":
            doc["eps"] = p["eps"]
            doc["schedule"] = p["schedule"].to_json()
        if self.band_width is not None:
            doc["band_width"] = self.band_width
        if self.adjointed:
            doc["adjoint"] = True
        return doc


# constructors


def diagonal(coeffs=None, formula: str | None = None) -> OperatorSpec:
    if (coeffs is None) == (formula is None):
        raise ParameterError("diagonal needs exactly one of coeffs or formula")
    if coeffs is not None:
        c = tuple(parse_complex(v) for v in coeffs)
        if not c:
            raise ParameterError("empty coefficient list")
        return OperatorSpec("diagonal", {"coeffs": c}, band_width=0)
    formula = formula.strip()
    if formula == "1/j":
        pass
    elif formula.startswith("constant:"):
        parse_complex(formula.split(":", 1)[1])
    else:
        raise ParameterError(f"unknown diagonal formula {formula!r}; catalog: {DIAGONAL_FORMULAS}")
    return OperatorSpec("diagonal", {"formula": formula}, band_width=0)


def zero_operator() -> OperatorSpec:
    return diagonal(formula="constant:0")


def unilateral_shift() -> OperatorSpec:
    """S e_j = e_{j+1}."""
    return OperatorSpec("unilateral_shift", {}, band_width=1)


def bilateral_shift() -> OperatorSpec:
    """Shift on l^2(Z), re-indexed to N by 0, -1, 1, -2, 2, ... (band width 2)."""
    return OperatorSpec("bilateral_shift", {}, band_width=2)


def toeplitz_band(offsets, coeffs, band_width: int | None = None) -> OperatorSpec:
    """Entry c_k wherever j - i = offsets[k] (numpy diagonal convention)."""
    offsets = tuple(int(o) for o in offsets)
    coeffs = tuple(parse_complex(c) for c in coeffs)
    if len(offsets) != len(coeffs) or not offsets:
        raise ParameterError("offsets and coeffs must be non-empty and of equal length")
    if len(set(offsets)) != len(offsets):
        raise ParameterError("repeated offset")
    widest = max(abs(o) for o in offsets)
    if band_width is None:
        band_width = widest
    elif widest > band_width:
        raise ParameterError(f"offset {widest} exceeds declared band_width {band_width}")
    return OperatorSpec("toeplitz_band", {"offsets": offsets, "coeffs": coeffs}, band_width=band_width)


def laplacian() -> OperatorSpec:
    """Free Jacobi operator: zero diagonal, ones on both off-diagonals."""
    return toeplitz_band((-1, 1), (1, 1))


def dense(matrix, band_width: int | None = None) -> OperatorSpec:
    a = np.array(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ParameterError("dense payload must be a non-empty square matrix")
    if not np.all(np.isfinite(a)):
        raise ParameterError("dense payload has non-finite entries")
    if band_width is not None:
        i, j = np.nonzero(a)
        if i.size and np.abs(i - j).max() > band_width:
            raise ParameterError("dense payload violates declared band_width")
    a.setflags(write=False)
    return OperatorSpec("dense", {"matrix": a}, band_width=band_width)


def jordan(eigenvalue, n: int) -> OperatorSpec:
    if int(n) != n or n < 1:
        raise ParameterError("jordan size must be a positive integer")
    return OperatorSpec("jordan", {"eigenvalue": parse_complex(eigenvalue), "n": int(n)}, band_width=1)


def counterexample(eps: float, schedule: Schedule | None = None) -> OperatorSpec:
    """T = S + S* where S has the single entry 1 + eps at (m, k_m + 1) in row m."""
    if not eps > 0:
        raise ParameterError("counterexample needs eps > 0")
    return OperatorSpec("counterexample", {"eps": float(eps), "schedule": schedule or Schedule()})


def load_spec(source) -> OperatorSpec:
    """Build an OperatorSpec from a JSON file path, JSON text or a parsed dict."""
    if isinstance(source, dict):
        doc = source
    else:
        text = str(source)
        path = Path(text)
        try:
            if not text.lstrip().startswith("{"):
                text = path.read_text()
            doc = json.loads(text)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read operator spec: {exc}") from exc
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ParameterError("operator spec must be an object with a 'kind' field")
    kind = doc["kind"]
    bw = doc.get("band_width")
    try:
        if kind == "diagonal":
            spec = diagonal(doc.get("coeffs"), doc.get("formula"))
        elif kind == "unilateral_shift":
            spec = unilateral_shift()
        elif kind == "bilateral_shift":
            spec = bilateral_shift()
        elif kind == "toeplitz_band":
            spec = toeplitz_band(doc["offsets"], doc["coeffs"], bw)
        elif kind == "laplacian":
            spec = laplacian()
        elif kind == "dense":
            n = int(doc["n"])
            data = [parse_complex(v) for v in doc["data"]]
            if len(data) != n * n:
                raise ParameterError(f"dense payload has {len(data)} entries, expected {n * n}")
            spec = dense(np.array(data).reshape(n, n), bw)
        elif kind == "jordan":
            spec = jordan(doc.get("eigenvalue", 0), doc["n"])
        elif kind == "counterexample":
            sched = doc.get("schedule", {"affine": [2, 1]})
            if "values" in sched:
                schedule = Schedule(values=tuple(sched["values"]))
            else:
                schedule = Schedule(affine=tuple(sched["affine"]))
            spec = counterexample(doc["eps"], schedule)
        else:
            raise ParameterError(f"unknown operator kind {kind!r}")
    except KeyError as exc:
        raise ParameterError(f"operator spec of kind {kind!r} is missing field {exc}") from exc
    if doc.get("adjoint"):
        spec = spec.adjoint()
    return spec


# entry oracle


def _bilateral_index(i: int) -> int:
    """Z-position of the basis vector stored at N-index i (1 -> 0, 2 -> -1, 3 -> 1, ...)."""
    return (i - 1) // 2 if i % 2 == 1 else -(i // 2)


def _raw_entry(spec: OperatorSpec, i: int, j: int) -> complex:
    p = spec.params
    kind = spec.kind
    if kind == "diagonal":
        if i != j:
            return 0j
        if "coeffs" in p:
            return p["coeffs"][i - 1]
        if p["formula"] == "1/j":
            return complex(1.0 / j)
        return parse_complex(p["formula"].split(":", 1)[1])
    if kind == "unilateral_shift":
        return 1 + 0j if i == j + 1 else 0j
    if kind == "bilateral_shift":
        return 1 + 0j if _bilateral_index(i) == _bilateral_index(j) + 1 else 0j
    if kind == "toeplitz_band":
        for o, c in zip(p["offsets"], p["coeffs"]):
            if j - i == o:
                return c
        return 0j
    if kind == "dense":
        return complex(p["matrix"][i - 1, j - 1])
    if kind == "jordan":
        if i == j:
            return p["eigenvalue"]
        return 1 + 0j if j == i + 1 else 0j
    if kind == "counterexample":
        s = p["schedule"]
        if j > i and s(i) + 1 == j:
            return complex(1 + p["eps"])
        if i > j and s(j) + 1 == i:
            return complex(1 + p["eps"])
        return 0j
    raise ParameterError(kind)


def _check_index(spec: OperatorSpec, *idx):
    for i in idx:
        if int(i) != i or i < 1:
            raise IndexError(f"basis index must be a positive integer, got {i}")
        if spec.finite and i > spec.dim:
            raise IndexError(f"index {i} out of range for dimension {spec.dim}")


def entry(spec: OperatorSpec, i: int, j: int) -> complex:
    """<T e_j, e_i>, 1-based."""
    _check_index(spec, i, j)
    if spec.adjointed:
        return _raw_entry(spec, j, i).conjugate()
    return _raw_entry(spec, i, j)


@dataclass(frozen=True, eq=False)
class Section:
    entries: np.ndarray
    m: int
    source: OperatorSpec
    adjointed: bool = False


def _raw_section(spec: OperatorSpec, m: int) -> np.ndarray:
    p = spec.params
    kind = spec.kind
    out = np.zeros((m, m), dtype=complex)
    idx = np.arange(m)
    if kind == "diagonal":
        if "coeffs" in p:
            out[idx, idx] = p["coeffs"][:m]
        elif p["formula"] == "1/j":
            out[idx, idx] = 1.0 / (idx + 1)
        else:
            out[idx, idx] = parse_complex(p["formula"].split(":", 1)[1])
    elif kind == "unilateral_shift":
        out[idx[1:], idx[:-1]] = 1
    elif kind == "bilateral_shift":
        pos = np.array([_bilateral_index(i) for i in range(1, m + 1)])
        lookup = {z: k for k, z in enumerate(pos)}
        for col, z in enumerate(pos):
            row = lookup.get(z + 1)
            if row is not None:
                out[row, col] = 1
    elif kind == "toeplitz_band":
        for o, c in zip(p["offsets"], p["coeffs"]):
            if abs(o) < m:
                out += c * np.eye(m, k=o)
    elif kind == "dense":
        out[:] = p["matrix"][:m, :m]
    elif kind == "jordan":
        out[idx, idx] = p["eigenvalue"]
        out[idx[:-1], idx[1:]] = 1
    elif kind == "counterexample":
        v = 1 + p["eps"]
        for row, k in p["schedule"].inverse_upto(m):
            out[row - 1, k] = v
            out[k, row - 1] = v
    return out


def section(spec: OperatorSpec, m: int, adjoint: bool = False) -> Section:
    """The m x m leading block P_m T P_m (conjugate transposed when adjoint)."""
    if int(m) != m or m < 1:
        raise ParameterError(f"section size must be a positive integer, got {m}")
    if spec.finite and m > spec.dim:
        raise IndexError(f"section size {m} exceeds dimension {spec.dim}")
    a = _raw_section(spec, int(m))
    if spec.adjointed != adjoint:
        a = a.conj().T.copy()
    return Section(a, int(m), spec, adjoint)


def column_reach(spec: OperatorSpec, m: int, steps: int = 1) -> int | None:
    """Smallest R such that T^steps maps span{e_1..e_m} into span{e_1..e_R}.

    Works for the kinds whose columns have finite support (banded kinds,
    finite kinds and the counterexample); None otherwise.
    """
    r = m
    for _ in range(steps):
        if spec.finite:
            return spec.dim
        if spec.band_width is not None:
            r = r + spec.band_width
        elif spec.kind == "counterexample":
            # T is symmetric, so rows and columns share supports
            r = max(r, spec.params["schedule"](r) + 1)
        else:
            return None
    return r


def row_reach(spec: OperatorSpec, m: int, steps: int = 1) -> int | None:
    """Same as column_reach for T* (rows of T)."""
    return column_reach(spec.adjoint(), m, steps)


def is_banded(spec: OperatorSpec) -> bool:
    return spec.band_width is not None


# norms


@dataclass(frozen=True)
class NormEstimate:
    value: float
    mode: str  # "exact" or "lower_bound"
    witness_size: int
    error_bound: float = 0.0

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "mode": self.mode,
            "witness_size": self.witness_size,
            "error_bound": self.error_bound,
        }

    @classmethod
    def from_json(cls, doc: dict) -> NormEstimate:
        return cls(float(doc["value"]), doc["mode"], int(doc["witness_size"]), float(doc.get("error_bound", 0.0)))


def matrix_norm(a: np.ndarray) -> float:
    """Spectral norm of a dense matrix (largest singular value)."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def circle_sup(p: MonicPoly, nodes: int = 4096, target: float = 1e-6) -> tuple[float, float]:
    """sup_{|z|=1} |p(z)| with a certified error bound.

    g(t) = |p(e^{it})|^2 has g' = 0 at its maximizer, so the grid maximum is
    within G2 h^2 / 8 of max g, with G2 a bound on |g''| built from the
    coefficients. Nodes double from `nodes` until the bound on the sup of |p|
    drops below `target`; the grid maximum is then polished by a bounded
    scalar search.
    """
    c = np.abs(p.full()[::-1])
    k = np.arange(c.size)
    l0, l1, l2 = c.sum(), (k * c).sum(), (k * k * c).sum()
    g2 = 2 * (l2 * l0 + l1 * l1)
    while True:
        theta = 2 * np.pi * np.arange(nodes) / nodes
        vals = np.abs(p(np.exp(1j * theta)))
        best = int(np.argmax(vals))
        h = 2 * np.pi / nodes
        top = float(vals[best])
        err = math.sqrt(top * top + g2 * h * h / 8) - top
        if err <= target or nodes >= 2**22:
            break
        nodes *= 2
    res = minimize_scalar(
        lambda t: -abs(complex(p(np.exp(1j * t)))),
        bounds=(theta[best] - h, theta[best] + h),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return max(top, float(-res.fun)), err


def norm_of_poly(spec: OperatorSpec, p: MonicPoly, budget: int = 200) -> NormEstimate:
    """||p(T)||: exact for finite kinds and shifts, otherwise the lower bound
    ||p(T) P_m|| from an exact rectangular section with m = budget."""
    if budget < 1:
        raise ParameterError("budget must be >= 1")
    if spec.finite:
        a = section(spec, spec.dim).entries
        return NormEstimate(matrix_norm(p.of_matrix(a)), "exact", spec.dim, 1e-12 * max(1.0, np.abs(a).max()))
    if spec.kind in ("unilateral_shift", "bilateral_shift"):
        value, err = circle_sup(p)
        return NormEstimate(value, "exact", 0, err)
    m = int(budget)
    reach = column_reach(spec, m, p.degree)
    if reach is None:
        raise ParameterError(f"no norm oracle for kind {spec.kind}")
    a = section(spec, reach).entries
    block = p.of_matrix(a)[:, :m]
    return NormEstimate(matrix_norm(block), "lower_bound", m)
