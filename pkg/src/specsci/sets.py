"""Complex-plane grids, finite point sets and the set metrics used to compare
spectral estimates."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ParameterError


def _as_points(values) -> np.ndarray:
    z = np.asarray(values, dtype=complex).ravel()
    if z.size == 0:
        return z
    # exact bit-level dedup, keeping first occurrences in order
    bits = np.stack([z.real, z.imag], axis=1).view(np.uint64)
    _, first = np.unique(bits, axis=0, return_index=True)
    return z[np.sort(first)]


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray

    def __post_init__(self):
        z = _as_points(self.points)
        z.setflags(write=False)
        object.__setattr__(self, "points", z)

    def __len__(self) -> int:
        return self.points.size

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return set(self.points.tolist()) == set(other.points.tolist())

    def xy(self) -> np.ndarray:
        return np.stack([self.points.real, self.points.imag], axis=1)


@dataclass(frozen=True)
class GridSpec:
    """Either the square grid Theta_n (spacing 1/sqrt(n), |r|,|s| <= n) or an
    explicit rectangle with a uniform step."""

    n: int | None = None
    rect: tuple | None = None  # (re_min, re_max, im_min, im_max, step)

    def __post_init__(self):
        if (self.n is None) == (self.rect is None):
            raise ParameterError("give exactly one of n or rect")
        if self.n is not None:
            if int(self.n) != self.n or self.n < 1:
                raise ParameterError(f"grid parameter n must be a positive integer, got {self.n}")
            object.__setattr__(self, "n", int(self.n))
        else:
            re0, re1, im0, im1, step = (float(v) for v in self.rect)
            if not step > 0:
                raise ParameterError("grid step must be positive")
            if not (re1 >= re0 and im1 >= im0):
                raise ParameterError("degenerate grid rectangle")
            object.__setattr__(self, "rect", (re0, re1, im0, im1, step))

    @classmethod
    def theta(cls, n: int) -> GridSpec:
        return cls(n=n)

    @classmethod
    def rectangle(cls, re_min, re_max, im_min, im_max, step) -> GridSpec:
        return cls(rect=(re_min, re_max, im_min, im_max, step))

    @property
    def pitch(self) -> float:
        return math.sqrt(1.0 / self.n) if self.n is not None else self.rect[4]

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        if self.n is not None:
            r = np.arange(-self.n, self.n + 1) * self.pitch
            return r, r.copy()
        re0, re1, im0, im1, step = self.rect
        nre = int(math.floor((re1 - re0) / step + 1e-9)) + 1
        nim = int(math.floor((im1 - im0) / step + 1e-9)) + 1
        return re0 + step * np.arange(nre), im0 + step * np.arange(nim)

    @property
    def shape(self) -> tuple[int, int]:
        re, im = self.axes()
        return im.size, re.size

    @property
    def window(self) -> tuple[float, float, float, float]:
        re, im = self.axes()
        return float(re[0]), float(re[-1]), float(im[0]), float(im[-1])

    def points(self) -> np.ndarray:
        """Grid points, real part varying fastest."""
        re, im = self.axes()
        return (re[None, :] + 1j * im[:, None]).ravel()

    def to_json(self) -> dict:
        return {"n": self.n} if self.n is not None else {"rect": list(self.rect)}

    @classmethod
    def from_json(cls, data: dict) -> GridSpec:
        if data.get("n") is not None:
            return cls(n=data["n"])
        return cls(rect=tuple(data["rect"]))


def theta_grid(n: int) -> PointSet:
    """The grid {r/sqrt(n) + i s/sqrt(n) : |r|, |s| <= n}."""
    return PointSet(GridSpec.theta(n).points())


@dataclass
class RegionEstimate:
    z: np.ndarray
    value: np.ndarray
    member: np.ndarray
    grid: GridSpec | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=complex).ravel()
        self.value = np.asarray(self.value, dtype=float).ravel()
        self.member = np.asarray(self.member, dtype=bool).ravel()
        if not (self.z.size == self.value.size == self.member.size):
            raise ParameterError("region arrays differ in length")

    def members(self) -> PointSet:
        return PointSet(self.z[self.member])

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("re,im,value,member\n")
        for z, v, m in zip(self.z, self.value, self.member):
            out.write(f"{z.real:.17g},{z.imag:.17g},{v:.17g},{int(m)}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, grid: GridSpec | None = None, meta: dict | None = None) -> RegionEstimate:
        lines = text.strip().splitlines()
        if not lines or lines[0].strip() != "re,im,value,member":
            raise ParameterError("not a region CSV (expected header re,im,value,member)")
        rows = [ln.split(",") for ln in lines[1:] if ln.strip()]
        re = np.array([float(r[0]) for r in rows])
        im = np.array([float(r[1]) for r in rows])
        val = np.array([float(r[2]) for r in rows])
        mem = np.array([r[3].strip() in ("1", "true", "True") for r in rows], dtype=bool)
        return cls(re + 1j * im, val, mem, grid, dict(meta or {}))

    def to_json(self) -> str:
        doc = {
            "grid": self.grid.to_json() if self.grid is not None else None,
            "meta": self.meta,
            "re": self.z.real.tolist(),
            "im": self.z.imag.tolist(),
            "value": self.value.tolist(),
            "member": self.member.astype(int).tolist(),
        }
        return json.dumps(doc, default=_json_default)

    @classmethod
    def from_json(cls, text: str) -> RegionEstimate:
        doc = json.loads(text)
        grid = GridSpec.from_json(doc["grid"]) if doc.get("grid") else None
        z = np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc["im"], dtype=float)
        return cls(z, doc["value"], np.asarray(doc["member"], dtype=bool), grid, doc.get("meta", {}))


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _check_nonempty(*sets):
    for s in sets:
        if len(s) == 0:
            raise ParameterError("set metric needs non-empty point sets")


def _pointset(x) -> PointSet:
    return x if isinstance(x, PointSet) else PointSet(x)


def hausdorff(a, b) -> float:
    """Two-sided Hausdorff distance between finite point sets."""
    a, b = _pointset(a), _pointset(b)
    _check_nonempty(a, b)
    da, _ = cKDTree(b.xy()).query(a.xy())
    db, _ = cKDTree(a.xy()).query(b.xy())
    return float(max(da.max(), db.max()))


def attouch_wets(a, b, i_max: int = 30) -> float:
    """Truncated Attouch-Wets distance sum_i 2^-i min(1, sup_{|x|<i} |d(x,A) - d(x,B)|).

    The inner sup runs over the points of A and B inside the ball plus a square
    lattice of pitch 0.05 i, so it is accurate to about 0.07 i.
    """
    a, b = _pointset(a), _pointset(b)
    _check_nonempty(a, b)
    if i_max < 1:
        raise ParameterError("i_max must be >= 1")
    ta, tb = cKDTree(a.xy()), cKDTree(b.xy())
    both = np.concatenate([a.xy(), b.xy()])
    radius = np.hypot(both[:, 0], both[:, 1])
    k = np.arange(-20, 21)
    unit = np.stack(np.meshgrid(k, k), axis=-1).reshape(-1, 2) * 0.05
    unit = unit[np.hypot(unit[:, 0], unit[:, 1]) < 1.0]
    total = 0.0
    for i in range(1, i_max + 1):
        x = np.concatenate([both[radius < i], unit * i])
        gap = np.abs(ta.query(x)[0] - tb.query(x)[0]).max()
        total += 2.0**-i * min(1.0, gap)
    return total
