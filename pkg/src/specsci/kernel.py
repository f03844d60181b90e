"""Cholesky-existence tests, smallest-eigenvalue bisection and the powered
finite-section matrices

    T_{m,k}(z)  = P_m ((B^{2^n})^* B^{2^n}) P_m,     B = P_k (T - z) P_k,
    T~_{m,k}(z) = P_m (B^{2^n} (B^{2^n})^*) P_m.

Everything works on stacks of matrices so a whole grid can be tested at once.
Stacks are either complex128 arrays or object arrays of gmpy2.mpc numbers; the
latter give a slow but arbitrarily precise fallback for ill-conditioned points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from .errors import ParameterError
from .operators import OperatorSpec, column_reach, row_reach, section

SYMMETRY_TOL = 1e-12
# float working sets are kept below this many complex entries per chunk
CHUNK_ENTRIES = 1 << 21

_mp_real = np.frompyfunc(lambda x: x.real, 1, 1)
_mp_sqrt = np.frompyfunc(gmpy2.sqrt, 1, 1)
_mp_from_complex = np.frompyfunc(gmpy2.mpc, 1, 1)
_mp_abs = np.frompyfunc(abs, 1, 1)


def _is_mp(a: np.ndarray) -> bool:
    return a.dtype == object


def _real(a):
    return _mp_real(a) if _is_mp(a) else a.real


def _sqrt(a):
    return _mp_sqrt(a) if _is_mp(a) else np.sqrt(a)


def to_mp(a: np.ndarray) -> np.ndarray:
    """Exact conversion of a complex array into gmpy2.mpc objects."""
    return _mp_from_complex(np.asarray(a, dtype=complex)).astype(object)


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """A dense Hermitian matrix; symmetry is checked, then enforced."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ParameterError("Hermitian matrix must be square")
        scale = max(1.0, float(np.abs(a).max())) if a.size else 1.0
        if a.size and np.abs(a - a.conj().T).max() > SYMMETRY_TOL * scale:
            raise ParameterError("matrix is not Hermitian")
        a = (a + a.conj().T) / 2
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    def shifted(self, s: float) -> HermitianMatrix:
        return HermitianMatrix(self.entries - s * np.eye(self.m))


def default_tau(h: np.ndarray) -> float:
    """Pivot threshold 1e-12 * max |diag|, the diagonal maximum floored at 1e-300."""
    d = np.abs(np.diagonal(h)).max() if h.size else 0.0
    return 1e-12 * max(float(d), 1e-300)


def _bandwidth(stack: np.ndarray) -> int:
    nz = np.asarray(stack != 0, dtype=bool).any(axis=0)
    i, j = np.nonzero(nz)
    return int(np.abs(i - j).max()) if i.size else 0


def cholesky_pass(stack: np.ndarray, tau) -> np.ndarray:
    """For each matrix of a Hermitian stack (P, m, m): does the Cholesky
    recurrence run to completion with every pivot > tau?

    Only the lower triangle's columns are read. Updates are restricted to the
    common bandwidth of the stack, which the factor inherits; narrow bands run
    on band storage.
    """
    a = np.asarray(stack)
    if a.ndim == 2:
        a = a[None]
    count, m, _ = a.shape
    tau = np.broadcast_to(np.asarray(tau, dtype=a.dtype if _is_mp(a) else float), (count,)).copy()
    bw = _bandwidth(a)
    if 4 * bw < m:
        return _band_cholesky_pass(a, bw, tau)
    a = np.array(a, copy=True)
    ok = np.ones(count, dtype=bool)
    live = np.arange(count)
    for j in range(m):
        piv = _real(a[:, j, j])
        good = np.asarray(piv > tau, dtype=bool)
        if not good.all():
            ok[live[~good]] = False
            live, a, tau, piv = live[good], a[good], tau[good], piv[good]
            if live.size == 0:
                break
        hi = min(m, j + 1 + bw)
        if hi > j + 1:
            col = a[:, j + 1 : hi, j] / _sqrt(piv)[:, None]
            a[:, j + 1 : hi, j + 1 : hi] -= col[:, :, None] * np.conj(col)[:, None, :]
    return ok


def _band_cholesky_pass(a: np.ndarray, bw: int, tau: np.ndarray) -> np.ndarray:
    """cholesky_pass on lower band storage."""
    return band_factor_pass(_to_band(a, bw), a.shape[1], tau)


def _to_band(a: np.ndarray, bw: int) -> np.ndarray:
    """Lower band storage of a stack: band[:, d, j] = a[:, j + d, j]."""
    count, m, _ = a.shape
    band = np.zeros((count, bw + 1, m + bw), dtype=a.dtype)
    if _is_mp(a):
        band[...] = a[0, 0, 0] * 0
    idx = np.arange(m)
    for d in range(bw + 1):
        band[:, d, : m - d] = a[:, idx[d:], idx[: m - d]]
    return band


def band_factor_pass(band: np.ndarray, m: int, tau) -> np.ndarray:
    """Cholesky pivot test on lower band storage of shape (P, bw + 1, m + bw),
    zero beyond column m - d of diagonal d. The storage is overwritten."""
    count, w, _ = band.shape
    bw = w - 1
    tau = np.broadcast_to(np.asarray(tau, dtype=band.dtype if _is_mp(band) else float), (count,)).copy()
    ok = np.ones(count, dtype=bool)
    live = np.arange(count)
    for j in range(m):
        piv = _real(band[:, 0, j])
        good = np.asarray(piv > tau, dtype=bool)
        if not good.all():
            ok[live[~good]] = False
            live, band, tau, piv = live[good], band[good], tau[good], piv[good]
            if live.size == 0:
                break
        if bw:
            col = band[:, 1:, j] / _sqrt(piv)[:, None]  # rows j+1 .. j+bw
            for s in range(1, bw + 1):
                cs = np.conj(col[:, s - 1])
                for r in range(s, bw + 1):
                    band[:, r - s, j + s] -= col[:, r - 1] * cs
    return ok


def cholesky_exists(h, tau: float | None = None) -> bool:
    """True iff the Cholesky recurrence completes with all pivots > tau."""
    a = h.entries if isinstance(h, HermitianMatrix) else HermitianMatrix(h).entries
    if tau is None:
        tau = default_tau(a)
    if tau < 0:
        raise ParameterError("tau must be non-negative")
    return bool(cholesky_pass(a[None], tau)[0])


def row_norm(a: np.ndarray) -> float:
    return float(np.abs(a).sum(axis=-1).max()) if a.size else 0.0


def min_eig_hermitian(h, tol: float = 1e-10, tau: float | None = None) -> float:
    """Smallest eigenvalue by bisection on the shift s, with Cholesky of H - s I
    deciding the side. The bracket is [-r, r] for the max row sum r."""
    if not tol > 0:
        raise ParameterError("tol must be positive")
    a = h.entries if isinstance(h, HermitianMatrix) else HermitianMatrix(h).entries
    if tau is None:
        tau = default_tau(a)
    r = row_norm(a)
    lo, hi = -r, r
    if r == 0:
        return 0.0
    eye = np.eye(a.shape[0])
    steps = max(0, math.ceil(math.log2((hi - lo) / tol)))
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if cholesky_pass((a - mid * eye)[None], tau)[0]:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# powered sections


def section_array(spec: OperatorSpec, k: int) -> np.ndarray:
    return section(spec, k).entries


def power_stack(a: np.ndarray, zs, n: int, m: int, variant: str) -> np.ndarray:
    """Stack of compressed powered products, one per point of zs.

    a is the k x k section (complex or mp objects). For n = 0
    the product is expanded as A*A - z A* - conj(z) A + |z|^2, which costs
    O(m^2) per point instead of a matrix product; mp arrays use the same
    expansion at the working precision.
    """
    if variant not in ("plain", "tilde"):
        raise ParameterError(f"variant must be plain or tilde, got {variant!r}")
    zs = np.atleast_1d(zs)
    k = a.shape[0]
    if not 1 <= m <= k:
        raise ParameterError(f"need 1 <= m <= k, got m={m}, k={k}")
    if n == 0:
        g, x, y = affine_parts(a, m, variant)
        z = (zs if _is_mp(a) else zs.astype(complex))[:, None, None]
        out = g[None] - z * x[None] - np.conj(z) * y[None]
        idx = np.arange(m)
        out[:, idx, idx] += (np.abs(zs) ** 2)[:, None]
        return out
    eye = np.eye(k, dtype=int)
    b = a[None] - zs.reshape(-1, 1, 1) * eye[None]
    for _ in range(n):
        b = b @ b
    if variant == "plain":
        c = b[:, :, :m]
        return np.conj(np.swapaxes(c, 1, 2)) @ c
    c = b[:, :m, :]
    return c @ np.conj(np.swapaxes(c, 1, 2))


def affine_parts(a: np.ndarray, m: int, variant: str):
    """(G, X, Y) with the n = 0 compression equal to G - z X - conj(z) Y + |z|^2 I."""
    ah = a.conj().T
    g = (ah @ a if variant == "plain" else a @ ah)[:m, :m]
    return g, ah[:m, :m], a[:m, :m]


def affine_band(parts, zs: np.ndarray, shift: float = 0.0):
    """Lower band storage of G - z X - conj(z) Y + (|z|^2 - shift) I for every
    z, or None when the band is too wide to pay off."""
    g, x, y = parts
    m = g.shape[0]
    nz = (g != 0) | (x != 0) | (y != 0)
    i, j = np.nonzero(nz)
    bw = int(np.abs(i - j).max()) if i.size else 0
    if 4 * bw >= m:
        return None
    zs = np.asarray(zs, dtype=complex)
    band = np.zeros((zs.size, bw + 1, m + bw), dtype=complex)
    zc = np.conj(zs)
    for d in range(bw + 1):
        gd, xd, yd = np.diagonal(g, -d), np.diagonal(x, -d), np.diagonal(y, -d)
        band[:, d, : m - d] = gd[None] - zs[:, None] * xd[None] - zc[:, None] * yd[None]
    band[:, 0, :m] += (np.abs(zs) ** 2 - shift)[:, None]
    return band


def full_truncation(spec: OperatorSpec, n: int, m: int) -> int:
    """Inner size k at which the (m, k) section equals the untruncated compression.

    Banded kinds: k = m + 2^n d. Finite kinds: k = N. Other kinds have no such k.
    """
    if spec.finite:
        return spec.dim
    if spec.band_width is not None:
        return m + 2**n * spec.band_width
    raise ParameterError(
        f"kind {spec.kind!r} is neither banded nor finite; only the two-parameter (m, k) sections exist"
    )


def _exact_truncation(spec: OperatorSpec, n: int, m: int, variant: str) -> int | None:
    """Like full_truncation but for any kind with finitely supported columns
    (used for the counterexample operator)."""
    reach = column_reach if variant == "plain" else row_reach
    r = reach(spec, m, 2**n)
    if r is None:
        return None
    # intermediate products must not be clipped either
    return max(r, m)


def _validate_power_args(spec, n, m, k):
    if int(n) != n or n < 0:
        raise ParameterError("n must be a non-negative integer")
    if int(m) != m or m < 1:
        raise ParameterError("m must be a positive integer")
    if k < m:
        raise ParameterError(f"need k >= m, got m={m}, k={k}")
    if spec.finite and k > spec.dim:
        raise IndexError(f"k={k} exceeds dimension {spec.dim}")


def power_section(spec: OperatorSpec, z: complex, n: int, m: int, k: int, variant: str = "plain") -> HermitianMatrix:
    """T_{m,k}(z) (plain) or T~_{m,k}(z) (tilde) built with n squarings."""
    _validate_power_args(spec, n, m, k)
    h = power_stack(section_array(spec, k), np.array([z]), n, m, variant)[0]
    return HermitianMatrix(h)


def power_section_full(spec: OperatorSpec, z: complex, n: int, m: int, variant: str = "plain") -> HermitianMatrix:
    """Untruncated compression P_m ((T-z)^*)^{2^n} (T-z)^{2^n} P_m (or tilde),
    available for banded and finite kinds."""
    k = full_truncation(spec, n, m)
    return power_section(spec, z, n, m, k, variant)


# smallest-eigenvalue roots with precision escalation

MP_BITS = (256, 512, 1024, 2048)
# safety factor on the first-order rounding error models below
ERROR_SAFETY = 10.0


def _bisect(test, lo, hi, tol):
    """Vectorized bisection: test(idx, g) is True where lambda_min > g^root."""
    lo, hi = lo.copy(), hi.copy()
    active = np.arange(lo.size)
    while active.size:
        active = active[np.asarray(hi[active] - lo[active] > tol, dtype=bool)]
        if active.size == 0:
            break
        mid = (lo[active] + hi[active]) / 2
        # tol below the spacing of representable numbers: the bracket is exhausted
        split = np.asarray((mid > lo[active]) & (mid < hi[active]), dtype=bool)
        active, mid = active[split], mid[split]
        if active.size == 0:
            break
        up = test(active, mid)
        lo[active[up]] = mid[up]
        hi[active[~up]] = mid[~up]
    return lo, hi


def _direct_roots(stack, root, tol, tau):
    """Bisection for lambda_min(H)^(1/root) using Cholesky of H - g^root I."""
    count, m, _ = stack.shape
    bw = _bandwidth(stack)
    if 4 * bw < m:
        return _band_roots(_to_band(stack, bw), m, root, tol, tau)
    eye = np.eye(m, dtype=int)
    rows = _mp_abs(stack).sum(axis=-1).max(axis=-1) if _is_mp(stack) else np.abs(stack).sum(axis=-1).max(axis=-1)
    if _is_mp(stack):
        hi = np.array([gmpy2.root(r, root) if r > 0 else gmpy2.mpfr(0) for r in rows], dtype=object)
    else:
        hi = rows ** (1.0 / root)
    lo = hi * 0
    ok0 = cholesky_pass(stack, tau)
    hi = np.where(ok0, hi, lo)

    def test(idx, g):
        return cholesky_pass(stack[idx] - (g**root).reshape(-1, 1, 1) * eye[None], tau)

    lo, hi = _bisect(test, lo, hi, tol)
    return (lo + hi) / 2, rows


def _band_roots(band, m, root, tol, tau):
    """_direct_roots for a stack held in lower band storage."""
    bw = band.shape[1] - 1
    mp = _is_mp(band)
    mag = _mp_abs(band) if mp else np.abs(band)
    rows = mag[:, 0, :m].copy()
    for d in range(1, bw + 1):
        rows[:, d:] += mag[:, d, : m - d]  # H[i, i-d]
        rows[:, : m - d] += mag[:, d, : m - d]  # H[i, i+d]
    rows = rows.max(axis=1)
    if mp:
        hi = np.array([gmpy2.root(r, root) if r > 0 else gmpy2.mpfr(0) for r in rows], dtype=object)
    else:
        hi = rows ** (1.0 / root)
    lo = hi * 0
    hi = np.where(band_factor_pass(band.copy(), m, tau), hi, lo)

    def test(idx, g):
        b = band[idx].copy()
        b[:, 0, :m] -= (g**root)[:, None]
        return band_factor_pass(b, m, tau)

    lo, hi = _bisect(test, lo, hi, tol)
    return (lo + hi) / 2, rows


def _inverse_roots(a, zs, n, variant, tol, tau):
    """Same quantity for square sections via G = H^-1 = D D^* (D = (B^-1)^(2^n)):
    lambda_min(H) = 1 / lambda_max(G), bisected with Cholesky of g^-root I - G.

    Returns values and a first-order relative error estimate of lambda.
    """
    k = a.shape[0]
    root = 2 ** (n + 1)
    b = a[None] - zs.reshape(-1, 1, 1) * np.eye(k)[None]
    values = np.full(zs.size, np.nan)
    rel_err = np.full(zs.size, np.inf)
    u = np.finfo(float).eps / 2
    with np.errstate(all="ignore"):
        try:
            binv = np.linalg.inv(b)
        except np.linalg.LinAlgError:
            binv = np.stack([_safe_inv(x) for x in b])
        # relative error of D, propagated through each squaring:
        # e' = (2 e + k u) ||X||^2 / ||X^2||
        e = k * u * _inf_norm(b) * _inf_norm(binv)
        d = binv
        for _ in range(n):
            nd = _inf_norm(d)
            d = d @ d
            e = (2 * e + k * u) * nd**2 / _inf_norm(d)
        dh = np.conj(np.swapaxes(d, 1, 2))
        g = d @ dh if variant == "plain" else dh @ d
    fine = np.all(np.isfinite(g.reshape(zs.size, -1)), axis=1) & np.isfinite(e)
    if not fine.any():
        return values, rel_err
    idx = np.nonzero(fine)[0]
    g = g[idx]
    eye = np.eye(k)
    rows = np.abs(g).sum(axis=-1).max(axis=-1)
    top = np.abs(np.diagonal(g, axis1=1, axis2=2)).max(axis=-1)
    lo = rows ** (-1.0 / root)
    hi = np.where(top > 0, top, rows) ** (-1.0 / root)

    def test(sub, x):
        return cholesky_pass((x ** (-root)).reshape(-1, 1, 1) * eye[None] - g[sub], tau)

    lo, hi = _bisect(test, lo, hi, tol)
    values[idx] = (lo + hi) / 2
    # ||G||_inf <= k lambda_max(G), so relative errors in G scale by k
    rel_err[idx] = ERROR_SAFETY * k * (2 * e[idx] + k * u)
    return values, rel_err


def _inf_norm(x):
    return np.abs(x).sum(axis=-1).max(axis=-1)


def _safe_inv(x):
    try:
        return np.linalg.inv(x)
    except np.linalg.LinAlgError:
        return np.full_like(x, np.nan)


def powered_min_root(
    a: np.ndarray,
    zs,
    n: int,
    m: int,
    variant: str,
    tol: float = 1e-10,
    precision: str = "auto",
    tau: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """lambda_min(T_{m,k}(z))^(1/2^(n+1)) clamped at 0, for every z in zs.

    Three tiers, each used only where the previous one cannot certify its
    result to about tol:

    1. float bisection on H itself, trusted when the first-order rounding
       error model ERROR_SAFETY * k 2^n u ||H|| keeps g accurate to tol;
    2. for square sections (m = k), float bisection on H^-1, whose largest
       eigenvalue is well conditioned near the spectrum;
    3. gmpy2 arithmetic at 256, 512, ... bits on the direct formulation.

    precision="double" stops after tier 1. Returns (values, tier per point:
    53 for float direct, 54 for float inverse, else the bit count).
    """
    if precision not in ("auto", "double"):
        raise ParameterError("precision must be 'auto' or 'double'")
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    root = 2 ** (n + 1)
    k = a.shape[0]
    values = np.zeros(zs.size)
    err = np.zeros(zs.size)
    tier = np.full(zs.size, 53)
    u = np.finfo(float).eps / 2
    parts = affine_parts(a, m, variant) if n == 0 and not _is_mp(a) else None
    probe = affine_band(parts, zs[:1]) if parts is not None else None
    if probe is not None:
        per_chunk = max(1, CHUNK_ENTRIES // probe[0].size)
    else:
        per_chunk = max(1, CHUNK_ENTRIES // (k * k if n else m * m))
    for start in range(0, zs.size, per_chunk):
        sl = slice(start, start + per_chunk)
        if probe is not None:
            g, rows = _band_roots(affine_band(parts, zs[sl]), m, root, tol, tau)
        else:
            g, rows = _direct_roots(power_stack(a, zs[sl], n, m, variant), root, tol, tau)
        values[sl] = g
        err[sl] = ERROR_SAFETY * k * 2**n * u * rows
    if precision == "double":
        return values, tier
    todo = np.nonzero(~_certified(values, err, root, tol))[0]
    guess = values.copy()
    if todo.size and m == k:
        g, rel = _inverse_roots(a, zs[todo], n, variant, tol, tau)
        good = np.isfinite(g) & (g * rel / root <= tol)
        # uncertified inverse estimates are still the better starting guess
        guess[todo] = np.where(np.isfinite(g), g, guess[todo])
        values[todo[good]] = g[good]
        tier[todo[good]] = 54
        todo = todo[~good]
    for bits in MP_BITS:
        if todo.size == 0:
            break
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            stack = power_stack(to_mp(a), to_mp(zs[todo]), n, m, variant)
            mp_tau = gmpy2.mpfr(tau)
            # confirm the float estimate with two Cholesky tests; bisect the rest
            g = guess[todo].copy()
            sure = _brackets(stack, g, root, tol, mp_tau)
            rows = _mp_abs(stack).sum(axis=-1).max(axis=-1)
            if not sure.all():
                g_rest, _ = _direct_roots(stack[~sure], root, tol, mp_tau)
                g[~sure] = [float(v) for v in g_rest]
            rows = np.array([float(r) for r in rows])
        values[todo] = g
        tier[todo] = bits
        todo = todo[~_certified(g, ERROR_SAFETY * k * 2**n * 2.0**-bits * rows, root, tol)]
    return values, tier


def _brackets(stack, g, root, tol, tau):
    """Does lambda_min(H)^(1/root) lie in [g - tol/2, g + tol/2]?"""
    m = stack.shape[1]
    lo = np.maximum(g - tol / 2, 0.0)
    hi = g + tol / 2
    bw = _bandwidth(stack)
    base = _to_band(stack, bw) if 4 * bw < m else None
    idx = np.arange(m)

    def above(x):
        s = np.array([gmpy2.mpfr(v) ** root for v in x], dtype=object)[:, None]
        if base is not None:
            b = base.copy()
            b[:, 0, :m] -= s
            return band_factor_pass(b, m, tau)
        h = stack.copy()
        h[:, idx, idx] -= s
        return cholesky_pass(h, tau)

    above_lo = np.where(lo > 0, above(lo), True)
    return above_lo & ~above(hi)


def _certified(g, lam_err, root, tol):
    """Is g = lambda^(1/root) accurate to tol given an absolute error in lambda?"""
    lam = g**root
    with np.errstate(divide="ignore", invalid="ignore"):
        g_err = np.where(lam > lam_err, g * lam_err / (root * lam), np.inf)
    return g_err <= tol
