"""Acceptance criteria AC-1 .. AC-12.

Each test decides one criterion at its stated tolerance and runtime target.
The terminal summary prints one PASS/FAIL line per criterion. Run directly
with `python tests/test_acceptance.py` or through pytest.
"""

import sys
import time

import numpy as np
import pytest

from oracles import dist_to, hausdorff_brute, neighborhood_of_segment, rayleigh_quotients
from specsci import GridSpec, attouch_wets, hausdorff
from specsci.calculus import (
    Contour,
    coefficient_distance,
    funcalc,
    make_function,
    multicentric_coeffs,
    q_eval,
    resolvent_series,
)
from specsci.errors import NotInResolventDomainError
from specsci.hulls import hull_enumeration, min_norm_poly, numerical_range_v1, region_subset, vp_member
from specsci.operators import dense, diagonal, jordan, laplacian, matrix_norm, norm_of_poly, section, unilateral_shift
from specsci.poly import MonicPoly
from specsci.pseudospectra import GammaParams, gamma_components
from specsci.sci import counterexample_check, gamma_banded, gamma_compact

pytestmark = pytest.mark.slow


class Clock:
    def __init__(self, limit):
        self.limit = limit
        self.start = time.perf_counter()

    def check(self):
        elapsed = time.perf_counter() - self.start
        assert elapsed < self.limit, f"runtime {elapsed:.1f} s exceeds {self.limit} s"


@pytest.mark.acceptance("AC-1")
def test_compact_tower_converges_to_harmonic_spectrum():
    clock = Clock(60)
    spec = diagonal(formula="1/j")
    dists = []
    for n in (16, 36, 64, 100):
        members = gamma_compact(spec, n).region.members()
        delta = 1 / np.sqrt(n)
        j = np.arange(1, n + 1)
        target = np.concatenate([[0], 1.0 / j[1.0 / j >= delta]])
        d = hausdorff(members, target)
        dists.append(d)
        assert d <= 3 / np.sqrt(n), f"n={n}: d_H={d:.4f} > {3 / np.sqrt(n):.4f}"
    print("AC-1 distances", dists)
    assert all(b < a for a, b in zip(dists, dists[1:])), f"not strictly decreasing: {dists}"
    clock.check()


@pytest.mark.acceptance("AC-2")
def test_gamma_sequence_is_monotone_on_random_matrices():
    clock = Clock(30)
    rng = np.random.default_rng(2)
    grid = GridSpec.theta(8)
    zs = grid.points()
    worst = 0.0
    for _ in range(20):
        spec = dense(rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8)))
        vals = []
        for n in range(4):
            plain, tilde, _, _ = gamma_components(spec, zs, GammaParams(n, 8, "full"))
            vals.append(np.minimum(plain, tilde))
        for n in range(3):
            worst = min(worst, float((vals[n + 1] - vals[n]).min()))
            for eps in (0.1, 0.5):
                # member sets shrink with n (up to the 1e-8 slack)
                assert not (vals[n + 1] < eps - 1e-8)[vals[n] >= eps].any()
    assert worst >= -1e-8, f"gamma decreased by {-worst:.3g}"
    clock.check()


@pytest.mark.acceptance("AC-3")
def test_banded_tower_approaches_laplacian_spectrum():
    clock = Clock(120)
    dists = {}
    for k in (25, 100):
        region = gamma_banded(laplacian(), k, 0, 0.1).region
        re0, re1, im0, im1 = region.grid.window
        xx, yy = np.meshgrid(np.arange(re0, re1 + 1e-9, 0.01), np.arange(im0, im1 + 1e-9, 0.01))
        fine = (xx + 1j * yy).ravel()
        target = fine[neighborhood_of_segment(fine, -2, 2) <= 0.1]
        dists[k] = hausdorff(region.members(), target)
    print("AC-3 distances", dists)
    assert dists[100] <= 0.35 and dists[100] < dists[25]
    clock.check()


@pytest.mark.acceptance("AC-4")
def test_gamma_is_distance_to_spectrum_for_diagonal():
    clock = Clock(10)
    rng = np.random.default_rng(4)
    d = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    spec = dense(np.diag(d))
    z = 2 * (rng.standard_normal(200) + 1j * rng.standard_normal(200))
    ref = dist_to(d, z)
    for n in range(3):
        plain, tilde, _, _ = gamma_components(spec, z, GammaParams(n, 12, "full"))
        err = np.abs(np.minimum(plain, tilde) - ref).max()
        assert err <= 1e-8, f"n={n}: error {err:.3g}"
    clock.check()


@pytest.mark.acceptance("AC-5")
def test_counterexample_separates_the_two_towers():
    clock = Clock(20)
    problems = []
    for m in range(2, 9):
        r = counterexample_check(0.5, m)
        if not r.identities_hold:
            problems.append(f"m={m}: identity residuals {r.identity_residuals}")
        if not r.zero_in_subsequence_tower:
            problems.append(f"m={m}: 0 not in the (m, k_m) member set (min eig {r.subsequence_min_eig_at_zero:.3g})")
        if not r.disc_misses_exact_tower:
            problems.append(f"m={m}: exact member set meets |z| <= 1/8")
    clock.check()
    assert not problems, "; ".join(problems)


@pytest.mark.acceptance("AC-6")
def test_shift_hull_is_closed_unit_disc():
    clock = Clock(5)
    theta = 2 * np.pi * np.arange(1000) / 1000
    direction = np.exp(1j * theta)
    for d in range(1, 7):
        p = MonicPoly.monomial(d)
        norm = norm_of_poly(unilateral_shift(), p)
        assert norm.exact
        lo, hi = np.zeros(1000), np.full(1000, 3.0)
        for _ in range(50):
            mid = (lo + hi) / 2
            inside = vp_member(p, norm, mid * direction)
            lo, hi = np.where(inside, mid, lo), np.where(inside, hi, mid)
        assert np.abs((lo + hi) / 2 - 1).max() <= 1e-6, f"d={d}"
    clock.check()


@pytest.mark.acceptance("AC-7")
def test_first_order_hull_is_numerical_range():
    clock = Clock(60)
    rng = np.random.default_rng(7)
    x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    herm = (x + x.conj().T) / 2
    cases = [("jordan", section(jordan(0, 2), 2).entries), ("hermitian", herm)]
    for name, a in cases:
        extent = matrix_norm(a) + 0.5
        grid = GridSpec.rectangle(-extent, extent, -extent, extent, 0.05)
        region = numerical_range_v1(dense(a), 41, grid)
        w = rayleigh_quotients(a, 100_000)
        if name == "hermitian":
            lam = np.linalg.eigvalsh(a)
            w = np.concatenate([w, lam[[0, -1]]])
        limit = 2 * (grid.pitch + region.meta["center_pitch"])
        d = hausdorff(region.members(), w)
        assert d <= limit, f"{name}: d_H={d:.3f} > {limit:.3f}"
    clock.check()


@pytest.mark.acceptance("AC-8")
def test_min_norm_polynomials_of_laplacian_section():
    clock = Clock(120)
    spec = dense(section(laplacian(), 200).entries)
    for j in range(1, 5):
        _, norm = min_norm_poly(spec, j, 2000)
        assert norm.value <= 2.2, f"j={j}: {norm.value}"
    clock.check()


@pytest.mark.acceptance("AC-9")
def test_factorization_and_resolvent_series():
    clock = Clock(30)
    rng = np.random.default_rng(9)
    tol = 1e-8
    problems = []
    for trial in range(200):
        n = int(rng.integers(2, 9))
        a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
        d = int(rng.integers(1, 6))
        p = MonicPoly.from_roots(0.5 * (rng.standard_normal(d) + 1j * rng.standard_normal(d)))
        pa = matrix_norm(p.of_matrix(a))
        while True:
            z = complex(*rng.standard_normal(2))
            z = z / abs(z) * rng.uniform(1.5, 4)
            if pa < abs(p(z)) * (1 - 1e-3):
                break
        scale = (matrix_norm(a) + abs(z) + 1) ** d
        ident = matrix_norm((a - z * np.eye(n)) @ q_eval(p, z, a) - (p.of_matrix(a) - p(z) * np.eye(n))) / scale
        if ident > 1e-12:
            problems.append(f"#{trial}: identity residual {ident:.3g}")
        try:
            _, rep = resolvent_series(p, a, z, tol)
        except NotInResolventDomainError as exc:
            problems.append(f"#{trial}: {exc}")
            continue
        if rep.residual > 2 * tol:
            problems.append(f"#{trial}: resolvent residual {rep.residual:.3g}")
        if rep.n_terms > 0 and not (rep.rho / 2 <= rep.measured_ratio <= 2 * rep.rho):
            problems.append(f"#{trial}: measured ratio {rep.measured_ratio:.3g} vs rho {rep.rho:.3g}")
    clock.check()
    assert not problems, f"{len(problems)} violations: " + "; ".join(problems[:10])


@pytest.mark.acceptance("AC-10")
def test_multicentric_log_of_diagonal():
    clock = Clock(20)
    p = MonicPoly.from_roots([1, 4])
    a = np.diag([1, 1.2, 3.8, 4.1])
    f = make_function("log")
    result, _ = funcalc(f, p, a)
    assert np.abs(result - np.diag(np.log(np.diag(a)))).max() <= 1e-6

    c = multicentric_coeffs(f, p, 60)
    rng = np.random.default_rng(10)
    z = c.contour.center + c.contour.radius * np.sqrt(rng.uniform(0, 1, 50)) * np.exp(2j * np.pi * rng.uniform(0, 1, 50))
    assert np.abs(c.delta(z).sum(axis=0) - 1).max() <= 1e-12
    bound = c.tail_bound(z)
    err = np.abs(c.evaluate(z) - np.log(z))
    assert (err <= bound + 1e-10)[np.isfinite(bound)].all()

    # path independence: log has no contour pair with a radius ratio of 2
    # around both roots that stays clear of the cut, so use the widest pair
    c1 = multicentric_coeffs(f, p, 40, Contour(2.5, 1.6))
    c2 = multicentric_coeffs(f, p, 40, Contour(2.5, 2.45))
    assert coefficient_distance(c1, c2) <= 1e-6
    e = make_function("exp")
    q = MonicPoly((0, -0.01))
    assert coefficient_distance(multicentric_coeffs(e, q, 30, Contour(0, 0.2)),
                                multicentric_coeffs(e, q, 30, Contour(0, 0.4))) <= 1e-6
    clock.check()


@pytest.mark.acceptance("AC-11")
def test_hull_enumeration_of_diag_pm1():
    clock = Clock(120)
    state = hull_enumeration(dense(np.diag([1.0, -1])), 3, 10_000)
    assert len(state.accepted) >= 3
    assert state.budget_spent["indices"] <= 10_000 * 3
    dists = [hausdorff(state.sample(m), [1, -1]) for m in range(len(state.accepted))]
    print("AC-11 distances", dists)
    assert all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
    for m in range(1, len(state.accepted)):
        assert state.accepted[m]["certificate"]["holds"]
        assert region_subset(state.poly(m), state.norm(m), state.poly(m - 1), state.norm(m - 1),
                             state.window, state.samples)
    clock.check()


@pytest.mark.acceptance("AC-12")
def test_set_metrics():
    clock = Clock(10)
    rng = np.random.default_rng(12)

    def draw():
        k = int(rng.integers(1, 15))
        return rng.standard_normal(k) * 2 + 1j * rng.standard_normal(k) * 2

    for _ in range(1000):
        a, b, c = draw(), draw(), draw()
        ab = hausdorff(a, b)
        assert ab == hausdorff(b, a)
        assert ab <= hausdorff(a, c) + hausdorff(c, b) + 1e-12
        assert hausdorff(a, a) == 0
        assert ab == pytest.approx(hausdorff_brute(a, b), abs=1e-12)

    base = np.exp(2j * np.pi * np.arange(12) / 12)
    noise = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    noise /= np.abs(noise).max()
    radius = 2.0
    floor = 2.0 ** -(int(np.ceil(radius)) + 1)
    for t in 0.5 ** np.arange(1, 16):
        h = hausdorff(base, base + t * noise)
        aw = attouch_wets(base, base + t * noise, 30)
        # on bounded sets each metric bounds the other by a fixed factor
        assert floor * min(1, h) - 1e-15 <= aw <= h + 2.0**-30
    clock.check()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
