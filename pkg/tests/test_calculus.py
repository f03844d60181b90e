import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from specsci.calculus import (
    Contour,
    coefficient_distance,
    funcalc,
    log_element,
    make_function,
    multicentric_coeffs,
    q_eval,
    resolvent_series,
)
from specsci.errors import Inconclusive, NotInResolventDomainError, ParameterError
from specsci.operators import jordan, section
from specsci.poly import MonicPoly

LOG_P = MonicPoly.from_roots([1, 4])


def test_q_of_linear_polynomial_is_identity():
    a = np.array([[1.0, 2], [3, 4]])
    assert np.array_equal(q_eval(MonicPoly((0,)), 0.7, a), np.eye(2))


def test_q_of_square():
    q = q_eval(MonicPoly.monomial(2), 2.0, np.diag([1.0, -1]))
    assert np.allclose(q, np.diag([3, 1]))


@given(st.integers(0, 10**6), st.integers(1, 5), st.integers(1, 6))
def test_factorization_identity(seed, d, n):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    p = MonicPoly(tuple(rng.standard_normal(d) + 1j * rng.standard_normal(d)))
    z = complex(*rng.standard_normal(2))
    lhs = (a - z * np.eye(n)) @ q_eval(p, z, a)
    rhs = p.of_matrix(a) - p(z) * np.eye(n)
    scale = (np.linalg.norm(a, 2) + abs(z) + np.abs(p.coeffs).max() + 1) ** d
    assert np.linalg.norm(lhs - rhs, 2) <= 1e-12 * scale


def test_resolvent_scalar():
    r, rep = resolvent_series(MonicPoly((0,)), np.zeros((1, 1)), 2.0)
    assert r[0, 0] == pytest.approx(0.5)


def test_resolvent_diag_pm1():
    r, rep = resolvent_series(MonicPoly.monomial(2), np.diag([1.0, -1]), 2.0)
    assert np.allclose(r, np.diag([1, 1 / 3]), atol=1e-8)
    assert rep.rho == pytest.approx(0.25) and rep.n_terms < 20


def test_resolvent_nilpotent_terminates():
    a = section(jordan(0, 3), 3).entries
    r, rep = resolvent_series(MonicPoly.monomial(3), a, 1.0)
    assert np.allclose(r, np.linalg.inv(np.eye(3) - a), atol=1e-12)
    assert rep.n_terms == 0


def test_resolvent_outside_domain():
    with pytest.raises(NotInResolventDomainError):
        resolvent_series(MonicPoly.monomial(2), np.diag([1.0, -1]), 0.5)


def test_coefficients_of_identity_function():
    c = multicentric_coeffs(make_function("power_series", coeffs=[0, 1], center=0, radius=np.inf),
                            MonicPoly((0, -1)), 8)
    assert np.allclose(c.alpha[:, 0], c.roots, atol=1e-12)
    assert np.abs(c.alpha[:, 1:]).max() <= 1e-12


def test_coefficients_reproduce_the_polynomial_itself():
    p = MonicPoly((0.5, -1))
    f = make_function("rational", num=list(p.full()), den=[1])
    c = multicentric_coeffs(f, p, 6)
    z = np.array([0.1, -0.3 + 0.2j, 0.4j])
    assert np.abs(c.evaluate(z) - p(z)).max() < 1e-10


def test_log_coefficients_reconstruct():
    c = multicentric_coeffs(make_function("log"), LOG_P, 120, Contour(2.5, 2.2))
    z = np.array([1.5, 3.0, 3.9])
    assert np.abs(c.evaluate(z) - np.log(z)).max() <= 1e-8


def test_partition_of_unity():
    c = multicentric_coeffs(make_function("log"), LOG_P, 30)
    z = np.random.default_rng(1).standard_normal(40) * 2 + 2
    assert np.abs(c.delta(z).sum(axis=0) - 1).max() <= 1e-12


def test_reconstruction_within_tail_bound():
    c = multicentric_coeffs(make_function("log"), LOG_P, 60)
    rng = np.random.default_rng(2)
    z = c.contour.center + c.contour.radius * np.sqrt(rng.uniform(0, 1, 50)) * np.exp(2j * np.pi * rng.uniform(0, 1, 50))
    bound = c.tail_bound(z)
    err = np.abs(c.evaluate(z) - np.log(z))
    assert np.isfinite(bound).sum() >= 10
    assert (err <= bound + 1e-10)[np.isfinite(bound)].all()


def test_path_independence_for_entire_function():
    f = make_function("exp")
    c1 = multicentric_coeffs(f, MonicPoly((0, -0.01)), 30, Contour(0, 0.2))
    c2 = multicentric_coeffs(f, MonicPoly((0, -0.01)), 30, Contour(0, 0.4))
    assert coefficient_distance(c1, c2) <= 1e-6


def test_jacobi_coefficients_reproduce_function():
    c = multicentric_coeffs(make_function("exp"), MonicPoly((0, -0.25)), 40)
    jac = c.jacobi_coefficients()
    z = np.array([0.1, -0.2j])
    w = c.p(z)
    val = sum(np.polyval(jac[j], z) * w**j for j in range(jac.shape[0]))
    assert np.abs(val - np.exp(z)).max() <= 1e-10


def test_funcalc_annihilated():
    r, rep = funcalc(make_function("log"), LOG_P, np.diag([1.0, 4.0]))
    assert np.allclose(r, np.diag([0, np.log(4)]), atol=1e-12) and rep.J == 0


def test_funcalc_log_near_roots():
    a = np.diag([1, 1.2, 3.8, 4.1])
    r, _ = funcalc(make_function("log"), LOG_P, a)
    assert np.abs(r - np.diag(np.log(np.diag(a)))).max() <= 1e-6


def test_funcalc_exp_nilpotent():
    a = section(jordan(0, 2), 2).entries
    r, _ = funcalc(make_function("exp"), MonicPoly((0, -0.01)), a)
    assert np.abs(r - np.array([[1, 1], [0, 1]])).max() <= 1e-6


@given(st.integers(0, 10**6))
def test_funcalc_exp_matches_expm(seed):
    rng = np.random.default_rng(seed)
    a = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))) / 3
    p = MonicPoly.from_roots(np.linalg.eigvals(a) + 0.05 * rng.standard_normal(3))
    r, _ = funcalc(make_function("exp"), p, a)
    assert np.abs(r - scipy.linalg.expm(a)).max() <= 1e-7


def test_unknown_function_rejected():
    with pytest.raises(ParameterError):
        make_function("gamma")


def test_log_element_positive_diagonal():
    r, rep = log_element(np.diag([1.0, 4.0]))
    assert np.allclose(r, np.diag([0, np.log(4)]), atol=1e-8)
    assert np.abs(scipy.linalg.expm(r) - np.diag([1, 4])).max() < 1e-8


def test_log_element_negative_scalar():
    r, rep = log_element(np.diag([-1.0 + 0j]))
    assert r[0, 0] == pytest.approx(1j * np.pi, abs=1e-8)
    assert rep["exp_residual"] < 1e-8


def test_log_element_singular_is_inconclusive():
    with pytest.raises(Inconclusive) as info:
        log_element(np.diag([0.0, 1.0]), hull_budget=500)
    assert info.value.report
