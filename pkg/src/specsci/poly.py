"""Monic polynomials p(z) = z^d + a_1 z^(d-1) + ... + a_d."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class MonicPoly:
    coeffs: tuple  # (a_1, ..., a_d), complex

    def __post_init__(self):
        c = tuple(complex(a) for a in self.coeffs)
        if len(c) < 1:
            raise ParameterError("monic polynomial needs degree >= 1")
        if not all(np.isfinite(a.real) and np.isfinite(a.imag) for a in c):
            raise ParameterError("non-finite polynomial coefficient")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_roots(cls, roots) -> MonicPoly:
        full = np.poly(np.asarray(roots, dtype=complex))
        return cls(tuple(full[1:]))

    @classmethod
    def monomial(cls, d: int) -> MonicPoly:
        return cls((0.0,) * d)

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def full(self) -> np.ndarray:
        """Coefficients with the leading 1, highest power first."""
        return np.concatenate([[1.0 + 0j], np.asarray(self.coeffs, dtype=complex)])

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for a in self.coeffs:
            out = out * z + a
        return out

    def derivative(self, z):
        c = self.full()
        d = self.degree
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for i, a in enumerate(c[:-1]):
            out = out * z + (d - i) * a
        return out

    def roots(self) -> np.ndarray:
        return np.roots(self.full())

    def of_matrix(self, a: np.ndarray) -> np.ndarray:
        """Horner evaluation p(a) for a square matrix."""
        a = np.asarray(a, dtype=complex)
        eye = np.eye(a.shape[0], dtype=complex)
        out = eye.copy()
        for c in self.coeffs:
            out = out @ a + c * eye
        return out

    def prefix(self, j: int) -> np.ndarray:
        """Coefficients of Q_j(z) = z^j + a_1 z^(j-1) + ... + a_j, highest first."""
        return self.full()[: j + 1]

    def taylor_slack(self, z, r):
        """Upper bound of |p(w) - p(z)| over |w - z| <= r."""
        z = np.asarray(z, dtype=complex)
        c = self.full()
        total = np.zeros(z.shape)
        fact = 1.0
        deriv = c.copy()
        for k in range(1, self.degree + 1):
            deriv = np.polyder(deriv)
            fact *= k
            total = total + np.abs(np.polyval(deriv, z)) * r**k / fact
        return total

    def to_json(self) -> list:
        return [[a.real, a.imag] for a in self.coeffs]

    @classmethod
    def from_json(cls, data) -> MonicPoly:
        return cls(tuple(complex(float(re), float(im)) for re, im in data))

    def __str__(self) -> str:
        terms = [f"z^{self.degree}"]
        for i, a in enumerate(self.coeffs, start=1):
            if a != 0:
                terms.append(f"({a:.6g})z^{self.degree - i}")
        return " + ".join(terms)
