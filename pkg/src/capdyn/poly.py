"""Critically marked monic centered polynomials and the concrete families.

A degree-``d`` polynomial is built from an ordered list of ``d-1`` critical
points (summing to zero) and the constant term ``a``::

    f(z) = d * integral_0^z (w - c_1)...(w - c_{d-1}) dw + a

Coefficients are stored in ascending order (``coeffs[k]`` multiplies z**k).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import MarkingNotCentered, OrbitOverflow, UnknownFamily

OVERFLOW_CAP = 1e150
CENTER_TOL = 1e-9

FAMILIES = ("S1Cubic", "F1Quartic", "F2Quartic", "Peanut2Plus", "AirplaneQuartic")


def _elementary_symmetric(values: Sequence[complex]) -> list[complex]:
    # e[k] = k-th elementary symmetric function, e[0] = 1
    e = [1 + 0j] + [0j] * len(values)
    for c in values:
        for k in range(len(e) - 1, 0, -1):
            e[k] = e[k] + e[k - 1] * c
    return e


@dataclass(frozen=True)
class MarkedPolynomial:
    """Monic centered polynomial with an ordered critical marking."""

    degree: int
    crit: tuple
    constant: complex
    coeffs: tuple = field(repr=False)

    # -- evaluation -------------------------------------------------------
    def __call__(self, z):
        return self.eval(z)

    def eval(self, z: complex) -> complex:
        c = self.coeffs
        w = c[-1]
        for k in range(len(c) - 2, -1, -1):
            w = w * z + c[k]
        return w

    def deriv(self, z: complex) -> complex:
        c = self.coeffs
        d = len(c) - 1
        w = d * c[d]
        for k in range(d - 1, 0, -1):
            w = w * z + k * c[k]
        return w

    def eval_deriv(self, z: complex) -> tuple[complex, complex]:
        c = self.coeffs
        w = c[-1]
        dw = 0j
        for k in range(len(c) - 2, -1, -1):
            dw = dw * z + w
            w = w * z + c[k]
        return w, dw

    def eval_array(self, z):
        c = self.coeffs
        w = np.full(np.shape(z), c[-1], dtype=complex)
        for k in range(len(c) - 2, -1, -1):
            w = w * z + c[k]
        return w

    def eval_deriv_array(self, z):
        c = self.coeffs
        w = np.full(np.shape(z), c[-1], dtype=complex)
        dw = np.zeros(np.shape(z), dtype=complex)
        for k in range(len(c) - 2, -1, -1):
            dw = dw * z + w
            w = w * z + c[k]
        return w, dw

    def orbit(self, z: complex, n: int) -> list[complex]:
        """Return ``[z, f(z), ..., f^n(z)]``.

        Raises OrbitOverflow (carrying the truncated orbit) once an iterate
        exceeds the magnitude cap.
        """
        if n < 0:
            raise ValueError("n must be non-negative")
        out = [complex(z)]
        for _ in range(n):
            try:
                z = self.eval(z)
            except OverflowError:
                raise OrbitOverflow("iterate overflowed", out) from None
            if not abs(z) <= OVERFLOW_CAP:
                out.append(z)
                raise OrbitOverflow(f"|iterate| exceeded {OVERFLOW_CAP:g}", out)
            out.append(z)
        return out

    def iterate(self, z: complex, n: int) -> complex:
        for _ in range(n):
            z = self.eval(z)
        return z

    def iterate_deriv(self, z: complex, n: int) -> tuple[complex, complex]:
        """Return ``(f^n(z), (f^n)'(z))`` by the chain rule."""
        dz = 1 + 0j
        for _ in range(n):
            w, dw = self.eval_deriv(z)
            dz = dz * dw
            z = w
        return z, dz

    # -- structure --------------------------------------------------------
    def taylor(self, v: complex) -> np.ndarray:
        """Taylor coefficients of f about ``v`` (ascending)."""
        c = np.array(self.coeffs, dtype=complex)
        d = len(c) - 1
        out = np.zeros(d + 1, dtype=complex)
        # synthetic division repeated d+1 times
        work = c[::-1].copy()
        for k in range(d + 1):
            acc = work[0]
            nxt = [acc]
            for j in range(1, len(work)):
                acc = acc * v + work[j]
                nxt.append(acc)
            out[k] = nxt[-1]
            work = np.array(nxt[:-1], dtype=complex)
        return out

    def critical_values(self) -> list[complex]:
        return [self.eval(c) for c in self.crit]

    def compose_power(self, n: int) -> "MarkedPolynomial":
        """The n-th iterate as a marked polynomial (marking sorted)."""
        if n < 1:
            raise ValueError("n must be >= 1")
        base = np.array(self.coeffs, dtype=complex)
        res = base.copy()
        for _ in range(n - 1):
            acc = np.array([base[-1]], dtype=complex)
            for k in range(len(base) - 2, -1, -1):
                acc = np.polynomial.polynomial.polymul(acc, res)
                acc[0] += base[k]
            res = acc
        return from_coefficients(res)


def build_from_marking(crit: Sequence[complex], a: complex = 0j) -> MarkedPolynomial:
    """Build ``f_{c,a}`` from the critical marking ``crit`` and constant ``a``."""
    crit = tuple(complex(c) for c in crit)
    if len(crit) < 1:
        raise ValueError("need at least one critical point")
    s = sum(crit)
    scale = max(1.0, max(abs(c) for c in crit))
    if abs(s) > CENTER_TOL * scale:
        raise MarkingNotCentered(f"sum of critical points is {s!r}")
    d = len(crit) + 1
    e = _elementary_symmetric(crit)
    coeffs = [0j] * (d + 1)
    # f'(z) = d * sum_k (-1)^k e_k z^(d-1-k)
    for k in range(d):
        p = d - k
        coeffs[p] = d * ((-1) ** k) * e[k] / p
    coeffs[0] = complex(a)
    coeffs[d] = 1 + 0j
    coeffs[d - 1] = 0j
    return MarkedPolynomial(d, crit, complex(a), tuple(coeffs))


def from_coefficients(coeffs) -> MarkedPolynomial:
    """Marked polynomial from ascending monic centered coefficients.

    The marking is the Newton-polished root set of f', sorted by
    (real, imag) so that the result is deterministic.
    """
    c = np.asarray(coeffs, dtype=complex)
    d = len(c) - 1
    if d < 2 or abs(c[-1] - 1) > 1e-12:
        raise ValueError("expected a monic polynomial of degree >= 2")
    dc = np.polynomial.polynomial.polyder(c)
    roots = np.polynomial.polynomial.polyroots(dc) if d > 2 else np.array([-dc[0] / dc[1]])
    d2c = np.polynomial.polynomial.polyder(dc)
    polished = []
    for r in roots:
        for _ in range(60):
            g = np.polynomial.polynomial.polyval(r, dc)
            h = np.polynomial.polynomial.polyval(r, d2c)
            if h == 0:
                break
            step = g / h
            r = r - step
            if abs(step) < 1e-15 * max(1.0, abs(r)):
                break
        polished.append(complex(r))
    polished.sort(key=lambda z: (round(z.real, 12), round(z.imag, 12)))
    coeff_t = tuple(complex(x) for x in c)
    coeff_t = coeff_t[: d - 1] + (0j, 1 + 0j)
    return MarkedPolynomial(d, tuple(polished), coeff_t[0], coeff_t)


def monomial(d: int) -> MarkedPolynomial:
    return build_from_marking([0j] * (d - 1), 0j)


def quadratic(c: complex) -> MarkedPolynomial:
    """``z^2 + c``."""
    return build_from_marking([0j], c)


# -- families -------------------------------------------------------------


@dataclass(frozen=True)
class FamilyChart:
    family_id: str
    param: tuple
    realization: MarkedPolynomial

    def relation_residuals(self) -> list[float]:
        return family_relation_residuals(self.family_id, self.realization)


def _as_params(param) -> tuple:
    if isinstance(param, (int, float, complex, np.number)):
        return (complex(param),)
    return tuple(complex(p) for p in param)


def airplane_constant(c1: complex, c2: complex) -> complex:
    return c1**4 - 2 * c1**3 * c2 - 2 * c1**2 * c2**2 + c1


def chart(family_id: str, param) -> FamilyChart:
    """Realize a point of one of the hard-coded families."""
    p = _as_params(param)
    if family_id == "S1Cubic":
        _arity(family_id, p, 1)
        (c,) = p
        f = build_from_marking([c, -c], c + 2 * c**3)
    elif family_id == "F1Quartic":
        _arity(family_id, p, 1)
        (c,) = p
        f = build_from_marking([-c / 2, -c / 2, c], -(8 * c + 3 * c**4) / 16)
    elif family_id == "F2Quartic":
        _arity(family_id, p, 1)
        (b,) = p
        if b == 0:
            raise ValueError("F2Quartic chart is undefined at b = 0")
        crit = [(-1 - b**3) / (2 * b), (1 - b**3) / (2 * b), b**2]
        a = (1 + 3 * b**6) * (1 - b**6) / (16 * b**4)
        f = build_from_marking(crit, a)
    elif family_id == "AirplaneQuartic":
        _arity(family_id, p, 2)
        c1, c2 = p
        f = build_from_marking([c1, c2, -c1 - c2], airplane_constant(c1, c2))
    elif family_id == "Peanut2Plus":
        _arity(family_id, p, 2)
        c1, c2 = p
        g = build_from_marking([c1, c2, -c1 - c2], 0j)
        f = build_from_marking([c1, c2, -c1 - c2], c1 - g.eval(c1))
    else:
        raise UnknownFamily(family_id)
    return FamilyChart(family_id, p, f)


def _arity(family_id, p, n):
    if len(p) != n:
        raise ValueError(f"{family_id} takes {n} parameter(s), got {len(p)}")


def family_relation_residuals(family_id: str, f: MarkedPolynomial) -> list[float]:
    """Residuals |f(c_j) - c_j| of the defining critical relations."""
    c = f.crit
    if family_id == "S1Cubic":
        idx = [0]
    elif family_id in ("F1Quartic", "F2Quartic"):
        idx = [0, 1]
    elif family_id in ("Peanut2Plus", "AirplaneQuartic"):
        idx = [0]
    else:
        raise UnknownFamily(family_id)
    return [abs(f.eval(c[j]) - c[j]) for j in idx]


def family_free_critical_indices(family_id: str) -> list[int]:
    return {
        "S1Cubic": [1],
        "F1Quartic": [2],
        "F2Quartic": [2],
        "Peanut2Plus": [1, 2],
        "AirplaneQuartic": [1, 2],
    }[family_id]


def family_marked_indices(family_id: str) -> list[int]:
    return {
        "S1Cubic": [0],
        "F1Quartic": [0, 1],
        "F2Quartic": [0, 1],
        "Peanut2Plus": [0],
        "AirplaneQuartic": [0],
    }[family_id]


def f2_boundary_parameter() -> float:
    """The F2 parameter where f(c_3) is a repelling fixed point."""
    return (2 + math.sqrt(7)) ** (1 / 3) / math.sqrt(3)


def s1_capture_center() -> complex:
    """Center of the S1 capture component where -c -> -2c -> c."""
    return complex(0, math.sqrt(3) / 2)


def cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1 / 3), x)


def principal_root(z: complex, n: int) -> complex:
    return cmath.exp(cmath.log(z) / n) if z != 0 else 0j
