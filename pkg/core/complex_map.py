"""
Polynomial maps on the Riemann sphere.
A map is stored by its coefficients c_0..c_d (h(z) = sum c_k z^k); infinity is the complex
value with an infinite part and is always a superattracting fixed point.
"""

import logging
import re
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from config import DEGREE_CAP
from core.errors import DegreeCapExceeded, InvalidMapSpec

logger = logging.getLogger(__name__)

INFINITY = complex(float("inf"), 0.0)

_SHORTHAND = re.compile(r"^[0-9z.ij+\-*^()e]+$")


def is_infinity(z) -> bool:
    return not np.isfinite(z)


@dataclass(frozen=True)
class SpherePoint:
    """A point of C u {inf}."""

    value: complex

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(INFINITY)

    @property
    def is_infinity(self) -> bool:
        return is_infinity(self.value)

    def to_json(self):
        if self.is_infinity:
            return "inf"
        return [float(self.value.real), float(self.value.imag)]

    def __str__(self):
        if self.is_infinity:
            return "inf"
        real = round(self.value.real, 12) + 0.0
        imag = round(self.value.imag, 12) + 0.0
        return f"{real:.10g}{imag:+.10g}i"


def chordal_distance(z, w):
    """d(z, w) = 2|z - w| / sqrt((1 + |z|^2)(1 + |w|^2)), with d(z, inf) = 2 / sqrt(1 + |z|^2).

    Works elementwise on arrays; returns a float for scalar input.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    z_inf = ~np.isfinite(z)
    w_inf = ~np.isfinite(w)
    z_fin = np.where(z_inf, 0, z)
    w_fin = np.where(w_inf, 0, w)
    scale_z = np.hypot(1.0, np.abs(z_fin))
    scale_w = np.hypot(1.0, np.abs(w_fin))
    finite = 2.0 * np.abs(z_fin - w_fin) / (scale_z * scale_w)
    result = np.where(z_inf & w_inf, 0.0, np.where(z_inf, 2.0 / scale_w, np.where(w_inf, 2.0 / scale_z, finite)))
    if result.ndim == 0:
        return float(result)
    return result


@dataclass(frozen=True)
class ComplexMapSpec:
    """h(z) = sum c_k z^k, degree at least 2 with a nonzero leading coefficient."""

    coefficients: Tuple[complex, ...]

    def __post_init__(self):
        coefficients = tuple(complex(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coefficients)
        if not coefficients or coefficients[-1] == 0:
            raise InvalidMapSpec("leading coefficient must be nonzero")
        if len(coefficients) - 1 < 2:
            raise InvalidMapSpec(f"degree {len(coefficients) - 1} is below 2")
        if not all(np.isfinite(c) for c in coefficients):
            raise InvalidMapSpec("coefficients must be finite")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coefficients, dtype=complex)

    @property
    def escape_radius(self) -> float:
        """R = max(2, 2 max_k |c_k / c_d|, 2 / |c_d|); beyond R the orbit runs off to infinity.

        The last term only matters for a small leading coefficient: with h(z) = 0.1 z^2 an orbit at
        |z| = 9.5 still falls back to 0, and 2 / |c_d| = 20 keeps it on the finite side.
        """
        lead = self.coefficients[-1]
        ratios = [abs(c / lead) for c in self.coefficients[:-1]]
        return max(2.0, 2.0 * max(ratios), 2.0 / abs(lead))

    def evaluate(self, z):
        """h(z), elementwise on arrays"""
        return P.polyval(z, self.array)

    def derivative(self, z):
        """h'(z), elementwise on arrays"""
        return P.polyval(z, P.polyder(self.array))

    def label(self) -> str:
        """Readable form with the highest power first, for logs."""
        terms = []
        for k, c in enumerate(self.coefficients):
            if c != 0:
                terms.append(f"({c.real:g}{c.imag:+g}i)z^{k}")
        return " + ".join(reversed(terms))


def iterate_polynomial(spec: ComplexMapSpec, z, n: int):
    """h^n(z) by plain iteration"""
    for _ in range(n):
        z = spec.evaluate(z)
    return z


def orbit_derivative(spec: ComplexMapSpec, z, n: int):
    """(h^n(z), (h^n)'(z)) by the chain rule along the orbit."""
    value = np.asarray(z, dtype=complex)
    slope = np.ones_like(value)
    for _ in range(n):
        slope = slope * spec.derivative(value)
        value = spec.evaluate(value)
    return value, slope


def compose_power(spec: ComplexMapSpec, n: int, cap: int = DEGREE_CAP) -> np.ndarray:
    """Ascending coefficients of h^n, built by Horner's rule on polynomials."""
    degree = spec.degree ** n
    if degree > cap:
        raise DegreeCapExceeded(degree, cap)
    power = np.array([0, 1], dtype=complex)
    for _ in range(n):
        composed = np.array([spec.coefficients[-1]], dtype=complex)
        for c in reversed(spec.coefficients[:-1]):
            composed = P.polyadd(P.polymul(composed, power), [c])
        power = composed
    logger.debug("h^%d has degree %d", n, len(power) - 1)
    return power


def fixed_point_polynomial(spec: ComplexMapSpec, n: int, cap: int = DEGREE_CAP) -> np.ndarray:
    """Coefficients of h^n(z) - z."""
    return P.polysub(compose_power(spec, n, cap), [0, 1])


# =============================================================================
# PARSING
# =============================================================================

def _parse_complex(text: str) -> complex:
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    text = text.replace("i", "j")
    if text in ("", "+"):
        return 1
    if text == "-":
        return -1
    try:
        return complex(text)
    except ValueError:
        raise InvalidMapSpec(f"cannot read {text!r} as a complex number")


def _split_terms(text: str):
    """Split at top-level signs, leaving exponents and parentheses alone"""
    terms, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start and text[i - 1] not in "e^":
            terms.append(text[start:i])
            start = i
    terms.append(text[start:])
    return [t for t in terms if t]


def _parse_polynomial(text: str) -> ComplexMapSpec:
    text = text.replace("**", "^")
    powers = {}
    for term in _split_terms(text):
        if "z" in term:
            coefficient, _, power_text = term.partition("z")
            coefficient = coefficient.rstrip("*")
            if power_text == "":
                power = 1
            elif power_text.startswith("^") and power_text[1:].isdigit():
                power = int(power_text[1:])
            else:
                raise InvalidMapSpec(f"cannot read the power in {term!r}")
        else:
            coefficient, power = term, 0
        if coefficient in ("", "+", "-"):
            value = -1 if coefficient == "-" else 1
        elif coefficient[0] in "+-" and coefficient[1:].startswith("("):
            value = _parse_complex(coefficient[1:]) * (-1 if coefficient[0] == "-" else 1)
        else:
            value = _parse_complex(coefficient)
        powers[power] = powers.get(power, 0) + value
    if not powers:
        raise InvalidMapSpec("empty polynomial")
    coefficients = [0j] * (max(powers) + 1)
    for power, value in powers.items():
        coefficients[power] = complex(value)
    while len(coefficients) > 1 and coefficients[-1] == 0:
        coefficients.pop()
    return ComplexMapSpec(tuple(coefficients))


def parse_map(text: str) -> ComplexMapSpec:
    """Read "z^2-1" style shorthand or a coefficient list "c0,c1,...,cd" with "a+bi" entries."""
    compact = re.sub(r"\s+", "", text or "")
    if not compact:
        raise InvalidMapSpec("empty map specification")
    if "z" in compact:
        if not _SHORTHAND.match(compact):
            raise InvalidMapSpec(f"unexpected characters in {text!r}")
        spec = _parse_polynomial(compact)
    else:
        spec = ComplexMapSpec(tuple(_parse_complex(part) for part in compact.split(",")))
    logger.debug("parsed %r as degree-%d map %s", text, spec.degree, spec.label())
    return spec
