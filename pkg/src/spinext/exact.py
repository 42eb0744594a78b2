"""Exact scalar values: rational multiples of integer square roots.

Network files may specify coupling weights exactly — ``"1/2"``,
``"sqrt(2)"``, ``"3/4*sqrt(5)"``, ``"sqrt(2)/2"`` or decimal strings —
so that entries like the sqrt(2) couplings of reduced blocks are not
polluted by binary rounding.  The value model is ``rational * sqrt(radicand)``
with the radicand squarefree-reduced enough for equality testing.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

_DECIMAL = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")
_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")
_SQRT = re.compile(r"^sqrt\((\d+)\)$")


def _squarefree_split(k: int) -> tuple[int, int]:
    """Return (outer, rad) with k = outer**2 * rad and rad squarefree."""
    outer, rad = 1, 1
    for p in range(2, math.isqrt(k) + 1):
        while k % (p * p) == 0:
            outer *= p
            k //= p * p
        if k % p == 0:
            rad *= p
            k //= p
    return outer, rad * k


@dataclass(frozen=True)
class ExactReal:
    """``rational * sqrt(radicand)`` with a squarefree radicand."""

    rational: Fraction
    radicand: int = 1

    def __post_init__(self):
        if self.radicand < 0:
            raise ValueError("radicand must be nonnegative")

    @staticmethod
    def make(rational: Fraction, radicand: int = 1) -> "ExactReal":
        if radicand == 0 or rational == 0:
            return ExactReal(Fraction(0), 1)
        outer, rad = _squarefree_split(radicand)
        return ExactReal(rational * outer, rad)

    def to_mpf(self) -> mp.mpf:
        r = mp.mpf(self.rational.numerator) / mp.mpf(self.rational.denominator)
        if self.radicand != 1:
            r *= mp.sqrt(mp.mpf(self.radicand))
        return r

    def __neg__(self) -> "ExactReal":
        return ExactReal(-self.rational, self.radicand)

    def is_zero(self) -> bool:
        return self.rational == 0

    def __str__(self) -> str:
        if self.radicand == 1:
            return str(self.rational)
        if self.rational == 1:
            return f"sqrt({self.radicand})"
        return f"{self.rational}*sqrt({self.radicand})"


ZERO = ExactReal(Fraction(0), 1)
ONE = ExactReal(Fraction(1), 1)


def parse_exact(value) -> ExactReal:
    """Parse a number or string into an :class:`ExactReal`.

    Accepted string forms: optional sign, then a product of at most one
    rational factor and at most one ``sqrt(k)`` factor joined by ``*``,
    optionally followed by ``/m`` for an integer divisor — e.g. ``"2"``,
    ``"-1"``, ``"3/4"``, ``"1.201"``, ``"sqrt(2)"``, ``"sqrt(2)/2"``,
    ``"3/4*sqrt(5)"``, ``"sqrt(7)*2/5"``.  Numbers (int, float, Fraction)
    convert exactly.
    """
    if isinstance(value, ExactReal):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a weight")
    if isinstance(value, int):
        return ExactReal(Fraction(value))
    if isinstance(value, Fraction):
        return ExactReal(value)
    if isinstance(value, float):
        return ExactReal(Fraction(value))  # exact: floats are dyadic
    if not isinstance(value, str):
        raise TypeError(f"cannot parse weight of type {type(value).__name__}")

    s = value.strip().replace(" ", "").replace("·", "*").replace("×", "*")
    sign = 1
    while s and s[0] in "+-":
        if s[0] == "-":
            sign = -sign
        s = s[1:]
    if not s:
        raise ValueError(f"empty weight string {value!r}")

    # trailing /m divisor applied to whatever precedes it, e.g. sqrt(2)/2
    rational = Fraction(sign)
    radicand = 1
    for factor in s.split("*"):
        if not factor:
            raise ValueError(f"malformed weight {value!r}")
        msq = _SQRT.match(factor)
        tail = None
        if msq is None and "/" in factor and factor.startswith("sqrt"):
            head, tail = factor.rsplit("/", 1)
            msq = _SQRT.match(head)
        if msq is not None:
            if radicand != 1:
                raise ValueError(f"more than one sqrt factor in {value!r}")
            radicand = int(msq.group(1))
            if tail is not None:
                rational /= int(tail)
        elif _RATIONAL.match(factor):
            rational *= Fraction(factor)
        elif _DECIMAL.match(factor):
            rational *= Fraction(factor)
        else:
            raise ValueError(f"malformed weight {value!r}")
    return ExactReal.make(rational, radicand)
