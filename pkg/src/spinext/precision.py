"""Working-precision management.

All numerics run on mpmath's global context.  The toolkit uses two bit
budgets: a *working* precision for spectral decompositions, polynomial
arithmetic and verification (default 256 bits), and a larger *solve*
precision for the interpolation linear systems (default 512 bits).  Both
are plain numbers that callers may override per call; the helpers here
keep the conversions and temporary precision switches in one place.
"""

from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction
from typing import Iterator

import mpmath as mp

DEFAULT_BITS = 256
SOLVE_BITS = 512
MAX_SOLVE_BITS = 4096


@contextmanager
def bits(n: int) -> Iterator[None]:
    """Temporarily set the mpmath working precision to ``n`` bits."""
    old = mp.mp.prec
    mp.mp.prec = int(n)
    try:
        yield
    finally:
        mp.mp.prec = old


def to_mpf(x) -> mp.mpf:
    """Convert ``x`` to mpf without round-tripping through binary floats.

    Fractions convert exactly (numerator / denominator at current
    precision); strings go through mpmath's decimal parser; ints and mpfs
    pass through.  Plain floats are accepted and converted exactly (a float
    *is* a dyadic rational), which is what callers want for couplings that
    originated as decimal strings parsed elsewhere.
    """
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / mp.mpf(x.denominator)
    if isinstance(x, (mp.mpf, int, float, str)):
        return mp.mpf(x)
    # exact.ExactReal and friends
    to = getattr(x, "to_mpf", None)
    if to is not None:
        return to()
    raise TypeError(f"cannot convert {type(x).__name__} to mpf")


def eps_for(bits_: int | None = None) -> mp.mpf:
    """Unit roundoff for ``bits_`` (current precision when omitted)."""
    b = mp.mp.prec if bits_ is None else bits_
    return mp.mpf(2) ** (-b + 1)


def decimal_str(x, digits: int | None = None) -> str:
    """Serialize a real as a decimal string at full working accuracy.

    ``digits`` defaults to the decimal equivalent of the current binary
    precision plus a couple of guard digits, so round-tripping through
    :func:`to_mpf` at the same precision is faithful.
    """
    if digits is None:
        digits = int(mp.mp.prec * 0.30103) + 3
    return mp.nstr(mp.mpf(x), digits, strip_zeros=True)
