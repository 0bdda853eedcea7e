"""Exact rational arithmetic backbone.

Every quantity in this library is an exact rational; no floating point
enters any decision anywhere.  gmpy2.mpq is used when available (it is
roughly an order of magnitude faster than fractions.Fraction on the
segment counts this library reaches); otherwise fractions.Fraction.

Serialized form is always the string "p/q" in lowest terms with q > 0,
including "0/1" and "1/1", so that round-trips are bit-exact.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq as _mpq

    def rat(a, b=None):
        if b is None:
            if isinstance(b := getattr(a, "denominator", None), int) and not isinstance(a, int):
                return _mpq(a.numerator, b)
            return _mpq(a)
        return _mpq(a, b)

    RAT_BACKEND = "gmpy2"
except ImportError:  # pragma: no cover
    from fractions import Fraction as _mpq

    def rat(a, b=None):
        return _mpq(a) if b is None else _mpq(a, b)

    RAT_BACKEND = "fractions"


Q = rat  # short alias used heavily in tests and demos

ZERO = rat(0)
ONE = rat(1)
HALF = rat(1, 2)


def rat_from_str(s: str):
    """Parse "p/q" or "p" into an exact rational."""
    s = s.strip()
    if "/" in s:
        p, q = s.split("/", 1)
        return rat(int(p), int(q))
    return rat(int(s))


def rat_to_str(x) -> str:
    """Canonical "p/q" string, denominator always present and positive."""
    return f"{x.numerator}/{x.denominator}"


def clamp01(x):
    if x < ZERO:
        return ZERO
    if x > ONE:
        return ONE
    return x


def rat_min(*xs):
    m = xs[0]
    for x in xs[1:]:
        if x < m:
            m = x
    return m


def rat_max(*xs):
    m = xs[0]
    for x in xs[1:]:
        if x > m:
            m = x
    return m


def dyadic_floor(x, k: int):
    """Largest multiple of 2**-k that is <= x."""
    scale = 1 << k
    return rat((x.numerator * scale) // x.denominator, scale)
