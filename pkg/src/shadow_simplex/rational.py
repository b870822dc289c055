"""Small exact-arithmetic helpers shared across the package.

Everything here works on `fractions.Fraction` / Python ints so downstream
code can rely on zero rounding.  Square roots are irrational in general;
where a near-unit or upper/lower rational stand-in is good enough we round
an integer square root at `SQRT_BITS` of precision (relative error below
2**-60, far inside every tolerance in the test suite).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Sequence

SQRT_BITS = 64


def ratsqrt_floor(v: Fraction, bits: int = SQRT_BITS) -> Fraction:
    """Largest dyadic-denominator rational t with t <= sqrt(v)."""
    if v < 0:
        raise ValueError("negative radicand")
    p, q = v.numerator, v.denominator
    # sqrt(p/q) = sqrt(p*q)/q
    return Fraction(isqrt((p * q) << (2 * bits)), q << bits)


def ratsqrt_ceil(v: Fraction, bits: int = SQRT_BITS) -> Fraction:
    """Rational upper bound on sqrt(v), tight to ~2**-bits relative."""
    if v < 0:
        raise ValueError("negative radicand")
    p, q = v.numerator, v.denominator
    return Fraction(isqrt((p * q) << (2 * bits)) + 1, q << bits)


def norm_sq(vec: Sequence[Fraction]) -> Fraction:
    return sum((x * x for x in vec), Fraction(0))


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def unit_scale(vec: Sequence[Fraction]) -> Fraction:
    """Rational t ~ 1/||vec|| with ||t*vec|| <= 1 (floor rounding).

    The floor direction is deliberate: scaled rows never exceed unit norm,
    which keeps perturbed objectives inside [-1,1]^n and bounding boxes
    strict.  Inexact norms produce power-of-two denominators so scale
    factors from different rows and columns share structure instead of
    compounding through lcm clearing.
    """
    s = norm_sq(vec)
    if s == 0:
        raise ValueError("cannot scale a zero vector")
    return unit_scale_pq(s.numerator, s.denominator)


def unit_scale_pq(p: int, q: int) -> Fraction:
    """unit_scale for a squared norm given as p/q (p, q positive ints)."""
    rp, rq = isqrt(p), isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rq, rp)
    # precision scaled to the magnitude of the norm keeps the relative
    # error near 2**-SQRT_BITS for vectors of any size; power-of-two
    # denominators share structure instead of compounding through lcm
    e = max((p.bit_length() - q.bit_length()) // 2 + 1, 0)
    k = SQRT_BITS + e
    return Fraction(isqrt((q << (2 * k)) // p), 1 << k)


def primitive_int_row(row: Sequence[Fraction]) -> tuple[list[int], Fraction]:
    """Scale a rational row by a positive factor into coprime integers.

    Returns (integer row, factor) with int_row == factor * row.
    """
    lcm = 1
    for x in row:
        lcm = lcm * x.denominator // gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in row]
    g = 0
    for a in ints:
        g = gcd(g, a)
    if g > 1:
        ints = [a // g for a in ints]
    else:
        g = 1
    return ints, Fraction(lcm, g)


def common_denominator(vec: Sequence[Fraction]) -> tuple[list[int], int]:
    """Represent a rational vector as (integer numerators, shared den > 0)."""
    den = 1
    for x in vec:
        den = den * x.denominator // gcd(den, x.denominator)
    return [int(x * den) for x in vec], den


def format_fraction(x: Fraction) -> str:
    """Canonical reduced text form: 'p' or 'p/q'."""
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(token: str) -> Fraction:
    return Fraction(token)


def as_fractions(vec: Iterable) -> list[Fraction]:
    return [x if isinstance(x, Fraction) else Fraction(x) for x in vec]
