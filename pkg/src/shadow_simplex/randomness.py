"""Random draws: objective perturbation, cone weights, and dyadic bit mode.

Every draw is a dyadic rational j/2^k obtained by truncating one shared
1024-bit underlying uniform integer, so runs with different bit counts but
the same seed see bitwise-matching prefixes (the truncation map x ->
floor(x*2^k)/2^k applied to a common x).  "Continuous" mode is the k = 53
case, which makes it reproducible across platforms and exactly
representable, so all downstream arithmetic stays rational.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from fractions import Fraction

from . import linalg
from .rational import as_fractions, norm_sq

UNDERLYING_BITS = 1024
CONTINUOUS_BITS = 53

MODE_FLOAT = "float"
MODE_DYADIC = "dyadic"


class RandomnessError(ValueError):
    pass


@dataclass(frozen=True)
class RngConfig:
    seed: int
    mode: str = MODE_FLOAT
    bits_per_draw: int | None = None
    phi: Fraction | None = None

    def __post_init__(self) -> None:
        if self.mode not in (MODE_FLOAT, MODE_DYADIC):
            raise RandomnessError(f"unknown mode {self.mode!r}")
        if self.mode == MODE_DYADIC and self.bits_per_draw is not None:
            if self.bits_per_draw < 1:
                raise RandomnessError("bits_per_draw must be >= 1")

    def effective_bits(self) -> int | None:
        """Bits per draw, or None when dyadic mode must derive them per phi."""
        if self.mode == MODE_FLOAT:
            return CONTINUOUS_BITS
        return self.bits_per_draw

    def with_phi(self, phi: Fraction) -> "RngConfig":
        return replace(self, phi=phi)


@dataclass(frozen=True)
class PerturbedObjective:
    c: tuple[Fraction, ...]
    intervals: tuple[tuple[Fraction, Fraction], ...]


class DrawStream:
    """Single-owner stream of dyadic unit draws with bit accounting."""

    def __init__(self, seed: int) -> None:
        self._rng = random.Random(seed)
        self.bits_consumed = 0
        self.draws = 0

    def unit(self, bits: int) -> Fraction:
        if not 1 <= bits <= UNDERLYING_BITS:
            raise RandomnessError(f"bits must be in 1..{UNDERLYING_BITS}")
        x = self._rng.getrandbits(UNDERLYING_BITS)
        self.bits_consumed += bits
        self.draws += 1
        return Fraction(x >> (UNDERLYING_BITS - bits), 1 << bits)


def dyadic_unit_draw(stream: DrawStream, k: int) -> Fraction:
    """Uniform j/2^k on [0, 1), exact."""
    return stream.unit(k)


def bit_budget(m: int, n: int, phi, delta) -> int:
    """Bits per draw sufficient for the discrete mode to track continuous walks."""
    if m < 1 or n < 1:
        raise RandomnessError("m and n must be positive")
    phi = float(phi)
    delta = float(delta)
    if phi <= 0 or not 0 < delta <= 1:
        raise RandomnessError("need phi > 0 and delta in (0, 1]")
    return math.ceil(
        6 * n * math.log2(m) + 6 * math.log2(n) + 3 * math.log2(phi) + 3 * math.log2(1 / delta) + 12
    )


def delta_hat(n: int, phi) -> Fraction:
    """Schedule-driven stand-in for delta when it is unknown: min(1, 2 n^{3/2}/phi)."""
    from .rational import ratsqrt_ceil

    est = 2 * n * ratsqrt_ceil(Fraction(n)) / Fraction(phi)
    return min(Fraction(1), est)


def _draw_bits(cfg: RngConfig) -> int:
    k = cfg.effective_bits()
    if k is None:
        raise RandomnessError("dyadic mode needs bits_per_draw (or a derived budget)")
    return k


def perturb_objective(c0, cfg: RngConfig, stream: DrawStream) -> PerturbedObjective:
    """Componentwise uniform perturbation of a unit c0 inside length-1/phi intervals.

    Interval placement: [c0_i - 1/phi, c0_i] when c0_i sits above 1 - 1/phi,
    else [c0_i, c0_i + 1/phi]; both stay inside [-1, 1].
    """
    c0 = as_fractions(c0)
    n = len(c0)
    if cfg.phi is None:
        raise RandomnessError("cfg.phi is not set")
    phi = Fraction(cfg.phi)
    if float(phi) ** 2 < n * (1 - 1e-10):
        raise RandomnessError("phi must be at least sqrt(n)")
    if abs(float(norm_sq(c0)) - 1.0) > 3e-10:
        raise RandomnessError("c0 must be unit norm")
    k = _draw_bits(cfg)
    width = 1 / phi
    intervals = []
    c = []
    for i in range(n):
        lo = c0[i] - width if c0[i] > 1 - width else c0[i]
        intervals.append((lo, lo + width))
        c.append(lo + width * stream.unit(k))
    return PerturbedObjective(c=tuple(c), intervals=tuple(intervals))


def draw_lambda(n: int, cfg: RngConfig, stream: DrawStream) -> list[Fraction]:
    """n independent uniforms on (0, 1] (1 minus a [0,1) dyadic draw)."""
    k = _draw_bits(cfg)
    return [1 - stream.unit(k) for _ in range(n)]


def cone_objective(tight_rows, lam) -> list[Fraction]:
    """w = -sum lambda_k u_k: the start vertex minimizes w^T x over the polytope."""
    rows = [as_fractions(r) for r in tight_rows]
    lam = as_fractions(lam)
    n = len(rows)
    if len(lam) != n:
        raise RandomnessError("lambda length mismatch")
    if any(not 0 < l <= 1 for l in lam):
        raise RandomnessError("lambda coordinates must lie in (0, 1]")
    for r in rows:
        if abs(float(norm_sq(r)) - 1.0) > 3e-10:
            raise RandomnessError("tight rows must be unit norm")
    if len(linalg.independent_rows(rows)) < n:
        raise RandomnessError("tight rows are linearly dependent")
    return [-sum((l * r[j] for l, r in zip(lam, rows)), Fraction(0)) for j in range(len(rows[0]))]
