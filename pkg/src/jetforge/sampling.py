"""Seeded sampling: a SplitMix64 generator, random rationals and polynomials,
and point samplers that keep guarded radicals rational."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Callable, Sequence

from .errors import AllSamplesSingular, DomainError
from .symcore import Expr, Poly, Symbol

PRNG_NAME = "splitmix64/v1"
MASK = (1 << 64) - 1
MAX_RETRIES = 32


class SplitMix64:
    """Steele, Lea and Flood's SplitMix64; identical output on every platform."""

    def __init__(self, seed: int = 0):
        self.state = seed & MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] (rejection sampling, no modulo bias)."""
        span = hi - lo + 1
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            r = self.next_u64()
            if r < limit:
                return lo + r % span

    def rational(self, num_range: int = 20, den_max: int = 7) -> Fraction:
        return Fraction(self.randint(-num_range, num_range), self.randint(1, den_max))

    def nonzero_rational(self, num_range: int = 20, den_max: int = 7) -> Fraction:
        while True:
            r = self.rational(num_range, den_max)
            if r:
                return r

    def choice(self, seq: Sequence):
        return seq[self.randint(0, len(seq) - 1)]

    def spawn(self) -> "SplitMix64":
        """Independent child stream."""
        return SplitMix64(self.next_u64())


def random_point(rng: SplitMix64, symbols: Sequence[Symbol]) -> dict:
    return {s: rng.rational() for s in symbols}


def random_polynomial(rng: SplitMix64, symbols: Sequence[Symbol], degree: int, density: float = 0.6, small: int = 3) -> Expr:
    """Random polynomial of total degree <= degree with small integer coefficients."""
    terms = {}
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(len(symbols)), d):
            if rng.randint(0, 999) >= density * 1000:
                continue
            c = rng.randint(-small, small)
            if c == 0:
                continue
            mono = {}
            for i in combo:
                mono[symbols[i]] = mono.get(symbols[i], 0) + 1
            key = tuple(sorted(mono.items()))
            terms[key] = Fraction(c)
    return Expr.from_poly(Poly(terms))


def _perfect_square_fix(rng: SplitMix64, base: Poly, var: Symbol, point: dict):
    """Choose a value of ``var`` making ``base`` a rational square at ``point``.

    ``base`` is quadratic in ``var`` with the other symbols fixed, so
    {B(v) = w^2} is a conic; from one rational point on it every other is
    reached by a line of rational slope.
    """
    fixed = {s: Expr.const(v) for s, v in point.items() if s != var}
    b = Expr.from_poly(base).subs(fixed).as_poly()
    if b.degree_in(var) != 2:
        return None
    a2 = b.diff(var).diff(var).const_value() / 2
    for v0 in range(-8, 9):
        val = b.evaluate({var: Fraction(v0)})
        if val <= 0:
            continue
        s = _rational_sqrt(val)
        if s is None:
            continue
        b1 = b.diff(var).evaluate({var: Fraction(v0)})
        for _ in range(MAX_RETRIES):
            t = rng.rational(10, 5)
            if a2 - t * t == 0:
                continue
            return Fraction(v0) + (2 * s * t - b1) / (a2 - t * t)
    return None


def _rational_sqrt(q: Fraction):
    from math import isqrt

    if q < 0:
        return None
    a, b = isqrt(q.numerator), isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def radical_aware_point(rng: SplitMix64, symbols: Sequence[Symbol], exprs: Sequence[Expr]) -> dict:
    """Random point at which every square-root radical of ``exprs`` is rational.

    Bases are handled one at a time; each claims a symbol in which it is
    quadratic and which no earlier base has claimed.
    """
    point = random_point(rng, symbols)
    bases = []
    for e in exprs:
        for atom, q in e.radical_bases().items():
            if q == 2 and atom.key[0] == 1 and atom.poly not in bases:
                bases.append(atom.poly)
    claimed = set()
    for base in bases:
        for var in sorted(base.symbols()):
            if var in claimed or var not in point:
                continue
            v = _perfect_square_fix(rng, base, var, point)
            if v is not None:
                point[var] = v
                claimed.add(var)
                break
    return point


def sample_points(
    rng: SplitMix64,
    symbols: Sequence[Symbol],
    count: int,
    accept: Callable[[dict], bool] = lambda p: True,
    exprs: Sequence[Expr] = (),
) -> list:
    """``count`` points passing ``accept``; DomainError inside accept means reject."""
    out = []
    for _ in range(count):
        for _attempt in range(MAX_RETRIES):
            p = radical_aware_point(rng, symbols, exprs) if exprs else random_point(rng, symbols)
            try:
                if accept(p):
                    out.append(p)
                    break
            except (DomainError, ZeroDivisionError):
                continue
        else:
            raise AllSamplesSingular(f"no admissible sample point after {MAX_RETRIES} attempts")
    return out
