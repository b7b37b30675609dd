"""Exact correlations inside a finite tower.

The map is realised as "move up one level" inside tower ``K``; only the
image of the top level is unknown.  A correlation at shift ``n`` therefore
misses at most the mass of the top ``n`` levels, which gives the rigorous
error bound ``n * w_K`` carried by every report.

Indicators are packed into Python ints (bit ``l`` is level ``l``), so a
correlation is one shift, one AND and one popcount.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .construction import Tower
from .errors import ParameterError


@dataclass(frozen=True)
class LevelSet:
    """A union of levels of tower ``k``."""

    k: int
    members: frozenset[int]

    def __init__(self, k: int, members: Iterable[int]):
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "members", frozenset(int(m) for m in members))

    @classmethod
    def full(cls, tower: Tower, k: int) -> "LevelSet":
        return cls(k, range(tower[k].h))

    def measure(self, tower: Tower) -> Fraction:
        self._check(tower)
        return len(self.members) * tower[self.k].w

    def _check(self, tower: Tower) -> None:
        if not 0 <= self.k <= tower.K:
            raise ParameterError(f"level set stage {self.k} outside 0..{tower.K}")
        h = tower[self.k].h
        if any(not 0 <= m < h for m in self.members):
            raise ParameterError(f"level index outside [0, {h}) at stage {self.k}")


def _bits(members: Iterable[int]) -> int:
    x = 0
    for m in members:
        x |= 1 << m
    return x


def lift_level_set(A: LevelSet, K: int, tower: Tower) -> int:
    """Bitset over ``[0, h_K)`` of the tower-``K`` levels lying inside ``A``.

    Each stage copies the previous indicator into every column; spacer
    levels stay empty.
    """
    A._check(tower)
    if K < A.k or K > tower.K:
        raise ParameterError(f"cannot lift a stage-{A.k} set to stage {K}")
    bits = _bits(A.members)
    for k in range(A.k + 1, K + 1):
        lifted = 0
        for c in tower[k].column_offsets:
            lifted |= bits << c
        bits = lifted
    return bits


def lift_positions(A: LevelSet, K: int, tower: Tower) -> list[int]:
    bits = lift_level_set(A, K, tower)
    return [l for l in range(tower[K].h) if bits >> l & 1]


@dataclass(frozen=True)
class CorrelationReport:
    """``value`` approximates the measure of points of ``B`` that land in ``A`` after ``n`` steps.

    ``|true - value| <= error_bound``.  ``normalized`` divides by
    ``mu(A) mu(B)`` after rescaling all measures to probabilities with the
    stage-``K`` mass ``mass``.
    """

    n: int
    K: int
    value: Fraction
    error_bound: Fraction
    mu_A: Fraction
    mu_B: Fraction
    mass: Fraction

    @property
    def normalized(self) -> Fraction | None:
        if self.mu_A == 0 or self.mu_B == 0:
            return None
        return self.value * self.mass / (self.mu_A * self.mu_B)

    @property
    def normalized_lower(self) -> Fraction | None:
        """``normalized`` with the error bound subtracted from ``value`` first."""
        if self.mu_A == 0 or self.mu_B == 0:
            return None
        return (self.value - self.error_bound) * self.mass / (self.mu_A * self.mu_B)


def _correlation_bits(a_bits: int, b_bits: int, n: int) -> int:
    return ((a_bits >> n) & b_bits).bit_count()


def correlation(A: LevelSet, B: LevelSet, n: int, K: int, tower: Tower) -> CorrelationReport:
    """Count levels ``l`` of tower ``K`` with ``l`` in ``B`` and ``l + n`` in ``A``."""
    h_K = tower[K].h if 0 <= K <= tower.K else None
    if h_K is None:
        raise ParameterError(f"stage {K} outside 0..{tower.K}")
    if n < 0:
        raise ParameterError("shift must be >= 0")
    if n >= h_K:
        raise ParameterError(f"shift exceeds tower height: n = {n} >= h_K = {h_K}")
    w = tower[K].w
    count = _correlation_bits(lift_level_set(A, K, tower), lift_level_set(B, K, tower), n)
    return CorrelationReport(
        n=n,
        K=K,
        value=count * w,
        error_bound=n * w,
        mu_A=A.measure(tower),
        mu_B=B.measure(tower),
        mass=tower[K].mass,
    )


@dataclass(frozen=True)
class RigidityHit:
    n: int
    overlap: Fraction  # value / mu(A)
    lower: Fraction  # (value - error_bound) / mu(A)


def rigidity_scan(A: LevelSet, shifts: Sequence[int], K: int, tower: Tower, alpha_threshold) -> list[RigidityHit]:
    """Shifts ``n`` with ``mu(T^n A cap A) - n w_K >= alpha_threshold * mu(A)``.

    Conservative: a shift is flagged only when the overlap clears the
    threshold after subtracting the full error bound.
    """
    thr = Fraction(alpha_threshold)
    mu = A.measure(tower)
    if mu == 0:
        return []
    bits = lift_level_set(A, K, tower)
    h_K, w = tower[K].h, tower[K].w
    hits = []
    for n in shifts:
        if not 0 <= n < h_K:
            raise ParameterError(f"shift exceeds tower height: n = {n} >= h_K = {h_K}")
        value = _correlation_bits(bits, bits, n) * w
        if value - n * w >= thr * mu:
            hits.append(RigidityHit(n, value / mu, (value - n * w) / mu))
    return hits


@dataclass(frozen=True)
class CesaroScore:
    score: Fraction
    error_bound: Fraction
    N: int
    K: int


def cesaro_score(A: LevelSet, B: LevelSet, N: int, K: int, tower: Tower) -> CesaroScore:
    """Average over ``n = 1..N`` of ``|P(T^n A cap B) - P(A) P(B)|``.

    ``P`` is the measure rescaled by the stage-``K`` mass, so the score of a
    mixing-like system tends to 0.  The accumulated error bound is
    ``sum(n) * w_K / (N * mass)``.
    """
    h_K = tower[K].h
    if not 1 <= N < h_K:
        raise ParameterError(f"horizon N = {N} must satisfy 1 <= N < h_K = {h_K}")
    w, mass = tower[K].w, tower[K].mass
    pa, pb = A.measure(tower) / mass, B.measure(tower) / mass
    if pa == 0 or pb == 0:
        return CesaroScore(Fraction(0), Fraction(0), N, K)
    a_bits, b_bits = lift_level_set(A, K, tower), lift_level_set(B, K, tower)
    target = pa * pb
    total = Fraction(0)
    for n in range(1, N + 1):
        total += abs(_correlation_bits(a_bits, b_bits, n) * w / mass - target)
    err = Fraction(N * (N + 1), 2) * w / (N * mass)
    return CesaroScore(total / N, err, N, K)


def write_correlations_csv(reports: Sequence[CorrelationReport], path) -> None:
    """Exact value and error columns plus a display-only 12-digit normalised value."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "value_num", "value_den", "err_num", "err_den", "normalized_display"])
        for r in reports:
            norm = r.normalized
            shown = "" if norm is None else f"{float(norm):.12f}"
            w.writerow([r.n, r.value.numerator, r.value.denominator,
                        r.error_bound.numerator, r.error_bound.denominator, shown])
