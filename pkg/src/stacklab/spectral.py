"""Eigenvalue candidates as exact chains of circle arcs.

For a frequency sequence ``n`` and ``0 < eps < 1/2`` the set

    B(n, eps) = {alpha in [0, 1) : ||n alpha|| < eps}

is the union of the ``n`` open arcs ``(j - eps)/n .. (j + eps)/n``.  Any
eigenvalue ``exp(2 pi i alpha)`` must eventually lie in ``B(n_k, eps)`` for
the return-time sequence of the tower, so intersecting these families
stage by stage bounds the candidates.  When ``n_{k+1}/n_k < M`` and
``eps < 1/(4M)`` every arc meets at most one arc of the next family and the
number of survivors never exceeds the number of starting arcs.

Arc endpoints are stored as integer numerator/denominator pairs and
compared by cross multiplication; no floating point is involved.
Coordinates are lifted to the real line: the arc around 0 has a negative
left endpoint and no arc ever crosses 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import NamedTuple, Sequence

from .errors import ParameterError

RETURN_TIMES = "return"
FREQUENCY = "frequency"


def as_fraction(value) -> Fraction:
    if isinstance(value, float):
        raise ParameterError("floats are not accepted; pass an exact rational")
    if isinstance(value, str):
        return parse_rational(value)
    return Fraction(value)


def parse_rational(text: str) -> Fraction:
    """Parse ``"num/den"`` or an integer string; decimals are refused."""
    s = text.strip()
    parts = s.split("/")
    try:
        if len(parts) == 1:
            return Fraction(int(parts[0]))
        if len(parts) == 2:
            return Fraction(int(parts[0]), int(parts[1]))
    except (ValueError, ZeroDivisionError):
        pass
    raise ParameterError(f"eps must be an exact rational num/den, got {text!r}")


def circle_norm(x) -> Fraction:
    """Distance from ``x`` to the nearest integer."""
    x = as_fraction(x)
    f = x - floor(x)
    return min(f, 1 - f)


@dataclass(frozen=True)
class CircleFrequency:
    """A point ``alpha`` in ``[0, 1)`` standing for ``exp(2 pi i alpha)``."""

    alpha: Fraction

    def __post_init__(self):
        a = as_fraction(self.alpha)
        if not 0 <= a < 1:
            raise ParameterError(f"alpha must lie in [0, 1), got {a}")
        object.__setattr__(self, "alpha", a)


def _alpha(value) -> Fraction:
    if isinstance(value, CircleFrequency):
        return value.alpha
    return as_fraction(value)


def defect_sequence(alpha, n_seq: Sequence[int]) -> tuple[Fraction, ...]:
    """``||n_k alpha||`` for every term of ``n_seq``."""
    a = _alpha(alpha)
    return tuple(circle_norm(n * a) for n in n_seq)


def passes(alpha, n_seq: Sequence[int], eps) -> bool:
    """True when every defect along ``n_seq`` is strictly below ``eps``."""
    eps = as_fraction(eps)
    return all(d < eps for d in defect_sequence(alpha, n_seq))


def strongest_eps(alpha, n_seq: Sequence[int]) -> Fraction:
    """Largest defect along ``n_seq``: ``alpha`` survives exactly the ``eps`` above it."""
    return max(defect_sequence(alpha, n_seq))


class Arc(NamedTuple):
    """Open interval ``(lo_num/lo_den, hi_num/hi_den)`` in lifted coordinates.

    ``j`` is the index of the ``B(n_k, eps)`` arc this piece came from and
    ``parent`` the position of its parent in the previous stage (-1 at the
    first stage).
    """

    lo_num: int
    lo_den: int
    hi_num: int
    hi_den: int
    j: int
    parent: int

    @property
    def lo(self) -> Fraction:
        return Fraction(self.lo_num, self.lo_den)

    @property
    def hi(self) -> Fraction:
        return Fraction(self.hi_num, self.hi_den)

    @property
    def center(self) -> Fraction:
        """Midpoint reduced into ``[0, 1)``."""
        c = (self.lo + self.hi) / 2
        return c - floor(c)

    @property
    def half_width(self) -> Fraction:
        return (self.hi - self.lo) / 2

    @property
    def contains_zero(self) -> bool:
        return self.lo_num < 0 < self.hi_num

    def contains(self, alpha) -> bool:
        """Membership of a point of ``[0, 1)`` (checked at ``alpha`` and ``alpha - 1``)."""
        a = _alpha(alpha)
        for x in (a, a - 1):
            if self.lo < x < self.hi:
                return True
        return False


@dataclass(frozen=True)
class CandidateChain:
    """Arcs surviving the intersection of ``B(n_k, eps)`` for ``k = k0..end``.

    ``stages[i]`` holds the arcs alive after intersecting the families for
    ``n_seq[k0] .. n_seq[k0 + i]``.
    """

    n_seq: tuple[int, ...]
    eps: Fraction
    L: int
    k0: int
    stages: tuple[tuple[Arc, ...], ...]

    @property
    def survivors(self) -> tuple[Arc, ...]:
        return self.stages[-1]

    @property
    def window(self) -> tuple[int, ...]:
        return self.n_seq[self.k0 :]

    def nontrivial(self, stage: int = -1) -> tuple[Arc, ...]:
        """Surviving arcs other than the one around 0."""
        return tuple(a for a in self.stages[stage] if not a.contains_zero)

    def nontrivial_counts(self) -> tuple[int, ...]:
        """Number of nontrivial survivors after each stage of the window."""
        return tuple(sum(1 for a in arcs if not a.contains_zero) for arcs in self.stages)

    def contains(self, alpha) -> bool:
        return any(arc.contains(alpha) for arc in self.survivors)


def _children(arc: Arc, pos: int, n: int, a: int, b: int) -> list[Arc]:
    # arcs of B(n, a/b) meeting the open interval of ``arc``: centre j/n in (lo - eps/n, hi + eps/n)
    ln, ld, hn, hd = arc.lo_num, arc.lo_den, arc.hi_num, arc.hi_den
    j_min = (n * ln * b - a * ld) // (ld * b) + 1
    j_max = -((-(n * hn * b + a * hd)) // (hd * b)) - 1
    den = n * b
    out = []
    for j in range(j_min, j_max + 1):
        cl, ch = j * b - a, j * b + a
        if cl * ld > ln * den:
            lo_n, lo_d = cl, den
        else:
            lo_n, lo_d = ln, ld
        if ch * hd < hn * den:
            hi_n, hi_d = ch, den
        else:
            hi_n, hi_d = hn, hd
        if lo_n * hi_d < hi_n * lo_d:
            out.append(Arc(lo_n, lo_d, hi_n, hi_d, j, pos))
    return out


def chain_intersect(n_seq: Sequence[int], eps, L: int = 0) -> CandidateChain:
    """Intersect ``B(n_k, eps)`` over every ``n_k > L`` in ``n_seq``.

    Starts from all ``n_{k0}`` arcs, where ``k0`` is the first index with
    ``n_{k0} > L``, and refines one term at a time.  A rational ``alpha``
    lies in a survivor exactly when all its defects on the window are
    below ``eps``.
    """
    eps = as_fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ParameterError(f"eps must lie in (0, 1/2), got {eps}")
    seq = tuple(int(v) for v in n_seq)
    if any(v < 1 for v in seq) or any(y <= x for x, y in zip(seq, seq[1:])):
        raise ParameterError("n_seq must be strictly increasing positive integers")
    k0 = next((i for i, v in enumerate(seq) if v > L), None)
    if k0 is None:
        raise ParameterError(f"window empty: no term exceeds L = {L}")
    a, b = eps.numerator, eps.denominator
    n0 = seq[k0]
    den = n0 * b
    current = tuple(Arc(j * b - a, den, j * b + a, den, j, -1) for j in range(n0))
    stages = [current]
    for n in seq[k0 + 1 :]:
        nxt = []
        for pos, arc in enumerate(current):
            nxt.extend(_children(arc, pos, n, a, b))
        current = tuple(nxt)
        stages.append(current)
    return CandidateChain(seq, eps, L, k0, tuple(stages))


@dataclass(frozen=True)
class BoundReport:
    status: str  # "pass", "fail" or "not-applicable"
    survivors: int
    bound: int
    stage: int | None = None
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def cardinality_bound_check(chain: CandidateChain, M) -> BoundReport:
    """Check the ratio-bound survivor count on a computed chain.

    Applicable when ``eps < 1/(4M)`` and every window ratio
    ``n_{k+1}/n_k`` is below ``M``.  Then each stage must satisfy
    ``(1 - 2 eps)/n_{k+1} > 2 eps/n_k``, no arc may split into two children
    and the survivor count must stay at most ``n_{k0}``.  ``stage`` in a
    failing report is the index into ``chain.n_seq`` of the offending term.
    """
    M = as_fraction(M)
    eps = chain.eps
    window = chain.window
    bound = window[0]
    count = len(chain.survivors)
    if eps >= 1 / (4 * M):
        return BoundReport("not-applicable", count, bound, reason=f"eps = {eps} >= 1/(4M) = {1 / (4 * M)}")
    for i, (x, y) in enumerate(zip(window, window[1:])):
        if Fraction(y, x) >= M:
            return BoundReport(
                "not-applicable", count, bound, chain.k0 + i + 1, f"ratio {y}/{x} >= M = {M}"
            )
    for i, (x, y) in enumerate(zip(window, window[1:])):
        if (1 - 2 * eps) / y <= 2 * eps / x:
            return BoundReport("fail", count, bound, chain.k0 + i + 1, "arc spacing inequality violated")
        parents = [arc.parent for arc in chain.stages[i + 1]]
        if len(parents) != len(set(parents)):
            return BoundReport("fail", count, bound, chain.k0 + i + 1, "an arc met two arcs of the next family")
    if count > bound:
        return BoundReport("fail", count, bound, reason=f"{count} survivors exceed n_k0 = {bound}")
    return BoundReport("pass", count, bound)


@dataclass(frozen=True)
class GateResult:
    applicable: bool
    bound: Fraction | None = None


def chacon_gate(alpha, n: int, eps) -> GateResult:
    """Bound ``||alpha||`` from small defects at two consecutive times ``n`` and ``n + 1``.

    Since ``alpha = (n + 1) alpha - n alpha`` and the circle norm is
    subadditive, ``||alpha|| <= ||(n+1) alpha|| + ||n alpha|| < 2 eps``.
    """
    a = _alpha(alpha)
    eps = as_fraction(eps)
    d0, d1 = circle_norm(n * a), circle_norm((n + 1) * a)
    if not (d0 < eps and d1 < eps):
        return GateResult(False)
    return GateResult(True, d0 + d1)


def screening_sequence(tower, draw=None, kind: str = RETURN_TIMES) -> tuple[int, ...]:
    """Per-stage times ``k = 0..K`` used to screen eigenvalues.

    ``"return"`` gives ``h_k + a_1^{(k)}``, the gap between the first two
    column copies; ``"frequency"`` gives ``h_k + x_{k,1}`` and needs the draw.
    The ratio bound is not enforced here; :func:`cardinality_bound_check`
    tests ratios on the window it is given.
    """
    if kind == RETURN_TIMES:
        return tower.return_times()
    if kind == FREQUENCY:
        if draw is None:
            raise ParameterError("the frequency sequence needs an OmegaDraw")
        from .ensemble import frequency_sequence

        return frequency_sequence(draw, tower.heights, check_ratio=False).n
    raise ParameterError(f"unknown screening sequence {kind!r}")


@dataclass(frozen=True)
class ScreenResult:
    window: tuple[int, int]
    sequence: str
    chain: CandidateChain

    @property
    def nontrivial(self) -> tuple[Arc, ...]:
        return self.chain.nontrivial()

    @property
    def weak_mixing_evidence(self) -> bool:
        return not self.nontrivial

    def nontrivial_by_end(self) -> dict[int, int]:
        """Nontrivial survivor count for each window end ``k1..k2``."""
        k1 = self.window[0]
        return {k1 + i: c for i, c in enumerate(self.chain.nontrivial_counts())}


def eigenvalue_screen(tower, eps, window: tuple[int, int], draw=None, sequence: str = RETURN_TIMES) -> ScreenResult:
    """Run the arc chain on stages ``window[0]..window[1]`` of a built tower.

    An empty ``nontrivial`` set is weak-mixing evidence at this ``eps`` and
    window; the arc around 0 always survives.
    """
    k1, k2 = window
    if not 0 <= k1 <= k2 <= tower.K:
        raise ParameterError(f"window [{k1}, {k2}] outside stages 0..{tower.K}")
    seq = screening_sequence(tower, draw, sequence)[k1 : k2 + 1]
    chain = chain_intersect(seq, eps, L=0)
    return ScreenResult((k1, k2), sequence, chain)


def write_survivors_csv(arcs: Sequence[Arc], path) -> None:
    """Survivor arcs sorted by centre as exact numerator/denominator columns."""
    rows = sorted(((arc.center, arc.half_width) for arc in arcs), key=lambda r: r[0])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["center_numerator", "center_denominator", "halfwidth_numerator", "halfwidth_denominator"])
        for c, hw in rows:
            w.writerow([c.numerator, c.denominator, hw.numerator, hw.denominator])
