"""Exact finite-stage cutting and stacking.

A construction starts from the unit interval ``B_0`` (height 1, level
width 1).  Stage ``k`` cuts the current tower into ``p[k]`` equal columns,
puts ``a_j`` spacer levels over column ``j`` and restacks the columns left
to right, which gives

    h[k+1] = p[k] * h[k] + sum(a)

Heights are Python ints (unbounded) and widths are :class:`fractions.Fraction`,
so every number produced here is exact.

Schedules ``p``, ``t`` and ``x_last`` are indexed by stage ``0..K``.  Stages
``0..K-1`` build the towers ``1..K``; the stage-``K`` cut is kept as well so
that the first-column return time ``h[K] + a_1`` of the top tower exists.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod
from typing import NamedTuple, Sequence

from .errors import ConstructionError, ParameterError

DETERMINISTIC = "deterministic"
ORNSTEIN = "ornstein"


@dataclass(frozen=True)
class SpacerStage:
    """Spacer counts ``a_1..a_p`` placed over the columns at stage ``k``."""

    k: int
    a: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(v) for v in self.a))
        if any(v < 0 for v in self.a):
            raise ParameterError(f"stage {self.k}: negative spacer count in {self.a}")

    @property
    def p(self) -> int:
        return len(self.a)

    @property
    def total(self) -> int:
        return sum(self.a)


@dataclass(frozen=True)
class ConstructionSpec:
    """Parameter schedules for a finite rank-one construction.

    ``p``, ``t`` and ``x_last`` each carry one entry per stage ``0..K``.
    In ``deterministic`` mode ``spacers`` lists the explicit counts per stage
    and ``t``/``x_last`` may be empty.  In ``ornstein`` mode the spacers come
    from random draws, and stage 0 must have ``t[0] == 0`` because
    ``2 t_k <= h_k`` cannot hold at ``h_0 = 1`` otherwise.
    """

    p: tuple[int, ...]
    K: int
    mode: str = ORNSTEIN
    t: tuple[int, ...] = ()
    x_last: tuple[int, ...] = ()
    spacers: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(int(v) for v in self.p))
        object.__setattr__(self, "t", tuple(int(v) for v in self.t))
        object.__setattr__(self, "x_last", tuple(int(v) for v in self.x_last))
        object.__setattr__(
            self, "spacers", tuple(tuple(int(v) for v in row) for row in self.spacers)
        )
        K = self.K
        if not isinstance(K, int) or K < 1:
            raise ParameterError(f"K must be an integer >= 1, got {K!r}")
        if len(self.p) != K + 1:
            raise ParameterError(f"p needs {K + 1} entries (stages 0..K), got {len(self.p)}")
        if any(v < 2 for v in self.p):
            raise ParameterError(f"every cutting parameter must be >= 2, got {self.p}")
        if self.mode == ORNSTEIN:
            if len(self.t) != K + 1 or len(self.x_last) != K + 1:
                raise ParameterError(f"ornstein mode needs t and x_last with {K + 1} entries")
            if any(v < 0 for v in self.t):
                raise ParameterError(f"spacer half-ranges must be >= 0, got {self.t}")
            if any(v < 0 for v in self.x_last):
                raise ParameterError(f"x_last entries must be >= 0, got {self.x_last}")
        elif self.mode == DETERMINISTIC:
            if len(self.spacers) != K + 1:
                raise ParameterError(f"deterministic mode needs {K + 1} spacer rows, got {len(self.spacers)}")
            for k, (pk, row) in enumerate(zip(self.p, self.spacers)):
                if len(row) != pk:
                    raise ParameterError(f"stage {k}: expected {pk} spacer counts, got {len(row)}")
                if any(v < 0 for v in row):
                    raise ParameterError(f"stage {k}: negative spacer count in {row}")
        else:
            raise ParameterError(f"unknown mode {self.mode!r}")

    @property
    def p_max(self) -> int:
        return max(self.p)

    def truncated(self, K: int) -> "ConstructionSpec":
        """The same schedules cut down to ``K`` stages."""
        if not 1 <= K <= self.K:
            raise ParameterError(f"cannot truncate a {self.K}-stage spec to K={K}")
        return ConstructionSpec(
            p=self.p[: K + 1],
            K=K,
            mode=self.mode,
            t=self.t[: K + 1],
            x_last=self.x_last[: K + 1],
            spacers=self.spacers[: K + 1],
        )


@dataclass(frozen=True)
class TowerStage:
    """Tower number ``k``: height, level width and the columns it was stacked from.

    ``column_offsets[j]`` is the level at which (0-based) column ``j + 1``
    starts; ``spacers`` is the stage ``k - 1`` cut that built this tower.
    Stage 0 is the base interval and has no columns.
    """

    k: int
    h: int
    w: Fraction
    h_prev: int = 0
    spacers: SpacerStage | None = None
    column_offsets: tuple[int, ...] = field(default=())

    @property
    def mass(self) -> Fraction:
        return self.h * self.w


class Level(NamedTuple):
    """A tower level that is a copy of level ``inner`` of the previous tower."""

    column: int
    inner: int


class Spacer(NamedTuple):
    """The ``index``-th spacer level stacked over ``column``."""

    column: int
    index: int


@dataclass(frozen=True)
class Tower:
    """All towers ``0..K`` of one construction plus the stage-``K`` cut."""

    spec: ConstructionSpec
    spacers: tuple[SpacerStage, ...]
    stages: tuple[TowerStage, ...]

    @property
    def K(self) -> int:
        return self.spec.K

    @property
    def heights(self) -> tuple[int, ...]:
        return tuple(s.h for s in self.stages)

    @property
    def widths(self) -> tuple[Fraction, ...]:
        return tuple(s.w for s in self.stages)

    def __getitem__(self, k: int) -> TowerStage:
        return self.stages[k]

    def return_times(self) -> tuple[int, ...]:
        """``h_k + a_1^{(k)}`` for ``k = 0..K``: the gap between the first two column copies."""
        return tuple(s.h + sp.a[0] for s, sp in zip(self.stages, self.spacers))


@dataclass(frozen=True)
class MassReport:
    partial_sum_spacers: Fraction
    partial_sum_last: Fraction
    total_mass_at_K: Fraction
    last_ratio: Fraction
    diverging_risk: bool


def ornstein_spacers(t_k: int, p_k: int, draws: Sequence[int], x_last_k: int, k: int = 0) -> SpacerStage:
    """Spacers ``a_i = 2 t_k + x_i - x_{i-1}`` with ``x_0 = 0`` and ``x_{p_k} = x_last_k``.

    ``draws`` holds ``x_1..x_{p_k - 1}``, each in ``[-t_k, t_k]``.  The sum
    telescopes to ``2 t_k p_k + x_last_k``.
    """
    if p_k < 2:
        raise ParameterError(f"stage {k}: cutting parameter must be >= 2, got {p_k}")
    if len(draws) != p_k - 1:
        raise ParameterError(f"stage {k}: expected {p_k - 1} draws, got {len(draws)}")
    if x_last_k < 0:
        raise ParameterError(f"stage {k}: x_last must be >= 0, got {x_last_k}")
    for x in draws:
        if not -t_k <= x <= t_k:
            raise ParameterError(f"stage {k}: draw {x} outside [-{t_k}, {t_k}]")
    xs = (0, *draws, x_last_k)
    return SpacerStage(k, tuple(2 * t_k + xs[i] - xs[i - 1] for i in range(1, p_k + 1)))


def height_sequence(spec: ConstructionSpec, spacers: Sequence[SpacerStage]) -> tuple[int, ...]:
    """Heights ``h_0..h_K`` from explicit spacer stages (``h_0 = 1``).

    In ornstein mode the result is also checked against
    ``h_{k+1} = p_k (h_k + 2 t_k) + x_last_k``.
    """
    if len(spacers) < spec.K:
        raise ParameterError(f"need spacers for stages 0..{spec.K - 1}, got {len(spacers)}")
    h = [1]
    for k in range(spec.K):
        stage = spacers[k]
        if len(stage.a) != spec.p[k]:
            raise ParameterError(f"stage {k}: expected {spec.p[k]} spacer counts, got {len(stage.a)}")
        if any(v < 0 for v in stage.a):
            raise ParameterError(f"stage {k}: negative spacer count")
        h.append(spec.p[k] * h[k] + sum(stage.a))
    if spec.mode == ORNSTEIN:
        alt = ornstein_heights(spec, validate=False)
        for k, (u, v) in enumerate(zip(h, alt)):
            if u != v:
                raise ConstructionError(
                    f"stage {k}: spacer recursion gives {u} but ornstein recursion gives {v}", stage=k
                )
    return tuple(h)


def ornstein_heights(spec: ConstructionSpec, validate: bool = True) -> tuple[int, ...]:
    """Heights from ``h_{k+1} = p_k (h_k + 2 t_k) + x_last_k``; independent of the draws.

    With ``validate`` the precondition ``2 t_k <= h_k`` is checked at every
    stage ``0..K`` and a :class:`ConstructionError` names the first failure.
    """
    if spec.mode != ORNSTEIN:
        raise ParameterError("ornstein_heights needs an ornstein-mode spec")
    h = [1]
    for k in range(spec.K):
        h.append(spec.p[k] * (h[k] + 2 * spec.t[k]) + spec.x_last[k])
    if validate:
        for k in range(spec.K + 1):
            if 2 * spec.t[k] > h[k]:
                raise ConstructionError(
                    f"stage {k}: 2*t_k = {2 * spec.t[k]} exceeds h_k = {h[k]}", stage=k
                )
    return tuple(h)


def spacer_stages(spec: ConstructionSpec, draw=None) -> tuple[SpacerStage, ...]:
    """Spacer stages ``0..K``: explicit in deterministic mode, from ``draw.x`` otherwise."""
    if spec.mode == DETERMINISTIC:
        return tuple(SpacerStage(k, row) for k, row in enumerate(spec.spacers))
    if draw is None:
        raise ParameterError("ornstein mode needs an OmegaDraw to place spacers")
    if len(draw.x) != spec.K + 1:
        raise ParameterError(f"draw covers {len(draw.x)} stages, spec needs {spec.K + 1}")
    return tuple(
        ornstein_spacers(spec.t[k], spec.p[k], draw.x[k], spec.x_last[k], k)
        for k in range(spec.K + 1)
    )


def build_tower(spec: ConstructionSpec, draw=None) -> Tower:
    """Build towers ``0..K`` exactly.  ``draw`` (an OmegaDraw) is required in ornstein mode."""
    if spec.mode == ORNSTEIN:
        ornstein_heights(spec)
    spacers = spacer_stages(spec, draw)
    heights = height_sequence(spec, spacers)
    stages = [TowerStage(0, 1, Fraction(1))]
    for k in range(1, spec.K + 1):
        prev = stages[-1]
        sp = spacers[k - 1]
        offsets = [0]
        for a in sp.a[:-1]:
            offsets.append(offsets[-1] + prev.h + a)
        stages.append(
            TowerStage(
                k=k,
                h=heights[k],
                w=prev.w / spec.p[k - 1],
                h_prev=prev.h,
                spacers=sp,
                column_offsets=tuple(offsets),
            )
        )
    return Tower(spec, spacers, tuple(stages))


def decode_level(l: int, stage: TowerStage) -> Level | Spacer:
    """Say where level ``l`` of tower ``stage`` came from.

    Columns are numbered from 1.  Returns ``Level(j, r)`` when ``l`` is level
    ``r`` of the ``j``-th copy of the previous tower, ``Spacer(j, i)`` when it
    is the ``i``-th spacer stacked over column ``j``.
    """
    if stage.k < 1:
        raise ParameterError("the base tower has no columns to decode into")
    if not 0 <= l < stage.h:
        raise IndexError(f"level {l} outside [0, {stage.h}) at stage {stage.k}")
    j = bisect_right(stage.column_offsets, l) - 1
    r = l - stage.column_offsets[j]
    if r < stage.h_prev:
        return Level(j + 1, r)
    return Spacer(j + 1, r - stage.h_prev)


def symbolic_name(k: int, tower: Tower) -> str:
    """Word over ``{B, s}`` spelling tower ``k`` from bottom to top.

    ``B`` marks a level of the base interval, ``s`` a spacer; the word has
    length ``h_k``.  Built by substituting the stage words, so only use it
    for towers small enough to hold as a string.
    """
    if not 0 <= k <= tower.K:
        raise ParameterError(f"stage {k} outside 0..{tower.K}")
    word = "B"
    for sp in tower.spacers[:k]:
        word = "".join(word + "s" * a for a in sp.a)
    return word


def mass_report(spec: ConstructionSpec, heights: Sequence[int], threshold: Fraction = Fraction(1, 4)) -> MassReport:
    """Partial sums of the finite-measure series up to the built depth.

    Sums run over stages ``1..K-1`` (the randomised stages whose spacers
    sit inside tower ``K``).  Finiteness of the full series is a tail
    property, so ``diverging_risk`` only flags a large last ratio
    ``t_k / h_k`` and never decides anything.
    """
    K = spec.K
    if len(heights) < K + 1:
        raise ParameterError(f"need heights h_0..h_{K}")
    w_K = Fraction(1, prod(spec.p[:K]))
    total = heights[K] * w_K
    if spec.mode != ORNSTEIN:
        zero = Fraction(0)
        return MassReport(zero, zero, total, zero, False)
    s_t = sum((Fraction(spec.t[k], heights[k]) for k in range(1, K)), Fraction(0))
    s_x = sum((Fraction(spec.x_last[k], spec.p[k] * heights[k]) for k in range(1, K)), Fraction(0))
    last = Fraction(spec.t[K - 1], heights[K - 1])
    return MassReport(s_t, s_x, total, last, last > threshold)


# Named constructions used throughout tests and demos.

def chacon_spec(K: int) -> ConstructionSpec:
    """Classical Chacon map: three columns, one spacer over the middle one."""
    return ConstructionSpec(p=(3,) * (K + 1), K=K, mode=DETERMINISTIC, spacers=((0, 1, 0),) * (K + 1))


def odometer_spec(K: int, p: int = 2) -> ConstructionSpec:
    """Constant cutting with no spacers; an odometer with rational spectrum."""
    return ConstructionSpec(p=(p,) * (K + 1), K=K, mode=DETERMINISTIC, spacers=((0,) * p,) * (K + 1))


def ornstein_spec(K: int, p, t, x_last=0) -> ConstructionSpec:
    """Ornstein-mode spec from constants, callables of the stage, or explicit lists.

    A constant or callable ``t`` applies to the randomised stages ``k >= 1``;
    stage 0 gets ``t_0 = 0``.  Explicit lists are taken verbatim.
    """

    def expand(v, zero_base=False):
        if callable(v):
            return tuple(0 if (zero_base and k == 0) else int(v(k)) for k in range(K + 1))
        if isinstance(v, int):
            return tuple(0 if (zero_base and k == 0) else v for k in range(K + 1))
        return tuple(v)

    return ConstructionSpec(
        p=expand(p), K=K, mode=ORNSTEIN, t=expand(t, zero_base=True), x_last=expand(x_last)
    )
