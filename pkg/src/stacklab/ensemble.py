"""Seeded sampling of Ornstein spacer draws.

Randomness comes from SplitMix64 with a fixed draw order so that a
``(spec, seed)`` pair reproduces the same draws bit for bit on any
platform.  Stage 0 is deterministic (``t_0 = 0``) and consumes no draws;
stages ``1..K`` are drawn row by row, ``i`` ascending inside a row.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

from .construction import ORNSTEIN, ConstructionSpec, SpacerStage, ornstein_heights
from .errors import ConstructionError, InvariantError, ParameterError

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def prng_next(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns ``(new_state, output)``."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def sample_uniform(state: int, m: int) -> tuple[int, int]:
    """Unbiased draw from ``[0, m)`` by rejection: returns ``(new_state, value)``.

    Outputs at or above ``m * floor(2**64 / m)`` are rejected and redrawn.
    """
    if m < 1:
        raise ParameterError(f"sample range must be >= 1, got {m}")
    limit = m * ((1 << 64) // m)
    while True:
        state, out = prng_next(state)
        if out < limit:
            return state, out % m


def trial_seeds(master_seed: int, trials: int) -> list[int]:
    """Seeds for trials ``1..trials``: successive SplitMix64 outputs from the master seed."""
    state = master_seed & MASK64
    seeds = []
    for _ in range(trials):
        state, out = prng_next(state)
        seeds.append(out)
    return seeds


@dataclass(frozen=True)
class OmegaDraw:
    """One sampled point: rows ``x[k] = (x_{k,1}, ..., x_{k,p_k-1})`` for stages ``0..K``."""

    seed: int
    K: int
    x: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(tuple(int(v) for v in row) for row in self.x))


@dataclass(frozen=True)
class FrequencySequence:
    """Strictly increasing positive integers ``n`` indexed from stage ``start``."""

    n: tuple[int, ...]
    start: int = 0

    def __post_init__(self):
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        if any(v < 1 for v in self.n):
            raise ParameterError("frequencies must be positive")
        if any(b <= a for a, b in zip(self.n, self.n[1:])):
            raise ParameterError(f"frequency sequence must be strictly increasing: {self.n}")

    def __len__(self):
        return len(self.n)

    def __iter__(self) -> Iterator[int]:
        return iter(self.n)

    def __getitem__(self, i):
        return self.n[i]

    def window(self, k1: int, k2: int) -> "FrequencySequence":
        """The terms for stages ``k1..k2`` inclusive."""
        lo, hi = k1 - self.start, k2 - self.start
        if lo < 0 or hi >= len(self.n) or k1 > k2:
            raise ParameterError(
                f"window [{k1}, {k2}] outside stages {self.start}..{self.start + len(self.n) - 1}"
            )
        return FrequencySequence(self.n[lo : hi + 1], start=k1)


def sample_omega(spec: ConstructionSpec, seed: int) -> OmegaDraw:
    """Draw ``x_{k,i}`` uniformly from ``{-t_k, ..., t_k}`` for stages ``1..K``."""
    if spec.mode != ORNSTEIN:
        raise ParameterError("sample_omega needs an ornstein-mode spec")
    if spec.t[0] != 0:
        raise ConstructionError(f"stage 0: 2*t_0 = {2 * spec.t[0]} exceeds h_0 = 1", stage=0)
    ornstein_heights(spec)  # 2 t_k <= h_k, stage by stage
    state = seed & MASK64
    rows = [(0,) * (spec.p[0] - 1)]
    for k in range(1, spec.K + 1):
        t_k = spec.t[k]
        row = []
        for _ in range(spec.p[k] - 1):
            state, v = sample_uniform(state, 2 * t_k + 1)
            row.append(v - t_k)
        rows.append(tuple(row))
    return OmegaDraw(seed & MASK64, spec.K, tuple(rows))


def frequency_sequence(draw: OmegaDraw, heights: Sequence[int], check_ratio: bool = True) -> FrequencySequence:
    """``n_k = h_k + x_{k,1}`` for ``k = 0..K``.

    With ``check_ratio`` every ratio must satisfy ``n_{k+1} / n_k <= p_max + 1``,
    otherwise :class:`InvariantError` names the stage.  The bound is
    asymptotic: it needs ``t_k`` and ``x_last`` small against ``h_k`` and
    can fail at early stages where ``t_k`` is close to ``h_k / 2``.
    """
    if len(heights) < len(draw.x):
        raise ParameterError(f"need heights for stages 0..{len(draw.x) - 1}")
    p_max = max(len(row) for row in draw.x) + 1
    n = [heights[k] + row[0] for k, row in enumerate(draw.x)]
    for k in range(len(n) - 1 if check_ratio else 0):
        if n[k + 1] > (p_max + 1) * n[k]:
            raise InvariantError(
                f"stage {k}: n_{k + 1}/n_{k} = {n[k + 1]}/{n[k]} exceeds p_max + 1 = {p_max + 1}",
                module="ornstein_ensemble",
                stage=k,
            )
    return FrequencySequence(tuple(n))


def chacon_pattern_scan(spacers: Sequence[SpacerStage], stages=None) -> list[int]:
    """Stages whose spacers contain two adjacent columns with ``a_{i+1} = a_i + 1``.

    ``stages`` restricts the scan (default: every stage given).
    """
    wanted = None if stages is None else set(stages)
    hits = []
    for sp in spacers:
        if wanted is not None and sp.k not in wanted:
            continue
        if any(b == a + 1 for a, b in zip(sp.a, sp.a[1:])):
            hits.append(sp.k)
    return hits


def write_golden(draw: OmegaDraw, path) -> None:
    """One line per stage, decimal integers separated by single spaces, LF line ends."""
    text = "".join(" ".join(str(v) for v in row) + "\n" for row in draw.x)
    Path(path).write_bytes(text.encode("ascii"))


def read_golden(path, seed: int = 0) -> OmegaDraw:
    lines = Path(path).read_bytes().decode("ascii").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    rows = tuple(tuple(int(v) for v in line.split()) for line in lines)
    return OmegaDraw(seed, len(rows) - 1, rows)
