"""Experiment configs, Monte Carlo runs and file emission.

A config is a JSON document.  Rationals are written ``"num/den"``; floats
are refused wherever an exact value is expected.  Every run writes
``manifest.json`` holding the effective config, a summary and the SHA-256
of each emitted file, so two runs with the same config can be compared by
manifest alone.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .construction import (
    DETERMINISTIC,
    ORNSTEIN,
    ConstructionSpec,
    build_tower,
    chacon_spec,
    mass_report,
    odometer_spec,
    ornstein_heights,
    ornstein_spec,
    spacer_stages,
)
from .diagnostics import LevelSet, correlation, write_correlations_csv
from .ensemble import chacon_pattern_scan, sample_omega, trial_seeds, write_golden
from .errors import ParameterError
from .spectral import FREQUENCY, RETURN_TIMES, eigenvalue_screen, parse_rational, write_survivors_csv

EXPERIMENTS = ("build", "sample", "screen", "diagnose", "montecarlo", "chacon-scan")


class ConfigError(ParameterError):
    """The experiment config is malformed or incomplete."""


def _schedule(value, K: int, name: str):
    """Expand a schedule: int, list, ``{"power": e, "scale": c}`` or ``{"exp": b}``."""
    if isinstance(value, bool) or isinstance(value, float):
        raise ConfigError(f"{name} must be an integer, a list or a formula object")
    if isinstance(value, int):
        return value
    if isinstance(value, list):
        if len(value) != K + 1 or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{name} must list {K + 1} integers (stages 0..K)")
        return tuple(value)
    if isinstance(value, dict):
        scale = value.get("scale", 1)
        if "power" in value:
            e = value["power"]
            return lambda k: scale * k**e
        if "exp" in value:
            b = value["exp"]
            return lambda k: scale * b**k
    raise ConfigError(f"cannot read schedule {name} = {value!r}")


def spec_from_dict(d: dict) -> ConstructionSpec:
    """Build a :class:`ConstructionSpec` from its JSON form.

    ``{"preset": "chacon" | "odometer", "K": ...}`` gives the named maps.
    In ornstein mode a constant or formula ``t`` applies to stages ``k >= 1``
    and stage 0 gets ``t_0 = 0``; explicit lists are used verbatim.
    """
    if not isinstance(d, dict) or "K" not in d:
        raise ConfigError("spec must be an object with at least K")
    K = d["K"]
    if not isinstance(K, int) or isinstance(K, bool) or K < 1:
        raise ConfigError(f"K must be an integer >= 1, got {K!r}")
    preset = d.get("preset")
    if preset == "chacon":
        return chacon_spec(K)
    if preset == "odometer":
        return odometer_spec(K, d.get("p", 2))
    if preset is not None:
        raise ConfigError(f"unknown preset {preset!r}")
    mode = d.get("mode", ORNSTEIN)
    p = _schedule(d.get("p"), K, "p")
    if mode == ORNSTEIN:
        if "t" not in d:
            raise ConfigError("ornstein spec needs t")
        return ornstein_spec(K, p, _schedule(d["t"], K, "t"), _schedule(d.get("x_last", 0), K, "x_last"))
    if mode == DETERMINISTIC:
        ps = p if isinstance(p, tuple) else tuple(p if isinstance(p, int) else p(k) for k in range(K + 1))
        rows = d.get("spacers")
        if not isinstance(rows, list) or not rows:
            raise ConfigError("deterministic spec needs spacers")
        if all(isinstance(v, int) for v in rows):
            rows = [rows] * (K + 1)
        return ConstructionSpec(p=ps, K=K, mode=DETERMINISTIC, spacers=tuple(tuple(r) for r in rows))
    raise ConfigError(f"unknown mode {mode!r}")


@dataclass
class ExperimentConfig:
    experiment: str
    spec: dict
    eps: str | None = None
    window: list[int] | None = None
    trials: int = 1
    master_seed: int = 0
    sequence: str = RETURN_TIMES
    output_path: str = "out"
    diagnose: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        if "experiment" not in d or "spec" not in d:
            raise ConfigError("config needs experiment and spec")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}".replace("\n", " ")) from None
        return cls.from_dict(data)

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}")
        for name in ("trials", "master_seed"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{name} must be an integer")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        if self.sequence not in (RETURN_TIMES, FREQUENCY):
            raise ConfigError(f"sequence must be {RETURN_TIMES!r} or {FREQUENCY!r}")
        spec = self.construction()
        if self.experiment in ("screen", "montecarlo"):
            self.eps_value()
            if self.window is None or len(self.window) != 2:
                raise ConfigError("window must be [k1, k2]")
            k1, k2 = self.window
            if not (isinstance(k1, int) and isinstance(k2, int) and 0 <= k1 <= k2 <= spec.K):
                raise ConfigError(f"window must satisfy 0 <= k1 <= k2 <= K = {spec.K}")
        if self.experiment in ("sample", "montecarlo", "chacon-scan") and spec.mode != ORNSTEIN:
            raise ConfigError(f"{self.experiment} needs an ornstein-mode spec")

    def eps_value(self) -> Fraction:
        if not isinstance(self.eps, str):
            raise ConfigError("eps must be an exact rational num/den")
        try:
            return parse_rational(self.eps)
        except ParameterError:
            raise ConfigError("eps must be an exact rational num/den") from None

    def construction(self) -> ConstructionSpec:
        try:
            return spec_from_dict(self.spec)
        except ConfigError:
            raise
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TrialRow:
    trial: int
    seed: int
    nontrivial_survivors: int | None
    pattern_stages: int
    nontrivial_by_end: dict | None = None


@dataclass(frozen=True)
class MonteCarloSummary:
    trials: int
    rows: tuple[TrialRow, ...]
    fraction_empty: Fraction | None
    fraction_with_pattern: Fraction
    fraction_empty_by_end: dict | None = None

    def as_json(self) -> dict:
        out = {
            "trials": self.trials,
            "fraction_with_pattern": _frac(self.fraction_with_pattern),
        }
        if self.fraction_empty is not None:
            out["fraction_empty"] = _frac(self.fraction_empty)
            out["fraction_empty_by_end"] = {str(k): _frac(v) for k, v in self.fraction_empty_by_end.items()}
        return out


def _frac(x: Fraction) -> dict:
    return {"exact": f"{x.numerator}/{x.denominator}", "display": f"{float(x):.12f}"}


def montecarlo_wmix(config: ExperimentConfig) -> MonteCarloSummary:
    """Screen one sampled tower per trial and count trials without nontrivial candidates.

    Trial ``i`` (1-based) uses the ``i``-th SplitMix64 output of the master
    seed.  Any failing trial aborts the run.
    """
    spec = config.construction()
    eps = config.eps_value()
    k1, k2 = config.window
    rows = []
    for i, seed in enumerate(trial_seeds(config.master_seed, config.trials), start=1):
        draw = sample_omega(spec, seed)
        tower = build_tower(spec, draw)
        screen = eigenvalue_screen(tower, eps, (k1, k2), draw=draw, sequence=config.sequence)
        by_end = screen.nontrivial_by_end()
        patterns = chacon_pattern_scan(tower.spacers, stages=range(1, spec.K + 1))
        rows.append(TrialRow(i, seed, by_end[k2], len(patterns), by_end))
    n = len(rows)
    by_end = {k: Fraction(sum(1 for r in rows if r.nontrivial_by_end[k] == 0), n) for k in range(k1, k2 + 1)}
    return MonteCarloSummary(
        trials=n,
        rows=tuple(rows),
        fraction_empty=by_end[k2],
        fraction_with_pattern=Fraction(sum(1 for r in rows if r.pattern_stages > 0), n),
        fraction_empty_by_end=by_end,
    )


def montecarlo_chacon(config: ExperimentConfig) -> MonteCarloSummary:
    """Per trial, count stages ``1..K`` whose spacers show the Chacon +1 step."""
    spec = config.construction()
    rows = []
    for i, seed in enumerate(trial_seeds(config.master_seed, config.trials), start=1):
        draw = sample_omega(spec, seed)
        patterns = chacon_pattern_scan(spacer_stages(spec, draw), stages=range(1, spec.K + 1))
        rows.append(TrialRow(i, seed, None, len(patterns)))
    n = len(rows)
    return MonteCarloSummary(
        trials=n,
        rows=tuple(rows),
        fraction_empty=None,
        fraction_with_pattern=Fraction(sum(1 for r in rows if r.pattern_stages > 0), n),
    )


def write_montecarlo_csv(summary: MonteCarloSummary, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "seed", "nontrivial_survivors", "pattern_stages"])
        for r in summary.rows:
            w.writerow([r.trial, r.seed, "" if r.nontrivial_survivors is None else r.nontrivial_survivors,
                        r.pattern_stages])


def write_heights_csv(tower, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "h", "width_num", "width_den"])
        for s in tower.stages:
            w.writerow([s.k, s.h, s.w.numerator, s.w.denominator])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _level_set(tower, d: dict) -> LevelSet:
    k = d.get("stage", 1)
    levels = d.get("levels", "all")
    if not isinstance(k, int) or not 0 <= k <= tower.K:
        raise ConfigError(f"diagnose.stage must be within 0..{tower.K}")
    if levels == "all":
        return LevelSet.full(tower, k)
    if isinstance(levels, list):
        return LevelSet(k, levels)
    raise ConfigError("diagnose.levels must be 'all' or a list of level indices")


def run_experiment(config: ExperimentConfig, out_dir=None) -> dict:
    """Run the configured experiment, write its files and return the manifest."""
    out = Path(out_dir if out_dir is not None else config.output_path)
    out.mkdir(parents=True, exist_ok=True)
    spec = config.construction()
    files: list[Path] = []
    summary: dict[str, Any] = {}
    draw = None
    if spec.mode == ORNSTEIN and config.experiment in ("build", "sample", "screen", "diagnose"):
        draw = sample_omega(spec, config.master_seed)

    if config.experiment == "build":
        tower = build_tower(spec, draw)
        path = out / "heights.csv"
        write_heights_csv(tower, path)
        files.append(path)
        m = mass_report(spec, tower.heights)
        summary = {
            "h_K": str(tower[spec.K].h),
            "partial_sum_spacers": _frac(m.partial_sum_spacers),
            "partial_sum_last": _frac(m.partial_sum_last),
            "total_mass_at_K": _frac(m.total_mass_at_K),
            "diverging_risk": m.diverging_risk,
        }
    elif config.experiment == "sample":
        ornstein_heights(spec)
        path = out / "omega.txt"
        write_golden(draw, path)
        files.append(path)
    elif config.experiment == "screen":
        tower = build_tower(spec, draw)
        screen = eigenvalue_screen(tower, config.eps_value(), tuple(config.window), draw=draw,
                                   sequence=config.sequence)
        path = out / "survivors.csv"
        write_survivors_csv(screen.chain.survivors, path)
        files.append(path)
        summary = {
            "survivors": len(screen.chain.survivors),
            "nontrivial": len(screen.nontrivial),
            "weak_mixing_evidence": screen.weak_mixing_evidence,
        }
    elif config.experiment == "diagnose":
        tower = build_tower(spec, draw)
        d = config.diagnose or {}
        K = d.get("K", spec.K)
        shifts = d.get("shifts")
        if not isinstance(shifts, list) or not all(isinstance(n, int) for n in shifts):
            raise ConfigError("diagnose.shifts must be a list of integers")
        A = _level_set(tower, d)
        reports = [correlation(A, A, n, K, tower) for n in shifts]
        path = out / "correlations.csv"
        write_correlations_csv(reports, path)
        files.append(path)
    elif config.experiment == "montecarlo":
        mc = montecarlo_wmix(config)
        path = out / "montecarlo.csv"
        write_montecarlo_csv(mc, path)
        files.append(path)
        summary = mc.as_json()
    elif config.experiment == "chacon-scan":
        mc = montecarlo_chacon(config)
        path = out / "montecarlo.csv"
        write_montecarlo_csv(mc, path)
        files.append(path)
        summary = mc.as_json()

    manifest = {
        "experiment": config.experiment,
        "config": config.to_dict(),
        "files": {p.name: _sha256(p) for p in files},
        "summary": summary,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
