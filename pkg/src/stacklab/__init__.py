"""Rank-one cutting and stacking with exact arithmetic.

Build finite towers, sample Ornstein spacers reproducibly, screen
eigenvalue candidates with exact circle arcs and measure correlations
inside the tower.
"""

from .construction import (
    ConstructionSpec,
    Level,
    MassReport,
    Spacer,
    SpacerStage,
    Tower,
    TowerStage,
    build_tower,
    chacon_spec,
    decode_level,
    height_sequence,
    mass_report,
    odometer_spec,
    ornstein_heights,
    ornstein_spacers,
    ornstein_spec,
    spacer_stages,
    symbolic_name,
)
from .diagnostics import (
    CorrelationReport,
    LevelSet,
    cesaro_score,
    correlation,
    lift_level_set,
    rigidity_scan,
)
from .ensemble import (
    FrequencySequence,
    OmegaDraw,
    chacon_pattern_scan,
    frequency_sequence,
    prng_next,
    read_golden,
    sample_omega,
    sample_uniform,
    trial_seeds,
    write_golden,
)
from .errors import ConstructionError, InvariantError, ParameterError, StacklabError
from .spectral import (
    CandidateChain,
    CircleFrequency,
    cardinality_bound_check,
    chacon_gate,
    chain_intersect,
    circle_norm,
    defect_sequence,
    eigenvalue_screen,
)

__version__ = "0.1.0"
