"""Orbit metrics (Bowen, mean, max-mean, Feldman-Katok) and pressure
estimators for symbolic shifts and circle maps.

The hot loops live in a compiled extension; a pure-Python implementation with
identical results is used when the extension is unavailable or when
``ORBIT_PRESSURE_PURE=1`` is set. ``orbitpressure.BACKEND`` names the one in
use.
"""
__version__ = "0.1.0"

from ._kernels import BACKEND
from .errors import OrbitPressureError
from .estimators import (
    CoverSolution,
    PressureEstimate,
    convergence_table,
    covering_weight,
    exact_shift_pressure,
    inf_over_q,
    measure_pressure_estimate,
    spanning_pressure,
    topological_cover_weight,
    topological_estimate,
)
from .measures import (
    LEBESGUE,
    EmpiricalMeasure,
    MeasureSpec,
    ball_mass,
    bernoulli,
    brin_katok_estimate,
    brin_katok_profile,
    markov,
    parry,
    sample_measure,
)
from .orbit_metrics import (
    MatchParams,
    MatchResult,
    MetricKind,
    bowen_distance,
    edit_distance,
    fk_distance,
    match_value,
    maxmean_distance,
    mean_distance,
    orbit_distance,
)
from .systems import (
    Circle,
    DynSystem,
    Potential,
    Symbolic,
    ZERO,
    apply_map,
    base_distance,
    birkhoff_sum,
    circle_potential,
    constant,
    doubling,
    first_symbol,
    full_shift,
    golden_mean,
    orbit_segment,
    rotation,
    sft,
)

__all__ = [
    "apply_map",
    "BACKEND",
    "ball_mass",
    "base_distance",
    "bernoulli",
    "birkhoff_sum",
    "bowen_distance",
    "brin_katok_estimate",
    "brin_katok_profile",
    "Circle",
    "circle_potential",
    "constant",
    "convergence_table",
    "covering_weight",
    "CoverSolution",
    "doubling",
    "DynSystem",
    "edit_distance",
    "EmpiricalMeasure",
    "exact_shift_pressure",
    "first_symbol",
    "fk_distance",
    "full_shift",
    "golden_mean",
    "inf_over_q",
    "LEBESGUE",
    "markov",
    "match_value",
    "MatchParams",
    "MatchResult",
    "maxmean_distance",
    "mean_distance",
    "measure_pressure_estimate",
    "MeasureSpec",
    "MetricKind",
    "orbit_distance",
    "orbit_segment",
    "OrbitPressureError",
    "parry",
    "Potential",
    "PressureEstimate",
    "rotation",
    "sample_measure",
    "sft",
    "spanning_pressure",
    "Symbolic",
    "topological_cover_weight",
    "topological_estimate",
    "ZERO",
]
