"""imprand: exact betting-based randomness analysis for finite-alphabet data
under imprecise probability models.

The library evaluates coherent lower expectations exactly in rational
arithmetic, verifies and constructs supermartingale betting strategies on the
event tree, measures finite-prefix randomness deficiency of data against
forecasting systems, and estimates accepted expectation intervals for a
gamble along a sequence.
"""

from imprand.core import (
    Gamble,
    ProbabilityMassFunction,
    SampleSpace,
    SpaceMismatchError,
    gamble_range,
    linear_expectation,
    negate,
)
from imprand.lowerexp import (
    AnchorGammaModel,
    AnchorIntervalModel,
    EnvelopeModel,
    IntervalQ,
    LinearModel,
    LowerExpectation,
    VacuousModel,
    check_coherence,
    dominates,
    interval_model,
)
from imprand.forecasting import (
    CyclicSystem,
    ForecastingSystem,
    ProgrammaticSystem,
    Situation,
    StationarySystem,
    TableSystem,
    forecast_at,
    pointwise_leq,
)
from imprand.martingale import (
    ApproxProcess,
    LLNStrategyParams,
    MultiplierProcess,
    RationalProcess,
    SelectionProcess,
    cap_process,
    classify_process,
    difference,
    from_multiplier,
    lln_strategy,
    mix,
    mixture_weights,
    rationalize,
)
from imprand.sequences import (
    GeneratorSpec,
    SequencePrefix,
    generate,
    read_sequence,
    write_sequence,
)
from imprand.modelio import (
    ParseError,
    battery_from_list,
    gamble_from_dict,
    gamble_to_dict,
    load_battery,
    load_gamble,
    load_model,
    load_system,
    model_from_dict,
    model_to_dict,
    save_model,
    save_system,
    system_from_dict,
    system_to_dict,
    write_trajectory_csv,
)
from imprand.analysis import (
    IntervalEstimate,
    Trajectory,
    battery_for_gambles,
    check_running_average,
    default_battery,
    deficiency_summary,
    estimate_interval,
    intersect,
    run_battery,
    run_battery_fast,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorGammaModel",
    "AnchorIntervalModel",
    "ApproxProcess",
    "CyclicSystem",
    "EnvelopeModel",
    "ForecastingSystem",
    "Gamble",
    "GeneratorSpec",
    "IntervalEstimate",
    "IntervalQ",
    "LLNStrategyParams",
    "LinearModel",
    "LowerExpectation",
    "MultiplierProcess",
    "ParseError",
    "ProbabilityMassFunction",
    "ProgrammaticSystem",
    "RationalProcess",
    "SampleSpace",
    "SelectionProcess",
    "SequencePrefix",
    "Situation",
    "SpaceMismatchError",
    "StationarySystem",
    "TableSystem",
    "Trajectory",
    "VacuousModel",
    "battery_for_gambles",
    "battery_from_list",
    "cap_process",
    "check_coherence",
    "check_running_average",
    "classify_process",
    "default_battery",
    "deficiency_summary",
    "difference",
    "dominates",
    "estimate_interval",
    "forecast_at",
    "from_multiplier",
    "gamble_from_dict",
    "gamble_range",
    "gamble_to_dict",
    "generate",
    "interval_model",
    "intersect",
    "linear_expectation",
    "lln_strategy",
    "load_battery",
    "load_gamble",
    "load_model",
    "load_system",
    "mix",
    "mixture_weights",
    "model_from_dict",
    "model_to_dict",
    "negate",
    "pointwise_leq",
    "rationalize",
    "read_sequence",
    "run_battery",
    "run_battery_fast",
    "save_model",
    "save_system",
    "system_from_dict",
    "system_to_dict",
    "write_sequence",
    "write_trajectory_csv",
]
