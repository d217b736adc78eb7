"""Randomness analysis: battery runs, deficiency, running-average checks and
expectation-interval estimation.

Deficiency of a prefix against a forecasting system is the log2 of the
running max of the renormalized geometric-weight mixture of the battery's
capital processes.  High deficiency is evidence against the model; under a
correct precise model the mixture is a test supermartingale, so deficiency
of k bits or more has probability at most 2^-k.

Two evaluation paths are provided.  ``run_battery`` is exact rational
arithmetic over explicit multiplier processes.  ``run_battery_fast`` handles
the common stationary/cyclic case with depth-periodic strategies: every
betting factor depends only on depth modulo a small period, so the log2
factors are precomputed in an exact table and the capital paths reduce to
vectorized cumulative sums in floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from imprand.core import (
    Gamble,
    ModelInvariantError,
    SampleSpace,
    SpaceMismatchError,
    as_rational,
    log2_rational,
)
from imprand.forecasting import (
    CyclicSystem,
    ForecastingSystem,
    Situation,
    StationarySystem,
)
from imprand.lowerexp import AnchorGammaModel, IntervalQ
from imprand.martingale import (
    LLNStrategyParams,
    MultiplierProcess,
    SelectionProcess,
    classify_process,
    from_multiplier,
    lln_strategy,
    mixture_weights,
)
from imprand.sequences import SequencePrefix


@dataclass(frozen=True)
class Trajectory:
    """Exact capital paths of a battery along a prefix.

    All capitals are positive rationals; the mixture starts at 1 so
    deficiency is never negative.
    """

    prefix: SequencePrefix
    strategy_capitals: Tuple[Tuple[Fraction, ...], ...]
    mixture: Tuple[Fraction, ...]
    running_max: Tuple[Fraction, ...]
    deficiency_bits: float
    argmax_step: int


def run_battery(
    prefix: SequencePrefix,
    sys: ForecastingSystem,
    battery: Sequence[MultiplierProcess],
    audit_depth: Optional[int] = None,
    threads: int = 1,
) -> Trajectory:
    """Exact battery evaluation along a prefix.

    With ``audit_depth`` set, every battery member's generated process is
    first classified to that depth and rejected unless it is a test
    supermartingale for the system.  Strategy paths are independent and can
    be computed on up to ``threads`` worker threads.
    """
    battery = list(battery)
    if not battery:
        raise ModelInvariantError("battery must be non-empty")
    for member in battery:
        if member.space != prefix.space:
            raise SpaceMismatchError(prefix.space, member.space)
    if sys.space != prefix.space:
        raise SpaceMismatchError(prefix.space, sys.space)
    if audit_depth is not None:
        for i, member in enumerate(battery):
            report = classify_process(from_multiplier(member), sys, audit_depth)
            if not report.test:
                raise ModelInvariantError(
                    f"battery member {i} is not a test supermartingale "
                    f"to depth {audit_depth}: witnesses {report.witnesses[:3]}"
                )

    weights = mixture_weights(len(battery))
    situations = [prefix.situation(n) for n in range(len(prefix))]

    def capital_path(member: MultiplierProcess) -> List[Fraction]:
        path = [Fraction(1)]
        for s, x in zip(situations, prefix.symbols):
            path.append(path[-1] * member.factor(s)[x])
        return path

    if threads > 1 and len(battery) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            capitals = list(pool.map(capital_path, battery))
    else:
        capitals = [capital_path(member) for member in battery]

    mixture = []
    for n in range(len(prefix) + 1):
        mixture.append(
            sum((w * path[n] for w, path in zip(weights, capitals)), start=Fraction(0))
        )
    running_max: List[Fraction] = []
    best, best_at = Fraction(0), 0
    for n, m in enumerate(mixture):
        if m > best:
            best, best_at = m, n
        running_max.append(best)

    return Trajectory(
        prefix=prefix,
        strategy_capitals=tuple(tuple(path) for path in capitals),
        mixture=tuple(mixture),
        running_max=tuple(running_max),
        deficiency_bits=max(0.0, log2_rational(best)),
        argmax_step=best_at,
    )


_EPSILON_FACTORS = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16))


def battery_for_gambles(
    gambles: Sequence[Gamble],
    epsilon_factors: Sequence[Fraction] = _EPSILON_FACTORS,
    selection_moduli: Sequence[int] = (1, 2, 3, 4),
    directions: Sequence[str] = ("lower", "upper"),
) -> Tuple[LLNStrategyParams, ...]:
    """Strategy family over explicit gambles: both directions, a geometric
    ladder of epsilons scaled by each gamble's bound B, and all
    residue-class selections up to the given moduli (modulus 1 meaning
    select-everything).

    Ordering matters: mixture weight 2^-i penalizes battery index i by i
    bits, so stronger strategies (larger epsilon, unconditional selection)
    come first.
    """
    gambles = list(gambles)
    if not gambles:
        raise ModelInvariantError("battery needs at least one gamble")
    space = gambles[0].space
    for g in gambles[1:]:
        if g.space != space:
            raise SpaceMismatchError(space, g.space)
    selections: List[SelectionProcess] = []
    for m in selection_moduli:
        if m == 1:
            selections.append(SelectionProcess.all_ones())
        else:
            selections.extend(SelectionProcess.residue_class(m, i) for i in range(m))
    battery = []
    for g in gambles:
        bound = max(Fraction(1), g.spread())
        for direction in directions:
            for factor in epsilon_factors:
                for sel in selections:
                    battery.append(
                        LLNStrategyParams(
                            f=g,
                            direction=direction,
                            epsilon=factor * bound,
                            selection=sel,
                        )
                    )
    return tuple(battery)


def default_battery(
    space: SampleSpace,
    user_gambles: Sequence[Gamble] = (),
    epsilon_factors: Sequence[Fraction] = _EPSILON_FACTORS,
    selection_moduli: Sequence[int] = (1, 2, 3, 4),
) -> Tuple[LLNStrategyParams, ...]:
    """The standard battery: every symbol indicator plus any user gambles,
    expanded by :func:`battery_for_gambles`."""
    gambles = [Gamble.indicator(space, t) for t in space.symbols]
    for g in user_gambles:
        if g.space != space:
            raise SpaceMismatchError(space, g.space)
        gambles.append(g)
    return battery_for_gambles(gambles, epsilon_factors, selection_moduli)


def _system_period(sys: ForecastingSystem) -> int:
    if isinstance(sys, StationarySystem):
        return 1
    if isinstance(sys, CyclicSystem):
        return sys.period
    raise ModelInvariantError(
        "fast battery evaluation needs a stationary or cyclic system"
    )


def _phase_tables(
    sys: ForecastingSystem, strategies: Sequence[LLNStrategyParams]
) -> Tuple[int, np.ndarray]:
    """Per-strategy log2 betting factors indexed by (depth mod L, symbol).

    The factors are computed exactly per phase and converted to float once;
    errors do not accumulate across steps beyond the cumulative sum itself.
    """
    period = _system_period(sys)
    L = period
    for p in strategies:
        m = p.selection.modulus if p.selection.kind == "residue" else 1
        if p.selection.kind == "table":
            raise ModelInvariantError(
                "fast battery evaluation needs depth-based selections"
            )
        L = math.lcm(L, m)
    K = sys.space.size
    tables = np.zeros((len(strategies), L, K), dtype=np.float64)
    models = [
        sys.model if isinstance(sys, StationarySystem) else sys.models[t % sys.period]
        for t in range(L)
    ]
    for i, params in enumerate(strategies):
        if params.f.space != sys.space:
            raise SpaceMismatchError(sys.space, params.f.space)
        xi = params.xi
        for t in range(L):
            if not params.selection.selects_depth(t):
                continue
            model = models[t]
            if params.direction == "lower":
                delta = params.f - model.lower(params.f)
            else:
                delta = model.upper(params.f) - params.f
            factor = Gamble.constant(sys.space, 1) - delta.scale(xi)
            if factor.minimum() <= 0:
                raise ModelInvariantError(
                    f"betting factor not positive at phase {t}: min {factor.minimum()}"
                )
            tables[i, t, :] = [log2_rational(v) for v in factor.values]
    return L, tables


@dataclass(frozen=True)
class FastBatteryResult:
    """Float capital paths (as log2) from the vectorized evaluation."""

    deficiency_bits: float
    mixture_log2: np.ndarray
    strategy_log2: np.ndarray


def run_battery_fast(
    prefix: SequencePrefix,
    sys: ForecastingSystem,
    strategies: Sequence[LLNStrategyParams],
) -> FastBatteryResult:
    """Vectorized battery evaluation for depth-periodic strategies.

    Restricted to stationary/cyclic systems and depth-based selections.
    Capital paths are computed in log2 floats; use :func:`run_battery` when
    exactness is required.
    """
    strategies = list(strategies)
    if not strategies:
        raise ModelInvariantError("battery must be non-empty")
    if sys.space != prefix.space:
        raise SpaceMismatchError(prefix.space, sys.space)
    L, tables = _phase_tables(sys, strategies)
    n = len(prefix)
    data = np.asarray(prefix.symbols, dtype=np.int64)
    phases = np.arange(n, dtype=np.int64) % L

    steps = tables[:, phases, data]  # (B, N) log2 factors along the path
    cum = np.zeros((len(strategies), n + 1), dtype=np.float64)
    np.cumsum(steps, axis=1, out=cum[:, 1:])

    weights = mixture_weights(len(strategies))
    log_w = np.array([log2_rational(w) for w in weights])[:, None]
    shifted = log_w + cum
    peak = shifted.max(axis=0)
    mixture_log2 = peak + np.log2(np.exp2(shifted - peak).sum(axis=0))
    deficiency = float(max(0.0, mixture_log2.max()))
    return FastBatteryResult(
        deficiency_bits=deficiency,
        mixture_log2=mixture_log2,
        strategy_log2=cum,
    )


def battery_processes(
    strategies: Sequence[LLNStrategyParams], sys: ForecastingSystem
) -> Tuple[MultiplierProcess, ...]:
    """Instantiate strategy parameters as multiplier processes for a
    system."""
    return tuple(lln_strategy(p, sys) for p in strategies)


@dataclass(frozen=True)
class AverageReport:
    """Selected running averages of a gamble along a prefix."""

    selected_count: int
    average: Optional[Fraction]
    average_above_lower: Optional[Fraction]
    average_below_upper: Optional[Fraction]
    lower_margin: Optional[Fraction]
    upper_margin: Optional[Fraction]


def check_running_average(
    prefix: SequencePrefix,
    f: Gamble,
    S: SelectionProcess,
    sys: ForecastingSystem,
) -> AverageReport:
    """Selected running average of f, and its gaps to the situation
    forecasts.

    ``average_above_lower`` is the mean of f(x) minus the lower forecast at
    the step; ``average_below_upper`` the mean of the upper forecast minus
    f(x).  For stationary systems the margins to [E(f), upper(f)] are also
    reported.  Zero selected steps yields an explicit empty result.
    """
    if f.space != prefix.space or sys.space != prefix.space:
        raise SpaceMismatchError(prefix.space, f.space if f.space != prefix.space else sys.space)

    bounds_cache = {}

    def forecast_bounds(n: int, s: Situation) -> Tuple[Fraction, Fraction]:
        if isinstance(sys, StationarySystem):
            key, model_fn = 0, lambda: sys.model
        elif isinstance(sys, CyclicSystem):
            key = n % sys.period
            model_fn = lambda: sys.models[key]
        else:
            model = sys.forecast(s)
            return model.lower(f), model.upper(f)
        if key not in bounds_cache:
            model = model_fn()
            bounds_cache[key] = (model.lower(f), model.upper(f))
        return bounds_cache[key]

    count = 0
    total = Fraction(0)
    total_above = Fraction(0)
    total_below = Fraction(0)
    # building the full situation at every step is quadratic in the prefix
    # length; skip it when selection and forecast depend only on the depth
    depth_only = (S.kind != "table"
                  and isinstance(sys, (StationarySystem, CyclicSystem)))
    for n in range(len(prefix)):
        if depth_only:
            if not S.selects_depth(n):
                continue
            s = None
        else:
            s = prefix.situation(n)
            if not S.selects(s):
                continue
        lo, up = forecast_bounds(n, s)
        value = f[prefix.symbols[n]]
        count += 1
        total += value
        total_above += value - lo
        total_below += up - value

    if count == 0:
        return AverageReport(0, None, None, None, None, None)

    average = total / count
    lower_margin = upper_margin = None
    if isinstance(sys, StationarySystem):
        lower_margin = average - sys.model.lower(f)
        upper_margin = sys.model.upper(f) - average
    return AverageReport(
        selected_count=count,
        average=average,
        average_above_lower=total_above / count,
        average_below_upper=total_below / count,
        lower_margin=lower_margin,
        upper_margin=upper_margin,
    )


@dataclass(frozen=True)
class GridPoint:
    """One gamma grid point of an interval sweep."""

    gamma: Fraction
    raw_bits: float
    repaired_bits: float
    accepted: bool


@dataclass(frozen=True)
class IntervalEstimate:
    """Accepted expectation interval for a gamble on a gamma grid."""

    f: Gamble
    lo_accept: Fraction
    hi_accept: Fraction
    threshold_bits: float
    grid_step: Fraction
    lower_grid: Tuple[GridPoint, ...]
    upper_grid: Tuple[GridPoint, ...]


def _default_side_builder(f: Gamble) -> Callable[[Fraction, str], ForecastingSystem]:
    def build(gamma: Fraction, side: str) -> ForecastingSystem:
        if side == "lower":
            return StationarySystem(AnchorGammaModel(anchor=f, gamma=gamma))
        # pinning upper(f) = gamma is pinning lower(-f) = -gamma
        return StationarySystem(AnchorGammaModel(anchor=-f, gamma=-gamma))

    return build


def estimate_interval(
    prefix: SequencePrefix,
    f: Gamble,
    threshold_bits: float = 10.0,
    grid_step: Fraction = Fraction(1, 16),
    sys_builder: Optional[Callable[[Fraction, str], ForecastingSystem]] = None,
    gambles: Optional[Sequence[Gamble]] = None,
    selection_moduli: Sequence[int] = (1, 2, 3, 4),
) -> IntervalEstimate:
    """Sweep gamma over a grid in [min f, max f] and accept the values whose
    pinned-forecast model survives the strategy battery.

    The lower side tests "the expectation of f is at least gamma" with the
    least conservative model making that claim; the upper side tests "at
    most gamma" via the conjugate.  Finite-sample deficiencies need not be
    monotone along the grid, so acceptance is repaired by a running max of
    deficiencies before reading off the endpoints; raw values are kept in
    the returned grids.
    """
    grid_step = as_rational(grid_step)
    if grid_step <= 0:
        raise ModelInvariantError(f"grid step must be positive, got {grid_step}")
    if threshold_bits <= 0:
        raise ModelInvariantError("threshold must be positive")
    if f.space != prefix.space:
        raise SpaceMismatchError(prefix.space, f.space)
    build = sys_builder or _default_side_builder(f)
    battery_gambles = tuple(gambles) if gambles is not None else (f,)

    lo, hi = f.minimum(), f.maximum()
    grid: List[Fraction] = []
    g = lo
    while g <= hi:
        grid.append(g)
        g += grid_step

    def sweep(points: Sequence[Fraction], side: str) -> List[GridPoint]:
        out: List[GridPoint] = []
        worst = 0.0
        for gamma in points:
            if worst > threshold_bits:
                # repaired deficiency can only grow; remaining points rejected
                out.append(GridPoint(gamma, math.inf, math.inf, False))
                continue
            sys = build(gamma, side)
            # the opposite direction is unfalsifiable under a pinned model
            # (its forecast sits at the gamble's extreme), so betting it
            # would only dilute the mixture weights
            battery = battery_for_gambles(
                battery_gambles,
                selection_moduli=selection_moduli,
                directions=(side,),
            )
            raw = run_battery_fast(prefix, sys, battery).deficiency_bits
            worst = max(worst, raw)
            out.append(GridPoint(gamma, raw, worst, worst <= threshold_bits))
        return out

    lower_grid = sweep(grid, "lower")
    upper_grid = sweep(list(reversed(grid)), "upper")

    accepted_lo = [p.gamma for p in lower_grid if p.accepted]
    accepted_hi = [p.gamma for p in upper_grid if p.accepted]
    lo_accept = max(accepted_lo) if accepted_lo else lo
    hi_accept = min(accepted_hi) if accepted_hi else hi
    if lo_accept > hi_accept:
        lo_accept = hi_accept
    return IntervalEstimate(
        f=f,
        lo_accept=lo_accept,
        hi_accept=hi_accept,
        threshold_bits=threshold_bits,
        grid_step=grid_step,
        lower_grid=tuple(lower_grid),
        upper_grid=tuple(upper_grid),
    )


def intersect(a: IntervalQ, b: IntervalQ) -> Optional[IntervalQ]:
    """Exact interval intersection; None when disjoint."""
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    if lo > hi:
        return None
    return IntervalQ(lo, hi)


@dataclass(frozen=True)
class TrajectoryStats:
    strategy_bits: Tuple[float, ...]
    strategy_argmax: Tuple[int, ...]
    mixture_bits: float
    mixture_argmax: int


@dataclass(frozen=True)
class DeficiencySummary:
    """Per-strategy and mixture deficiencies across trajectories."""

    per_trajectory: Tuple[TrajectoryStats, ...]
    max_deficiency_bits: float


def deficiency_summary(trajectories: Sequence[Trajectory]) -> DeficiencySummary:
    stats = []
    for t in trajectories:
        bits, argmax = [], []
        for path in t.strategy_capitals:
            best, best_at = path[0], 0
            for n, c in enumerate(path):
                if c > best:
                    best, best_at = c, n
            bits.append(max(0.0, log2_rational(best)))
            argmax.append(best_at)
        stats.append(
            TrajectoryStats(
                strategy_bits=tuple(bits),
                strategy_argmax=tuple(argmax),
                mixture_bits=t.deficiency_bits,
                mixture_argmax=t.argmax_step,
            )
        )
    overall = max((s.mixture_bits for s in stats), default=0.0)
    return DeficiencySummary(per_trajectory=tuple(stats), max_deficiency_bits=overall)
