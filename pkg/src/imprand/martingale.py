"""Processes on the event tree and the supermartingale calculus.

A real process assigns an exact rational to every situation.  Processes are
evaluation oracles with memoization, not materialized trees: the tree is
exponential in depth, and both deep sweeps and long single-path evaluations
must stay feasible.

Provided here: one-step process differences, finite-depth super/submartingale
classification, multiplier-generated capital processes, the large-number-law
betting strategy, rationalization of approximately known supermartingales
into exact rational ones, running-max capping, and weighted mixtures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from imprand.core import (
    Gamble,
    ModelInvariantError,
    SampleSpace,
    SpaceMismatchError,
    as_rational,
)
from imprand.forecasting import (
    CyclicSystem,
    ForecastingSystem,
    Situation,
    StationarySystem,
    iter_situations,
)


class RationalProcess:
    """An exact rational-valued function on situations, memoized per path.

    Memoization relies on the GIL for safety; evaluation functions must be
    pure (same situation, same value).
    """

    def __init__(self, space: SampleSpace, fn: Callable[[Situation], Fraction]):
        self.space = space
        self._fn = fn
        self._memo: Dict[Tuple[int, ...], Fraction] = {}

    def value(self, s: Situation) -> Fraction:
        if s.space != self.space:
            raise SpaceMismatchError(self.space, s.space)
        key = s.symbols
        cached = self._memo.get(key)
        if cached is None:
            cached = as_rational(self._fn(s))
            self._memo[key] = cached
        return cached

    @classmethod
    def constant(cls, space: SampleSpace, c) -> "RationalProcess":
        c = as_rational(c)
        return cls(space, lambda s: c)


class MultiplierProcess:
    """A map from situations to non-negative gambles (one-step betting
    factors)."""

    def __init__(self, space: SampleSpace, fn: Callable[[Situation], Gamble]):
        self.space = space
        self._fn = fn
        self._memo: Dict[Tuple[int, ...], Gamble] = {}

    def factor(self, s: Situation) -> Gamble:
        if s.space != self.space:
            raise SpaceMismatchError(self.space, s.space)
        key = s.symbols
        cached = self._memo.get(key)
        if cached is None:
            g = self._fn(s)
            if g.space != self.space:
                raise SpaceMismatchError(self.space, g.space)
            if g.minimum() < 0:
                raise ModelInvariantError(
                    f"multiplier at {s.tokens()!r} takes negative value {g.minimum()}"
                )
            cached = g
            self._memo[key] = cached
        return cached

    @classmethod
    def constant(cls, space: SampleSpace, g: Gamble) -> "MultiplierProcess":
        return cls(space, lambda s: g)


def difference(F: RationalProcess, s: Situation) -> Gamble:
    """One-step increment gamble: x -> F(sx) - F(s)."""
    base = F.value(s)
    return Gamble(F.space, tuple(F.value(s.child(i)) - base for i in F.space))


@dataclass
class ClassificationReport:
    """Finite-depth verdicts; verification never extends beyond the swept
    depth."""

    depth: int
    supermartingale: bool
    strict: bool
    submartingale: bool
    strict_submartingale: bool
    non_negative: bool
    test: bool
    witnesses: List[Tuple[Tuple[str, ...], str]]


def classify_process(
    F: RationalProcess, sys: ForecastingSystem, depth: int
) -> ClassificationReport:
    """Exact super/submartingale classification over all situations to depth.

    A supermartingale has conjugate upper expectation of the increment <= 0
    at every situation; a test supermartingale is additionally non-negative
    with root value 1.  Witnesses list every situation violating the
    supermartingale inequality together with the offending value.
    """
    if F.space != sys.space:
        raise SpaceMismatchError(F.space, sys.space)
    if depth < 0:
        raise ModelInvariantError(f"depth must be non-negative, got {depth}")

    supermartingale = strict = True
    submartingale = strict_sub = True
    non_negative = True
    witnesses: List[Tuple[Tuple[str, ...], str]] = []

    for s in iter_situations(F.space, depth):
        value = F.value(s)
        if value < 0:
            non_negative = False
        if s.depth == depth:
            # leaf level: only the value itself is inspected
            continue
        model = sys.forecast(s)
        delta = difference(F, s)
        up = model.upper(delta)
        lo = model.lower(delta)
        if up > 0:
            supermartingale = False
            witnesses.append((s.tokens(), str(up)))
        if up >= 0:
            strict = False
        if lo < 0:
            submartingale = False
        if lo <= 0:
            strict_sub = False

    root = Situation.root(F.space)
    test = supermartingale and non_negative and F.value(root) == 1
    return ClassificationReport(
        depth=depth,
        supermartingale=supermartingale,
        strict=strict and supermartingale,
        submartingale=submartingale,
        strict_submartingale=strict_sub and submartingale,
        non_negative=non_negative,
        test=test,
        witnesses=witnesses,
    )


def from_multiplier(D: MultiplierProcess) -> RationalProcess:
    """Capital process generated by a multiplier: root value 1, child value
    parent value times the parent's factor at the taken symbol."""

    process = RationalProcess(D.space, lambda s: Fraction(0))  # fn replaced below

    def eval_capital(s: Situation) -> Fraction:
        if s.depth == 0:
            return Fraction(1)
        parent = Situation(s.space, s.symbols[:-1])
        return process.value(parent) * D.factor(parent)[s.symbols[-1]]

    process._fn = eval_capital
    return process


@dataclass(frozen=True)
class SelectionProcess:
    """A deterministic 0/1 process choosing subsequence positions.

    Kinds: "all" selects every step; "residue" selects steps whose depth is
    congruent to i mod m; "table" looks prefixes up in an explicit map with a
    default.
    """

    kind: str
    modulus: int = 1
    residue: int = 0
    table: Optional[Tuple[Tuple[Tuple[int, ...], int], ...]] = None
    default: int = 0

    def __post_init__(self):
        if self.kind not in ("all", "residue", "table"):
            raise ModelInvariantError(f"unknown selection kind {self.kind!r}")
        if self.kind == "residue":
            if self.modulus < 1 or not 0 <= self.residue < self.modulus:
                raise ModelInvariantError(
                    f"bad residue class {self.residue} mod {self.modulus}"
                )
        if self.default not in (0, 1):
            raise ModelInvariantError("selection values must be 0 or 1")
        if self.table is not None:
            for _, v in self.table:
                if v not in (0, 1):
                    raise ModelInvariantError("selection values must be 0 or 1")

    @classmethod
    def all_ones(cls) -> "SelectionProcess":
        return cls(kind="all")

    @classmethod
    def residue_class(cls, m: int, i: int) -> "SelectionProcess":
        return cls(kind="residue", modulus=m, residue=i)

    @classmethod
    def from_table(cls, table, default: int = 0) -> "SelectionProcess":
        rows = tuple((tuple(k), int(v)) for k, v in dict(table).items())
        return cls(kind="table", table=rows, default=default)

    def selects(self, s: Situation) -> int:
        if self.kind == "all":
            return 1
        if self.kind == "residue":
            return 1 if s.depth % self.modulus == self.residue else 0
        for key, v in self.table or ():
            if key == s.symbols:
                return v
        return self.default

    def selects_depth(self, depth: int) -> Optional[int]:
        """Selection value when it depends on depth alone, else None."""
        if self.kind == "all":
            return 1
        if self.kind == "residue":
            return 1 if depth % self.modulus == self.residue else 0
        return None


@dataclass(frozen=True)
class LLNStrategyParams:
    """Parameters of the running-average betting strategy.

    The bound B = max(1, max f - min f) and stake xi = epsilon/(2*B^2) are
    derived; epsilon must lie in (0, B), which guarantees 0 < xi < 1/B and
    hence strictly positive betting factors.
    """

    f: Gamble
    direction: str
    epsilon: Fraction
    selection: SelectionProcess

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_rational(self.epsilon))
        if self.direction not in ("lower", "upper"):
            raise ModelInvariantError(f"direction must be lower|upper, got {self.direction!r}")
        if not 0 < self.epsilon < self.bound:
            raise ModelInvariantError(
                f"epsilon {self.epsilon} outside (0, B) with B = {self.bound}"
            )

    @property
    def bound(self) -> Fraction:
        return max(Fraction(1), self.f.spread())

    @property
    def xi(self) -> Fraction:
        return self.epsilon / (2 * self.bound ** 2)


def lln_strategy(params: LLNStrategyParams, sys: ForecastingSystem) -> MultiplierProcess:
    """Betting strategy whose capital grows when the selected running average
    of the target increment stays below -epsilon.

    The increment is f minus the situation's lower forecast of f (direction
    "lower"), or the upper forecast minus f (direction "upper").  The factor
    is D(s) = 1 - xi*S(s)*increment(s); xi < 1/B keeps it strictly positive.
    Whenever the selected average of the increment over n selected steps is
    <= -epsilon, the capital is >= exp(epsilon^2/(4 B^2) * n).
    """
    if params.f.space != sys.space:
        raise SpaceMismatchError(sys.space, params.f.space)
    f, xi, sel = params.f, params.xi, params.selection
    lower_dir = params.direction == "lower"
    one = Gamble.constant(f.space, 1)

    def compute(s: Situation) -> Gamble:
        if not sel.selects(s):
            return one
        model = sys.forecast(s)
        if lower_dir:
            delta = f - model.lower(f)
        else:
            delta = model.upper(f) - f
        g = one - delta.scale(xi)
        if g.minimum() <= 0:
            raise ModelInvariantError(
                f"betting factor not positive at {s.tokens()!r}: min {g.minimum()}"
            )
        return g

    # when the forecast and the selection depend on the depth alone, the
    # factor is periodic in depth; cache one gamble per phase instead of one
    # per situation
    if sel.kind != "table" and isinstance(sys, (StationarySystem, CyclicSystem)):
        period = sys.period if isinstance(sys, CyclicSystem) else 1
        if sel.kind == "residue":
            period = math.lcm(period, sel.modulus)
        phase_cache: Dict[int, Gamble] = {}

        def factor(s: Situation) -> Gamble:
            key = s.depth % period
            cached = phase_cache.get(key)
            if cached is None:
                cached = compute(s)
                phase_cache[key] = cached
            return cached

    else:
        factor = compute

    return MultiplierProcess(sys.space, factor)


@dataclass(frozen=True)
class ApproxProcess:
    """A real process known only through a convergent net of rationals.

    ``net(s, n)`` is the n-th rational approximation at situation s;
    ``modulus(s, N)`` returns an index beyond which the net is within
    2^-N of the limit.  The contract is caller-asserted and testable against
    processes with known limits.
    """

    space: SampleSpace
    net: Callable[[Situation, int], Fraction]
    modulus: Callable[[Situation, int], Fraction]

    def approximation(self, s: Situation, precision_bits: int) -> Fraction:
        index = max(0, math.ceil(self.modulus(s, precision_bits)))
        return as_rational(self.net(s, index))


def rationalize(M: ApproxProcess, depth: int = 0) -> Tuple[RationalProcess, Fraction]:
    """Exact positive rational strict supermartingale tracking an
    approximately known non-negative supermartingale.

    Construction: M'(s) = (r(s) + 6*2^-d(s)) / alpha with alpha = r(root) + 6,
    where r(s) is the net's approximation at s to d(s) bits.  Then M'(root)
    is exactly 1 and |alpha*M'(s) - M(s)| <= 7 wherever the approximation
    contract holds.  The depth argument is an audit hint only; the returned
    process is defined on the whole tree.
    """
    root = Situation.root(M.space)
    r_root = M.approximation(root, 0)
    alpha = r_root + 6
    if alpha <= 0:
        raise ModelInvariantError(
            f"root approximation {r_root} violates the non-negativity contract"
        )

    def eval_prime(s: Situation) -> Fraction:
        d = s.depth
        return (M.approximation(s, d) + Fraction(6, 2 ** d)) / alpha

    return RationalProcess(M.space, eval_prime), alpha


def cap_process(M: RationalProcess, k: int) -> RationalProcess:
    """Freeze the process at 2^k once its running max along the path first
    reaches 2^k; identity below the cap.  Preserves the supermartingale
    property."""
    if k < 0:
        raise ModelInvariantError(f"cap exponent must be non-negative, got {k}")
    cap = Fraction(2 ** k)

    def eval_capped(s: Situation) -> Fraction:
        # frozen at the cap as soon as the running max of M reaches it
        for cut in range(s.depth + 1):
            if M.value(Situation(s.space, s.symbols[:cut])) >= cap:
                return cap
        return M.value(s)

    return RationalProcess(M.space, eval_capped)


def mix(processes: Sequence[RationalProcess], truncation: Optional[int] = None) -> RationalProcess:
    """Exact mixture with geometric weights 2^-i renormalized to sum to 1.

    Mixing preserves positivity and the supermartingale property.  An
    optional truncation keeps only the first n processes.
    """
    members = list(processes)
    if truncation is not None:
        members = members[:truncation]
    if not members:
        raise ModelInvariantError("cannot mix an empty list of processes")
    space = members[0].space
    for p in members[1:]:
        if p.space != space:
            raise SpaceMismatchError(space, p.space)
    weights = mixture_weights(len(members))

    def eval_mix(s: Situation) -> Fraction:
        return sum(
            (w * p.value(s) for w, p in zip(weights, members)), start=Fraction(0)
        )

    return RationalProcess(space, eval_mix)


def mixture_weights(count: int) -> Tuple[Fraction, ...]:
    """Renormalized geometric weights 2^-i / sum_j 2^-j for i < count."""
    if count < 1:
        raise ModelInvariantError("weight count must be positive")
    raw = [Fraction(1, 2 ** i) for i in range(count)]
    total = sum(raw)
    return tuple(w / total for w in raw)
