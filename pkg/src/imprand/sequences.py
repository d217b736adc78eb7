"""Sequence data: prefixes, deterministic generation, and file round trips.

Generation is reproducible bit-exactly across platforms: the PRNG is a fixed
64-bit counter-based generator (splitmix64 applied to seed + counter) and
sampling inverts exact rational CDFs with integer thresholds, so float
behavior never influences which symbols come out.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from imprand.core import (
    ImprandError,
    ModelInvariantError,
    ProbabilityMassFunction,
    SampleSpace,
    SpaceMismatchError,
)
from imprand.forecasting import ForecastingSystem, Situation
from imprand.martingale import MultiplierProcess, mixture_weights


@dataclass(frozen=True)
class SequencePrefix:
    """A finite data prefix: symbol indices over a sample space."""

    space: SampleSpace
    symbols: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(i) for i in self.symbols))
        for i in self.symbols:
            if not 0 <= i < self.space.size:
                raise ModelInvariantError(
                    f"symbol index {i} invalid for a {self.space.size}-symbol space"
                )

    @classmethod
    def from_tokens(cls, space: SampleSpace, tokens: Sequence[str]) -> "SequencePrefix":
        return cls(space, tuple(space.index_of(t) for t in tokens))

    def __len__(self) -> int:
        return len(self.symbols)

    def tokens(self) -> Tuple[str, ...]:
        return tuple(self.space.symbols[i] for i in self.symbols)

    def situation(self, depth: int) -> Situation:
        """The situation after the first `depth` outcomes."""
        # bypass per-symbol re-validation: the prefix already checked them
        s = object.__new__(Situation)
        object.__setattr__(s, "space", self.space)
        object.__setattr__(s, "symbols", self.symbols[:depth])
        return s


_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def _splitmix64_block(seed: int, start: int, count: int) -> np.ndarray:
    """Values start..start+count-1 of the counter-based stream, as uint64."""
    counters = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK64) + counters * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _cdf_thresholds(p: ProbabilityMassFunction) -> np.ndarray:
    """Integer thresholds floor(cum*2^64) for the first K-1 cumulative
    weights; a draw u maps to the count of thresholds <= u."""
    thresholds = []
    cum = Fraction(0)
    for w in p.weights[:-1]:
        cum += w
        if cum >= 1:
            # remaining symbols carry zero weight and are never drawn
            break
        thresholds.append((cum.numerator << 64) // cum.denominator)
    return np.array(thresholds, dtype=np.uint64)


@dataclass(frozen=True)
class GeneratorSpec:
    """What to generate: IID draws, depth-cyclic draws, or an adversarial
    greedy-descent path against a strategy battery."""

    kind: str
    length: int
    seed: int = 0
    pmfs: Tuple[ProbabilityMassFunction, ...] = ()
    system: Optional[ForecastingSystem] = None
    battery: Tuple[MultiplierProcess, ...] = ()

    def __post_init__(self):
        if self.kind not in ("iid", "cyclic", "adversarial"):
            raise ModelInvariantError(f"unknown generator kind {self.kind!r}")
        if self.length < 0:
            raise ModelInvariantError(f"length must be non-negative, got {self.length}")
        object.__setattr__(self, "pmfs", tuple(self.pmfs))
        object.__setattr__(self, "battery", tuple(self.battery))
        if self.kind in ("iid", "cyclic") and not self.pmfs:
            raise ModelInvariantError(f"{self.kind} generation needs mass functions")
        if self.kind == "iid" and len(self.pmfs) != 1:
            raise ModelInvariantError("iid generation takes exactly one mass function")
        if self.kind == "adversarial" and (self.system is None or not self.battery):
            raise ModelInvariantError("adversarial generation needs a system and battery")

    @classmethod
    def iid(cls, p: ProbabilityMassFunction, length: int, seed: int = 0) -> "GeneratorSpec":
        return cls(kind="iid", length=length, seed=seed, pmfs=(p,))

    @classmethod
    def cyclic(
        cls, pmfs: Sequence[ProbabilityMassFunction], length: int, seed: int = 0
    ) -> "GeneratorSpec":
        return cls(kind="cyclic", length=length, seed=seed, pmfs=tuple(pmfs))

    @classmethod
    def adversarial(
        cls,
        system: ForecastingSystem,
        battery: Sequence[MultiplierProcess],
        length: int,
    ) -> "GeneratorSpec":
        return cls(
            kind="adversarial",
            length=length,
            system=system,
            battery=tuple(battery),
        )

    @property
    def space(self) -> SampleSpace:
        if self.kind == "adversarial":
            return self.system.space
        return self.pmfs[0].space


def generate(spec: GeneratorSpec) -> SequencePrefix:
    """Produce a sequence; deterministic given the spec (seed included)."""
    if spec.kind == "iid":
        return _generate_cyclic(spec.pmfs, spec.length, spec.seed)
    if spec.kind == "cyclic":
        first = spec.pmfs[0].space
        for p in spec.pmfs[1:]:
            if p.space != first:
                raise SpaceMismatchError(first, p.space)
        return _generate_cyclic(spec.pmfs, spec.length, spec.seed)
    return _generate_adversarial(spec.system, spec.battery, spec.length)


def _generate_cyclic(
    pmfs: Tuple[ProbabilityMassFunction, ...], length: int, seed: int
) -> SequencePrefix:
    space = pmfs[0].space
    draws = _splitmix64_block(seed, 0, length)
    symbols = np.zeros(length, dtype=np.int64)
    period = len(pmfs)
    for phase, p in enumerate(pmfs):
        thresholds = _cdf_thresholds(p)
        block = draws[phase::period]
        symbols[phase::period] = np.searchsorted(thresholds, block, side="right")
    return SequencePrefix(space, tuple(int(i) for i in symbols))


def _generate_adversarial(
    system: ForecastingSystem,
    battery: Tuple[MultiplierProcess, ...],
    length: int,
) -> SequencePrefix:
    """Greedy descent: at each situation pick the symbol minimizing the exact
    renormalized mixture capital, ties broken by symbol order.  The mixture
    never exceeds 1 along the result, and battery member i stays below the
    reciprocal of its mixture weight."""
    space = system.space
    for member in battery:
        if member.space != space:
            raise SpaceMismatchError(space, member.space)
    weights = mixture_weights(len(battery))
    capitals: List[Fraction] = [Fraction(1)] * len(battery)
    path: List[int] = []

    for depth in range(length):
        s = Situation(space, tuple(path))
        factors = []
        for member in battery:
            g = member.factor(s)
            if g.minimum() <= 0:
                raise ModelInvariantError(
                    f"battery member not positive at {s.tokens()!r}"
                )
            factors.append(g)
        best_x, best_value = 0, None
        for x in space:
            candidate = sum(
                (w * c * g[x] for w, c, g in zip(weights, capitals, factors)),
                start=Fraction(0),
            )
            if best_value is None or candidate < best_value:
                best_x, best_value = x, candidate
        capitals = [c * g[best_x] for c, g in zip(capitals, factors)]
        path.append(best_x)

    return SequencePrefix(space, tuple(path))


_HEADER_PREFIX = "# alphabet:"


def write_sequence(prefix: SequencePrefix, path) -> None:
    """Whitespace-separated UTF-8 tokens with an alphabet header; wraps long
    sequences for readability."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{_HEADER_PREFIX} {' '.join(prefix.space.symbols)}\n")
        tokens = prefix.tokens()
        for start in range(0, len(tokens), 40):
            fh.write(" ".join(tokens[start : start + 40]) + "\n")


def read_sequence(path, space: Optional[SampleSpace] = None) -> SequencePrefix:
    """Parse a sequence file; the alphabet comes from the header unless a
    space is supplied, in which case the two must agree."""
    header_space = None
    symbols: List[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                if stripped.startswith(_HEADER_PREFIX):
                    declared = tuple(stripped[len(_HEADER_PREFIX) :].split())
                    header_space = SampleSpace(declared)
                continue
            if space is None and header_space is None:
                raise ImprandError(
                    f"{path}:{lineno}: data before any '{_HEADER_PREFIX}' header "
                    "and no alphabet supplied"
                )
            current = space or header_space
            for token in stripped.split():
                try:
                    symbols.append(current.index_of(token))
                except ModelInvariantError:
                    raise ImprandError(
                        f"{path}:{lineno}: token {token!r} not in alphabet "
                        f"{current.symbols!r}"
                    ) from None
    if header_space is not None and space is not None and header_space != space:
        raise SpaceMismatchError(space, header_space)
    final = space or header_space
    if final is None:
        raise ImprandError(f"{path}: no alphabet header and none supplied")
    return SequencePrefix(final, tuple(symbols))
