"""Situations (the event tree) and forecasting systems.

A situation is a finite sequence of outcomes; situations form the event tree
rooted at the empty sequence.  A forecasting system assigns a coherent lower
expectation to every situation.  Four rule families are provided: stationary
(one model everywhere), cyclic (model chosen by depth mod M), table-backed
(explicit map with a default), and programmatic (an arbitrary pure function
of the situation).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, Sequence, Tuple

from imprand.core import ModelInvariantError, SampleSpace, SpaceMismatchError
from imprand.lowerexp import LowerExpectation


@dataclass(frozen=True)
class Situation:
    """A finite sequence of symbol indices; depth 0 is the root."""

    space: SampleSpace
    symbols: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        for i in self.symbols:
            if not isinstance(i, int) or not 0 <= i < self.space.size:
                raise ModelInvariantError(
                    f"symbol index {i!r} invalid for a {self.space.size}-symbol space"
                )

    @classmethod
    def root(cls, space: SampleSpace) -> "Situation":
        return cls(space, ())

    @classmethod
    def from_tokens(cls, space: SampleSpace, tokens: Sequence[str]) -> "Situation":
        return cls(space, tuple(space.index_of(t) for t in tokens))

    @property
    def depth(self) -> int:
        return len(self.symbols)

    def child(self, index: int) -> "Situation":
        return Situation(self.space, self.symbols + (index,))

    def children(self) -> Iterator["Situation"]:
        for i in self.space:
            yield self.child(i)

    def tokens(self) -> Tuple[str, ...]:
        return tuple(self.space.symbols[i] for i in self.symbols)


def iter_situations(space: SampleSpace, depth: int) -> Iterator[Situation]:
    """Breadth-first enumeration of all situations up to the given depth,
    children in symbol order."""
    if depth < 0:
        raise ModelInvariantError(f"depth must be non-negative, got {depth}")
    level = [Situation.root(space)]
    yield level[0]
    for _ in range(depth):
        level = [s.child(i) for s in level for i in space]
        yield from level


class ForecastingSystem:
    """Base class; subclasses implement :meth:`forecast`."""

    space: SampleSpace

    def forecast(self, s: Situation) -> LowerExpectation:
        raise NotImplementedError

    def _require_space(self, s: Situation) -> None:
        if s.space != self.space:
            raise SpaceMismatchError(self.space, s.space)


@dataclass(frozen=True)
class StationarySystem(ForecastingSystem):
    model: LowerExpectation

    @property
    def space(self) -> SampleSpace:
        return self.model.space

    def forecast(self, s: Situation) -> LowerExpectation:
        self._require_space(s)
        return self.model


@dataclass(frozen=True)
class CyclicSystem(ForecastingSystem):
    """Model chosen by depth mod M; period-1 degenerates to stationary."""

    models: Tuple[LowerExpectation, ...]

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))
        if not self.models:
            raise ModelInvariantError("cyclic system needs at least one model")
        first = self.models[0].space
        for m in self.models[1:]:
            if m.space != first:
                raise SpaceMismatchError(first, m.space)

    @property
    def space(self) -> SampleSpace:
        return self.models[0].space

    @property
    def period(self) -> int:
        return len(self.models)

    def forecast(self, s: Situation) -> LowerExpectation:
        self._require_space(s)
        return self.models[s.depth % len(self.models)]


@dataclass(frozen=True)
class TableSystem(ForecastingSystem):
    """Explicit situation-to-model map; the default covers off-table
    situations so the system is total on the event tree."""

    table: Dict[Tuple[int, ...], LowerExpectation]
    default: LowerExpectation

    def __post_init__(self):
        object.__setattr__(self, "table", dict(self.table))
        for m in self.table.values():
            if m.space != self.default.space:
                raise SpaceMismatchError(self.default.space, m.space)

    @property
    def space(self) -> SampleSpace:
        return self.default.space

    def forecast(self, s: Situation) -> LowerExpectation:
        self._require_space(s)
        return self.table.get(s.symbols, self.default)


@dataclass(frozen=True)
class ProgrammaticSystem(ForecastingSystem):
    """Rule given as a pure function of the situation.

    The function must be deterministic and always return a model on the
    declared space; this is checked on every call.
    """

    space: SampleSpace
    rule: Callable[[Situation], LowerExpectation] = field(compare=False)

    def forecast(self, s: Situation) -> LowerExpectation:
        self._require_space(s)
        model = self.rule(s)
        if model.space != self.space:
            raise SpaceMismatchError(self.space, model.space)
        return model


def forecast_at(sys: ForecastingSystem, s: Situation) -> LowerExpectation:
    """The system's lower expectation at a situation."""
    return sys.forecast(s)


def pointwise_leq(a, b, depth, probes) -> bool:
    """True iff a's lower expectation never exceeds b's, exactly, at every
    situation up to the given depth and every probe gamble."""
    if a.space != b.space:
        raise SpaceMismatchError(a.space, b.space)
    for s in iter_situations(a.space, depth):
        ea, eb = a.forecast(s), b.forecast(s)
        for g in probes:
            if ea.lower(g) > eb.lower(g):
                return False
    return True
