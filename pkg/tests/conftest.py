import random
from fractions import Fraction

import pytest

from imprand import (
    EnvelopeModel,
    Gamble,
    MultiplierProcess,
    ProbabilityMassFunction,
    SampleSpace,
)


@pytest.fixture
def space3():
    return SampleSpace(("A", "B", "C"))


@pytest.fixture
def f_example(space3):
    return Gamble(space3, (Fraction(1), Fraction(-2), Fraction(3)))


@pytest.fixture
def vertices3(space3):
    half = Fraction(1, 2)
    return (
        ProbabilityMassFunction(space3, (Fraction(0), half, half)),
        ProbabilityMassFunction(space3, (half, Fraction(0), half)),
        ProbabilityMassFunction(space3, (half, half, Fraction(0))),
    )


@pytest.fixture
def envelope3(vertices3):
    return EnvelopeModel(vertices3)


@pytest.fixture
def halving_multiplier(space3):
    # one-step factors (1/2, 3/2, 1/2): shrinks on A and C, grows on B
    g = Gamble(space3, (Fraction(1, 2), Fraction(3, 2), Fraction(1, 2)))
    return MultiplierProcess(space3, lambda s: g)


def rand_fraction(rng: random.Random, lo: int, hi: int, den_max: int = 12) -> Fraction:
    den = rng.randint(1, den_max)
    num = rng.randint(lo * den, hi * den)
    return Fraction(num, den)


def rand_gamble(rng: random.Random, space: SampleSpace, lo: int = -4, hi: int = 4) -> Gamble:
    return Gamble(space, tuple(rand_fraction(rng, lo, hi) for _ in space.symbols))


def rand_pmf(rng: random.Random, space: SampleSpace) -> ProbabilityMassFunction:
    raw = [Fraction(rng.randint(0, 8)) for _ in space.symbols]
    if sum(raw) == 0:
        raw[rng.randrange(space.size)] = Fraction(1)
    total = sum(raw)
    return ProbabilityMassFunction(space, tuple(w / total for w in raw))


def rand_space(rng: random.Random, min_size: int = 2, max_size: int = 5) -> SampleSpace:
    k = rng.randint(min_size, max_size)
    return SampleSpace(tuple(chr(ord("a") + i) for i in range(k)))


def rand_supermartingale_multiplier(rng, sys, depth):
    """Random table-backed multiplier with the one-step bound enforced:
    every factor gamble is scaled so its upper forecast is at most 1."""
    from imprand import Gamble, MultiplierProcess
    from imprand.forecasting import iter_situations

    table = {}
    for s in iter_situations(sys.space, depth):
        raw = Gamble(
            sys.space,
            tuple(Fraction(rng.randint(0, 24), 8) for _ in sys.space.symbols),
        )
        up = sys.forecast(s).upper(raw)
        if up > 1:
            raw = raw.scale(Fraction(1) / up)
        table[s.symbols] = raw
    one = Gamble.constant(sys.space, 1)
    return MultiplierProcess(sys.space, lambda s: table.get(s.symbols, one))
