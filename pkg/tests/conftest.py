"""Shared generators for randomized exact-arithmetic tests."""

from fractions import Fraction

import numpy as np

from gameprob.belief import Frame, MassFunction


def random_rational_mass(rng: np.random.Generator, frame: Frame,
                         max_focal: int = 6, denominator: int = 1000) -> MassFunction:
    """Random mass function with exact rational weights summing to 1."""
    n_subsets = (1 << frame.size) - 1  # non-empty subsets
    count = int(rng.integers(1, min(max_focal, n_subsets) + 1))
    masks = rng.choice(np.arange(1, n_subsets + 1), size=count, replace=False)
    raw = rng.integers(1, denominator, size=count)
    total = int(raw.sum())
    masses = {int(mask): Fraction(int(w), total) for mask, w in zip(masks, raw)}
    return MassFunction(frame, masses)


def random_rational_probabilities(rng: np.random.Generator, size: int,
                                  denominator: int = 1000) -> list:
    """Strictly positive exact rationals summing to 1."""
    raw = rng.integers(1, denominator, size=size)
    total = int(raw.sum())
    return [Fraction(int(w), total) for w in raw]


def random_frame(rng: np.random.Generator, min_size: int = 2, max_size: int = 5) -> Frame:
    size = int(rng.integers(min_size, max_size + 1))
    return Frame([f"w{i}" for i in range(size)])
