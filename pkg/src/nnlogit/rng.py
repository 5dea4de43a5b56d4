"""Seedable, splittable random streams.

A :class:`RandomStream` is a value: ``(seed, path)``. Every draw builds a
fresh counter-based Philox generator keyed by both, so sibling streams never
overlap and their evaluation order cannot change their output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RandomStream:
    seed: int
    path: tuple[int, ...] = ()

    def child(self, *index: int) -> "RandomStream":
        return RandomStream(self.seed, self.path + tuple(int(i) for i in index))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


def as_stream(seed_or_stream) -> RandomStream:
    if isinstance(seed_or_stream, RandomStream):
        return seed_or_stream
    return RandomStream(int(seed_or_stream))


def gaussian(stream: RandomStream, count) -> np.ndarray:
    return stream.generator().standard_normal(count)


def uniform(stream: RandomStream, count) -> np.ndarray:
    return stream.generator().random(count)


def uniform_choice(stream: RandomStream, n: int, m: int) -> np.ndarray:
    """``m`` distinct indices drawn uniformly from ``range(n)``."""
    if m > n:
        raise ValueError(f"cannot draw {m} distinct indices from {n}")
    if m < 0:
        raise ValueError("m must be nonnegative")
    return stream.generator().choice(n, size=m, replace=False)


def shuffle(stream: RandomStream, n: int) -> np.ndarray:
    return stream.generator().permutation(n)
