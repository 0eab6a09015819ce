"""Injectable randomness sources.

All sampling in the scheme goes through an object with the
``random.Random`` interface (``randrange`` and ``getrandbits``), so a seeded
generator gives byte-stable fixtures and ``secrets.SystemRandom`` gives real
keys.
"""

from __future__ import annotations

import random
import secrets
from typing import Iterable, List, Optional, Union

from .errors import RandomnessExhausted

Rng = Union[random.Random, secrets.SystemRandom]


def make_rng(seed: Optional[int] = None) -> Rng:
    if seed is None:
        return secrets.SystemRandom()
    return random.Random(seed)


def random_bytes(rng: Rng, n: int) -> bytes:
    if n == 0:
        return b""
    return rng.getrandbits(8 * n).to_bytes(n, "big")


class ScriptedRandom(random.Random):
    """Replays a fixed list of integers through ``randrange``.

    Values outside the requested range are rejected rather than reduced, so a
    script can never silently turn into a zero exponent.
    """

    def __new__(cls, *args, **kwargs):
        # random.Random.__new__ seeds from the constructor arguments on 3.10
        return super().__new__(cls)

    def __init__(self, values: Iterable[int]):
        self._values: List[int] = list(values)
        super().__init__(0)

    def randrange(self, start, stop=None, step=1):  # noqa: D401 - random.Random API
        if stop is None:
            start, stop = 0, start
        if not self._values:
            raise RandomnessExhausted("scripted randomness exhausted")
        value = self._values.pop(0)
        if not start <= value < stop:
            raise RandomnessExhausted(f"scripted value {value} outside [{start}, {stop})")
        return value

    def getrandbits(self, k: int) -> int:
        if not self._values:
            raise RandomnessExhausted("scripted randomness exhausted")
        return self._values.pop(0) % (1 << k)
