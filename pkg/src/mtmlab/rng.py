"""Counter-based random substreams for reproducible parallel simulation.

Every random draw in the package comes from a Philox counter keyed by
``(seed, stream_id)`` with the 256-bit counter laid out as

    word 3: step index          (chain step, batch index, ...)
    word 2: slot                (draw purpose within a step, see Slot)
    words 0-1: free running     (consumed by the generator itself)

so the value of any draw is a pure function of ``(seed, stream_id, step,
slot, position)``. Work items (steps, batches, grid cells) can therefore
be executed by any number of workers in any order without changing a
single bit of output.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox


class Slot:
    """Draw purposes within one step; each gets a disjoint counter block."""

    PROPOSAL = 0
    SELECT = 1
    SHADOW = 2
    ACCEPT = 3
    LAZY = 4
    INNER = 5
    START = 6  # initial-state / stationary-start draws


class Substream:
    """A reusable view onto the Philox stream of one ``(seed, stream_id)``.

    ``at(step, slot)`` repositions the counter and returns a
    ``numpy.random.Generator``; the same ``(step, slot)`` always replays
    the same draws, independent of what was generated in between.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._bg = Philox(key=np.array([self.seed, self.stream_id], dtype=np.uint64))
        self._gen = Generator(self._bg)
        # Template state mutated in place by at(); cheaper than
        # reconstructing a BitGenerator per step (~12x, measured).
        self._state = self._bg.state
        self._counter = self._state["state"]["counter"]

    def at(self, step: int, slot: int = 0) -> Generator:
        self._counter[0] = 0
        self._counter[1] = 0
        self._counter[2] = slot
        self._counter[3] = step
        self._state["buffer_pos"] = 4
        self._state["has_uint32"] = 0
        self._state["uinteger"] = 0
        self._bg.state = self._state
        return self._gen


def substream(seed: int, stream_id: int = 0) -> Substream:
    return Substream(seed, stream_id)


def generator_at(seed: int, stream_id: int, step: int, slot: int = 0) -> Generator:
    """One-shot variant of ``Substream.at`` for infrequent draws."""
    return Substream(seed, stream_id).at(step, slot)
