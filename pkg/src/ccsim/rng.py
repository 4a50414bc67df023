"""Reproducible random-number streams.

A single 64-bit seed is expanded into named, non-overlapping sub-streams via
``numpy.random.SeedSequence`` spawn keys. Path elements are strings (hashed
with crc32, which is stable across platforms and Python versions) or
integers, so e.g. ``substream(seed, "rep", 17)`` always denotes the same
stream: adding replications or running them in any order never perturbs
existing ones.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK32 = 0xFFFFFFFF


def _key(path: tuple) -> tuple[int, ...]:
    out = []
    for p in path:
        if isinstance(p, str):
            out.append(zlib.crc32(p.encode("utf-8")) & _MASK32)
        else:
            v = int(p)
            # split larger ints into two 32-bit words so day ordinals etc. fit
            out.append(v & _MASK32)
            if v >> 32:
                out.append((v >> 32) & _MASK32)
    return tuple(out)


def substream(seed: int, *path) -> np.random.Generator:
    """Generator for the sub-stream identified by (seed, path)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=_key(path)))


def child_seed(seed: int, *path) -> int:
    """A 63-bit integer seed derived from (seed, path), for APIs taking ints."""
    state = np.random.SeedSequence(seed, spawn_key=_key(path)).generate_state(2)
    return int((int(state[0]) << 31) ^ int(state[1]))
