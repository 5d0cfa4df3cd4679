"""Seed derivation tree.

Every random draw descends from one master seed through a labelled path,
e.g. ``derive(seed, "world", 17)``, so any single world or trajectory can
be regenerated without replaying the others.
"""
from __future__ import annotations

import hashlib
import random


def derive(seed: int, *path: object) -> int:
    """64-bit child seed for ``path`` under ``seed``."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    for part in path:
        h.update(b"/")
        h.update(str(part).encode())
    return int.from_bytes(h.digest(), "big")


def rng_for(seed: int, *path: object) -> random.Random:
    return random.Random(derive(seed, *path))
