"""Deterministic RNG derivation.

All randomness in the package flows through numpy Generators backed by PCG64.
Sub-streams are derived from a root seed plus string/int labels by hashing, so
results do not depend on call order, platform, or process: the same
(seed, labels) pair always yields the same stream.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts: object) -> int:
    """Derive a 64-bit seed from a root seed and a sequence of labels.

    Labels may be ints, strings, or anything with a stable repr for the
    values used here (we only pass ints and strings).
    """
    h = hashlib.sha256()
    for part in parts:
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x00")
    return int.from_bytes(h.digest()[:8], "little")


def rng_from(*parts: object) -> np.random.Generator:
    """A PCG64 generator keyed by the given labels."""
    return np.random.Generator(np.random.PCG64(derive_seed(*parts)))
