"""Named deterministic RNG streams derived from one scenario seed.

Every stochastic element of a simulation draws from a stream identified by
a short label ("noise", "mutation", "extraction", ...). Streams are
independent PCG64 generators keyed by (seed, sha256(label)), so module
tests and end-to-end runs that share a seed see identical draws, and any
run is reproducible bit for bit.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream(seed: int, label: str) -> np.random.Generator:
    """Return the generator for (seed, label). Same pair, same stream."""
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    key = int.from_bytes(digest[:8], "little")
    return np.random.default_rng(np.random.SeedSequence([seed, key]))


def streams(seed: int, labels: tuple[str, ...]) -> dict[str, np.random.Generator]:
    """Build one generator per label."""
    return {label: stream(seed, label) for label in labels}
