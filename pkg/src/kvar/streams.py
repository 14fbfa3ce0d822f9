"""Deterministic splittable random streams.

Every stochastic routine in the package derives its generators through
:func:`derive_rng`, which hashes a master seed together with an integer
path (trial index, side, grid position, ...) into an independent stream.
The derivation is stateless, so the same (seed, path) pair always yields
the same stream no matter how many workers the trials are spread over.
"""

from __future__ import annotations

import numpy as np

__all__ = ["derive_rng", "derive_seed"]


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Return the generator for counter path ``path`` under ``master_seed``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(p) for p in path))
    return np.random.default_rng(ss)


def derive_seed(master_seed: int, *path: int) -> int:
    """Collapse (master_seed, path) into a single integer seed.

    Used when a sub-run (one sweep point, one curve) needs its own master
    seed that is still a pure function of the parent seed.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(2, dtype=np.uint64)[0])
