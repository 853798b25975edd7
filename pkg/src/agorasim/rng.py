"""Named-stream random number derivation.

All randomness in a run flows from one root seed.  Sub-components ask for a
stream by name (e.g. ``("agent", 17, "policy", day)``) and get a generator
whose seed is a hash of the root seed and the name path.  This makes every
sub-component reproducible in isolation and keeps streams independent of the
order in which they are requested.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(root_seed: int, *names) -> int:
    h = hashlib.sha256()
    h.update(str(int(root_seed)).encode())
    for name in names:
        h.update(b"/")
        h.update(str(name).encode())
    return int.from_bytes(h.digest()[:8], "big")


def stream(root_seed: int, *names) -> np.random.Generator:
    """Generator for the named stream under ``root_seed``."""
    return np.random.default_rng(derive_seed(root_seed, *names))
