"""Counter-based random streams.

Every random draw in a run is produced by a Philox generator keyed by
(seed, purpose, stream_tag, step).  The draw made for a given step is a pure
function of that key and the ensemble size, so two runs sharing a seed see
identical noise regardless of solver settings or perturbation mode
(common-random-numbers contract).
"""

from __future__ import annotations

import numpy as np

# purpose constants; distinct purposes never share a stream
INIT = 0
GAUSS = 1
PERTURB = 2
REFERENCE = 3
SUBSAMPLE = 4


def stream(seed: int, purpose: int, tag: int = 0, step: int = 0) -> np.random.Generator:
    """Generator for the (seed, purpose, tag, step) counter key."""
    ss = np.random.SeedSequence(entropy=(int(seed) & (2**64 - 1), purpose, tag, step))
    return np.random.Generator(np.random.Philox(ss))
