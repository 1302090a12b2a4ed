"""Deterministic per-purpose random streams.

Every stochastic operation in the library draws from its own stream so that,
for example, adding an attack to a scenario never perturbs the swarm geometry
that was generated from the same top-level seed.

The splitting scheme: a stream is ``numpy.random.default_rng`` seeded with
``SeedSequence([seed, PURPOSE_CODE, *extra])`` where ``PURPOSE_CODE`` is a
fixed integer from the table below and ``extra`` holds optional integer
qualifiers (sweep point index, trial index, ...).  ``SeedSequence`` hashing is
stable across platforms, so identical inputs give identical streams.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Purpose codes. Never reuse or renumber: streams are part of the
# reproducibility contract.
SWARM = 1
POS_NOISE = 2
DIST_NOISE = 3
SELECT_MALICIOUS = 4
PLACE_DISTRIBUTED = 5
PLACE_COLLUSION = 6
FABRICATE = 7
NLOS_BASELINE = 8
RANDOM_BASELINE = 9
TRIAL = 10


def stream(seed: int, purpose: int, *extra: int) -> np.random.Generator:
    """Return the deterministic generator for (seed, purpose, extra...)."""
    entropy = [int(seed) & _MASK64, int(purpose)] + [int(e) & _MASK64 for e in extra]
    return np.random.default_rng(np.random.SeedSequence(entropy))
