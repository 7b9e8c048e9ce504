"""Platform-independent random streams for trial simulation.

Each stream is a PCG64 generator seeded through numpy's SeedSequence.  Only
raw 64-bit outputs are consumed, and the float transforms are done here, so
the numbers depend on nothing beyond those two documented algorithms and the
inverse normal CDF from :mod:`statistics` (Wichura's AS241):

* uniform: ``(raw >> 11) * 2**-53`` in [0, 1)
* normal:  ``inv_cdf(((raw >> 11) + 0.5) * 2**-53)``, open interval so the
  quantile is always finite
"""

from __future__ import annotations

from statistics import NormalDist

import numpy as np

RNG_ALGORITHM_ID = "pcg64-seedsequence/u53/normal-invcdf-as241"

_TWO_M53 = 2.0**-53
_STD_NORMAL = NormalDist()


class TrialRng:
    def __init__(self, seed: int, *key: int):
        if seed < 0 or any(k < 0 for k in key):
            raise ValueError("seeds and stream keys must be non-negative integers")
        self.seed = seed
        self.key = tuple(key)
        self._bits = np.random.PCG64(np.random.SeedSequence(seed, spawn_key=self.key))

    def __repr__(self):
        return f"TrialRng(seed={self.seed}, key={self.key})"

    def _raw53(self) -> int:
        return int(self._bits.random_raw()) >> 11

    def random(self) -> float:
        return self._raw53() * _TWO_M53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def standard_normal(self) -> float:
        return _STD_NORMAL.inv_cdf((self._raw53() + 0.5) * _TWO_M53)


def stream(master_seed: int, *key: int) -> TrialRng:
    """Independent stream for ``(master_seed, *key)``, e.g. (seed, replication, design)."""
    return TrialRng(master_seed, *key)
