"""Counter-based random streams.

Every stochastic object in the package (disorder rates, lattice weights,
coupling coins) is a pure function of (seed, lattice index, stream label),
so a value never depends on how large a window was sampled or in which
order replicas ran.  The mixing function is the splitmix64 finalizer,
folded once per input word; the same arithmetic is reimplemented inside
the numba simulation kernel, and `SplitMix64` below is the sequential
variant used by the pure-Python ring stepper so both produce identical
event streams.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

# Stream labels.  Disorder laws own ids [0, 8): a mixture's coin uses the
# law's base id and its slow component recurses on base+1.
ALPHA_STREAM = 0
WEIGHT_STREAM = 8
U_BERNOULLI_STREAM = 9
U_EXP_STREAM = 10


def _mix64(z: np.ndarray | np.uint64) -> np.ndarray | np.uint64:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_A)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_B)
    return z ^ (z >> np.uint64(31))


def _as_u64(x) -> np.ndarray | np.uint64:
    """Two's-complement cast of ints or integer arrays to uint64."""
    if isinstance(x, np.ndarray):
        return x.astype(np.int64, copy=False).astype(np.uint64)
    return np.uint64(int(x) & _MASK64)


def counter_uniform(seed: int, i, j, stream: int):
    """Uniform in [0, 1), a pure function of (seed, i, j, stream).

    `i` may be an integer array; `j` and `stream` are scalars.  Negative
    indices are folded in as two's complement.
    """
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        h = _mix64(_as_u64(seed) + np.uint64(_GOLDEN) + _as_u64(i))
        h = _mix64(h + np.uint64(_GOLDEN) + _as_u64(j))
        h = _mix64(h + np.uint64(_GOLDEN) + _as_u64(stream))
    return (h >> np.uint64(11)) * _INV53


def counter_exponential(seed: int, i, j, stream: int, rate):
    """Exp(rate) draw via inverse CDF on the counter uniform; mean 1/rate."""
    u = counter_uniform(seed, i, j, stream)
    return -np.log1p(-u) / rate


def derive_seed(master_seed: int, *labels) -> int:
    """Collision-resistant 64-bit seed from a master seed and a label tuple.

    Keyed blake2b over the stringified labels; replicas and streams get
    independently replayable seeds from (experiment, replica, stream) tags.
    """
    key = (int(master_seed) & _MASK64).to_bytes(8, "little")
    h = hashlib.blake2b(digest_size=8, key=key)
    for lab in labels:
        h.update(str(lab).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


class SplitMix64:
    """Sequential splitmix64 stream; mirrors the numba kernel bit-for-bit."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _INV53

    def exponential(self, rate: float) -> float:
        return -math.log1p(-self.uniform()) / rate
