"""Counter-derived, vectorised xoshiro256** streams.

Trajectory ``i`` under master seed ``s`` is seeded with four consecutive
SplitMix64 outputs starting from state ``s ^ i``. Each row of a
:class:`StreamBatch` is an independent generator, so a trajectory's draws do
not depend on which batch or thread it runs in.
"""

from __future__ import annotations

import numpy as np

__all__ = ["splitmix64", "StreamBatch"]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int, count: int) -> list[int]:
    out = []
    for _ in range(count):
        state = (state + _GOLDEN) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        out.append(z ^ (z >> 31))
    return out


def _rotl(x: np.ndarray, k: int) -> np.ndarray:
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


class StreamBatch:
    """``B`` independent xoshiro256** generators advanced in lockstep."""

    def __init__(self, states: np.ndarray):
        self.s = np.array(states, dtype=np.uint64).reshape(-1, 4)

    @classmethod
    def for_trajectories(cls, master_seed: int, indices) -> "StreamBatch":
        rows = [splitmix64((int(master_seed) ^ int(i)) & _MASK, 4) for i in indices]
        return cls(np.array(rows, dtype=np.uint64).reshape(-1, 4))

    def __len__(self) -> int:
        return self.s.shape[0]

    def next_u64(self) -> np.ndarray:
        s = self.s
        with np.errstate(over="ignore"):
            result = _rotl(s[:, 1] * np.uint64(5), 7) * np.uint64(9)
        t = s[:, 1] << np.uint64(17)
        s[:, 2] ^= s[:, 0]
        s[:, 3] ^= s[:, 1]
        s[:, 1] ^= s[:, 2]
        s[:, 0] ^= s[:, 3]
        s[:, 2] ^= t
        s[:, 3] = _rotl(s[:, 3], 45)
        return result

    def raw(self, k: int) -> np.ndarray:
        """``(B, k)`` array of raw 64-bit outputs."""
        return np.stack([self.next_u64() for _ in range(k)], axis=1) if k else np.empty((len(self), 0), np.uint64)

    def uniform(self, k: int) -> np.ndarray:
        """``(B, k)`` doubles in [0, 1) with 53 random bits."""
        return (self.raw(k) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal(self, k: int) -> np.ndarray:
        """``(B, k)`` standard normals by Box-Muller; consumes 2*ceil(k/2) draws."""
        pairs = (k + 1) // 2
        u = self.uniform(2 * pairs)
        u1 = 1.0 - u[:, 0::2]  # (0, 1]
        u2 = u[:, 1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.empty((len(self), 2 * pairs))
        z[:, 0::2] = r * np.cos(2.0 * np.pi * u2)
        z[:, 1::2] = r * np.sin(2.0 * np.pi * u2)
        return z[:, :k]
