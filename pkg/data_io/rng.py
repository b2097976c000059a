import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 output for state ``x``."""
    x = (int(x) + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Generator for sub-stream ``index`` of master ``seed``: PCG64(splitmix64(seed ^ index))."""
    seed = int(seed) & _MASK64
    return np.random.Generator(np.random.PCG64(splitmix64(seed ^ int(index))))


def derived_seed(seed: int, index: int) -> int:
    """Master seed of child ``index``, mixed so that children's sub-streams never line up."""
    return splitmix64((int(seed) & _MASK64) ^ int(index))
