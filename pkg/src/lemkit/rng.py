"""Counter-based random streams for reproducible Monte Carlo.

Every random draw in the toolkit is a pure function of (seed, stream,
step, slot).  Batches of walkers share a stream; each walker occupies a
slot inside the batch and consumes the same per-step draw no matter how
many worker threads run, so results are bitwise reproducible across
thread counts and across runs.

Built on numpy's Philox generator: the 256-bit block counter is
partitioned so distinct (stream, step) pairs can never overlap within
2**128 draws.
"""

import numpy as np

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def derive_seed(seed: int, *indices: int) -> int:
    """Fold indices into a seed with splitmix64 steps.

    Deterministic across processes and platforms; used to give every
    Monte Carlo run inside a composite computation its own stream
    namespace.
    """
    z = seed & _MASK
    for idx in indices:
        z = (z + _GOLDEN + (idx & _MASK)) & _MASK
        z ^= z >> 30
        z = (z * 0xBF58476D1CE4E5B9) & _MASK
        z ^= z >> 27
        z = (z * 0x94D049BB133111EB) & _MASK
        z ^= z >> 31
    return z


def step_uniforms(seed: int, stream: int, step: int, n: int) -> np.ndarray:
    """Uniform[0,1) draws for one (stream, step); slot i gets draw i."""
    counter = np.array([0, 0, step & _MASK, stream & _MASK], dtype=np.uint64)
    key = np.array([seed & _MASK, _GOLDEN], dtype=np.uint64)
    bg = np.random.Philox(counter=counter, key=key)
    return np.random.Generator(bg).random(n)


def stream_generator(seed: int, stream: int) -> np.random.Generator:
    """A full generator pinned to (seed, stream), for non-walker draws."""
    counter = np.array([0, 0, 0, stream & _MASK], dtype=np.uint64)
    key = np.array([seed & _MASK, _GOLDEN], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))
