"""Deterministic per-component random streams derived from one root seed.

Every random component of a run derives its generator as
``derive_rng(root_seed, label, index, ...)``.  The derivation is
``np.random.SeedSequence([root & MASK, crc32(label), index & MASK, ...])``,
so streams are independent, stable across platforms, and reproducible from
the root seed recorded in a run manifest.
"""

import zlib

import numpy as np

_MASK = 0xFFFFFFFF


def child_seed_sequence(root_seed: int, *path) -> np.random.SeedSequence:
    """Seed sequence for the component addressed by `path` under `root_seed`.

    Path entries may be short strings (hashed with crc32) or integers.
    """
    entropy = [int(root_seed) & _MASK]
    for part in path:
        if isinstance(part, str):
            entropy.append(zlib.crc32(part.encode("utf-8")))
        else:
            entropy.append(int(part) & _MASK)
    return np.random.SeedSequence(entropy)


def derive_rng(root_seed: int, *path) -> np.random.Generator:
    """Generator for the component addressed by `path` under `root_seed`."""
    return np.random.default_rng(child_seed_sequence(root_seed, *path))


def derive_int_seed(root_seed: int, *path) -> int:
    """32-bit integer seed for components that take plain integer seeds."""
    return int(child_seed_sequence(root_seed, *path).generate_state(1)[0])
