"""Stable seeded hashing.

Python's builtin ``hash`` is salted per process, so anything that must be
reproducible across runs (feature hashing, per-dialogue RNG streams) goes
through blake2b instead.
"""

from __future__ import annotations

from hashlib import blake2b

_MASK64 = (1 << 64) - 1


def stable_hash64(text: str, seed: int = 0) -> int:
    """64-bit keyed hash of ``text``, identical across processes and runs."""
    key = (seed & _MASK64).to_bytes(8, "little")
    digest = blake2b(text.encode("utf-8"), digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little")


def derive_seed(seed: int, label: str) -> int:
    """Derive an independent RNG seed for ``label`` from a base seed.

    Used to give each dialogue (or epoch) its own stream so that parallel
    and serial generation orders agree.
    """
    return (seed ^ stable_hash64(label)) & _MASK64
