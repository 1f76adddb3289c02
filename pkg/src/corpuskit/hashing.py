"""Deterministic 64-bit hashing primitives shared by the sketching and dedup code.

Every hash in this module is a pure function of its inputs, with no
process-level salting, so signatures and band keys are bit-identical across
runs, platforms, and worker counts.  The exact constructions are spelled out
below so they can be re-evaluated independently (the test suite contains a
straight-line reimplementation).

Finalizer ``mix64`` (the splitmix64 finalizer), all arithmetic mod 2**64::

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

Hash family for MinHash signatures.  Member ``i`` (0-based) of the family
parameterized by a 64-bit ``seed`` uses a per-index key drawn from the
splitmix64 stream::

    key_i  = mix64(seed + (i + 1) * 0x9E3779B97F4A7C15   mod 2**64)
    h_i(f) = mix64(f XOR key_i)

String fingerprints are the first 8 bytes of BLAKE2b of the UTF-8 encoding,
read big-endian (``fingerprint64``).

Band keys fold the ``r`` signature components of a band together with the
band index through the finalizer::

    acc = mix64(0x517CC1B727220A95 XOR (band_index + 1))
    for each component c (in order):  acc = mix64(acc XOR c)
"""

from __future__ import annotations

import hashlib
from typing import Iterable

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX_MULT_1 = 0xBF58476D1CE4E5B9
_MIX_MULT_2 = 0x94D049BB133111EB
BAND_KEY_SALT = 0x517CC1B727220A95


def mix64(z: int) -> int:
    """Splitmix64 finalizer on a Python int, result in [0, 2**64)."""
    z &= MASK64
    z ^= z >> 30
    z = (z * _MIX_MULT_1) & MASK64
    z ^= z >> 27
    z = (z * _MIX_MULT_2) & MASK64
    z ^= z >> 31
    return z


def mix64_array(a: np.ndarray) -> np.ndarray:
    """Vectorized ``mix64`` over a uint64 array (wrapping arithmetic)."""
    z = a.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX_MULT_1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX_MULT_2)
    z ^= z >> np.uint64(31)
    return z


def family_keys(seed: int, k: int) -> np.ndarray:
    """Per-index keys key_0..key_{k-1} of the hash family for ``seed``.

    key_i = mix64(seed + (i+1) * GOLDEN_GAMMA mod 2**64), i.e. the first k
    outputs of a splitmix64 generator started at ``seed``.
    """
    idx = np.arange(1, k + 1, dtype=np.uint64)
    state = np.uint64(seed & MASK64) + idx * np.uint64(GOLDEN_GAMMA)
    return mix64_array(state)


def apply_family(fingerprints: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """h_i(f) for every fingerprint f and family member i.

    Returns an array of shape (len(fingerprints), len(keys)).
    """
    fp = fingerprints.astype(np.uint64, copy=False)
    return mix64_array(fp[:, None] ^ keys[None, :])


def fingerprint64(text: str) -> int:
    """64-bit fingerprint of a string: first 8 bytes of BLAKE2b, big-endian."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def fold_band_key(band_index: int, components: Iterable[int]) -> int:
    """64-bit band key for one LSH band (see module docstring for the formula)."""
    acc = mix64(BAND_KEY_SALT ^ (band_index + 1))
    for c in components:
        acc = mix64(acc ^ int(c))
    return acc
