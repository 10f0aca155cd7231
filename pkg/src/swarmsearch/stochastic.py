"""Seeded random streams, Box-Muller Gaussians and Levy-stable variates.

Every stream is a Philox counter-based generator keyed by a 64-bit seed and
a tuple of labels, so each trial, robot and scenario owns its own
reproducible sequence. Uniforms are taken from the top 53 bits of each raw
64-bit word and shifted by half an ulp, which keeps them strictly inside
(0, 1).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Hashable

import numpy as np

from .errors import ParameterDomainError

_MASK64 = (1 << 64) - 1
_INV_2_53 = 2.0 ** -53
_TWO_PI = 2.0 * math.pi


def _label_words(label: Hashable) -> tuple[int, int]:
    digest = hashlib.blake2b(repr(label).encode("utf-8"), digest_size=8).digest()
    word = int.from_bytes(digest, "little")
    return word & 0xFFFFFFFF, word >> 32


class RngStream:
    """Deterministic, splittable uniform source.

    Two streams built from the same ``seed`` and ``labels`` produce the same
    sequence on any platform. ``child`` derives an independent stream; a
    stream must not be shared between concurrent users.
    """

    __slots__ = ("seed", "labels", "_bitgen", "_raw")

    def __init__(self, seed: int, labels: tuple = ()):
        if not 0 <= int(seed) <= _MASK64:
            raise ParameterDomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.labels = tuple(labels)
        key: list[int] = []
        for label in self.labels:
            key.extend(_label_words(label))
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=tuple(key))
        self._bitgen = np.random.Philox(seq)
        self._raw = self._bitgen.random_raw

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, labels={self.labels!r})"

    def child(self, *labels: Hashable) -> "RngStream":
        """Independent stream for ``labels``; does not advance this one."""
        return RngStream(self.seed, self.labels + tuple(labels))

    def derive_seed(self, *labels: Hashable) -> int:
        """64-bit seed derived from this stream's identity plus ``labels``."""
        return int(self.child(*labels)._raw())

    def uniform(self) -> float:
        return ((self._raw() >> 11) + 0.5) * _INV_2_53

    def uniforms(self, size: int) -> np.ndarray:
        raw = self._raw(int(size))
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53

    def state(self) -> dict:
        return self._bitgen.state


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Per-trial seed as a hash of the master seed and the trial index."""
    return RngStream(master_seed).derive_seed("trial", int(trial_index))


@dataclass(frozen=True)
class LevyParams:
    """Parameters of the Gaussian-ratio Levy generator.

    ``alpha`` is the stability exponent, ``gamma`` the scale factor and
    ``n`` the number of ratio variates averaged per sample.
    """

    alpha: float = 2.0
    gamma: float = 1.0
    n: int = 100

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ParameterDomainError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not self.gamma > 0.0:
            raise ParameterDomainError(f"gamma must be positive, got {self.gamma}")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterDomainError(f"n must be a positive integer, got {self.n}")


def sample_uniform(rng: RngStream) -> float:
    """One uniform variate in the open interval (0, 1)."""
    return rng.uniform()


def box_muller(u1: float, u2: float) -> float:
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


def sample_gaussian(rng: RngStream) -> float:
    """Standard normal variate from two fresh uniforms (cosine branch only)."""
    u1 = rng.uniform()
    u2 = rng.uniform()
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)


def sample_gaussians(rng: RngStream, size: int) -> np.ndarray:
    """Vectorised ``sample_gaussian``; consumes uniforms in the same order."""
    u = rng.uniforms(2 * int(size)).reshape(-1, 2)
    return np.sqrt(-2.0 * np.log(u[:, 0])) * np.cos(_TWO_PI * u[:, 1])


def _nonzero_gaussians(rng: RngStream, size: int) -> np.ndarray:
    b = sample_gaussians(rng, size)
    zero = b == 0.0
    while zero.any():
        b[zero] = sample_gaussians(rng, int(zero.sum()))
        zero = b == 0.0
    return b


def sample_levy_array(params: LevyParams, rng: RngStream, size: int) -> np.ndarray:
    """``size`` Levy variates.

    Each variate averages ``n`` ratios ``a / |b|**(1/alpha)`` of independent
    standard normals, normalises the sum by ``n**(1/alpha)`` and rescales by
    ``gamma**(1/alpha)``. No extra sigma normalising constant is applied,
    so absolute scale is set through ``gamma`` alone.
    """
    size = int(size)
    n = int(params.n)
    inv_alpha = 1.0 / params.alpha
    a = sample_gaussians(rng, size * n).reshape(size, n)
    b = _nonzero_gaussians(rng, size * n).reshape(size, n)
    v = a / np.abs(b) ** inv_alpha
    z = v.sum(axis=1) / n ** inv_alpha
    return z * params.gamma ** inv_alpha


def sample_levy(params: LevyParams, rng: RngStream) -> float:
    """One Levy variate; symmetric about zero."""
    return float(sample_levy_array(params, rng, 1)[0])


def levy_samples_chunked(params: LevyParams, rng: RngStream, size: int,
                         chunk: int = 20_000) -> np.ndarray:
    """Large sample counts without materialising all Gaussians at once."""
    out = np.empty(int(size))
    for start in range(0, int(size), chunk):
        stop = min(start + chunk, int(size))
        out[start:stop] = sample_levy_array(params, rng, stop - start)
    return out
