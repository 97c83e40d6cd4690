"""
Noise channels on memories and query keys.

Memory channels act on the superposed real vector M, query channels on a
key embedding. Every channel draws from numpy's PCG64 generator seeded
explicitly, so a fixed (input, level, seed) always gives the same output.

"""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from src.hbf.domain.exceptions import InvalidArgument
from src.hbf.domain.hypervector import HyperVector, as_hypervector
from src.hbf.domain.model import HbfMemory


class NoiseKind(enum.Enum):
    MEMORY_FLIP = "mem-flip"
    MEMORY_GAUSS = "mem-gauss"
    KEY_HAMMING = "key-hamming"
    KEY_GAUSS = "key-gauss"

    @property
    def acts_on_memory(self) -> bool:
        return self in (NoiseKind.MEMORY_FLIP, NoiseKind.MEMORY_GAUSS)


@dataclass(frozen=True)
class NoiseSpec:
    """
    One noise channel: its kind, level (p_e, sigma_M, H or sigma_Q) and
    the seed of its random stream.

    """

    kind: NoiseKind
    level: float
    rng_seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.level) or self.level < 0:
            raise InvalidArgument(f"{self.kind.value} level must be finite and >= 0")
        if self.kind is NoiseKind.MEMORY_FLIP and self.level >= 0.5:
            raise InvalidArgument(f"flip probability must be < 0.5, got {self.level}")
        if self.kind is NoiseKind.KEY_HAMMING and self.level != int(self.level):
            raise InvalidArgument(f"Hamming distance must be an integer, got {self.level}")

    @classmethod
    def parse(cls, text: str, rng_seed: int = 0) -> "NoiseSpec":
        """Parse the CLI/manifest form `kind:level`, e.g. `key-hamming:500`."""
        name, sep, level = text.partition(":")
        if not sep:
            raise InvalidArgument(f"noise must look like kind:level, got {text!r}")
        try:
            kind = NoiseKind(name.strip())
            value = float(level)
        except ValueError:
            raise InvalidArgument(f"unrecognised noise {text!r}") from None
        return cls(kind, value, rng_seed)

    def __str__(self):
        level = int(self.level) if self.kind is NoiseKind.KEY_HAMMING else self.level
        return f"{self.kind.value}:{level}"

    def with_seed(self, rng_seed: int) -> "NoiseSpec":
        return replace(self, rng_seed=rng_seed)

    def apply_to_memory(self, mem: HbfMemory) -> HbfMemory:
        if self.kind is NoiseKind.MEMORY_FLIP:
            return corrupt_memory_flip(mem, self.level, self.rng_seed)
        if self.kind is NoiseKind.MEMORY_GAUSS:
            return corrupt_memory_gauss(mem, self.level, self.rng_seed)
        return mem

    def apply_to_key(self, key_vector: HyperVector) -> HyperVector:
        if self.kind is NoiseKind.KEY_HAMMING:
            return perturb_key_hamming(key_vector, int(self.level), self.rng_seed)
        if self.kind is NoiseKind.KEY_GAUSS:
            return perturb_key_gauss(key_vector, self.level, self.rng_seed)
        return key_vector


def corrupt_memory_flip(mem: HbfMemory, p_e: float, seed: int) -> HbfMemory:
    """Negate each coordinate of M independently with probability p_e."""
    if not 0 <= p_e < 0.5:
        raise InvalidArgument(f"flip probability must lie in [0, 0.5), got {p_e}")
    rng = np.random.default_rng(seed)
    flips = rng.random(mem.dim) < p_e
    return mem.with_vector(np.where(flips, -mem.vector, mem.vector))


def corrupt_memory_gauss(mem: HbfMemory, sigma_m: float, seed: int) -> HbfMemory:
    if not (math.isfinite(sigma_m) and sigma_m >= 0):
        raise InvalidArgument(f"sigma_M must be finite and >= 0, got {sigma_m}")
    if sigma_m == 0:
        return mem
    rng = np.random.default_rng(seed)
    return mem.with_vector(mem.vector + rng.normal(0.0, sigma_m, mem.dim))


def perturb_key_hamming(key_vector, hamming: int, seed: int) -> HyperVector:
    """
    Negate exactly `hamming` distinct, uniformly chosen coordinates; for a
    sign vector k the result k' satisfies <k, k'> = d - 2H exactly.

    """
    key_vector = as_hypervector(key_vector)
    d = key_vector.size
    if not 0 <= hamming <= d:
        raise InvalidArgument(f"Hamming distance must lie in [0, {d}], got {hamming}")
    rng = np.random.default_rng(seed)
    out = key_vector.copy()
    out[rng.choice(d, size=hamming, replace=False)] *= -1.0
    return out


def perturb_key_gauss(key_vector, sigma_q: float, seed: int) -> HyperVector:
    key_vector = as_hypervector(key_vector)
    if not (math.isfinite(sigma_q) and sigma_q >= 0):
        raise InvalidArgument(f"sigma_Q must be finite and >= 0, got {sigma_q}")
    if sigma_q == 0:
        return key_vector.copy()
    rng = np.random.default_rng(seed)
    return key_vector + rng.normal(0.0, sigma_q, key_vector.size)


def apply_memory_noise(mem: HbfMemory, specs) -> HbfMemory:
    for spec in specs:
        mem = spec.apply_to_memory(mem)
    return mem


def apply_key_noise(key_vector: HyperVector, specs) -> HyperVector:
    for spec in specs:
        key_vector = spec.apply_to_key(key_vector)
    return key_vector

