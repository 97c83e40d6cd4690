"""
Vector-symbolic algebra used by the index.

Hypervectors are plain 1-D float64 numpy arrays of length d; a sign
vector is a hypervector whose entries are all exactly +1.0 or -1.0.
Binding is circular convolution, unbinding is circular correlation:

    (a * b)[t] = sum_j a[j] b[(t - j) mod d]
    (a # b)[t] = sum_j a[j] b[(t + j) mod d]

Both have an O(d^2) reference implementation and an O(d log d) radix-2
FFT implementation; `convolve` / `correlate` pick the FFT path whenever
d is a power of two.

"""

import hashlib
import struct
from collections import OrderedDict
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Hashable, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from src.hbf.domain.exceptions import InvalidArgument, UnsupportedDimension

HyperVector = NDArray[np.float64]

KEY_NAMESPACE = b"key"
VALUE_NAMESPACE = b"value"

SIGNS_PER_BLOCK = 64
NAIVE_CHUNK = 256
FFT_RELATIVE_TOLERANCE = 1e-9
MAX_SEED = 0xFFFFFFFFFFFFFFFF

# byte limits of the codebook caches
VECTOR_CACHE_BYTES = 128 * 2**20
MATRIX_CACHE_BYTES = 512 * 2**20


# ----------
# VALIDATION
# ----------
def as_hypervector(values) -> HyperVector:
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1 or vec.size == 0:
        raise InvalidArgument(
            f"hypervector must be a non-empty 1-D array, got shape {vec.shape}"
        )
    if not np.all(np.isfinite(vec)):
        raise InvalidArgument("hypervector entries must be finite")
    return vec


def is_sign_vector(values) -> bool:
    vec = np.asarray(values)
    return vec.ndim == 1 and vec.size > 0 and bool(np.all(np.abs(vec) == 1.0))


def is_power_of_two(d: int) -> bool:
    return d >= 1 and d & (d - 1) == 0


def _check_pair(a, b) -> Tuple[HyperVector, HyperVector]:
    a, b = as_hypervector(a), as_hypervector(b)
    if a.size != b.size:
        raise InvalidArgument(f"dimension mismatch: {a.size} != {b.size}")
    return a, b


def _check_stack(a, b) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim == 0 or b.ndim == 0:
        raise InvalidArgument("hypervectors must have at least one axis")
    if a.shape[-1] != b.shape[-1]:
        raise InvalidArgument(f"dimension mismatch: {a.shape[-1]} != {b.shape[-1]}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidArgument("hypervector entries must be finite")
    return a, b


# --------
# CODEBOOK
# --------
@dataclass(frozen=True)
class Codebook:
    """
    Deterministic pseudorandom map from key bytes to +/-1 vectors.

    Parameters
    ----------
    namespace : bytes
        Family tag, KEY_NAMESPACE or VALUE_NAMESPACE.

    seed : int
        Unsigned 64-bit seed; part of the PRF key, so a new seed gives an
        independent family.

    dim : int
        Vector dimension d >= 2.

    """

    namespace: bytes
    seed: int
    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidArgument(f"codebook dimension must be >= 2, got {self.dim}")
        if not 0 <= self.seed <= MAX_SEED:
            raise InvalidArgument("codebook seed must be an unsigned 64-bit int")

    def vector(self, key: bytes) -> HyperVector:
        return codebook_vector(self, key)

    def matrix(self, keys: Sequence[bytes]) -> NDArray[np.float64]:
        """Rows are the codebook vectors of `keys`, in order."""
        return _codebook_matrix(self, tuple(bytes(k) for k in keys))


class ArrayCache:
    """
    LRU cache of read-only arrays bounded by their total size in bytes.
    The newest entry is always kept, even when it alone exceeds the limit.

    """

    def __init__(self, max_bytes: int):
        self.max_bytes = max_bytes
        self.nbytes = 0
        self._entries = OrderedDict()  # type: OrderedDict[Hashable, np.ndarray]

    def __len__(self):
        return len(self._entries)

    def get(self, key: Hashable, compute: Callable[[], np.ndarray]) -> np.ndarray:
        if key in self._entries:
            self._entries.move_to_end(key)
            return self._entries[key]
        value = compute()
        value.setflags(write=False)
        self._entries[key] = value
        self.nbytes += value.nbytes
        while self.nbytes > self.max_bytes and len(self._entries) > 1:
            _, evicted = self._entries.popitem(last=False)
            self.nbytes -= evicted.nbytes
        return value

    def clear(self):
        self._entries.clear()
        self.nbytes = 0


_vector_cache = ArrayCache(VECTOR_CACHE_BYTES)
_matrix_cache = ArrayCache(MATRIX_CACHE_BYTES)


def clear_codebook_caches():
    _vector_cache.clear()
    _matrix_cache.clear()


def codebook_vector(cb: Codebook, key: bytes) -> HyperVector:
    if not isinstance(key, (bytes, bytearray)) or len(key) == 0:
        raise InvalidArgument("codebook key must be non-empty bytes")
    key = bytes(key)
    return _vector_cache.get(
        (cb.namespace, cb.seed, cb.dim, key),
        lambda: _sign_vector(cb.namespace, cb.seed, cb.dim, key),
    )


def _sign_vector(namespace: bytes, seed: int, dim: int, key: bytes) -> HyperVector:
    # counter-mode PRF: blake2b keyed by (namespace, seed, key), one
    # 64-bit block per counter value, one sign per bit
    prf_key = hashlib.blake2b(
        struct.pack("<I", len(namespace)) + namespace + struct.pack("<Q", seed) + key,
        digest_size=32,
        person=b"hbf-codebook",
    ).digest()
    prf = hashlib.blake2b(key=prf_key, digest_size=SIGNS_PER_BLOCK // 8)
    stream = bytearray()
    for counter in range(-(-dim // SIGNS_PER_BLOCK)):
        block = prf.copy()
        block.update(struct.pack("<Q", counter))
        stream += block.digest()
    bits = np.unpackbits(np.frombuffer(bytes(stream), dtype=np.uint8), bitorder="little")
    return 2.0 * bits[:dim].astype(np.float64) - 1.0


def _codebook_matrix(cb: Codebook, keys: Tuple[bytes, ...]) -> NDArray[np.float64]:
    def stack():
        if not keys:
            return np.empty((0, cb.dim))
        return np.stack([codebook_vector(cb, key) for key in keys])

    return _matrix_cache.get((cb, keys), stack)


# -----------
# RADIX-2 FFT
# -----------
@lru_cache(maxsize=32)
def _bit_reversal(d: int) -> np.ndarray:
    bits = d.bit_length() - 1
    idx = np.arange(d)
    rev = np.zeros(d, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=128)
def _twiddles(size: int, inverse: bool) -> np.ndarray:
    sign = 1.0 if inverse else -1.0
    tw = np.exp(sign * 2j * np.pi * np.arange(size // 2) / size)
    tw.setflags(write=False)
    return tw


def fft(x, inverse: bool = False) -> NDArray[np.complex128]:
    """
    Iterative radix-2 decimation-in-time DFT along the last axis.

    Forward uses exp(-2*pi*i*f*t/d); the inverse carries the 1/d factor.
    Raises UnsupportedDimension unless the last axis is a power of two.

    """
    x = np.asarray(x, dtype=np.complex128)
    d = x.shape[-1]
    if not is_power_of_two(d):
        raise UnsupportedDimension(f"radix-2 FFT needs a power-of-two length, got {d}")
    lead = x.shape[:-1]
    out = x[..., _bit_reversal(d)]
    size = 2
    while size <= d:
        half = size // 2
        blocks = out.reshape(*lead, d // size, size)
        even = blocks[..., :half]
        odd = blocks[..., half:] * _twiddles(size, inverse)
        out = np.concatenate((even + odd, even - odd), axis=-1).reshape(*lead, d)
        size *= 2
    if inverse:
        out = out / d
    return out


def ifft(x) -> NDArray[np.complex128]:
    return fft(x, inverse=True)


# ---------------------------
# CONVOLUTION AND CORRELATION
# ---------------------------
def convolve_naive(a, b) -> HyperVector:
    """Reference O(d^2) evaluation of the defining sum."""
    a, b = _check_pair(a, b)
    d = a.size
    j = np.arange(d)
    out = np.empty(d)
    for start in range(0, d, NAIVE_CHUNK):
        t = np.arange(start, min(start + NAIVE_CHUNK, d))
        out[t] = b[(t[:, None] - j[None, :]) % d] @ a
    return out


def correlate_naive(a, b) -> HyperVector:
    a, b = _check_pair(a, b)
    d = a.size
    j = np.arange(d)
    out = np.empty(d)
    for start in range(0, d, NAIVE_CHUNK):
        t = np.arange(start, min(start + NAIVE_CHUNK, d))
        out[t] = b[(t[:, None] + j[None, :]) % d] @ a
    return out


def convolve_fft(a, b) -> np.ndarray:
    """
    Binding via F(a * b) = F(a) . F(b). Accepts stacks of shape (..., d)
    that broadcast against each other, so many pairs bind in one call.

    """
    a, b = _check_stack(a, b)
    return ifft(fft(a) * fft(b)).real


def correlate_fft(a, b) -> np.ndarray:
    """Unbinding via F(a # b) = conj(F(a)) . F(b)."""
    a, b = _check_stack(a, b)
    return ifft(np.conj(fft(a)) * fft(b)).real


def _dispatch(a, b, fast, naive) -> np.ndarray:
    a, b = _check_stack(a, b)
    if is_power_of_two(a.shape[-1]):
        return fast(a, b)
    if a.ndim == 1 and b.ndim == 1:
        return naive(a, b)
    a, b = np.broadcast_arrays(a, b)
    pairs = zip(a.reshape(-1, a.shape[-1]), b.reshape(-1, b.shape[-1]))
    rows = [naive(x, y) for x, y in pairs]
    return np.stack(rows).reshape(a.shape)


def convolve(a, b) -> np.ndarray:
    return _dispatch(a, b, convolve_fft, convolve_naive)


def correlate(a, b) -> np.ndarray:
    return _dispatch(a, b, correlate_fft, correlate_naive)


def fft_tolerance(a, b) -> float:
    """Elementwise FFT-vs-naive tolerance: 1e-9 * d * max|a| * max|b|."""
    a, b = _check_pair(a, b)
    scale = float(np.max(np.abs(a))) * float(np.max(np.abs(b)))
    return FFT_RELATIVE_TOLERANCE * a.size * scale


# ------------
# SIMILARITIES
# ------------
def inner_product(a, b) -> float:
    a, b = _check_pair(a, b)
    return float(np.dot(a, b))


def cosine(a, b) -> float:
    a, b = _check_pair(a, b)
    norm_a, norm_b = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise InvalidArgument("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(a, b) / (norm_a * norm_b), -1.0, 1.0))
