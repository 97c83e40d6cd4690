"""
Domain model for the holographic index.

A memory is the superposition M = sum_i rho * (k_{x_i} * v_{y_i}) of
key/value bindings. Queries unbind with the key, z = k # M, score z
against every value vector and run the top-K margin decoder.

"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.utils.logger import log
from src.hbf.domain import events
from src.hbf.domain.exceptions import (
    DuplicateKey,
    DuplicateLabel,
    EmptyMemory,
    InvalidArgument,
    UnsupportedDimension,
)
from src.hbf.domain.hypervector import (
    KEY_NAMESPACE,
    MAX_SEED,
    VALUE_NAMESPACE,
    Codebook,
    HyperVector,
    as_hypervector,
    convolve,
    correlate,
)

DEFAULT_GAIN = 1.0
DEFAULT_KEY_SEED = 1
DEFAULT_VALUE_SEED = 2
DEFAULT_TOP_K = 2
BUILD_CHUNK = 512

Record = Tuple[bytes, bytes]
Score = Tuple[bytes, float]


# --------------
# DOMAIN OBJECTS
# --------------
@dataclass(frozen=True, eq=False)
class HbfMemory:
    """
    The superposed memory vector and the parameters needed to query it.

    Parameters
    ----------
    vector : array of d floats
        The memory M. Stored as a read-only copy.

    gain : float
        Per-binding gain rho > 0 applied by build and insert.

    item_count : int
        Number of build/insert contributions.

    key_seed, value_seed : int
        Seeds of the key and value codebooks.

    """

    vector: HyperVector
    gain: float = DEFAULT_GAIN
    item_count: int = 0
    key_seed: int = DEFAULT_KEY_SEED
    value_seed: int = DEFAULT_VALUE_SEED

    def __post_init__(self):
        vec = as_hypervector(self.vector).copy()
        if vec.size < 2:
            raise UnsupportedDimension(f"memory dimension must be >= 2, got {vec.size}")
        if not (math.isfinite(self.gain) and self.gain > 0):
            raise InvalidArgument(f"gain must be finite and > 0, got {self.gain}")
        if self.item_count < 0:
            raise InvalidArgument("item_count must be non-negative")
        for seed in (self.key_seed, self.value_seed):
            if not 0 <= seed <= MAX_SEED:
                raise InvalidArgument("codebook seeds must be unsigned 64-bit ints")
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    # NOTE: equality is bitwise on the vector and exact on the metadata,
    # which is what persistence round-trips promise
    def __eq__(self, other):
        if not isinstance(other, HbfMemory):
            return False
        return (
            self.gain == other.gain
            and self.item_count == other.item_count
            and self.key_seed == other.key_seed
            and self.value_seed == other.value_seed
            and self.vector.tobytes() == other.vector.tobytes()
        )

    __hash__ = None

    @classmethod
    def zeros(
        cls,
        dim: int,
        gain: float = DEFAULT_GAIN,
        key_seed: int = DEFAULT_KEY_SEED,
        value_seed: int = DEFAULT_VALUE_SEED,
    ) -> "HbfMemory":
        if dim < 2:
            raise UnsupportedDimension(f"memory dimension must be >= 2, got {dim}")
        return cls(np.zeros(dim), gain, 0, key_seed, value_seed)

    @property
    def dim(self) -> int:
        return self.vector.size

    @property
    def key_codebook(self) -> Codebook:
        return Codebook(KEY_NAMESPACE, self.key_seed, self.dim)

    @property
    def value_codebook(self) -> Codebook:
        return Codebook(VALUE_NAMESPACE, self.value_seed, self.dim)

    def with_vector(self, vector) -> "HbfMemory":
        return HbfMemory(vector, self.gain, self.item_count, self.key_seed, self.value_seed)


@dataclass(frozen=True)
class DecoderConfig:
    """
    Thresholds of the top-K margin decoder: accept the best label only if
    its score s1 >= tau and s1 - s2 >= delta.

    tau may be +inf / -inf, used as "never" / "always" sentinels.
    """

    tau: float
    delta: float = 0.0
    top_k: int = DEFAULT_TOP_K

    def __post_init__(self):
        if math.isnan(self.tau):
            raise InvalidArgument("tau must not be NaN")
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise InvalidArgument(f"delta must be finite and >= 0, got {self.delta}")
        if self.top_k < 2:
            raise InvalidArgument(f"top_k must be >= 2, got {self.top_k}")


@dataclass(frozen=True)
class Hit:
    label: bytes
    best_score: float
    runner_up: float
    top_k: Tuple[Score, ...]


@dataclass(frozen=True)
class Reject:
    best_score: float
    runner_up: float
    top_k: Tuple[Score, ...]


DecodeOutcome = Union[Hit, Reject]

NOTHING_STORED = Reject(best_score=0.0, runner_up=0.0, top_k=())


# ----------
# OPERATIONS
# ----------
def _check_gain(gain: float):
    if not (math.isfinite(gain) and gain > 0):
        raise InvalidArgument(f"gain must be finite and > 0, got {gain}")


def _unique_keys(records: Iterable[Record]) -> List[Record]:
    records = [(bytes(key), bytes(value)) for key, value in records]
    seen = set()
    for key, _ in records:
        if key in seen:
            raise DuplicateKey(f"duplicate key {key!r}")
        seen.add(key)
    return records


def bind_pairs(
    records: Sequence[Record], key_codebook: Codebook, value_codebook: Codebook
) -> np.ndarray:
    """Bound vectors k_x * v_y for each record, one row per record."""
    keys = np.stack([key_codebook.vector(key) for key, _ in records])
    values = np.stack([value_codebook.vector(value) for _, value in records])
    return convolve(keys, values)


def build(
    records: Iterable[Record],
    dim: int,
    gain: float = DEFAULT_GAIN,
    key_seed: int = DEFAULT_KEY_SEED,
    value_seed: int = DEFAULT_VALUE_SEED,
    normalize: bool = False,
) -> HbfMemory:
    """
    Batch construction M = sum rho * (k * v).

    Contributions are summed sequentially in ascending key-byte order, so
    the result is bit-identical for any ordering of `records`. With
    `normalize`, the stored gain is rho / sqrt(n).

    """
    if dim < 2:
        raise UnsupportedDimension(f"memory dimension must be >= 2, got {dim}")
    _check_gain(gain)
    ordered = sorted(_unique_keys(records))
    if normalize and ordered:
        gain = gain / math.sqrt(len(ordered))

    memory = HbfMemory.zeros(dim, gain, key_seed, value_seed)
    total = np.zeros(dim)
    for start in range(0, len(ordered), BUILD_CHUNK):
        chunk = ordered[start : start + BUILD_CHUNK]
        for row in bind_pairs(chunk, memory.key_codebook, memory.value_codebook):
            total += gain * row

    log.debug("built memory: d=%s n=%s gain=%s", dim, len(ordered), gain)
    return HbfMemory(total, gain, len(ordered), key_seed, value_seed)


def insert(mem: HbfMemory, key: bytes, value: bytes) -> HbfMemory:
    bound = convolve(mem.key_codebook.vector(key), mem.value_codebook.vector(value))
    return HbfMemory(
        mem.vector + mem.gain * bound,
        mem.gain,
        mem.item_count + 1,
        mem.key_seed,
        mem.value_seed,
    )


def correlate_vector(mem: HbfMemory, key_vector) -> HyperVector:
    """z = k # M for an arbitrary (possibly perturbed) key embedding."""
    key_vector = as_hypervector(key_vector)
    if key_vector.size != mem.dim:
        raise InvalidArgument(
            f"dimension mismatch: key has {key_vector.size}, memory has {mem.dim}"
        )
    return correlate(key_vector, mem.vector)


def correlate_query(mem: HbfMemory, key: bytes) -> HyperVector:
    return correlate_vector(mem, mem.key_codebook.vector(key))


def check_label(label: bytes) -> bytes:
    """Labels are stored one per line, so they must not contain line breaks."""
    label = bytes(label)
    if not label:
        raise InvalidArgument("label must be non-empty")
    if b"\n" in label or b"\r" in label:
        raise InvalidArgument(f"label {label!r} contains a line break")
    return label


def _check_labels(labels: Sequence[bytes]) -> Tuple[bytes, ...]:
    labels = tuple(bytes(label) for label in labels)
    if not labels:
        raise InvalidArgument("label universe must not be empty")
    if len(set(labels)) != len(labels):
        raise DuplicateLabel("label universe contains duplicates")
    return labels


@lru_cache(maxsize=16)
def _tie_ranks(labels: Tuple[bytes, ...]) -> np.ndarray:
    ranks = np.empty(len(labels), dtype=np.intp)
    ranks[sorted(range(len(labels)), key=labels.__getitem__)] = np.arange(len(labels))
    return ranks


def score_codebook(z, labels: Sequence[bytes], codebook: Codebook) -> List[Score]:
    """
    Scores <z, v_w> for every label w, sorted by score descending with
    ties broken by ascending label bytes.

    """
    labels = _check_labels(labels)
    z = as_hypervector(z)
    if z.size != codebook.dim:
        raise InvalidArgument(
            f"dimension mismatch: z has {z.size}, codebook has {codebook.dim}"
        )
    scores = codebook.matrix(labels) @ z
    order = np.lexsort((_tie_ranks(labels), -scores))
    return [(labels[i], float(scores[i])) for i in order]


def decide(scores: Sequence[Score], cfg: DecoderConfig) -> DecodeOutcome:
    """Margin rule over scores already sorted by score_codebook."""
    if len(scores) < cfg.top_k:
        raise InvalidArgument(f"need at least top_k={cfg.top_k} labels, got {len(scores)}")
    top = tuple(scores[: cfg.top_k])
    (best, s1), (_, s2) = top[0], top[1]
    if s1 >= cfg.tau and s1 - s2 >= cfg.delta:
        return Hit(best, s1, s2, top)
    return Reject(s1, s2, top)


def decode_vector(
    mem: HbfMemory, key_vector, cfg: DecoderConfig, labels: Sequence[bytes]
) -> DecodeOutcome:
    if len(labels) < cfg.top_k:
        raise InvalidArgument(f"need at least top_k={cfg.top_k} labels, got {len(labels)}")
    z = correlate_vector(mem, key_vector)
    return decide(score_codebook(z, labels, mem.value_codebook), cfg)


def decode(
    mem: HbfMemory, key: bytes, cfg: DecoderConfig, labels: Sequence[bytes]
) -> DecodeOutcome:
    return decode_vector(mem, mem.key_codebook.vector(key), cfg, labels)


def renormalize(mem: HbfMemory, new_gain: float) -> HbfMemory:
    _check_gain(new_gain)
    if mem.item_count == 0:
        raise EmptyMemory("cannot renormalize a memory with no items")
    return HbfMemory(
        mem.vector * (new_gain / mem.gain),
        new_gain,
        mem.item_count,
        mem.key_seed,
        mem.value_seed,
    )


# ---------
# AGGREGATE
# ---------
class Index:
    """
    A persisted memory together with its label universe and (optionally)
    a calibrated decoder. This is the unit the repository loads and saves.

    """

    # NOTE: an index is an entity identified by its path
    def __eq__(self, other):
        if not isinstance(other, Index):
            return False
        return other.path == self.path

    def __hash__(self):
        return hash(self.path)

    def __init__(
        self,
        path: str,
        memory: HbfMemory,
        labels: Optional[Sequence[bytes]] = None,
        decoder: Optional[DecoderConfig] = None,
        version_number: int = 0,
    ):
        self.path = path
        self.memory = memory
        self.labels = [check_label(label) for label in labels or []]
        self.decoder = decoder
        self.version_number = version_number
        self.events = []  # type: List[events.Event]

    @property
    def is_empty(self) -> bool:
        return self.memory.item_count == 0

    def add_label(self, label: bytes):
        label = check_label(label)
        if label not in self.labels:
            self.labels.append(label)

    def insert(self, key: bytes, value: bytes):
        value = check_label(value)
        self.memory = insert(self.memory, key, value)
        self.add_label(value)
        self.version_number += 1
        self.events.append(
            events.RecordInserted(
                path=self.path, key=key, value=value, item_count=self.memory.item_count
            )
        )

    def calibrate(self, decoder: DecoderConfig):
        self.decoder = decoder
        self.version_number += 1
        self.events.append(
            events.DecoderCalibrated(
                path=self.path, tau=decoder.tau, delta=decoder.delta, top_k=decoder.top_k
            )
        )

    def query(self, key: bytes, decoder: DecoderConfig) -> DecodeOutcome:
        if self.is_empty:
            return NOTHING_STORED
        return decode(self.memory, key, decoder, self.labels)
