from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from src.hbf.domain.model import DEFAULT_GAIN, DEFAULT_KEY_SEED, DEFAULT_VALUE_SEED


class Command:
    pass


@dataclass
class BuildIndex(Command):
    path: str
    records: Sequence[Tuple[bytes, bytes]]
    dim: int
    gain: float = DEFAULT_GAIN
    key_seed: int = DEFAULT_KEY_SEED
    value_seed: int = DEFAULT_VALUE_SEED
    normalize: bool = False
    labels: Sequence[bytes] = ()


@dataclass
class InsertRecord(Command):
    path: str
    key: bytes
    value: bytes


@dataclass
class QueryIndex(Command):
    path: str
    key: bytes
    tau: Optional[float] = None
    delta: Optional[float] = None
    top_k: Optional[int] = None
    eps: float = 0.01
    seed: int = 0


@dataclass
class CalibrateIndex(Command):
    path: str
    eps: float
    seed: int
    probe_count: int = 1000
    top_k: int = 2


@dataclass
class AmplifiedQuery(Command):
    paths: List[str]
    key: bytes
    eps: float = 0.01
    seed: int = 0


@dataclass
class RunExperiment(Command):
    kind: str
    config: object
    out: Optional[str] = None
    options: dict = field(default_factory=dict)
