from dataclasses import dataclass


class Event:
    pass


@dataclass
class IndexBuilt(Event):
    path: str
    dim: int
    item_count: int
    label_count: int


@dataclass
class RecordInserted(Event):
    path: str
    key: bytes
    value: bytes
    item_count: int


@dataclass
class DecoderCalibrated(Event):
    path: str
    tau: float
    delta: float
    top_k: int
