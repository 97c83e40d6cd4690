import abc
import math
from pathlib import Path
from typing import Dict, Optional, Set

from src.hbf import config
from src.hbf.domain import model
from src.hbf.adapters import index_file, results

LABELS_SUFFIX = ".labels"
DECODER_SUFFIX = ".decoder.toml"


def labels_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + LABELS_SUFFIX)


def decoder_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + DECODER_SUFFIX)


def _toml_float(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def render_decoder(decoder: model.DecoderConfig) -> str:
    return (
        "[decoder]\n"
        f"tau = {_toml_float(decoder.tau)}\n"
        f"delta = {_toml_float(decoder.delta)}\n"
        f"top_k = {decoder.top_k}\n"
    )


def parse_decoder(path) -> model.DecoderConfig:
    section = config.load_manifest(path).get("decoder", {})
    return model.DecoderConfig(
        tau=float(section["tau"]),
        delta=float(section.get("delta", 0.0)),
        top_k=int(section.get("top_k", model.DEFAULT_TOP_K)),
    )


class AbstractIndexRepository(abc.ABC):
    def __init__(self):
        self.seen = set()  # type: Set[model.Index]

    def add(self, index: model.Index):
        self._add(index)
        self.seen.add(index)

    def get(self, path) -> Optional[model.Index]:
        index = self._get(str(path))
        if index:
            self.seen.add(index)
        return index

    @abc.abstractmethod
    def _add(self, index: model.Index):
        raise NotImplementedError

    @abc.abstractmethod
    def _get(self, path: str) -> Optional[model.Index]:
        raise NotImplementedError

    @abc.abstractmethod
    def save(self, index: model.Index):
        raise NotImplementedError


class FileIndexRepository(AbstractIndexRepository):
    """
    Indexes on disk: the HBF1 memory at `path`, its label universe in
    `path.labels` and an optional calibrated decoder in `path.decoder.toml`.

    """

    def __init__(self):
        super().__init__()
        self._loaded = {}  # type: Dict[str, model.Index]

    def _add(self, index: model.Index):
        self._loaded[index.path] = index

    def _get(self, path: str) -> Optional[model.Index]:
        if path in self._loaded:
            return self._loaded[path]
        if not Path(path).exists():
            return None
        memory = index_file.load_memory(path)
        labels = results.read_labels(labels_path(path)) if labels_path(path).exists() else []
        decoder = parse_decoder(decoder_path(path)) if decoder_path(path).exists() else None
        index = model.Index(path, memory, labels, decoder)
        self._loaded[path] = index
        return index

    def save(self, index: model.Index):
        # sidecars first: a failed save leaves the old memory in place
        results.write_labels(labels_path(index.path), index.labels)
        sidecar = decoder_path(index.path)
        if index.decoder is not None:
            rendered = render_decoder(index.decoder).encode("utf-8")
            index_file.write_atomic(sidecar, rendered)
        elif sidecar.exists():
            sidecar.unlink()
        index_file.save_memory(index.memory, index.path)


# for mocks during tests
class FakeIndexRepository(AbstractIndexRepository):
    def __init__(self, indexes=()):
        super().__init__()
        self._indexes = {index.path: index for index in indexes}
        self.saved = []  # type: list

    def _add(self, index: model.Index):
        self._indexes[index.path] = index

    def _get(self, path: str) -> Optional[model.Index]:
        return self._indexes.get(path)

    def save(self, index: model.Index):
        self.saved.append(index.path)

    @staticmethod
    def for_index(path, records, dim, labels=None):
        memory = model.build(records, dim)
        labels = labels if labels is not None else sorted({value for _, value in records})
        return FakeIndexRepository([model.Index(path, memory, labels)])
