"""
Text formats at the edges: key/value record TSVs, label lists and
result CSVs (header row, RFC 4180 quoting, CRLF line endings).

"""

import abc
import csv
import io
import math
import os
from pathlib import Path
from typing import Iterable, Iterator, List, Mapping, Sequence, Tuple, Union

from src.hbf.adapters import index_file
from src.hbf.domain.exceptions import InvalidArgument

PathLike = Union[str, os.PathLike]


def _decoded_lines(path: Path) -> Iterator[Tuple[int, str]]:
    # splits on LF only; a CR is stripped solely as part of a CRLF ending
    with path.open("rb") as f:
        for lineno, raw in enumerate(f, start=1):
            raw = raw[:-1] if raw.endswith(b"\n") else raw
            raw = raw[:-1] if raw.endswith(b"\r") else raw
            try:
                yield lineno, raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise InvalidArgument(
                    f"{path}:{lineno}: not valid UTF-8 ({e.reason} at byte {e.start})"
                ) from e


def read_records(path: PathLike) -> List[Tuple[bytes, bytes]]:
    """Parse `key<TAB>value` lines; empty lines are skipped."""
    path = Path(path)
    records = []
    seen = {}
    for lineno, line in _decoded_lines(path):
        if not line:
            continue
        key, sep, value = line.partition("\t")
        if not sep or not key or not value or "\t" in value:
            raise InvalidArgument(f"{path}:{lineno}: expected key<TAB>value, got {line!r}")
        if "\r" in line:
            raise InvalidArgument(f"{path}:{lineno}: stray carriage return in {line!r}")
        if key in seen:
            raise InvalidArgument(
                f"{path}:{lineno}: duplicate key {key!r} (first on line {seen[key]})"
            )
        seen[key] = lineno
        records.append((key.encode("utf-8"), value.encode("utf-8")))
    return records


def read_labels(path: PathLike) -> List[bytes]:
    """One label per line, kept verbatim; only empty lines are skipped."""
    path = Path(path)
    return [line.encode("utf-8") for _, line in _decoded_lines(path) if line]


def write_labels(path: PathLike, labels: Sequence[bytes]):
    index_file.write_atomic(path, b"".join(bytes(label) + b"\n" for label in labels))


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        # repr round-trips exactly; inf and nan stay readable
        return repr(float(value)) if math.isfinite(value) else str(float(value))
    if isinstance(value, bytes):
        return value.decode("utf-8", errors="backslashreplace")
    return str(value)


def render_csv(columns: Sequence[str], rows: Iterable[Mapping]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(col)) for col in columns])
    return buf.getvalue()


def write_csv(path: PathLike, columns: Sequence[str], rows: Iterable[Mapping]):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write(render_csv(columns, rows))


class AbstractReportStore(abc.ABC):
    """Result tables staged by a unit of work and written on commit."""

    def __init__(self):
        self.pending = []  # type: List[Tuple[str, Sequence[str], List[Mapping]]]

    def add(self, path: PathLike, columns: Sequence[str], rows: Iterable[Mapping]):
        self.pending.append((str(path), tuple(columns), list(rows)))

    def flush(self):
        while self.pending:
            self._write(*self.pending.pop(0))

    def discard(self):
        self.pending.clear()

    @abc.abstractmethod
    def _write(self, path: str, columns: Sequence[str], rows: List[Mapping]):
        raise NotImplementedError


class CsvReportStore(AbstractReportStore):
    def _write(self, path, columns, rows):
        write_csv(path, columns, rows)


# for mocks during tests
class FakeReportStore(AbstractReportStore):
    def __init__(self):
        super().__init__()
        self.written = {}  # type: dict

    def _write(self, path, columns, rows):
        self.written[path] = render_csv(columns, rows)
