"""
Binary persistence of memories in the HBF1 format.

Layout, all little-endian:

    magic      4 bytes  b"HBF1"
    version    u32      1
    dim        u64
    gain       f64
    item_count u64
    key_seed   u64
    value_seed u64
    vector     dim * f64

"""

import os
import struct
from pathlib import Path
from typing import Union

import numpy as np

from src.utils.logger import log
from src.hbf.domain.exceptions import HbfError
from src.hbf.domain.model import HbfMemory

MAGIC = b"HBF1"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sIQdQQQ")

PathLike = Union[str, os.PathLike]


# -----------------
# FORMAT EXCEPTIONS
# -----------------
class IndexFormatError(HbfError):
    pass


class BadMagic(IndexFormatError):
    pass


class VersionMismatch(IndexFormatError):
    pass


class TruncatedFile(IndexFormatError):
    pass


def encode_memory(mem: HbfMemory) -> bytes:
    header = HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        mem.dim,
        mem.gain,
        mem.item_count,
        mem.key_seed,
        mem.value_seed,
    )
    return header + mem.vector.astype("<f8").tobytes()


def decode_memory(raw: bytes, source: str = "<bytes>") -> HbfMemory:
    if raw[: len(MAGIC)] != MAGIC:
        if len(raw) < len(MAGIC) and MAGIC.startswith(raw):
            raise TruncatedFile(f"{source}: file ends inside the magic number")
        raise BadMagic(f"{source}: not an HBF1 index (magic {raw[:4]!r})")
    if len(raw) >= 8:
        (version,) = struct.unpack_from("<I", raw, 4)
        if version != FORMAT_VERSION:
            raise VersionMismatch(
                f"{source}: format version {version}, expected {FORMAT_VERSION}"
            )
    if len(raw) < HEADER.size:
        raise TruncatedFile(f"{source}: header needs {HEADER.size} bytes, got {len(raw)}")

    _, _, dim, gain, item_count, key_seed, value_seed = HEADER.unpack_from(raw)
    expected = HEADER.size + 8 * dim
    if len(raw) < expected:
        raise TruncatedFile(f"{source}: vector needs {expected} bytes, got {len(raw)}")
    if len(raw) > expected:
        raise IndexFormatError(f"{source}: {len(raw) - expected} trailing bytes")

    vector = np.frombuffer(raw, dtype="<f8", count=dim, offset=HEADER.size)
    try:
        return HbfMemory(vector.astype(np.float64), gain, item_count, key_seed, value_seed)
    except HbfError as e:
        raise IndexFormatError(f"{source}: {e}") from e


def write_atomic(path: PathLike, data: bytes):
    """Readers see either the old file or the complete new one."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_bytes(data)
        os.replace(tmp, path)
    except OSError:
        tmp.unlink(missing_ok=True)
        raise


def save_memory(mem: HbfMemory, path: PathLike):
    path = Path(path)
    write_atomic(path, encode_memory(mem))
    log.debug("saved memory d=%s n=%s to %s", mem.dim, mem.item_count, path)


def load_memory(path: PathLike) -> HbfMemory:
    path = Path(path)
    return decode_memory(path.read_bytes(), source=str(path))
