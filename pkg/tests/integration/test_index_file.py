import struct

import numpy as np
import pytest

from src.hbf.adapters import index_file
from src.hbf.domain import model


@pytest.fixture
def memory():
    records = [(b"k%02d" % i, b"v%d" % (i % 4)) for i in range(12)]
    return model.build(records, 512, gain=0.75, key_seed=11, value_seed=2**64 - 1)


def test_saved_memory_loads_back_bit_for_bit(memory, tmp_path):
    path = tmp_path / "idx.hbf"
    index_file.save_memory(memory, path)
    loaded = index_file.load_memory(path)
    assert loaded == memory
    assert loaded.vector.tobytes() == memory.vector.tobytes()
    assert (loaded.gain, loaded.key_seed, loaded.value_seed) == (0.75, 11, 2**64 - 1)
    assert not (tmp_path / "idx.hbf.tmp").exists()


def test_file_layout(memory):
    raw = index_file.encode_memory(memory)
    assert raw[:4] == b"HBF1"
    assert struct.unpack_from("<IQ", raw, 4) == (1, 512)
    assert len(raw) == index_file.HEADER.size + 8 * 512
    tail = np.frombuffer(raw, dtype="<f8", offset=index_file.HEADER.size)
    assert np.array_equal(tail, memory.vector)


def test_bad_magic(memory):
    raw = b"XXXX" + index_file.encode_memory(memory)[4:]
    with pytest.raises(index_file.BadMagic):
        index_file.decode_memory(raw)


def test_version_mismatch(memory):
    raw = bytearray(index_file.encode_memory(memory))
    raw[4:8] = struct.pack("<I", 2)
    with pytest.raises(index_file.VersionMismatch, match="version 2"):
        index_file.decode_memory(bytes(raw))


@pytest.mark.parametrize("cut", [2, 20, index_file.HEADER.size + 8])
def test_truncated_files(memory, cut):
    raw = index_file.encode_memory(memory)[:cut]
    with pytest.raises(index_file.TruncatedFile):
        index_file.decode_memory(raw)


def test_trailing_bytes(memory):
    raw = index_file.encode_memory(memory) + b"\0"
    with pytest.raises(index_file.IndexFormatError, match="trailing"):
        index_file.decode_memory(raw)


def test_invalid_header_values_are_format_errors(memory):
    raw = bytearray(index_file.encode_memory(memory))
    # gain field sits after magic, version and dim
    struct.pack_into("<d", raw, 16, -1.0)
    with pytest.raises(index_file.IndexFormatError):
        index_file.decode_memory(bytes(raw), source="broken.hbf")


def test_missing_file_is_an_os_error(tmp_path):
    with pytest.raises(FileNotFoundError):
        index_file.load_memory(tmp_path / "absent.hbf")
