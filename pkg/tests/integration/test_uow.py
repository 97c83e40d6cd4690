import math
import os
from pathlib import Path

import pytest

from src.hbf.adapters import index_file, repository, results
from src.hbf.domain import commands, model
from src.hbf.service_layer import messagebus, unit_of_work


def build(path, records, dim=512):
    uow = unit_of_work.FileUnitOfWork()
    [index] = messagebus.handle(commands.BuildIndex(path, records, dim), uow)
    return index


def test_build_writes_memory_and_labels(index_path, records):
    build(index_path, records)
    memory = index_file.load_memory(index_path)
    assert memory.item_count == len(records)
    labels = results.read_labels(repository.labels_path(index_path))
    assert labels == [b"label-a", b"label-b", b"label-c", b"label-d"]
    assert not repository.decoder_path(index_path).exists()


def test_uow_can_retrieve_an_index_and_insert_into_it(index_path, records):
    build(index_path, records)

    uow = unit_of_work.FileUnitOfWork()
    with uow:
        index = uow.indexes.get(index_path)
        index.insert(b"fileZ", b"label-z")
        uow.commit()

    assert index_file.load_memory(index_path).item_count == len(records) + 1
    assert b"label-z" in results.read_labels(repository.labels_path(index_path))


def test_calibration_lives_in_a_sidecar_until_an_insert(index_path, records):
    build(index_path, records)
    uow = unit_of_work.FileUnitOfWork()
    [decoder] = messagebus.handle(
        commands.CalibrateIndex(index_path, 0.01, 0, probe_count=100), uow
    )
    sidecar = repository.decoder_path(index_path)
    assert sidecar.exists()
    assert repository.parse_decoder(sidecar) == decoder

    messagebus.handle(commands.InsertRecord(index_path, b"fileZ", b"label-a"), uow)
    assert not sidecar.exists()


def test_uncommitted_work_is_not_saved(index_path, records):
    build(index_path, records)
    before = index_file.load_memory(index_path)

    uow = unit_of_work.FileUnitOfWork()
    with uow:
        uow.indexes.get(index_path).insert(b"fileZ", b"label-z")

    assert index_file.load_memory(index_path) == before


def test_rolls_back_staged_reports(tmp_path):
    out = tmp_path / "report.csv"
    uow = unit_of_work.FileUnitOfWork()
    with uow:
        uow.reports.add(out, ["a"], [{"a": 1}])
    assert not out.exists()

    with uow:
        uow.reports.add(out, ["a"], [{"a": 1}])
        uow.commit()
    assert out.read_bytes() == b"a\r\n1\r\n"


def test_rolls_back_on_error(tmp_path):
    out = tmp_path / "report.csv"

    class MyException(Exception):
        pass

    uow = unit_of_work.FileUnitOfWork()
    with pytest.raises(MyException):
        with uow:
            uow.reports.add(out, ["a"], [{"a": 1}])
            raise MyException()
    assert not out.exists()


def test_missing_index_is_none(tmp_path):
    uow = unit_of_work.FileUnitOfWork()
    with uow:
        assert uow.indexes.get(str(tmp_path / "absent.hbf")) is None


def test_decoder_sentinels_survive_the_sidecar(tmp_path):
    path = tmp_path / "decoder.toml"
    decoder = model.DecoderConfig(-math.inf, 0.0, 3)
    path.write_text(repository.render_decoder(decoder), encoding="utf-8")
    assert repository.parse_decoder(path) == decoder


def test_saving_leaves_no_temporary_files(index_path, records):
    build(index_path, records)
    uow = unit_of_work.FileUnitOfWork()
    messagebus.handle(
        commands.CalibrateIndex(index_path, 0.01, 0, probe_count=100), uow
    )
    assert repository.decoder_path(index_path).exists()
    leftovers = list(Path(index_path).parent.glob("*.tmp"))
    assert leftovers == []


def test_a_failed_sidecar_write_keeps_the_previous_files(
    index_path, records, monkeypatch
):
    build(index_path, records)
    labels_file = repository.labels_path(index_path)
    before = labels_file.read_bytes()
    real_replace = os.replace

    def replace(src, dst):
        if str(dst).endswith(repository.LABELS_SUFFIX):
            raise OSError("disk full")
        real_replace(src, dst)

    monkeypatch.setattr(index_file.os, "replace", replace)
    uow = unit_of_work.FileUnitOfWork()
    with pytest.raises(OSError, match="disk full"):
        with uow:
            uow.indexes.get(index_path).insert(b"fileZ", b"label-z")
            uow.commit()

    assert labels_file.read_bytes() == before
    assert index_file.load_memory(index_path).item_count == len(records)
    assert not labels_file.with_name(labels_file.name + ".tmp").exists()
