import pytest

from src.hbf.domain import model

from .random_refs import random_index_path


@pytest.fixture
def records():
    return [
        (b"fileA", b"label-a"),
        (b"fileB", b"label-b"),
        (b"fileC", b"label-c"),
        (b"fileD", b"label-a"),
        (b"fileE", b"label-d"),
    ]


@pytest.fixture
def index_path(tmp_path):
    return random_index_path(tmp_path)


@pytest.fixture
def write_records(tmp_path):
    """
    Writes (key, value) pairs to a key<TAB>value file and returns its path.

    """

    def _write_records(pairs, name="records.tsv"):
        path = tmp_path / name
        lines = [f"{k.decode()}\t{v.decode()}\n" for k, v in pairs]
        path.write_text("".join(lines), encoding="utf-8")
        return str(path)

    return _write_records


@pytest.fixture
def argmax():
    # accepts the best label whatever its score
    return model.DecoderConfig(tau=float("-inf"), delta=0.0)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("HBF_DIM", "HBF_SEED", "HBF_EPS"):
        monkeypatch.delenv(name, raising=False)
