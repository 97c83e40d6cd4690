import os
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from src.hbf.domain.exceptions import InvalidArgument

MANIFEST_SECTIONS = ("experiment", "decoder", "capacity", "amplify", "baseline")


def get_log_level():
    return os.environ.get("HBF_LOG_LEVEL", "WARNING").upper()


def get_default_dim():
    return int(os.environ.get("HBF_DIM", 4096))


def get_master_seed():
    return int(os.environ.get("HBF_SEED", 0))


def get_default_eps():
    return float(os.environ.get("HBF_EPS", 0.01))


def load_manifest(path) -> dict:
    """Read a TOML experiment manifest (or decoder sidecar) into a dict."""
    path = Path(path)
    with path.open("rb") as f:
        try:
            manifest = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise InvalidArgument(f"{path}: {e}") from e
    unknown = set(manifest) - set(MANIFEST_SECTIONS)
    if unknown:
        raise InvalidArgument(f"{path}: unknown section(s) {', '.join(sorted(unknown))}")
    return manifest
