import hashlib
import struct

MASK64 = 0xFFFFFFFFFFFFFFFF


def _encode(part) -> bytes:
    if isinstance(part, bytes):
        raw = part
    elif isinstance(part, str):
        raw = part.encode("utf-8")
    elif isinstance(part, int):
        raw = struct.pack("<Q", part & MASK64)
    else:
        raise TypeError(f"cannot derive a seed from {type(part).__name__}")
    # length prefix keeps ("ab", "c") and ("a", "bc") apart
    return struct.pack("<I", len(raw)) + raw


def derive_seed(master_seed: int, *parts) -> int:
    """
    Stable 64-bit seed mixed from a master seed and any number of
    labels / indices, e.g. derive_seed(7, "fp", "trial", 12).

    """
    h = hashlib.blake2b(digest_size=8, person=b"hbf-seed")
    h.update(_encode(master_seed))
    for part in parts:
        h.update(_encode(part))
    return int.from_bytes(h.digest(), "little")
