"""Canonical JSON serialization and digests over it.

The artifact formats in this package (roll lists, cycle bundles, manifests)
must digest to the same bytes on every platform, so serialization is pinned:
object keys sorted, minimal separators, UTF-8, and a restricted value set.
Floats are rejected outright; digested payloads carry only strings, ints,
bools, None, lists, and string-keyed objects. Byte strings are the caller's
problem: hex-encode before serializing.
"""

from __future__ import annotations

import hashlib
import json


def _check_tree(obj) -> None:
    if obj is None or isinstance(obj, (str, bool)):
        return
    if isinstance(obj, float):
        raise ValueError("floats are not canonical; serialize a string or scaled int")
    if isinstance(obj, int):
        return
    if isinstance(obj, (list, tuple)):
        for item in obj:
            _check_tree(item)
        return
    if isinstance(obj, dict):
        for key, value in obj.items():
            if not isinstance(key, str):
                raise ValueError(f"object keys must be strings, got {type(key).__name__}")
            _check_tree(value)
        return
    raise ValueError(f"{type(obj).__name__} is not canonically serializable")


def canonical_dumps(obj) -> bytes:
    """Serialize to canonical JSON bytes; equal objects give equal bytes."""
    _check_tree(obj)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def canonical_loads(data: bytes | str):
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    return json.loads(data)


def digest_obj(domain: bytes | str, obj) -> bytes:
    """32-byte blake2b digest of a domain-separated canonical serialization."""
    payload = canonical_dumps(obj)
    h = hashlib.blake2b(digest_size=32)
    dom = domain.encode("utf-8") if isinstance(domain, str) else bytes(domain)
    h.update(len(dom).to_bytes(8, "big"))
    h.update(dom)
    h.update(payload)
    return h.digest()
