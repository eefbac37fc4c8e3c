"""Primitives on the prime-order group: deterministic key pairs, hash-to-group,
a keyed PRF, hash commitments, linkable ring signatures with per-scope linkage
tags, and Schnorr cosignatures over list digests.

One fixed 256-bit hash (blake2b-256) serves digests, challenges, and the keyed
PRF (blake2b's native keyed mode). All byte inputs to hashes are length-prefixed
so distinct part boundaries never collide. Signing is deterministic: nonces are
derived from the secret and the statement, never from ambient randomness.

The linkable ring signature is the classic backward-closing challenge chain:
the signer commits at their own slot, derives each following slot's challenge
from the previous slot's commitments, and closes the loop algebraically. The
linkage tag is hash_to_group(scope)^secret, so one secret exposes exactly one
tag per scope and tags across scopes are unlinkable.
"""

from __future__ import annotations

import functools
import hashlib
import hmac
from dataclasses import dataclass, field

from . import group
from .group import GroupElement, Point

SCALAR_LEN = 32
DIGEST_LEN = 32
NONCE_LEN = 32


class SignerNotInRing(ValueError):
    """The signer's public element is absent from the ring."""


def _hash(domain: bytes, *parts: bytes, digest_size: int = 32) -> bytes:
    h = hashlib.blake2b(digest_size=digest_size)
    h.update(len(domain).to_bytes(8, "big"))
    h.update(domain)
    for part in parts:
        h.update(len(part).to_bytes(8, "big"))
        h.update(part)
    return h.digest()


def hash_bytes(data: bytes) -> bytes:
    """Plain 32-byte message digest."""
    return hashlib.blake2b(data, digest_size=32).digest()


def prf(key: bytes, data: bytes) -> bytes:
    """Keyed PRF, 32-byte output."""
    if len(key) != 32:
        raise ValueError("PRF key must be 32 bytes")
    return hashlib.blake2b(data, key=key, digest_size=32).digest()


def scalar_from_hash(domain: bytes, *parts: bytes) -> int:
    """Uniform scalar mod the group order (64-byte hash, reduced)."""
    wide = _hash(domain, *parts, digest_size=64)
    return int.from_bytes(wide, "little") % group.ORDER


def scalar_to_bytes(k: int) -> bytes:
    return (int(k) % group.ORDER).to_bytes(SCALAR_LEN, "little")


def scalar_from_bytes(data: bytes) -> int:
    if len(data) != SCALAR_LEN:
        raise ValueError("scalar encoding must be 32 bytes")
    value = int.from_bytes(data, "little")
    if value >= group.ORDER:
        raise ValueError("non-canonical scalar")
    return value


@functools.lru_cache(maxsize=16384)
def _decode_cached(data: bytes) -> Point:
    return group.decode(data)


@functools.lru_cache(maxsize=4096)
def _hash_to_group_cached(scope: bytes) -> Point:
    wide = _hash(b"popkit/hash-to-group", scope, digest_size=64)
    return group.from_uniform(wide)


def hash_to_group(scope: bytes) -> Point:
    """Scope-derived group element with unknown discrete log."""
    return _hash_to_group_cached(bytes(scope))


def make_scope(label: str | bytes, context: str | bytes) -> bytes:
    """Scope bytes: domain-separation label then context, length-prefixed."""
    lab = label.encode("utf-8") if isinstance(label, str) else bytes(label)
    ctx = context.encode("utf-8") if isinstance(context, str) else bytes(context)
    return len(lab).to_bytes(8, "big") + lab + len(ctx).to_bytes(8, "big") + ctx


@dataclass(frozen=True)
class PersonKeyPair:
    secret: int = field(repr=False)
    public: GroupElement


def keygen(seed: bytes) -> PersonKeyPair:
    """Deterministic key pair from a 32-byte seed."""
    if len(seed) != 32:
        raise ValueError("keygen seed must be 32 bytes")
    counter = 0
    while True:
        secret = scalar_from_hash(b"popkit/keygen", seed, counter.to_bytes(4, "big"))
        if secret != 0:
            break
        counter += 1
    public = GroupElement(group.encode(group.base_mul(secret)))
    return PersonKeyPair(secret=secret, public=public)


def linkage_tag(secret: int, scope: bytes) -> GroupElement:
    """The per-(secret, scope) tag: hash_to_group(scope)^secret."""
    return GroupElement(group.encode(group.point_mul(hash_to_group(scope), secret)))


@dataclass(frozen=True)
class LinkableSignature:
    scope: bytes
    tag: GroupElement
    ring: tuple[GroupElement, ...]
    challenges: tuple[int, ...]
    responses: tuple[int, ...]
    message_digest: bytes

    def to_obj(self) -> dict:
        return {
            "challenges": [scalar_to_bytes(c).hex() for c in self.challenges],
            "message_digest": self.message_digest.hex(),
            "responses": [scalar_to_bytes(s).hex() for s in self.responses],
            "ring": [e.hex() for e in self.ring],
            "scope": self.scope.hex(),
            "tag": self.tag.hex(),
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "LinkableSignature":
        return cls(
            scope=bytes.fromhex(obj["scope"]),
            tag=GroupElement.from_hex(obj["tag"]),
            ring=tuple(GroupElement.from_hex(e) for e in obj["ring"]),
            challenges=tuple(scalar_from_bytes(bytes.fromhex(c)) for c in obj["challenges"]),
            responses=tuple(scalar_from_bytes(bytes.fromhex(s)) for s in obj["responses"]),
            message_digest=bytes.fromhex(obj["message_digest"]),
        )


def lrs_tag(sig: LinkableSignature) -> GroupElement:
    return sig.tag


def _ring_challenge(
    scope: bytes,
    message_digest: bytes,
    ring_blob: bytes,
    tag_enc: bytes,
    commit_g: bytes,
    commit_h: bytes,
) -> int:
    return scalar_from_hash(
        b"popkit/lrs-challenge", scope, message_digest, ring_blob, tag_enc, commit_g, commit_h
    )


def lrs_sign(
    secret: int, ring: list[GroupElement], scope: bytes, message: bytes
) -> LinkableSignature:
    """Sign message under scope, hiding the signer inside the ring."""
    ring = tuple(ring)
    if not ring:
        raise ValueError("ring must be non-empty")
    encodings = [e.data for e in ring]
    if len(set(encodings)) != len(encodings):
        raise ValueError("ring entries must be distinct")
    my_public = group.encode(group.base_mul(secret))
    try:
        signer = encodings.index(my_public)
    except ValueError:
        raise SignerNotInRing("signer's public element is not in the ring") from None

    n = len(ring)
    ring_points = [_decode_cached(e) for e in encodings]
    ring_blob = b"".join(encodings)
    h_point = hash_to_group(scope)
    tag_point = group.point_mul(h_point, secret)
    tag_enc = group.encode(tag_point)
    md = hash_bytes(message)
    secret_bytes = scalar_to_bytes(secret)

    nonce = scalar_from_hash(b"popkit/lrs-nonce", secret_bytes, scope, md, ring_blob)
    challenges = [0] * n
    responses = [0] * n

    commit_g = group.encode(group.base_mul(nonce))
    commit_h = group.encode(group.point_mul(h_point, nonce))
    challenges[(signer + 1) % n] = _ring_challenge(scope, md, ring_blob, tag_enc, commit_g, commit_h)

    for step in range(1, n):
        i = (signer + step) % n
        responses[i] = scalar_from_hash(
            b"popkit/lrs-decoy", secret_bytes, scope, md, ring_blob, i.to_bytes(4, "big")
        )
        commit_g = group.encode(
            group.double_mul(responses[i], group.GENERATOR, challenges[i], ring_points[i])
        )
        commit_h = group.encode(group.double_mul(responses[i], h_point, challenges[i], tag_point))
        challenges[(i + 1) % n] = _ring_challenge(
            scope, md, ring_blob, tag_enc, commit_g, commit_h
        )

    responses[signer] = (nonce - secret * challenges[signer]) % group.ORDER
    return LinkableSignature(
        scope=bytes(scope),
        tag=GroupElement(tag_enc),
        ring=ring,
        challenges=tuple(challenges),
        responses=tuple(responses),
        message_digest=md,
    )


def lrs_verify(
    ring: list[GroupElement], scope: bytes, message: bytes, sig: LinkableSignature
) -> bool:
    """True iff sig was produced for exactly (ring, scope, message)."""
    try:
        ring = tuple(ring)
        if sig.ring != ring or bytes(sig.scope) != bytes(scope):
            return False
        n = len(ring)
        if n == 0 or len(sig.challenges) != n or len(sig.responses) != n:
            return False
        if sig.message_digest != hash_bytes(message):
            return False
        ring_points = [_decode_cached(e.data) for e in ring]
        tag_point = _decode_cached(sig.tag.data)
        h_point = hash_to_group(scope)
        ring_blob = b"".join(e.data for e in ring)
        md = sig.message_digest
        tag_enc = sig.tag.data
        for i in range(n):
            c = sig.challenges[i] % group.ORDER
            s = sig.responses[i] % group.ORDER
            commit_g = group.encode(group.double_mul(s, group.GENERATOR, c, ring_points[i]))
            commit_h = group.encode(group.double_mul(s, h_point, c, tag_point))
            expected = _ring_challenge(scope, md, ring_blob, tag_enc, commit_g, commit_h)
            if expected != sig.challenges[(i + 1) % n]:
                return False
        return True
    except (ValueError, TypeError, AttributeError):
        return False


@dataclass(frozen=True)
class Commitment:
    value_digest: bytes

    def hex(self) -> str:
        return self.value_digest.hex()


def commit(value: bytes, nonce: bytes) -> Commitment:
    """Binding, hiding commitment to value under a 32-byte nonce."""
    if len(nonce) != NONCE_LEN:
        raise ValueError("commitment nonce must be 32 bytes")
    return Commitment(_hash(b"popkit/commit", bytes(value), bytes(nonce)))


def open_verify(commitment: Commitment, value: bytes, nonce: bytes) -> bool:
    if len(nonce) != NONCE_LEN:
        return False
    expected = _hash(b"popkit/commit", bytes(value), bytes(nonce))
    return hmac.compare_digest(expected, commitment.value_digest)


@dataclass(frozen=True)
class Cosignature:
    """Schnorr signature of knowledge over a list digest."""

    witness_public: GroupElement
    list_digest: bytes
    nonce_commit: GroupElement
    response: int

    def to_obj(self) -> dict:
        return {
            "list_digest": self.list_digest.hex(),
            "nonce_commit": self.nonce_commit.hex(),
            "response": scalar_to_bytes(self.response).hex(),
            "witness_public": self.witness_public.hex(),
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "Cosignature":
        return cls(
            witness_public=GroupElement.from_hex(obj["witness_public"]),
            list_digest=bytes.fromhex(obj["list_digest"]),
            nonce_commit=GroupElement.from_hex(obj["nonce_commit"]),
            response=scalar_from_bytes(bytes.fromhex(obj["response"])),
        )


def cosign(witness_secret: int, list_digest: bytes) -> Cosignature:
    """Witness attestation over a published list digest."""
    public_enc = group.encode(group.base_mul(witness_secret))
    r = scalar_from_hash(b"popkit/cosign-nonce", scalar_to_bytes(witness_secret), list_digest)
    nonce_commit = group.encode(group.base_mul(r))
    c = scalar_from_hash(b"popkit/cosign-challenge", public_enc, nonce_commit, list_digest)
    s = (r + c * witness_secret) % group.ORDER
    return Cosignature(
        witness_public=GroupElement(public_enc),
        list_digest=bytes(list_digest),
        nonce_commit=GroupElement(nonce_commit),
        response=s,
    )


def cosign_verify(cosig: Cosignature, list_digest: bytes) -> bool:
    """True iff cosig attests exactly this digest under its witness key."""
    try:
        if bytes(cosig.list_digest) != bytes(list_digest):
            return False
        public = _decode_cached(cosig.witness_public.data)
        nonce_commit = _decode_cached(cosig.nonce_commit.data)
        c = scalar_from_hash(
            b"popkit/cosign-challenge",
            cosig.witness_public.data,
            cosig.nonce_commit.data,
            bytes(list_digest),
        )
        lhs = group.base_mul(cosig.response)
        rhs = group.point_add(nonce_commit, group.point_mul(public, c))
        return group.point_eq(lhs, rhs)
    except (ValueError, TypeError, AttributeError):
        return False
