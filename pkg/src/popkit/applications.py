"""Token consumption: per-service unlinkable tags, unique-person like and
follower counts, and beacon-seeded sortition over a roll list.

Every application derives a scope from (service, action); the linkage tag a
holder exposes under one scope says nothing about their tags under any other,
so services cannot correlate users, yet each service sees exactly one tag per
person per action and can deduplicate.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

from . import group
from .ceremony import RollList, TokenNotInRoll
from .crypto import LinkableSignature, lrs_sign, lrs_verify, make_scope
from .group import GroupElement
from .rng import HashDRBG


class KTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class TagProof:
    signature: LinkableSignature

    @property
    def tag(self) -> GroupElement:
        return self.signature.tag

    def to_obj(self) -> dict:
        return {"signature": self.signature.to_obj()}

    @classmethod
    def from_obj(cls, obj: dict) -> "TagProof":
        return cls(signature=LinkableSignature.from_obj(obj["signature"]))


def service_scope(service_id: str, action_id: str) -> bytes:
    return make_scope(service_id, action_id)


def make_service_tag(
    secret: int, roll: RollList, service_id: str, action_id: str
) -> TagProof:
    """Prove one-person membership in the roll, exposing only a per-scope tag.

    The roll digest is bound in as the signed message, so a proof talks about
    exactly one published roll.
    """
    my_public = GroupElement(group.encode(group.base_mul(secret)))
    if my_public not in roll.tokens:
        raise TokenNotInRoll(my_public.hex())
    sig = lrs_sign(
        secret, list(roll.tokens), service_scope(service_id, action_id), roll.list_digest
    )
    return TagProof(signature=sig)


class CheckResult(enum.Enum):
    ACCEPTED = "Accepted"
    DUPLICATE = "Duplicate"
    INVALID = "Invalid"


def service_check(
    proof: TagProof,
    roll: RollList,
    service_id: str,
    action_id: str,
    seen_tags: set[str],
) -> CheckResult:
    """The service-side gate: verify, then deduplicate by tag."""
    try:
        ok = lrs_verify(
            list(roll.tokens),
            service_scope(service_id, action_id),
            roll.list_digest,
            proof.signature,
        )
    except (ValueError, TypeError, AttributeError):
        ok = False
    if not ok:
        return CheckResult.INVALID
    tag_hex = proof.tag.hex()
    if tag_hex in seen_tags:
        return CheckResult.DUPLICATE
    seen_tags.add(tag_hex)
    return CheckResult.ACCEPTED


LIKE_SERVICE = "like"
FOLLOW_SERVICE = "follow"


@dataclass(frozen=True)
class Upvote:
    post_id: str
    account_id: str
    proof: TagProof

    def to_obj(self) -> dict:
        return {
            "account_id": self.account_id,
            "post_id": self.post_id,
            "proof": self.proof.to_obj(),
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "Upvote":
        return cls(
            post_id=obj["post_id"],
            account_id=obj["account_id"],
            proof=TagProof.from_obj(obj["proof"]),
        )


def make_upvote(secret: int, roll: RollList, post_id: str, account_id: str) -> Upvote:
    """The like scope binds the post but not the account, so one person's
    accounts all collapse to a single tag."""
    proof = make_service_tag(secret, roll, LIKE_SERVICE, post_id)
    return Upvote(post_id=post_id, account_id=account_id, proof=proof)


def count_unique_upvotes(post_id: str, upvotes, roll_at_post: RollList) -> int:
    """Distinct valid tags; invalid or ringless upvotes contribute nothing."""
    scope = service_scope(LIKE_SERVICE, post_id)
    tags: set[str] = set()
    for upvote in upvotes:
        if upvote.post_id != post_id:
            continue
        try:
            ok = lrs_verify(
                list(roll_at_post.tokens),
                scope,
                roll_at_post.list_digest,
                upvote.proof.signature,
            )
        except (ValueError, TypeError, AttributeError):
            ok = False
        if ok:
            tags.add(upvote.proof.tag.hex())
    return len(tags)


def count_unique_followers(account_id: str, followers, current_roll: RollList) -> int:
    """Distinct persons among follower proofs, against the current roll."""
    scope = service_scope(FOLLOW_SERVICE, account_id)
    tags: set[str] = set()
    for proof in followers:
        try:
            ok = lrs_verify(
                list(current_roll.tokens),
                scope,
                current_roll.list_digest,
                proof.signature,
            )
        except (ValueError, TypeError, AttributeError):
            ok = False
        if ok:
            tags.add(proof.tag.hex())
    return len(tags)


@dataclass(frozen=True)
class SortitionResult:
    seed: bytes
    k: int
    selected: tuple[int, ...]

    def to_obj(self) -> dict:
        return {"k": self.k, "seed": self.seed.hex(), "selected": list(self.selected)}


def sortition_select(roll: RollList, seed: bytes, k: int) -> SortitionResult:
    """Draw k distinct token indices, deterministic in (roll digest, seed, k).

    A partial Fisher-Yates over the index list keyed by the beacon seed; every
    token has equal inclusion probability over uniform seeds.
    """
    n = len(roll.tokens)
    if not 0 <= k <= n:
        raise KTooLarge(f"k={k} outside [0, {n}]")
    drbg = HashDRBG(roll.list_digest + bytes(seed), domain=b"popkit/sortition")
    indices = list(range(n))
    for i in range(k):
        j = i + drbg.randbelow(n - i)
        indices[i], indices[j] = indices[j], indices[i]
    return SortitionResult(seed=bytes(seed), k=k, selected=tuple(sorted(indices[:k])))


_COUNT_COLUMNS = ("fixture_id", "persons", "accounts", "counted")


def write_count_csv(path, rows) -> None:
    """Plot-ready output for count experiments; rows are dicts or sequences."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(_COUNT_COLUMNS))
        for row in rows:
            if isinstance(row, dict):
                writer.writerow([row[name] for name in _COUNT_COLUMNS])
            else:
                writer.writerow(list(row))
