"""Privacy-booth kiosk: print one real token plus k fakes that nothing public
can tell apart, filter the reals at tally time with the tally key, and
optionally delegate from inside the booth.

Realness is a designated-verifier mark: the real token's auth field is a keyed
PRF over its public element, a fake's auth is uniform bytes of the same
length. Without the tally key the two distributions coincide, so the holder
knows which token is real but cannot prove it to anyone. The first token
printed is the real one; the serialized sheet carries no marking.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import group
from .canonical import canonical_dumps
from .ceremony import RollList, TokenNotInRoll
from .crypto import (
    LinkableSignature,
    keygen,
    lrs_sign,
    lrs_verify,
    make_scope,
    prf,
)
from .group import GroupElement
from .rng import HashDRBG

AUTH_LEN = 16


class CoercionError(Exception):
    pass


class TicketReused(CoercionError):
    pass


@dataclass(frozen=True)
class TallyKey:
    key: bytes = field(repr=False)

    def __post_init__(self):
        if len(self.key) != 32:
            raise ValueError("tally key must be 32 bytes")


@dataclass(frozen=True)
class PrintedToken:
    public: GroupElement
    auth: bytes

    def to_obj(self) -> dict:
        return {"auth": self.auth.hex(), "public": self.public.hex()}

    @classmethod
    def from_obj(cls, obj: dict) -> "PrintedToken":
        return cls(public=GroupElement.from_hex(obj["public"]), auth=bytes.fromhex(obj["auth"]))


@dataclass(frozen=True)
class PrintedSheet:
    tokens: tuple[PrintedToken, ...]
    real_index: int = 0  # known only inside the booth; never serialized
    real_secret: int | None = field(default=None, repr=False)

    @property
    def real_token(self) -> PrintedToken:
        return self.tokens[self.real_index]

    def public_obj(self) -> list[dict]:
        """What leaves the booth: tokens only, in print order, no marking."""
        return [t.to_obj() for t in self.tokens]

    def public_serialize(self) -> bytes:
        return canonical_dumps(self.public_obj())


class Kiosk:
    """Issues sheets against single-use tickets; consumption is atomic."""

    def __init__(self):
        self._used: set[str] = set()

    def consume(self, ticket_id: str) -> None:
        if ticket_id in self._used:
            raise TicketReused(ticket_id)
        self._used.add(ticket_id)


def _auth_mark(tally_key: TallyKey, public: GroupElement) -> bytes:
    return prf(tally_key.key, public.data)[:AUTH_LEN]


def kiosk_issue(
    kiosk: Kiosk, ticket_id: str, tally_key: TallyKey, k_fakes: int = 3, seed: bytes = b""
) -> PrintedSheet:
    """One real token (index 0) followed by k_fakes indistinguishable fakes."""
    if k_fakes < 1:
        raise ValueError("a sheet needs at least one fake token")
    kiosk.consume(ticket_id)
    drbg = HashDRBG(seed, domain=b"popkit/kiosk:" + ticket_id.encode("utf-8"))
    real_pair = keygen(drbg.take(32))
    real = PrintedToken(public=real_pair.public, auth=_auth_mark(tally_key, real_pair.public))
    fakes = tuple(
        PrintedToken(
            public=GroupElement(group.encode(group.from_uniform(drbg.take(64)))),
            auth=drbg.take(AUTH_LEN),
        )
        for _ in range(k_fakes)
    )
    return PrintedSheet(tokens=(real,) + fakes, real_index=0, real_secret=real_pair.secret)


def public_validate(token: PrintedToken) -> bool:
    """Anyone can run this; it never touches the tally key."""
    try:
        group.decode(token.public.data)
    except (ValueError, TypeError):
        return False
    return isinstance(token.auth, bytes) and len(token.auth) == AUTH_LEN


def filter_real(tokens, tally_key: TallyKey) -> list[PrintedToken]:
    """Tally-side: keep exactly the tokens whose auth is the PRF mark."""
    import hmac as _hmac

    kept = []
    for token in tokens:
        if _hmac.compare_digest(token.auth, _auth_mark(tally_key, token.public)):
            kept.append(token)
    return kept


DELEGATION_LABEL = "delegation"


@dataclass(frozen=True)
class DelegationRecord:
    delegator_tag: GroupElement
    delegate_public: GroupElement
    signature: LinkableSignature

    def to_obj(self) -> dict:
        return {
            "delegate_public": self.delegate_public.hex(),
            "delegator_tag": self.delegator_tag.hex(),
            "signature": self.signature.to_obj(),
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "DelegationRecord":
        return cls(
            delegator_tag=GroupElement.from_hex(obj["delegator_tag"]),
            delegate_public=GroupElement.from_hex(obj["delegate_public"]),
            signature=LinkableSignature.from_obj(obj["signature"]),
        )


def delegation_scope(cycle: int) -> bytes:
    return make_scope(DELEGATION_LABEL, str(cycle))


def booth_delegate(
    real_secret: int, cycle_roll: RollList, delegate_public: GroupElement
) -> DelegationRecord:
    """Delegate future online actions to delegate_public, inside the booth."""
    my_public = GroupElement(group.encode(group.base_mul(real_secret)))
    if my_public not in cycle_roll.tokens:
        raise TokenNotInRoll(my_public.hex())
    sig = lrs_sign(
        real_secret,
        list(cycle_roll.tokens),
        delegation_scope(cycle_roll.cycle),
        delegate_public.data,
    )
    return DelegationRecord(
        delegator_tag=sig.tag, delegate_public=delegate_public, signature=sig
    )


def verify_delegation(record: DelegationRecord, cycle_roll: RollList) -> bool:
    if record.signature.tag != record.delegator_tag:
        return False
    return lrs_verify(
        list(cycle_roll.tokens),
        delegation_scope(cycle_roll.cycle),
        record.delegate_public.data,
        record.signature,
    )


def dedupe_delegations(records) -> dict[str, DelegationRecord]:
    """One delegation per tag; repeated delegation is last-write-wins."""
    latest: dict[str, DelegationRecord] = {}
    for record in records:
        latest[record.delegator_tag.hex()] = record
    return latest
