"""Single pseudonym-party event: lobby admission, sealing at the deadline,
one-scan-per-person exit, roll-list publication, witness cosigning, and
third-party verification against a ground-truth log.

Time is a logical integer tick supplied by callers; deadlines are
synchronization points, not clock readings. Attendee ids exist only in
simulation ground truth and never reach a published artifact. Attack
injection corrupts a state on purpose and records what happened in the
ground log so ``verify_event`` can be tested against known corruption.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .canonical import canonical_dumps, digest_obj
from .crypto import Cosignature, cosign_verify
from .group import GroupElement

ROLL_DIGEST_DOMAIN = "popkit/roll-list"

_SIZE_TIERS = ("small", "medium", "large")


class CeremonyError(Exception):
    pass


class ConfigInvalid(CeremonyError):
    pass


class EntryAfterSeal(CeremonyError):
    pass


class DuplicateEntry(CeremonyError):
    pass


class SealTooEarly(CeremonyError):
    pass


class NotPresent(CeremonyError):
    pass


class AlreadyScanned(CeremonyError):
    pass


class TokenReused(CeremonyError):
    pass


class NothingScanned(CeremonyError):
    pass


class BadCosignature(CeremonyError):
    pass


class DuplicateWitness(CeremonyError):
    pass


class PhaseError(CeremonyError):
    pass


class TokenNotInRoll(CeremonyError):
    """A caller's token is absent from the roll list it claims."""


class Phase(enum.Enum):
    LOBBY_OPEN = "LobbyOpen"
    SEALED = "Sealed"
    SCANNING = "Scanning"
    PUBLISHED = "Published"
    FINALIZED = "Finalized"


_PHASE_ORDER = {phase: i for i, phase in enumerate(Phase)}


def phase_index(phase: Phase) -> int:
    return _PHASE_ORDER[phase]


@dataclass(frozen=True)
class EventConfig:
    event_id: str
    site_id: str
    cycle: int
    deadline: int
    cosign_threshold: float = 0.2
    size_tier: str = "medium"
    opened_at: int = 0

    def validate(self) -> None:
        if not self.event_id or not self.site_id:
            raise ConfigInvalid("event_id and site_id must be non-empty")
        if self.cycle < 0:
            raise ConfigInvalid("cycle must be >= 0")
        if self.deadline <= self.opened_at:
            raise ConfigInvalid("deadline must fall strictly after opening")
        if not 0 < self.cosign_threshold <= 1:
            raise ConfigInvalid("cosign_threshold must lie in (0, 1]")
        if self.size_tier not in _SIZE_TIERS:
            raise ConfigInvalid(f"size_tier must be one of {_SIZE_TIERS}")


@dataclass
class SealLogEntry:
    kind: str  # "late_entry" | "double_scan"
    attendee_id: str
    tick: int

    def to_obj(self) -> dict:
        return {"attendee_id": self.attendee_id, "kind": self.kind, "tick": self.tick}

    @classmethod
    def from_obj(cls, obj: dict) -> "SealLogEntry":
        return cls(kind=obj["kind"], attendee_id=obj["attendee_id"], tick=obj["tick"])


@dataclass
class EventGround:
    """What actually happened, for verification fixtures; never published."""

    scan_count: int = 0
    seal_log: list[SealLogEntry] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "scan_count": self.scan_count,
            "seal_log": [entry.to_obj() for entry in self.seal_log],
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "EventGround":
        return cls(
            scan_count=obj["scan_count"],
            seal_log=[SealLogEntry.from_obj(e) for e in obj["seal_log"]],
        )


@dataclass
class EventState:
    config: EventConfig
    phase: Phase = Phase.LOBBY_OPEN
    present: set[str] = field(default_factory=set)
    scanned: list[tuple[str | None, GroupElement]] = field(default_factory=list)
    complaints: list[str] = field(default_factory=list)
    ground: EventGround = field(default_factory=EventGround)

    def scanned_ids(self) -> set[str]:
        return {aid for aid, _ in self.scanned if aid is not None}

    def scanned_tokens(self) -> set[bytes]:
        return {token.data for _, token in self.scanned}


def open_event(config: EventConfig) -> EventState:
    config.validate()
    return EventState(config=config)


def admit(state: EventState, attendee_id: str, now: int) -> EventState:
    if state.phase is not Phase.LOBBY_OPEN or now >= state.config.deadline:
        raise EntryAfterSeal(f"{attendee_id!r} at tick {now}")
    if attendee_id in state.present:
        raise DuplicateEntry(attendee_id)
    state.present.add(attendee_id)
    return state


def seal(state: EventState, now: int) -> EventState:
    if state.phase is not Phase.LOBBY_OPEN:
        raise PhaseError(f"cannot seal from {state.phase.value}")
    if now < state.config.deadline:
        raise SealTooEarly(f"tick {now} precedes deadline {state.config.deadline}")
    state.phase = Phase.SEALED
    return state


def scan_exit(state: EventState, attendee_id: str, token: GroupElement) -> EventState:
    if state.phase not in (Phase.SEALED, Phase.SCANNING):
        raise PhaseError(f"cannot scan in {state.phase.value}")
    if attendee_id not in state.present:
        raise NotPresent(attendee_id)
    if attendee_id in state.scanned_ids():
        raise AlreadyScanned(attendee_id)
    if token.data in state.scanned_tokens():
        raise TokenReused(token.hex())
    state.scanned.append((attendee_id, token))
    state.ground.scan_count += 1
    state.phase = Phase.SCANNING
    return state


def complain(state: EventState, note: str) -> EventState:
    """Record a complaint; complainants simply withhold their cosignature."""
    state.complaints.append(note)
    return state


@dataclass
class RollList:
    event_id: str
    cycle: int
    tokens: tuple[GroupElement, ...]
    list_digest: bytes
    cosignatures: list[Cosignature] = field(default_factory=list)
    attested_counts: list[int] = field(default_factory=list)

    @property
    def attested_count(self) -> int:
        """Largest attendance any cosigner claims; list length if none signed."""
        return max(self.attested_counts, default=len(self.tokens))

    def digest_payload(self) -> dict:
        return {
            "cycle": self.cycle,
            "event_id": self.event_id,
            "tokens": [t.hex() for t in self.tokens],
        }

    def to_obj(self) -> dict:
        return {
            "attestations": [
                {"attested_count": count, "cosignature": cosig.to_obj()}
                for cosig, count in zip(self.cosignatures, self.attested_counts)
            ],
            "cycle": self.cycle,
            "event_id": self.event_id,
            "list_digest": self.list_digest.hex(),
            "tokens": [t.hex() for t in self.tokens],
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "RollList":
        return cls(
            event_id=obj["event_id"],
            cycle=obj["cycle"],
            tokens=tuple(GroupElement.from_hex(t) for t in obj["tokens"]),
            list_digest=bytes.fromhex(obj["list_digest"]),
            cosignatures=[Cosignature.from_obj(a["cosignature"]) for a in obj["attestations"]],
            attested_counts=[a["attested_count"] for a in obj["attestations"]],
        )

    def serialize(self) -> bytes:
        return canonical_dumps(self.to_obj())


def roll_digest(event_id: str, cycle: int, tokens) -> bytes:
    return digest_obj(
        ROLL_DIGEST_DOMAIN,
        {"cycle": cycle, "event_id": event_id, "tokens": [t.hex() for t in tokens]},
    )


def publish(state: EventState) -> RollList:
    if state.phase not in (Phase.SEALED, Phase.SCANNING):
        raise PhaseError(f"cannot publish from {state.phase.value}")
    if not state.scanned:
        raise NothingScanned(state.config.event_id)
    tokens = tuple(token for _, token in state.scanned)
    digest = roll_digest(state.config.event_id, state.config.cycle, tokens)
    state.phase = Phase.PUBLISHED
    return RollList(
        event_id=state.config.event_id,
        cycle=state.config.cycle,
        tokens=tokens,
        list_digest=digest,
    )


def finalize(state: EventState) -> EventState:
    if state.phase is not Phase.PUBLISHED:
        raise PhaseError(f"cannot finalize from {state.phase.value}")
    state.phase = Phase.FINALIZED
    return state


def add_cosignature(roll: RollList, cosig: Cosignature, attested_count: int) -> RollList:
    if not cosign_verify(cosig, roll.list_digest):
        raise BadCosignature("cosignature does not verify for this list digest")
    if any(existing.witness_public == cosig.witness_public for existing in roll.cosignatures):
        raise DuplicateWitness(cosig.witness_public.hex())
    roll.cosignatures.append(cosig)
    roll.attested_counts.append(int(attested_count))
    return roll


@dataclass(frozen=True)
class VerifyPolicy:
    cosign_threshold: float = 0.2
    min_witnesses: int = 3


@dataclass(frozen=True)
class Finding:
    code: str
    detail: str

    def to_obj(self) -> dict:
        return {"code": self.code, "detail": self.detail}


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    findings: tuple[Finding, ...]

    def to_obj(self) -> dict:
        return {"findings": [f.to_obj() for f in self.findings], "passed": self.passed}


def verify_event(roll: RollList, ground: EventGround, policy: VerifyPolicy) -> VerificationReport:
    """Third-party check of a published roll against the ground-truth log."""
    findings: list[Finding] = []

    expected = roll_digest(roll.event_id, roll.cycle, roll.tokens)
    if expected != roll.list_digest:
        findings.append(Finding("DigestMismatch", "list_digest does not match token list"))

    n_tokens = len(roll.tokens)
    low_attestations = [c for c in roll.attested_counts if c < n_tokens]
    if n_tokens > ground.scan_count or low_attestations:
        findings.append(
            Finding(
                "InflationDetected",
                f"{n_tokens} tokens vs {ground.scan_count} scans; "
                f"{len(low_attestations)} cosigner(s) attest fewer",
            )
        )

    if any(entry.kind == "double_scan" for entry in ground.seal_log):
        findings.append(Finding("DuplicateScan", "ground log records a repeated scan"))
    if any(entry.kind == "late_entry" for entry in ground.seal_log):
        findings.append(Finding("EntryAfterSeal", "ground log records entry after the seal"))

    valid_cosigs = [c for c in roll.cosignatures if cosign_verify(c, roll.list_digest)]
    required = max(
        math.ceil(policy.cosign_threshold * roll.attested_count), policy.min_witnesses
    )
    if len(valid_cosigs) < required:
        findings.append(
            Finding(
                "CosignShortfall",
                f"{len(valid_cosigs)} verifying cosignature(s), {required} required",
            )
        )

    return VerificationReport(passed=not findings, findings=tuple(findings))


@dataclass(frozen=True)
class Inflate:
    k: int


@dataclass(frozen=True)
class DoubleScan:
    attendee_id: str


@dataclass(frozen=True)
class LateEntry:
    attendee_id: str


def _forged_token(state: EventState, label: str, index: int) -> GroupElement:
    from . import crypto, group

    wide = crypto._hash(
        b"popkit/forged-token",
        state.config.event_id.encode(),
        label.encode(),
        index.to_bytes(8, "big"),
        digest_size=64,
    )
    return GroupElement(group.encode(group.from_uniform(wide)))


def inject_attack(state: EventState, attack) -> EventState:
    """Corrupt the state as specified and record it in the ground log."""
    if state.phase not in (Phase.SEALED, Phase.SCANNING):
        raise PhaseError(f"attacks here target the scan window, not {state.phase.value}")
    if isinstance(attack, Inflate):
        for i in range(attack.k):
            token = _forged_token(state, "inflate", len(state.scanned) + i)
            state.scanned.append((None, token))
        # no scan events occurred, so ground.scan_count is left alone
        return state
    if isinstance(attack, DoubleScan):
        if attack.attendee_id not in state.scanned_ids():
            raise NotPresent(attack.attendee_id)
        token = _forged_token(state, "double", len(state.scanned))
        state.scanned.append((attack.attendee_id, token))
        state.ground.scan_count += 1
        state.ground.seal_log.append(
            SealLogEntry("double_scan", attack.attendee_id, state.config.deadline)
        )
        return state
    if isinstance(attack, LateEntry):
        if attack.attendee_id in state.present:
            raise DuplicateEntry(attack.attendee_id)
        state.present.add(attack.attendee_id)
        state.ground.seal_log.append(
            SealLogEntry("late_entry", attack.attendee_id, state.config.deadline)
        )
        return state
    raise TypeError(f"unknown attack {attack!r}")
