"""Federated synchronized cycles: shared deadlines across sites, the secret
cross-witness travel lottery (commit before the event, reveal after), and
cycle-level detection of fabricated or inflated events.

A cycle schedule carries exactly one deadline for every site, so no body can
attend two events. Cross-witness volunteers are assigned by a deterministic
lottery over a beacon seed; only commitments are published before the event,
and each reveal is checked against its commitment. ``verify_cycle`` compares
every site's published roll against schedule and testimony and partitions
sites into passed and flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ceremony
from .canonical import canonical_dumps
from .ceremony import (
    EventConfig,
    EventGround,
    Inflate,
    Phase,
    RollList,
)
from .crypto import Commitment, commit, cosign, keygen, open_verify
from .group import GroupElement, encode, from_uniform
from .rng import HashDRBG


class FederationError(Exception):
    pass


class ScheduleInvalid(FederationError):
    pass


class InsufficientVolunteers(FederationError):
    pass


class BadReveal(FederationError):
    pass


class TooEarly(FederationError):
    pass


class InvalidScript(FederationError):
    """An attendance script puts one body in more than one event."""


@dataclass(frozen=True)
class FederationSchedule:
    cycle: int
    sites: tuple[str, ...]
    deadline: int

    def to_obj(self) -> dict:
        return {"cycle": self.cycle, "deadline": self.deadline, "sites": list(self.sites)}

    @classmethod
    def from_obj(cls, obj: dict) -> "FederationSchedule":
        return cls(cycle=obj["cycle"], sites=tuple(obj["sites"]), deadline=obj["deadline"])


def build_schedule(
    cycle: int,
    sites,
    deadline: int,
    previous: FederationSchedule | None = None,
) -> FederationSchedule:
    """One shared deadline for every site in the cycle."""
    sites = tuple(sites)
    if not sites:
        raise ScheduleInvalid("a cycle needs at least one site")
    if len(set(sites)) != len(sites):
        raise ScheduleInvalid("duplicate site ids")
    if isinstance(deadline, dict):
        raise ScheduleInvalid("per-site deadlines are not a thing; one deadline per cycle")
    if cycle < 0:
        raise ScheduleInvalid("cycle must be >= 0")
    if previous is not None and cycle <= previous.cycle:
        raise ScheduleInvalid(f"cycle {cycle} does not advance past {previous.cycle}")
    return FederationSchedule(cycle=cycle, sites=sites, deadline=int(deadline))


@dataclass(frozen=True)
class Body:
    body_id: str
    home_site: str
    behavior: str = "honest"  # honest | minion | organizer
    controller: str | None = None


@dataclass(frozen=True)
class Testimony:
    site: str
    observed_count: int
    regular: bool = True

    def to_obj(self) -> dict:
        return {"observed_count": self.observed_count, "regular": self.regular, "site": self.site}

    @classmethod
    def from_obj(cls, obj: dict) -> "Testimony":
        return cls(site=obj["site"], observed_count=obj["observed_count"], regular=obj["regular"])


@dataclass
class WitnessAssignment:
    volunteer_id: str
    home_site: str
    target_site: str
    commitment: Commitment
    nonce: bytes = field(repr=False)  # secret side, held by volunteer and lottery
    revealed: tuple[bytes, Testimony] | None = None

    def commitment_payload(self) -> bytes:
        return canonical_dumps({"target": self.target_site, "volunteer": self.volunteer_id})

    def to_obj(self) -> dict:
        obj: dict = {
            "commitment": self.commitment.hex(),
            "home_site": self.home_site,
            "target_site": self.target_site,
            "volunteer_id": self.volunteer_id,
        }
        if self.revealed is not None:
            nonce, testimony = self.revealed
            obj["revealed"] = {"nonce": nonce.hex(), "testimony": testimony.to_obj()}
        return obj

    @classmethod
    def from_obj(cls, obj: dict) -> "WitnessAssignment":
        revealed = None
        if obj.get("revealed") is not None:
            revealed = (
                bytes.fromhex(obj["revealed"]["nonce"]),
                Testimony.from_obj(obj["revealed"]["testimony"]),
            )
        return cls(
            volunteer_id=obj["volunteer_id"],
            home_site=obj["home_site"],
            target_site=obj["target_site"],
            commitment=Commitment(bytes.fromhex(obj["commitment"])),
            nonce=bytes.fromhex(obj["revealed"]["nonce"]) if revealed else b"",
            revealed=revealed,
        )


def assign_cross_witnesses(
    beacon_seed: bytes,
    volunteers: list[tuple[str, str]],
    sites,
    per_site: int = 2,
) -> list[WitnessAssignment]:
    """Deterministic lottery: per_site volunteers travel to each site.

    Only the commitments may be published before the event; target sites and
    nonces stay with the volunteers.
    """
    sites = list(sites)
    drbg = HashDRBG(beacon_seed, domain=b"popkit/cross-witness-lottery")
    site_order = sorted(sites)
    drbg.shuffle(site_order)
    pool = sorted(volunteers)
    drbg.shuffle(pool)

    assignments: list[WitnessAssignment] = []
    taken: set[str] = set()
    for site in site_order:
        picked = 0
        for volunteer_id, home in pool:
            if picked == per_site:
                break
            if volunteer_id in taken or home == site:
                continue
            nonce = drbg.take(32)
            payload = canonical_dumps({"target": site, "volunteer": volunteer_id})
            assignments.append(
                WitnessAssignment(
                    volunteer_id=volunteer_id,
                    home_site=home,
                    target_site=site,
                    commitment=commit(payload, nonce),
                    nonce=nonce,
                )
            )
            taken.add(volunteer_id)
            picked += 1
        if picked < per_site:
            raise InsufficientVolunteers(f"site {site!r} needs {per_site} travelling witnesses")
    assignments.sort(key=lambda a: a.volunteer_id)
    return assignments


def pre_event_announcement(assignments: list[WitnessAssignment]) -> bytes:
    """The only artifact published before the event: bare commitment digests."""
    digests = sorted(a.commitment.hex() for a in assignments)
    return canonical_dumps({"commitments": digests})


def reveal_witness(
    assignment: WitnessAssignment,
    nonce: bytes,
    testimony: Testimony,
    finalized: bool = True,
) -> WitnessAssignment:
    """Open the commitment after the event and attach the testimony."""
    if not finalized:
        raise TooEarly("reveals open only after the cycle's events finalize")
    if testimony.site != assignment.target_site:
        raise BadReveal("testimony names a different site than the assignment")
    if not open_verify(assignment.commitment, assignment.commitment_payload(), nonce):
        raise BadReveal("nonce does not open the published commitment")
    assignment.revealed = (bytes(nonce), testimony)
    return assignment


@dataclass
class SiteRecord:
    site_id: str
    roll: RollList
    ground: EventGround
    claimed_deadline: int
    bodies: tuple[str, ...]

    def to_obj(self) -> dict:
        return {
            "bodies": list(self.bodies),
            "claimed_deadline": self.claimed_deadline,
            "ground": self.ground.to_obj(),
            "roll": self.roll.to_obj(),
            "site_id": self.site_id,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "SiteRecord":
        return cls(
            site_id=obj["site_id"],
            roll=RollList.from_obj(obj["roll"]),
            ground=EventGround.from_obj(obj["ground"]),
            claimed_deadline=obj["claimed_deadline"],
            bodies=tuple(obj["bodies"]),
        )


@dataclass(frozen=True)
class SiteFlag:
    site_id: str
    reasons: tuple[str, ...]

    def to_obj(self) -> dict:
        return {"reasons": list(self.reasons), "site_id": self.site_id}


@dataclass(frozen=True)
class CycleReport:
    passed_sites: tuple[str, ...]
    flagged_sites: tuple[SiteFlag, ...]

    @property
    def passed(self) -> bool:
        return not self.flagged_sites

    def reasons_for(self, site_id: str) -> tuple[str, ...]:
        for flag in self.flagged_sites:
            if flag.site_id == site_id:
                return flag.reasons
        return ()

    def to_obj(self) -> dict:
        return {
            "flagged_sites": [f.to_obj() for f in self.flagged_sites],
            "passed": self.passed,
            "passed_sites": list(self.passed_sites),
        }


def verify_cycle(
    records: list[SiteRecord],
    schedule: FederationSchedule,
    reveals: list[WitnessAssignment],
    tolerance: int = 0,
) -> CycleReport:
    """Compare every site's published roll against schedule and testimony."""
    reasons: dict[str, list[str]] = {site: [] for site in schedule.sites}
    by_site = {record.site_id: record for record in records}

    for record in records:
        site_reasons = reasons.setdefault(record.site_id, [])
        if record.site_id not in schedule.sites or record.claimed_deadline != schedule.deadline:
            site_reasons.append("DeadlineMismatch")

    seen_bodies: dict[str, str] = {}
    duplicated: set[str] = set()
    for record in records:
        for body in record.bodies:
            if body in seen_bodies and seen_bodies[body] != record.site_id:
                duplicated.add(seen_bodies[body])
                duplicated.add(record.site_id)
            else:
                seen_bodies[body] = record.site_id
    for site in duplicated:
        reasons.setdefault(site, []).append("BodyDuplication")

    verified_reveals: dict[str, list[Testimony]] = {site: [] for site in reasons}
    for assignment in reveals:
        if assignment.revealed is None:
            continue
        nonce, testimony = assignment.revealed
        if testimony.site != assignment.target_site:
            continue
        if not open_verify(assignment.commitment, assignment.commitment_payload(), nonce):
            continue
        verified_reveals.setdefault(assignment.target_site, []).append(testimony)

    for site, site_reasons in reasons.items():
        testimonies = verified_reveals.get(site, [])
        if not testimonies:
            site_reasons.append("NoCrossWitness")
            continue
        record = by_site.get(site)
        published = len(record.roll.tokens) if record is not None else 0
        for testimony in testimonies:
            if abs(testimony.observed_count - published) > tolerance or not testimony.regular:
                site_reasons.append("TestimonyContradiction")
                break

    passed = tuple(site for site in sorted(reasons) if not reasons[site])
    flagged = tuple(
        SiteFlag(site, tuple(reasons[site])) for site in sorted(reasons) if reasons[site]
    )
    return CycleReport(passed_sites=passed, flagged_sites=flagged)


@dataclass(frozen=True)
class SiteBehavior:
    kind: str = "honest"  # honest | inflate | fabricate
    inflate_k: int = 0
    fabricated_count: int = 0
    deadline_offset: int = 0
    suppress_reveals: bool = False


def _sim_token(drbg: HashDRBG) -> GroupElement:
    return GroupElement(encode(from_uniform(drbg.take(64))))


def simulate_cycle(
    world: list[Body],
    schedule: FederationSchedule,
    site_behaviors: dict[str, SiteBehavior] | None = None,
    assignments: list[WitnessAssignment] | None = None,
    seed: bytes = b"\x00" * 32,
    witnesses_per_site: int = 3,
    attendance_plan: dict[str, list[str]] | None = None,
) -> list[SiteRecord]:
    """Run one synchronized cycle across all scheduled sites.

    Honest organizers run the ceremony module faithfully; misbehaving sites
    apply their configured corruption. Travelling cross-witnesses observe
    their target site instead of participating at home, and their reveals are
    attached to ``assignments`` in place.
    """
    site_behaviors = site_behaviors or {}
    assignments = assignments or []
    drbg = HashDRBG(seed, domain=b"popkit/cycle-sim")

    if attendance_plan is not None:
        for body_id, sites in attendance_plan.items():
            if len(sites) > 1:
                raise InvalidScript(f"body {body_id!r} is scripted into {len(sites)} events")

    travelling = {a.volunteer_id: a.target_site for a in assignments}
    attending: dict[str, list[str]] = {site: [] for site in schedule.sites}
    for body in world:
        if body.body_id in travelling:
            continue  # observing elsewhere, not participating
        site = body.home_site
        if attendance_plan is not None and body.body_id in attendance_plan:
            plan = attendance_plan[body.body_id]
            if not plan:
                continue
            site = plan[0]
        behavior = site_behaviors.get(site, SiteBehavior())
        if site in attending and behavior.kind != "fabricate":
            attending[site].append(body.body_id)

    records: list[SiteRecord] = []
    for site in schedule.sites:
        behavior = site_behaviors.get(site, SiteBehavior())
        claimed_deadline = schedule.deadline + behavior.deadline_offset
        event_id = f"{site}/cycle-{schedule.cycle}"

        if behavior.kind == "fabricate":
            count = behavior.fabricated_count or drbg.randrange(5, 13)
            tokens = tuple(_sim_token(drbg) for _ in range(count))
            roll = RollList(
                event_id=event_id,
                cycle=schedule.cycle,
                tokens=tokens,
                list_digest=ceremony.roll_digest(event_id, schedule.cycle, tokens),
            )
            records.append(
                SiteRecord(
                    site_id=site,
                    roll=roll,
                    ground=EventGround(scan_count=0),
                    claimed_deadline=claimed_deadline,
                    bodies=(),
                )
            )
            continue

        config = EventConfig(
            event_id=event_id,
            site_id=site,
            cycle=schedule.cycle,
            deadline=schedule.deadline,
        )
        state = ceremony.open_event(config)
        for body_id in attending[site]:
            ceremony.admit(state, body_id, drbg.randrange(0, schedule.deadline))
        ceremony.seal(state, schedule.deadline)
        for body_id in attending[site]:
            ceremony.scan_exit(state, body_id, _sim_token(drbg))
        if behavior.kind == "inflate" and behavior.inflate_k > 0:
            ceremony.inject_attack(state, Inflate(behavior.inflate_k))
        roll = ceremony.publish(state)
        for w in range(witnesses_per_site):
            witness = keygen(drbg.take(32))
            ceremony.add_cosignature(
                roll, cosign(witness.secret, roll.list_digest), state.ground.scan_count
            )
        ceremony.finalize(state)
        records.append(
            SiteRecord(
                site_id=site,
                roll=roll,
                ground=state.ground,
                claimed_deadline=claimed_deadline,
                bodies=tuple(attending[site]),
            )
        )

    by_site = {record.site_id: record for record in records}
    for assignment in assignments:
        behavior = site_behaviors.get(assignment.target_site, SiteBehavior())
        if behavior.suppress_reveals:
            continue  # witness bribed or blocked; nothing surfaces
        record = by_site.get(assignment.target_site)
        if record is None:
            continue
        if behavior.kind == "fabricate":
            testimony = Testimony(assignment.target_site, observed_count=0, regular=False)
        else:
            testimony = Testimony(assignment.target_site, record.ground.scan_count, regular=True)
        reveal_witness(assignment, assignment.nonce, testimony, finalized=True)

    return records
