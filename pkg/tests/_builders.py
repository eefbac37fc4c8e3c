"""Shared deterministic fixture builders for the test suite."""

from __future__ import annotations

from popkit.ceremony import (
    EventConfig,
    RollList,
    add_cosignature,
    admit,
    finalize,
    inject_attack,
    open_event,
    publish,
    roll_digest,
    scan_exit,
    seal,
)
from popkit.crypto import PersonKeyPair, cosign, keygen
from popkit.rng import HashDRBG, seed_from_int


def make_drbg(seed: int, domain: bytes = b"popkit-tests") -> HashDRBG:
    return HashDRBG(seed_from_int(seed), domain=domain)


def make_keys(n: int, seed: int = 1, domain: bytes = b"popkit-tests/keys") -> list[PersonKeyPair]:
    drbg = HashDRBG(seed_from_int(seed), domain=domain)
    return [keygen(drbg.take(32)) for _ in range(n)]


def make_roll(keys, event_id: str = "fixture-event", cycle: int = 1) -> RollList:
    tokens = tuple(pair.public for pair in keys)
    return RollList(
        event_id=event_id,
        cycle=cycle,
        tokens=tokens,
        list_digest=roll_digest(event_id, cycle, tokens),
        cosignatures=(),
        attested_counts=(),
    )


def run_event(
    n_attendees: int,
    n_witnesses: int,
    seed: int = 1,
    attacks=(),
    event_id: str = "unit-event",
    deadline: int = 50,
    cosign_threshold: float = 0.2,
):
    """Run one full ceremony; attacks are injected after honest scanning."""
    config = EventConfig(
        event_id=event_id,
        site_id="site-a",
        cycle=1,
        deadline=deadline,
        cosign_threshold=cosign_threshold,
    )
    drbg = HashDRBG(seed_from_int(seed), domain=b"popkit-tests/event")
    state = open_event(config)
    attendees = [f"att-{i:03d}" for i in range(n_attendees)]
    for attendee in attendees:
        state = admit(state, attendee, now=config.opened_at)
    state = seal(state, now=deadline)
    for attendee in attendees:
        state = scan_exit(state, attendee, keygen(drbg.take(32)).public)
    for attack in attacks:
        state = inject_attack(state, attack)
    roll = publish(state)
    for _ in range(n_witnesses):
        witness = keygen(drbg.take(32))
        cosig = cosign(witness.secret, roll.list_digest)
        roll = add_cosignature(roll, cosig, attested_count=state.ground.scan_count)
    finalize(state)
    return roll, state.ground, attendees
