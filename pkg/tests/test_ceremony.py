import math

import pytest
from hypothesis import given, strategies as st

from _builders import make_drbg, make_keys, run_event
from popkit.ceremony import (
    AlreadyScanned,
    BadCosignature,
    ConfigInvalid,
    DoubleScan,
    DuplicateEntry,
    DuplicateWitness,
    EntryAfterSeal,
    EventConfig,
    EventGround,
    Inflate,
    LateEntry,
    NotPresent,
    NothingScanned,
    Phase,
    PhaseError,
    RollList,
    SealTooEarly,
    TokenReused,
    VerifyPolicy,
    add_cosignature,
    admit,
    inject_attack,
    open_event,
    publish,
    scan_exit,
    seal,
    verify_event,
)
from popkit.crypto import cosign, keygen


def fresh_state(deadline: int = 50):
    config = EventConfig(
        event_id="ev", site_id="s", cycle=1, deadline=deadline, cosign_threshold=0.2
    )
    return open_event(config)


def test_happy_path_phases():
    state = fresh_state()
    assert state.phase is Phase.LOBBY_OPEN
    state = admit(state, "a", now=0)
    state = seal(state, now=50)
    assert state.phase is Phase.SEALED
    state = scan_exit(state, "a", keygen(b"\x01" * 32).public)
    assert state.phase is Phase.SCANNING
    roll = publish(state)
    assert state.phase is Phase.PUBLISHED
    assert len(roll.tokens) == 1
    assert state.ground.scan_count == 1


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        EventConfig(event_id="", site_id="s", cycle=1, deadline=10).validate()
    with pytest.raises(ConfigInvalid):
        EventConfig(event_id="e", site_id="s", cycle=1, deadline=0).validate()
    with pytest.raises(ConfigInvalid):
        EventConfig(event_id="e", site_id="s", cycle=1, deadline=10, cosign_threshold=0.0).validate()
    with pytest.raises(ConfigInvalid):
        EventConfig(event_id="e", site_id="s", cycle=1, deadline=10, size_tier="galactic").validate()


def test_admit_rules():
    state = fresh_state(deadline=10)
    state = admit(state, "a", now=0)
    with pytest.raises(DuplicateEntry):
        admit(state, "a", now=1)
    with pytest.raises(EntryAfterSeal):
        admit(state, "b", now=10)  # the deadline tick itself is too late
    state = seal(state, now=10)
    with pytest.raises(EntryAfterSeal):
        admit(state, "c", now=3)


def test_seal_rules():
    state = fresh_state(deadline=10)
    state = admit(state, "a", now=0)
    with pytest.raises(SealTooEarly):
        seal(state, now=9)
    state = seal(state, now=10)
    with pytest.raises(PhaseError):
        seal(state, now=11)


def test_scan_rules():
    state = fresh_state(deadline=10)
    state = admit(state, "a", now=0)
    state = admit(state, "b", now=0)
    token_a = keygen(b"\x01" * 32).public
    with pytest.raises(PhaseError):
        scan_exit(state, "a", token_a)  # lobby still open
    state = seal(state, now=10)
    state = scan_exit(state, "a", token_a)
    with pytest.raises(AlreadyScanned):
        scan_exit(state, "a", keygen(b"\x02" * 32).public)
    with pytest.raises(TokenReused):
        scan_exit(state, "b", token_a)
    with pytest.raises(NotPresent):
        scan_exit(state, "zz", keygen(b"\x03" * 32).public)


def test_publish_requires_scans():
    state = fresh_state(deadline=10)
    state = admit(state, "a", now=0)
    state = seal(state, now=10)
    with pytest.raises(NothingScanned):
        publish(state)


def test_cosignature_rules():
    roll, ground, _ = run_event(4, 0, seed=5)
    witness = keygen(b"\x22" * 32)
    good = cosign(witness.secret, roll.list_digest)
    roll = add_cosignature(roll, good, attested_count=ground.scan_count)
    assert len(roll.cosignatures) == 1
    with pytest.raises(DuplicateWitness):
        add_cosignature(roll, good, attested_count=ground.scan_count)
    other = cosign(keygen(b"\x23" * 32).secret, b"\x00" * 32)
    with pytest.raises(BadCosignature):
        add_cosignature(roll, other, attested_count=ground.scan_count)


@given(st.integers(min_value=1, max_value=25), st.integers(min_value=0, max_value=3))
def test_conservation_and_honest_verification(n_attendees, extra_witnesses):
    n_witnesses = max(3, math.ceil(0.2 * n_attendees)) + extra_witnesses
    roll, ground, _ = run_event(n_attendees, n_witnesses, seed=n_attendees * 31 + n_witnesses)
    assert len(roll.tokens) == ground.scan_count == n_attendees
    assert len(set(token.data for token in roll.tokens)) == n_attendees
    report = verify_event(roll, ground, VerifyPolicy())
    assert report.passed
    assert report.findings == ()


def test_inflation_detected():
    roll, ground, _ = run_event(8, 4, seed=9, attacks=[Inflate(k=3)])
    assert len(roll.tokens) == 11 and ground.scan_count == 8
    report = verify_event(roll, ground, VerifyPolicy())
    assert not report.passed
    assert "InflationDetected" in {finding.code for finding in report.findings}


def test_double_scan_detected():
    roll, ground, _ = run_event(8, 4, seed=10, attacks=[DoubleScan(attendee_id="att-002")])
    # the duplicate pass went through the scanner, so counts still agree
    assert len(roll.tokens) == ground.scan_count == 9
    report = verify_event(roll, ground, VerifyPolicy())
    assert not report.passed
    codes = {finding.code for finding in report.findings}
    assert "DuplicateScan" in codes
    assert "InflationDetected" not in codes


def test_late_entry_detected():
    roll, ground, _ = run_event(8, 4, seed=11, attacks=[LateEntry(attendee_id="gate-crasher")])
    report = verify_event(roll, ground, VerifyPolicy())
    assert not report.passed
    assert "EntryAfterSeal" in {finding.code for finding in report.findings}


def test_digest_mismatch_detected():
    import dataclasses

    roll, ground, _ = run_event(5, 4, seed=12)
    bent = dataclasses.replace(roll, list_digest=b"\x00" * 32)
    report = verify_event(bent, ground, VerifyPolicy())
    assert not report.passed
    assert "DigestMismatch" in {finding.code for finding in report.findings}


def test_cosign_shortfall_detected():
    roll, ground, _ = run_event(10, 2, seed=13)  # below min_witnesses=3
    report = verify_event(roll, ground, VerifyPolicy())
    assert not report.passed
    assert "CosignShortfall" in {finding.code for finding in report.findings}
    relaxed = VerifyPolicy(cosign_threshold=0.2, min_witnesses=2)
    assert verify_event(roll, ground, relaxed).passed


def test_cosign_threshold_scales_with_attendance():
    # 30 attendees at threshold 0.2 need ceil(6) witnesses; 4 is a shortfall.
    roll, ground, _ = run_event(30, 4, seed=14)
    report = verify_event(roll, ground, VerifyPolicy(cosign_threshold=0.2, min_witnesses=3))
    assert not report.passed
    assert "CosignShortfall" in {finding.code for finding in report.findings}


def test_attacks_only_inject_during_scan_window():
    state = fresh_state()
    with pytest.raises(PhaseError):
        inject_attack(state, Inflate(k=1))


def test_roll_serialization_roundtrip():
    roll, ground, _ = run_event(6, 4, seed=15)
    back = RollList.from_obj(roll.to_obj())
    assert back == roll
    assert back.serialize() == roll.serialize()
    assert EventGround.from_obj(ground.to_obj()) == ground


def test_attested_count_is_the_strictest_claim():
    roll, ground, _ = run_event(6, 0, seed=16)
    assert roll.attested_count == len(roll.tokens)
    witness_a, witness_b = make_keys(2, seed=17)
    roll = add_cosignature(roll, cosign(witness_a.secret, roll.list_digest), attested_count=6)
    roll = add_cosignature(roll, cosign(witness_b.secret, roll.list_digest), attested_count=9)
    assert roll.attested_count == 9


def test_roll_leaks_no_attendee_identities():
    roll, _, attendees = run_event(10, 4, seed=18)
    blob = roll.serialize().decode("utf-8")
    for attendee in attendees:
        assert attendee not in blob


def test_phase_ordering_is_enforced():
    roll, ground, _ = run_event(3, 3, seed=19)
    state = fresh_state()
    with pytest.raises(PhaseError):
        publish(state)  # cannot publish from the lobby
