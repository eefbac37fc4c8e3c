import pytest

from _builders import make_drbg, make_keys, make_roll
from popkit.canonical import canonical_loads
from popkit.ceremony import TokenNotInRoll
from popkit.coercion import (
    AUTH_LEN,
    Kiosk,
    PrintedSheet,
    PrintedToken,
    TallyKey,
    TicketReused,
    booth_delegate,
    dedupe_delegations,
    delegation_scope,
    filter_real,
    kiosk_issue,
    public_validate,
    verify_delegation,
)
from popkit.crypto import keygen
from popkit.group import GroupElement


def make_sheet(seed: int = 1, k_fakes: int = 3):
    drbg = make_drbg(seed, domain=b"tests/coercion")
    key = TallyKey(drbg.take(32))
    sheet = kiosk_issue(Kiosk(), "ticket-0", key, k_fakes=k_fakes, seed=drbg.take(32))
    return key, sheet


def test_sheet_shape():
    key, sheet = make_sheet()
    assert len(sheet.tokens) == 4
    assert sheet.real_index == 0
    assert sheet.real_token is sheet.tokens[0]
    for token in sheet.tokens:
        assert public_validate(token)
        assert len(token.auth) == AUTH_LEN


def test_ticket_reuse_rejected():
    drbg = make_drbg(2, domain=b"tests/coercion")
    key = TallyKey(drbg.take(32))
    kiosk = Kiosk()
    kiosk_issue(kiosk, "ticket-a", key, k_fakes=2, seed=drbg.take(32))
    with pytest.raises(TicketReused):
        kiosk_issue(kiosk, "ticket-a", key, k_fakes=2, seed=drbg.take(32))


def test_needs_at_least_one_fake():
    drbg = make_drbg(3, domain=b"tests/coercion")
    key = TallyKey(drbg.take(32))
    with pytest.raises(ValueError):
        kiosk_issue(Kiosk(), "t", key, k_fakes=0, seed=drbg.take(32))


def test_tally_key_must_be_32_bytes():
    with pytest.raises(ValueError):
        TallyKey(b"short")


def test_filter_real_with_correct_and_wrong_key():
    key, sheet = make_sheet(4)
    kept = filter_real(sheet.tokens, key)
    assert kept == [sheet.real_token]
    wrong = TallyKey(b"\x55" * 32)
    assert filter_real(sheet.tokens, wrong) == []


def test_public_serialization_carries_no_marking():
    key, sheet = make_sheet(5)
    tokens = canonical_loads(sheet.public_serialize())
    blob = sheet.public_serialize().decode("utf-8")
    assert "real" not in blob  # neither real_index nor real_secret appear
    assert len(tokens) == 4
    # every printed token has the same shape: public element plus auth bytes
    for entry in tokens:
        assert set(entry) == {"auth", "public"}
        assert len(bytes.fromhex(entry["auth"])) == AUTH_LEN
        GroupElement.from_hex(entry["public"])


def test_fake_publics_are_valid_group_elements():
    _, sheet = make_sheet(6)
    for token in sheet.tokens:
        GroupElement.from_bytes(token.public.data)


def test_delegation_roundtrip():
    keys = make_keys(5, seed=7)
    roll = make_roll(keys, cycle=3)
    delegate = keygen(b"\x61" * 32)
    record = booth_delegate(keys[2].secret, roll, delegate.public)
    assert verify_delegation(record, roll)
    assert record.delegate_public == delegate.public


def test_delegation_binds_delegate_and_roll():
    import dataclasses

    keys = make_keys(5, seed=8)
    roll = make_roll(keys, cycle=3)
    other_roll = make_roll(make_keys(5, seed=9), cycle=3)
    delegate = keygen(b"\x62" * 32)
    record = booth_delegate(keys[0].secret, roll, delegate.public)
    assert not verify_delegation(record, other_roll)
    impostor = keygen(b"\x63" * 32)
    bent = dataclasses.replace(record, delegate_public=impostor.public)
    assert not verify_delegation(bent, roll)


def test_delegation_scope_is_per_cycle():
    keys = make_keys(3, seed=10)
    roll_a = make_roll(keys, cycle=1)
    roll_b = make_roll(keys, cycle=2)
    delegate = keygen(b"\x64" * 32)
    record_a = booth_delegate(keys[0].secret, roll_a, delegate.public)
    record_b = booth_delegate(keys[0].secret, roll_b, delegate.public)
    assert delegation_scope(1) != delegation_scope(2)
    assert record_a.delegator_tag != record_b.delegator_tag
    assert not verify_delegation(record_a, roll_b)


def test_delegation_requires_roll_membership():
    keys = make_keys(3, seed=11)
    roll = make_roll(keys)
    outsider = keygen(b"\x65" * 32)
    with pytest.raises(TokenNotInRoll):
        booth_delegate(outsider.secret, roll, keys[0].public)


def test_dedupe_keeps_last_delegation_per_person():
    keys = make_keys(4, seed=12)
    roll = make_roll(keys, cycle=5)
    first = booth_delegate(keys[1].secret, roll, keygen(b"\x66" * 32).public)
    second = booth_delegate(keys[1].secret, roll, keygen(b"\x67" * 32).public)
    other = booth_delegate(keys[2].secret, roll, keygen(b"\x68" * 32).public)
    deduped = dedupe_delegations([first, second, other])
    assert len(deduped) == 2
    assert deduped[first.delegator_tag.hex()] == second
    assert deduped[other.delegator_tag.hex()] == other


def test_delegation_record_roundtrip():
    from popkit.coercion import DelegationRecord

    keys = make_keys(3, seed=13)
    roll = make_roll(keys, cycle=2)
    record = booth_delegate(keys[0].secret, roll, keygen(b"\x69" * 32).public)
    back = DelegationRecord.from_obj(record.to_obj())
    assert back == record
    assert verify_delegation(back, roll)
