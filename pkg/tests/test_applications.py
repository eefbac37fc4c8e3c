import math

import pytest

from _builders import make_drbg, make_keys, make_roll
from popkit.applications import (
    CheckResult,
    KTooLarge,
    SortitionResult,
    TagProof,
    count_unique_followers,
    count_unique_upvotes,
    make_service_tag,
    make_upvote,
    service_check,
    service_scope,
    sortition_select,
    write_count_csv,
)
from popkit.ceremony import TokenNotInRoll
from popkit.crypto import keygen
from popkit.rng import seed_from_int

KEYS = make_keys(10, seed=21)
ROLL = make_roll(KEYS, event_id="apps-event", cycle=2)


def test_tag_accept_then_duplicate():
    seen: set = set()
    proof = make_service_tag(KEYS[0].secret, ROLL, "signup", "site-x")
    assert service_check(proof, ROLL, "signup", "site-x", seen) is CheckResult.ACCEPTED
    again = make_service_tag(KEYS[0].secret, ROLL, "signup", "site-x")
    assert service_check(again, ROLL, "signup", "site-x", seen) is CheckResult.DUPLICATE
    other = make_service_tag(KEYS[1].secret, ROLL, "signup", "site-x")
    assert service_check(other, ROLL, "signup", "site-x", seen) is CheckResult.ACCEPTED


def test_tag_is_invalid_under_wrong_action():
    seen: set = set()
    proof = make_service_tag(KEYS[0].secret, ROLL, "signup", "site-x")
    assert service_check(proof, ROLL, "signup", "site-y", seen) is CheckResult.INVALID
    assert service_check(proof, ROLL, "other", "site-x", seen) is CheckResult.INVALID


def test_tag_is_invalid_against_other_roll():
    other_roll = make_roll(make_keys(10, seed=22), event_id="apps-event", cycle=2)
    seen: set = set()
    proof = make_service_tag(KEYS[0].secret, ROLL, "signup", "site-x")
    assert service_check(proof, other_roll, "signup", "site-x", seen) is CheckResult.INVALID


def test_tag_requires_roll_membership():
    outsider = keygen(b"\x71" * 32)
    with pytest.raises(TokenNotInRoll):
        make_service_tag(outsider.secret, ROLL, "signup", "site-x")


def test_tag_proof_roundtrip():
    proof = make_service_tag(KEYS[2].secret, ROLL, "signup", "site-x")
    back = TagProof.from_obj(proof.to_obj())
    assert back.tag == proof.tag
    seen: set = set()
    assert service_check(back, ROLL, "signup", "site-x", seen) is CheckResult.ACCEPTED


def test_scopes_differ_per_action_not_per_account():
    assert service_scope("like", "post-1") != service_scope("like", "post-2")
    assert service_scope("like", "post-1") != service_scope("follow", "post-1")
    up_a = make_upvote(KEYS[0].secret, ROLL, "post-1", "alice-main")
    up_b = make_upvote(KEYS[0].secret, ROLL, "post-1", "alice-alt")
    assert up_a.proof.tag == up_b.proof.tag  # accounts collapse
    up_c = make_upvote(KEYS[0].secret, ROLL, "post-2", "alice-main")
    assert up_a.proof.tag != up_c.proof.tag  # posts do not


def test_upvote_counting_oracle():
    drbg = make_drbg(23, domain=b"tests/upvotes")
    for round_no in range(20):
        n_persons = 1 + drbg.randbelow(10)
        upvoters = sorted({drbg.randbelow(n_persons) for _ in range(drbg.randbelow(12))})
        upvotes = []
        for person in upvoters:
            for acct in range(1 + drbg.randbelow(4)):
                upvotes.append(
                    make_upvote(
                        KEYS[person].secret, ROLL, "post-7", f"p{person}-acct{acct}"
                    )
                )
        drbg.shuffle(upvotes)
        assert count_unique_upvotes("post-7", upvotes, ROLL) == len(upvoters)


def test_upvotes_for_other_posts_are_ignored():
    votes = [
        make_upvote(KEYS[0].secret, ROLL, "post-a", "x"),
        make_upvote(KEYS[1].secret, ROLL, "post-b", "y"),
    ]
    assert count_unique_upvotes("post-a", votes, ROLL) == 1


def test_follower_counting():
    follows = []
    for person in (0, 1, 1, 2):
        proof = make_service_tag(KEYS[person].secret, ROLL, "follow", "star-account")
        follows.append(proof)
    assert count_unique_followers("star-account", follows, ROLL) == 3


def test_sortition_basics():
    result = sortition_select(ROLL, seed_from_int(5), 4)
    assert isinstance(result, SortitionResult)
    assert len(result.selected) == 4
    assert len(set(result.selected)) == 4
    assert all(0 <= i < len(ROLL.tokens) for i in result.selected)
    assert result.selected == tuple(sorted(result.selected))
    again = sortition_select(ROLL, seed_from_int(5), 4)
    assert again.selected == result.selected


def test_sortition_bounds():
    assert sortition_select(ROLL, seed_from_int(1), 0).selected == ()
    assert sortition_select(ROLL, seed_from_int(1), len(ROLL.tokens)).selected == tuple(
        range(len(ROLL.tokens))
    )
    with pytest.raises(KTooLarge):
        sortition_select(ROLL, seed_from_int(1), len(ROLL.tokens) + 1)
    with pytest.raises(KTooLarge):
        sortition_select(ROLL, seed_from_int(1), -1)


def test_sortition_depends_on_seed_and_roll():
    a = sortition_select(ROLL, seed_from_int(1), 5).selected
    b = sortition_select(ROLL, seed_from_int(2), 5).selected
    assert a != b  # overwhelmingly likely; pinned seeds
    other_roll = make_roll(make_keys(10, seed=24))
    c = sortition_select(other_roll, seed_from_int(1), 5).selected
    assert a != c


def test_sortition_fairness_and_permutation_invariance():
    n, k, draws = 12, 3, 2000
    keys = make_keys(n, seed=25)
    roll = make_roll(keys, event_id="fair", cycle=1)
    shuffled_keys = list(keys)
    make_drbg(26).shuffle(shuffled_keys)
    shuffled_roll = make_roll(shuffled_keys, event_id="fair-shuffled", cycle=1)

    expected = draws * k / n
    sigma = math.sqrt(draws * (k / n) * (1 - k / n))
    for current in (roll, shuffled_roll):
        counts = {pair.public.hex(): 0 for pair in keys}
        for s in range(draws):
            result = sortition_select(current, seed_from_int(s), k)
            for idx in result.selected:
                counts[current.tokens[idx].hex()] += 1
        for token_hex, count in counts.items():
            assert abs(count - expected) <= 3.5 * sigma, (token_hex, count, expected)


def test_write_count_csv(tmp_path):
    path = tmp_path / "counts.csv"
    write_count_csv(
        path,
        [
            {"fixture_id": "f0", "persons": 3, "accounts": 9, "counted": 3},
            {"fixture_id": "f1", "persons": 1, "accounts": 4, "counted": 1},
        ],
    )
    text = path.read_text()
    lines = text.strip().splitlines()
    assert lines[0] == "fixture_id,persons,accounts,counted"
    assert lines[1] == "f0,3,9,3"
    assert len(lines) == 3
