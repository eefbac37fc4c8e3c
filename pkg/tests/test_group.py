import pytest
from hypothesis import given, strategies as st

from popkit.group import (
    DecodeError,
    GENERATOR,
    GroupElement,
    IDENTITY,
    ORDER,
    base_mul,
    decode,
    double_mul,
    encode,
    from_uniform,
    point_add,
    point_eq,
    point_mul,
    point_neg,
)

# Published base-point multiples for this group construction.
KNOWN_MULTIPLES = [
    "0000000000000000000000000000000000000000000000000000000000000000",
    "e2f2ae0a6abc4e71a884a961c500515f58e30b6aa582dd8db6a65945e08d2d76",
    "6a493210f7499cd17fecb510ae0cea23a110e8d5b901f8acadd3095c73a3b919",
    "94741f5d5d52755ece4f23f044ee27d5d1ea1e2bd196b462166b16152a9d0259",
    "da80862773358b466ffadfe0b3293ab3d9fd53c5ea6c955358f568322daf6a57",
]

scalars = st.integers(min_value=0, max_value=ORDER - 1)


def test_known_multiples():
    for k, expected in enumerate(KNOWN_MULTIPLES):
        assert encode(base_mul(k)).hex() == expected


def test_identity_encoding():
    assert encode(IDENTITY) == bytes(32)
    assert encode(base_mul(0)) == bytes(32)


def test_order_annihilates_generator():
    assert encode(point_mul(GENERATOR, ORDER)) == bytes(32)
    assert encode(base_mul(ORDER)) == bytes(32)


@given(scalars, scalars)
def test_addition_matches_scalar_arithmetic(a, b):
    lhs = point_add(base_mul(a), base_mul(b))
    rhs = base_mul((a + b) % ORDER)
    assert point_eq(lhs, rhs)
    assert encode(lhs) == encode(rhs)


@given(scalars)
def test_negation(a):
    total = point_add(base_mul(a), point_neg(base_mul(a)))
    assert encode(total) == bytes(32)


@given(scalars, scalars)
def test_double_mul_matches_separate_muls(a, b):
    h = from_uniform(b"\x5a" * 64)
    lhs = double_mul(a, GENERATOR, b, h)
    rhs = point_add(base_mul(a), point_mul(h, b))
    assert encode(lhs) == encode(rhs)


@given(st.binary(min_size=64, max_size=64))
def test_from_uniform_produces_valid_encodings(blob):
    point = from_uniform(blob)
    enc = encode(point)
    assert point_eq(decode(enc), point)


def test_from_uniform_deterministic_and_spread():
    a = encode(from_uniform(b"\x01" * 64))
    b = encode(from_uniform(b"\x02" * 64))
    assert a == encode(from_uniform(b"\x01" * 64))
    assert a != b


def test_decode_encode_roundtrip():
    for k in range(1, 40):
        enc = encode(base_mul(k))
        assert encode(decode(enc)) == enc


def test_decode_rejects_noncanonical():
    with pytest.raises(DecodeError):
        decode(b"\xff" * 32)  # field-overflowing encoding
    odd = bytearray(encode(GENERATOR))
    odd[0] |= 1  # negative (odd) field element
    with pytest.raises(DecodeError):
        decode(bytes(odd))
    with pytest.raises(DecodeError):
        decode(b"\x00" * 31)  # wrong length


def test_decode_rejects_off_group_probes():
    rejected = 0
    for probe in range(2, 60):
        candidate = probe.to_bytes(32, "little")
        try:
            decode(candidate)
        except DecodeError:
            rejected += 1
    assert rejected > 0  # plenty of small field values are not square


def test_point_eq_across_representations():
    # The same element reached through different addition chains must compare equal.
    p = point_add(point_add(base_mul(3), base_mul(5)), base_mul(7))
    q = base_mul(15)
    assert point_eq(p, q)
    assert not point_eq(p, base_mul(16))


def test_group_element_wrapper():
    g = GroupElement.generator()
    assert GroupElement.from_hex(g.hex()) == g
    assert g.mul(2) == GroupElement.from_bytes(bytes.fromhex(KNOWN_MULTIPLES[2]))
    assert g.add(g) == g.mul(2)
    assert GroupElement.identity().data == bytes(32)
    with pytest.raises(DecodeError):
        GroupElement.from_bytes(b"\xff" * 32)
