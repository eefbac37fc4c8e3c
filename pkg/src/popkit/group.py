"""ristretto255: a prime-order group with canonical 32-byte encodings.

Pure-Python implementation of the construction standardized in RFC 9496,
with gmpy2 integers for field arithmetic. The group has prime order
ORDER = 2^252 + 27742317777372353535851937790883648493 (about 2^252, giving
the usual ~126-bit generic-group security margin quoted as 128-bit for this
curve family). Every element has exactly one valid 32-byte encoding;
``decode`` rejects anything non-canonical or off-group, so byte equality of
encodings is group-element equality.

Internal representation is extended twisted Edwards coordinates (X, Y, Z, T)
on curve25519's -1-twisted form; the ristretto encode/decode layer quotients
out the cofactor. Points flow through this module as plain 4-tuples; the
``GroupElement`` dataclass wraps a canonical encoding for use in artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpz

P = mpz(2**255 - 19)
ORDER = 2**252 + 27742317777372353535851937790883648493
ELEMENT_LEN = 32

D = mpz(37095705934669439343138083508754565189542113879843219016388785533085940283555)
SQRT_M1 = mpz(19681161376707505956807079304988542015446066515923890162744021073123829784752)
SQRT_AD_MINUS_ONE = mpz(25063068953384623474111414158702152701244531502492656460079210482610430750235)
INVSQRT_A_MINUS_D = mpz(54469307008909316920995813868745141605393597292927456921205312896311721017578)
ONE_MINUS_D_SQ = mpz(1159843021668779879193775521855586647937357759715417654439879720876111806838)
D_MINUS_ONE_SQ = mpz(40440834346308536858101042469323190826248399146238708352240133220865137265952)

_TWO_D = 2 * D % P

# The constants above are fixed by the field; fail loudly if a literal is off.
assert D == -121665 * pow(mpz(121666), P - 2, P) % P
assert SQRT_M1 * SQRT_M1 % P == P - 1
assert SQRT_AD_MINUS_ONE**2 % P == (P - 1 - D) % P
assert INVSQRT_A_MINUS_D**2 * (P - 1 - D) % P == 1
assert ONE_MINUS_D_SQ == (1 - D * D) % P
assert D_MINUS_ONE_SQ == (D - 1) ** 2 % P

Point = tuple  # (X, Y, Z, T), all mpz

IDENTITY: Point = (mpz(0), mpz(1), mpz(1), mpz(0))


class DecodeError(ValueError):
    """Raised for non-canonical or off-group encodings."""


def _is_negative(x) -> bool:
    return bool(x & 1)


def _abs(x):
    return (P - x) % P if x & 1 else x


def _sqrt_ratio_m1(u, v):
    """Return (was_square, r) with r = sqrt(u/v) or sqrt(SQRT_M1 * u/v)."""
    v3 = v * v % P * v % P
    v7 = v3 * v3 % P * v % P
    r = u * v3 % P * pow(u * v7 % P, (P - 5) // 8, P) % P
    check = v * r % P * r % P
    u_neg = (P - u) % P
    correct_sign = check == u % P
    flipped_sign = check == u_neg
    flipped_sign_i = check == u_neg * SQRT_M1 % P
    if flipped_sign or flipped_sign_i:
        r = r * SQRT_M1 % P
    return (correct_sign or flipped_sign), _abs(r)


def point_add(a: Point, b: Point) -> Point:
    x1, y1, z1, t1 = a
    x2, y2, z2, t2 = b
    aa = (y1 - x1) * (y2 - x2) % P
    bb = (y1 + x1) * (y2 + x2) % P
    cc = t1 * t2 % P * _TWO_D % P
    dd = 2 * z1 * z2 % P
    e = bb - aa
    f = dd - cc
    g = dd + cc
    h = bb + aa
    return (e * f % P, g * h % P, f * g % P, e * h % P)


def point_double(a: Point) -> Point:
    x, y, z, _ = a
    aa = x * x % P
    bb = y * y % P
    cc = 2 * z * z % P
    h = (aa + bb) % P
    e = (h - (x + y) * (x + y)) % P
    g = (aa - bb) % P
    f = (cc + g) % P
    return (e * f % P, g * h % P, f * g % P, e * h % P)


def point_neg(a: Point) -> Point:
    x, y, z, t = a
    return ((P - x) % P, y, z, (P - t) % P)


def point_eq(a: Point, b: Point) -> bool:
    # Equality as ristretto elements: either relation identifies the coset.
    x1, y1, _, _ = a
    x2, y2, _, _ = b
    return x1 * y2 % P == y1 * x2 % P or y1 * y2 % P == x1 * x2 % P


def _odd_window(a: Point):
    tbl = [IDENTITY, a]
    for i in range(2, 16):
        tbl.append(point_add(tbl[i - 1], a))
    return tbl


def point_mul(a: Point, k: int) -> Point:
    """Variable-base scalar multiplication, fixed 4-bit windows."""
    k = int(k) % ORDER
    if k == 0:
        return IDENTITY
    tbl = _odd_window(a)
    nibbles = []
    while k:
        nibbles.append(k & 15)
        k >>= 4
    acc = IDENTITY
    for d in reversed(nibbles):
        acc = point_double(point_double(point_double(point_double(acc))))
        if d:
            acc = point_add(acc, tbl[d])
    return acc


def double_mul(k1: int, a: Point, k2: int, b: Point) -> Point:
    """a^k1 * b^k2 with interleaved windows (one shared doubling chain)."""
    k1 = int(k1) % ORDER
    k2 = int(k2) % ORDER
    ta = _odd_window(a)
    tb = _odd_window(b)
    na, nb = [], []
    while k1 or k2:
        na.append(k1 & 15)
        nb.append(k2 & 15)
        k1 >>= 4
        k2 >>= 4
    acc = IDENTITY
    for da, db in zip(reversed(na), reversed(nb)):
        acc = point_double(point_double(point_double(point_double(acc))))
        if da:
            acc = point_add(acc, ta[da])
        if db:
            acc = point_add(acc, tb[db])
    return acc


def _basepoint() -> Point:
    y = 4 * pow(mpz(5), P - 2, P) % P
    _, x = _sqrt_ratio_m1((y * y - 1) % P, (D * y * y + 1) % P)
    return (x, y, mpz(1), x * y % P)


GENERATOR: Point = _basepoint()

_BASE_TABLE: list | None = None


def base_mul(k: int) -> Point:
    """generator^k via a precomputed table (64 radix-16 digit tables)."""
    global _BASE_TABLE
    if _BASE_TABLE is None:
        tables = []
        a = GENERATOR
        for _ in range(64):
            tables.append(_odd_window(a))
            a = point_double(point_double(point_double(point_double(a))))
        _BASE_TABLE = tables
    k = int(k) % ORDER
    acc = IDENTITY
    i = 0
    while k:
        d = k & 15
        if d:
            acc = point_add(acc, _BASE_TABLE[i][d])
        k >>= 4
        i += 1
    return acc


def decode(data: bytes) -> Point:
    """Decode a canonical 32-byte encoding; raise DecodeError otherwise."""
    if not isinstance(data, (bytes, bytearray)) or len(data) != ELEMENT_LEN:
        raise DecodeError("encoding must be exactly 32 bytes")
    s = mpz(int.from_bytes(data, "little"))
    if s >= P or _is_negative(s):
        raise DecodeError("non-canonical field element")
    ss = s * s % P
    u1 = (1 - ss) % P
    u2 = (1 + ss) % P
    u2_sqr = u2 * u2 % P
    v = (-(D * u1 % P) * u1 - u2_sqr) % P
    was_square, invsqrt = _sqrt_ratio_m1(mpz(1), v * u2_sqr % P)
    den_x = invsqrt * u2 % P
    den_y = invsqrt * den_x % P * v % P
    x = _abs(2 * s % P * den_x % P)
    y = u1 * den_y % P
    t = x * y % P
    if not was_square or _is_negative(t) or y == 0:
        raise DecodeError("encoding is not on the group")
    return (x, y, mpz(1), t)


def encode(point: Point) -> bytes:
    """Canonical 32-byte encoding of a point."""
    x0, y0, z0, t0 = point
    u1 = (z0 + y0) * (z0 - y0) % P
    u2 = x0 * y0 % P
    _, invsqrt = _sqrt_ratio_m1(mpz(1), u1 * u2 % P * u2 % P)
    den1 = invsqrt * u1 % P
    den2 = invsqrt * u2 % P
    z_inv = den1 * den2 % P * t0 % P
    if _is_negative(t0 * z_inv % P):
        x, y = y0 * SQRT_M1 % P, x0 * SQRT_M1 % P
        den_inv = den1 * INVSQRT_A_MINUS_D % P
    else:
        x, y = x0, y0
        den_inv = den2
    if _is_negative(x * z_inv % P):
        y = (P - y) % P
    s = _abs(den_inv * ((z0 - y) % P) % P)
    return int(s).to_bytes(32, "little")


def _elligator(t) -> Point:
    r = SQRT_M1 * t % P * t % P
    u = (r + 1) * ONE_MINUS_D_SQ % P
    v = (-1 - r * D) % P * ((r + D) % P) % P
    was_square, s = _sqrt_ratio_m1(u, v)
    if not was_square:
        s = (P - _abs(s * t % P)) % P
        c = r
    else:
        c = P - 1
    n = (c * ((r - 1) % P) % P * D_MINUS_ONE_SQ - v) % P
    w0 = 2 * s * v % P
    w1 = n * SQRT_AD_MINUS_ONE % P
    w2 = (1 - s * s) % P
    w3 = (1 + s * s) % P
    return (w0 * w3 % P, w2 * w1 % P, w1 * w3 % P, w0 * w2 % P)


def from_uniform(data: bytes) -> Point:
    """Map 64 uniform bytes to a group element (the RFC 9496 one-way map)."""
    if len(data) != 64:
        raise ValueError("from_uniform needs exactly 64 bytes")
    mask = (1 << 255) - 1
    t0 = mpz(int.from_bytes(data[:32], "little") & mask)
    t1 = mpz(int.from_bytes(data[32:], "little") & mask)
    return point_add(_elligator(t0), _elligator(t1))


@dataclass(frozen=True)
class GroupElement:
    """A group element held as its canonical encoding."""

    data: bytes

    @classmethod
    def from_bytes(cls, data: bytes) -> "GroupElement":
        decode(data)  # validation only
        return cls(bytes(data))

    @classmethod
    def from_hex(cls, text: str) -> "GroupElement":
        return cls.from_bytes(bytes.fromhex(text))

    @classmethod
    def from_point(cls, point: Point) -> "GroupElement":
        return cls(encode(point))

    @classmethod
    def generator(cls) -> "GroupElement":
        return cls(encode(GENERATOR))

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(encode(IDENTITY))

    def point(self) -> Point:
        return decode(self.data)

    def hex(self) -> str:
        return self.data.hex()

    def mul(self, k: int) -> "GroupElement":
        return GroupElement(encode(point_mul(self.point(), k)))

    def add(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(encode(point_add(self.point(), other.point())))

    def __repr__(self) -> str:  # pragma: no cover
        return f"GroupElement({self.data.hex()})"
