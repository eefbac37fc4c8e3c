"""Deterministic randomness for protocol draws.

Two generators are used in this package, each documented where it applies:

* ``HashDRBG`` (here): a blake2b counter-mode generator for protocol-level
  draws that must be reproducible from a public or committed seed across
  platforms and library versions (the cross-witness lottery, sortition).
* ``numpy.random.Generator(PCG64)`` with ``SeedSequence`` substreams, used by
  ``sybilsim`` where throughput matters; numpy pins that bit stream.
"""

from __future__ import annotations

import hashlib


class HashDRBG:
    """blake2b in counter mode; byte-for-byte reproducible everywhere."""

    def __init__(self, seed: bytes, domain: bytes = b""):
        if not isinstance(seed, (bytes, bytearray)):
            raise TypeError("seed must be bytes")
        h = hashlib.blake2b(digest_size=64)
        h.update(len(domain).to_bytes(8, "big"))
        h.update(bytes(domain))
        h.update(bytes(seed))
        self._key = h.digest()
        self._counter = 0
        self._buffer = b""

    def take(self, n: int) -> bytes:
        while len(self._buffer) < n:
            block = hashlib.blake2b(
                self._counter.to_bytes(16, "big"), key=self._key, digest_size=64
            ).digest()
            self._counter += 1
            self._buffer += block
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        if n == 1:
            return 0
        bits = (n - 1).bit_length()
        nbytes = (bits + 7) // 8
        shift = nbytes * 8 - bits
        while True:
            value = int.from_bytes(self.take(nbytes), "big") >> shift
            if value < n:
                return value

    def randrange(self, start: int, stop: int) -> int:
        return start + self.randbelow(stop - start)

    def shuffle(self, seq: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.randbelow(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def choice(self, seq):
        if not seq:
            raise IndexError("choice from empty sequence")
        return seq[self.randbelow(len(seq))]


def seed_from_int(seed: int) -> bytes:
    """Canonical 32-byte seed material from an unsigned integer."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return seed.to_bytes(32, "big")
