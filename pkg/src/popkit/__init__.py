"""Pseudonym-party proof-of-personhood toolkit.

Modules:
    group         prime-order group (ristretto255) with canonical encodings
    crypto        key pairs, linkable ring signatures, commitments, cosignatures
    canonical     canonical JSON serialization and digests
    rng           deterministic hash-counter DRBG for protocol draws
    ceremony      single-event state machine, roll lists, verification
    federation    synchronized multi-site cycles and the cross-witness lottery
    coercion      kiosk issuance of real/fake token sheets, tally filtering
    applications  unlinkable service tags, unique-person counts, sortition
    sybilsim      Monte Carlo economics of attacks on threshold verification
    cli           command-line front-end
"""

__version__ = "0.1.0"
