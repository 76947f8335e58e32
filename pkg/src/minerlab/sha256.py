"""Reference SHA-256 with round-level access.

Plain transcription of FIPS 180-4: big-endian words, explicit schedule and
round functions, the standard constant tables. Deliberately unoptimized;
the fast scanner in ``minerlab.kernel`` is validated against this module,
so clarity wins over speed here.
"""

from __future__ import annotations

import struct
from typing import NamedTuple

MASK32 = 0xFFFFFFFF

# FIPS 180-4 section 4.2.2 round constants.
# fmt: off
K = (
    0x428A2F98, 0x71374491, 0xB5C0FBCF, 0xE9B5DBA5, 0x3956C25B, 0x59F111F1,
    0x923F82A4, 0xAB1C5ED5, 0xD807AA98, 0x12835B01, 0x243185BE, 0x550C7DC3,
    0x72BE5D74, 0x80DEB1FE, 0x9BDC06A7, 0xC19BF174, 0xE49B69C1, 0xEFBE4786,
    0x0FC19DC6, 0x240CA1CC, 0x2DE92C6F, 0x4A7484AA, 0x5CB0A9DC, 0x76F988DA,
    0x983E5152, 0xA831C66D, 0xB00327C8, 0xBF597FC7, 0xC6E00BF3, 0xD5A79147,
    0x06CA6351, 0x14292967, 0x27B70A85, 0x2E1B2138, 0x4D2C6DFC, 0x53380D13,
    0x650A7354, 0x766A0ABB, 0x81C2C92E, 0x92722C85, 0xA2BFE8A1, 0xA81A664B,
    0xC24B8B70, 0xC76C51A3, 0xD192E819, 0xD6990624, 0xF40E3585, 0x106AA070,
    0x19A4C116, 0x1E376C08, 0x2748774C, 0x34B0BCB5, 0x391C0CB3, 0x4ED8AA4A,
    0x5B9CCA4F, 0x682E6FF3, 0x748F82EE, 0x78A5636F, 0x84C87814, 0x8CC70208,
    0x90BEFFFA, 0xA4506CEB, 0xBEF9A3F7, 0xC67178F2,
)
# fmt: on


class State(NamedTuple):
    """The eight 32-bit working registers (round columns A..H)."""

    a: int
    b: int
    c: int
    d: int
    e: int
    f: int
    g: int
    h: int


# FIPS 180-4 section 5.3.3 initial hash value.
IV = State(
    0x6A09E667, 0xBB67AE85, 0x3C6EF372, 0xA54FF53A,
    0x510E527F, 0x9B05688C, 0x1F83D9AB, 0x5BE0CD19,
)

# A message block is a tuple of 16 words; a schedule is a list of 64.
Block = tuple


def rotr(x: int, n: int) -> int:
    """Rotate a 32-bit word right by n bits."""
    return ((x >> n) | (x << (32 - n))) & MASK32


def little_sigma0(x: int) -> int:
    return rotr(x, 7) ^ rotr(x, 18) ^ (x >> 3)


def little_sigma1(x: int) -> int:
    return rotr(x, 17) ^ rotr(x, 19) ^ (x >> 10)


def big_sigma0(x: int) -> int:
    return rotr(x, 2) ^ rotr(x, 13) ^ rotr(x, 22)


def big_sigma1(x: int) -> int:
    return rotr(x, 6) ^ rotr(x, 11) ^ rotr(x, 25)


def choice(e: int, f: int, g: int) -> int:
    return (e & f) ^ (~e & g)


def majority(a: int, b: int, c: int) -> int:
    return (a & b) ^ (a & c) ^ (b & c)


def pad_message(data: bytes) -> list[Block]:
    """Split ``data`` into padded 512-bit message blocks.

    Standard Merkle-Damgard padding: append the 0x80 marker byte, zero-fill
    to 56 mod 64 bytes, then append the message bit length as a 64-bit
    big-endian integer.
    """
    if len(data) >= 1 << 61:
        raise ValueError("message too long for 64-bit length field")
    padded = (
        data
        + b"\x80"
        + b"\x00" * (-(len(data) + 9) % 64)
        + (8 * len(data)).to_bytes(8, "big")
    )
    return [struct.unpack(">16I", padded[i : i + 64]) for i in range(0, len(padded), 64)]


def expand_schedule(block: Block) -> list[int]:
    """Expand a 16-word block into the 64-word round-key schedule.

    Words 0..15 are the block itself; for t >= 16,
    w[t] = sigma1(w[t-2]) + w[t-7] + sigma0(w[t-15]) + w[t-16] mod 2^32.
    """
    if len(block) != 16:
        raise ValueError(f"expected 16 words, got {len(block)}")
    w = list(block)
    for t in range(16, 64):
        w.append(
            (little_sigma1(w[t - 2]) + w[t - 7] + little_sigma0(w[t - 15]) + w[t - 16])
            & MASK32
        )
    return w


def compression_round(state: State, w_t: int, k_t: int) -> State:
    """One round of the block cipher inside SHA-256."""
    t1 = (state.h + big_sigma1(state.e) + choice(state.e, state.f, state.g) + k_t + w_t) & MASK32
    t2 = (big_sigma0(state.a) + majority(state.a, state.b, state.c)) & MASK32
    return State(
        (t1 + t2) & MASK32,
        state.a,
        state.b,
        state.c,
        (state.d + t1) & MASK32,
        state.e,
        state.f,
        state.g,
    )


def compress(state: State, block: Block) -> State:
    """64 rounds over one message block, then the Davies-Meyer feedforward."""
    w = expand_schedule(block)
    s = state
    for t in range(64):
        s = compression_round(s, w[t], K[t])
    return State(*((x + y) & MASK32 for x, y in zip(s, state)))


def state_bytes(state: State) -> bytes:
    """Serialize a state as 32 big-endian bytes (digest order)."""
    return struct.pack(">8I", *state)


def sha256(data: bytes) -> bytes:
    s = IV
    for block in pad_message(data):
        s = compress(s, block)
    return state_bytes(s)


def sha256d(data: bytes) -> bytes:
    """Double SHA-256, the proof-of-work hash."""
    return sha256(sha256(data))


def _self_test() -> None:
    # Guards against transcription errors in the K/IV tables at import time.
    expected = bytes.fromhex(
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    )
    if sha256(b"abc") != expected:
        raise RuntimeError("SHA-256 self-test failed: constant tables corrupt")


_self_test()
