"""Optimized double-SHA-256 nonce scanner.

Hashing an 80-byte header costs three compression functions when done
naively: two for the 640-bit first hash, one for the 256-bit second hash.
This scanner removes most of that work while staying bit-identical to the
reference pipeline in :mod:`minerlab.sha256`:

* the first compression covers header bytes 0..63 only, so its output (the
  midstate) is computed once per work item and shared by all 2^32 nonces;
* the nonce is message word 3 of the second compression, so rounds 0..2
  are nonce-independent and run once, at preparation time;
* round 3 is incremental: word 3 enters the round additively in exactly
  one place, so stepping the nonce by one advances the post-round-3 A and
  E registers by one each;
* schedule words W16 and W17 depend only on nonce-independent words and
  are precomputed; W19 is a precomputed base plus the nonce and steps
  incrementally; W18 needs one sigma0 of the nonce per step;
* every round whose message word is a known constant (ten padding zeros
  and the 0x80000000 marker in the second compression, six zeros and the
  marker in the third, the two length words, W16, W17) uses a pre-folded
  constant KW_t = K_t + W_t, one addition less per round;
* in early-exit mode the third compression stops after round 60: digest
  word 7 equals the E value produced at round 60 plus the IV constant
  0x5BE0CD19, and any target below 2^224 accepts only digests whose word 7
  is zero, so every lane whose round-60 E value differs from
  0xA41F32E7 = 2^32 - 0x5BE0CD19 is rejected three rounds early.  When the
  target is below 2^192 word 6 must be zero as well, which pins the E
  value of round 61 to 0xE07C2655 and rejects stage-1 survivors after one
  more round.  Survivors (about one in 2^32) are completed and compared
  exactly.

Targets of 2^224 and above (desk-scale difficulty) use generic mode: the
third compression runs all 64 rounds and the full 256-bit comparison
decides, with every other optimization still applied.

The per-nonce arithmetic is vectorized over chunks of nonces as numpy
uint32 lanes.  Candidates that pass the vector filter are re-derived
through the scalar reference path before being reported, so the optimized
lanes never act as their own referee.

Cost instrumentation counts block-cipher rounds and reports them in units
of whole 64-round compressions.  The incremental round 3 is counted as an
executed round (61 rounds per compression, not 60), matching the
convention that early exit alone brings the per-nonce cost to
2 * 61/64 = 1.906 compressions; schedule work and feedforward additions
are not counted separately.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import sha256 as sha
from .header import meets_target

MASK32 = 0xFFFFFFFF
DEFAULT_CHUNK = 1 << 16

WORD7_TARGET_BOUND = 1 << 224  # early exit sound strictly below this
WORD6_TARGET_BOUND = 1 << 192  # round-61 constant check sound below this

ROUNDS_PER_NONCE_EARLY = 61 + 61
ROUNDS_PER_NONCE_GENERIC = 61 + 64
ROUNDS_PER_NONCE_NAIVE = 3 * 64

# Second-compression constant message words: 0x80000000 marker, ten zeros,
# and the 640-bit length of the 80-byte header.
_COMP2_PAD = (0x80000000, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 640)
# Third-compression constants behind the 8 hash words: marker, six zeros,
# and the 256-bit length.
_COMP3_PAD = (0x80000000, 0, 0, 0, 0, 0, 0, 256)

REJECT_E60 = (1 << 32) - sha.IV.h  # 0xA41F32E7
REJECT_E61 = (1 << 32) - sha.IV.g  # 0xE07C2655


def rejection_constants() -> tuple[int, int]:
    """The round-60/61 E-register values that zero digest words 7 and 6."""
    return REJECT_E60, REJECT_E61


class NonceRangeExhausted(Exception):
    """The 32-bit nonce space is spent; new work (a different merkle root
    or timestamp) is required to continue."""


@dataclass(frozen=True)
class PreparedWork:
    """Everything nonce-independent, computed once per work item.

    Immutable and safe to share across concurrent scanners.
    """

    midstate: sha.State
    w_head: tuple[int, int, int]  # second-compression words 0..2
    state_r3: sha.State  # state entering round 3
    t1_base: int  # h + Sigma1(e) + Ch(e,f,g) + K[3] at round 3
    t2_r3: int  # Sigma0(a) + Maj(a,b,c) at round 3
    w16: int
    w17: int
    w18_base: int  # sigma1(W16) + W2; add sigma0(nonce) per nonce
    w19_base: int  # sigma1(W17) + sigma0(0x80000000); add nonce
    kw_comp2: tuple  # per-round folded K+W, None where W varies
    kw_comp3: tuple
    reject_e60: int
    reject_e61: int
    target: int


@dataclass(frozen=True)
class FoundNonce:
    nonce: int
    digest: bytes


@dataclass(frozen=True)
class ScanResult:
    found: FoundNonce | None
    nonces_tried: int
    rounds_executed: int
    compressions_equivalent: float  # rounds_executed / 64 per nonce tried
    stage1_survivors: int
    stage2_survivors: int
    mode: str


def compute_midstate(header_prefix: bytes) -> sha.State:
    """Compress the first 64 header bytes from the IV.

    Identical for every nonce of the work item; its cost amortizes to
    2^-32 compressions per nonce.
    """
    if len(header_prefix) != 64:
        raise ValueError(f"midstate needs exactly 64 bytes, got {len(header_prefix)}")
    return sha.compress(sha.IV, struct.unpack(">16I", header_prefix))


def prepare_work(midstate: sha.State, header_tail: bytes, target: int) -> PreparedWork:
    """Fold all nonce-independent work for one (header, target) pair.

    ``header_tail`` is header bytes 64..75: the last merkle-root word, the
    timestamp and the compact target, i.e. everything in the nonce-bearing
    block except the nonce itself.
    """
    if len(header_tail) != 12:
        raise ValueError(f"header tail must be 12 bytes, got {len(header_tail)}")
    if target <= 0:
        raise ValueError("zero target")
    if target >= 1 << 256:
        raise ValueError("target overflows 256 bits")
    midstate = sha.State(*midstate)
    w0, w1, w2 = struct.unpack(">3I", header_tail)

    state = midstate
    for t, w in enumerate((w0, w1, w2)):
        state = sha.compression_round(state, w, sha.K[t])

    t1_base = (
        state.h
        + sha.big_sigma1(state.e)
        + sha.choice(state.e, state.f, state.g)
        + sha.K[3]
    ) & MASK32
    t2_r3 = (sha.big_sigma0(state.a) + sha.majority(state.a, state.b, state.c)) & MASK32

    # W16/W17 from the schedule recurrence; the nonce (word 3) is not an
    # input to either.  Words 9, 10 and 12 are padding zeros.
    w16 = (sha.little_sigma0(w1) + w0) & MASK32
    w17 = (sha.little_sigma1(640) + sha.little_sigma0(w2) + w1) & MASK32
    w18_base = (sha.little_sigma1(w16) + w2) & MASK32
    w19_base = (sha.little_sigma1(w17) + sha.little_sigma0(0x80000000)) & MASK32

    kw_comp2 = [None] * 64
    for t, w in enumerate(_COMP2_PAD, start=4):
        kw_comp2[t] = (sha.K[t] + w) & MASK32
    kw_comp2[16] = (sha.K[16] + w16) & MASK32
    kw_comp2[17] = (sha.K[17] + w17) & MASK32

    kw_comp3 = [None] * 64
    for t, w in enumerate(_COMP3_PAD, start=8):
        kw_comp3[t] = (sha.K[t] + w) & MASK32

    return PreparedWork(
        midstate=midstate,
        w_head=(w0, w1, w2),
        state_r3=state,
        t1_base=t1_base,
        t2_r3=t2_r3,
        w16=w16,
        w17=w17,
        w18_base=w18_base,
        w19_base=w19_base,
        kw_comp2=tuple(kw_comp2),
        kw_comp3=tuple(kw_comp3),
        reject_e60=REJECT_E60,
        reject_e61=REJECT_E61,
        target=target,
    )


def prepare_header_work(header: bytes, target: int) -> PreparedWork:
    """Prepare work directly from serialized header bytes (nonce ignored)."""
    if len(header) not in (76, 80):
        raise ValueError("header must be 76 or 80 bytes")
    return prepare_work(compute_midstate(header[:64]), header[64:76], target)


# ---------------------------------------------------------------------------
# Incremental per-nonce state (the scalar view of the stepping rule).


@dataclass
class ScannerState:
    """Work-local incremental state: the two registers round 3 produces
    from the nonce, plus schedule word W19."""

    work: PreparedWork
    nonce: int
    a_r4: int
    e_r4: int
    w19: int


def start_scan_state(work: PreparedWork, nonce: int) -> ScannerState:
    if not 0 <= nonce <= MASK32:
        raise ValueError("nonce out of 32-bit range")
    t1 = (work.t1_base + nonce) & MASK32
    return ScannerState(
        work=work,
        nonce=nonce,
        a_r4=(t1 + work.t2_r3) & MASK32,
        e_r4=(work.state_r3.d + t1) & MASK32,
        w19=(work.w19_base + nonce) & MASK32,
    )


def step_nonce(state: ScannerState) -> ScannerState:
    """Advance to the next nonce with three increments.

    Word 3 feeds T1 of round 3 additively and exactly once, so nonce+1
    shifts both round-3 outputs by one; the same argument on the schedule
    recurrence steps W19.
    """
    if state.nonce >= MASK32:
        raise NonceRangeExhausted("nonce range exhausted; new work required")
    state.nonce += 1
    state.a_r4 = (state.a_r4 + 1) & MASK32
    state.e_r4 = (state.e_r4 + 1) & MASK32
    state.w19 = (state.w19 + 1) & MASK32
    return state


def state_after_round3(state: ScannerState) -> sha.State:
    r3 = state.work.state_r3
    return sha.State(state.a_r4, r3.a, r3.b, r3.c, state.e_r4, r3.e, r3.f, r3.g)


# ---------------------------------------------------------------------------
# Vectorized engine: numpy uint32 lanes, preallocated buffers, in-place ops.


def _vrotr(x, n, out, tmp):
    np.right_shift(x, n, out)
    np.left_shift(x, 32 - n, tmp)
    np.bitwise_or(out, tmp, out)


def _vbig_sigma0(x, out, t1, t2):
    _vrotr(x, 2, out, t1)
    _vrotr(x, 13, t1, t2)
    np.bitwise_xor(out, t1, out)
    _vrotr(x, 22, t1, t2)
    np.bitwise_xor(out, t1, out)


def _vbig_sigma1(x, out, t1, t2):
    _vrotr(x, 6, out, t1)
    _vrotr(x, 11, t1, t2)
    np.bitwise_xor(out, t1, out)
    _vrotr(x, 25, t1, t2)
    np.bitwise_xor(out, t1, out)


def _vlittle_sigma0(x, out, t1, t2):
    _vrotr(x, 7, out, t1)
    _vrotr(x, 18, t1, t2)
    np.bitwise_xor(out, t1, out)
    np.right_shift(x, 3, t1)
    np.bitwise_xor(out, t1, out)


def _vlittle_sigma1(x, out, t1, t2):
    _vrotr(x, 17, out, t1)
    _vrotr(x, 19, t1, t2)
    np.bitwise_xor(out, t1, out)
    np.right_shift(x, 10, t1)
    np.bitwise_xor(out, t1, out)


class _LaneEngine:
    """Preallocated uint32 lane buffers for one scanning thread."""

    def __init__(self, width: int):
        self.width = width
        mk = lambda: np.zeros(width, dtype=np.uint32)
        self.regs = [mk() for _ in range(8)]
        self.ring = [mk() for _ in range(16)]
        self.mids = [mk() for _ in range(8)]  # naive pipeline only
        self.t1, self.t2 = mk(), mk()
        self.ta, self.tb, self.tc, self.td = mk(), mk(), mk(), mk()
        self.nonces = mk()
        self.blt = np.zeros(width, dtype=bool)
        self.beq = np.zeros(width, dtype=bool)
        self.btmp = np.zeros(width, dtype=bool)

    def views(self, m: int):
        v = lambda arrs: [a[:m] for a in arrs]
        return _LaneViews(
            regs=v(self.regs),
            ring=v(self.ring),
            mids=v(self.mids),
            t1=self.t1[:m],
            t2=self.t2[:m],
            ta=self.ta[:m],
            tb=self.tb[:m],
            tc=self.tc[:m],
            td=self.td[:m],
            nonces=self.nonces[:m],
            blt=self.blt[:m],
            beq=self.beq[:m],
            btmp=self.btmp[:m],
        )


@dataclass
class _LaneViews:
    regs: list
    ring: list
    mids: list
    t1: np.ndarray
    t2: np.ndarray
    ta: np.ndarray
    tb: np.ndarray
    tc: np.ndarray
    td: np.ndarray
    nonces: np.ndarray
    blt: np.ndarray
    beq: np.ndarray
    btmp: np.ndarray

    def round(self, kw, w_vec, k):
        """One cipher round across all lanes; registers rotate by renaming."""
        a, b, c, d, e, f, g, h = self.regs
        t1, t2, ta, tb = self.t1, self.t2, self.ta, self.tb
        _vbig_sigma1(e, t1, ta, tb)
        np.bitwise_and(e, f, ta)
        np.bitwise_not(e, tb)
        np.bitwise_and(tb, g, tb)
        np.bitwise_xor(ta, tb, ta)
        np.add(t1, ta, t1)
        np.add(t1, h, t1)
        if kw is not None:
            np.add(t1, kw, t1)
        else:
            np.add(t1, w_vec, t1)
            np.add(t1, k, t1)
        _vbig_sigma0(a, t2, ta, tb)
        np.bitwise_and(a, b, ta)
        np.bitwise_and(a, c, tb)
        np.bitwise_xor(ta, tb, ta)
        np.bitwise_and(b, c, tb)
        np.bitwise_xor(ta, tb, ta)
        np.add(t2, ta, t2)
        np.add(d, t1, d)  # becomes the new E
        np.add(t1, t2, h)  # becomes the new A
        self.regs = [h, a, b, c, d, e, f, g]

    def sched(self, t):
        """w[t] = sigma1(w[t-2]) + w[t-7] + sigma0(w[t-15]) + w[t-16],
        written over the ring slot holding w[t-16]."""
        ring, ta, tb, tc, td = self.ring, self.ta, self.tb, self.tc, self.td
        _vlittle_sigma1(ring[(t - 2) & 15], ta, tc, td)
        np.add(ta, ring[(t - 7) & 15], ta)
        _vlittle_sigma0(ring[(t - 15) & 15], tb, tc, td)
        np.add(ta, tb, ta)
        np.add(ta, ring[t & 15], ring[t & 15])

    def fill_regs(self, values):
        for reg, value in zip(self.regs, values):
            reg[:] = value

    # -- optimized pipeline -------------------------------------------------

    def comp2_prepared(self, work: PreparedWork):
        """Rounds 3..63 of the nonce-bearing compression, round 3 via the
        incremental rule, then the feedforward into ring slots 0..7."""
        n = self.nonces
        regs, ring = self.regs, self.ring
        r3 = work.state_r3
        np.add(n, work.t1_base, self.t1)
        np.add(self.t1, work.t2_r3, regs[0])
        np.add(self.t1, r3.d, regs[4])
        regs[1][:] = r3.a
        regs[2][:] = r3.b
        regs[3][:] = r3.c
        regs[5][:] = r3.e
        regs[6][:] = r3.f
        regs[7][:] = r3.g
        for slot, w in enumerate(_COMP2_PAD, start=4):
            ring[slot][:] = w
        for t in range(4, 64):
            if t == 16:
                ring[0][:] = work.w16
            elif t == 17:
                ring[1][:] = work.w17
            elif t == 18:
                _vlittle_sigma0(n, self.ta, self.tc, self.td)
                np.add(self.ta, work.w18_base, ring[2])
            elif t == 19:
                np.add(n, work.w19_base, ring[3])
            elif t > 19:
                self.sched(t)
            self.round(work.kw_comp2[t], ring[t & 15], sha.K[t])
        for i in range(8):
            np.add(self.regs[i], work.midstate[i], ring[i])

    def comp3(self, kw_table, last_round: int):
        """Third compression from the IV over ring[0..7] + padding, through
        ``last_round`` inclusive."""
        ring = self.ring
        for slot, w in enumerate(_COMP3_PAD, start=8):
            ring[slot][:] = w
        self.fill_regs(sha.IV)
        for t in range(last_round + 1):
            if t >= 16:
                self.sched(t)
            kw = kw_table[t]
            self.round(kw, ring[t & 15] if kw is None else None, sha.K[t])

    def e_register(self) -> np.ndarray:
        return self.regs[4]

    def digest_feedforward(self):
        """Add the IV back in; registers then hold the digest words."""
        for i in range(8):
            np.add(self.regs[i], sha.IV[i], self.regs[i])

    def accept_mask(self, target: int) -> np.ndarray:
        """Vector hash < target over the digest words currently in regs.

        The hash integer reads the digest little-endian, so its 32-bit
        limbs are the byteswapped words, word 7 most significant.
        Byteswaps the register buffers in place.
        """
        lt, eq, tmp = self.blt, self.beq, self.btmp
        lt[:] = False
        eq[:] = True
        for i in range(7, -1, -1):
            word = self.regs[i].byteswap(inplace=True)
            limb = (target >> (32 * i)) & MASK32
            np.less(word, limb, tmp)
            np.logical_and(tmp, eq, tmp)
            np.logical_or(lt, tmp, lt)
            np.equal(word, limb, tmp)
            np.logical_and(eq, tmp, eq)
        return lt

    # -- naive pipeline (benchmark referee) ----------------------------------

    def comp1_naive(self, block1_words):
        """Full first compression, recomputed per lane on purpose."""
        ring = self.ring
        for slot, w in enumerate(block1_words):
            ring[slot][:] = w
        self.fill_regs(sha.IV)
        for t in range(64):
            if t >= 16:
                self.sched(t)
            self.round(None, ring[t & 15], sha.K[t])
        for i in range(8):
            np.add(self.regs[i], sha.IV[i], self.mids[i])

    def comp2_naive(self, w_head):
        ring = self.ring
        ring[0][:] = w_head[0]
        ring[1][:] = w_head[1]
        ring[2][:] = w_head[2]
        np.copyto(ring[3], self.nonces)
        for slot, w in enumerate(_COMP2_PAD, start=4):
            ring[slot][:] = w
        for i in range(8):
            np.copyto(self.regs[i], self.mids[i])
        for t in range(64):
            if t >= 16:
                self.sched(t)
            self.round(None, ring[t & 15], sha.K[t])
        for i in range(8):
            np.add(self.regs[i], self.mids[i], ring[i])

    def comp3_naive(self):
        ring = self.ring
        for slot, w in enumerate(_COMP3_PAD, start=8):
            ring[slot][:] = w
        self.fill_regs(sha.IV)
        for t in range(64):
            if t >= 16:
                self.sched(t)
            self.round(None, ring[t & 15], sha.K[t])


# ---------------------------------------------------------------------------
# Scanning.


def _resolve_mode(target: int, mode: str) -> str:
    if mode == "auto":
        return "early-exit" if target < WORD7_TARGET_BOUND else "generic"
    if mode == "early-exit":
        if target >= WORD7_TARGET_BOUND:
            raise ValueError("early-exit filter unsound for target >= 2^224")
        return mode
    if mode == "generic":
        return mode
    raise ValueError(f"unknown scan mode {mode!r}")


def complete_nonce(work: PreparedWork, nonce: int) -> bytes:
    """Full double hash of the work item at one nonce via the reference
    rounds, starting from the shared midstate."""
    w0, w1, w2 = work.w_head
    block2 = (w0, w1, w2, nonce) + _COMP2_PAD
    h1 = sha.compress(work.midstate, block2)
    block3 = tuple(h1) + _COMP3_PAD
    return sha.state_bytes(sha.compress(sha.IV, block3))


@dataclass
class _RangeTally:
    found: FoundNonce | None = None
    consumed: int = 0
    rounds: int = 0
    stage1: int = 0
    stage2: int = 0


def _scan_chunk_early(work, engine, lo: int, m: int, tally: _RangeTally) -> bool:
    """Scan m nonces from lo in early-exit mode; True when a hit ends the scan."""
    lanes = engine.views(m)
    np.add(np.arange(m, dtype=np.uint32), np.uint32(lo), out=lanes.nonces)
    lanes.comp2_prepared(work)
    lanes.comp3(work.kw_comp3, last_round=60)
    survivors = np.nonzero(lanes.e_register() == np.uint32(work.reject_e60))[0]

    stage2_active = work.target < WORD6_TARGET_BOUND
    for lane in survivors.tolist():
        digest = complete_nonce(work, lo + lane)
        if stage2_active:
            tally.rounds += 1  # round 61 reveals the second constant
            if int.from_bytes(digest[24:28], "big") != 0:
                tally.stage1 += 1
                continue
            tally.stage2 += 1
            tally.rounds += 2  # rounds 62..63 finish the compression
        else:
            tally.rounds += 3
        tally.stage1 += 1
        if meets_target(digest, work.target):
            tally.found = FoundNonce(lo + lane, digest)
            tally.consumed += lane + 1
            tally.rounds += ROUNDS_PER_NONCE_EARLY * (lane + 1)
            return True
    tally.consumed += m
    tally.rounds += ROUNDS_PER_NONCE_EARLY * m
    return False


def _scan_chunk_generic(work, engine, lo: int, m: int, tally: _RangeTally) -> bool:
    lanes = engine.views(m)
    np.add(np.arange(m, dtype=np.uint32), np.uint32(lo), out=lanes.nonces)
    lanes.comp2_prepared(work)
    lanes.comp3(work.kw_comp3, last_round=63)
    lanes.digest_feedforward()
    accept = lanes.accept_mask(work.target)
    for lane in np.nonzero(accept)[0].tolist():
        digest = complete_nonce(work, lo + lane)  # scalar referee
        if meets_target(digest, work.target):
            tally.found = FoundNonce(lo + lane, digest)
            tally.consumed += lane + 1
            tally.rounds += ROUNDS_PER_NONCE_GENERIC * (lane + 1)
            return True
    tally.consumed += m
    tally.rounds += ROUNDS_PER_NONCE_GENERIC * m
    return False


def _scan_range(work, lo, hi, mode, chunk, should_abort=None) -> _RangeTally:
    engine = _LaneEngine(min(chunk, hi - lo + 1))
    tally = _RangeTally()
    step = _scan_chunk_early if mode == "early-exit" else _scan_chunk_generic
    pos = lo
    while pos <= hi:
        if should_abort is not None and should_abort():
            break
        m = min(chunk, hi - pos + 1)
        if step(work, engine, pos, m, tally):
            break
        pos += m
    return tally


def _partition(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    n = hi - lo + 1
    parts = max(1, min(parts, n))
    base, rem = divmod(n, parts)
    spans = []
    start = lo
    for i in range(parts):
        size = base + (1 if i < rem else 0)
        spans.append((start, start + size - 1))
        start += size
    return spans


def scan(
    work: PreparedWork,
    nonce_lo: int,
    nonce_hi: int,
    *,
    mode: str = "auto",
    threads: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> ScanResult:
    """Scan the inclusive nonce range, returning the smallest qualifying
    nonce if one exists.

    The range is split into contiguous subranges when ``threads`` > 1; the
    merge takes the minimum found nonce, so partitioning never changes the
    winner. Counters cover the nonces each worker actually consumed.
    """
    for name, v in (("nonce_lo", nonce_lo), ("nonce_hi", nonce_hi)):
        if not 0 <= v <= MASK32:
            raise ValueError(f"{name} out of 32-bit range")
    if nonce_lo > nonce_hi:
        raise ValueError("empty nonce range")
    if chunk < 1:
        raise ValueError("chunk must be positive")
    mode = _resolve_mode(work.target, mode)

    spans = _partition(nonce_lo, nonce_hi, threads)
    if len(spans) == 1:
        tallies = [_scan_range(work, nonce_lo, nonce_hi, mode, chunk)]
    else:
        found_flags = [False] * len(spans)

        def run(idx: int, span: tuple[int, int]) -> _RangeTally:
            def should_abort() -> bool:
                # a find in a lower subrange always wins; stop wasting work
                return any(found_flags[:idx])

            tally = _scan_range(work, span[0], span[1], mode, chunk, should_abort)
            if tally.found is not None:
                found_flags[idx] = True
            return tally

        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            tallies = list(pool.map(run, range(len(spans)), spans))

    found = min(
        (t.found for t in tallies if t.found is not None),
        key=lambda f: f.nonce,
        default=None,
    )
    consumed = sum(t.consumed for t in tallies)
    rounds = sum(t.rounds for t in tallies)
    return ScanResult(
        found=found,
        nonces_tried=consumed,
        rounds_executed=rounds,
        compressions_equivalent=rounds / 64 / consumed if consumed else 0.0,
        stage1_survivors=sum(t.stage1 for t in tallies),
        stage2_survivors=sum(t.stage2 for t in tallies),
        mode=mode,
    )


def evaluate_digests(work: PreparedWork, nonces: Sequence[int] | np.ndarray) -> np.ndarray:
    """Digest words for arbitrary nonces via the vector pipeline.

    Returns an (8, n) uint32 array, row i holding digest word i. Intended
    for verification and batch analysis; scanning should use :func:`scan`.
    """
    arr = np.asarray(nonces, dtype=np.uint64)
    if arr.ndim != 1:
        raise ValueError("nonces must be one-dimensional")
    if arr.size and int(arr.max()) > MASK32:
        raise ValueError("nonce out of 32-bit range")
    arr = arr.astype(np.uint32)
    out = np.empty((8, arr.size), dtype=np.uint32)
    engine = _LaneEngine(min(DEFAULT_CHUNK, max(arr.size, 1)))
    for start in range(0, arr.size, engine.width):
        part = arr[start : start + engine.width]
        lanes = engine.views(part.size)
        np.copyto(lanes.nonces, part)
        lanes.comp2_prepared(work)
        lanes.comp3(work.kw_comp3, last_round=63)
        lanes.digest_feedforward()
        for i in range(8):
            out[i, start : start + part.size] = lanes.regs[i]
    return out


def scan_naive(
    header: bytes,
    target: int,
    nonce_lo: int,
    nonce_hi: int,
    *,
    chunk: int = DEFAULT_CHUNK,
) -> ScanResult:
    """Unoptimized three-compression scan, the benchmark baseline.

    Recomputes the first compression for every nonce and runs all 64
    rounds of each compression, exactly as a by-the-book miner would.
    """
    if len(header) not in (76, 80):
        raise ValueError("header must be 76 or 80 bytes")
    if target <= 0:
        raise ValueError("zero target")
    if nonce_lo > nonce_hi:
        raise ValueError("empty nonce range")
    block1 = struct.unpack(">16I", header[:64])
    w_head = struct.unpack(">3I", header[64:76])
    work = prepare_header_work(header, target)  # for the scalar referee only

    engine = _LaneEngine(min(chunk, nonce_hi - nonce_lo + 1))
    tally = _RangeTally()
    pos = nonce_lo
    while pos <= nonce_hi:
        m = min(chunk, nonce_hi - pos + 1)
        lanes = engine.views(m)
        np.add(np.arange(m, dtype=np.uint32), np.uint32(pos), out=lanes.nonces)
        lanes.comp1_naive(block1)
        lanes.comp2_naive(w_head)
        lanes.comp3_naive()
        lanes.digest_feedforward()
        accept = lanes.accept_mask(target)
        hit = False
        for lane in np.nonzero(accept)[0].tolist():
            digest = complete_nonce(work, pos + lane)
            if meets_target(digest, target):
                tally.found = FoundNonce(pos + lane, digest)
                tally.consumed += lane + 1
                tally.rounds += ROUNDS_PER_NONCE_NAIVE * (lane + 1)
                hit = True
                break
        if hit:
            break
        tally.consumed += m
        tally.rounds += ROUNDS_PER_NONCE_NAIVE * m
        pos += m
    return ScanResult(
        found=tally.found,
        nonces_tried=tally.consumed,
        rounds_executed=tally.rounds,
        compressions_equivalent=tally.rounds / 64 / tally.consumed if tally.consumed else 0.0,
        stage1_survivors=0,
        stage2_survivors=0,
        mode="naive",
    )
