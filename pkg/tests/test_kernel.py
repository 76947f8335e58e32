import hashlib
import random
import struct

import numpy as np
import pytest

import minerlab.header as hdr
import minerlab.kernel as kern
import minerlab.sha256 as sha

SEED = 0x4EE1_0001

def _rand_header(rng) -> bytes:
    return rng.randbytes(80)

def _dsha(data: bytes) -> bytes:
    return hashlib.sha256(hashlib.sha256(data).digest()).digest()

def _header_at(base: bytes, nonce_word: int) -> bytes:
    # the scanner's nonce is the word the hash consumes, i.e. the four
    # nonce bytes read big-endian
    return base[:76] + nonce_word.to_bytes(4, "big")

class TestMidstate:
    def test_matches_reference_compress(self):
        rng = random.Random(SEED)
        for _ in range(20):
            prefix = rng.randbytes(64)
            want = sha.compress(sha.IV, struct.unpack(">16I", prefix))
            assert kern.compute_midstate(prefix) == want

    def test_independent_of_trailing_bytes(self):
        rng = random.Random(SEED + 1)
        base = _rand_header(rng)
        m0 = kern.compute_midstate(base[:64])
        for _ in range(10):
            other = base[:64] + rng.randbytes(16)
            assert kern.compute_midstate(other[:64]) == m0

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            kern.compute_midstate(b"\x00" * 63)

    def test_amortized_cost_model(self):
        from fractions import Fraction

        from minerlab import costs

        s = costs.ImprovementSet.of("1")
        assert costs.compression_equivalents(s) + costs.amortized_overhead(s) == Fraction(
            2
        ) + Fraction(1, 2**32)

class TestPrepareWork:
    def test_round3_state_matches_reference(self):
        rng = random.Random(SEED + 2)
        for _ in range(20):
            base = _rand_header(rng)
            work = kern.prepare_header_work(base, target=1 << 200)
            state = kern.compute_midstate(base[:64])
            w = struct.unpack(">3I", base[64:76])
            for t in range(3):
                state = sha.compression_round(state, w[t], sha.K[t])
            assert work.state_r3 == state

    def test_w16_w17_match_schedule_for_any_nonce(self):
        rng = random.Random(SEED + 3)
        base = _rand_header(rng)
        work = kern.prepare_header_work(base, target=1 << 200)
        for _ in range(20):
            nonce = rng.getrandbits(32)
            block2 = struct.unpack(">3I", base[64:76]) + (nonce,) + kern._COMP2_PAD
            w = sha.expand_schedule(block2)
            assert work.w16 == w[16]
            assert work.w17 == w[17]

    def test_w16_zero_word_reduction(self):
        # with words 9 and 14 zero the recurrence collapses to
        # sigma0(w1) + w0, a timestamp-dependent constant
        rng = random.Random(SEED + 4)
        base = _rand_header(rng)
        work = kern.prepare_header_work(base, target=1 << 200)
        w0, w1, _ = struct.unpack(">3I", base[64:76])
        assert work.w16 == (sha.little_sigma0(w1) + w0) % 2**32

    def test_fold_table_covers_constant_rounds(self):
        base = random.Random(SEED + 5).randbytes(80)
        work = kern.prepare_header_work(base, target=1 << 200)
        folded2 = [t for t, kw in enumerate(work.kw_comp2) if kw is not None]
        folded3 = [t for t, kw in enumerate(work.kw_comp3) if kw is not None]
        assert folded2 == list(range(4, 18))
        assert folded3 == list(range(8, 16))
        # 16 zero words + 2 marker words + 2 length words + W16 + W17
        assert len(folded2) + len(folded3) == 22

    def test_fold_values(self):
        base = random.Random(SEED + 6).randbytes(80)
        work = kern.prepare_header_work(base, target=1 << 200)
        assert work.kw_comp2[4] == (sha.K[4] + 0x80000000) % 2**32
        assert work.kw_comp2[5] == sha.K[5]
        assert work.kw_comp2[15] == (sha.K[15] + 640) % 2**32
        assert work.kw_comp3[8] == (sha.K[8] + 0x80000000) % 2**32
        assert work.kw_comp3[15] == (sha.K[15] + 256) % 2**32

    def test_zero_target_rejected(self):
        base = random.Random(SEED + 7).randbytes(80)
        with pytest.raises(ValueError, match="zero target"):
            kern.prepare_header_work(base, target=0)

    def test_bad_tail_length(self):
        with pytest.raises(ValueError):
            kern.prepare_work(sha.IV, b"\x00" * 11, 1 << 200)

class TestRejectionConstants:
    def test_complements_of_iv(self):
        e60, e61 = kern.rejection_constants()
        assert e60 == 0xA41F32E7
        assert e61 == 0xE07C2655
        assert (0x5BE0CD19 + e60) % 2**32 == 0
        assert (0x1F83D9AB + e61) % 2**32 == 0

    def test_forced_states_zero_digest_words(self):
        # build round-61 states that hit both constants and complete them:
        # digest words 7 and 6 must come out zero regardless of the rest
        rng = random.Random(SEED + 8)
        e60, e61 = kern.rejection_constants()
        for _ in range(120):
            a, b, c, f, g, h = (rng.getrandbits(32) for _ in range(6))
            e = e60
            w61, w62, w63 = (rng.getrandbits(32) for _ in range(3))
            t1 = (h + sha.big_sigma1(e) + sha.choice(e, f, g) + sha.K[61] + w61) % 2**32
            d = (e61 - t1) % 2**32
            state = sha.State(a, b, c, d, e, f, g, h)
            state = sha.compression_round(state, w61, sha.K[61])
            assert state.e == e61
            state = sha.compression_round(state, w62, sha.K[62])
            state = sha.compression_round(state, w63, sha.K[63])
            digest = sha.state_bytes(
                sha.State(*((x + y) % 2**32 for x, y in zip(state, sha.IV)))
            )
            assert digest[28:32] == b"\x00\x00\x00\x00"  # word 7
            assert digest[24:28] == b"\x00\x00\x00\x00"  # word 6
            assert hdr.hash_to_int(digest) < 1 << 192

class TestStepNonce:
    def test_incremental_equals_recomputation(self):
        rng = random.Random(SEED + 9)
        base = _rand_header(rng)
        work = kern.prepare_header_work(base, target=1 << 200)
        for _ in range(10_000):
            nonce = rng.randrange(0, 0xFFFFFFFF)
            state = kern.start_scan_state(work, nonce)
            kern.step_nonce(state)
            got = kern.state_after_round3(state)
            want = work.state_r3
            want = sha.compression_round(want, nonce + 1, sha.K[3])
            assert got == want

    def test_w19_matches_schedule(self):
        rng = random.Random(SEED + 10)
        base = _rand_header(rng)
        work = kern.prepare_header_work(base, target=1 << 200)
        w_head = struct.unpack(">3I", base[64:76])
        for _ in range(200):
            nonce = rng.randrange(0, 0xFFFFFFFF)
            state = kern.step_nonce(kern.start_scan_state(work, nonce))
            block2 = w_head + (nonce + 1,) + kern._COMP2_PAD
            w = sha.expand_schedule(block2)
            assert state.w19 == w[19]
            # the printed reduced form: sigma1(W17) + W11 + sigma0(W4) + W3
            # (word 11 is zero, like word 12 in the raw recurrence)
            reduced = (
                sha.little_sigma1(w[17]) + 0 + sha.little_sigma0(w[4]) + (nonce + 1)
            ) % 2**32
            assert state.w19 == reduced

    def test_exhaustion_signals_without_state_change(self):
        base = random.Random(SEED + 11).randbytes(80)
        work = kern.prepare_header_work(base, target=1 << 200)
        state = kern.start_scan_state(work, 0xFFFFFFFF)
        snapshot = (state.nonce, state.a_r4, state.e_r4, state.w19)
        with pytest.raises(kern.NonceRangeExhausted, match="new work"):
            kern.step_nonce(state)
        assert (state.nonce, state.a_r4, state.e_r4, state.w19) == snapshot

    def test_long_walk_stays_exact(self):
        base = random.Random(SEED + 12).randbytes(80)
        work = kern.prepare_header_work(base, target=1 << 200)
        state = kern.start_scan_state(work, 5)
        for i in range(6, 200):
            kern.step_nonce(state)
            assert kern.state_after_round3(state) == sha.compression_round(
                work.state_r3, i, sha.K[3]
            )

class TestScanDecisions:
    def test_single_point_matches_reference(self):
        rng = random.Random(SEED + 13)
        for _ in range(150):
            base = _rand_header(rng)
            nonce = rng.getrandbits(32)
            target = rng.randrange(1, 1 << 224)
            work = kern.prepare_header_work(base, target)
            res = kern.scan(work, nonce, nonce)
            assert res.nonces_tried == 1
            want = hdr.meets_target(sha.sha256d(_header_at(base, nonce)), target)
            assert (res.found is not None) == want

    def test_generic_single_point_matches_reference(self):
        rng = random.Random(SEED + 14)
        for _ in range(60):
            base = _rand_header(rng)
            nonce = rng.getrandbits(32)
            target = rng.randrange(1 << 224, 1 << 250)
            work = kern.prepare_header_work(base, target)
            res = kern.scan(work, nonce, nonce)
            assert res.mode == "generic"
            digest = sha.sha256d(_header_at(base, nonce))
            want = hdr.meets_target(digest, target)
            assert (res.found is not None) == want
            if res.found:
                assert res.found.digest == digest

    def test_desk_scale_mining_verifies(self):
        rng = random.Random(SEED + 15)
        target = 1 << 240
        for _ in range(5):
            base = _rand_header(rng)
            work = kern.prepare_header_work(base, target)
            res = kern.scan(work, 0, 0xFFFFFFFF)
            assert res.found is not None
            solved = _header_at(base, res.found.nonce)
            digest = sha.sha256d(solved)
            assert digest == res.found.digest
            assert hdr.meets_target(digest, target)
            # smallest in range: nothing below qualifies
            assert res.found.nonce == res.nonces_tried - 1

    def test_found_nonce_is_smallest(self):
        rng = random.Random(SEED + 16)
        base = _rand_header(rng)
        work = kern.prepare_header_work(base, 1 << 242)
        res = kern.scan(work, 0, 0xFFFFFFFF)
        assert res.found is not None
        n = res.found.nonce
        for probe in range(max(0, n - 3), n):
            assert not hdr.meets_target(sha.sha256d(_header_at(base, probe)), 1 << 242)

    def test_partition_determinism(self):
        rng = random.Random(SEED + 17)
        base = _rand_header(rng)
        work = kern.prepare_header_work(base, 1 << 241)
        whole = kern.scan(work, 0, 1 << 18)
        assert whole.found is not None
        lo = 0
        partial_founds = []
        for hi in (1 << 14, 3 << 14, 1 << 17, 1 << 18):
            r = kern.scan(work, lo, hi, chunk=5000)
            if r.found:
                partial_founds.append(r.found.nonce)
            lo = hi + 1
        assert min(partial_founds) == whole.found.nonce

    def test_threads_agree_with_single(self):
        rng = random.Random(SEED + 18)
        base = _rand_header(rng)
        work = kern.prepare_header_work(base, 1 << 241)
        one = kern.scan(work, 0, 1 << 18, threads=1)
        four = kern.scan(work, 0, 1 << 18, threads=4)
        assert one.found is not None
        assert four.found is not None
        assert one.found.nonce == four.found.nonce
        assert one.found.digest == four.found.digest

    def test_early_exit_mode_forced_unsound(self):
        base = random.Random(SEED + 19).randbytes(80)
        work = kern.prepare_header_work(base, 1 << 224)
        with pytest.raises(ValueError, match="unsound"):
            kern.scan(work, 0, 10, mode="early-exit")

    def test_empty_range_rejected(self):
        base = random.Random(SEED + 20).randbytes(80)
        work = kern.prepare_header_work(base, 1 << 200)
        with pytest.raises(ValueError, match="empty"):
            kern.scan(work, 5, 4)

    def test_nonce_bounds_checked(self):
        base = random.Random(SEED + 21).randbytes(80)
        work = kern.prepare_header_work(base, 1 << 200)
        with pytest.raises(ValueError):
            kern.scan(work, 0, 1 << 32)

    def test_unknown_mode(self):
        base = random.Random(SEED + 22).randbytes(80)
        work = kern.prepare_header_work(base, 1 << 200)
        with pytest.raises(ValueError, match="mode"):
            kern.scan(work, 0, 1, mode="turbo")

class TestInstrumentation:
    def test_early_round_accounting(self):
        base = random.Random(SEED + 23).randbytes(80)
        work = kern.prepare_header_work(base, target=1)
        n = 1 << 16
        res = kern.scan(work, 0, n - 1)
        assert res.nonces_tried == n
        extra = res.rounds_executed - 2 * 61 * n
        assert 0 <= extra <= 4 * res.stage1_survivors + 64 * res.stage2_survivors
        assert res.compressions_equivalent == res.rounds_executed / 64 / n

    def test_generic_round_accounting(self):
        base = random.Random(SEED + 24).randbytes(80)
        work = kern.prepare_header_work(base, target=1 << 230)
        res = kern.scan(work, 0, (1 << 14) - 1, mode="generic")
        if res.found is None:
            assert res.rounds_executed == 125 * res.nonces_tried
        assert abs(res.compressions_equivalent - 125 / 64) < 1e-12

    def test_survivor_rate_small_scan(self):
        # lambda = 2^20 / 2^32, so even two survivors is a 1e-8 event
        base = random.Random(SEED + 25).randbytes(80)
        work = kern.prepare_header_work(base, target=1)
        res = kern.scan(work, 0, (1 << 20) - 1)
        assert res.found is None
        assert res.stage1_survivors <= 2
        assert res.stage2_survivors <= res.stage1_survivors

class TestEvaluateDigests:
    def test_against_hashlib(self):
        rng = random.Random(SEED + 26)
        base = _rand_header(rng)
        work = kern.prepare_header_work(base, target=1 << 200)
        nonces = [rng.getrandbits(32) for _ in range(500)]
        words = kern.evaluate_digests(work, nonces)
        assert words.shape == (8, 500)
        for j in (0, 1, 7, 499, 250):
            want = _dsha(_header_at(base, nonces[j]))
            got = b"".join(int(words[i, j]).to_bytes(4, "big") for i in range(8))
            assert got == want

    def test_validates_input(self):
        base = random.Random(SEED + 27).randbytes(80)
        work = kern.prepare_header_work(base, target=1 << 200)
        with pytest.raises(ValueError):
            kern.evaluate_digests(work, [1 << 32])
        with pytest.raises(ValueError):
            kern.evaluate_digests(work, [[1, 2]])

    def test_empty_input(self):
        base = random.Random(SEED + 28).randbytes(80)
        work = kern.prepare_header_work(base, target=1 << 200)
        assert kern.evaluate_digests(work, []).shape == (8, 0)

class TestNaiveScan:
    def test_agrees_with_optimized(self):
        rng = random.Random(SEED + 29)
        base = _rand_header(rng)
        target = 1 << 240
        work = kern.prepare_header_work(base, target)
        fast = kern.scan(work, 0, 1 << 17)
        slow = kern.scan_naive(base, target, 0, 1 << 17)
        assert (fast.found is None) == (slow.found is None)
        if fast.found:
            assert fast.found.nonce == slow.found.nonce
            assert fast.found.digest == slow.found.digest

    def test_cost_is_three_compressions(self):
        base = random.Random(SEED + 30).randbytes(80)
        res = kern.scan_naive(base, 1, 0, 4095)
        assert res.compressions_equivalent == 3.0
        assert res.rounds_executed == 192 * 4096
