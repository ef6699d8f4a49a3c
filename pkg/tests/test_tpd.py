import numpy as np
import pytest

import bmst
from bmst.channel import ebn0_to_sigma, transmit
from bmst.coupling import true_branch_words
from bmst.tpd import (GenieSideInfo, SideInfoError, TpdConfig,
                      decode_frame_gad, decode_frame_tpd, flipped_side_info,
                      gad_cancel, gad_decode, gad_minimize,
                      perfect_side_info, phase_one_side_info)


def _frame(spec, m, L, seed, msg_seed):
    sys_ = bmst.make_system(spec, m, L, seed)
    rng = np.random.default_rng(msg_seed)
    msgs = rng.integers(0, 2, (L, sys_.k), dtype=np.uint8)
    c, v = bmst.encode_frame(sys_, msgs, return_intermediate=True)
    return sys_, msgs, c, v


def test_perfect_side_info_noiseless_gad():
    sys_, msgs, c, v = _frame("RC[2,1]^10", 2, 5, 0, 1)
    y = bmst.bpsk_map(c)  # no noise
    u = decode_frame_gad(sys_, y, perfect_side_info(sys_, v))
    assert np.array_equal(u, msgs)


def test_gad_cancel_strips_interference_exactly():
    # with perfect side info, the cleaned rows are the BPSK image of the
    # target layer's own branch words (up to the channel noise)
    sys_, msgs, c, v = _frame("SPC[4,3]^5", 2, 4, 3, 2)
    y = bmst.bpsk_map(c)
    side = perfect_side_info(sys_, v)
    t = 1
    rows = y[t:t + sys_.m + 1]
    cleaned = gad_cancel(sys_, rows, side, t)
    w = true_branch_words(sys_, v)
    for i in range(sys_.m + 1):
        assert np.allclose(cleaned[i], bmst.bpsk_map(w[t, i]))


def test_gad_ignores_own_layer_side_info():
    sys_, msgs, c, v = _frame("RC[2,1]^10", 2, 5, 0, 4)
    rng = np.random.default_rng(7)
    y = transmit(bmst.bpsk_map(c), 0.5, rng)
    side = perfect_side_info(sys_, v)
    u_ref = gad_decode(sys_, y, side, 2)
    corrupted = side.words.copy()
    corrupted[2] ^= 1  # garbage in the target layer's own entries
    u_alt = gad_decode(sys_, y, GenieSideInfo(words=corrupted, source="perfect"), 2)
    assert np.array_equal(u_ref, u_alt)


def test_flipped_side_info_rate_and_zero_limit():
    sys_, msgs, c, v = _frame("RC[2,1]^500", 3, 20, 1, 5)
    rng = np.random.default_rng(11)
    truth = true_branch_words(sys_, v)
    side = flipped_side_info(sys_, v, 0.1, rng)
    rate = (side.words != truth).mean()
    assert rate == pytest.approx(0.1, rel=0.1)
    clean = flipped_side_info(sys_, v, 0.0, rng)
    assert np.array_equal(clean.words, truth)


def test_gad_minimize_repetition_is_a_sign_test():
    from bmst.tpd import combined_correlation
    sys_, msgs, c, v = _frame("RC[2,1]^8", 1, 3, 2, 6)
    rng = np.random.default_rng(3)
    y = transmit(bmst.bpsk_map(c), 0.8, rng)
    t = 0
    cleaned = gad_cancel(sys_, y[t:t + 2], perfect_side_info(sys_, v), t)
    u_hat, v_hat = gad_minimize(sys_, cleaned)
    r = combined_correlation(sys_, cleaned).reshape(-1, 2).sum(axis=1)
    assert np.array_equal(u_hat, (r < 0).astype(np.uint8))


def test_phase_one_side_info_pads_zero_tail():
    sys_ = bmst.make_system("RC[2,1]^4", 2, 3, 0)
    w = np.ones((3, 3, 8), dtype=np.uint8)
    side = phase_one_side_info(sys_, w)
    assert side.words.shape == (5, 3, 8)
    assert not side.words[3:].any()
    assert side.source == "phase_one"


def test_tpd_noiseless_matches_messages_both_phases():
    sys_, msgs, c, v = _frame("RC[2,1]^10", 2, 6, 4, 8)
    y = bmst.bpsk_map(c)
    res = decode_frame_tpd(sys_, y, 0.3, TpdConfig(d=6, i_max=10))
    assert np.array_equal(res.u_hat, msgs)
    assert np.array_equal(res.u_hat_phase1, msgs)
    assert np.array_equal(res.w_tilde, true_branch_words(sys_, v[:6]))


def test_tpd_cleans_residual_errors_at_moderate_snr():
    # phase II with near-perfect side information enjoys the full diversity
    # gain, so it corrects frames the one-shot metric would get right anyway
    sys_, msgs, c, v = _frame("RC[2,1]^100", 3, 20, 5, 9)
    sigma = ebn0_to_sigma(4.0, 0.5)
    y = transmit(bmst.bpsk_map(c), sigma, np.random.default_rng(13))
    res = decode_frame_tpd(sys_, y, sigma, TpdConfig(d=6, i_max=18))
    assert (res.u_hat != msgs).sum() == 0


def test_side_info_shape_validation():
    sys_ = bmst.make_system("RC[2,1]^4", 1, 3, 0)
    bad = GenieSideInfo(words=np.zeros((2, 2, 8), dtype=np.uint8), source="x")
    with pytest.raises(SideInfoError):
        gad_cancel(sys_, np.zeros((2, 8)), bad, 0)
    good = GenieSideInfo(words=np.zeros((4, 2, 8), dtype=np.uint8), source="x")
    with pytest.raises(SideInfoError):
        gad_cancel(sys_, np.zeros((3, 8)), good, 0)
    with pytest.raises(SideInfoError):
        gad_decode(sys_, np.zeros((4, 8)), good, 3)
