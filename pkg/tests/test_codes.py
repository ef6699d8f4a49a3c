import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmst.codes import (CodeError, code_app_llr, code_extrinsic_llr,
                        compute_iowef, encode_cartesian, iowef_row_sums_ok,
                        llr_to_prior_pairs, make_code, make_repetition,
                        make_spc, parse_code_spec, prob_pairs_to_llr,
                        siso_extrinsic_llr_bruteforce, siso_map_decode)


def test_repetition_construction():
    rc = make_repetition(3)
    assert (rc.N, rc.K, rc.kind) == (3, 1, "rc")
    assert rc.codebook.tolist() == [[0, 0, 0], [1, 1, 1]]


def test_spc_construction_parity_last():
    spc = make_spc(4)
    assert (spc.N, spc.K, spc.kind) == (4, 3, "spc")
    for msg, cw in zip(spc.codebook_msgs, spc.codebook):
        assert cw[:3].tolist() == msg.tolist()
        assert cw[3] == msg.sum() % 2


def test_make_code_rejects_rank_deficient():
    with pytest.raises(CodeError):
        make_code([[1, 1], [1, 1]])


def test_make_code_rejects_large_k():
    with pytest.raises(CodeError):
        make_code(np.eye(25, dtype=np.uint8))


def test_iowef_rc2():
    # one zero codeword plus one (input weight 1, output weight 2) codeword
    iow = compute_iowef(make_repetition(2))
    assert iow.coefficients == {(0, 0): 1, (1, 2): 1}


def test_iowef_spc4():
    # codeword weight is g + (g mod 2) for a message of weight g
    iow = compute_iowef(make_spc(4))
    assert iow.coefficients == {(0, 0): 1, (1, 2): 3, (2, 2): 3, (3, 4): 1}


@pytest.mark.parametrize("code", [make_repetition(2), make_repetition(8),
                                  make_spc(4), make_spc(8),
                                  make_code([[1, 0, 1, 1], [0, 1, 0, 1]])])
def test_iowef_row_sums(code):
    assert iowef_row_sums_ok(compute_iowef(code))


def test_siso_map_hand_computed():
    # RC[2,1], priors (.9,.1) and (.6,.4): joint weights .54 (00), .04 (11)
    rc = make_repetition(2)
    post, msg_post = siso_map_decode(rc, [[0.9, 0.1], [0.6, 0.4]])
    assert np.allclose(post[0], [0.54 / 0.58, 0.04 / 0.58])
    assert np.allclose(msg_post[0], [0.54 / 0.58, 0.04 / 0.58])
    # extrinsic on bit 0 divides out its own prior: weights .6 / .4
    ext, _ = siso_map_decode(rc, [[0.9, 0.1], [0.6, 0.4]], extrinsic=True)
    assert np.allclose(ext[0], [0.6, 0.4])


def test_siso_map_rejects_bad_priors():
    rc = make_repetition(2)
    with pytest.raises(CodeError):
        siso_map_decode(rc, [[0.9, 0.2], [0.6, 0.4]])
    with pytest.raises(CodeError):
        siso_map_decode(rc, [[0.9, 0.1]])


def test_llr_prior_roundtrip():
    llr = np.array([-3.0, 0.0, 0.5, 7.0])
    back = prob_pairs_to_llr(llr_to_prior_pairs(llr))
    assert np.allclose(back, llr, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_closed_form_extrinsic_matches_bruteforce(N, seed):
    rng = np.random.default_rng(seed)
    llr = rng.normal(0.0, 3.0, size=2 * N)
    for code in (make_repetition(N), make_spc(N)):
        fast = code_extrinsic_llr(code, llr[:2 * code.N].reshape(-1))
        blocks = llr[:2 * code.N].reshape(2, code.N)
        slow = np.vstack([siso_extrinsic_llr_bruteforce(code, b) for b in blocks])
        assert np.allclose(fast.reshape(2, code.N), slow, atol=1e-6)


def test_code_app_is_input_plus_extrinsic():
    spc = make_spc(4)
    llr = np.array([1.0, -2.0, 0.5, 3.0])
    assert np.allclose(code_app_llr(spc, llr),
                       llr + code_extrinsic_llr(spc, llr))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cartesian_encoding_linear(seed):
    cart = parse_code_spec("SPC[4,3]^5")
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, cart.k, dtype=np.uint8)
    b = rng.integers(0, 2, cart.k, dtype=np.uint8)
    assert np.array_equal(encode_cartesian(cart, a ^ b),
                          encode_cartesian(cart, a) ^ encode_cartesian(cart, b))


def test_parse_code_spec():
    cart = parse_code_spec("rc[2,1]^5000")
    assert (cart.short.N, cart.short.K, cart.B) == (2, 1, 5000)
    assert parse_code_spec("SPC[8,7]^1250").short.kind == "spc"
    for bad in ("RC[2,2]^10", "SPC[4,2]^10", "RC[2,1]", "XYZ[2,1]^3", ""):
        with pytest.raises(CodeError):
            parse_code_spec(bad)


def test_cartesian_dimensions():
    cart = parse_code_spec("SPC[4,3]^2500")
    assert (cart.n, cart.k) == (10000, 7500)
    assert cart.rate == 0.75
