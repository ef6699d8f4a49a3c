"""Short binary block codes, Cartesian products, IOWEFs and SISO MAP decoding.

Codes are defined by a systematic generator matrix together with the full
codebook (all 2^K message/codeword pairs), which keeps the brute-force MAP
decoder and the weight enumerator exact. K is capped at 24 to bound the
enumeration.
"""

import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .kernels import LLR_MAX, blockwise_loo_boxplus, blockwise_loo_sum

PROB_CLAMP = 1e-12  # keeps Bayes products away from exact 0/1
MAX_K = 24


class CodeError(ValueError):
    pass


@dataclass(frozen=True)
class ShortCode:
    """A binary [N, K] block code with explicit codebook.

    codebook_msgs rows are all K-bit messages in lexicographic order
    (bit 0 most significant), codebook rows are the matching codewords.
    kind is "rc", "spc" or "generic" and selects fast SISO paths.
    """

    N: int
    K: int
    generator: np.ndarray
    codebook_msgs: np.ndarray = field(repr=False)
    codebook: np.ndarray = field(repr=False)
    kind: str = "generic"

    @property
    def rate(self):
        return self.K / self.N

    def __post_init__(self):
        if self.K > MAX_K:
            raise CodeError(f"K={self.K} exceeds enumeration cap {MAX_K}")
        if self.K > self.N:
            raise CodeError("K must not exceed N")


def _enumerate_codebook(generator):
    k, n = generator.shape
    msgs = ((np.arange(2 ** k)[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)
    cws = (msgs @ generator) % 2
    return msgs, cws.astype(np.uint8)


def make_code(generator, kind="generic"):
    """Build a ShortCode from a K x N binary generator matrix."""
    generator = np.asarray(generator, dtype=np.uint8) % 2
    k, n = generator.shape
    if k > MAX_K:
        raise CodeError(f"K={k} exceeds enumeration cap {MAX_K}")
    msgs, cws = _enumerate_codebook(generator)
    if len({cw.tobytes() for cw in cws}) != 2 ** k:
        raise CodeError("generator is not full rank: duplicate codewords")
    return ShortCode(N=n, K=k, generator=generator, codebook_msgs=msgs,
                     codebook=cws, kind=kind)


def make_repetition(N):
    """The [N, 1] repetition code (all-ones generator row)."""
    if N < 1:
        raise CodeError("repetition code needs N >= 1")
    return make_code(np.ones((1, N), dtype=np.uint8), kind="rc")


def make_spc(N):
    """The [N, N-1] single parity-check code, systematic with the parity
    bit last (XOR of the message bits)."""
    if N < 2:
        raise CodeError("SPC code needs N >= 2")
    gen = np.hstack([np.eye(N - 1, dtype=np.uint8), np.ones((N - 1, 1), dtype=np.uint8)])
    return make_code(gen, kind="spc")


@dataclass(frozen=True)
class Iowef:
    """Input-output weight enumerator: coefficients[(g, h)] counts codewords
    of Hamming weight h produced by messages of Hamming weight g."""

    K: int
    N: int
    coefficients: dict

    def total(self):
        return sum(self.coefficients.values())


def compute_iowef(code):
    g = code.codebook_msgs.sum(axis=1)
    h = code.codebook.sum(axis=1)
    coeff = {}
    for gi, hi in zip(g.tolist(), h.tolist()):
        coeff[(gi, hi)] = coeff.get((gi, hi), 0) + 1
    return Iowef(K=code.K, N=code.N, coefficients=coeff)


# ---------------------------------------------------------------------------
# SISO MAP decoding (brute force over the codebook)
# ---------------------------------------------------------------------------

def _check_priors(code, priors):
    priors = np.asarray(priors, dtype=np.float64)
    if priors.shape != (code.N, 2):
        raise CodeError(f"priors must have shape ({code.N}, 2)")
    if np.any(np.abs(priors.sum(axis=1) - 1.0) > 1e-9):
        raise CodeError("each prior pair must sum to 1")
    return np.clip(priors, PROB_CLAMP, 1.0 - PROB_CLAMP)


def siso_map_decode(code, priors, extrinsic=False):
    """Exact SISO MAP decoding of a short code by Bayes-rule enumeration.

    priors: (N, 2) array, priors[j, v] = P(c_j = v).
    Returns (code_post, msg_post): (N, 2) posteriors over code bits and
    (K, 2) posteriors over message bits. With extrinsic=True the prior of
    the bit itself is divided out of its code-bit output before
    normalization (message outputs stay APP).
    """
    priors = _check_priors(code, priors)
    cb = code.codebook  # (ncw, N)
    # per-codeword weight = prod_j priors[j, cw_j]
    pj = np.where(cb == 0, priors[:, 0], priors[:, 1])  # (ncw, N)
    w = pj.prod(axis=1)  # (ncw,)

    code_post = np.empty((code.N, 2))
    for j in range(code.N):
        wj = w / pj[:, j] if extrinsic else w
        code_post[j, 0] = wj[cb[:, j] == 0].sum()
        code_post[j, 1] = wj[cb[:, j] == 1].sum()
    code_post /= code_post.sum(axis=1, keepdims=True)

    msg_post = np.empty((code.K, 2))
    mb = code.codebook_msgs
    for j in range(code.K):
        msg_post[j, 0] = w[mb[:, j] == 0].sum()
        msg_post[j, 1] = w[mb[:, j] == 1].sum()
    msg_post /= msg_post.sum(axis=1, keepdims=True)
    return code_post, msg_post


def llr_to_prior_pairs(llr):
    """Map LLRs log(p0/p1) to (p0, p1) pairs."""
    llr = np.clip(np.asarray(llr, dtype=np.float64), -LLR_MAX, LLR_MAX)
    p1 = 1.0 / (1.0 + np.exp(llr))
    return np.stack([1.0 - p1, p1], axis=-1)


def prob_pairs_to_llr(pairs):
    pairs = np.clip(np.asarray(pairs, dtype=np.float64), PROB_CLAMP, 1.0)
    return np.clip(np.log(pairs[..., 0]) - np.log(pairs[..., 1]), -LLR_MAX, LLR_MAX)


def siso_extrinsic_llr_bruteforce(code, llr):
    """Brute-force extrinsic SISO in LLR form, one short block at a time.
    Reference path for validating the closed-form RC/SPC kernels."""
    post, _ = siso_map_decode(code, llr_to_prior_pairs(llr), extrinsic=True)
    return prob_pairs_to_llr(post)


def code_extrinsic_llr(code, llr):
    """Extrinsic SISO output for B stacked blocks of a short code, LLR in,
    LLR out. llr has length B*N. Uses closed forms for RC and SPC, the
    brute-force Bayes path otherwise."""
    llr = np.asarray(llr, dtype=np.float64)
    if code.kind == "rc":
        return blockwise_loo_sum(llr, code.N)
    if code.kind == "spc":
        return blockwise_loo_boxplus(llr, code.N)
    blocks = llr.reshape(-1, code.N)
    out = np.empty_like(blocks)
    for b in range(blocks.shape[0]):
        out[b] = siso_extrinsic_llr_bruteforce(code, blocks[b])
    return out.reshape(llr.shape)


def code_app_llr(code, llr):
    """Full APP LLRs (code bits) for B stacked blocks: input + extrinsic."""
    return np.clip(llr + code_extrinsic_llr(code, llr), -LLR_MAX, LLR_MAX)


# ---------------------------------------------------------------------------
# Cartesian products
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CartesianCode:
    """B-fold Cartesian product of a short code: B independent copies
    encoded and decoded blockwise."""

    short: ShortCode
    B: int

    @property
    def n(self):
        return self.short.N * self.B

    @property
    def k(self):
        return self.short.K * self.B

    @property
    def rate(self):
        return self.short.rate

    def __post_init__(self):
        if self.B < 1:
            raise CodeError("B must be >= 1")


def encode_cartesian(cart, message):
    message = np.asarray(message, dtype=np.uint8)
    if message.shape != (cart.k,):
        raise CodeError(f"message length {message.size} != k={cart.k}")
    blocks = message.reshape(cart.B, cart.short.K)
    return ((blocks @ cart.short.generator) % 2).astype(np.uint8).reshape(cart.n)


_SPEC_RE = re.compile(r"^(rc|spc)\[(\d+),(\d+)\]\^(\d+)$", re.IGNORECASE)


@lru_cache(maxsize=None)
def _short_code(family, N):
    return make_repetition(N) if family == "rc" else make_spc(N)


def parse_code_spec(spec):
    """Parse "RC[N,1]^B" / "SPC[N,N-1]^B" (case-insensitive) into a
    CartesianCode."""
    m = _SPEC_RE.match(spec.strip())
    if not m:
        raise CodeError(f"unrecognized code spec {spec!r}")
    family, N, K, B = m.group(1).lower(), int(m.group(2)), int(m.group(3)), int(m.group(4))
    if family == "rc" and K != 1:
        raise CodeError(f"repetition code must be [N,1], got {spec!r}")
    if family == "spc" and K != N - 1:
        raise CodeError(f"SPC code must be [N,N-1], got {spec!r}")
    return CartesianCode(short=_short_code(family, N), B=B)


def iowef_row_sums_ok(iowef):
    """Check sum A_{g,h} = 2^K and per-g row sums = C(K, g)."""
    if iowef.total() != 2 ** iowef.K:
        return False
    for g in range(iowef.K + 1):
        row = sum(c for (gi, _), c in iowef.coefficients.items() if gi == g)
        if row != comb(iowef.K, g):
            return False
    return True
