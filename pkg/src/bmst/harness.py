"""Monte Carlo BER experiment engine.

Frame f of grid point p draws its RNG from SeedSequence(seed,
spawn_key=(p, f)), so error counts depend only on (config, seed) and never
on scheduling or worker count. Stop rules are evaluated frame-by-frame in
index order; surplus frames computed by a pool are discarded.
"""

import csv
import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.stats import beta

from . import analysis
from .channel import channel_llr, ebn0_to_sigma, transmit
from .codes import compute_iowef, parse_code_spec
from .coupling import bpsk_map, encode_frame, make_system, true_branch_words
from .swd import decode_frame_swd
from .tpd import (TpdConfig, decode_frame_gad, decode_frame_tpd,
                  flipped_side_info, perfect_side_info)

DECODERS = ("swd", "tpd", "gad_perfect", "gad_flipped")

RESULT_CSV_HEADER = ["ebn0_db", "decoder", "bits", "errors", "ber", "ci_low",
                     "ci_high", "p1_bits", "p1_errors", "p2_errors",
                     "mean_iters", "seed", "truncated"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    code: str
    m: int
    L: int
    decoder: str
    ebn0_grid_db: tuple
    d: int = -1                  # -1 -> 3m
    i_max: int = 18
    p_genie: float = -1.0        # required for gad_flipped
    min_bit_errors: int = 100
    max_bits: int = 1_000_000_000
    max_seconds: float = -1.0    # <= 0 -> no wall-clock cap
    seed: int = 0
    workers: int = 1
    stop_threshold: float = 1e-5

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ConfigError(f"decoder must be one of {DECODERS}")
        if self.decoder == "gad_flipped" and not 0.0 <= self.p_genie <= 0.5:
            raise ConfigError("gad_flipped needs p_genie in [0, 0.5]")
        if not self.ebn0_grid_db:
            raise ConfigError("ebn0 grid must be non-empty")
        if self.m < 0 or self.L < 1:
            raise ConfigError("need m >= 0 and L >= 1")
        if self.decoder == "tpd" and self.delay < self.m:
            raise ConfigError("TPD needs d >= m")
        parse_code_spec(self.code)  # validate spec string early
        object.__setattr__(self, "ebn0_grid_db", tuple(float(g) for g in self.ebn0_grid_db))

    @property
    def delay(self):
        return 3 * self.m if self.d < 0 else self.d

    def to_dict(self):
        d = asdict(self)
        d["ebn0_grid_db"] = list(d["ebn0_grid_db"])
        return d

    def content_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=False).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class PointResult:
    ebn0_db: float
    decoder: str
    bits: int
    errors: int
    ber: float
    ci_low: float
    ci_high: float
    p1_bits: int
    p1_errors: int
    p2_errors: int
    mean_iters: float
    seed: int
    truncated: bool

    def csv_row(self):
        return [f"{self.ebn0_db:.6g}", self.decoder, self.bits, self.errors,
                f"{self.ber:.6e}", f"{self.ci_low:.6e}", f"{self.ci_high:.6e}",
                self.p1_bits, self.p1_errors, self.p2_errors,
                f"{self.mean_iters:.4f}", self.seed, int(self.truncated)]


def clopper_pearson(errors, bits, conf=0.95):
    """Exact binomial confidence interval."""
    if bits == 0:
        return 0.0, 1.0
    a = (1.0 - conf) / 2.0
    lo = 0.0 if errors == 0 else float(beta.ppf(a, errors, bits - errors + 1))
    hi = 1.0 if errors == bits else float(beta.ppf(1.0 - a, errors + 1, bits - errors))
    return lo, hi


_SYSTEM_CACHE = {}


def _get_system(cfg):
    key = (cfg.code, cfg.m, cfg.L, cfg.seed)
    if key not in _SYSTEM_CACHE:
        _SYSTEM_CACHE[key] = make_system(cfg.code, cfg.m, cfg.L, cfg.seed)
    return _SYSTEM_CACHE[key]


@dataclass
class FrameCounts:
    bits: int = 0
    errors: int = 0
    p1_bits: int = 0
    p1_errors: int = 0
    p2_errors: int = 0
    iters: int = 0
    layers: int = 0

    def add(self, other):
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))


def simulate_frame(cfg_dict, ebn0_db, point_idx, frame_idx):
    """Encode, transmit and decode one frame; returns bit/error counts.
    Module-level so process pools can pickle it."""
    cfg = cfg_dict if isinstance(cfg_dict, SimConfig) else SimConfig(**cfg_dict)
    sys = _get_system(cfg)
    sigma = ebn0_to_sigma(ebn0_db, sys.basic.rate)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(point_idx, frame_idx)))
    msgs = rng.integers(0, 2, size=(sys.L, sys.k), dtype=np.uint8)
    c, v = encode_frame(sys, msgs, return_intermediate=True)
    y = transmit(bpsk_map(c), sigma, rng)

    out = FrameCounts(bits=sys.L * sys.k)
    if cfg.decoder == "swd":
        res = decode_frame_swd(sys, channel_llr(y, sigma), cfg.delay, cfg.i_max,
                               cfg.stop_threshold)
        out.errors = int(np.sum(res.u_hat != msgs))
        out.iters = int(res.iterations.sum())
        out.layers = sys.L
    elif cfg.decoder == "tpd":
        res = decode_frame_tpd(sys, y, sigma,
                               TpdConfig(d=cfg.delay, i_max=cfg.i_max,
                                         stop_threshold=cfg.stop_threshold))
        w_true = true_branch_words(sys, v[:sys.L])
        out.errors = int(np.sum(res.u_hat != msgs))
        out.p1_bits = w_true.size
        out.p1_errors = int(np.sum(res.w_tilde != w_true))
        out.p2_errors = out.errors
        out.iters = int(res.iterations.sum())
        out.layers = sys.L
    elif cfg.decoder == "gad_perfect":
        side = perfect_side_info(sys, v)
        out.errors = int(np.sum(decode_frame_gad(sys, y, side) != msgs))
    else:  # gad_flipped
        side = flipped_side_info(sys, v, cfg.p_genie, rng)
        out.errors = int(np.sum(decode_frame_gad(sys, y, side) != msgs))
    return out


def run_point(cfg, ebn0_db, point_idx=0):
    """Simulate frames at one grid point until a stop rule fires."""
    start = time.monotonic()
    total = FrameCounts()
    truncated = False
    cfg_dict = cfg.to_dict()

    def stopped():
        return (total.errors >= cfg.min_bit_errors or total.bits >= cfg.max_bits)

    if cfg.workers <= 1:
        f = 0
        while not stopped():
            total.add(simulate_frame(cfg, ebn0_db, point_idx, f))
            f += 1
            if cfg.max_seconds > 0 and time.monotonic() - start > cfg.max_seconds:
                truncated = not stopped()
                break
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            pending = {}
            next_submit = 0
            next_take = 0
            while not stopped():
                while len(pending) < 2 * cfg.workers:
                    pending[next_submit] = ex.submit(
                        simulate_frame, cfg_dict, ebn0_db, point_idx, next_submit)
                    next_submit += 1
                total.add(pending.pop(next_take).result())
                next_take += 1
                if cfg.max_seconds > 0 and time.monotonic() - start > cfg.max_seconds:
                    truncated = not stopped()
                    break
            for fut in pending.values():
                fut.cancel()

    lo, hi = clopper_pearson(total.errors, total.bits)
    return PointResult(
        ebn0_db=float(ebn0_db), decoder=cfg.decoder, bits=total.bits,
        errors=total.errors, ber=total.errors / total.bits if total.bits else 0.0,
        ci_low=lo, ci_high=hi, p1_bits=total.p1_bits, p1_errors=total.p1_errors,
        p2_errors=total.p2_errors,
        mean_iters=total.iters / total.layers if total.layers else 0.0,
        seed=cfg.seed, truncated=truncated)


def config_sidecar_path(out_csv):
    base, _ = os.path.splitext(str(out_csv))
    return base + ".config.json"


def _load_completed(out_csv):
    done = set()
    with open(out_csv, newline="") as fh:
        for row in csv.DictReader(fh):
            done.add(float(row["ebn0_db"]))
    return done


def run_sweep(cfg, out_csv=None):
    """run_point over the grid; with out_csv, rows are appended as they
    finish and a rerun resumes, skipping completed points (the adjacent
    config JSON must hash-match)."""
    done = set()
    writer = None
    fh = None
    if out_csv is not None:
        sidecar = config_sidecar_path(out_csv)
        if os.path.exists(out_csv):
            if not os.path.exists(sidecar):
                raise ConfigError(f"results exist but config sidecar {sidecar} is missing")
            with open(sidecar) as f:
                stored = json.load(f)
            if stored.get("content_hash") != cfg.content_hash():
                raise ConfigError("existing results were produced by a different config")
            done = _load_completed(out_csv)
        else:
            with open(sidecar, "w") as f:
                json.dump({"config": cfg.to_dict(),
                           "content_hash": cfg.content_hash(),
                           "rng": "numpy PCG64 via SeedSequence(seed, spawn_key=(point, frame))",
                           "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S")},
                          f, indent=2)
            with open(out_csv, "w", newline="") as f:
                csv.writer(f).writerow(RESULT_CSV_HEADER)
        fh = open(out_csv, "a", newline="")
        writer = csv.writer(fh)

    results = []
    try:
        for idx, g in enumerate(cfg.ebn0_grid_db):
            if float(g) in done:
                continue
            res = run_point(cfg, g, point_idx=idx)
            results.append(res)
            if writer is not None:
                writer.writerow(res.csv_row())
                fh.flush()
    finally:
        if fh is not None:
            fh.close()
    return results


def predict_floor(code_spec, m, measured_p_i, ebn0_db):
    """Phase-II BER prediction: the genie bound evaluated at
    p_genie = measured p_I."""
    if not 0.0 <= measured_p_i < 0.5:
        raise ValueError("p_I must be in [0, 0.5)")
    cart = parse_code_spec(code_spec)
    iowef = compute_iowef(cart.short)
    return analysis.genie_bound(iowef, m, measured_p_i, ebn0_db)
