import json

import numpy as np
import pytest

from bmst.analysis import q_function
from bmst.harness import (ConfigError, SimConfig, clopper_pearson,
                          config_sidecar_path, predict_floor, run_point,
                          run_sweep, simulate_frame)


def small_cfg(**over):
    base = dict(code="RC[2,1]^20", m=1, L=4, decoder="gad_perfect",
                ebn0_grid_db=(4.0,), seed=1, min_bit_errors=20,
                max_bits=100_000)
    base.update(over)
    return SimConfig(**base)


def test_config_validation():
    with pytest.raises(ConfigError):
        small_cfg(decoder="magic")
    with pytest.raises(ConfigError):
        small_cfg(decoder="gad_flipped")  # needs p_genie
    with pytest.raises(ConfigError):
        small_cfg(ebn0_grid_db=())
    with pytest.raises(ConfigError):
        small_cfg(decoder="tpd", d=0, m=2)  # window shorter than memory
    with pytest.raises(Exception):
        small_cfg(code="RC[2,2]^10")


def test_content_hash_tracks_config():
    a, b = small_cfg(), small_cfg()
    assert a.content_hash() == b.content_hash()
    assert a.content_hash() != small_cfg(seed=2).content_hash()


def test_default_delay_is_three_m():
    assert small_cfg(m=4, decoder="swd").delay == 12
    assert small_cfg(d=7).delay == 7


def test_clopper_pearson():
    lo, hi = clopper_pearson(0, 1000)
    assert lo == 0.0 and hi == pytest.approx(0.003682, abs=1e-5)
    lo, hi = clopper_pearson(10, 1000)
    assert lo < 0.01 < hi
    assert clopper_pearson(0, 0) == (0.0, 1.0)


def test_frame_counts_deterministic():
    cfg = small_cfg()
    a = simulate_frame(cfg, 4.0, 0, 0)
    b = simulate_frame(cfg, 4.0, 0, 0)
    assert (a.bits, a.errors) == (b.bits, b.errors)
    c = simulate_frame(cfg, 4.0, 0, 1)  # different frame index, fresh noise
    assert (a.bits,) == (c.bits,)


def test_run_point_deterministic():
    cfg = small_cfg(ebn0_grid_db=(2.0,), min_bit_errors=50)
    r1 = run_point(cfg, 2.0)
    r2 = run_point(cfg, 2.0)
    assert (r1.bits, r1.errors) == (r2.bits, r2.errors)
    assert r1.ci_low <= r1.ber <= r1.ci_high


def test_worker_count_invariance():
    cfg1 = small_cfg(ebn0_grid_db=(2.0,), min_bit_errors=30, workers=1)
    cfg2 = small_cfg(ebn0_grid_db=(2.0,), min_bit_errors=30, workers=2)
    r1 = run_point(cfg1, 2.0)
    r2 = run_point(cfg2, 2.0)
    assert (r1.bits, r1.errors) == (r2.bits, r2.errors)


def test_high_snr_collects_no_errors():
    cfg = small_cfg(ebn0_grid_db=(12.0,), max_bits=2000)
    r = run_point(cfg, 12.0)
    assert r.errors == 0
    assert r.bits >= 2000


def test_wall_clock_truncation_flag():
    cfg = small_cfg(min_bit_errors=10**9, max_bits=10**9, max_seconds=1e-9)
    r = run_point(cfg, 4.0)
    assert r.truncated


def test_sweep_csv_identical_across_runs(tmp_path):
    cfg = small_cfg(ebn0_grid_db=(2.0, 3.0), min_bit_errors=10)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run_sweep(cfg, out_csv=out1)
    run_sweep(cfg, out_csv=out2)
    assert out1.read_bytes() == out2.read_bytes()
    sidecar = json.loads((tmp_path / "a.config.json").read_text())
    assert sidecar["content_hash"] == cfg.content_hash()


def test_sweep_resume_skips_completed_points(tmp_path):
    cfg = small_cfg(ebn0_grid_db=(2.0, 3.0), min_bit_errors=10)
    out = tmp_path / "r.csv"
    first = run_sweep(cfg, out_csv=out)
    assert len(first) == 2
    again = run_sweep(cfg, out_csv=out)
    assert again == []
    assert len(out.read_text().strip().splitlines()) == 3  # header + 2 rows


def test_sweep_rejects_foreign_results(tmp_path):
    cfg = small_cfg(ebn0_grid_db=(2.0,), min_bit_errors=10)
    out = tmp_path / "r.csv"
    run_sweep(cfg, out_csv=out)
    with pytest.raises(ConfigError):
        run_sweep(small_cfg(ebn0_grid_db=(2.0,), min_bit_errors=10, seed=9),
                  out_csv=out)
    config_sidecar_path(out)
    (tmp_path / "r.config.json").unlink()
    with pytest.raises(ConfigError):
        run_sweep(cfg, out_csv=out)


def test_tpd_point_reports_phase_counters():
    cfg = SimConfig(code="RC[2,1]^20", m=2, L=4, decoder="tpd",
                    ebn0_grid_db=(6.0,), d=4, i_max=6, seed=0,
                    min_bit_errors=1, max_bits=500)
    r = run_point(cfg, 6.0)
    assert r.p1_bits == (r.bits // (4 * 20)) * 4 * 3 * 40  # frames * L * (m+1) * n
    assert r.p2_errors == r.errors


def test_single_antipodal_look_matches_gaussian_tail():
    # RC[2,1] with m=0 and an exact genie is two independent looks at each
    # message bit: BER = Q(sqrt(2 * 2 * R * snr)) with R = 1/2
    g = 6.79
    cfg = SimConfig(code="RC[2,1]^1000", m=0, L=10, decoder="gad_perfect",
                    ebn0_grid_db=(g,), seed=2, min_bit_errors=300,
                    max_bits=10**9)
    r = run_point(cfg, g)
    expect = float(q_function(np.sqrt(2.0 * 10 ** (g / 10))))
    assert r.ci_low <= expect <= r.ci_high


def test_predict_floor_validates_and_computes():
    val = predict_floor("RC[2,1]^5000", 30, 7.0e-6, 0.5)
    assert 0 < val < 1e-15
    with pytest.raises(ValueError):
        predict_floor("RC[2,1]^5000", 30, 0.6, 0.5)
