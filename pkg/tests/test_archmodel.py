import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fhesim.archmodel import (
    BUILTIN_PRESETS,
    ENERGY_KEYS,
    PRESET_ENV,
    ConfigError,
    CostReport,
    Kernel,
    ModelParams,
    available_presets,
    calibration_k,
    cost_kernel,
    estimate_op,
    estimate_program,
    fbot_hints,
    footprint,
    frequency_for_width,
    functional_k,
    ks_kernel_counts,
    load_preset,
    op_counts,
    plan_residency,
    transpose_moves,
)
from fhesim.archmodel.counts import OPS

LAKE, BTS, CL = (load_preset(n) for n in ("lake", "bts", "cryptolight"))


def test_calibration_points():
    assert ks_kernel_counts(1024, 32) == (3200, 3136, 192)
    assert ks_kernel_counts(1024, 64) == (832, 800, 96)


@settings(max_examples=200, deadline=None)
@given(st.integers(64, 4096), st.sampled_from([32, 64, 256, 512, 1024]))
def test_ks_counts_follow_quadratic_in_k(Q, W):
    if Q < W:
        with pytest.raises(ValueError):
            ks_kernel_counts(Q, W)
        return
    adds, mults, ntts = ks_kernel_counts(Q, W)
    k = math.ceil(Q / W)
    assert (adds, mults, ntts) == (3 * k * k + 4 * k, 3 * k * k + 2 * k, 6 * k)
    assert functional_k(Q, W) >= calibration_k(Q, W)


def test_presets_load_and_validate():
    assert {"lake", "bts", "cryptolight"} <= set(available_presets())
    assert (LAKE.W, BTS.W, CL.W) == (32, 64, 512)
    assert CL.tu_enabled and not LAKE.tu_enabled
    assert CL.freq_hz == 3.0e9 and BTS.freq_hz == 1.2e9
    assert CL.power_total_w == pytest.approx(251.65)
    with pytest.raises(ConfigError):
        load_preset("does-not-exist")


def test_frequency_decays_with_width():
    f = [frequency_for_width(w) for w in (256, 512, 1024)]
    assert f[0] > f[1] > f[2]
    with pytest.raises(ConfigError):
        frequency_for_width(128)


def test_overrides_and_digest():
    a = CL.with_overrides(["spm_bytes=268435456", "energy.hbm_byte=40", "tu_enabled=false"])
    assert a.spm_bytes == 256 << 20 and a.energy["hbm_byte"] == 40.0 and not a.tu_enabled
    assert a.digest() != CL.digest() and CL.digest() == load_preset("cryptolight").digest()
    for bad in (["nope=1"], ["energy.nope=1"], ["W=48"], ["spm_bytes"], ["cu_count=0"]):
        with pytest.raises(ConfigError):
            CL.with_overrides(bad)


def test_preset_dir_env(tmp_path, monkeypatch):
    text = (BUILTIN_PRESETS / "bts.toml").read_text()
    (tmp_path / "mine.toml").write_text(text.replace('name = "bts"', 'name = "mine"'))
    monkeypatch.setenv(PRESET_ENV, str(tmp_path))
    assert "mine" in available_presets()
    assert load_preset("mine").name == "mine"
    bad = tmp_path / "bad.toml"
    bad.write_text("unknown_key = 3\n" + text)
    with pytest.raises(ConfigError):
        load_preset(bad)


def test_report_invariants():
    r = estimate_op("FMUL", CL)
    assert r.seconds == r.cycles / CL.freq_hz
    assert r.joules == pytest.approx(sum(r.quantities[k] * r.energy[k] for k in ENERGY_KEYS))
    assert r.energy["spm_byte"] == pytest.approx(CL.energy["spm_byte"] * 1e-12 * 0.9)
    s = r + r
    assert s.cycles == 2 * r.cycles and s.joules == pytest.approx(2 * r.joules)
    assert r.scaled(3).cycles == 3 * r.cycles
    with pytest.raises(ValueError):
        r + estimate_op("FMUL", BTS)


def test_kernel_costs_scale_with_lanes():
    k = Kernel("ntt", count=8, n=1 << 16)
    full, half = cost_kernel(k, CL), cost_kernel(k, CL, 0.5)
    assert half.cycles > full.cycles
    assert full.quantities["butterfly"] == 8 * (1 << 15) * 16
    assert cost_kernel(Kernel("mod_add", 4, 1024), CL).counts["mod_add"] == 4
    with pytest.raises(ValueError):
        Kernel("fft")
    with pytest.raises(ValueError):
        Kernel("ntt", count=-1)


def test_transpose_moves_and_tu_cost():
    assert transpose_moves(256, 512) == 256 * 256 // 2 * 8
    t = Kernel("transpose", 1, side=256)
    with_tu = cost_kernel(t, CL)
    without = cost_kernel(t, CL.replace(tu_enabled=False))
    assert with_tu.traffic["noc"] == 0 and without.traffic["noc"] > 0
    assert with_tu.quantities["tu_move"] > 0


def test_kernel_census_matches_functional_shape():
    # non-KS phases follow the functional scheme
    assert op_counts("FADD", 1536, 512)["mod_add"] == 2 * 3
    assert op_counts("ADDCP", 1536, 512)["mod_add"] == 3
    c = op_counts("FMUL", 1024, 64)
    assert c["ntt"] + c["intt"] >= 96
    assert op_counts("FBOT", 1536, 512)["ntt"] > 10 * op_counts("FMUL", 1536, 512)["ntt"]
    with pytest.raises(ValueError):
        op_counts("FOO", 1536, 512)


def test_residency_plan():
    mp = ModelParams()
    fp = footprint(CL, mp)
    assert fp["ciphertext"] == 2 * 3 * (1 << 16) * 64
    res = plan_residency(CL, mp, fbot_hints())
    assert res.ciphertexts_fit and not res.streamed
    small = plan_residency(CL.replace(spm_bytes=256 << 20), mp, fbot_hints())
    assert set(small.streamed) == set(fbot_hints())
    assert "twiddles" in small.pinned


@pytest.mark.parametrize("op", OPS)
def test_every_op_costs_and_orders(op):
    reps = [estimate_op(op, a) for a in (LAKE, BTS, CL)]
    assert all(r.cycles > 0 and r.joules > 0 for r in reps)
    assert reps[2].seconds < reps[0].seconds


def test_latency_ordering_fmul_frot():
    for op in ("FMUL", "FROT"):
        lake, bts, cl = (estimate_op(op, a).seconds for a in (LAKE, BTS, CL))
        assert cl < bts < lake


def test_estimate_program_is_sum_under_shared_residency():
    ops = ["FMUL", "FROT", "FADD"]
    total = estimate_program(ops, CL)
    assert total.cycles == sum(estimate_op(o, CL).cycles for o in ops)


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(N=100)
    assert ModelParams().side == 256
    assert ModelParams(N=1 << 15).side == 256
