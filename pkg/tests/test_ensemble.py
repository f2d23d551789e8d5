import numpy as np
import pytest

from xxzsim.basis import build_sector
from xxzsim.dynamics import TrajectoryConfig, run_trajectory
from xxzsim.ensemble import (
    EnsembleConfig,
    aggregate,
    collect_records,
    compare_runs,
    run_ensemble,
)
from xxzsim.model import ModelParams, build_hamiltonian
from xxzsim.noise import NoiseConfig, trajectory_seed


@pytest.fixture(scope="module")
def small_chain():
    b = build_sector(9, 1)
    H = build_hamiltonian(b, ModelParams(J=1.0, Delta=0.4))
    cfg = TrajectoryConfig(initial_sites=(4,), t_final=1.5, sample_dt=0.05)
    return b, H, cfg


def test_noiseless_mean_equals_single_trajectory(small_chain):
    b, H, cfg = small_chain
    noise = NoiseConfig.disabled(9)
    series = run_ensemble(H, noise, cfg, EnsembleConfig(5, master_seed=0, workers=1))
    single = run_trajectory(H, noise, cfg, trajectory_seed(0, 0))
    np.testing.assert_array_equal(
        series.mean["magnetization"], single.record.magnetization
    )
    np.testing.assert_array_equal(series.std_error["magnetization"], 0.0)
    np.testing.assert_array_equal(series.std_error["ier"], 0.0)


def test_deterministic_across_worker_counts(small_chain):
    b, H, cfg = small_chain
    noise = NoiseConfig.uniform(9, shape=0.7, rate=2.0)
    runs = [
        run_ensemble(H, noise, cfg, EnsembleConfig(34, master_seed=7, workers=w))
        for w in (1, 2)
    ]
    for key in runs[0].mean:
        np.testing.assert_array_equal(runs[0].mean[key], runs[1].mean[key])
        np.testing.assert_array_equal(runs[0].std_error[key], runs[1].std_error[key])
    assert runs[0].effective_t_final == runs[1].effective_t_final


def test_total_magnetization_conserved_in_mean(small_chain):
    b, H, cfg = small_chain
    noise = NoiseConfig.uniform(9, shape=1.0, rate=3.0)
    series = run_ensemble(H, noise, cfg, EnsembleConfig(12, master_seed=3, workers=1))
    totals = series.mean["magnetization"].sum(axis=1)
    np.testing.assert_allclose(totals, 2 * 1 - 9, atol=1e-8)


def test_effective_t_final_is_minimum_stop(small_chain):
    b, H, cfg = small_chain
    noise = NoiseConfig.uniform(9, shape=1.0, rate=1.0)
    results, _ = collect_records(
        H, noise, cfg, EnsembleConfig(8, master_seed=1, workers=1)
    )
    series = aggregate(results)
    assert series.effective_t_final == min(r.stop_time for r in results)


def test_se_scales_like_inverse_sqrt_m(small_chain):
    b, H, cfg = small_chain
    noise = NoiseConfig.uniform(9, shape=1.0, rate=2.0)
    small = run_ensemble(H, noise, cfg, EnsembleConfig(80, master_seed=11, workers=2))
    big = run_ensemble(H, noise, cfg, EnsembleConfig(160, master_seed=11, workers=2))
    # compare on strictly positive SE entries away from t=0
    se_small = small.std_error["ier"][5:]
    se_big = big.std_error["ier"][5:]
    ratio = np.median(se_small / se_big)
    assert np.sqrt(2) * 0.85 < ratio < np.sqrt(2) * 1.15


def test_average_state_realizes_dephasing(small_chain):
    # trajectory-averaged state: diagonal preserved, coherences suppressed
    b, H, cfg = small_chain
    noise = NoiseConfig.uniform(9, shape=1.0, rate=20.0)
    series = run_ensemble(
        H,
        noise,
        cfg,
        EnsembleConfig(60, master_seed=2, workers=2),
        keep_average_state=True,
    )
    avg = series.average_state
    assert avg.shape == (len(series.times), 9, 9)
    # trace one at every grid point
    traces = np.trace(avg, axis1=1, axis2=2)
    np.testing.assert_allclose(traces.real, 1.0, atol=1e-12)
    # strong frequent dephasing keeps the state nearly diagonal
    final = avg[-1]
    off = final - np.diag(np.diag(final))
    assert np.abs(off).max() < 0.05
    # the averaged diagonal matches the averaged magnetization
    from xxzsim.basis import sigma_z_matrix

    mag = sigma_z_matrix(b) @ np.diagonal(avg[-1]).real
    np.testing.assert_allclose(mag, series.mean["magnetization"][-1], atol=1e-12)


def test_average_state_deterministic_across_workers(small_chain):
    b, H, cfg = small_chain
    noise = NoiseConfig.uniform(9, shape=0.9, rate=2.0)
    states = [
        run_ensemble(
            H, noise, cfg, EnsembleConfig(40, master_seed=4, workers=w),
            keep_average_state=True,
        ).average_state
        for w in (1, 2)
    ]
    np.testing.assert_array_equal(states[0], states[1])


def test_compare_runs_identical(small_chain):
    b, H, cfg = small_chain
    noise = NoiseConfig.uniform(9, shape=1.0, rate=1.0)
    s = run_ensemble(H, noise, cfg, EnsembleConfig(10, master_seed=5, workers=1))
    cmp = compare_runs(s, s, "ier", 1.0)
    assert cmp.difference == 0.0
    assert not cmp.significant


def test_compare_runs_detects_separation(small_chain):
    b, H, cfg = small_chain
    slow = run_ensemble(
        H,
        NoiseConfig.uniform(9, shape=1.0, rate=50.0),
        cfg,
        EnsembleConfig(40, master_seed=6, workers=2),
    )
    free = run_ensemble(
        H,
        NoiseConfig.disabled(9),
        cfg,
        EnsembleConfig(2, master_seed=6, workers=1),
    )
    cmp = compare_runs(slow, free, "ipr", 1.5)
    assert cmp.difference > 0  # noise keeps the excitation more localized
    assert cmp.significant


def test_compare_runs_magnetization_needs_site(small_chain):
    b, H, cfg = small_chain
    noise = NoiseConfig.disabled(9)
    s = run_ensemble(H, noise, cfg, EnsembleConfig(2, master_seed=0, workers=1))
    with pytest.raises(ValueError):
        compare_runs(s, s, "magnetization", 0.5)
    cmp = compare_runs(s, s, "magnetization", 0.5, site=4)
    assert cmp.difference == 0.0


def test_compare_runs_grid_mismatch(small_chain):
    b, H, cfg = small_chain
    noise = NoiseConfig.disabled(9)
    s1 = run_ensemble(H, noise, cfg, EnsembleConfig(2, master_seed=0, workers=1))
    cfg2 = TrajectoryConfig(initial_sites=(4,), t_final=1.0, sample_dt=0.05)
    s2 = run_ensemble(H, noise, cfg2, EnsembleConfig(2, master_seed=0, workers=1))
    with pytest.raises(ValueError):
        compare_runs(s1, s2, "ier", 0.5)


def test_ensemble_config_validation():
    with pytest.raises(ValueError):
        EnsembleConfig(0, master_seed=1)
    with pytest.raises(ValueError):
        EnsembleConfig(5, master_seed=1, workers=0)


def test_metadata_echo(small_chain):
    b, H, cfg = small_chain
    noise = NoiseConfig.disabled(9)
    s = run_ensemble(H, noise, cfg, EnsembleConfig(3, master_seed=42, workers=1))
    md = s.metadata
    assert md["master_seed"] == 42
    assert md["n_trajectories"] == 3
    assert md["sample_dt"] == cfg.sample_dt
    assert md["conservation"]["max_trace_error"] < 1e-9
    assert md["code_version"]
