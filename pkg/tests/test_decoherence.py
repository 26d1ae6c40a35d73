import numpy as np
import pytest

from qwalklab.analysis import classical_binomial, relabel, total_variation
from qwalklab.coined import InitialCoinSpec, evolve, initial_state
from qwalklab.coins import hadamard_coin
from qwalklab.decoherence import (
    DENSITY_KINDS,
    NoiseKind,
    NoiseModel,
    density_from_state,
    ensemble_average,
    evolve_density,
    evolve_trajectory,
)
from qwalklab.analysis import position_distribution
from qwalklab.errors import InvalidParameterError, ResourceLimitError
from qwalklab.substrate import make_line


def centered_line(n_sites):
    sub = make_line(n_sites)
    state = initial_state(sub, InitialCoinSpec(0.5, np.pi / 2, n_sites // 2))
    return sub, state


def test_noise_model_validation():
    NoiseModel(NoiseKind.COIN_MEASURE, 0.5)
    NoiseModel(NoiseKind.FAST_PHASE, 7.0)  # phase widths above pi are fine
    with pytest.raises(InvalidParameterError):
        NoiseModel(NoiseKind.COIN_MEASURE, 1.5)
    with pytest.raises(InvalidParameterError):
        NoiseModel(NoiseKind.POSITION_MEASURE, -0.1)
    with pytest.raises(InvalidParameterError):
        NoiseModel(NoiseKind.STATIC_PHASE, -1.0)
    with pytest.raises(InvalidParameterError):
        NoiseModel(NoiseKind.NONE, 0.3)
    assert NoiseModel("fast_phase", 1.0).kind is NoiseKind.FAST_PHASE


# -- density route ---------------------------------------------------------------


def test_density_none_matches_pure():
    sub, state = centered_line(21)
    rho = density_from_state(state)
    out = evolve_density(rho, hadamard_coin(), sub, NoiseModel(NoiseKind.NONE), 8)
    pure = evolve(state, hadamard_coin(), sub, 8)
    want = np.outer(pure.amplitudes.reshape(-1), pure.amplitudes.reshape(-1).conj())
    assert np.abs(out.matrix - want).max() < 1e-12


def test_density_channel_properties():
    sub, state = centered_line(15)
    for kind, strength in (
        (NoiseKind.COIN_MEASURE, 0.3),
        (NoiseKind.POSITION_MEASURE, 0.25),
        (NoiseKind.FAST_PHASE, 1.2),
    ):
        rho = density_from_state(state)
        out = evolve_density(rho, hadamard_coin(), sub, NoiseModel(kind, strength), 12)
        assert abs(out.trace() - 1.0) < 1e-9
        assert out.hermiticity_defect() < 1e-12
        eigs = np.linalg.eigvalsh(out.matrix)
        assert eigs.min() > -1e-10
        assert out.purity() < 1.0 - 1e-6  # noise genuinely mixes the state


def test_density_full_coin_measurement_gives_binomial():
    t = 20
    sub, state = centered_line(2 * t + 1)
    noise = NoiseModel(NoiseKind.COIN_MEASURE, 1.0)
    out = evolve_density(density_from_state(state), hadamard_coin(), sub, noise, t)
    dist = relabel(position_distribution(out), np.arange(2 * t + 1) - t)
    assert total_variation(dist, classical_binomial(t)) < 1e-12


def test_density_fast_phase_factor_closed_form():
    # one step from a pure superposition: cross-position coherence must
    # shrink by exactly (sin s / s)^2
    sub, state = centered_line(9)
    s = 0.9
    out = evolve_density(
        density_from_state(state), hadamard_coin(), sub,
        NoiseModel(NoiseKind.FAST_PHASE, s), 1,
    )
    clean = evolve_density(
        density_from_state(state), hadamard_coin(), sub,
        NoiseModel(NoiseKind.NONE), 1,
    )
    factor = (np.sin(s) / s) ** 2
    n = 9
    got = out.matrix.reshape(2, n, 2, n)
    want = clean.matrix.reshape(2, n, 2, n)
    x1, x2 = 3, 5
    assert abs(got[0, x1, 1, x2] - factor * want[0, x1, 1, x2]) < 1e-14
    assert abs(got[0, x1, 1, x1] - want[0, x1, 1, x1]) < 1e-14  # same site untouched


def test_density_rejects_open_form_kinds():
    sub, state = centered_line(9)
    for kind in (NoiseKind.STATIC_PHASE, NoiseKind.SLOW_PHASE):
        assert kind not in DENSITY_KINDS
        with pytest.raises(InvalidParameterError, match="ensemble_average"):
            evolve_density(
                density_from_state(state), hadamard_coin(), sub, NoiseModel(kind, 1.0), 3
            )


def test_density_budget_guard():
    sub, state = centered_line(101)
    with pytest.raises(ResourceLimitError):
        evolve_density(
            density_from_state(state), hadamard_coin(), sub,
            NoiseModel(NoiseKind.NONE), 1, budget_amplitudes=1000,
        )


# -- trajectory route -------------------------------------------------------------


def test_trajectory_deterministic():
    sub, state = centered_line(41)
    noise = NoiseModel(NoiseKind.FAST_PHASE, 1.0, seed=5)
    a = evolve_trajectory(state, hadamard_coin(), sub, noise, 20, run_seed=3)
    b = evolve_trajectory(state, hadamard_coin(), sub, noise, 20, run_seed=3)
    np.testing.assert_array_equal(a.amplitudes, b.amplitudes)
    c = evolve_trajectory(state, hadamard_coin(), sub, noise, 20, run_seed=4)
    assert np.abs(a.amplitudes - c.amplitudes).max() > 1e-6


def test_trajectory_zero_strength_is_pure_bitwise():
    sub, state = centered_line(41)
    pure = evolve(state, hadamard_coin(), sub, 20)
    for kind in (NoiseKind.STATIC_PHASE, NoiseKind.FAST_PHASE, NoiseKind.SLOW_PHASE,
                 NoiseKind.COIN_MEASURE, NoiseKind.POSITION_MEASURE):
        out = evolve_trajectory(
            state, hadamard_coin(), sub, NoiseModel(kind, 0.0, seed=1), 20, run_seed=0
        )
        np.testing.assert_array_equal(out.amplitudes, pure.amplitudes)


def test_trajectory_norm_stays_one():
    sub, state = centered_line(61)
    for kind, s in ((NoiseKind.COIN_MEASURE, 0.4), (NoiseKind.POSITION_MEASURE, 0.4),
                    (NoiseKind.STATIC_PHASE, 2.0), (NoiseKind.SLOW_PHASE, 3.0)):
        out = evolve_trajectory(
            state, hadamard_coin(), sub, NoiseModel(kind, s, seed=9), 30, run_seed=1
        )
        assert abs(out.norm() - 1.0) < 1e-12


def test_full_coin_measurement_collapses_to_point():
    sub, state = centered_line(41)
    noise = NoiseModel(NoiseKind.COIN_MEASURE, 1.0, seed=2)
    out = evolve_trajectory(state, hadamard_coin(), sub, noise, 15, run_seed=0)
    p = out.position_probabilities()
    assert abs(p.max() - 1.0) < 1e-12  # a classical walker sits on one site


def test_ensemble_none_equals_pure_exactly():
    sub, state = centered_line(41)
    res = ensemble_average(
        state, hadamard_coin(), sub, NoiseModel(NoiseKind.NONE), 20, 17, master_seed=4
    )
    pure = evolve(state, hadamard_coin(), sub, 20)
    np.testing.assert_array_equal(
        res.mean_distribution.probabilities, pure.position_probabilities()
    )
    assert res.n_runs == 17


def test_ensemble_deterministic():
    sub, state = centered_line(31)
    noise = NoiseModel(NoiseKind.COIN_MEASURE, 0.3, seed=8)
    a = ensemble_average(state, hadamard_coin(), sub, noise, 10, 50, master_seed=1)
    b = ensemble_average(state, hadamard_coin(), sub, noise, 10, 50, master_seed=1)
    np.testing.assert_array_equal(
        a.mean_distribution.probabilities, b.mean_distribution.probabilities
    )
    c = ensemble_average(state, hadamard_coin(), sub, noise, 10, 50, master_seed=2)
    assert (
        np.abs(a.mean_distribution.probabilities - c.mean_distribution.probabilities).max()
        > 1e-6
    )


def test_trajectories_converge_to_density_law():
    # unravelling consistency: many trajectories reproduce the exact
    # open-system position law at Monte-Carlo accuracy
    t, runs = 10, 4000
    sub, state = centered_line(2 * t + 1)
    noise = NoiseModel(NoiseKind.COIN_MEASURE, 0.3, seed=13)
    exact = evolve_density(density_from_state(state), hadamard_coin(), sub, noise, t)
    mc = ensemble_average(state, hadamard_coin(), sub, noise, t, runs, master_seed=0)
    tv = total_variation(position_distribution(exact), mc.mean_distribution)
    assert tv < 0.05


def test_position_measurement_ensemble_is_binomial():
    t, runs = 8, 2000
    sub, state = centered_line(2 * t + 1)
    noise = NoiseModel(NoiseKind.POSITION_MEASURE, 1.0, seed=21)
    res = ensemble_average(state, hadamard_coin(), sub, noise, t, runs, master_seed=0)
    dist = relabel(res.mean_distribution, np.arange(2 * t + 1) - t)
    assert total_variation(dist, classical_binomial(t)) < 0.08


def test_static_phase_fixed_within_run():
    # with a pi-wide static pattern two different runs localize around
    # the origin but differ in detail; the same run repeats exactly
    sub, state = centered_line(81)
    noise = NoiseModel(NoiseKind.STATIC_PHASE, np.pi, seed=3)
    a = evolve_trajectory(state, hadamard_coin(), sub, noise, 40, run_seed=0)
    b = evolve_trajectory(state, hadamard_coin(), sub, noise, 40, run_seed=1)
    assert np.abs(a.amplitudes - b.amplitudes).max() > 1e-6
    again = evolve_trajectory(state, hadamard_coin(), sub, noise, 40, run_seed=0)
    np.testing.assert_array_equal(a.amplitudes, again.amplitudes)


def test_slow_phase_slows_spreading():
    # a strong position-uniform per-step coin phase dephases the walk
    # towards diffusive spreading: well below ballistic at T=100
    t = 100
    sub, state = centered_line(2 * t + 1)
    noise = NoiseModel(NoiseKind.SLOW_PHASE, np.pi, seed=6)
    res = ensemble_average(state, hadamard_coin(), sub, noise, t, 60, master_seed=0)
    clean = evolve(state, hadamard_coin(), sub, t)
    x = np.arange(2 * t + 1) - t
    pc = clean.position_probabilities()
    clean_sigma = np.sqrt((pc * x**2).sum() - (pc * x).sum() ** 2)
    assert res.sigma_of_mean < 0.5 * clean_sigma
    assert res.sigma_of_mean > 0.5 * np.sqrt(t)  # but still spreads


def test_coin_measure_sigma_near_sqrt_t():
    t = 100
    sub, state = centered_line(2 * t + 1)
    noise = NoiseModel(NoiseKind.COIN_MEASURE, 1.0, seed=1)
    res = ensemble_average(state, hadamard_coin(), sub, noise, t, 400, master_seed=0)
    assert abs(res.sigma_of_mean - np.sqrt(t)) < 1.0


def test_fast_phase_drives_sigma_to_diffusive_scaling():
    # strong per-step phase noise: quadrupling the horizon should only
    # double the spread (sqrt scaling), unlike the clean walk's factor 4
    noise = NoiseModel(NoiseKind.FAST_PHASE, np.pi, seed=2)
    sigma = {}
    for t in (100, 400):
        sub, state = centered_line(2 * t + 1)
        res = ensemble_average(state, hadamard_coin(), sub, noise, t, 1000, master_seed=5)
        x = np.arange(2 * t + 1) - t
        p = res.mean_distribution.probabilities
        sigma[t] = np.sqrt((p * x**2).sum() - (p * x).sum() ** 2)
    assert 1.8 <= sigma[400] / sigma[100] <= 2.3
