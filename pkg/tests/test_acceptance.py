"""End-to-end gates for the toolkit.

One test per gate, in order. Each runs the real public API at the
scales and tolerances the package promises; nothing here is mocked.
Oracles (binomial law, dense spectral propagator, three-level dimer)
are built inline from first principles so a regression in the library
cannot hide behind itself.
"""

import json
import math
import time

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from qwalklab.analysis import (
    amplitude_capacity,
    classical_binomial,
    displacement_labels,
    inverse_participation_ratio,
    moments,
    position_distribution,
    qubits_needed,
    relabel,
    sample,
    total_variation,
)
from qwalklab.coined import InitialCoinSpec, evolve, initial_state, step, step_adjoint
from qwalklab.coins import hadamard_coin
from qwalklab.config import parse_config_text
from qwalklab.continuous import build_hamiltonian, evolve_ct, vertex_state
from qwalklab.decoherence import (
    NoiseKind,
    NoiseModel,
    density_from_state,
    ensemble_average,
    evolve_density,
)
from qwalklab.errors import ResourceLimitError
from qwalklab.multiwalker import (
    InteractionKind,
    InteractionSpec,
    MultiWalkKind,
    dimension_guard,
    exchange_defect,
    multi_evolve_ct,
    multi_evolve_dt,
    multi_initial_state,
)
from qwalklab.runner import run
from qwalklab.substrate import (
    Boundary,
    PercolationMode,
    PercolationSpec,
    from_adjacency,
    make_line,
    percolate,
)

H = hadamard_coin()
SYMMETRIC = InitialCoinSpec(b=0.5, beta=math.pi / 2)


def line_walk(t, n=None):
    """Symmetric Hadamard walk for t steps, centred on a fresh line."""
    n = n if n is not None else 2 * t + 1
    sub = make_line(n)
    state = evolve(initial_state(sub, InitialCoinSpec(b=0.5, beta=math.pi / 2, start_vertex=n // 2)), H, sub, t)
    return sub, state, relabel(position_distribution(state), displacement_labels(n, n // 2))


def test_01_double_peaked_line_walk_at_t100():
    t0 = time.perf_counter()
    _, _, dist = line_walk(100, n=201)
    elapsed = time.perf_counter() - t0
    p, x = dist.probabilities, dist.labels

    odd = p[np.abs(x) % 2 == 1]
    assert odd.max() <= 1e-12

    sym = np.abs(p - p[::-1]).max()
    assert sym <= 1e-10

    # two local maxima, mirror-placed, in the ballistic window
    interior = (p[1:-1] > p[:-2]) & (p[1:-1] >= p[2:])
    peaks = x[1:-1][interior]
    peaks = peaks[np.abs(peaks) >= 10]  # ignore parity ripple near origin
    right = peaks[peaks > 0]
    assert right.size >= 1
    xstar = int(right[np.argmax(p[np.searchsorted(x, right)])])
    assert 60 <= xstar <= 80
    assert -xstar in peaks
    assert elapsed < 1.0


def test_02_ballistic_vs_diffusive_spread():
    s100 = moments(line_walk(100)[2]).sigma
    s50 = moments(line_walk(50)[2]).sigma
    assert s100 / s50 == pytest.approx(2.00, abs=0.05)

    c100 = moments(classical_binomial(100)).sigma
    c50 = moments(classical_binomial(50)).sigma
    assert c100 / c50 == pytest.approx(math.sqrt(2.0), abs=1e-12)

    assert s100 / c100 > 3.0


def test_03_resource_arithmetic():
    assert qubits_needed(10**6) == 22
    assert amplitude_capacity(2**30, 4) == 2**27


def test_04_continuous_walk_against_spectral_oracle():
    # full transfer across a single edge at a quarter Rabi period
    g2 = from_adjacency([(0, 1)], 2)
    for gamma in (1.0, 2.5):
        h = build_hamiltonian(g2, gamma)
        out = evolve_ct(vertex_state(g2, 0), h, math.pi / (2 * gamma))
        assert abs(abs(out.amplitudes[1]) ** 2 - 1.0) < 1e-8

    @given(
        n=st.integers(2, 64),
        data=st.data(),
        gamma=st.floats(0.1, 3.0),
        t=st.floats(0.0, 5.0),
    )
    @settings(max_examples=25, deadline=None)
    def check(n, data, gamma, t):
        edges = sorted(
            data.draw(
                st.sets(
                    st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).map(
                        lambda e: (min(e), max(e))
                    ).filter(lambda e: e[0] != e[1]),
                    min_size=1,
                    max_size=min(3 * n, n * (n - 1) // 2),
                )
            )
        )
        sub = from_adjacency(edges, n)
        adj = np.zeros((n, n))
        for u, v in edges:
            adj[u, v] = adj[v, u] = 1.0
        w, vecs = np.linalg.eigh(gamma * adj)
        psi0 = np.zeros(n, dtype=complex)
        psi0[0] = 1.0
        want = vecs @ (np.exp(-1j * w * t) * (vecs.conj().T @ psi0))
        got = evolve_ct(vertex_state(sub, 0), build_hamiltonian(sub, gamma), t)
        assert np.abs(got.amplitudes - want).max() < 1e-8

    check()


def test_05_full_coin_decoherence_gives_classical_walk():
    # exact channel: T=20, total coin measurement -> binomial law
    sub = make_line(41)
    rho0 = density_from_state(
        initial_state(sub, InitialCoinSpec(b=0.5, beta=math.pi / 2, start_vertex=20))
    )
    noise = NoiseModel(kind=NoiseKind.COIN_MEASURE, strength=1.0)
    rho = evolve_density(rho0, H, sub, noise, 20)
    d = relabel(position_distribution(rho), displacement_labels(41, 20))
    assert total_variation(d, classical_binomial(20)) < 1e-8

    # stochastic unravelling: 10^4 runs, T=100, spread is diffusive
    sub = make_line(201)
    psi0 = initial_state(sub, InitialCoinSpec(b=0.5, beta=math.pi / 2, start_vertex=100))
    res = ensemble_average(psi0, H, sub, noise, n_steps=100, n_runs=10_000, master_seed=20260825)
    mean = relabel(res.mean_distribution, displacement_labels(201, 100))
    sigma = moments(mean).sigma
    assert abs(sigma - 10.0) <= 0.5


def test_06_static_phase_disorder_localizes():
    noise = NoiseModel(kind=NoiseKind.STATIC_PHASE, strength=math.pi, seed=7)
    results = {}
    for t in (100, 200):
        n = 2 * t + 1
        sub = make_line(n)
        psi0 = initial_state(sub, InitialCoinSpec(b=0.5, beta=math.pi / 2, start_vertex=t))
        results[t] = ensemble_average(psi0, H, sub, noise, n_steps=t, n_runs=120, master_seed=11)

    # spread saturates instead of doubling
    assert results[200].mean_sigma / results[100].mean_sigma < 1.2

    # and the walk stays concentrated compared to the clean evolution
    clean_ipr = inverse_participation_ratio(line_walk(200)[2])
    assert results[200].per_run_ipr.mean() > clean_ipr


def test_07_broken_links_slow_the_walk():
    t0 = time.perf_counter()
    t, reps, master = 1000, 100, 4242
    n = 2 * t + 1
    base = make_line(n)
    start = InitialCoinSpec(b=0.5, beta=math.pi / 2, start_vertex=t)
    clean = evolve(initial_state(base, start), H, base, t)
    clean_probs = clean.position_probabilities()

    mean_sigma = {}
    for p in (1.0, 0.9, 0.7):
        spec = PercolationSpec(mode=PercolationMode.BOND, p=p, seed=master)
        sigmas = np.empty(reps)
        for i in range(reps):
            sub = percolate(base, spec, rep=i)
            state = evolve(initial_state(sub, start), H, sub, t)
            probs = state.position_probabilities()
            if p == 1.0:
                assert sub == base
                assert np.array_equal(probs, clean_probs)
            d = relabel(position_distribution(state), displacement_labels(n, t))
            sigmas[i] = moments(d).sigma
        mean_sigma[p] = sigmas.mean()

    assert mean_sigma[1.0] > mean_sigma[0.9] > mean_sigma[0.7]
    assert time.perf_counter() - t0 < 600.0


def test_08_many_walker_machinery():
    # one walker in the joint arena is just the single walker
    sub = make_line(9)
    single = evolve(initial_state(sub, InitialCoinSpec(start_vertex=4)), H, sub, 6)
    multi = multi_evolve_dt(
        multi_initial_state(sub, MultiWalkKind.DISCRETE_COINED, [InitialCoinSpec(start_vertex=4)]),
        H,
        sub,
        InteractionSpec(),
        6,
    )
    assert np.abs(multi.amplitudes.reshape(2, 9) - single.amplitudes).max() < 1e-12

    # two distinguishable non-interacting walkers factorize
    sub = make_line(7)
    specs = [InitialCoinSpec(b=0.3, beta=0.4, start_vertex=2), InitialCoinSpec(b=0.8, beta=2.0, start_vertex=4)]
    joint = multi_evolve_dt(
        multi_initial_state(sub, MultiWalkKind.DISCRETE_COINED, specs),
        H,
        sub,
        InteractionSpec(),
        4,
    )
    singles = [evolve(initial_state(sub, s), H, sub, 4).amplitudes.reshape(-1) for s in specs]
    want = np.multiply.outer(singles[0], singles[1])
    assert np.abs(joint.amplitudes - want).max() < 1e-10

    # interacting pair on one edge vs the three-level oracle
    g2 = from_adjacency([(0, 1)], 2)
    u, gamma, t = 3.0, 1.0, 0.7
    out = multi_evolve_ct(
        multi_initial_state(g2, MultiWalkKind.CONTINUOUS, [0, 0], statistics="boson"),
        g2,
        gamma,
        InteractionSpec(kind=InteractionKind.HUBBARD, u=u),
        t,
    )
    h3 = np.array(
        [
            [u, math.sqrt(2) * gamma, 0],
            [math.sqrt(2) * gamma, 0, math.sqrt(2) * gamma],
            [0, math.sqrt(2) * gamma, u],
        ]
    )
    v = scipy.linalg.expm(-1j * t * h3) @ np.array([1, 0, 0], dtype=complex)
    a = out.amplitudes
    got = np.array([a[0, 0], (a[0, 1] + a[1, 0]) / math.sqrt(2), a[1, 1]])
    assert np.abs(got - v).max() < 1e-8

    # configuration-space bookkeeping at the memory cliff
    assert dimension_guard(10, 12, budget_amplitudes=2**40) == 10**12
    with pytest.raises(ResourceLimitError):
        dimension_guard(10, 13, budget_amplitudes=2**40)


def test_09_weak_simulation_and_bitwise_reproducibility(tmp_path):
    _, _, dist = line_walk(100)
    drawn = sample(dist, 100_000, seed=31337)
    values, counts = np.unique(drawn.outcomes, return_counts=True)
    emp = np.zeros_like(dist.probabilities)
    emp[np.searchsorted(dist.labels, values)] = counts / counts.sum()
    tv = 0.5 * np.abs(emp - dist.probabilities).sum()
    assert tv < 0.02

    config = parse_config_text(
        """
        [walk]
        kind = "discrete"

        [noise]
        kind = "fast_phase"
        strength = 0.3
        seed = 5

        [run]
        steps = 60
        runs = 16
        seed = 99
        outputs = ["distribution", "moments", "ipr", "samples"]
        samples = 2000
        """
    )
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run(config, out_a)
    run(config, out_b)
    for name in ("distribution.csv", "metrics.json", "samples.csv", "samples.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name
    # manifests agree except for timestamps and wall clocks
    ma = json.loads((out_a / "manifest.json").read_text())
    mb = json.loads((out_b / "manifest.json").read_text())
    for m in (ma, mb):
        m.pop("created_utc"), m.pop("wall_clock_seconds")
        for entry in m["runs"]:
            entry.pop("wall_clock_seconds", None)
    assert ma == mb


def test_10_invariant_suite():
    # unitarity: adjoint step undoes a step, on an irregular graph
    g = from_adjacency([(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], 5)
    rng = np.random.default_rng(3)
    d = g.coin_dimension
    amp = rng.normal(size=(d, 5)) + 1j * rng.normal(size=(d, 5))
    amp /= np.linalg.norm(amp)
    from qwalklab.coined import WalkState
    from qwalklab.coins import grover_coin

    state = WalkState(substrate=g, coin_dim=d, amplitudes=amp, step_count=0)
    back = step_adjoint(step(state, grover_coin(d), g), grover_coin(d), g)
    assert np.abs(back.amplitudes - amp).max() < 1e-10

    # norm conservation over a long run
    sub = make_line(2001)
    state = evolve(initial_state(sub, InitialCoinSpec(start_vertex=1000)), H, sub, 1000)
    assert abs(state.norm() - 1.0) <= 1e-10

    # support bound: nothing beyond the light cone, exactly
    sub = make_line(301)
    probs = evolve(initial_state(sub, InitialCoinSpec(start_vertex=150)), H, sub, 100).position_probabilities()
    pos = np.arange(301) - 150
    assert probs[np.abs(pos) > 100].max() == 0.0

    # trace, Hermiticity, positivity through the open-system channel
    sub = make_line(21)
    rho = density_from_state(initial_state(sub, InitialCoinSpec(start_vertex=10)))
    rho = evolve_density(rho, H, sub, NoiseModel(kind=NoiseKind.FAST_PHASE, strength=0.7), 10)
    assert abs(rho.trace() - 1.0) <= 1e-10
    assert rho.hermiticity_defect() <= 1e-10
    flat = rho.matrix.reshape(rho.coin_dim * rho.n_vertices, -1)
    assert np.linalg.eigvalsh(flat).min() >= -1e-9

    # exchange statistics survive evolution
    sub = make_line(9)
    for stats in ("boson", "fermion"):
        specs = [InitialCoinSpec(b=0.2, start_vertex=2), InitialCoinSpec(b=0.9, start_vertex=6)]
        state = multi_evolve_dt(
            multi_initial_state(sub, MultiWalkKind.DISCRETE_COINED, specs, statistics=stats),
            H,
            sub,
            InteractionSpec(),
            50,
        )
        assert exchange_defect(state) < 1e-9
