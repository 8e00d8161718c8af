"""Simulator: statevector vs kron oracle, noise channels, oracles."""

import numpy as np
import pytest

from qfid.bench import BenchSpec, generate, random_circuit
from qfid.circuit import Circuit, Gate, gate_unitary
from qfid.simulator import (
    MidCircuitMeasurement,
    NoiseModel,
    OutcomeDistribution,
    ReplayExhausted,
    ReplayOracle,
    SimulationError,
    TooManyQubits,
    counts_from_shots,
    empirical_distribution,
    ideal_distribution,
    make_ideal_oracle,
    make_oracle,
    noisy_distribution,
    read_counts_file,
    write_counts_file,
)


def kron_unitary(gate: Gate, n: int) -> np.ndarray:
    """Oracle: embed a gate unitary into the full space index by index."""
    u = gate_unitary(gate)
    dim = 2**n
    full = np.zeros((dim, dim), dtype=complex)
    rest = [q for q in range(n) if q not in gate.qubits]
    for col in range(dim):
        local_in = sum(((col >> q) & 1) << j for j, q in enumerate(gate.qubits))
        for local_out in range(u.shape[0]):
            amp = u[local_out, local_in]
            if amp == 0:
                continue
            row = 0
            for j, q in enumerate(gate.qubits):
                row |= ((local_out >> j) & 1) << q
            for q in rest:
                row |= ((col >> q) & 1) << q
            full[row, col] += amp
    return full


def statevector_oracle(c: Circuit) -> np.ndarray:
    psi = np.zeros(2**c.num_qubits, dtype=complex)
    psi[0] = 1.0
    for op in c.ops:
        if isinstance(op, Gate):
            psi = kron_unitary(op, c.num_qubits) @ psi
    return psi


def test_statevector_matches_kron_oracle():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        nq = int(rng.integers(1, 5))
        c = random_circuit(nq, int(rng.integers(1, 20)), seed)
        expected = np.abs(statevector_oracle(c)) ** 2
        got = ideal_distribution(c).probs
        assert np.allclose(got, expected, atol=1e-12), seed


def test_h_then_measure():
    c = Circuit(1, 1)
    c.add("h", (0,))
    c.measure(0, 0)
    d = ideal_distribution(c)
    assert np.allclose(d.probs, [0.5, 0.5], atol=1e-12)


def test_ghz3_distribution():
    d = ideal_distribution(generate(BenchSpec.make("ghz", 3)))
    assert d.prob_of("000") == pytest.approx(0.5, abs=1e-12)
    assert d.prob_of("111") == pytest.approx(0.5, abs=1e-12)


def test_x_point_mass():
    c = Circuit(1, 1)
    c.add("x", (0,))
    c.measure(0, 0)
    assert ideal_distribution(c).prob_of("1") == pytest.approx(1.0, abs=1e-12)


def test_readout_order_follows_measure_map():
    # qubit 0 -> clbit 1, qubit 1 -> clbit 0; X on qubit 0 gives text "10"
    c = Circuit(2, 2)
    c.add("x", (0,))
    c.measure(0, 1)
    c.measure(1, 0)
    d = ideal_distribution(c)
    assert d.prob_of("10") == pytest.approx(1.0)


def test_partial_readout_marginalizes():
    c = Circuit(2, 1)
    c.add("h", (0,))
    c.add("x", (1,))
    c.measure(0, 0)  # qubit 1 unmeasured and traced out
    d = ideal_distribution(c)
    assert d.num_bits == 1
    assert np.allclose(d.probs, [0.5, 0.5], atol=1e-12)


def test_qubit_cap():
    with pytest.raises(TooManyQubits):
        ideal_distribution(Circuit(21))
    with pytest.raises(TooManyQubits):
        noisy_distribution(Circuit(13), NoiseModel())


def test_gate_after_measure_rejected():
    c = Circuit(1, 1)
    c.measure(0, 0)
    c.add("x", (0,))
    with pytest.raises(MidCircuitMeasurement):
        ideal_distribution(c)


def test_noise_model_validation():
    with pytest.raises(SimulationError):
        NoiseModel(p1=1.5)
    with pytest.raises(SimulationError):
        NoiseModel(p_ro=0.7)


def test_noiseless_density_matches_statevector():
    from qfid.bench import default_suite

    specs = [s for s in default_suite() if generate(s).num_qubits <= 8]
    for spec in specs:
        c = generate(spec)
        ideal = ideal_distribution(c)
        noisy = noisy_distribution(c, NoiseModel())
        assert np.abs(ideal.probs - noisy.probs).max() < 1e-10, spec.label()


def test_full_depolarization_gives_uniform():
    c = Circuit(1, 1)
    c.add("x", (0,))
    c.measure(0, 0)
    d = noisy_distribution(c, NoiseModel(p1=1.0))
    assert np.allclose(d.probs, [0.5, 0.5], atol=1e-12)


def test_two_qubit_depolarization():
    c = Circuit(2, 2)
    c.add("cx", (0, 1))
    c.measure(0, 0)
    c.measure(1, 1)
    d = noisy_distribution(c, NoiseModel(p2=1.0))
    assert np.allclose(d.probs, [0.25] * 4, atol=1e-12)


def test_readout_confusion_row():
    c = Circuit(1, 1)
    c.measure(0, 0)
    d = noisy_distribution(c, NoiseModel(p_ro=0.1))
    assert np.allclose(d.probs, [0.9, 0.1], atol=1e-12)


def test_depolarizing_blends_toward_uniform():
    c = Circuit(1, 1)
    c.add("x", (0,))
    c.measure(0, 0)
    d = noisy_distribution(c, NoiseModel(p1=0.2))
    assert np.allclose(d.probs, [0.1, 0.9], atol=1e-12)


def test_hellinger_from_uniform_monotone_in_p1():
    from qfid.estimator import hellinger_distance

    c = Circuit(1, 1)
    c.add("x", (0,))
    c.measure(0, 0)
    uniform = OutcomeDistribution(1, np.array([0.5, 0.5]))
    last = None
    for p1 in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        h = hellinger_distance(noisy_distribution(c, NoiseModel(p1=p1)), uniform)
        if last is not None:
            assert h <= last + 1e-12
        last = h


def test_density_trace_preserved_gate_by_gate():
    c = generate(BenchSpec.make("qft", 4))
    from qfid.simulator import _apply_to_density, _depolarize

    nm = NoiseModel(p1=1e-3, p2=1e-2)
    n = c.num_qubits
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1.0
    for op in c.gates:
        rho = _apply_to_density(rho, op, n)
        rho = _depolarize(rho, op.qubits, nm.p1 if len(op.qubits) == 1 else nm.p2, n)
        trace = np.trace(rho)
        assert abs(trace - 1.0) < 1e-10
        assert np.abs(rho - rho.conj().T).max() < 1e-10
        assert np.real(np.diag(rho)).min() > -1e-12


def test_oracle_determinism():
    c = generate(BenchSpec.make("ghz", 3))
    nm = NoiseModel(p1=1e-3, p2=1e-2, p_ro=1e-2)
    a = make_oracle(c, nm, seed=11)
    b = make_oracle(c, nm, seed=11)
    assert a.sample(50) == b.sample(50)
    assert a.sample(10) == b.sample(10)  # streams stay aligned call by call


def test_oracle_frequencies_match_distribution():
    c = generate(BenchSpec.make("ghz", 3))
    oracle = make_ideal_oracle(c, seed=5)
    shots = oracle.sample(1_000_000)
    counts = counts_from_shots(shots)
    # binomial at p = 0.5, n = 1e6: sd = 5e-4, so 0.002 is a 4-sigma bound
    assert abs(counts["000"] / 1_000_000 - 0.5) < 0.002
    assert abs(counts["111"] / 1_000_000 - 0.5) < 0.002


def test_million_shot_empirical_close_to_exact():
    from qfid.estimator import hellinger_distance

    c = generate(BenchSpec.make("ghz", 4))
    exact = ideal_distribution(c)
    oracle = make_ideal_oracle(c, seed=17)
    empirical = empirical_distribution(4, counts_from_shots(oracle.sample(1_000_000)))
    assert hellinger_distance(empirical, exact) <= 0.01


def test_replay_oracle_roundtrip(tmp_path):
    path = tmp_path / "counts.json"
    write_counts_file(str(path), 2, {"00": 60, "11": 40})
    bits, counts = read_counts_file(str(path))
    oracle = ReplayOracle(bits, counts, seed=3)
    drawn = oracle.sample(100)
    assert sorted(counts_from_shots(drawn).items()) == [("00", 60), ("11", 40)]
    with pytest.raises(ReplayExhausted):
        oracle.sample(1)


def test_empirical_distribution():
    d = empirical_distribution(2, {"00": 3, "11": 1})
    assert d.probs[0] == pytest.approx(0.75)
    assert d.probs[3] == pytest.approx(0.25)


def test_outcome_distribution_validation():
    with pytest.raises(SimulationError):
        OutcomeDistribution(1, np.array([0.7, 0.7]))
    with pytest.raises(SimulationError):
        OutcomeDistribution(2, np.array([1.0, 0.0]))
