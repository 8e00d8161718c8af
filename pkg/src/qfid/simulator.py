"""Noiseless statevector and noisy density-matrix simulation, plus shot oracles.

Noise model: depolarizing after every gate (p1 on single-qubit gates, p2 on
the qubit set of wider gates) and a per-qubit readout confusion matrix at
measurement.  Distributions live over the classical-bit space; bitstrings
are written most-significant-clbit first, so clbit 0 is the rightmost
character and ``int(text, 2)`` is the distribution index.

Measurements are treated as terminal: the state is evolved through all
unitaries, then read out.  A gate acting on an already-measured qubit is
rejected, which keeps the deferred readout exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, Measure, gate_unitary

STATEVECTOR_MAX_QUBITS = 20
DENSITY_MAX_QUBITS = 12


class SimulationError(ValueError):
    pass


class TooManyQubits(SimulationError):
    pass


class MidCircuitMeasurement(SimulationError):
    """A gate touched a qubit after that qubit was measured."""


class ReplayExhausted(SimulationError):
    """A replay oracle ran out of recorded shots."""


@dataclass
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0
    p_ro: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p1 <= 1.0:
            raise SimulationError(f"p1 must be in [0,1], got {self.p1}")
        if not 0.0 <= self.p2 <= 1.0:
            raise SimulationError(f"p2 must be in [0,1], got {self.p2}")
        if not 0.0 <= self.p_ro <= 0.5:
            raise SimulationError(f"p_ro must be in [0,0.5], got {self.p_ro}")

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0 and self.p_ro == 0.0


@dataclass
class OutcomeDistribution:
    """Dense probability vector over 2^num_bits readout strings."""

    num_bits: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (2**self.num_bits,):
            raise SimulationError(
                f"expected {2**self.num_bits} entries, got {self.probs.shape}"
            )
        if np.any(self.probs < -1e-10):
            raise SimulationError("negative probability entry")
        total = float(self.probs.sum())
        if abs(total - 1.0) > 1e-8:
            raise SimulationError(f"probabilities sum to {total}, not 1")
        self.probs = np.clip(self.probs, 0.0, None)

    def bitstring(self, index: int) -> str:
        return format(index, f"0{self.num_bits}b") if self.num_bits else ""

    def prob_of(self, bitstring: str) -> float:
        return float(self.probs[int(bitstring, 2)]) if bitstring else 1.0

    def top_outcomes(self, count: int = 8) -> list[tuple[str, float]]:
        order = np.argsort(-self.probs)[:count]
        return [(self.bitstring(int(i)), float(self.probs[i])) for i in order]


# -- state evolution -------------------------------------------------------


def _apply_to_statevector(psi: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply a gate unitary in place of the axes owned by its qubits.

    The state is reshaped to (2,)*n with axis j owning qubit n-1-j, matching
    index bit q = (x >> q) & 1.
    """
    u = gate_unitary(gate)
    qk = len(gate.qubits)
    tensor = psi.reshape((2,) * n)
    # gate-local bit j <-> gate.qubits[j]; local axis for bit j is qk-1-j
    axes = [n - 1 - q for q in reversed(gate.qubits)]
    u_t = u.reshape((2,) * (2 * qk))
    moved = np.moveaxis(tensor, axes, range(qk))
    out = np.tensordot(u_t, moved, axes=(list(range(qk, 2 * qk)), list(range(qk))))
    return np.moveaxis(out, range(qk), axes).reshape(-1)


def _readout_plan(c: Circuit) -> list[tuple[int, int]]:
    """Ordered (qubit, clbit) pairs; defaults to measuring every qubit.

    Also validates that no gate touches a qubit after it was measured and
    that no clbit is written twice.
    """
    measured: set[int] = set()
    written: set[int] = set()
    plan: list[tuple[int, int]] = []
    for op in c.ops:
        if isinstance(op, Measure):
            if op.clbit in written:
                raise SimulationError(f"clbit {op.clbit} measured twice")
            measured.add(op.qubit)
            written.add(op.clbit)
            plan.append((op.qubit, op.clbit))
        elif isinstance(op, Gate):
            for q in op.qubits:
                if q in measured:
                    raise MidCircuitMeasurement(
                        f"gate {op.kind!r} acts on qubit {q} after measurement"
                    )
    if not plan:
        plan = [(q, q) for q in range(c.num_qubits)]
    return plan


def _qubit_probs_to_outcome(
    qprobs: np.ndarray, plan: list[tuple[int, int]], num_clbits: int
) -> OutcomeDistribution:
    """Marginalize the qubit-space diagonal onto the clbit space."""
    n = int(np.log2(len(qprobs)))
    m = num_clbits
    out = np.zeros(2**m)
    indices = np.arange(len(qprobs))
    cl_index = np.zeros(len(qprobs), dtype=np.int64)
    for qubit, clbit in plan:
        cl_index |= ((indices >> qubit) & 1) << clbit
    np.add.at(out, cl_index, qprobs)
    return OutcomeDistribution(m, out)


def ideal_distribution(c: Circuit) -> OutcomeDistribution:
    """Noiseless outcome distribution via statevector simulation."""
    n = c.num_qubits
    if n > STATEVECTOR_MAX_QUBITS:
        raise TooManyQubits(f"{n} qubits exceeds statevector cap {STATEVECTOR_MAX_QUBITS}")
    plan = _readout_plan(c)
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    for op in c.ops:
        if isinstance(op, Gate):
            psi = _apply_to_statevector(psi, op, n)
    qprobs = np.abs(psi) ** 2
    num_clbits = c.num_clbits if c.measures else c.num_qubits
    return _qubit_probs_to_outcome(qprobs, plan, num_clbits)


def _apply_to_density(rho: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """rho -> U rho U† using the statevector kernel on both sides."""
    u = gate_unitary(gate)
    qk = len(gate.qubits)
    axes = [n - 1 - q for q in reversed(gate.qubits)]
    u_t = u.reshape((2,) * (2 * qk))
    tensor = rho.reshape((2,) * (2 * n))

    ket_axes = axes
    moved = np.moveaxis(tensor, ket_axes, range(qk))
    out = np.tensordot(u_t, moved, axes=(list(range(qk, 2 * qk)), list(range(qk))))
    tensor = np.moveaxis(out, range(qk), ket_axes)

    bra_axes = [n + a for a in axes]
    moved = np.moveaxis(tensor, bra_axes, range(qk))
    out = np.tensordot(u_t.conj(), moved, axes=(list(range(qk, 2 * qk)), list(range(qk))))
    tensor = np.moveaxis(out, range(qk), bra_axes)
    return tensor.reshape(2**n, 2**n)


def _depolarize(rho: np.ndarray, qubits: tuple[int, ...], p: float, n: int) -> np.ndarray:
    """rho -> (1-p) rho + p * (Tr_Q rho) (x) I/2^|Q| at the positions of Q."""
    if p == 0.0:
        return rho
    qk = len(qubits)
    axes = [n - 1 - q for q in qubits]
    tensor = rho.reshape((2,) * (2 * n))
    traced = tensor
    # trace ket/bra axis pairs, highest axis first to keep indices valid
    for a in sorted(axes, reverse=True):
        traced = np.trace(traced, axis1=a, axis2=a + (traced.ndim // 2))
    eye = np.eye(2**qk, dtype=complex).reshape((2,) * (2 * qk)) / (2**qk)
    mixed = np.tensordot(eye, traced, axes=0)
    # tensordot puts the identity axes first: [ket_Q, bra_Q, ket_rest, bra_rest]
    rest = [a for a in range(n) if a not in axes]
    src = list(range(2 * qk + 2 * (n - qk)))
    dest_ket = axes + rest
    dest = (
        [dest_ket[i] for i in range(qk)]
        + [n + dest_ket[i] for i in range(qk)]
        + [dest_ket[qk + i] for i in range(n - qk)]
        + [n + dest_ket[qk + i] for i in range(n - qk)]
    )
    mixed = np.moveaxis(mixed, src, dest).reshape(2**n, 2**n)
    return (1.0 - p) * rho + p * mixed


def _apply_readout_flips(qprobs: np.ndarray, qubits: list[int], p_ro: float) -> np.ndarray:
    if p_ro == 0.0:
        return qprobs
    probs = qprobs
    idx = np.arange(len(probs))
    for q in qubits:
        flipped = probs[idx ^ (1 << q)]
        probs = (1.0 - p_ro) * probs + p_ro * flipped
    return probs


def noisy_distribution(c: Circuit, nm: NoiseModel) -> OutcomeDistribution:
    """Exact outcome distribution under depolarizing + readout noise."""
    n = c.num_qubits
    if n > DENSITY_MAX_QUBITS:
        raise TooManyQubits(f"{n} qubits exceeds density-matrix cap {DENSITY_MAX_QUBITS}")
    plan = _readout_plan(c)
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1.0
    for op in c.ops:
        if not isinstance(op, Gate):
            continue
        rho = _apply_to_density(rho, op, n)
        p = nm.p1 if len(op.qubits) == 1 else nm.p2
        rho = _depolarize(rho, op.qubits, p, n)
    qprobs = np.real(np.diag(rho)).copy()
    qprobs = _apply_readout_flips(qprobs, [q for q, _ in plan], nm.p_ro)
    num_clbits = c.num_clbits if c.measures else c.num_qubits
    return _qubit_probs_to_outcome(qprobs, plan, num_clbits)


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Full 2^n unitary of the circuit's gates (measures/barriers skipped)."""
    n = c.num_qubits
    if n > 10:
        raise TooManyQubits(f"{n} qubits is too large for a dense unitary")
    u = np.eye(2**n, dtype=complex)
    for op in c.ops:
        if isinstance(op, Gate):
            u = np.column_stack(
                [_apply_to_statevector(u[:, j].copy(), op, n) for j in range(2**n)]
            )
    return u


# -- shot oracles ------------------------------------------------------------


class DistributionOracle:
    """Samples i.i.d. bitstrings from a fixed distribution via inverse CDF.

    Owns its RNG stream: the same seed and call sequence always reproduce
    the same shots.  Not safe for concurrent use of one instance.
    """

    def __init__(self, dist: OutcomeDistribution, seed: int):
        self.distribution = dist
        self.num_bits = dist.num_bits
        self._cdf = np.cumsum(dist.probs)
        self._cdf[-1] = 1.0
        self._rng = np.random.default_rng(seed)

    def sample(self, batch_size: int) -> list[str]:
        if batch_size < 1:
            raise SimulationError(f"batch_size must be >= 1, got {batch_size}")
        u = self._rng.random(batch_size)
        idx = np.searchsorted(self._cdf, u, side="right")
        width = self.num_bits
        return [format(int(i), f"0{width}b") if width else "" for i in idx]


class ReplayOracle:
    """Replays shots recorded in a counts file, in a seed-shuffled order."""

    def __init__(self, num_bits: int, counts: dict[str, int], seed: int = 0):
        self.num_bits = num_bits
        shots: list[str] = []
        for bits, count in sorted(counts.items()):
            if len(bits) != num_bits or set(bits) - {"0", "1"}:
                raise SimulationError(f"bad bitstring {bits!r} for {num_bits} bits")
            shots.extend([bits] * int(count))
        rng = np.random.default_rng(seed)
        rng.shuffle(shots)
        self._shots = shots
        self._pos = 0

    def sample(self, batch_size: int) -> list[str]:
        if self._pos + batch_size > len(self._shots):
            raise ReplayExhausted(
                f"requested {batch_size} shots with {len(self._shots) - self._pos} remaining"
            )
        batch = self._shots[self._pos : self._pos + batch_size]
        self._pos += batch_size
        return batch


def make_oracle(c: Circuit, nm: NoiseModel, seed: int) -> DistributionOracle:
    """Shot oracle over the exact noisy distribution of the circuit."""
    return DistributionOracle(noisy_distribution(c, nm), seed)


def make_ideal_oracle(c: Circuit, seed: int) -> DistributionOracle:
    return DistributionOracle(ideal_distribution(c), seed)


def counts_from_shots(shots: list[str]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for s in shots:
        counts[s] = counts.get(s, 0) + 1
    return counts


def empirical_distribution(num_bits: int, counts: dict[str, int]) -> OutcomeDistribution:
    total = sum(counts.values())
    if total <= 0:
        raise SimulationError("cannot form a distribution from zero shots")
    probs = np.zeros(2**num_bits)
    for bits, count in counts.items():
        probs[int(bits, 2)] = count / total
    return OutcomeDistribution(num_bits, probs)


def write_counts_file(path: str, num_bits: int, counts: dict[str, int]) -> None:
    payload = {"n": num_bits, "counts": {k: counts[k] for k in sorted(counts)}}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_counts_file(path: str) -> tuple[int, dict[str, int]]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        return int(data["n"]), {str(k): int(v) for k, v in data["counts"].items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise SimulationError(f"bad counts file: {exc}") from None
