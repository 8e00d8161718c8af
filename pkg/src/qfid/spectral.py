"""Noise-propagation operator and spectral complexity.

The raw dependency DAG is strictly triangular, so row-normalizing it
directly would give an all-zero spectrum.  We instead build a symmetric
deformation-weighted kernel with a lazy self-loop, normalize it into a
row-stochastic operator P, and read complexity off the dominant |eigenvalue|
mass.  Because P is similar to the symmetric S = D^-1/2 K D^-1/2, the whole
spectrum is real and lives in [-1, 1], with the Perron eigenvalue pinned
at 1.

Two eigensolver paths are exposed: a dense full decomposition (LAPACK
symmetric solver) for n <= 1024, and a deflated power iteration on S^2
with sign recovery for larger problems.  The iterative path is validated
against the dense one in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .dag import (
    EmptyGraph,
    GateDag,
    longest_dist_from_sources,
    longest_dist_to_sinks,
    longest_path_len,
)
from .deformation import DeformationReport

DENSE_LIMIT = 1024
_POWER_SEED = 0x5EED1E5  # fixed: the iterative path must be reproducible


class SpectralError(ValueError):
    pass


class ConvergenceFailure(SpectralError):
    """Power iteration hit its cap; carries whatever modes were resolved."""

    def __init__(self, message: str, partial: list[float]):
        self.partial = partial
        super().__init__(message)


@dataclass
class KernelConfig:
    self_loop: float = 0.5
    fanin_quantile: float = 0.9

    def __post_init__(self) -> None:
        if self.self_loop <= 0:
            raise SpectralError("self_loop weight must be > 0")
        if not 0.0 <= self.fanin_quantile <= 1.0:
            raise SpectralError("fanin_quantile must be in [0, 1]")


@dataclass
class WeightedKernel:
    """Symmetric nonnegative kernel K = (W + W^T)/2 + s*I over DAG nodes."""

    n: int
    matrix: np.ndarray | sp.csr_matrix
    self_loop: float

    @property
    def is_dense(self) -> bool:
        return isinstance(self.matrix, np.ndarray)

    def degrees(self) -> np.ndarray:
        if self.is_dense:
            return self.matrix.sum(axis=1)
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def total_weight(self) -> float:
        return float(self.matrix.sum())


@dataclass
class PropagationSpectrum:
    n: int
    k: int
    eigenvalues: list[float]
    complexity: float
    self_loop: float
    fanin_quantile: float
    method: str
    converged: bool = True


def _fanin_threshold(degrees: np.ndarray, quantile: float) -> float:
    """Degree value at the ceil(q*n)-th order statistic (1-indexed)."""
    ordered = np.sort(degrees)
    rank = max(1, math.ceil(quantile * len(ordered)))
    return float(ordered[rank - 1])


def build_kernel(
    gt: GateDag, report: DeformationReport, cfg: KernelConfig | None = None
) -> WeightedKernel:
    """Deformation-weighted kernel over the transpiled DAG.

    Parallel edges sum into one base weight.  Edges on at least one longest
    path get a (1 + max(0, delta_path)) multiplier; edges incident to a node
    whose total degree reaches the fan-in quantile get (1 + max(0,
    delta_conn)); multipliers compose.  The result is symmetrized and given
    a constant self-loop so every degree is strictly positive.
    """
    cfg = cfg or KernelConfig()
    n = gt.num_nodes
    if n == 0:
        raise EmptyGraph("cannot build a kernel over an empty DAG")

    index = gt.node_index()
    weights: dict[tuple[int, int], float] = {}
    for src, dst, _ in gt.edges:
        key = (index[src], index[dst])
        weights[key] = weights.get(key, 0.0) + 1.0

    path_mult = 1.0 + max(0.0, report.delta_path)
    conn_mult = 1.0 + max(0.0, report.delta_conn)

    if weights:
        dist_src = longest_dist_from_sources(gt)
        dist_sink = longest_dist_to_sinks(gt)
        longest = longest_path_len(gt)
        total_deg = gt.total_degrees()
        deg_arr = np.array([total_deg[node.id] for node in gt.nodes], dtype=float)
        threshold = _fanin_threshold(deg_arr, cfg.fanin_quantile)
        nodes = gt.nodes
        for (i, j) in list(weights):
            src_id, dst_id = nodes[i].id, nodes[j].id
            mult = 1.0
            if dist_src[src_id] + 1 + dist_sink[dst_id] == longest:
                mult *= path_mult
            if deg_arr[i] >= threshold or deg_arr[j] >= threshold:
                mult *= conn_mult
            weights[(i, j)] *= mult

    if n <= DENSE_LIMIT:
        w = np.zeros((n, n))
        for (i, j), val in weights.items():
            w[i, j] = val
        kernel = 0.5 * (w + w.T) + cfg.self_loop * np.eye(n)
        return WeightedKernel(n, kernel, cfg.self_loop)

    rows, cols, vals = [], [], []
    for (i, j), val in weights.items():
        rows += [i, j]
        cols += [j, i]
        vals += [0.5 * val, 0.5 * val]
    rows += list(range(n))
    cols += list(range(n))
    vals += [cfg.self_loop] * n
    kernel = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return WeightedKernel(n, kernel, cfg.self_loop)


def operator_rows(kernel: WeightedKernel) -> np.ndarray:
    """Dense row-stochastic operator P = D^-1 K (for inspection and tests)."""
    if not kernel.is_dense:
        raise SpectralError("operator_rows is only available for dense kernels")
    d = kernel.degrees()
    return kernel.matrix / d[:, None]


def _symmetric_similar(kernel: WeightedKernel):
    """S = D^-1/2 K D^-1/2, sharing P's spectrum but symmetric."""
    d = kernel.degrees()
    isq = 1.0 / np.sqrt(d)
    if kernel.is_dense:
        return kernel.matrix * np.outer(isq, isq)
    scale = sp.diags(isq)
    return (scale @ kernel.matrix @ scale).tocsr()


def _dense_top_k(kernel: WeightedKernel, k: int) -> list[float]:
    s = _symmetric_similar(kernel)
    if not kernel.is_dense:
        s = s.toarray()
    eigs = np.linalg.eigvalsh(s)
    ordered = sorted(eigs, key=lambda x: (-abs(x), -x))
    return [float(v) for v in ordered[:k]]


_BLOCK_BUFFER = 8  # oversampling columns beyond k; shields retained modes from boundary ties


def _iterative_top_k(
    kernel: WeightedKernel, k: int, tol: float, max_iter: int
) -> tuple[list[float], bool]:
    """Block power iteration on S^2 with Rayleigh-Ritz extraction on S.

    Squaring S orders the invariant subspace by |lambda| without +/-
    oscillation; the small projected eigenproblem then recovers signed
    values.  The block (k plus a buffer) keeps clustered or paired modes
    converging together, where one-vector deflation stalls.  Convergence is
    declared when every retained Ritz pair has residual ||S y - theta y||
    within tol (relative to the spectral scale).
    """
    n = kernel.n
    s = _symmetric_similar(kernel)
    dense = kernel.is_dense

    def matvec_block(x: np.ndarray) -> np.ndarray:
        return s @ x if dense else np.asarray(s @ x)

    width = min(n, k + _BLOCK_BUFFER)
    rng = np.random.default_rng(_POWER_SEED)
    q, _ = np.linalg.qr(rng.standard_normal((n, width)))

    values: list[float] = []
    for _ in range(max_iter):
        z = matvec_block(matvec_block(q))
        q_next, r = np.linalg.qr(z)
        # rank collapse: the dropped directions carry (numerically) zero
        # spectrum, so keep iterating with the smaller block
        keep = np.abs(np.diag(r)) > 1e-14
        if not keep.all():
            q_next = q_next[:, keep]
        if q_next.shape[1] == 0:
            values += [0.0] * (k - len(values))
            return values, True
        q = q_next
        sq = matvec_block(q)
        t = q.T @ sq
        t = 0.5 * (t + t.T)
        theta, vect = np.linalg.eigh(t)
        order = sorted(range(len(theta)), key=lambda i: (-abs(theta[i]), -theta[i]))
        retained = order[:k]
        values = [float(theta[i]) for i in retained]
        scale = max(1e-30, max(abs(v) for v in values))
        ritz = sq @ vect[:, retained] - (q @ vect[:, retained]) * theta[retained]
        residual = float(np.linalg.norm(ritz, axis=0).max())
        if residual <= tol * scale:
            values += [0.0] * (k - len(values))
            return values, True
    values += [0.0] * (k - len(values))
    return values, False


def top_eigenvalues(
    kernel: WeightedKernel,
    k: int,
    method: str = "auto",
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> list[float]:
    """Top-k eigenvalues of P by magnitude, descending; all real.

    method "auto" uses the dense solver up to n = 1024 and the deflated
    power iteration beyond.  Raises ConvergenceFailure (carrying partial
    results) if the iterative path stalls.
    """
    if k < 1:
        raise SpectralError(f"k must be >= 1, got {k}")
    k = min(k, kernel.n)
    if method == "auto":
        method = "dense" if kernel.n <= DENSE_LIMIT else "iterative"
    if method == "dense":
        return _dense_top_k(kernel, k)
    if method == "iterative":
        values, ok = _iterative_top_k(kernel, k, tol, max_iter)
        if not ok:
            raise ConvergenceFailure(
                f"power iteration exceeded {max_iter} iterations", values
            )
        return values
    raise SpectralError(f"method must be auto|dense|iterative, got {method!r}")


def spectral_complexity(eigenvalues: list[float], k: int) -> float:
    """Sum of |lambda_i| over the top min(k, len) modes."""
    if k < 1:
        raise SpectralError(f"k must be >= 1, got {k}")
    top = sorted((abs(v) for v in eigenvalues), reverse=True)[:k]
    return float(sum(top))


def default_mode_count(n: int) -> int:
    return min(10, n)


def analyze_spectrum(
    kernel: WeightedKernel,
    k: int | None = None,
    cfg: KernelConfig | None = None,
    method: str = "auto",
) -> PropagationSpectrum:
    """Convenience wrapper: eigenvalues + complexity, flagging non-convergence."""
    cfg = cfg or KernelConfig()
    k = default_mode_count(kernel.n) if k is None else min(k, kernel.n)
    converged = True
    used = method if method != "auto" else ("dense" if kernel.n <= DENSE_LIMIT else "iterative")
    try:
        eigs = top_eigenvalues(kernel, k, method=method)
    except ConvergenceFailure as exc:
        eigs = exc.partial
        converged = False
    return PropagationSpectrum(
        n=kernel.n,
        k=k,
        eigenvalues=eigs,
        complexity=spectral_complexity(eigs, k),
        self_loop=kernel.self_loop,
        fanin_quantile=cfg.fanin_quantile,
        method=used,
        converged=converged,
    )
