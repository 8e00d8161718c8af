"""Pipeline orchestration and report serialization.

``analyze_circuit`` runs the shot-free half of the pipeline (DAG,
transpile, deformation, spectrum, batch size); ``run_estimate`` adds the
adaptive sampling loop and bias accounting against the exact noisy
distribution.  Reports serialize to JSON/CSV with every float rendered at
17 significant digits so identical configurations produce byte-identical
files.

Bias fields recorded per run:

* ``fidelity_abs``  -- |F_hat - F_true|, the plain estimate deviation.
* ``fidelity_hellinger`` -- Hellinger distance between the per-shot value
  distributions (F_hat, 1-F_hat) and (F_true, 1-F_true); this is the
  headline bias number (CSV column ``bias_exact``).
* ``outcome_hellinger`` -- Hellinger distance between the raw empirical
  outcome histogram and the exact noisy distribution; diagnostic only,
  since it is dominated by the sampling floor at any finite shot count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .bench import BenchSpec, generate
from .circuit import Circuit, Gate, circuit_depth
from .dag import GateDag, build_dag
from .deformation import DeformationReport, compare
from .estimator import (
    EstimationTrace,
    PlanConfig,
    batch_size,
    bernoulli_hellinger,
    estimate,
    hellinger_distance,
    success_set,
    xeb_scale,
)
from .simulator import (
    DistributionOracle,
    NoiseModel,
    OutcomeDistribution,
    counts_from_shots,
    empirical_distribution,
    ideal_distribution,
    noisy_distribution,
)
from .spectral import KernelConfig, PropagationSpectrum, analyze_spectrum, build_kernel
from .transpile import CouplingMap, TranspileResult, transpile


def format_float(value: float) -> str:
    """Canonical float rendering: 17 significant digits, exact round-trip."""
    if value != value:
        return "NaN"
    if value in (math.inf, -math.inf):
        return "Infinity" if value > 0 else "-Infinity"
    text = format(value, ".17g")
    # normalize "1e+05" style exponents emitted by some libcs
    return text


def to_json(obj, indent: int = 0) -> str:
    """Deterministic JSON writer with 17-significant-digit floats."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        escaped = obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{escaped}"'
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(inner + to_json(v, indent + 1) for v in obj)
        return f"[\n{items}\n{pad}]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{inner}"{k}": {to_json(v, indent + 1)}' for k, v in obj.items()
        )
        return f"{{\n{items}\n{pad}}}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass
class AnalyzeReport:
    source: dict
    circuit: dict
    transpiled: dict
    deformation: DeformationReport
    spectrum: PropagationSpectrum
    plan: dict

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "circuit": self.circuit,
            "transpile": self.transpiled,
            "deformation": {
                "delta_deg": self.deformation.delta_deg,
                "delta_path": self.deformation.delta_path,
                "delta_conn": self.deformation.delta_conn,
                "path_degenerate": self.deformation.path_degenerate,
                "conn_degenerate": self.deformation.conn_degenerate,
                "raw": dict(self.deformation.raw),
            },
            "spectrum": {
                "n": self.spectrum.n,
                "k": self.spectrum.k,
                "eigenvalues": list(self.spectrum.eigenvalues),
                "complexity": self.spectrum.complexity,
                "self_loop": self.spectrum.self_loop,
                "fanin_quantile": self.spectrum.fanin_quantile,
                "method": self.spectrum.method,
                "converged": self.spectrum.converged,
            },
            "plan": self.plan,
        }


@dataclass
class RunRecord:
    analyze: AnalyzeReport
    trace: EstimationTrace
    bias: dict
    noise: dict
    oracle_seed: int
    wall_time_ms: float | None = None

    def to_dict(self, include_walltime: bool = True) -> dict:
        data = {
            **self.analyze.to_dict(),
            "noise": self.noise,
            "oracle_seed": self.oracle_seed,
            "estimate": {
                "batch_size": self.trace.batch_size,
                "estimator": self.trace.estimator,
                "shots_used": self.trace.shots_used,
                "stop_reason": self.trace.stop_reason,
                "fhat": self.trace.fhat,
                "sigma": self.trace.sigma,
                "ci": self.trace.ci,
                "num_batches": len(self.trace.batches),
                "batches": [
                    {
                        "index": b.index,
                        "size": b.size,
                        "batch_mean": b.batch_mean,
                        "cum_mean": b.cum_mean,
                        "cum_std": b.cum_std,
                        "ci": b.ci,
                        "total_shots": b.total_shots,
                    }
                    for b in self.trace.batches
                ],
            },
            "bias": self.bias,
        }
        if include_walltime and self.wall_time_ms is not None:
            data["wall_time_ms"] = self.wall_time_ms
        return data


@dataclass
class PipelineArtifacts:
    """Intermediate objects kept around for tests and the CLI."""

    circuit: Circuit
    transpile_result: TranspileResult
    dag_logical: GateDag
    dag_transpiled: GateDag
    kernel_spectrum: PropagationSpectrum
    batch: int
    report: AnalyzeReport


def _gate_counts(c: Circuit) -> dict:
    return {
        "ops": len(c.ops),
        "gates": len(c.gates),
        "measures": len(c.measures),
        "cx": sum(1 for op in c.ops if isinstance(op, Gate) and op.kind == "cx"),
    }


def analyze_circuit(
    circuit: Circuit,
    coupling: CouplingMap,
    source: dict | None = None,
    seed: int = 0,
    kernel_cfg: KernelConfig | None = None,
    plan_cfg: PlanConfig | None = None,
    k: int | None = None,
    spectral_method: str = "auto",
) -> PipelineArtifacts:
    """Shot-free pipeline: transpile, compare DAGs, spectrum, batch size."""
    kernel_cfg = kernel_cfg or KernelConfig()
    plan_cfg = plan_cfg or PlanConfig()
    depth0 = circuit_depth(circuit)
    tr = transpile(circuit, coupling, seed)
    g0 = build_dag(circuit)
    gt = build_dag(tr.circuit_t)
    deformation = compare(
        g0, gt, extra_raw={"depth_0": depth0, "depth_t": tr.depth_t}
    )
    kernel = build_kernel(gt, deformation, kernel_cfg)
    spectrum = analyze_spectrum(kernel, k, kernel_cfg, method=spectral_method)
    batch = batch_size(spectrum.complexity, tr.depth_t, plan_cfg)
    report = AnalyzeReport(
        source=source or {},
        circuit={
            "num_qubits": circuit.num_qubits,
            "num_clbits": circuit.num_clbits,
            "depth": depth0,
            **_gate_counts(circuit),
        },
        transpiled={
            "num_physical_qubits": coupling.num_physical_qubits,
            "depth": tr.depth_t,
            "swap_count": tr.swap_count,
            "initial_layout": list(tr.initial_layout),
            "final_layout": list(tr.final_layout),
            "seed": seed,
            **_gate_counts(tr.circuit_t),
        },
        deformation=deformation,
        spectrum=spectrum,
        plan={
            "batch_size": batch,
            "delta": plan_cfg.delta,
            "alpha": plan_cfg.alpha,
            "z_alpha": plan_cfg.z_alpha,
            "p_max": plan_cfg.p_max,
            "batch_min": plan_cfg.batch_min,
            "min_batches_before_stop": plan_cfg.min_batches_before_stop,
            "estimator": plan_cfg.estimator,
        },
    )
    return PipelineArtifacts(circuit, tr, g0, gt, spectrum, batch, report)


def _true_fidelity(
    estimator: str, ideal: OutcomeDistribution, noisy: OutcomeDistribution
) -> float:
    """The estimator's target value under the exact noisy distribution."""
    if estimator == "success":
        good = sorted(success_set(ideal))
        return float(noisy.probs[good].sum())
    a, b = xeb_scale(ideal)
    return float((a * ideal.probs + b) @ noisy.probs)


def run_estimate(
    circuit: Circuit,
    coupling: CouplingMap,
    noise: NoiseModel,
    oracle_seed: int,
    source: dict | None = None,
    transpile_seed: int = 0,
    kernel_cfg: KernelConfig | None = None,
    plan_cfg: PlanConfig | None = None,
    k: int | None = None,
    reference_shots: int = 0,
    collect_shots: bool = True,
) -> RunRecord:
    """Full pipeline: analyze, sample adaptively, record bias vs the oracle.

    The shot oracle runs over the transpiled circuit (noise acts on what
    the hardware would execute); the ideal distribution that defines shot
    values comes from the logical circuit.
    """
    plan_cfg = plan_cfg or PlanConfig()
    t_start = time.perf_counter()
    artifacts = analyze_circuit(
        circuit, coupling, source, transpile_seed, kernel_cfg, plan_cfg, k
    )
    ideal = ideal_distribution(circuit)
    noisy = noisy_distribution(artifacts.transpile_result.circuit_t, noise)
    oracle = _RecordingOracle(noisy, oracle_seed) if collect_shots else DistributionOracle(noisy, oracle_seed)
    trace = estimate(oracle, ideal, plan_cfg, artifacts.batch)

    f_true = _true_fidelity(plan_cfg.estimator, ideal, noisy)
    bias = {
        "f_true_exact": f_true,
        "fidelity_abs": abs(trace.fhat - f_true),
        "fidelity_hellinger": bernoulli_hellinger(trace.fhat, f_true),
    }
    if collect_shots:
        counts = counts_from_shots(oracle.shots)
        empirical = empirical_distribution(noisy.num_bits, counts)
        bias["outcome_hellinger"] = hellinger_distance(empirical, noisy)
        if reference_shots > 0:
            ref_oracle = DistributionOracle(noisy, oracle_seed + 1)
            ref_counts = counts_from_shots(ref_oracle.sample(reference_shots))
            ref_dist = empirical_distribution(noisy.num_bits, ref_counts)
            bias["outcome_hellinger_ref"] = hellinger_distance(empirical, ref_dist)
            bias["reference_shots"] = reference_shots

    wall_ms = (time.perf_counter() - t_start) * 1000.0
    return RunRecord(
        analyze=artifacts.report,
        trace=trace,
        bias=bias,
        noise={"p1": noise.p1, "p2": noise.p2, "ro": noise.p_ro},
        oracle_seed=oracle_seed,
        wall_time_ms=wall_ms,
    )


class _RecordingOracle(DistributionOracle):
    """Distribution oracle that keeps every drawn shot for bias accounting."""

    def __init__(self, dist: OutcomeDistribution, seed: int):
        super().__init__(dist, seed)
        self.shots: list[str] = []

    def sample(self, batch_size: int) -> list[str]:
        batch = super().sample(batch_size)
        self.shots.extend(batch)
        return batch


SWEEP_COLUMNS = (
    "family,n,seed,delta,depth0,deptht,ddeg,dpath,dconn,complexity,batch,"
    "shots_used,stop_reason,fhat,ci,bias_exact,walltime_ms"
)


def csv_row(
    family: str,
    n: int,
    seed: int,
    delta: float,
    analyze: AnalyzeReport,
    record: RunRecord | None = None,
    walltime: str = "",
) -> str:
    """One sweep-schema row; estimate columns stay empty for analyze-only."""
    d = analyze.deformation
    fields = [
        family,
        str(n),
        str(seed),
        format_float(delta),
        str(analyze.circuit["depth"]),
        str(analyze.transpiled["depth"]),
        format_float(d.delta_deg),
        format_float(d.delta_path),
        format_float(d.delta_conn),
        format_float(analyze.spectrum.complexity),
        str(analyze.plan["batch_size"]),
    ]
    if record is not None:
        fields += [
            str(record.trace.shots_used),
            record.trace.stop_reason,
            format_float(record.trace.fhat),
            format_float(record.trace.ci),
            format_float(record.bias["fidelity_hellinger"]),
        ]
    else:
        fields += ["", "", "", "", ""]
    fields.append(walltime)
    return ",".join(fields)


def sweep_rows(
    suite: list[BenchSpec],
    deltas: list[float],
    seeds: list[int],
    coupling_factory,
    noise: NoiseModel,
    plan_cfg: PlanConfig | None = None,
    include_walltime: bool = False,
) -> list[str]:
    """One CSV row per (spec, delta, seed), ordered deterministically.

    The same oracle seed is reused across deltas so a looser tolerance can
    only stop earlier on the identical shot stream.  Wall time is left
    blank unless requested, keeping default output byte-stable.
    """
    base_cfg = plan_cfg or PlanConfig()
    rows = []
    for spec in suite:
        for seed in seeds:
            circuit = None
            for delta in deltas:
                cfg = PlanConfig(
                    delta=delta,
                    alpha=base_cfg.alpha,
                    p_max=base_cfg.p_max,
                    batch_min=base_cfg.batch_min,
                    min_batches_before_stop=base_cfg.min_batches_before_stop,
                    estimator=base_cfg.estimator,
                )
                t0 = time.perf_counter()
                try:
                    if circuit is None:
                        run_spec = BenchSpec(spec.family, spec.n, seed, spec.extras)
                        circuit = generate(run_spec)
                    record = run_estimate(
                        circuit,
                        coupling_factory(circuit.num_qubits),
                        noise,
                        oracle_seed=seed,
                        plan_cfg=cfg,
                        collect_shots=False,
                    )
                except Exception as exc:  # noqa: BLE001 - partial rows keep the sweep alive
                    rows.append(
                        f"{spec.family},{spec.n},{seed},{format_float(delta)},"
                        f",,,,,,,,error:{type(exc).__name__},,,,"
                    )
                    continue
                wall = (
                    str(int((time.perf_counter() - t0) * 1000.0))
                    if include_walltime
                    else ""
                )
                rows.append(
                    csv_row(spec.family, spec.n, seed, delta, record.analyze, record, wall)
                )
    return rows


def sweep_csv(*args, **kwargs) -> str:
    return "\n".join([SWEEP_COLUMNS, *sweep_rows(*args, **kwargs)]) + "\n"
