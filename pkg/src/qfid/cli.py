"""Command-line surface: analyze | estimate | sweep | reference.

Exit codes: 0 success, 1 parse error, 2 transpile/layout error, 3 numeric
(graph/spectral) error, 4 oracle or estimation error.
"""

from __future__ import annotations

import argparse
import sys

from .bench import BenchSpec, InvalidSpec, default_suite, generate
from .circuit import CircuitError
from .dag import DagError, build_dag, to_dot
from .deformation import DeformationError
from .estimator import EstimationError, PlanConfig
from .qasm import QasmError, parse_qasm
from .report import (
    SWEEP_COLUMNS,
    analyze_circuit,
    csv_row,
    run_estimate,
    sweep_csv,
    to_json,
)
from .simulator import (
    DistributionOracle,
    NoiseModel,
    SimulationError,
    counts_from_shots,
    ideal_distribution,
    noisy_distribution,
    write_counts_file,
)
from .spectral import KernelConfig, SpectralError
from .transpile import (
    CouplingMap,
    TranspileError,
    coupling_from_json,
    grid_map,
    heavy_hex_27,
    linear_map,
    ring_map,
)

EXIT_PARSE = 1
EXIT_TRANSPILE = 2
EXIT_NUMERIC = 3
EXIT_ORACLE = 4


class CliError(ValueError):
    def __init__(self, message: str, code: int = EXIT_NUMERIC):
        self.code = code
        super().__init__(message)


def parse_bench(text: str) -> BenchSpec:
    """family:n[:seed][:key=value ...] e.g. ghz:4, xeb:6:3:depth=4."""
    parts = text.split(":")
    if len(parts) < 2:
        raise CliError(f"bench spec needs family:n, got {text!r}", EXIT_PARSE)
    family = parts[0]
    try:
        n = int(parts[1])
    except ValueError:
        raise CliError(f"bench qubit count must be an integer, got {parts[1]!r}", EXIT_PARSE) from None
    seed = 0
    extras = {}
    for token in parts[2:]:
        if "=" in token:
            key, _, raw = token.partition("=")
            if key == "secret":  # textual: leading zeros are significant
                extras[key] = raw
                continue
            try:
                value: object = int(raw)
            except ValueError:
                try:
                    value = float(raw)
                except ValueError:
                    value = raw
            extras[key] = value
        else:
            try:
                seed = int(token)
            except ValueError:
                raise CliError(f"bad bench token {token!r}", EXIT_PARSE) from None
    try:
        return BenchSpec.make(family, n, seed, **extras)
    except InvalidSpec as exc:
        raise CliError(str(exc), EXIT_PARSE) from None


def parse_noise(text: str) -> NoiseModel:
    """p1=1e-3,p2=1e-2,ro=1e-2 (any subset)."""
    values = {"p1": 0.0, "p2": 0.0, "ro": 0.0}
    if text:
        for chunk in text.split(","):
            key, _, raw = chunk.partition("=")
            key = key.strip()
            if key not in values or not raw:
                raise CliError(f"bad noise component {chunk!r}", EXIT_PARSE)
            try:
                values[key] = float(raw)
            except ValueError:
                raise CliError(f"bad noise value {chunk!r}", EXIT_PARSE) from None
    try:
        return NoiseModel(values["p1"], values["p2"], values["ro"])
    except SimulationError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None


def parse_coupling(text: str, num_qubits: int) -> CouplingMap:
    """linear | ring | grid:RxC | heavyhex27 | @file.json; sized to fit."""
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            return coupling_from_json(fh.read())
    if text == "linear":
        return linear_map(max(num_qubits, 2))
    if text == "ring":
        return ring_map(max(num_qubits, 2))
    if text == "heavyhex27":
        return heavy_hex_27()
    if text.startswith("grid:"):
        dims = text[5:].split("x")
        if len(dims) != 2:
            raise CliError(f"grid spec must be grid:RxC, got {text!r}", EXIT_PARSE)
        try:
            rows, cols = int(dims[0]), int(dims[1])
        except ValueError:
            raise CliError(f"grid spec must be grid:RxC, got {text!r}", EXIT_PARSE) from None
        return grid_map(rows, cols)
    raise CliError(f"unknown coupling {text!r}", EXIT_PARSE)


def _load_circuit(args) -> tuple:
    if bool(args.qasm) == bool(args.bench):
        raise CliError("exactly one of --qasm or --bench is required", EXIT_PARSE)
    if args.qasm:
        with open(args.qasm, "rb") as fh:
            circuit = parse_qasm(fh.read())
        source = {"kind": "qasm", "path": args.qasm}
    else:
        spec = parse_bench(args.bench)
        circuit = generate(spec)
        source = {"kind": "bench", "spec": spec.label(), "family": spec.family, "n": spec.n}
    return circuit, source


def _plan_config(args) -> PlanConfig:
    try:
        return PlanConfig(
            delta=args.delta,
            alpha=args.alpha,
            p_max=args.pmax,
            batch_min=args.batch_min,
            estimator=args.estimator,
        )
    except EstimationError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None


def _kernel_config(args) -> KernelConfig:
    try:
        return KernelConfig(self_loop=args.self_loop, fanin_quantile=args.fanin_quantile)
    except SpectralError as exc:
        raise CliError(str(exc), EXIT_PARSE) from None


def _write_output(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--qasm", help="path to an OpenQASM 2.0 file")
    p.add_argument("--bench", help="benchmark spec family:n[:seed][:key=value]")
    p.add_argument("--coupling", default="linear",
                   help="linear|ring|grid:RxC|heavyhex27|@file.json (default linear)")
    p.add_argument("--seed", type=int, default=0, help="transpile/oracle seed")
    p.add_argument("--k", type=int, default=None, help="spectral modes kept (default min(10, n))")
    p.add_argument("--self-loop", type=float, default=0.5, dest="self_loop")
    p.add_argument("--fanin-quantile", type=float, default=0.9, dest="fanin_quantile")
    p.add_argument("--delta", type=float, default=0.01, help="target CI half-width")
    p.add_argument("--alpha", type=float, default=0.05, help="two-sided significance level")
    p.add_argument("--pmax", type=int, default=10_000, help="shot cap")
    p.add_argument("--batch-min", type=int, default=20, dest="batch_min")
    p.add_argument("--estimator", choices=("success", "xeb"), default="success")
    p.add_argument("--noise", default="", help="p1=..,p2=..,ro=.. (default noiseless)")
    p.add_argument("--out", help="write output to this path instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json", dest="format",
                   help="report format for analyze/estimate (sweep is always CSV)")


def cmd_analyze(args) -> int:
    circuit, source = _load_circuit(args)
    coupling = parse_coupling(args.coupling, circuit.num_qubits)
    artifacts = analyze_circuit(
        circuit,
        coupling,
        source=source,
        seed=args.seed,
        kernel_cfg=_kernel_config(args),
        plan_cfg=_plan_config(args),
        k=args.k,
    )
    if args.dot:
        _write_output(to_dot(build_dag(circuit)), args.dot)
    if args.format == "csv":
        family = source.get("family", "")
        n = source.get("n", circuit.num_qubits)
        row = csv_row(family, n, args.seed, args.delta, artifacts.report)
        _write_output(SWEEP_COLUMNS + "\n" + row + "\n", args.out)
    else:
        _write_output(to_json(artifacts.report.to_dict()) + "\n", args.out)
    return 0


def cmd_estimate(args) -> int:
    circuit, source = _load_circuit(args)
    coupling = parse_coupling(args.coupling, circuit.num_qubits)
    record = run_estimate(
        circuit,
        coupling,
        parse_noise(args.noise),
        oracle_seed=args.seed,
        source=source,
        transpile_seed=args.seed,
        kernel_cfg=_kernel_config(args),
        plan_cfg=_plan_config(args),
        k=args.k,
        reference_shots=args.reference_shots,
    )
    if args.format == "csv":
        family = source.get("family", "")
        n = source.get("n", circuit.num_qubits)
        row = csv_row(family, n, args.seed, args.delta, record.analyze, record)
        _write_output(SWEEP_COLUMNS + "\n" + row + "\n", args.out)
    else:
        _write_output(to_json(record.to_dict()) + "\n", args.out)
    return 0


def _load_suite(text: str) -> list[BenchSpec]:
    if text == "default":
        return default_suite()
    if text == "default10":
        return default_suite(include_ten=True)
    if text.startswith("@"):
        import json

        with open(text[1:], encoding="utf-8") as fh:
            entries = json.load(fh)
        suite = []
        for entry in entries:
            extras = {
                k: v for k, v in entry.items() if k not in ("family", "n", "seed")
            }
            suite.append(
                BenchSpec.make(entry["family"], int(entry["n"]), int(entry.get("seed", 0)), **extras)
            )
        return suite
    raise CliError(f"suite must be default|default10|@file.json, got {text!r}", EXIT_PARSE)


def cmd_sweep(args) -> int:
    suite = _load_suite(args.suite)
    try:
        deltas = [float(x) for x in args.deltas.split(",") if x]
        seeds = [int(x) for x in args.seeds.split(",") if x]
    except ValueError as exc:
        raise CliError(f"bad sweep axis: {exc}", EXIT_PARSE) from None
    if not deltas or not seeds:
        raise CliError("sweep needs nonempty --deltas and --seeds", EXIT_PARSE)
    noise = parse_noise(args.noise)
    plan = _plan_config(args)

    def factory(width: int) -> CouplingMap:
        return parse_coupling(args.coupling, width)

    text = sweep_csv(
        suite, deltas, seeds, factory, noise,
        plan_cfg=plan, include_walltime=args.timing,
    )
    _write_output(text, args.out)
    return 0


def cmd_bench(args) -> int:
    """List the suite, or write its circuits as QASM files."""
    import os

    from .circuit import circuit_depth
    from .qasm import emit_qasm

    suite = _load_suite(args.suite)
    entries = []
    for spec in suite:
        circuit = generate(spec)
        entries.append(
            {
                "spec": spec.label(),
                "family": spec.family,
                "n": spec.n,
                "seed": spec.seed,
                "num_qubits": circuit.num_qubits,
                "num_clbits": circuit.num_clbits,
                "ops": len(circuit.ops),
                "depth": circuit_depth(circuit),
            }
        )
        if args.out_dir:
            os.makedirs(args.out_dir, exist_ok=True)
            name = spec.label().replace(":", "_").replace("=", "-") + ".qasm"
            with open(os.path.join(args.out_dir, name), "w", encoding="utf-8") as fh:
                fh.write(emit_qasm(circuit))
    _write_output(to_json(entries) + "\n", args.out)
    return 0


def cmd_reference(args) -> int:
    circuit, _ = _load_circuit(args)
    noise = parse_noise(args.noise)
    if noise.is_noiseless:
        dist = ideal_distribution(circuit)
    else:
        coupling = parse_coupling(args.coupling, circuit.num_qubits)
        from .transpile import transpile

        dist = noisy_distribution(transpile(circuit, coupling, args.seed).circuit_t, noise)
    oracle = DistributionOracle(dist, args.seed)
    counts = counts_from_shots(oracle.sample(args.shots))
    if args.out:
        write_counts_file(args.out, dist.num_bits, counts)
    else:
        payload = {"n": dist.num_bits, "counts": {k: counts[k] for k in sorted(counts)}}
        sys.stdout.write(to_json(payload) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfid",
        description="Adaptive shot budgeting for quantum-circuit fidelity estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="structural pipeline, no shots")
    _add_shared_flags(p_analyze)
    p_analyze.add_argument("--dot", help="also write the gate DAG in DOT format")
    p_analyze.set_defaults(func=cmd_analyze)

    p_estimate = sub.add_parser("estimate", help="run the adaptive estimation loop")
    _add_shared_flags(p_estimate)
    p_estimate.add_argument("--reference-shots", type=int, default=0, dest="reference_shots",
                            help="also compare against an n-shot empirical reference")
    p_estimate.set_defaults(func=cmd_estimate)

    p_sweep = sub.add_parser("sweep", help="suite x delta x seed CSV")
    _add_shared_flags(p_sweep)
    p_sweep.add_argument("--suite", default="default", help="default|default10|@file.json")
    p_sweep.add_argument("--deltas", default="0.01,0.02,0.03")
    p_sweep.add_argument("--seeds", default="1,2,3")
    p_sweep.add_argument("--timing", action="store_true",
                         help="fill walltime_ms (off by default to keep output byte-stable)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_ref = sub.add_parser("reference", help="write a counts file for the replay oracle")
    _add_shared_flags(p_ref)
    p_ref.add_argument("--shots", type=int, default=10_000)
    p_ref.set_defaults(func=cmd_reference)

    p_bench = sub.add_parser("bench", help="list the benchmark suite or export it as QASM")
    p_bench.add_argument("--suite", default="default", help="default|default10|@file.json")
    p_bench.add_argument("--out-dir", dest="out_dir", help="write one .qasm file per spec")
    p_bench.add_argument("--out", help="write the JSON listing to this path")
    p_bench.set_defaults(func=cmd_bench)

    return parser


_ERROR_CODES = (
    (QasmError, EXIT_PARSE),
    (CircuitError, EXIT_PARSE),
    (InvalidSpec, EXIT_PARSE),
    (TranspileError, EXIT_TRANSPILE),
    (DagError, EXIT_NUMERIC),
    (DeformationError, EXIT_NUMERIC),
    (SpectralError, EXIT_NUMERIC),
    (SimulationError, EXIT_ORACLE),
    (EstimationError, EXIT_ORACLE),
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except Exception as exc:  # noqa: BLE001 - map module errors to exit codes
        for klass, code in _ERROR_CODES:
            if isinstance(exc, klass):
                print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
