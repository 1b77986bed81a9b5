"""Command-line front end.

Exit codes: 0 ok, 1 I/O error, 2 usage or parse error, 3 circuit validation
error, 4 noise-fit failure. ``QSIM_SEED`` replaces the default seed of 0;
an explicit ``--seed`` wins over both.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from . import algorithms, noise, qasm, verify
from .circuit import Circuit, execute
from .errors import DomainError, FitError, QsimError, UnsupportedExportError, ValidationError
from .report import CountsReport

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_INVALID, EXIT_FIT = 0, 1, 2, 3, 4

FORMATS = ("text", "json", "csv")


def _default_seed() -> int:
    raw = os.environ.get("QSIM_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise DomainError(f"QSIM_SEED must be an integer, got {raw!r}") from None


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {v}")
    return v


def _add_run_config(p: argparse.ArgumentParser, noise_flags: bool = True) -> None:
    p.add_argument("--shots", type=_positive_int, default=1024)
    p.add_argument("--seed", type=int, default=None, help="default 0, or $QSIM_SEED")
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")
    if noise_flags:
        p.add_argument("--depolarizing", type=_probability, default=0.0, help="per-gate, per-qubit Pauli error probability")
        p.add_argument("--readout", type=_probability, default=None, help="symmetric readout flip probability")
        p.add_argument("--readout-p01", type=_probability, default=None)
        p.add_argument("--readout-p10", type=_probability, default=None)


def _noise_from(args) -> Optional[noise.NoiseModel]:
    p01 = args.readout_p01 if args.readout_p01 is not None else (args.readout or 0.0)
    p10 = args.readout_p10 if args.readout_p10 is not None else (args.readout or 0.0)
    model = noise.NoiseModel(args.depolarizing, p01, p10)
    return None if model.is_zero() else model


def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _render(report: CountsReport, fmt: str) -> str:
    if fmt == "json":
        return report.to_json() + "\n"
    if fmt == "csv":
        return report.to_csv()
    return report.to_text()


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _execute_and_emit(circuit: Circuit, args) -> CountsReport:
    report = execute(circuit, args.shots, _seed(args), _noise_from(args))
    _emit(_render(report, args.format), args.output)
    return report


def cmd_run(args) -> int:
    try:
        with open(args.path, encoding="utf-8", newline="") as fh:
            source = fh.read()
    except OSError as exc:
        print(f"error: cannot open {args.path}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    try:
        circuit = qasm.parse(source)
    except qasm.ParseError as exc:
        print(f"{args.path}:{exc.position.line}:{exc.position.column}: parse error: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    _execute_and_emit(circuit, args)
    spec = algorithms.identify_constant_search(circuit)
    if spec is not None and spec.variant == algorithms.QASM_LITERAL:
        _literal_note(circuit, spec.key)
    return EXIT_OK


def _literal_note(circuit: Circuit, key: str) -> None:
    ideal = algorithms.key_probability(circuit, key)
    print(
        f"note: this is the qasm-literal key-search circuit; exact P({key})={ideal:.6g}, not 1. "
        "Its CNOT targets are in |+>, an X eigenstate, so no key information reaches "
        "the measured register. The algorithm variant (search --variant algorithm) gives certainty.",
        file=sys.stderr,
    )


def cmd_search(args) -> int:
    try:
        spec = algorithms.SearchSpec(args.n, args.key, args.variant)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    circuit = algorithms.build_constant_search(spec)
    if args.emit_qasm:
        with open(args.emit_qasm, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(qasm.dumps(circuit))
    report = _execute_and_emit(circuit, args)
    if spec.variant == algorithms.QASM_LITERAL:
        _literal_note(circuit, args.key)
    elif args.format == "text":
        ideal = algorithms.key_probability(circuit, args.key)
        print(f"exact P({args.key}) = {ideal:.12g}; sampled = {report.probability(args.key):.6g}", file=sys.stderr)
    return EXIT_OK


def _iterations(text: str):
    if text == "auto":
        return "auto"
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("iterations must be >= 0 or 'auto'")
    return v


def cmd_grover(args) -> int:
    try:
        spec = algorithms.GroverSpec(args.n, args.key, args.iterations)
        circuit = algorithms.build_grover(spec)
    except QsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.iterations == "auto":
        print(f"iterations (auto) = {spec.resolved_iterations}", file=sys.stderr)
    _execute_and_emit(circuit, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify.run_all(args.max_qubits, args.tolerance)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} suites passed")
    return EXIT_OK if not failed else 1


def cmd_fit_noise(args) -> int:
    try:
        spec = algorithms.SearchSpec(args.n, args.key, args.variant)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    circuit = algorithms.build_constant_search(spec)
    try:
        fit = noise.fit_readout(circuit, args.key, args.target, args.shots, _seed(args))
    except FitError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.format == "json":
        import json

        text = json.dumps({k: (round(v, 12) if isinstance(v, float) else v) for k, v in fit.to_dict().items()}, sort_keys=True) + "\n"
    else:
        rows = [
            (f"target P({args.key})", f"{fit.target:g}"),
            ("fitted readout p", f"{fit.p:.6f}"),
            (f"achieved P({args.key})", f"{fit.achieved:.6f}"),
            (f"(1-p)^{args.n}", f"{(1 - fit.p) ** args.n:.6f}"),
            ("iterations", str(fit.iterations)),
        ]
        width = max(len(label) for label, _ in rows)
        text = "".join(f"{label:<{width}} = {value}\n" for label, value in rows)
    _emit(text, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsim", description="State-vector simulator and constant-depth key search toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute an OpenQASM 2.0 file")
    p.add_argument("path")
    _add_run_config(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("search", help="constant-depth key search circuit")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--variant", choices=algorithms.VARIANTS, default=algorithms.ALGORITHM)
    p.add_argument("--emit-qasm", default=None, metavar="PATH")
    _add_run_config(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("grover", help="Grover search baseline")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--iterations", type=_iterations, default="auto")
    _add_run_config(p)
    p.set_defaults(func=cmd_grover)

    p = sub.add_parser("verify", help="run the built-in self-check suites")
    p.add_argument("--max-qubits", type=_positive_int, default=5)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fit-noise", help="fit a symmetric readout error to a target key probability")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--key", default="01")
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--variant", choices=algorithms.VARIANTS, default=algorithms.ALGORITHM)
    p.add_argument("--shots", type=_positive_int, default=8192)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_fit_noise)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except UnsupportedExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: cannot open {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
