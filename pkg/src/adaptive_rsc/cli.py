"""Command-line front end.

Subcommands: prepare, estimate, bound, oracle-check, run-qasm. Every command
writes JSON (one report) or JSON lines (record streams), never binary.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation (including a failed oracle check).
"""
from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .adaptive_prep import read_records, run_shots, write_records
from .bound_analysis import cones_disjoint, max_product_form_bound, sample_ceiling
from .circuit_lang import CircuitSyntaxError, execute, parse
from .fidelity_stats import EstimationError, estimate
from .noise import NoiseModel
from .oracle import OracleError
from .pauli_tableau import StabilizerTableau
from .rng import ShotRng
from .surface_code import LayoutError, build_strip

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INVARIANT = 0, 1, 2, 3
RECORD_FORMAT = "adaptive-rsc-shots/1"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class InvariantViolation(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dump(obj, out):
    out.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _open_out(path: Optional[str]):
    if path in (None, "-"):
        return sys.stdout, False
    try:
        return open(path, "w", encoding="utf-8", newline="\n"), True
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from None


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _layout(length: int):
    try:
        return build_strip(length)
    except LayoutError as exc:
        raise UsageError(str(exc)) from None


def _noise(text: str) -> NoiseModel:
    try:
        return NoiseModel.parse(text)
    except ValueError as exc:
        raise UsageError(f"--noise: {exc}") from None


# ---------------------------------------------------------------- commands


def cmd_prepare(args) -> int:
    for basis, n in (("X", args.shots_x), ("Z", args.shots_z)):
        if n == 0:
            raise UsageError(f"zero shots in basis {basis}")
        if n < 0:
            raise UsageError(f"shot count for basis {basis} must be positive, got {n}")
    layout = _layout(args.length)
    noise = _noise(args.noise)
    batch = run_shots(layout, noise, args.shots_x, args.shots_z, args.seed, correction=args.correction)
    manifest = {
        "format": RECORD_FORMAT,
        "version": __version__,
        "L": layout.L,
        "layout_id": layout.layout_id,
        "seed": args.seed,
        "noise": noise.as_dict(),
        "shots_x": args.shots_x,
        "shots_z": args.shots_z,
        "correction": args.correction,
        "rng": "philox4x64-10",
    }
    out, close = _open_out(args.out)
    try:
        write_records(out, batch.records, manifest)
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_estimate(args) -> int:
    if args.resamples == 1 or args.resamples < 0:
        raise UsageError("--resamples must be 0 (no bootstrap) or at least 2")
    try:
        manifest, records = read_records(_read_text(args.records).splitlines())
    except ValueError as exc:
        raise DataError(str(exc)) from None
    length = args.length or (manifest or {}).get("L")
    if length is None:
        raise UsageError("records carry no manifest; pass --length")
    layout = _layout(int(length))
    if manifest and manifest.get("layout_id") not in (None, layout.layout_id):
        raise DataError("records were produced on a different layout")
    try:
        est = estimate(records, layout, n_resamples=args.resamples,
                       rng=np.random.default_rng(args.seed))
    except EstimationError as exc:
        raise DataError(str(exc)) from None
    plaquettes = []
    for row in layout.to_dict()["ancilla_qubits"]:
        plaquettes.append({"id": row["stabilizer"], "type": "Z", "x": row["x"], "y": row["y"],
                           "fidelity": est.per_stabilizer[row["stabilizer"]]})
    for chk in layout.x_checks:
        cols = [layout.data_coords(q) for q in chk.support]
        plaquettes.append({"id": chk.name, "type": "X", "x": sum(c for _, c in cols) / len(cols),
                           "y": sum(r for r, _ in cols) / len(cols),
                           "fidelity": est.per_stabilizer[chk.name]})
    if args.format == "table":
        print(f"fidelity lower bound  {est.formatted()}")
        print(f"<P_x> {est.px_hat:.4f}   <P_z> {est.pz_hat:.4f}   <X_L> fidelity {est.logical_x_fid:.4f}")
        print(f"shots X {est.n_x}   Z {est.n_z}   resamples {est.n_resamples}")
        for p in plaquettes:
            print(f"  {p['id']:>4} {p['type']}  ({p['x']:4.1f}, {p['y']:4.1f})  {p['fidelity']:.4f}")
    else:
        _dump({"type": "fidelity_report", "layout_id": layout.layout_id, "L": layout.L,
               **est.to_dict(), "plaquettes": plaquettes}, sys.stdout)
    return EXIT_OK


def cmd_bound(args) -> int:
    if args.depth < 0:
        raise UsageError("--depth must be nonnegative")
    if not 0.0 < args.grid_step <= 0.01:
        raise UsageError("--grid-step must lie in (0, 0.01]")
    if args.samples < 0:
        raise UsageError("--samples must be nonnegative")
    layout = _layout(args.length)
    cones = cones_disjoint(layout, args.depth)
    report = {"type": "bound_certificate", **cones.to_dict(),
              "max_product_form_bound": max_product_form_bound(args.grid_step),
              "grid_step": args.grid_step}
    if args.samples:
        harness = {}
        for ens in ("uniform", "perturbed") if args.depth == 4 else ("uniform",):
            res = sample_ceiling(layout, args.samples, args.depth, args.seed, ens)
            harness[ens] = {
                "samples": len(res),
                "max_fidelity": max(r.fidelity for r in res),
                "max_bound_violation": max(r.fidelity - r.povm.bound for r in res),
                "max_product_residual": max(r.povm.product_residual for r in res),
            }
        report["random_circuits"] = harness
    _dump(report, sys.stdout)
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    from .equivalence import run_suite

    if args.shots < 1:
        raise UsageError("--shots must be positive")
    layout = _layout(args.length)
    if args.length > 5:
        raise DataError(f"L={args.length} needs {layout.n_qubits} qubits, above the oracle ceiling")
    try:
        report = run_suite(layout, shots=args.shots, seed=args.seed)
    except OracleError as exc:
        raise DataError(str(exc)) from None
    _dump({"type": "oracle_check", **report.to_dict()}, sys.stdout)
    if not report.passed:
        raise InvariantViolation("tableau and oracle disagree")
    return EXIT_OK


def cmd_run_qasm(args) -> int:
    if args.shots < 0:
        raise UsageError("--shots must be nonnegative")
    text = _read_text(args.path)
    try:
        circ = parse(text)
    except CircuitSyntaxError as exc:
        raise DataError(f"{args.path}:{exc.line}:{exc.col}: {exc.message}") from None
    if not circ.instructions:
        return EXIT_OK
    noise = _noise(args.noise)
    counts = {name: Counter() for name, _ in circ.cregs}
    out, close = _open_out(args.out)
    try:
        for shot in range(args.shots):
            if circ.n_qubits:
                res = execute(circ, StabilizerTableau(circ.n_qubits), ShotRng(args.seed, shot), noise)
            else:
                res = _classical_only(circ)
            snap = res.registers.snapshot()
            for name, bits in snap.items():
                counts[name]["".join(map(str, reversed(bits)))] += 1
            out.write(json.dumps({"type": "shot", "shot": shot, "registers": snap},
                                 separators=(",", ":")) + "\n")
        out.write(json.dumps({"type": "summary", "shots": args.shots,
                              "counts": {k: dict(sorted(v.items())) for k, v in counts.items()}},
                             separators=(",", ":"), sort_keys=True) + "\n")
    finally:
        if close:
            out.close()
    return EXIT_OK


def _classical_only(circ):
    """Programs without quantum registers only touch classical bits."""
    from .circuit_lang import Assign, ExecutionResult

    regs = circ.fresh_registers()
    for ins in circ.instructions:
        if isinstance(ins, Assign):
            regs.set(ins.target, regs.eval(ins.terms))
    return ExecutionResult(None, regs, [], [])


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="adaptive-rsc", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("prepare", help="simulate the adaptive protocol and write shot records")
    s.add_argument("--length", type=int, default=5)
    s.add_argument("--shots-x", type=int, default=1000)
    s.add_argument("--shots-z", type=int, default=1000)
    s.add_argument("--noise", default="0,0,0,0", help="p1,p2,pm,pi")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--correction", choices=("chain", "gf2"), default="chain")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_prepare)

    s = sub.add_parser("estimate", help="fidelity report from shot records")
    s.add_argument("records", help="record file, or - for stdin")
    s.add_argument("--resamples", type=int, default=100)
    s.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    s.add_argument("--length", type=int, default=None, help="needed only without a manifest")
    s.add_argument("--format", choices=("json", "table"), default="json")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("bound", help="causal-cone and POVM certificate")
    s.add_argument("--length", type=int, default=5)
    s.add_argument("--depth", type=int, default=4)
    s.add_argument("--grid-step", type=float, default=1e-3)
    s.add_argument("--samples", type=int, default=0, help="random circuits per ensemble")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("oracle-check", help="tableau versus statevector suite")
    s.add_argument("--length", type=int, default=5)
    s.add_argument("--shots", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_oracle_check)

    s = sub.add_parser("run-qasm", help="execute an adaptive circuit file")
    s.add_argument("path")
    s.add_argument("--shots", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise", default="0,0,0,0")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_run_qasm)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("a command is required")
        return args.func(args)
    except UsageError as exc:
        print(f"adaptive-rsc: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"adaptive-rsc: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvariantViolation as exc:
        print(f"adaptive-rsc: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
