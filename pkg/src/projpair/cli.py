"""Command-line front end.

Subcommands: halmos, esscodim, kadison-check, kadison-build, bj, selftest.
Exit codes: 0 for success / admissible / consistent verdicts, 2 for a
mathematically valid negative verdict (rejected, not Fredholm,
inconsistent, failing self-test), 1 for usage or input errors.

All documents carry ``"schema": "projpair/1"``.  Operator blocks are
nested [re, im] pairs; infinite cardinals and sums serialize as the
string "inf".  Report JSON is emitted with sorted keys so identical
inputs produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Union

import numpy as np

from .errors import ProjPairError, SchemaError
from .finite_spectrum import FiniteSpectrumOp, bj_analyze
from .kadison import (
    DiagonalSequence,
    check_diagonal,
    construct_projection,
    ess_codim_from_diagonal,
    frame_index,
)
from .canonical import pair_index
from .operators import (
    TailPattern,
    TailedOperator,
    TailedProjection,
    arveson_corner_trace,
    as_projection,
    essential_codimension,
    halmos_decompose,
)
from .selftest import run_all
from .tolerances import INT_SNAP_TOL, RANK_TOL

SCHEMA = "projpair/1"


# ---------------------------------------------------------------------------
# JSON encoding of operators

def _encode_block(block: np.ndarray):
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(block)]


def _decode_block(rows, field: str) -> np.ndarray:
    try:
        out = np.array([[complex(c[0], c[1]) for c in row] for row in rows],
                       dtype=np.complex128)
    except (TypeError, IndexError, ValueError) as exc:
        raise SchemaError(field, f"malformed block: {exc}") from exc
    if out.size == 0:
        return out.reshape(0, 0)
    return out


def operator_to_json(op: Union[np.ndarray, TailedOperator, TailedProjection]):
    if isinstance(op, np.ndarray):
        return {"schema": SCHEMA, "kind": "dense", "block": _encode_block(op)}
    if isinstance(op, TailedProjection):
        op = op.as_operator()
    return {
        "schema": SCHEMA,
        "kind": "tailed",
        "block": _encode_block(op.block),
        "tail": op.tail.to_json(),
        "shift": op.shift,
    }


def operator_from_json(obj) -> Union[np.ndarray, TailedOperator]:
    if not isinstance(obj, dict):
        raise SchemaError("$", "operator document must be an object")
    if obj.get("schema") != SCHEMA:
        raise SchemaError("schema", f"expected {SCHEMA!r}, got {obj.get('schema')!r}")
    kind = obj.get("kind")
    if kind == "dense":
        block = _decode_block(obj.get("block", []), "block")
        if block.size and block.shape[0] != block.shape[1]:
            raise SchemaError("block", "dense block must be square")
        return block
    if kind == "tailed":
        block = _decode_block(obj.get("block", []), "block")
        tail_obj = obj.get("tail")
        if not isinstance(tail_obj, dict):
            raise SchemaError("tail", "missing tail object")
        for key in ("constant", "period"):
            if key in tail_obj:
                break
        else:
            raise SchemaError("tail", "needs 'constant' or 'period'")
        if "constant" in tail_obj and tail_obj["constant"] not in (0, 1):
            raise SchemaError("tail.constant", f"bit must be 0 or 1, got {tail_obj['constant']!r}")
        if "period" in tail_obj and any(b not in (0, 1) for b in tail_obj["period"]):
            raise SchemaError("tail.period", "period entries must be bits")
        for k, v in tail_obj.get("exceptions", {}).items():
            if v not in (0, 1):
                raise SchemaError(f"tail.exceptions.{k}", "exception bits must be 0 or 1")
        shift = obj.get("shift", 0)
        if not isinstance(shift, int):
            raise SchemaError("shift", "shift must be an integer")
        start = block.shape[1] if block.size else len(obj.get("block", []))
        try:
            tail = TailPattern.from_json(tail_obj, start)
            return TailedOperator(block, shift, tail)
        except ProjPairError as exc:
            raise SchemaError("tail", str(exc)) from exc
    raise SchemaError("kind", f"unknown operator kind {kind!r}")


def projection_from_json(obj) -> TailedProjection:
    """Operator document as a tailed projection; dense blocks embed with a
    zero tail."""
    op = operator_from_json(obj)
    if isinstance(op, np.ndarray):
        return TailedProjection.from_dense(op)
    try:
        return as_projection(op)
    except ProjPairError as exc:
        raise SchemaError("block", f"not a projection: {exc}") from exc


def finite_spectrum_to_json(z: FiniteSpectrumOp):
    w = z.window()
    span = 1
    for p in z.projections:
        span = span * len(p.tail.period) // math.gcd(span, len(p.tail.period))
    tail_period = [z.tail_value_index(w + i) for i in range(span)]
    # blocks are emitted at the unified window, which absorbs every tail
    # exception as a diagonal entry; only exceptions beyond it survive
    exceptions = {}
    for j, p in enumerate(z.projections):
        for n, b in p.tail.exceptions:
            if b == 1 and n >= w:
                exceptions[str(n)] = j
    return {
        "schema": SCHEMA,
        "kind": "finite_spectrum",
        "eigenvalues": [float(a) for a in z.eigenvalues],
        "projections": [{"kind": "dense", "block": _encode_block(p.to_matrix(w))}
                        for p in z.projections],
        "tail_period": tail_period,
        "tail_exceptions": exceptions,
    }


def finite_spectrum_from_json(obj) -> FiniteSpectrumOp:
    if obj.get("schema") != SCHEMA:
        raise SchemaError("schema", f"expected {SCHEMA!r}")
    if obj.get("kind") != "finite_spectrum":
        raise SchemaError("kind", "expected 'finite_spectrum'")
    eigenvalues = [float(a) for a in obj.get("eigenvalues", [])]
    blocks = [_decode_block(p.get("block", []), f"projections[{i}].block")
              for i, p in enumerate(obj.get("projections", []))]
    if len(blocks) != len(eigenvalues):
        raise SchemaError("projections", "one projection per eigenvalue required")
    period = obj.get("tail_period", [])
    if not period:
        raise SchemaError("tail_period", "must list at least one eigenvalue index")
    if any(not isinstance(j, int) or not 0 <= j < len(eigenvalues) for j in period):
        raise SchemaError("tail_period", "entries must index the eigenvalue list")
    exceptions = {}
    for k, v in obj.get("tail_exceptions", {}).items():
        exceptions[int(k)] = int(v)
    w = blocks[0].shape[0] if blocks else 0
    projections = []
    for j, block in enumerate(blocks):
        if block.shape[0] != w:
            raise SchemaError(f"projections[{j}]", "projection blocks must share a window")
        pp = tuple(1 if owner == j else 0 for owner in period)
        exc = {}
        for n, owner in exceptions.items():
            period_owner = period[(n - w) % len(period)]
            if owner == j and period_owner != j:
                exc[n] = 1
            elif owner != j and period_owner == j:
                exc[n] = 0
        try:
            projections.append(TailedProjection(block, TailPattern(w, pp, tuple(exc.items()))))
        except ProjPairError as exc_err:
            raise SchemaError(f"projections[{j}]", str(exc_err)) from exc_err
    try:
        return FiniteSpectrumOp(tuple(eigenvalues), tuple(projections))
    except ProjPairError as exc_err:
        raise SchemaError("$", str(exc_err)) from exc_err


# ---------------------------------------------------------------------------
# File plumbing

def load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise SchemaError(path, "file not found")
    except json.JSONDecodeError as exc:
        raise SchemaError(path, f"invalid JSON: {exc}")


def load_operator(path: str) -> Union[np.ndarray, TailedOperator]:
    return operator_from_json(load_json(path))


def dump_report(report: dict, path: Optional[str]) -> None:
    text = json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


save_report = dump_report


def _emit(args, report: dict, human_lines) -> None:
    if args.json:
        dump_report(report, args.output)
    else:
        for line in human_lines:
            print(line)
        if args.output:
            dump_report(report, args.output)


# ---------------------------------------------------------------------------
# Subcommands

def _cmd_halmos(args) -> int:
    a = load_json(args.p)
    b = load_json(args.q)
    if a.get("kind") == "dense" and b.get("kind") == "dense":
        p = operator_from_json(a)
        q = operator_from_json(b)
    else:
        p = projection_from_json(a)
        q = projection_from_json(b)
    form = halmos_decompose(p, q, rank_tol=args.tol_rank)
    report = {
        "schema": SCHEMA,
        "command": "halmos",
        "cardinals": form.cp.to_json(),
        "block_dims": list(form.block_dims),
        "svals": [float(s) for s in form.svals],
    }
    _emit(args, report, [
        "Halmos canonical form",
        f"  dim(p^q)   = {form.cp.n11.to_json()}",
        f"  dim(p^q')  = {form.cp.n10.to_json()}",
        f"  dim(p'^q)  = {form.cp.n01.to_json()}",
        f"  dim(p'^q') = {form.cp.n00.to_json()}",
        f"  s-values   = {[round(float(s), 10) for s in form.svals]}",
    ])
    return 0


def _cmd_esscodim(args) -> int:
    p = projection_from_json(load_json(args.p))
    q = projection_from_json(load_json(args.q))
    from .errors import NotFredholmError
    try:
        index = essential_codimension(p, q, rank_tol=args.tol_rank)
    except NotFredholmError as exc:
        _emit(args, {"schema": SCHEMA, "command": "esscodim", "verdict": "not_fredholm",
                     "detail": str(exc)},
              [f"not a Fredholm pair: {exc}"])
        return 2
    corner = arveson_corner_trace(p, q)
    halmos = pair_index(halmos_decompose(p, q, rank_tol=args.tol_rank).cp)
    agree = abs(corner - index) <= args.tol_int and halmos == index
    report = {
        "schema": SCHEMA,
        "command": "esscodim",
        "index": index,
        "arveson_trace": corner,
        "halmos_index": halmos,
        "routes_agree": agree,
        "verdict": "consistent" if agree else "inconsistent",
    }
    _emit(args, report, [
        f"essential codimension [p:q] = {index}",
        f"  corner-trace route = {corner:.9f}",
        f"  canonical-form route = {halmos}",
        f"  routes agree: {agree}",
    ])
    return 0 if agree else 2


def _cmd_kadison_check(args) -> int:
    seq = _load_sequence(args.seq)
    report = check_diagonal(seq, tol=args.tol_admiss)
    doc = {"schema": SCHEMA, "command": "kadison-check", **report.to_json()}
    lines = [f"a = {report.a}", f"b = {report.b}", f"verdict: {report.verdict}"]
    if report.integer is not None:
        lines.append(f"integer a - b = {report.integer}")
    if report.defect is not None:
        lines.append(f"defect = {report.defect}")
    _emit(args, doc, lines)
    return 0 if report.admissible else 2


def _cmd_kadison_build(args) -> int:
    from .errors import IndexObstruction, UnsupportedTailError
    seq = _load_sequence(args.seq)
    try:
        proj = construct_projection(seq, tol=args.tol_admiss)
    except (IndexObstruction, UnsupportedTailError) as exc:
        obstruction = getattr(exc, "obstruction", None)
        doc = {"schema": SCHEMA, "command": "kadison-build", "verdict": "rejected",
               "detail": str(exc)}
        if obstruction is not None:
            doc["defect"] = obstruction
        _emit(args, doc, [f"cannot build projection: {exc}"])
        return 2
    index, _ = ess_codim_from_diagonal(proj, rank_tol=args.tol_rank)
    frame = frame_index(proj, rank_tol=args.tol_rank)
    doc = {
        "schema": SCHEMA,
        "command": "kadison-build",
        "verdict": "built",
        "operator": operator_to_json(proj),
        "index": index,
        "frame_index": frame,
    }
    _emit(args, doc, [
        f"built projection on window {proj.window} with tail {proj.tail.period}",
        f"essential codimension = {index}, frame route = {frame}",
    ])
    return 0


def _cmd_bj(args) -> int:
    z = finite_spectrum_from_json(load_json(args.op))
    report = bj_analyze(z, rank_tol=args.tol_rank)
    doc = {"schema": SCHEMA, "command": "bj", **report.to_json()}
    lines = [
        f"a = {report.a}, b = {report.b}",
        f"middle multiplicities: {[m.to_json() for m in report.middle_mults]}",
        f"integer = {report.integer}",
        f"essential codimension [p_1:q] = {report.esscodim}",
        f"consistent: {report.consistent}",
    ]
    if report.note:
        lines.append(report.note)
    _emit(args, doc, lines)
    return 0 if (report.applicable and report.consistent) else 2


def _cmd_selftest(args) -> int:
    results = run_all(seed=args.seed, trials=args.trials)
    failures = sum(r.failures for r in results)
    doc = {
        "schema": SCHEMA,
        "command": "selftest",
        "seed": args.seed,
        "trials": args.trials,
        "suites": [r.to_json() for r in sorted(results, key=lambda r: r.name)],
        "failures": failures,
    }
    lines = []
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        lines.append(f"{mark} {r.name}: {r.trials - r.failures}/{r.trials}")
        lines.extend(f"     {d}" for d in r.details[:3])
    lines.append(f"total failures: {failures}")
    _emit(args, doc, lines)
    return 0 if failures == 0 else 2


def _load_sequence(path: str) -> DiagonalSequence:
    obj = load_json(path)
    if not isinstance(obj, dict):
        raise SchemaError("$", "sequence document must be an object")
    if obj.get("schema") not in (None, SCHEMA):
        raise SchemaError("schema", f"expected {SCHEMA!r}")
    if "prefix" not in obj:
        raise SchemaError("prefix", "missing")
    tail = obj.get("tail", "zeros")
    if tail not in ("zeros", "ones", "half"):
        raise SchemaError("tail", f"expected zeros|ones|half, got {tail!r}")
    try:
        return DiagonalSequence(tuple(float(v) for v in obj["prefix"]), tail)
    except (TypeError, ValueError) as exc:
        raise SchemaError("prefix", str(exc))
    except ProjPairError as exc:
        raise SchemaError("prefix", str(exc))


# ---------------------------------------------------------------------------
# Parser and dispatch

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="projpair",
        description="Two-projection geometry: canonical forms, essential "
                    "codimension, diagonals of projections and finite-spectrum operators.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("-o", "--output", default=None, help="write the JSON report here")
        p.add_argument("--tol-rank", type=float, default=RANK_TOL, dest="tol_rank",
                       help="eigenvalue clustering tolerance (default 1e-8)")
        p.add_argument("--tol-int", type=float, default=INT_SNAP_TOL, dest="tol_int",
                       help="integer snap tolerance for route agreement (default 1e-6)")
        p.add_argument("--tol-admiss", type=float, default=1e-9, dest="tol_admiss",
                       help="admissibility tolerance for a-b (default 1e-9)")

    p = sub.add_parser("halmos", help="canonical decomposition of a projection pair")
    p.add_argument("p")
    p.add_argument("q")
    common(p)
    p.set_defaults(func=_cmd_halmos)

    p = sub.add_parser("esscodim", help="essential codimension by three routes")
    p.add_argument("p")
    p.add_argument("q")
    common(p)
    p.set_defaults(func=_cmd_esscodim)

    p = sub.add_parser("kadison-check", help="diagonal admissibility verdict")
    p.add_argument("seq")
    common(p)
    p.set_defaults(func=_cmd_kadison_check)

    p = sub.add_parser("kadison-build", help="construct a projection with a prescribed diagonal")
    p.add_argument("seq")
    common(p)
    p.set_defaults(func=_cmd_kadison_build)

    p = sub.add_parser("bj", help="finite-spectrum diagonal analysis")
    p.add_argument("op")
    common(p)
    p.set_defaults(func=_cmd_bj)

    p = sub.add_parser("selftest", help="run the seeded property suites")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=_cmd_selftest)

    return parser


def dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except ProjPairError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
