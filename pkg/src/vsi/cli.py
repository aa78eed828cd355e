"""Command-line front end.

Every command builds a JSON-ready report dictionary first; the human-readable
output is rendered from that dictionary, and ``--json`` prints it instead.

Exit codes: 0 success, 2 parse or validation error, 3 resource cap,
4 internal invariant violation (including oracle mismatches).
"""

from __future__ import annotations

import argparse
import re
import sys
import time
from pathlib import Path
from typing import Callable

from . import __version__
from .catalog import FAMILIES, CatalogError, build
from .curvature import (
    CurvatureError,
    build_stack,
    operator_invariants,
    self_norm_invariant,
)
from .degeneracy import VSIVerdict, check_B_conditions, vsi_verdict
from .errors import InvariantViolation, ResourceLimitError
from .expr import ExprError
from .frame import CONVENTION, FrameError, bw_decompose, classify_geometry
from .io import (
    FileFormatError,
    FrameFile,
    MetricFile,
    dumps,
    load_frame_file,
    load_metric_file,
    write_json,
)
from .oracle import SamplePlan, cross_check

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_BUG = 0, 2, 3, 4

_TENSOR = re.compile(r"^(riemann|metric|ricci|weyl|nabla\^([0-9]+))$")


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _load(args, need_frame: bool):
    mf = load_metric_file(args.metric)
    metric = mf.metric()
    frame = None
    if need_frame:
        if not args.frame:
            raise UsageError("this command needs --frame FILE")
        frame = load_frame_file(args.frame, mf.ctx).frame(metric)
    return mf, metric, frame


def _rf(v) -> str:
    return str(v)


def _frac(x) -> str:
    return str(x)


def _echo(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


# ---------------------------------------------------------------------------
# Commands: each returns a report dictionary
# ---------------------------------------------------------------------------


def cmd_invariants(args) -> dict:
    mf, metric, _ = _load(args, need_frame=False)
    stack = build_stack(metric, args.order)
    norms = {f"self_norm({j})": _rf(self_norm_invariant(stack, j)) for j in range(args.order + 1)}
    ops = {name: _rf(v) for name, v in operator_invariants(stack)}
    return {
        "results": {"self_norms": norms, "operator_invariants": ops, "notes": stack.notes},
        "stats": {"stack_nonzero": [T.nnz for T in stack.nabla], "dense_entries": stack.scalar_entries()},
    }


def cmd_classify(args) -> dict:
    mf, metric, frame = _load(args, need_frame=True)
    if metric.dim != 4 or metric.ctx.signature != (2, 0):
        raise UsageError("classify needs a 4D neutral metric")
    flags = classify_geometry(metric, frame)
    sc = flags.coefficients
    return {
        "results": {
            "flags": flags.as_dict(),
            "spin_coefficients": {k: _rf(v) for k, v in sc.as_dict().items()},
            "relabeling": flags.relabeling,
        }
    }


def _verdict_json(v: VSIVerdict) -> dict:
    orders = []
    for o in v.orders:
        entry = {"order": o.order, "status": o.status.value, "support": [list(b) for b in o.support]}
        if o.direction is not None:
            entry["lambda"] = [_frac(x) for x in o.direction.lam]
        if o.witness is not None:
            entry["witness"] = o.witness
            entry["witness_value"] = _rf(o.witness_value)
        orders.append(entry)
    hc, fr = v.highest_certified(), v.first_refuted()
    return {
        "summary": v.summary(),
        "certified_through": hc,
        "refuted_at": fr.order if fr else None,
        "orders": orders,
        "caveats": list(v.caveats),
    }


def cmd_vsi(args) -> dict:
    mf, metric, frame = _load(args, need_frame=True)
    stack = build_stack(metric, args.order)
    verdict = vsi_verdict(metric, frame, args.order, stack)
    return {
        "results": {"verdict": _verdict_json(verdict)},
        "stats": {"stack_nonzero": [T.nnz for T in stack.nabla], "dense_entries": stack.scalar_entries()},
    }


def _bw_tensor(name: str, metric):
    m = _TENSOR.match(name)
    if not m:
        raise UsageError(f"--tensor must be riemann, metric, ricci, weyl or nabla^j, got {name!r}")
    if name == "metric":
        return metric.g
    if m.group(2) is not None:
        j = int(m.group(2))
        return build_stack(metric, j).nabla[j]
    stack = build_stack(metric, 0)
    return {"riemann": stack.riemann, "ricci": stack.ricci, "weyl": stack.weyl}[name]


def cmd_bw(args) -> dict:
    mf, metric, frame = _load(args, need_frame=True)
    T = _bw_tensor(args.tensor, metric)
    dec = bw_decompose(T, frame, metric)
    cells = [{"weight": list(b), "count": len(dec.parts[b])} for b in dec.support()]
    conds = check_B_conditions(dec)
    return {
        "results": {
            "tensor": args.tensor,
            "k": frame.k,
            "cells": cells,
            "B_conditions": [bool(x) for x in conds.b],
            "N": conds.n,
        }
    }


def cmd_builtin(args) -> dict:
    settings = {}
    for item in args.set or []:
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--set expects key=expr, got {item!r}")
        settings[key.strip()] = val.strip()
    inst = build(args.name, settings)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "metric": out / "metric.json",
        "frame": out / "frame.json",
        "expected": out / "expected.json",
    }
    write_json(files["metric"], MetricFile.from_metric(inst.metric).to_json())
    write_json(files["frame"], FrameFile.from_covectors(inst.ctx, inst.coframe).to_json())
    write_json(
        files["expected"],
        {"family": inst.family, "bindings": inst.bindings, "expected": inst.expected},
    )
    return {"results": {"family": inst.family, "bindings": inst.bindings, "files": {k: str(v) for k, v in files.items()}}}


def cmd_oracle(args) -> dict:
    mf, metric, _ = _load(args, need_frame=False)
    stack = build_stack(metric, args.order)
    report = cross_check(stack, SamplePlan(seed=args.seed, points=args.points))
    data = report.to_json()
    data.pop("invariants")
    return {"results": {"oracle": data, "ok": report.ok}, "_fail": not report.ok}


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def bw_diagram(cells: list[dict], k: int) -> list[str]:
    """Text grid of occurring boost weights with component counts.

    For ``k = 1`` one row; for ``k >= 2`` a ``b1`` (columns) by ``b2`` (rows)
    grid, repeated per value of ``(b3, ..., bk)``.
    """
    if not cells:
        return ["(no nonzero components)"]
    counts = {tuple(c["weight"]): c["count"] for c in cells}
    if k == 1:
        lo, hi = min(b[0] for b in counts), max(b[0] for b in counts)
        cols = range(lo, hi + 1)
        return [
            "b1 " + " ".join(f"{c:>4}" for c in cols),
            "   " + " ".join(f"{counts.get((c,), '.'):>4}" for c in cols),
        ]
    b1s = [b[0] for b in counts]
    b2s = [b[1] for b in counts]
    cols = range(min(b1s), max(b1s) + 1)
    rows = range(max(b2s), min(b2s) - 1, -1)
    lines = []
    for rest in sorted({b[2:] for b in counts}):
        if rest:
            lines.append("(b3..bk) = " + ", ".join(map(str, rest)))
        lines.append("b2\\b1 " + " ".join(f"{c:>4}" for c in cols))
        for r in rows:
            lines.append(f"{r:>5} " + " ".join(f"{counts.get((c, r) + rest, '.'):>4}" for c in cols))
    return lines


def render(command: str, report: dict) -> str:
    res = report["results"]
    lines = [f"# vsi {command}"]
    if command == "invariants":
        for name, v in res["self_norms"].items():
            lines.append(f"{name} = {v}")
        for name, v in res["operator_invariants"].items():
            lines.append(f"{name} = {v}")
        lines += [f"note: {n}" for n in res["notes"]]
    elif command == "classify":
        for name, v in res["flags"].items():
            lines.append(f"{name}: {'yes' if v else 'no'}")
        lines.append(f"spin coefficients, {res['relabeling']}:")
        for name, v in res["spin_coefficients"].items():
            lines.append(f"  {name} = {v}")
    elif command == "vsi":
        v = res["verdict"]
        head = []
        if v["certified_through"] is not None:
            head.append(f"VSI_{v['certified_through']} certified")
        if v["refuted_at"] is not None:
            head.append(f"refuted at order {v['refuted_at']}")
        lines.append("; ".join(head) or "inconclusive")
        for o in v["orders"]:
            line = f"order {o['order']}: {o['status']}"
            if "lambda" in o:
                line += " lambda = (" + ", ".join(o["lambda"]) + ")"
            if "witness" in o:
                line += f" witness {o['witness']} = {o['witness_value']}"
            lines.append(line)
        lines += [f"caveat: {c}" for c in v["caveats"]]
    elif command == "bw":
        lines.append(f"tensor: {res['tensor']}")
        lines += bw_diagram(res["cells"], res["k"])
        lines.append("B conditions: " + " ".join(f"B{i + 1}={'y' if x else 'n'}" for i, x in enumerate(res["B_conditions"])))
        lines.append(f"N: {'y' if res['N'] else 'n'}")
    elif command == "builtin":
        for kind, path in res["files"].items():
            lines.append(f"wrote {kind}: {path}")
    elif command == "oracle":
        o = res["oracle"]
        lines.append(f"{len(o['points'])} points, {o['comparisons']} comparisons, {len(o['mismatches'])} mismatches")
        for m in o["mismatches"][:20]:
            lines.append(f"mismatch {m['quantity']} at {m['point']}: {m['symbolic']} vs {m['numeric']}")
        lines += [f"problem: {p}" for p in o["problems"]]
    if "convention" in report:
        lines.append(f"convention: {report['convention']}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


COMMANDS: dict[str, Callable] = {
    "invariants": cmd_invariants,
    "classify": cmd_classify,
    "vsi": cmd_vsi,
    "bw": cmd_bw,
    "builtin": cmd_builtin,
    "oracle": cmd_oracle,
}


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vsi", description="Exact curvature invariants and VSI verdicts.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, frame=False, order=False):
        sp.add_argument("metric", help="metric JSON file")
        if frame:
            sp.add_argument("--frame", help="frame JSON file")
        if order:
            sp.add_argument("--order", type=int, default=4, help="highest derivative order (default 4)")
        sp.add_argument("--json", action="store_true", help="print the machine-readable report")

    common(sub.add_parser("invariants", help="scalar invariants up to --order"), order=True)
    common(sub.add_parser("classify", help="Walker/Kundt flags from spin coefficients"), frame=True)
    common(sub.add_parser("vsi", help="VSI verdict up to --order"), frame=True, order=True)
    bw = sub.add_parser("bw", help="boost-weight diagram of a tensor")
    common(bw, frame=True)
    bw.add_argument("--tensor", default="riemann", help="riemann, metric, ricci, weyl or nabla^j")
    bi = sub.add_parser("builtin", help="write a catalog instance to files")
    bi.add_argument("name", help="family: " + ", ".join(sorted(FAMILIES)))
    bi.add_argument("--set", action="append", metavar="KEY=EXPR", help="bind a slot (repeatable)")
    bi.add_argument("--out", default=".", help="output directory")
    bi.add_argument("--json", action="store_true")
    orc = sub.add_parser("oracle", help="point-wise cross-check of the symbolic stack")
    common(orc, order=True)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--points", type=int, default=20)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if getattr(args, "order", 0) < 0:
        parser.error("--order must be non-negative")
    start = time.perf_counter()
    try:
        report = COMMANDS[args.command](args)
    except (FileFormatError, CatalogError, FrameError, ExprError, UsageError, CurvatureError, ValueError) as exc:
        print(f"vsi: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceLimitError as exc:
        print(f"vsi: resource limit: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InvariantViolation as exc:
        print(f"vsi: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_BUG
    failed = report.pop("_fail", False)
    full = {"command": _echo(args), "convention": CONVENTION}
    full.update(report)
    full.setdefault("stats", {})["seconds"] = round(time.perf_counter() - start, 3)
    sys.stdout.write(dumps(full) if args.json else render(args.command, full))
    return EXIT_BUG if failed else EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
