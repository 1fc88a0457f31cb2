"""drbench: evaluate results against a bundle, or compare two reports."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import DrError
from ..pipeline import read_results_dir
from ..scenegen import read_bundle
from .compare import compare, render_table
from .metrics import evaluate


def _cmd_evaluate(args) -> int:
    records, run_report = read_results_dir(args.results)
    bundle = read_bundle(args.bundle)
    report = evaluate(records, bundle)
    out = report.to_json()
    out["rates"]["bypass"] = run_report.get("bypass_rate", out["rates"]["bypass"])
    out["rates"]["reuse"] = run_report.get("reuse_rate", out["rates"]["reuse"])
    Path(args.out).write_text(json.dumps(out, indent=1, sort_keys=True), encoding="utf-8")
    print(f"wrote {args.out}: {len(records)} frames, {report.dropped} dropped")
    for name, agg in sorted(report.aggregates.items()):
        print(f"  {name:<20} mean={agg['mean']:.4f} p50={agg['p50']:.4f} p95={agg['p95']:.4f}")
    return 0


def _cmd_compare(args) -> int:
    report_a = json.loads(Path(args.report_a).read_text(encoding="utf-8"))
    report_b = json.loads(Path(args.report_b).read_text(encoding="utf-8"))
    tolerances = {}
    if args.tol_psnr is not None:
        tolerances["inpaint_psnr_db"] = args.tol_psnr
    if args.tol_iou is not None:
        tolerances["mask_iou"] = args.tol_iou
        tolerances["silhouette_iou"] = args.tol_iou
    result = compare(report_a, report_b, tolerances)
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=1, sort_keys=True), encoding="utf-8")
    print(render_table(result))
    if result["regressions"]:
        print(f"regressions: {', '.join(result['regressions'])}")
        return 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="drbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("evaluate", help="score a results directory against its bundle")
    p_eval.add_argument("--results", required=True, help="results directory")
    p_eval.add_argument("--bundle", required=True, help="ground-truth bundle directory")
    p_eval.add_argument("--out", required=True, help="output report JSON path")
    p_eval.set_defaults(fn=_cmd_evaluate)

    p_cmp = sub.add_parser("compare", help="diff two quality reports")
    p_cmp.add_argument("report_a")
    p_cmp.add_argument("report_b")
    p_cmp.add_argument("--out", help="output comparison JSON path")
    p_cmp.add_argument("--tol-psnr", type=float, default=None)
    p_cmp.add_argument("--tol-iou", type=float, default=None)
    p_cmp.set_defaults(fn=_cmd_compare)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
