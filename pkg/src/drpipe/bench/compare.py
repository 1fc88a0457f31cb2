"""Report comparison: per-metric deltas with declared regression tolerances."""

from __future__ import annotations

from ..errors import BundleMismatch

# how much metric B may be worse than A before it counts as a regression
DEFAULT_TOLERANCES = {
    "inpaint_psnr_db": 1.0,
    "mask_iou": 0.01,
    "pose_t_err_m": 1e-6,
    "pose_r_err_deg": 1e-6,
    "temporal_flicker": 1.0,
    "silhouette_iou": 0.01,
}

# +1: larger is better, -1: smaller is better
_DIRECTION = {
    "inpaint_psnr_db": +1,
    "mask_iou": +1,
    "silhouette_iou": +1,
    "pose_t_err_m": -1,
    "pose_r_err_deg": -1,
    "temporal_flicker": -1,
}


def compare(report_a: dict, report_b: dict, tolerances: dict | None = None) -> dict:
    """Deltas of B relative to A; both reports must describe the same bundle."""
    if report_a.get("bundle_hash") != report_b.get("bundle_hash"):
        raise BundleMismatch(
            f"bundle hashes differ: {report_a.get('bundle_hash')} vs {report_b.get('bundle_hash')}"
        )
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})

    metric_deltas = {}
    regressions = []
    names = set(report_a.get("metrics", {})) | set(report_b.get("metrics", {}))
    for name in sorted(names):
        ma = report_a.get("metrics", {}).get(name)
        mb = report_b.get("metrics", {}).get(name)
        if ma is None or mb is None:
            metric_deltas[name] = None
            continue
        delta = {k: mb[k] - ma[k] for k in ("mean", "p50", "p95")}
        metric_deltas[name] = delta
        direction = _DIRECTION.get(name, -1)
        worse = -delta["mean"] * direction
        if worse > tol.get(name, 0.0):
            regressions.append(name)

    rate_deltas = {
        k: report_b.get("rates", {}).get(k, 0.0) - report_a.get("rates", {}).get(k, 0.0)
        for k in ("bypass", "reuse", "drop")
    }
    return {
        "bundle_hash": report_a["bundle_hash"],
        "metric_deltas": metric_deltas,
        "rate_deltas": rate_deltas,
        "regressions": regressions,
        "tolerances": tol,
    }


def render_table(comparison: dict) -> str:
    lines = [f"bundle {comparison['bundle_hash'][:12]}…"]
    lines.append(f"{'metric':<20} {'Δmean':>12} {'Δp50':>12} {'Δp95':>12}")
    for name, delta in comparison["metric_deltas"].items():
        if delta is None:
            lines.append(f"{name:<20} {'n/a':>12}")
        else:
            flag = "  <-- REGRESSION" if name in comparison["regressions"] else ""
            lines.append(
                f"{name:<20} {delta['mean']:>12.4f} {delta['p50']:>12.4f} "
                f"{delta['p95']:>12.4f}{flag}"
            )
    lines.append(f"{'rates':<20} " + "  ".join(
        f"{k}:{v:+.3f}" for k, v in comparison["rate_deltas"].items()
    ))
    return "\n".join(lines)
