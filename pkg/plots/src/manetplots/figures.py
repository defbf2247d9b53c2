"""Figure rendering over the simulator's results CSV.

The CSV contract is the simulator's documented schema (column list below).
The log-log slope shown on scaling figures is re-fit here with the same
least-squares formula the simulator uses; keeping a second implementation is
deliberate, as a cross-check of the published numbers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

# Documented schema of the simulator's results CSV, in order.
CSV_COLUMNS = [
    "run_id", "seed", "scheme", "n", "D", "W", "delta", "C", "coding_mode",
    "geometry", "T_s", "lambda_min", "lambda_mean", "delivery_prob",
    "bound_per_pair", "heuristic_lambda", "L_star", "paper_target_lambda",
    "status", "wall_time_s",
]

KINDS = ("scaling", "bound-overlay", "delivery")

# Theoretical reference slopes of the two regimes on the log-log axes.
REFERENCE_SLOPE = {"fast": 0.5, "slow": 1.0 / 3.0}


class SchemaError(ValueError):
    pass


class NoDataError(ValueError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    kind: str
    output_path: str
    scheme: str | None = None  # fast | slow | None for both

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")


@dataclass
class RenderInfo:
    """What ended up on the figure; returned for scripting and tests."""

    kind: str
    output_path: str
    rows_used: int
    rows_skipped: int
    slope: float | None = None
    reference_slope: float | None = None
    series: dict = field(default_factory=dict)


def read_rows(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise SchemaError(f"input CSV is missing columns: {missing}")
        return list(reader)


def fit_loglog(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and intercept of log(y) against log(x).

    Same formula as the simulator's `fit` command; duplicated on purpose.
    """
    lx, ly = np.log(x), np.log(y)
    xm, ym = lx.mean(), ly.mean()
    sxx = float(((lx - xm) ** 2).sum())
    if sxx == 0:
        raise NoDataError("scaling fit needs variation in D/n")
    slope = float(((lx - xm) * (ly - ym)).sum() / sxx)
    return slope, float(ym - slope * xm)


def _select(rows: list[dict], scheme: str | None, need_positive: str) -> tuple[list[dict], int]:
    used, skipped = [], 0
    for r in rows:
        if scheme is not None and r["scheme"] != scheme:
            continue
        if r["status"] != "ok" or not r[need_positive] or float(r[need_positive]) <= 0:
            skipped += 1
            continue
        used.append(r)
    return used, skipped


def render(spec: FigureSpec) -> RenderInfo:
    """Render one figure; read-only over the CSV, vector (SVG/PDF) output."""
    rows = read_rows(spec.input_csv)
    if spec.kind == "scaling":
        return _render_scaling(spec, rows)
    if spec.kind == "bound-overlay":
        return _render_bound_overlay(spec, rows)
    return _render_delivery(spec, rows)


def _scheme_of(spec: FigureSpec, rows: list[dict]) -> str:
    if spec.scheme is not None:
        return spec.scheme
    schemes = {r["scheme"] for r in rows}
    if len(schemes) != 1:
        raise NoDataError(
            "CSV mixes schemes; pass an explicit scheme filter for this figure kind"
        )
    return schemes.pop()


def _render_scaling(spec: FigureSpec, rows: list[dict]) -> RenderInfo:
    scheme = _scheme_of(spec, rows)
    used, skipped = _select(rows, scheme, "lambda_min")
    if len(used) < 3:
        raise NoDataError(f"scaling figure needs >= 3 usable rows, found {len(used)}")
    ratio = np.array([float(r["D"]) / float(r["n"]) for r in used])
    lam = np.array([float(r["lambda_min"]) for r in used])
    slope, intercept = fit_loglog(ratio, lam)
    ref = REFERENCE_SLOPE[scheme]

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(ratio, lam, "o", ms=5, label=f"measured ({len(used)} runs)"
              + (f", {skipped} skipped" if skipped else ""))
    xs = np.array([ratio.min(), ratio.max()])
    ax.loglog(xs, np.exp(intercept) * xs**slope, "-",
              label=f"fit: slope {slope:.3f}")
    anchor = lam.max() / (ratio.max() ** ref)
    ax.loglog(xs, anchor * xs**ref, "--", color="gray",
              label=f"reference slope {ref:.3f}")
    ax.set_xlabel("D / n")
    ax.set_ylabel("per-pair throughput (bits/slot)")
    ax.set_title(f"{scheme} scheme, slope {slope:.6f}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output_path)
    plt.close(fig)
    return RenderInfo(
        kind="scaling", output_path=spec.output_path, rows_used=len(used),
        rows_skipped=skipped, slope=slope, reference_slope=ref,
        series={"ratio": ratio.tolist(), "lambda_min": lam.tolist()},
    )


def _render_bound_overlay(spec: FigureSpec, rows: list[dict]) -> RenderInfo:
    used, skipped = _select(rows, spec.scheme, "lambda_mean")
    if not used:
        raise NoDataError("no usable rows after filtering")
    ratio = np.array([float(r["D"]) / float(r["n"]) for r in used])
    lam = np.array([float(r["lambda_mean"]) for r in used])
    bound = np.array([float(r["bound_per_pair"]) for r in used])
    order = np.argsort(ratio)

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(ratio[order], lam[order], "o", ms=5,
              label=f"measured mean ({len(used)} runs)"
              + (f", {skipped} skipped" if skipped else ""))
    ax.loglog(ratio[order], bound[order], "s--", ms=4,
              label="theorem bound per pair")
    ax.set_xlabel("D / n")
    ax.set_ylabel("bits/slot per pair")
    ax.set_title("measured throughput vs upper bound")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output_path)
    plt.close(fig)
    return RenderInfo(
        kind="bound-overlay", output_path=spec.output_path, rows_used=len(used),
        rows_skipped=skipped,
        series={"ratio": ratio.tolist(), "lambda_mean": lam.tolist(),
                "bound_per_pair": bound.tolist()},
    )


def _render_delivery(spec: FigureSpec, rows: list[dict]) -> RenderInfo:
    used, skipped = _select(rows, spec.scheme, "delivery_prob")
    if not used:
        raise NoDataError("no usable rows after filtering")
    by_scheme_n: dict[tuple[str, int], list[float]] = {}
    for r in used:
        by_scheme_n.setdefault((r["scheme"], int(r["n"])), []).append(
            float(r["delivery_prob"])
        )
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    series = {}
    for scheme in sorted({s for s, _ in by_scheme_n}):
        ns = sorted(n for s, n in by_scheme_n if s == scheme)
        means = [float(np.mean(by_scheme_n[(scheme, n)])) for n in ns]
        ax.semilogx(ns, means, "o-", label=f"{scheme}"
                    + (f" ({skipped} rows skipped)" if skipped else ""))
        series[scheme] = {"n": ns, "delivery": means}
    ax.set_xlabel("n")
    ax.set_ylabel("delivery probability")
    ax.set_ylim(0.0, 1.05)
    ax.axhline(0.9, color="gray", ls=":", lw=1)
    ax.set_title("within-deadline delivery probability")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output_path)
    plt.close(fig)
    return RenderInfo(
        kind="delivery", output_path=spec.output_path, rows_used=len(used),
        rows_skipped=skipped, series=series,
    )
