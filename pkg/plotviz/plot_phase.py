#!/usr/bin/env python3
"""Phase-diagram renderer for sweep CSV files.

Paints the per-cell classification grid (lambda across, kappa up) and lays
closed-form threshold curves over it.  This is a read-only consumer of the
CSV contract: classifications are taken from the file as-is and nothing is
simulated here.  The curve formulas are local copies kept in lockstep with
the main package; the test suite pins them against its `theory` subcommand
output.
"""

import argparse
import csv
import math
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap
from matplotlib.patches import Patch

SMALL_PRODUCT_BOUND = 0.21

# render order doubles as the numeric level used by the colormap
CLASS_LEVELS = {
    "subcritical_evidence": 0,
    "undetermined": 1,
    "supercritical_evidence": 2,
}
CLASS_COLORS = ("#4878a8", "#d9d9d9", "#c34a44")

REQUIRED_COLUMNS = ("lambda", "kappa", "classification")


def curve_small_product(beta: float, kappa: float) -> float:
    return SMALL_PRODUCT_BOUND / beta


def curve_fast_updates(beta: float, kappa: float) -> float:
    if beta <= 0.5:
        return math.inf
    return kappa / (2.0 * beta - 1.0)


def curve_simple(beta: float, kappa: float) -> float:
    if beta <= 1.0:
        return math.inf
    return (1.0 + 2.0 * kappa) / (beta - 1.0)


def _forest_condition(lam: float, beta: float, kappa: float) -> bool:
    mu = beta * lam / (1.0 + 2.0 * kappa + lam)
    expo = 0.0 if lam + kappa == 0 else beta * lam / (kappa + lam)
    p_any = 1.0 - math.exp(-expo)
    radicand = 1.0 - kappa * (lam + kappa) * p_any / (
        (1.0 + kappa) * (1.0 + 2.0 * kappa + lam))
    if radicand < 0.0:
        return mu > 0.0
    return mu > math.sqrt(radicand)


def curve_forest(beta: float, kappa: float) -> float:
    if beta <= 1.0:
        return math.inf
    hi = curve_simple(beta, kappa) * (1.0 + 1e-9) + 1e-9
    if not _forest_condition(hi, beta, kappa):
        return math.inf
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _forest_condition(mid, beta, kappa):
            hi = mid
        else:
            lo = mid
    return hi


def curve_nonadaptive(beta: float, kappa: float) -> float:
    if beta <= 0.0:
        return math.inf
    return 1.0 / beta


OVERLAY_CURVES = {
    "small_product": curve_small_product,
    "fast_updates": curve_fast_updates,
    "forest": curve_forest,
    "simple": curve_simple,
    "nonadaptive": curve_nonadaptive,
}

OVERLAY_STYLES = {
    "small_product": dict(color="#1a1a1a", linestyle=":"),
    "fast_updates": dict(color="#1a1a1a", linestyle="--"),
    "forest": dict(color="#5e2d8f", linestyle="-"),
    "simple": dict(color="#5e2d8f", linestyle="--"),
    "nonadaptive": dict(color="#1a6b3c", linestyle="-."),
}


def parse_overlays(text):
    """Comma list of curve names; 'all' and 'none' as shorthands."""
    if text is None or text == "all":
        return tuple(OVERLAY_CURVES)
    if text == "" or text == "none":
        return ()
    names = tuple(part.strip() for part in text.split(","))
    for name in names:
        if name not in OVERLAY_CURVES:
            raise ValueError(
                f"unknown overlay: {name!r} (choose from "
                f"{', '.join(OVERLAY_CURVES)})")
    return names


def read_sweep_csv(path):
    """Data rows plus the key=value pairs echoed in the comment preamble."""
    meta = {}
    lines = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            lines.append(line)
    reader = csv.DictReader(lines)
    if reader.fieldnames is None:
        raise ValueError("empty csv: no header row")
    for col in REQUIRED_COLUMNS:
        if col not in reader.fieldnames:
            raise ValueError(f"missing column: {col}")
    rows = list(reader)
    if not rows:
        raise ValueError("no data rows in csv")
    return rows, meta


def build_grid(rows):
    """(lambda values, kappa values, level matrix) from the cell rows."""
    cells = {}
    for row in rows:
        label = row["classification"]
        if label not in CLASS_LEVELS:
            raise ValueError(f"unknown classification: {label!r}")
        cells[(float(row["lambda"]), float(row["kappa"]))] = CLASS_LEVELS[label]
    lams = sorted({lam for lam, _ in cells})
    kappas = sorted({kappa for _, kappa in cells})
    if len(cells) != len(lams) * len(kappas):
        raise ValueError("grid is not rectangular")
    col = {lam: j for j, lam in enumerate(lams)}
    row_ix = {kappa: i for i, kappa in enumerate(kappas)}
    levels = np.empty((len(kappas), len(lams)))
    for (lam, kappa), level in cells.items():
        levels[row_ix[kappa], col[lam]] = level
    return np.asarray(lams), np.asarray(kappas), levels


def _edges(centers):
    # cell boundaries halfway between grid points
    if len(centers) == 1:
        c = float(centers[0])
        return np.array([c - 0.5, c + 0.5])
    mids = 0.5 * (centers[1:] + centers[:-1])
    first = centers[0] - (mids[0] - centers[0])
    last = centers[-1] + (centers[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])


def render_phase_diagram(csv_path, out_path, overlays=()):
    """Write the diagram image; raises before any file is touched."""
    rows, meta = read_sweep_csv(csv_path)
    lams, kappas, levels = build_grid(rows)
    beta = float(meta["beta"]) if "beta" in meta else None
    if overlays and beta is None:
        raise ValueError("overlays need beta in the csv preamble")

    x_edges = _edges(lams)
    y_edges = _edges(kappas)
    fig, ax = plt.subplots(figsize=(7.6, 5.4))
    ax.pcolormesh(x_edges, y_edges, levels,
                  cmap=ListedColormap(CLASS_COLORS), vmin=-0.5, vmax=2.5)

    handles = [Patch(facecolor=c, label=name)
               for name, c in zip(CLASS_LEVELS, CLASS_COLORS)]
    # curves are only defined for nonnegative rates; the padded axis may
    # start slightly below zero
    kappa_fine = np.linspace(max(0.0, y_edges[0]), y_edges[-1], 400)
    for name in overlays:
        curve = OVERLAY_CURVES[name]
        lam_curve = np.array([curve(beta, k) for k in kappa_fine])
        line, = ax.plot(lam_curve, kappa_fine, label=name, linewidth=1.6,
                        **OVERLAY_STYLES[name])
        handles.append(line)

    ax.set_xlim(x_edges[0], x_edges[-1])
    ax.set_ylim(y_edges[0], y_edges[-1])
    ax.set_xlabel("transmission rate lambda")
    ax.set_ylabel("update rate kappa")
    title = "phase diagram" if beta is None else f"phase diagram, beta={beta:g}"
    ax.set_title(title)
    ax.legend(handles=handles, loc="center left", bbox_to_anchor=(1.01, 0.5),
              frameon=False, fontsize=9)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="render a phase diagram from a sweep csv")
    parser.add_argument("--csv", required=True, help="sweep csv path")
    parser.add_argument("--out", required=True, help="image output path")
    parser.add_argument("--overlays", default="all",
                        help="comma list of threshold curves to draw "
                             f"({', '.join(OVERLAY_CURVES)}); "
                             "'all' or 'none'")
    args = parser.parse_args(argv)
    try:
        render_phase_diagram(args.csv, args.out, parse_overlays(args.overlays))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
