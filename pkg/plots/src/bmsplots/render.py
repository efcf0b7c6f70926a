"""Render equilibrium-premium sweep CSVs as two-panel figures.

The input is the sweep CSV the pricing CLI writes: one row per grid point,
with the swept parameter name in ``param``, its value in ``param_value``, the
equilibrium class-1 premiums in ``theta1_star``/``theta2_star`` and their
difference in ``diff``.  The left panel shows both premiums against the swept
parameter, the right panel the premium difference.

Invocation: ``bms-render --csv PATH --x {k1,k2,M} --out PATH.png``;
exit code 0 on success, 1 on any input problem (message on stderr).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

REQUIRED_COLUMNS = ("param", "param_value", "theta1_star", "theta2_star", "diff")
X_CHOICES = ("k1", "k2", "M")

X_LABELS = {
    "k1": "price sensitivity k1",
    "k2": "preference for company 1 (k2)",
    "M": "premium cap M",
}


class RenderError(Exception):
    """Unusable input: missing file, missing column, malformed rows."""


@dataclass(frozen=True)
class SweepSeries:
    """The plotted data of one sweep."""

    x: tuple[float, ...]
    theta1: tuple[float, ...]
    theta2: tuple[float, ...]
    diff: tuple[float, ...]


@dataclass(frozen=True)
class FigureSpec:
    csv_path: Path
    x_name: str
    out_path: Path

    def __post_init__(self) -> None:
        if self.x_name not in X_CHOICES:
            raise RenderError(
                f"x column must be one of {', '.join(X_CHOICES)}, got {self.x_name!r}"
            )


def load_series(csv_path: Path, x_name: str) -> SweepSeries:
    """Read and validate the sweep CSV; never modifies the file."""
    if not csv_path.is_file():
        raise RenderError(f"CSV file not found: {csv_path}")
    with open(csv_path, newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [name for name in REQUIRED_COLUMNS if name not in header]
        if missing:
            raise RenderError(
                f"{csv_path}: missing required column(s): {', '.join(missing)}"
            )
        rows = list(reader)
    if not rows:
        raise RenderError(f"{csv_path}: no data rows")
    mismatched = {row["param"] for row in rows if row["param"] != x_name}
    if mismatched:
        raise RenderError(
            f"{csv_path}: rows sweep {', '.join(sorted(mismatched))!s}, "
            f"not the requested {x_name!r}"
        )
    try:
        x = tuple(float(row["param_value"]) for row in rows)
        theta1 = tuple(float(row["theta1_star"]) for row in rows)
        theta2 = tuple(float(row["theta2_star"]) for row in rows)
        diff = tuple(float(row["diff"]) for row in rows)
    except ValueError as exc:
        raise RenderError(f"{csv_path}: non-numeric cell: {exc}") from exc
    return SweepSeries(x=x, theta1=theta1, theta2=theta2, diff=diff)


def render_figure(spec: FigureSpec) -> SweepSeries:
    """Write the two-panel figure; returns the data that was plotted."""
    series = load_series(spec.csv_path, spec.x_name)
    x_label = X_LABELS[spec.x_name]

    fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4.2))
    left.plot(series.x, series.theta1, color="tab:blue", lw=1.6,
              label=r"$\theta_1^*$")
    left.plot(series.x, series.theta2, color="tab:red", lw=1.6, ls="--",
              label=r"$\theta_2^*$")
    left.set_xlabel(x_label)
    left.set_ylabel("equilibrium premium")
    left.legend()
    left.grid(alpha=0.3)

    right.plot(series.x, series.diff, color="tab:green", lw=1.6)
    right.axhline(0.0, color="gray", lw=0.8)
    right.set_xlabel(x_label)
    right.set_ylabel(r"$\theta_1^* - \theta_2^*$")
    right.grid(alpha=0.3)

    fig.suptitle(f"Equilibrium premiums against {x_label}")
    fig.tight_layout()
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out_path, dpi=150)
    plt.close(fig)
    return series


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="bms-render",
        description="Render a premium-sweep CSV as a two-panel figure",
    )
    parser.add_argument("--csv", required=True, help="sweep CSV produced by bmsgame")
    parser.add_argument("--x", required=True, choices=X_CHOICES,
                        help="which parameter the CSV sweeps")
    parser.add_argument("--out", required=True, help="output image path (.png)")
    args = parser.parse_args(argv)
    try:
        render_figure(FigureSpec(Path(args.csv), args.x, Path(args.out)))
    except RenderError as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 1
    return 0


def console_main() -> None:
    raise SystemExit(main())
