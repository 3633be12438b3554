"""Report emission: per-suite CSVs, the combined report, summary, figures.

Files are written with "\n" line endings and repr-exact float formatting so
one (config, seed) always produces byte-identical CSVs.  Figures are
rendered strictly from the rows parsed back out of the written CSVs, never
from in-memory state, so a plot can always be reproduced from the report
directory alone.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

from .suites import AlgebraRow, RotationRow, TransformRow


@dataclass(frozen=True)
class ReportRow:
    """One line of the combined report."""

    suite: str
    case: str
    metric: str
    value: float
    tolerance: float
    passed: bool


def _fnum(x: float) -> str:
    return format(float(x), ".17g")


def _fcomplex(z: complex) -> str:
    z = complex(z)
    return f"{format(z.real, '.17g')}{'+' if z.imag >= 0 else '-'}{format(abs(z.imag), '.17g')}j"


def _write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def combined_rows(
    rotation: Sequence[RotationRow], transform: Sequence[TransformRow], algebra: Sequence[AlgebraRow]
) -> list[ReportRow]:
    out: list[ReportRow] = []
    for r in rotation:
        out.append(ReportRow("rotation", r.case, "zscore", r.zscore, 3.0, r.passed))
    for t in transform:
        out.append(ReportRow("transform", t.case, t.check, t.residual, t.tolerance, t.passed))
    for a in algebra:
        out.append(ReportRow("algebra", f"{a.law}:{a.sample_id}", "residual", a.residual, a.tolerance, a.passed))
    return out


def write_report(out_dir: str, rows: Sequence[ReportRow]) -> str:
    path = os.path.join(out_dir, "report.csv")
    _write_csv(
        path,
        ["suite", "case", "metric", "value", "tolerance", "pass"],
        ([r.suite, r.case, r.metric, _fnum(r.value), _fnum(r.tolerance), str(r.passed)] for r in rows),
    )
    return path


def write_rotation_csv(out_dir: str, rows: Sequence[RotationRow]) -> str:
    path = os.path.join(out_dir, "rotation.csv")
    _write_csv(
        path,
        ["case", "estimate_a", "stderr_a", "estimate_b", "stderr_b", "zscore", "pass"],
        (
            [r.case, _fcomplex(r.estimate_a), _fnum(r.stderr_a), _fcomplex(r.estimate_b), _fnum(r.stderr_b), _fnum(r.zscore), str(r.passed)]
            for r in rows
        ),
    )
    return path


def write_transform_csv(out_dir: str, rows: Sequence[TransformRow]) -> str:
    path = os.path.join(out_dir, "transform.csv")
    _write_csv(
        path,
        ["case", "check", "residual", "tolerance", "pass"],
        ([r.case, r.check, _fnum(r.residual), _fnum(r.tolerance), str(r.passed)] for r in rows),
    )
    return path


def write_algebra_csv(out_dir: str, rows: Sequence[AlgebraRow]) -> str:
    path = os.path.join(out_dir, "algebra.csv")
    _write_csv(
        path,
        ["law", "sample_id", "residual", "pass"],
        ([r.law, str(r.sample_id), _fnum(r.residual), str(r.passed)] for r in rows),
    )
    return path


def write_summary(out_dir: str, rows: Sequence[ReportRow]) -> str:
    path = os.path.join(out_dir, "summary.txt")
    lines = []
    for suite in ("rotation", "transform", "algebra"):
        sr = [r for r in rows if r.suite == suite]
        if not sr:
            continue
        failed = [r for r in sr if not r.passed]
        lines.append(f"{suite}: {len(sr) - len(failed)}/{len(sr)} rows passed")
        for r in failed:
            lines.append(f"  FAIL {r.case} {r.metric}={_fnum(r.value)} tolerance={_fnum(r.tolerance)}")
    total_failed = sum(not r.passed for r in rows)
    lines.append(f"overall: {'PASS' if total_failed == 0 else f'FAIL ({total_failed} rows)'}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


# -- figures --------------------------------------------------------------------


def _read_csv(path: str) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def render_figures(out_dir: str) -> list[str]:
    """Render PNG figures from the CSVs already written in out_dir."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig_dir = os.path.join(out_dir, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    written: list[str] = []

    rot_path = os.path.join(out_dir, "rotation.csv")
    if os.path.exists(rot_path):
        rows = _read_csv(rot_path)
        if rows:
            z = [float(r["zscore"]) for r in rows]
            fig, ax = plt.subplots(figsize=(max(6, len(z) * 0.18), 4))
            colors = ["tab:blue" if r["pass"] == "True" else "tab:red" for r in rows]
            ax.bar(range(len(z)), z, color=colors)
            ax.axhline(3.0, color="black", linestyle="--", linewidth=1, label="3 sigma")
            ax.set_xlabel("row")
            ax.set_ylabel("z-score")
            ax.set_title("rotation identities: two-route agreement")
            ax.legend()
            fig.tight_layout()
            p = os.path.join(fig_dir, "rotation_zscores.png")
            fig.savefig(p, dpi=110)
            plt.close(fig)
            written.append(p)

    tr_path = os.path.join(out_dir, "transform.csv")
    if os.path.exists(tr_path):
        rows = _read_csv(tr_path)
        if rows:
            import math

            fig, ax = plt.subplots(figsize=(max(6, len(rows) * 0.16), 4.5))
            xs = range(len(rows))
            vals = [math.log10(max(float(r["residual"]), 1e-18)) for r in rows]
            tols = [math.log10(max(float(r["tolerance"]), 1e-18)) for r in rows]
            colors = ["tab:blue" if r["pass"] == "True" else "tab:red" for r in rows]
            ax.scatter(xs, vals, c=colors, s=14, label="residual")
            ax.plot(xs, tols, color="black", linewidth=1, linestyle="--", label="tolerance")
            ax.set_xlabel("row")
            ax.set_ylabel("log10 value")
            ax.set_title("transform checks: residuals vs tolerances")
            ax.legend()
            fig.tight_layout()
            p = os.path.join(fig_dir, "transform_residuals.png")
            fig.savefig(p, dpi=110)
            plt.close(fig)
            written.append(p)

    al_path = os.path.join(out_dir, "algebra.csv")
    if os.path.exists(al_path):
        rows = _read_csv(al_path)
        if rows:
            laws = sorted({r["law"] for r in rows})
            passed = [sum(1 for r in rows if r["law"] == law and r["pass"] == "True") for law in laws]
            failed = [sum(1 for r in rows if r["law"] == law and r["pass"] != "True") for law in laws]
            fig, ax = plt.subplots(figsize=(max(6, len(laws) * 0.9), 4.5))
            ax.bar(laws, passed, color="tab:green", label="passed")
            if any(failed):
                ax.bar(laws, failed, bottom=passed, color="tab:red", label="failed")
            ax.set_ylabel("rows")
            ax.set_title("algebra laws: row counts by outcome")
            ax.tick_params(axis="x", rotation=45)
            for label in ax.get_xticklabels():
                label.set_horizontalalignment("right")
            ax.legend()
            fig.tight_layout()
            p = os.path.join(fig_dir, "algebra_laws.png")
            fig.savefig(p, dpi=110)
            plt.close(fig)
            written.append(p)

    return written
