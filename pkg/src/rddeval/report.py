"""Render evaluation results: score tables, metric reports, PR-curve CSV."""

from __future__ import annotations

from typing import Sequence

from .dataset_io import Country, DamageClass, format_number
from .errors import DuplicateName
from .matching import GroupScore, MetricsReport

__all__ = ["render_table", "emit_curve", "format_report", "report_to_kv"]


def render_table(rows: Sequence[tuple]) -> str:
    """Aligned plain-text comparison table with 4-decimal F1 scores.

    Each row is ``(name, f1)`` or ``(name, f1_test1, f1_test2)``; a missing
    second score renders as ``-``. Names must be unique.
    """
    if not rows:
        raise ValueError("comparison table requires at least one row")
    seen: set[str] = set()
    normalized: list[tuple[str, float, float | None]] = []
    for row in rows:
        name = row[0]
        if name in seen:
            raise DuplicateName(f"duplicate row name {name!r}")
        seen.add(name)
        second = row[2] if len(row) > 2 else None
        normalized.append((name, row[1], second))

    two_scores = any(second is not None for _, _, second in normalized)
    header = ["model", "f1_test1", "f1_test2"] if two_scores else ["model", "f1"]
    body = []
    for name, first, second in normalized:
        cells = [name, f"{first:.4f}"]
        if two_scores:
            cells.append("-" if second is None else f"{second:.4f}")
        body.append(cells)

    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
    lines = []
    for cells in [header] + body:
        name_col = cells[0].ljust(widths[0])
        score_cols = [cells[i].rjust(widths[i]) for i in range(1, len(cells))]
        lines.append("  ".join([name_col] + score_cols).rstrip())
    return "\n".join(lines) + "\n"


def emit_curve(curve: Sequence[tuple[float, float, float, float]]) -> str:
    """CSV export of a threshold sweep, input order preserved.

    Numbers are written in their shortest exact decimal form, so the CSV
    parses back to the identical float sequence.
    """
    lines = ["threshold,precision,recall,f1"]
    for threshold, precision, recall, f1 in curve:
        lines.append(",".join(format_number(v) for v in (threshold, precision, recall, f1)))
    return "\n".join(lines) + "\n"


def _group_line(prefix: str, score: GroupScore) -> str:
    c = score.counts
    return (
        f"{prefix}: tp {c.tp} fp {c.fp} fn {c.fn} "
        f"precision {score.precision:.4f} recall {score.recall:.4f} f1 {score.f1:.4f}"
    )


def format_report(
    report: MetricsReport, per_class: bool = False, per_country: bool = False
) -> str:
    """Line-oriented text rendering of a metrics report (4-decimal scores)."""
    lines = [
        f"tp {report.counts.tp}",
        f"fp {report.counts.fp}",
        f"fn {report.counts.fn}",
        f"precision {report.precision:.4f}",
        f"recall {report.recall:.4f}",
        f"f1 {report.f1:.4f}",
    ]
    if per_class:
        for cls in DamageClass:
            lines.append(_group_line(f"class {cls.value}", report.per_class[cls]))
    if per_country:
        for country in Country:
            lines.append(_group_line(f"country {country.value}", report.per_country[country]))
    return "\n".join(lines) + "\n"


def report_to_kv(report: MetricsReport) -> str:
    """Machine-readable ``key=value`` rendering, full float precision.

    Keys: ``tp``, ``fp``, ``fn``, ``precision``, ``recall``, ``f1``, plus
    ``class.<D-code>.<field>`` and ``country.<name>.<field>`` for every
    class and country.
    """
    pairs: list[tuple[str, str]] = [
        ("tp", str(report.counts.tp)),
        ("fp", str(report.counts.fp)),
        ("fn", str(report.counts.fn)),
        ("precision", format_number(report.precision)),
        ("recall", format_number(report.recall)),
        ("f1", format_number(report.f1)),
    ]

    def extend(prefix: str, score: GroupScore) -> None:
        pairs.extend(
            [
                (f"{prefix}.tp", str(score.counts.tp)),
                (f"{prefix}.fp", str(score.counts.fp)),
                (f"{prefix}.fn", str(score.counts.fn)),
                (f"{prefix}.precision", format_number(score.precision)),
                (f"{prefix}.recall", format_number(score.recall)),
                (f"{prefix}.f1", format_number(score.f1)),
            ]
        )

    for cls in DamageClass:
        extend(f"class.{cls.value}", report.per_class[cls])
    for country in Country:
        extend(f"country.{country.value}", report.per_country[country])
    return "\n".join(f"{key}={value}" for key, value in pairs) + "\n"
