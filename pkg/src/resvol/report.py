"""Self-contained static HTML report: series charts, metrics, curve, persistence.

The file embeds inline SVG only (no scripts, no network resources, no
timestamps), so identical inputs render byte-identical reports. Charts are
simple polylines with min/max annotations; the point is inspectability,
not interactivity.
"""

from __future__ import annotations

from html import escape
from pathlib import Path

from .hypsometry import HypsometricCurve
from .metrics import MetricsReport, judge
from .timeseries import CLASS_NAMES, PersistenceMap, SeriesRecord, series_extremes

_W, _H = 720, 240
_PAD = 48


def _scale(values, lo, hi, out_lo, out_hi):
    if hi == lo:
        return [0.5 * (out_lo + out_hi) for _ in values]
    k = (out_hi - out_lo) / (hi - lo)
    return [out_lo + (v - lo) * k for v in values]


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _svg_chart(xs, ys, title: str, y_label: str, annotate_extremes=None) -> str:
    """Polyline chart; xs must be sorted ascending numeric values."""
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    px = _scale(xs, x0, x1, _PAD, _W - _PAD)
    py = _scale(ys, y0, y1, _H - _PAD, _PAD)
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
    parts = [
        f'<svg viewBox="0 0 {_W} {_H}" width="{_W}" height="{_H}" '
        'xmlns="http://www.w3.org/2000/svg" role="img">',
        f'<text x="{_W / 2:.0f}" y="18" text-anchor="middle" '
        f'font-size="13" font-weight="bold">{escape(title)}</text>',
        f'<rect x="{_PAD}" y="{_PAD}" width="{_W - 2 * _PAD}" '
        f'height="{_H - 2 * _PAD}" fill="none" stroke="#999"/>',
        f'<text x="8" y="{_H / 2:.0f}" font-size="11" '
        f'transform="rotate(-90 12 {_H / 2:.0f})" text-anchor="middle">'
        f"{escape(y_label)}</text>",
        f'<text x="{_PAD}" y="{_H - 8}" font-size="10">{_fmt(x0)}</text>',
        f'<text x="{_W - _PAD}" y="{_H - 8}" font-size="10" '
        f'text-anchor="end">{_fmt(x1)}</text>',
        f'<text x="{_PAD - 4}" y="{_H - _PAD}" font-size="10" '
        f'text-anchor="end">{_fmt(y0)}</text>',
        f'<text x="{_PAD - 4}" y="{_PAD + 4}" font-size="10" '
        f'text-anchor="end">{_fmt(y1)}</text>',
        f'<polyline points="{pts}" fill="none" stroke="#1968b3" stroke-width="1.5"/>',
    ]
    if len(xs) <= 200:
        for x, y in zip(px, py):
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2" fill="#1968b3"/>')
    if annotate_extremes:
        for label, (ax, ay), anchor in annotate_extremes:
            sx = _scale([ax], x0, x1, _PAD, _W - _PAD)[0]
            sy = _scale([ay], y0, y1, _H - _PAD, _PAD)[0]
            parts.append(f'<circle cx="{sx:.2f}" cy="{sy:.2f}" r="4" fill="#c22"/>')
            parts.append(
                f'<text x="{sx:.2f}" y="{max(sy - 6, 12):.2f}" font-size="10" '
                f'text-anchor="{anchor}" fill="#c22">{escape(label)}</text>'
            )
    parts.append("</svg>")
    return "".join(parts)


def _metrics_table(rows: list[tuple[str, MetricsReport]]) -> str:
    head = (
        "<tr><th>series</th><th>n</th><th>MAE</th><th>RMSE</th><th>MAPE %</th>"
        "<th>RSR</th><th>R&#178;</th><th>PBIAS %</th><th>verdicts</th></tr>"
    )
    body = []
    for label, rep in rows:
        verdicts = judge(rep)
        vtext = " ".join(
            f"{k}:{'pass' if ok else 'FAIL'}" for k, ok in verdicts.items()
        )
        body.append(
            f"<tr><td>{escape(label)}</td><td>{rep.n}</td>"
            f"<td>{_fmt(rep.mae)}</td><td>{_fmt(rep.rmse)}</td>"
            f"<td>{_fmt(rep.mape)}</td><td>{_fmt(rep.rsr)}</td>"
            f"<td>{_fmt(rep.r2)}</td><td>{_fmt(rep.pbias)}</td>"
            f"<td>{escape(vtext)}</td></tr>"
        )
    return f"<table>{head}{''.join(body)}</table>"


def render_report(
    series: list[SeriesRecord],
    metrics_rows: list[tuple[str, MetricsReport]] | None = None,
    curve: HypsometricCurve | None = None,
    persistence_maps: list[PersistenceMap] | None = None,
    title: str = "Reservoir monitoring report",
) -> str:
    """Render the report HTML; sections without data are omitted."""
    if not series:
        raise ValueError("report needs at least a series")
    chunks = [
        "<!DOCTYPE html>",
        '<html lang="en"><head><meta charset="utf-8">',
        f"<title>{escape(title)}</title>",
        "<style>body{font-family:sans-serif;margin:24px;max-width:860px}"
        "table{border-collapse:collapse}td,th{border:1px solid #aaa;"
        "padding:4px 8px;font-size:13px}h2{margin-top:28px}</style>",
        "</head><body>",
        f"<h1>{escape(title)}</h1>",
    ]

    ordinals = [r.date.toordinal() for r in series]
    volumes = [r.volume_m3 for r in series]
    fractions = [r.surface_fraction for r in series]
    lo_rec, hi_rec = series_extremes(series)
    annotations = [
        (
            f"max {_fmt(hi_rec.volume_m3)} m³ on {hi_rec.date.isoformat()}",
            (hi_rec.date.toordinal(), hi_rec.volume_m3),
            "middle",
        ),
        (
            f"min {_fmt(lo_rec.volume_m3)} m³ on {lo_rec.date.isoformat()}",
            (lo_rec.date.toordinal(), lo_rec.volume_m3),
            "middle",
        ),
    ]
    chunks.append("<h2>Storage volume</h2>")
    chunks.append(
        _svg_chart(ordinals, volumes, "Estimated volume over time", "m^3", annotations)
    )
    chunks.append(
        f"<p>{len(series)} observations from {series[0].date.isoformat()} to "
        f"{series[-1].date.isoformat()}; volume min {_fmt(lo_rec.volume_m3)} m&#179; "
        f"({lo_rec.date.isoformat()}), max {_fmt(hi_rec.volume_m3)} m&#179; "
        f"({hi_rec.date.isoformat()}).</p>"
    )
    chunks.append("<h2>Surface fraction</h2>")
    chunks.append(
        _svg_chart(ordinals, fractions, "Segmented surface fraction", "fraction")
    )

    if metrics_rows:
        chunks.append("<h2>Accuracy metrics</h2>")
        chunks.append(_metrics_table(metrics_rows))

    if curve is not None:
        chunks.append("<h2>Hypsometric curve</h2>")
        chunks.append(
            _svg_chart(
                [float(v) for v in curve.levels],
                [float(v) for v in curve.volumes],
                "Level to volume",
                "m^3",
            )
        )

    if persistence_maps:
        chunks.append("<h2>Water persistence</h2>")
        head = "<tr><th>year</th>" + "".join(
            f"<th>{escape(name)}</th>" for name in CLASS_NAMES.values()
        ) + "</tr>"
        rows = []
        for pm in persistence_maps:
            counts = pm.class_counts()
            rows.append(
                f"<tr><td>{pm.year}</td>"
                + "".join(f"<td>{counts[name]}</td>" for name in CLASS_NAMES.values())
                + "</tr>"
            )
        chunks.append(f"<table>{head}{''.join(rows)}</table>")

    chunks.append("</body></html>")
    return "\n".join(chunks)


def write_report(path: str | Path, html: str) -> None:
    Path(path).write_text(html, encoding="utf-8", newline="\n")
