"""Text tables and the grouped-bar SVG built from factor JSON documents."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from .errors import FormatError

VARIABLE_LABELS = {
    "time_ns": "Time taken(nano second)",
    "mem_consumed_bits": "Memory Consumed(bits)",
    "total_mem_kb": "Total memory used(KB)",
}

TECHNIQUE_LABELS = {"heap": "Heap", "treap": "Treap", "shell": "Shell"}
TECHNIQUE_COLORS = {"heap": "#4e79a7", "treap": "#f28e2b", "shell": "#59a14f"}
FALLBACK_COLORS = ("#e15759", "#76b7b2", "#edc948", "#b07aa1")

REQUIRED_KEYS = (
    "eigenvalues",
    "percent",
    "cumulative_percent",
    "rotation_ssl",
    "loadings",
    "pattern",
    "score_coefficients",
    "communalities",
    "bartlett",
    "kmo",
    "descriptives",
)


def fmt(x: float) -> str:
    """Three decimals; tiny non-zero values switch to scientific notation."""
    x = float(x)
    if x != 0.0 and abs(x) < 5e-4:
        return f"{x:.3E}"
    return f"{x:.3f}"


@dataclass
class Table:
    title: str
    columns: list[str]
    rows: list[tuple[str, list]]
    notes: list[str] = field(default_factory=list)

    def render(self) -> str:
        cells = [[label] + [c if isinstance(c, str) else fmt(c) for c in vals] for label, vals in self.rows]
        header = [""] + self.columns
        widths = [max(len(r[i]) for r in cells + [header]) for i in range(len(header))]
        lines = [self.title, "-" * len(self.title)]
        lines.append("  ".join(h.ljust(widths[0]) if i == 0 else h.rjust(widths[i]) for i, h in enumerate(header)))
        for row in cells:
            lines.append("  ".join(c.ljust(widths[0]) if i == 0 else c.rjust(widths[i]) for i, c in enumerate(row)))
        lines.extend(self.notes)
        return "\n".join(lines)


@dataclass
class ReportBundle:
    techniques: list[str]
    tables: dict[str, list[Table]]
    # chart[j] = (component index, [(technique, percent), ...])
    chart: list[tuple[int, list[tuple[str, float]]]]

    def render_text(self) -> str:
        parts = []
        for t in self.techniques:
            banner = f"== {TECHNIQUE_LABELS.get(t, t)} =="
            parts.append(banner)
            parts.extend(tab.render() + "\n" for tab in self.tables[t])
        parts.append("== Percentage contribution by component ==")
        cols = [TECHNIQUE_LABELS.get(t, t) for t in self.techniques]
        rows = []
        for idx, bars in self.chart:
            by = dict(bars)
            rows.append((f"Component {idx}", [by.get(t, "") for t in self.techniques]))
        parts.append(Table("% of Variance", cols, rows).render())
        return "\n".join(parts) + "\n"

    def render_svg(self) -> str:
        return grouped_bar_svg(self.chart, self.techniques)


def _label(var: str) -> str:
    return VARIABLE_LABELS.get(var, var)


def _check_finite(name: str, values) -> None:
    flat = []

    def walk(v):
        if isinstance(v, (list, tuple)):
            for x in v:
                walk(x)
        else:
            flat.append(v)

    walk(values)
    for v in flat:
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise FormatError(f"{name} holds a non-finite or non-numeric value {v!r}")


def _matrix(doc: dict, key: str, rows: int) -> list[list[float]]:
    m = doc[key]
    if not isinstance(m, list) or len(m) != rows or not all(isinstance(r, list) for r in m):
        raise FormatError(f"{key} must be a {rows}-row matrix")
    _check_finite(key, m)
    return m


def _vector(doc: dict, key: str, length: Optional[int] = None) -> list[float]:
    v = doc[key]
    if not isinstance(v, list) or (length is not None and len(v) != length):
        raise FormatError(f"{key} must be a list of length {length}")
    _check_finite(key, v)
    return v


def technique_tables(doc: dict) -> list[Table]:
    """Tables for one technique, laid out like the usual PCA output."""
    missing = [k for k in REQUIRED_KEYS if k not in doc]
    if missing:
        raise FormatError(f"factors document lacks keys {missing}")
    try:
        variables = doc.get("variables") or list(VARIABLE_LABELS)
        p = len(variables)
        labels = [_label(v) for v in variables]
        evals = _vector(doc, "eigenvalues", p)
        pct = _vector(doc, "percent", p)
        cum = _vector(doc, "cumulative_percent", p)
        ssl = _vector(doc, "rotation_ssl")
        m = len(ssl)
        loads = _matrix(doc, "loadings", p)
        pattern = _matrix(doc, "pattern", p)
        scores = _matrix(doc, "score_coefficients", p)
        desc = doc["descriptives"]
        mean = _vector(desc, "mean", p)
        sd = _vector(desc, "sd", p)
        comm = doc["communalities"]
        initial = _vector(comm, "initial", p)
        extraction = _vector(comm, "extraction", p)
        bart = doc["bartlett"]
        _check_finite("bartlett", [bart["chi2"], bart["df"], bart["p"]])
        k = doc["kmo"]
        kmo_overall = k["overall"] if isinstance(k, dict) else k
        _check_finite("kmo", [kmo_overall])
    except (KeyError, TypeError) as e:
        raise FormatError(f"malformed factors document: {e}") from None

    comps = [str(j + 1) for j in range(m)]
    n_obs = desc.get("n", doc.get("n", ""))
    tables = [
        Table(
            "Descriptive Statistics",
            ["Mean", "Std. Deviation", "Analysis N"],
            [(labels[i], [mean[i], sd[i], str(n_obs)]) for i in range(p)],
        )
    ]
    if "correlation" in doc:
        corr = _matrix(doc, "correlation", p)
        tables.append(Table("Correlation Matrix", labels, [(labels[i], corr[i]) for i in range(p)]))
    kmo_notes = []
    if isinstance(k, dict) and k.get("degenerate"):
        kmo_notes.append("KMO undefined (no off-diagonal correlation); reported as 0.")
    tables.append(
        Table(
            "KMO and Bartlett's Test",
            ["Value"],
            [
                ("Kaiser-Meyer-Olkin Measure of Sampling Adequacy", [kmo_overall]),
                ("Bartlett's Test of Sphericity  Approx. Chi-Square", [bart["chi2"]]),
                ("                               df", [str(int(bart["df"]))]),
                ("                               Sig.", [bart["p"]]),
            ],
            kmo_notes,
        )
    )
    tables.append(
        Table(
            "Communalities",
            ["Initial", "Extraction"],
            [(labels[i], [initial[i], extraction[i]]) for i in range(p)],
            ["Extraction Method: Principal Component Analysis."],
        )
    )
    tables.append(
        Table(
            "Component Matrix",
            comps,
            [(labels[i], loads[i][:m]) for i in range(p)],
            [f"{m} component(s) extracted."],
        )
    )
    tables.append(
        Table(
            "Pattern Matrix",
            comps,
            [(labels[i], pattern[i]) for i in range(p)],
            [f"Rotation Method: Promax with Kaiser Normalization (kappa={doc.get('kappa', 4)})."],
        )
    )
    score_notes = ["Component Scores: regression method."]
    if doc.get("score_mode") == "paper_literal":
        score_notes.append("Standard scores use the literal 'A + (x + mean)/sd' form; contributions are not centred.")
    tables.append(
        Table(
            "Component Score Coefficient Matrix",
            comps,
            [(labels[i], scores[i]) for i in range(p)],
            score_notes,
        )
    )
    tables.append(
        Table(
            "Total Variance Explained",
            ["Total", "% of Variance", "Cumulative %", "Rotation SS Loadings"],
            [(str(j + 1), [evals[j], pct[j], cum[j], ssl[j] if j < m else ""]) for j in range(p)],
        )
    )
    return tables


def build_report(docs: Sequence[dict]) -> ReportBundle:
    if not docs:
        raise FormatError("no factors documents to report")
    techniques = []
    tables = {}
    percents = {}
    for i, doc in enumerate(docs):
        if not isinstance(doc, dict):
            raise FormatError("factors document must be a JSON object")
        t = str(doc.get("technique") or f"input{i + 1}")
        techniques.append(t)
        tables[t] = technique_tables(doc)
        percents[t] = doc["percent"]
    p = max(len(v) for v in percents.values())
    chart = [(j + 1, [(t, float(percents[t][j])) for t in techniques if j < len(percents[t])]) for j in range(p)]
    return ReportBundle(techniques=techniques, tables=tables, chart=chart)


def load_factors(path) -> dict:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, e.lineno, path) from None


def grouped_bar_svg(
    chart,
    techniques: Sequence[str],
    width: int = 640,
    height: int = 400,
    title: str = "Comparison of sorting techniques based on factors considered",
) -> str:
    """Grouped bars: one group per component, one bar per technique, y in percent."""
    ml, mr, mt, mb = 60, 130, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    ymax = 100.0
    colors = {}
    for i, t in enumerate(techniques):
        colors[t] = TECHNIQUE_COLORS.get(t, FALLBACK_COLORS[i % len(FALLBACK_COLORS)])

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    for tick in range(0, 101, 20):
        y = mt + ph - ph * tick / ymax
        out.append(f'<line x1="{ml}" y1="{y:.1f}" x2="{ml + pw}" y2="{y:.1f}" stroke="#dddddd"/>')
        out.append(f'<text x="{ml - 6}" y="{y + 4:.1f}" text-anchor="end">{tick}</text>')
    out.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="#333333"/>')
    out.append(f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="#333333"/>')
    out.append(
        f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {mt + ph / 2:.1f})">% of variance</text>'
    )
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">Component</text>')

    groups = max(len(chart), 1)
    gw = pw / groups
    bw = gw * 0.8 / max(len(techniques), 1)
    for g, (idx, bars) in enumerate(chart):
        gx = ml + g * gw + gw * 0.1
        out.append(f'<text x="{ml + g * gw + gw / 2:.1f}" y="{mt + ph + 18}" text-anchor="middle">{idx}</text>')
        for t, val in bars:
            b = techniques.index(t)
            h = ph * max(0.0, min(val, ymax)) / ymax
            x = gx + b * bw
            out.append(
                f'<rect class="bar" data-technique="{escape(t)}" data-component="{idx}" '
                f'x="{x:.2f}" y="{mt + ph - h:.2f}" width="{bw:.2f}" height="{h:.2f}" '
                f'fill="{colors[t]}"><title>{escape(TECHNIQUE_LABELS.get(t, t))} {idx}: {val:.3f}%</title></rect>'
            )
    for i, t in enumerate(techniques):
        ly = mt + 10 + i * 20
        out.append(f'<rect x="{ml + pw + 15}" y="{ly}" width="12" height="12" fill="{colors[t]}"/>')
        out.append(f'<text x="{ml + pw + 32}" y="{ly + 10}">{escape(TECHNIQUE_LABELS.get(t, t))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
