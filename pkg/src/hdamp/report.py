"""ScanReport and its on-disk forms: report.json, rows.csv, series CSVs."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class Verdict:
    name: str
    passed: bool
    detail: str = ""

    def to_json(self):
        return {"name": self.name, "pass": self.passed, "detail": self.detail}


@dataclass
class Series:
    x_label: str
    y_label: str
    points: list = field(default_factory=list)

    def to_json(self):
        return {"x_label": self.x_label, "y_label": self.y_label, "points": self.points}


@dataclass
class ScanReport:
    config_echo: dict
    rows: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)

    def verdict(self, name):
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def to_json(self):
        return {
            "config_echo": self.config_echo,
            "provenance": self.provenance,
            "verdicts": [v.to_json() for v in self.verdicts],
            "summary": self.summary,
            "series": {k: s.to_json() for k, s in self.series.items()},
            "rows": self.rows,
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            config_echo=data["config_echo"],
            rows=data.get("rows", []),
            verdicts=[Verdict(v["name"], v["pass"], v.get("detail", "")) for v in data.get("verdicts", [])],
            provenance=data.get("provenance", {}),
            series={k: Series(s["x_label"], s["y_label"], s["points"])
                    for k, s in data.get("series", {}).items()},
            summary=data.get("summary", {}),
        )


def _clean(obj):
    # JSON has no inf/nan; complex numbers go out as [re, im]
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def format_cell(value):
    """Shortest round-trip text for floats; no quoting is ever needed."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_json(report: ScanReport, path):
    text = json.dumps(_clean(report.to_json()), indent=2, allow_nan=False)
    Path(path).write_text(text + "\n")


def write_rows_csv(rows, path):
    columns = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_cell(row.get(c)) for c in columns))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_plot_series(report: ScanReport, which, out_dir=None):
    """Write the named series as a two-column x,y CSV and return its path."""
    if which not in report.series:
        available = ", ".join(sorted(report.series)) or "(none)"
        raise KeyError(f"unknown series {which!r}; available: {available}")
    series = report.series[which]
    out_dir = Path(out_dir if out_dir is not None else report.config_echo.get("output_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{which}.csv"
    lines = [f"{series.x_label},{series.y_label}"]
    lines += [f"{format_cell(float(x))},{format_cell(float(y))}" for x, y in series.points]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def load_report(path) -> ScanReport:
    return ScanReport.from_json(json.loads(Path(path).read_text()))
