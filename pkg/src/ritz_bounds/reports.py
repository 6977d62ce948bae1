"""Report documents and their text, CSV and JSON renderings.

A report has metadata, an ordered set of named sections and free-text
notes. A section is either a mapping of scalar fields or a table given as
a list of rows (mappings with the same keys). Floats are rounded to 12
significant digits; there are no timestamps, so equal inputs give
byte-identical output.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

from . import __version__

SCHEMA_VERSION = "report-v1"
SIGNIFICANT_DIGITS = 12
STATUSES = ("ok", "not_applicable", "failed")

Section = Union[dict[str, Any], list[dict[str, Any]]]


def round_significant(x: float) -> Union[float, str]:
    """Round to 12 significant digits; non-finite values become strings."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.{SIGNIFICANT_DIGITS}g}")


def clean(value: Any) -> Any:
    """Convert numpy values and floats into JSON-ready, rounded values."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return round_significant(float(value))
    if isinstance(value, np.ndarray):
        return [clean(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    return value


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    if isinstance(value, list):
        return " ".join(_cell(v) for v in value)
    return str(value)


@dataclass
class ReportDocument:
    """A certified report for one command run."""

    command: str
    metadata: dict[str, Any] = field(default_factory=dict)
    sections: dict[str, Section] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    status: str = "ok"

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}, got {self.status!r}")

    def add_section(self, name: str, content: Section) -> None:
        self.sections[name] = content

    def add_note(self, note: str) -> None:
        if note not in self.notes:
            self.notes.append(note)

    def to_dict(self) -> dict[str, Any]:
        metadata = {"tool_version": __version__, **self.metadata}
        return {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "status": self.status,
            "metadata": clean(metadata),
            "sections": clean(self.sections),
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        data = self.to_dict()
        out = [f"ritz-bounds {data['command']} ({data['status']})", ""]
        out.append("metadata:")
        for key, value in data["metadata"].items():
            out.append(f"  {key}: {_cell(value)}")
        for name, content in data["sections"].items():
            out.append("")
            out.append(f"[{name}]")
            if isinstance(content, list):
                out.extend(_text_table(content))
            else:
                for key, value in content.items():
                    out.append(f"  {key}: {_cell(value)}")
        if data["notes"]:
            out.append("")
            out.append("notes:")
            out.extend(f"  - {note}" for note in data["notes"])
        return "\n".join(out) + "\n"

    def to_csv(self) -> str:
        data = self.to_dict()
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["# metadata"])
        writer.writerow(["key", "value"])
        for key, value in data["metadata"].items():
            writer.writerow([key, _cell(value)])
        for name, content in data["sections"].items():
            writer.writerow([f"# {name}"])
            if isinstance(content, list):
                if content:
                    headers = list(content[0].keys())
                    writer.writerow(headers)
                    for row in content:
                        writer.writerow([_cell(row.get(h)) for h in headers])
            else:
                writer.writerow(["key", "value"])
                for key, value in content.items():
                    writer.writerow([key, _cell(value)])
        if data["notes"]:
            writer.writerow(["# notes"])
            for note in data["notes"]:
                writer.writerow([note])
        return buffer.getvalue()

    def render(self, output_format: str) -> str:
        renderers = {"text": self.to_text, "csv": self.to_csv, "json": self.to_json}
        if output_format not in renderers:
            raise ValueError(f"unknown output format {output_format!r}")
        return renderers[output_format]()


def _text_table(rows: list[dict[str, Any]]) -> list[str]:
    if not rows:
        return ["  (empty)"]
    headers = list(rows[0].keys())
    cells = [[_cell(row.get(h)) for h in headers] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) for i, h in enumerate(headers)]
    lines = ["  " + "  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for r in cells:
        lines.append("  " + "  ".join(c.ljust(w) for c, w in zip(r, widths)))
    return [line.rstrip() for line in lines]
