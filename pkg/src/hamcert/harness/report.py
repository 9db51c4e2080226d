"""Experiment reports: JSON emission, flat CSV trial records and aggregates."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from scipy.stats import binomtest

from .. import __version__

CSV_FLOAT_FORMAT = ".17g"


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return (float(ci.low), float(ci.high))


@dataclass
class Check:
    name: str
    passed: bool
    value: float | int | None = None
    threshold: float | int | None = None
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "value": self.value,
                "threshold": self.threshold, "detail": self.detail}


@dataclass
class Report:
    command: str
    config: dict
    fields: list[str]
    records: list[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    version: str = __version__
    timestamp: str = field(
        default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    )

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "version": self.version,
            "timestamp": self.timestamp,
            "config": self.config,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "aggregates": self.aggregates,
            "fields": self.fields,
            "records": self.records,
        }

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.as_dict()), indent=2, sort_keys=False)

    def records_json(self) -> str:
        """Canonical serialization of the per-trial records (the replay-comparable part)."""
        return json.dumps(_jsonable(self.records), sort_keys=True, separators=(",", ":"))

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _jsonable(x.item())
    if hasattr(x, "value") and x.__class__.__module__.startswith("hamcert"):
        return x.value
    return x


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, CSV_FLOAT_FORMAT)
    if v is None:
        return ""
    if isinstance(v, (list, dict, tuple)):
        return json.dumps(_jsonable(v), separators=(",", ":"))
    return str(v)


def emit_csv(report: Report, path: str | Path | None = None) -> str:
    """Flatten the per-trial records to CSV with header ``report.fields``.

    Floats are written with 17 significant digits so they round-trip exactly.
    Returns the CSV text and writes it to ``path`` when given.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.fields)
    for rec in report.records:
        writer.writerow([_cell(_jsonable(rec.get(f))) for f in report.fields])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _parse_cell(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    if s[0] in "[{":
        return json.loads(s)
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def parse_csv(text_or_path) -> tuple[list[str], list[dict]]:
    """Inverse of :func:`emit_csv`: ``(header, records)``."""
    text = text_or_path
    if isinstance(text_or_path, Path) or (isinstance(text_or_path, str) and "\n" not in text_or_path):
        text = Path(text_or_path).read_text(encoding="utf-8")
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    return header, [dict(zip(header, (_parse_cell(c) for c in row))) for row in body]
