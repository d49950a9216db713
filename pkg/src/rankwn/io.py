"""CSV panels and the versioned result document."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import EmptyInput, ParseError, TiesWarning
from .harness import McTable
from .maxtest import TestOutcome
from .ranks import SeriesPanel

SCHEMA_VERSION = "1"


def parse_csv(text: str, has_header: bool = False) -> SeriesPanel:
    """Parse a rectangular numeric CSV (rows are time points).

    Blank lines are skipped.  Line and column numbers in errors are
    1-based and refer to the raw text.
    """
    rows = []
    names = None
    width = None
    for lineno, record in enumerate(csv.reader(text.splitlines()), start=1):
        if not record or all(not cell.strip() for cell in record):
            continue
        if has_header and names is None:
            names = tuple(cell.strip() for cell in record)
            width = len(names)
            continue
        if width is None:
            width = len(record)
        elif len(record) != width:
            raise ParseError(f"expected {width} fields, found {len(record)}", line=lineno)
        vals = []
        for col, cell in enumerate(record, start=1):
            try:
                vals.append(float(cell))
            except ValueError:
                raise ParseError(f"non-numeric cell {cell.strip()!r}", line=lineno, column=col) from None
        rows.append(vals)
    if not rows:
        raise EmptyInput("no data rows")
    try:
        panel = SeriesPanel(np.array(rows), names)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if panel.has_ties():
        warnings.warn("input has tied values; ranks broken by time order", TiesWarning, stacklevel=2)
    return panel


def load_csv(path: Union[str, Path], has_header: bool = False) -> SeriesPanel:
    """Read a panel from ``path``; see :func:`parse_csv`."""
    return parse_csv(Path(path).read_text(encoding="utf-8"), has_header)


def format_csv(panel: SeriesPanel) -> str:
    """CSV text with shortest round-trip float representations."""
    lines = []
    if panel.names is not None:
        lines.append(",".join(panel.names))
    for row in panel.data:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(panel: SeriesPanel, path: Union[str, Path]) -> None:
    Path(path).write_text(format_csv(panel), encoding="utf-8")


def jitter(panel: SeriesPanel, seed: int, scale: float = 1e-9) -> SeriesPanel:
    """Add seeded uniform noise of size ``scale * range`` per column to break ties."""
    rng = np.random.default_rng(seed)
    span = np.ptp(panel.data, axis=0)
    span = np.where(span > 0, span, 1.0)
    noise = rng.uniform(-0.5, 0.5, size=panel.data.shape) * scale * span
    return SeriesPanel(panel.data + noise, panel.names)


def _outcome_to_dict(o: TestOutcome) -> dict:
    d = asdict(o)
    d["argmax"] = list(o.argmax)
    if o.argmax_names is not None:
        d["argmax_names"] = list(o.argmax_names)
    return d


def _outcome_from_dict(d: dict) -> TestOutcome:
    d = dict(d)
    d["argmax"] = tuple(d["argmax"])
    if d.get("argmax_names") is not None:
        d["argmax_names"] = tuple(d["argmax_names"])
    return TestOutcome(**d)


@dataclass
class ResultDocument:
    """Everything a command produced, in a self-describing form.

    ``kind`` is ``"test"`` (``outcome`` is a TestOutcome) or ``"table"``
    (``outcome`` is a McTable).
    """

    kind: str
    command: dict
    outcome: Union[TestOutcome, McTable]
    warnings: list = field(default_factory=list)
    timing: float = 0.0
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        if self.kind == "test":
            outcome = _outcome_to_dict(self.outcome)
        else:
            outcome = self.outcome.to_dict()
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "command": self.command,
            "outcome": outcome,
            "warnings": list(self.warnings),
            "timing": self.timing,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ResultDocument":
        kind = d["kind"]
        if kind == "test":
            outcome = _outcome_from_dict(d["outcome"])
        else:
            outcome = McTable.from_dict(d["outcome"])
        return cls(kind, d["command"], outcome, list(d.get("warnings", [])), d.get("timing", 0.0), d["schema_version"])

    @classmethod
    def from_json(cls, text: str) -> "ResultDocument":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """Flat projection: the table rows, or a single outcome row."""
        if self.kind == "table":
            return self.outcome.to_csv()
        o = self.outcome
        i, j, k = o.argmax
        fields = ["method", "calibration", "statistic", "threshold", "p_value", "reject", "alpha", "i", "j", "k"]
        values = [o.method, o.calibration, o.statistic, o.threshold, o.p_value, o.reject, o.alpha, i, j, k]
        if o.argmax_names is not None:
            fields += ["name_i", "name_j"]
            values += list(o.argmax_names[:2])
        return ",".join(fields) + "\n" + ",".join(str(v) for v in values) + "\n"

