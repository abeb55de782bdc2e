"""Deterministic report records and writers.

CSV uses '.' decimals, LF line endings and shortest round-trip float
formatting, so identical configurations produce byte-identical files.
Files are written atomically (temp file + rename).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if v is None:
        return ""
    return str(v)


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, default=_jsonable) + "\n"


def _jsonable(v):
    try:
        import numpy as np
        if isinstance(v, np.ndarray):
            return v.tolist()
        if isinstance(v, (np.floating, np.integer, np.bool_)):
            return v.item()
    except ImportError:  # pragma: no cover
        pass
    if isinstance(v, tuple):
        return list(v)
    raise TypeError(f"not JSON serialisable: {type(v)!r}")


def atomic_write_text(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def params_hash(params: dict) -> str:
    blob = json.dumps(params, sort_keys=True, default=_jsonable)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


@dataclass
class ExperimentReport:
    """Tabular record of an experiment run, with full metadata."""

    name: str
    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, **kw) -> None:
        self.rows.append([kw.get(c) for c in self.columns])

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def csv_text(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(format_value(v) for v in row))
        return "\n".join(lines) + "\n"

    def json_text(self) -> str:
        return canonical_json({
            "name": self.name,
            "columns": list(self.columns),
            "rows": self.rows,
            "metadata": self.metadata,
        })

    def file_stem(self) -> str:
        return f"{self.name}-{params_hash(self.metadata.get('params', {}))}"

    def write(self, outdir) -> tuple[Path, Path]:
        outdir = Path(outdir)
        stem = self.file_stem()
        csv_path = outdir / f"{stem}.csv"
        json_path = outdir / f"{stem}.json"
        atomic_write_text(csv_path, self.csv_text())
        atomic_write_text(json_path, self.json_text())
        return csv_path, json_path
