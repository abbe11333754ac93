"""Experiment reports: measurement tables, pass flags derived by named rules, persistence.

Flags are never stored as free booleans. Each one is a rule over a
measurement table (``slope_le``, ``max_le``, ...) and is evaluated from the
table columns, so reloading the CSVs reproduces every flag.
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["Table", "Rule", "Report", "evaluate_rule", "recompute_flags", "read_table"]


@dataclass
class Table:
    """Columns are ``(name, unit)``; rows are tuples of numbers or short strings."""

    name: str
    columns: list
    rows: list = field(default_factory=list)

    def add(self, *row) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"{self.name}: row has {len(row)} fields, expected {len(self.columns)}")
        self.rows.append(tuple(row))

    def column(self, name: str, where: dict | None = None) -> np.ndarray:
        names = [c[0] for c in self.columns]
        i = names.index(name)
        out = []
        for row in self.rows:
            if where and not all(_cell_eq(row[names.index(k)], v) for k, v in where.items()):
                continue
            out.append(row[i])
        return np.asarray(out)

    def header(self) -> list[str]:
        return [f"{n} [{u}]" if u else n for n, u in self.columns]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _cell_eq(a, b) -> bool:
    if isinstance(a, str) or isinstance(b, str):
        return str(a) == str(b)
    return float(a) == float(b)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _parse(v: str):
    try:
        if v.lstrip("-").isdigit():
            return int(v)
        return float(v)
    except ValueError:
        return v


def read_table(path) -> Table:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    cols = []
    for h in rows[0]:
        if h.endswith("]") and " [" in h:
            name, unit = h[:-1].split(" [", 1)
        else:
            name, unit = h, ""
        cols.append((name, unit))
    t = Table(Path(path).stem, cols)
    for r in rows[1:]:
        t.rows.append(tuple(_parse(v) for v in r))
    return t


@dataclass
class Rule:
    """A pass criterion over one table.

    kinds:
      ``slope_le``: least-squares slope of ``log2(y)`` against ``x`` is ``<= threshold``
      (all ``y == 0`` counts as a degenerate pass);
      ``slope_ge``: same with ``>=``;
      ``max_le`` / ``min_ge``: extreme of a column against ``threshold``;
      ``finite``: every entry finite;
      ``nonincreasing``: column non-increasing in table order;
      ``max_le_factor_min``: ``max <= threshold * min`` over positive entries;
      ``max_le_factor_first``: ``max <= threshold * y[0]``, the first row being the reference case.
    """

    name: str
    kind: str
    table: str
    y: str
    x: str | None = None
    threshold: float = 0.0
    where: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(x.astype(float), np.log2(y.astype(float)), 1)[0])


def evaluate_rule(rule: Rule, tables: dict) -> dict:
    t = tables[rule.table]
    y = t.column(rule.y, rule.where).astype(float)
    out = {"rule": rule.as_dict(), "degenerate": False}
    if rule.kind in ("slope_le", "slope_ge"):
        x = t.column(rule.x, rule.where).astype(float)
        if y.size and np.all(y == 0):
            out.update(value=None, passed=True, degenerate=True)
            return out
        if y.size < 2 or np.any(y <= 0):
            out.update(value=None, passed=False)
            return out
        s = _fit_slope(x, y)
        ok = s <= rule.threshold if rule.kind == "slope_le" else s >= rule.threshold
        out.update(value=s, passed=bool(ok))
    elif rule.kind == "max_le":
        v = float(np.max(y)) if y.size else 0.0
        out.update(value=v, passed=bool(v <= rule.threshold))
    elif rule.kind == "min_ge":
        v = float(np.min(y)) if y.size else math.inf
        out.update(value=v, passed=bool(v >= rule.threshold))
    elif rule.kind == "finite":
        out.update(value=float(np.max(np.abs(y))) if y.size else 0.0, passed=bool(np.all(np.isfinite(y))))
    elif rule.kind == "nonincreasing":
        d = np.diff(y)
        v = float(np.max(d)) if d.size else 0.0
        out.update(value=v, passed=bool(v <= 0.0))
    elif rule.kind == "max_le_factor_min":
        pos = y[y > 0]
        if pos.size == 0:
            out.update(value=None, passed=True, degenerate=True)
        else:
            v = float(pos.max() / pos.min())
            out.update(value=v, passed=bool(v <= rule.threshold))
    elif rule.kind == "max_le_factor_first":
        if y.size == 0 or y[0] <= 0:
            out.update(value=None, passed=False)
        else:
            v = float(y.max() / y[0])
            out.update(value=v, passed=bool(v <= rule.threshold))
    else:
        raise ValueError(f"unknown rule kind {rule.kind!r}")
    return out


@dataclass
class Report:
    experiment: str
    config: dict
    tables: dict = field(default_factory=dict)
    rules: list = field(default_factory=list)
    measurements: dict = field(default_factory=dict)
    started: float = field(default_factory=time.time)
    wall_clock: float | None = None

    def table(self, name: str, columns) -> Table:
        t = Table(name, list(columns))
        self.tables[name] = t
        return t

    def rule(self, *args, **kwargs) -> None:
        self.rules.append(Rule(*args, **kwargs))

    def flags(self) -> dict:
        return {r.name: evaluate_rule(r, self.tables) for r in self.rules}

    @property
    def passed(self) -> bool:
        return all(f["passed"] for f in self.flags().values())

    def finish(self) -> "Report":
        self.wall_clock = time.time() - self.started
        return self

    def as_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "measurements": _jsonable(self.measurements),
            "tables": {k: {"columns": t.header(), "rows": len(t.rows), "file": f"{k}.csv"}
                       for k, t in self.tables.items()},
            "flags": _jsonable(self.flags()),
            "passed": self.passed,
            "versions": {"python": platform.python_version(), "numpy": np.__version__},
            # excluded from reproducibility comparisons
            "run": {
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(self.started)),
                "wall_clock_s": self.wall_clock,
            },
        }

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, t in self.tables.items():
            (out / f"{name}.csv").write_text(t.to_csv(), encoding="utf-8")
        path = out / "report.json"
        path.write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def summary_lines(self) -> list[str]:
        lines = []
        for name, f in self.flags().items():
            tag = "PASS" if f["passed"] else "FAIL"
            val = f.get("value")
            extra = " (degenerate)" if f.get("degenerate") else ""
            shown = "-" if val is None else f"{val:.6g}"
            lines.append(f"{tag} {self.experiment}.{name}: {shown}{extra}")
        return lines


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def recompute_flags(out_dir) -> dict:
    """Re-evaluate every flag in ``report.json`` from the CSV files beside it."""
    out = Path(out_dir)
    rep = json.loads((out / "report.json").read_text(encoding="utf-8"))
    tables = {name: read_table(out / meta["file"]) for name, meta in rep["tables"].items()}
    result = {}
    for name, f in rep["flags"].items():
        r = Rule(**f["rule"])
        result[name] = evaluate_rule(r, tables)["passed"]
    return result
