"""CSV ingestion and JSON emission."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import FeatureVector
from .errors import ContractViolation, ParseError, ValidationError
from .pricing import OptionRecord, VixInput

RECORD_COLUMNS = ("S", "r", "tau", "K", "sigma", "price", "kind")
_DIRECTIVE = re.compile(r"^#\s*rates\s*=\s*(percent|decimal)\s*$", re.IGNORECASE)


def _split_header(lines: list[str]) -> tuple[str, int, list[tuple[int, str]]]:
    """Return (rate unit, header line number, [(line number, text), ...])."""
    rates = "decimal"
    body = []
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            m = _DIRECTIVE.match(stripped)
            if m:
                rates = m.group(1).lower()
            continue
        body.append((number, line))
    return rates, (body[0][0] if body else 0), body


def load_option_records(path) -> list[OptionRecord]:
    """Read ``S,r,tau,K,sigma,price,kind`` rows (optional ``date`` column).

    A ``# rates=percent`` directive divides the rate column by 100.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_option_records(text)


def parse_option_records(text: str) -> list[OptionRecord]:
    rates, _, body = _split_header(text.splitlines())
    if not body:
        return []
    header_line, header_text = body[0]
    header = [h.strip() for h in next(csv.reader([header_text]))]
    missing = [c for c in RECORD_COLUMNS if c not in header]
    if missing:
        raise ParseError(f"header missing columns {missing}", header_line)
    idx = {name: header.index(name) for name in header}
    scale = 0.01 if rates == "percent" else 1.0
    records, bad = [], []
    for line_no, line in body[1:]:
        cells = [c.strip() for c in next(csv.reader([line]))]
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(cells)}", line_no)
        try:
            nums = {c: float(cells[idx[c]]) for c in RECORD_COLUMNS if c != "kind"}
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from None
        rec = OptionRecord(nums["S"], nums["r"] * scale, nums["tau"], nums["K"], nums["sigma"], nums["price"],
                           cells[idx["kind"]].lower(), cells[idx["date"]] if "date" in idx else None)
        if rec.problems():
            bad.append((line_no, rec.problems()))
        records.append(rec)
    if bad:
        detail = "; ".join(f"line {n}: {', '.join(p)}" for n, p in bad)
        raise ValidationError(f"invalid option records ({detail})", [n for n, _ in bad])
    return records


def dumps_option_records(records: Sequence[OptionRecord]) -> str:
    """Serialise with decimal rates; floats are written with ``repr`` so reloading is exact."""
    with_date = any(r.date is not None for r in records)
    buf = io.StringIO()
    buf.write("# rates=decimal\n")
    cols = list(RECORD_COLUMNS) + (["date"] if with_date else [])
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in records:
        row = [repr(float(getattr(r, c))) for c in RECORD_COLUMNS[:-1]] + [r.kind]
        if with_date:
            row.append(r.date or "")
        writer.writerow(row)
    return buf.getvalue()


def write_option_records(records: Sequence[OptionRecord], path) -> None:
    Path(path).write_text(dumps_option_records(records), encoding="utf-8")


def default_baseline(records: Sequence[OptionRecord]) -> np.ndarray:
    """Per-feature mean of the earliest date's records (all records when undated)."""
    if not records:
        raise ContractViolation("no records to average")
    dated = [r for r in records if r.date]
    if dated:
        first = min(r.date for r in dated)
        records = [r for r in dated if r.date == first]
    return np.mean([r.features() for r in records], axis=0)


def load_chain(path, forward: float, rate: float, tau: float) -> VixInput:
    """Chain CSV with columns ``K,put,call``; each side uses its out-of-the-money quote."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.lstrip().startswith("#"))
        for n, row in enumerate(reader, start=2):
            try:
                rows.append((float(row["K"]), float(row["put"]), float(row["call"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad chain row: {exc}", n) from None
    rows.sort()
    K = np.array([r[0] for r in rows])
    puts = np.array([r[1] for r in rows])
    calls = np.array([r[2] for r in rows])
    return VixInput(K, puts, calls, forward, rate, tau)


def load_points(path) -> tuple[np.ndarray, tuple[str, ...]]:
    """Numeric CSV with a header row; non-numeric columns (e.g. ``kind``, ``date``) are dropped."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [line for line in fh if line.strip() and not line.lstrip().startswith("#")]
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    rows = [row for row in reader]
    keep = []
    for j, name in enumerate(header):
        try:
            [float(row[j]) for row in rows]
        except (ValueError, IndexError):
            continue
        keep.append(j)
    X = np.array([[float(row[j]) for j in keep] for row in rows])
    return X, tuple(header[j] for j in keep)


def parse_vector(text: str, names: Sequence[str]) -> FeatureVector:
    try:
        vals = [float(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise ContractViolation(f"cannot parse vector {text!r}") from None
    if len(vals) != len(names):
        raise ContractViolation(f"vector {text!r} has {len(vals)} entries, model needs {len(names)} {tuple(names)}")
    return FeatureVector(vals, names)


def dumps_json(obj) -> str:
    """Pretty JSON, keys in insertion order, trailing newline."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_json(obj))


def plot_rows(results: Iterable) -> str:
    """(method, feature, attribution) CSV for bar charts."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "feature", "attribution"])
    for res in results:
        for name, a in zip(res.names, res.attributions):
            writer.writerow([res.method.value, name, repr(float(a)) if math.isfinite(a) else "nan"])
    return buf.getvalue()
