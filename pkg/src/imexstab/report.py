"""Convergence tables and their file formats.

CSV layout: comment lines starting with ``#`` carry run metadata as
``# key: value``; then a header ``order,steps,k,error,rate,flag`` and one
row per run. ``rate`` is empty where undefined; ``flag`` reads ``roundoff``
when the error is below :data:`ROUNDOFF_FLOOR` and the row is dominated by
cancellation rather than time discretization. The CSV is deterministic for a
given configuration, so wall-clock time is kept out of it and only written
to the JSON form.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ROUNDOFF_FLOOR", "ConvergenceRow", "ConvergenceReport", "observed_rates", "fitted_rate", "format_k"]

CSV_COLUMNS = ("order", "steps", "k", "error", "rate", "flag")
ROUNDOFF_FLOOR = 1e-9


def format_k(k: float) -> str:
    """Render powers of two as ``2^-n`` and anything else with ``repr``."""
    if k > 0:
        e = math.log2(k)
        if abs(e - round(e)) < 1e-12:
            return f"2^{int(round(e))}"
    return repr(float(k))


def observed_rates(ks, errors) -> np.ndarray:
    """Rates between consecutive rows, ``nan`` for the first one."""
    ks = np.asarray(ks, dtype=float)
    errors = np.asarray(errors, dtype=float)
    out = np.full(ks.size, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[1:] = np.log(errors[:-1] / errors[1:]) / np.log(ks[:-1] / ks[1:])
    return out


def fitted_rate(ks, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(k)``."""
    x = np.log(np.asarray(ks, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class ConvergenceRow:
    order: int
    steps: int
    k: float
    error: float
    rate: float = math.nan

    @property
    def roundoff(self) -> bool:
        return self.error < ROUNDOFF_FLOOR


@dataclass
class ConvergenceReport:
    """Rows of a convergence study plus metadata.

    Attributes
    ----------
    title : str
    rows : list of ConvergenceRow
    metadata : dict
        Written into the CSV header; must be deterministic.
    timing : dict
        Wall-clock information, JSON only.
    """

    title: str
    rows: list[ConvergenceRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def add_series(self, order: int, ks, steps, errors, rates=None) -> None:
        rates = observed_rates(ks, errors) if rates is None else rates
        for k, n, e, q in zip(ks, steps, errors, rates):
            self.rows.append(ConvergenceRow(int(order), int(n), float(k), float(e), float(q)))

    def series(self, order: int) -> list[ConvergenceRow]:
        return [row for row in self.rows if row.order == order]

    def errors(self, order: int) -> np.ndarray:
        return np.array([row.error for row in self.series(order)])

    def ks(self, order: int) -> np.ndarray:
        return np.array([row.k for row in self.series(order)])

    def rates(self, order: int) -> np.ndarray:
        return np.array([row.rate for row in self.series(order)])

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(f"# title: {self.title}\n")
        for key in sorted(self.metadata):
            buf.write(f"# {key}: {json.dumps(self.metadata[key], sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            rate = "" if math.isnan(row.rate) else f"{row.rate:.4f}"
            flag = "roundoff" if row.roundoff else ""
            w.writerow([row.order, row.steps, format_k(row.k), f"{row.error:.6e}", rate, flag])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    def to_dict(self) -> dict:
        def num(x):
            return None if isinstance(x, float) and not math.isfinite(x) else x

        return {
            "title": self.title,
            "metadata": self.metadata,
            "timing": self.timing,
            "rows": [
                {"order": r.order, "steps": r.steps, "k": r.k, "error": num(r.error), "rate": num(r.rate),
                 "roundoff": r.roundoff}
                for r in self.rows
            ],
        }

    @classmethod
    def from_csv(cls, text: str) -> "ConvergenceReport":
        """Parse the CSV produced by :meth:`to_csv`."""
        meta: dict = {}
        title = ""
        body = []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(": ")
                if key == "title":
                    title = value
                else:
                    meta[key] = json.loads(value)
            else:
                body.append(line)
        rep = cls(title=title, metadata=meta)
        for rec in csv.DictReader(body):
            k = rec["k"]
            kval = 2.0 ** int(k[2:]) if k.startswith("2^") else float(k)
            rate = float(rec["rate"]) if rec["rate"] else math.nan
            rep.rows.append(ConvergenceRow(int(rec["order"]), int(rec["steps"]), kval, float(rec["error"]), rate))
        return rep
