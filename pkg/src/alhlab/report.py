"""Claim records and their CSV / JSON emission.

Numbers are rendered with a fixed number of significant digits so that a
fixed seed and configuration give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

COLUMNS = ("claim_id", "paper_anchor", "predicted", "measured", "tolerance", "verdict")
DIGITS = 6


def fmt(x) -> str:
    """Deterministic text form of a claim value."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if x == 0:
            return "0"
        return f"{x:.{DIGITS}g}"
    if isinstance(x, (tuple, list)):
        return "(" + ", ".join(fmt(v) for v in x) + ")"
    return str(x)


@dataclass(frozen=True)
class Claim:
    """One checked statement: predicted value, measured value, tolerance and verdict.

    ``paper_anchor`` is a short descriptive label of the result being checked.
    """

    claim_id: str
    paper_anchor: str
    predicted: object
    measured: object
    tolerance: object
    passed: bool

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def row(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "paper_anchor": self.paper_anchor,
            "predicted": fmt(self.predicted),
            "measured": fmt(self.measured),
            "tolerance": fmt(self.tolerance),
            "verdict": self.verdict,
        }


def rate_claim(claim_id, anchor, predicted, measured, tolerance) -> Claim:
    ok = math.isfinite(measured) and abs(measured - predicted) <= tolerance
    return Claim(claim_id, anchor, predicted, measured, tolerance, ok)


def flag_claim(claim_id, anchor, predicted, measured) -> Claim:
    return Claim(claim_id, anchor, predicted, measured, "exact", measured == predicted)


def bound_claim(claim_id, anchor, measured, bound, *, below: bool = True) -> Claim:
    """``measured <= bound`` (or ``>=`` when ``below`` is False)."""
    ok = math.isfinite(measured) and (measured <= bound if below else measured >= bound)
    pred = f"<= {fmt(bound)}" if below else f">= {fmt(bound)}"
    return Claim(claim_id, anchor, pred, measured, "bound", ok)


def render_csv(claims) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for c in claims:
        w.writerow(c.row())
    return buf.getvalue()


def summary(scenario: str, config: dict, claims, status: str = "completed", error: str | None = None) -> dict:
    passed = sum(c.passed for c in claims)
    out = {
        "scenario": scenario,
        "status": status,
        "claims_total": len(claims),
        "claims_passed": passed,
        "verdict": "pass" if claims and passed == len(claims) and status == "completed" else "fail",
        "config": config,
        "claims": [c.row() for c in claims],
    }
    if error is not None:
        out["error"] = error
    return out


def render_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_report(out_dir, stem: str, claims, doc: dict):
    """Write ``<stem>.csv`` and ``<stem>.json``; return both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    csv_path.write_text(render_csv(claims), encoding="utf-8")
    json_path.write_text(render_json(doc), encoding="utf-8")
    return csv_path, json_path
