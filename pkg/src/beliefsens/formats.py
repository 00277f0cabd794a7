"""JSON network/case files and CSV/plain-text experiment reports.

Network file (UTF-8 JSON)::

    {
      "format": "beliefsens-network/1",
      "comment": "free text, e.g. generator seed",
      "diseases": [{"id": "D00", "name": "...", "prior": "0.05"}, ...],
      "findings": [{"id": "F00", "states": ["absent", "present"]}, ...],
      "cpt": [{"finding": "F00", "disease": "D00", "probs": ["0.2", "0.8"]}, ...]
    }

Case file::

    {
      "format": "beliefsens-cases/1",
      "cases": [{"id": "case000", "gold": "D03", "observations": {"F00": "present"}}, ...]
    }

Probabilities are decimal strings. They are read with ``float`` and written
with ``repr``, so parse -> serialize -> parse is the identity and a stored
"1.0" or "0" stays exactly 1.0 or 0.0.
"""

from __future__ import annotations

import csv
import io
import json
from decimal import Decimal, InvalidOperation
from pathlib import Path

from .harness import ExperimentReport, ReportRow
from .model import (
    CaseRecord,
    ConditionalRow,
    DiagnosticNetwork,
    Disease,
    FindingVariable,
    Violation,
    validate_case,
    validate_network,
)
from .perturb import Normal, Uniform

NETWORK_FORMAT = "beliefsens-network/1"
CASES_FORMAT = "beliefsens-cases/1"
ABSENT = "—"


class ParseError(ValueError):
    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


class ValidationFailed(ValueError):
    def __init__(self, source: str, violations: list[Violation]):
        lines = "\n".join(f"  {v}" for v in violations)
        super().__init__(f"{source}: {len(violations)} validation error(s)\n{lines}")
        self.violations = violations


def _read_json(path) -> object:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(str(path), exc.strerror or str(exc)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc


def _get(obj, key, loc, kind):
    if not isinstance(obj, dict):
        raise ParseError(loc, "expected an object")
    if key not in obj:
        raise ParseError(loc, f"missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise ParseError(f"{loc}.{key}", f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def parse_probability(token, loc: str) -> float:
    if not isinstance(token, str):
        raise ParseError(loc, f"probability must be a decimal string, got {token!r}")
    try:
        exact = Decimal(token.strip())
    except InvalidOperation:
        raise ParseError(loc, f"not a decimal number: {token!r}") from None
    if not exact.is_finite():
        raise ParseError(loc, f"not a finite number: {token!r}")
    return float(token)


def format_probability(p: float) -> str:
    return repr(float(p))


def network_from_dict(doc, source: str = "<network>") -> DiagnosticNetwork:
    diseases, priors = [], []
    for i, d in enumerate(_get(doc, "diseases", source, list)):
        loc = f"{source}: diseases[{i}]"
        diseases.append(Disease(_get(d, "id", loc, str), d.get("name", "") if isinstance(d, dict) else ""))
        priors.append(parse_probability(_get(d, "prior", loc, str), f"{loc}.prior"))
    findings = []
    for i, f in enumerate(_get(doc, "findings", source, list)):
        loc = f"{source}: findings[{i}]"
        states = _get(f, "states", loc, list)
        for k, s in enumerate(states):
            if not isinstance(s, str):
                raise ParseError(f"{loc}.states[{k}]", "state labels must be strings")
        findings.append(FindingVariable(_get(f, "id", loc, str), tuple(states)))
    rows = {}
    for i, r in enumerate(_get(doc, "cpt", source, list)):
        loc = f"{source}: cpt[{i}]"
        key = (_get(r, "finding", loc, str), _get(r, "disease", loc, str))
        if key in rows:
            raise ParseError(loc, f"duplicate row for {key}")
        probs = [parse_probability(p, f"{loc}.probs[{k}]") for k, p in enumerate(_get(r, "probs", loc, list))]
        rows[key] = ConditionalRow(key[0], key[1], tuple(probs))
    return DiagnosticNetwork(tuple(diseases), tuple(priors), tuple(findings), rows)


def network_to_dict(net: DiagnosticNetwork, comment: str | None = None) -> dict:
    doc = {"format": NETWORK_FORMAT}
    if comment:
        doc["comment"] = comment
    doc["diseases"] = [
        {"id": d.id, "name": d.name, "prior": format_probability(p)} for d, p in zip(net.diseases, net.priors)
    ]
    doc["findings"] = [{"id": f.id, "states": list(f.states)} for f in net.findings]
    doc["cpt"] = [
        {"finding": r.finding, "disease": r.disease, "probs": [format_probability(p) for p in r.probs]}
        for r in net.rows()
    ]
    return doc


def cases_from_dict(doc, source: str = "<cases>") -> list[CaseRecord]:
    cases = []
    for i, c in enumerate(_get(doc, "cases", source, list)):
        loc = f"{source}: cases[{i}]"
        obs = _get(c, "observations", loc, dict)
        for fid, state in obs.items():
            if not isinstance(state, str):
                raise ParseError(f"{loc}.observations.{fid}", "observed state must be a string")
        cases.append(CaseRecord(_get(c, "id", loc, str), obs, _get(c, "gold", loc, str)))
    return cases


def cases_to_dict(cases, comment: str | None = None) -> dict:
    doc = {"format": CASES_FORMAT}
    if comment:
        doc["comment"] = comment
    doc["cases"] = [{"id": c.id, "gold": c.gold, "observations": dict(c.observations)} for c in cases]
    return doc


def load_network(path) -> DiagnosticNetwork:
    net = network_from_dict(_read_json(path), str(path))
    violations = validate_network(net)
    if violations:
        raise ValidationFailed(str(path), violations)
    return net


def load_cases(path, net: DiagnosticNetwork | None = None) -> list[CaseRecord]:
    cases = cases_from_dict(_read_json(path), str(path))
    if net is not None:
        violations = [v for c in cases for v in validate_case(net, c)]
        if violations:
            raise ValidationFailed(str(path), violations)
    return cases


def _dump(doc, path):
    Path(path).write_text(json.dumps(doc, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


def save_network(net: DiagnosticNetwork, path, comment: str | None = None):
    _dump(network_to_dict(net, comment), path)


def save_cases(cases, path, comment: str | None = None):
    _dump(cases_to_dict(cases, comment), path)


# --- reports -----------------------------------------------------------------

REPORT_COLUMNS = [
    "prior_mode", "label", "scheme", "dist", "mu", "sigma", "lo", "hi",
    "replicates", "n_cases", "pct_correct",
    "avg_conf_correct", "n_correct", "avg_conf_incorrect", "n_incorrect",
    "pct_better", "avg_amount_better", "n_better", "avg_score",
    "n_inconsistent", "degenerate_rows", "epsilon", "master_seed", "warnings",
]
_FLOAT_COLUMNS = {"mu", "sigma", "lo", "hi", "pct_correct", "avg_conf_correct", "avg_conf_incorrect",
                  "pct_better", "avg_amount_better", "avg_score", "epsilon"}
_INT_COLUMNS = {"replicates", "n_cases", "n_correct", "n_incorrect", "n_better",
                "n_inconsistent", "degenerate_rows", "master_seed"}


def fmt_pct(x: float | None) -> str:
    return ABSENT if x is None else f"{x:.1f}%"


def fmt_prob(x: float | None) -> str:
    return ABSENT if x is None else f"{x:.4f}"


def _warnings(row: ReportRow) -> str:
    parts = []
    if row.degenerate_rows:
        parts.append(f"{row.degenerate_rows} degenerate CPT rows replaced by uniform")
    if row.summary.n_inconsistent:
        parts.append(f"{row.summary.n_inconsistent} inconsistent cases")
    return "; ".join(parts)


def report_records(report: ExperimentReport) -> list[dict]:
    """One flat record per report row, keyed by REPORT_COLUMNS; absent values are None."""
    plan = report.plan
    out = []
    for row in report.rows:
        s, c = row.summary, row.comparison
        dist = row.scheme.dist if row.scheme is not None else None
        out.append({
            "prior_mode": row.prior_mode.value,
            "label": row.label,
            "scheme": row.scheme.name if row.scheme is not None else "none",
            "dist": {Normal: "normal", Uniform: "uniform"}.get(type(dist), "none"),
            "mu": dist.mu if isinstance(dist, Normal) else None,
            "sigma": dist.sigma if isinstance(dist, Normal) else None,
            "lo": dist.lo if isinstance(dist, Uniform) else None,
            "hi": dist.hi if isinstance(dist, Uniform) else None,
            "replicates": 1 if row.is_baseline else plan.replicates,
            "n_cases": s.n_cases,
            "pct_correct": s.pct_correct,
            "avg_conf_correct": s.conf_correct.mean,
            "n_correct": s.conf_correct.count,
            "avg_conf_incorrect": s.conf_incorrect.mean,
            "n_incorrect": s.conf_incorrect.count,
            "pct_better": c.pct_better if c else None,
            "avg_amount_better": c.avg_amount_better if c else None,
            "n_better": c.n_better if c else None,
            "avg_score": s.avg_score,
            "n_inconsistent": s.n_inconsistent,
            "degenerate_rows": row.degenerate_rows,
            "epsilon": plan.epsilon,
            "master_seed": plan.master_seed,
            "warnings": _warnings(row),
        })
    return out


def _csv_cell(v) -> str:
    if v is None:
        return ABSENT
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_to_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(REPORT_COLUMNS)
    for rec in report_records(report):
        w.writerow([_csv_cell(rec[k]) for k in REPORT_COLUMNS])
    return buf.getvalue()


def read_report_csv(text: str) -> list[dict]:
    """Parse CSV written by :func:`report_to_csv` back into typed records."""
    records = []
    for raw in csv.DictReader(io.StringIO(text)):
        rec = {}
        for k in REPORT_COLUMNS:
            v = raw[k]
            if v == ABSENT:
                rec[k] = None
            elif k in _FLOAT_COLUMNS:
                rec[k] = float(v)
            elif k in _INT_COLUMNS:
                rec[k] = int(v)
            else:
                rec[k] = v
        records.append(rec)
    return records


def _conf_cell(mean, count) -> str:
    return f"{fmt_prob(mean)} ({count})"


def _better_cell(rec) -> str:
    if rec["pct_better"] is None:
        return ABSENT
    return f"{fmt_pct(rec['pct_better'])} ({fmt_prob(rec['avg_amount_better'])})"


def report_to_table(report: ExperimentReport, header: dict | None = None) -> str:
    """Aligned plain-text rendering laid out like the classic summary tables."""
    lines = []
    meta = {"master_seed": report.plan.master_seed, "replicates": report.plan.replicates,
            "epsilon": report.plan.epsilon, "cases": report.n_cases}
    meta.update(header or {})
    lines.append("# " + "  ".join(f"{k}={v}" for k, v in meta.items()))
    cols = ["Label", "Pct correct", "Conf. correct (#)", "Conf. incorrect (#)",
            "Pct better (avg amount)", "Avg score", "Warnings"]
    records = report_records(report)
    for mode in dict.fromkeys(r["prior_mode"] for r in records):
        body = [
            [r["label"], fmt_pct(r["pct_correct"]),
             _conf_cell(r["avg_conf_correct"], r["n_correct"]),
             _conf_cell(r["avg_conf_incorrect"], r["n_incorrect"]),
             _better_cell(r), fmt_prob(r["avg_score"]), r["warnings"]]
            for r in records if r["prior_mode"] == mode
        ]
        widths = [max(len(str(x)) for x in col) for col in zip(cols, *body)]
        lines.append("")
        lines.append(f"Priors: {mode}")
        lines.append("  ".join(h.ljust(w) for h, w in zip(cols, widths)).rstrip())
        lines.append("  ".join("-" * w for w in widths))
        for b in body:
            cells = [b[0].ljust(widths[0])] + [str(x).rjust(w) for x, w in zip(b[1:-1], widths[1:-1])] + [b[-1]]
            lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"

