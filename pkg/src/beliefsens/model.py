"""Single-fault diagnostic networks: domain types, validation and posterior inference.

A network has one disease variable (exactly one disease is present) and a set of
discrete findings that are conditionally independent given the disease.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

SUM_TOL = 1e-9


class InconsistentCase(ValueError):
    """Every disease assigns zero probability to the observed findings."""

    def __init__(self, case_id: str):
        super().__init__(f"case {case_id!r}: observations have zero probability under every disease")
        self.case_id = case_id


class PriorMode(enum.Enum):
    EXPERT = "expert"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class Disease:
    id: str
    name: str = ""


@dataclass(frozen=True)
class FindingVariable:
    id: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))

    def state_index(self, label: str) -> int:
        return self.states.index(label)


@dataclass(frozen=True)
class ConditionalRow:
    """P(finding state | disease), one entry per state of ``finding``."""

    finding: str
    disease: str
    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))


@dataclass(frozen=True)
class Violation:
    location: str
    message: str

    def __str__(self):
        return f"{self.location}: {self.message}"


@dataclass(frozen=True, eq=False)
class DiagnosticNetwork:
    """Immutable single-fault network.

    ``cpt`` maps ``(finding id, disease id)`` to its :class:`ConditionalRow`.
    Construction does not validate; call :func:`validate_network`.
    """

    diseases: tuple[Disease, ...]
    priors: tuple[float, ...]
    findings: tuple[FindingVariable, ...]
    cpt: Mapping[tuple[str, str], ConditionalRow] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "diseases", tuple(self.diseases))
        object.__setattr__(self, "priors", tuple(float(p) for p in self.priors))
        object.__setattr__(self, "findings", tuple(self.findings))
        cpt = self.cpt
        if not isinstance(cpt, Mapping):
            cpt = {(r.finding, r.disease): r for r in cpt}
        object.__setattr__(self, "cpt", dict(cpt))

    @property
    def disease_ids(self) -> tuple[str, ...]:
        return tuple(d.id for d in self.diseases)

    @cached_property
    def disease_index(self) -> dict[str, int]:
        return {d.id: i for i, d in enumerate(self.diseases)}

    @cached_property
    def finding_index(self) -> dict[str, int]:
        return {f.id: i for i, f in enumerate(self.findings)}

    def row(self, finding: str, disease: str) -> ConditionalRow:
        return self.cpt[(finding, disease)]

    def rows(self):
        """Rows in canonical order: finding-major, disease-minor."""
        for f in self.findings:
            for d in self.diseases:
                yield self.cpt[(f.id, d.id)]

    def prior_vector(self, mode: PriorMode = PriorMode.EXPERT) -> np.ndarray:
        n = len(self.diseases)
        if mode is PriorMode.UNIFORM:
            return np.full(n, 1.0 / n)
        return np.asarray(self.priors, dtype=float)

    @cached_property
    def _log_tables(self) -> tuple[np.ndarray, ...]:
        # one (n_diseases, n_states) table of log P(state | disease) per finding
        tables = []
        with np.errstate(divide="ignore"):
            for f in self.findings:
                t = np.array([self.cpt[(f.id, d.id)].probs for d in self.diseases], dtype=float)
                tables.append(np.log(t))
        return tuple(tables)

    def with_cpt(self, rows: Sequence[ConditionalRow]) -> DiagnosticNetwork:
        return DiagnosticNetwork(self.diseases, self.priors, self.findings, rows)

    def equals(self, other: DiagnosticNetwork) -> bool:
        """Exact structural and numerical equality."""
        return (
            self.diseases == other.diseases
            and self.priors == other.priors
            and self.findings == other.findings
            and self.cpt == other.cpt
        )


@dataclass(frozen=True)
class CaseRecord:
    id: str
    observations: Mapping[str, str]
    gold: str

    def __post_init__(self):
        object.__setattr__(self, "observations", dict(self.observations))


@dataclass(frozen=True, eq=False)
class Posterior:
    disease_ids: tuple[str, ...]
    probs: np.ndarray

    def __getitem__(self, disease_id: str) -> float:
        return float(self.probs[self.disease_ids.index(disease_id)])


def _check_distribution(values, location, what, out):
    bad = [i for i, p in enumerate(values) if not (0.0 <= p <= 1.0) or math.isnan(p)]
    if bad:
        out.append(Violation(location, f"{what} entries outside [0, 1] at positions {bad}"))
    total = math.fsum(values)
    if abs(total - 1.0) > SUM_TOL:
        out.append(Violation(location, f"{what} sum to {total!r}, expected 1"))


def validate_network(net: DiagnosticNetwork) -> list[Violation]:
    """Return every invariant violation in ``net``; an empty list means valid."""
    out: list[Violation] = []
    ids = [d.id for d in net.diseases]
    if not ids:
        out.append(Violation("diseases", "network has no diseases"))
    for dup in sorted({i for i in ids if ids.count(i) > 1}):
        out.append(Violation("diseases", f"duplicate disease id {dup!r}"))
    if len(net.priors) != len(ids):
        out.append(Violation("priors", f"{len(net.priors)} priors for {len(ids)} diseases"))
    else:
        _check_distribution(net.priors, "priors", "priors", out)

    fids = [f.id for f in net.findings]
    for dup in sorted({i for i in fids if fids.count(i) > 1}):
        out.append(Violation("findings", f"duplicate finding id {dup!r}"))
    for f in net.findings:
        if len(f.states) < 2:
            out.append(Violation(f"findings[{f.id}]", "needs at least 2 states"))
        if len(set(f.states)) != len(f.states):
            out.append(Violation(f"findings[{f.id}]", "duplicate state labels"))

    known_f, known_d = set(fids), set(ids)
    for (fid, did), row in net.cpt.items():
        loc = f"cpt[{fid}, {did}]"
        if (row.finding, row.disease) != (fid, did):
            out.append(Violation(loc, f"row is keyed as ({row.finding}, {row.disease})"))
        if fid not in known_f or did not in known_d:
            out.append(Violation(loc, "row refers to an unknown finding or disease"))
            continue
        n_states = len(net.findings[net.finding_index[fid]].states)
        if len(row.probs) != n_states:
            out.append(Violation(loc, f"{len(row.probs)} probabilities for {n_states} states"))
            continue
        _check_distribution(row.probs, loc, "probabilities", out)
    for f in net.findings:
        for d in net.diseases:
            if (f.id, d.id) not in net.cpt:
                out.append(Violation(f"cpt[{f.id}, {d.id}]", "missing conditional row"))
    return out


def validate_case(net: DiagnosticNetwork, case: CaseRecord) -> list[Violation]:
    out = []
    loc = f"case[{case.id}]"
    if case.gold not in net.disease_index:
        out.append(Violation(loc, f"gold diagnosis {case.gold!r} is not a network disease"))
    for fid, state in case.observations.items():
        if fid not in net.finding_index:
            out.append(Violation(loc, f"unknown finding {fid!r}"))
        elif state not in net.findings[net.finding_index[fid]].states:
            out.append(Violation(loc, f"finding {fid!r} has no state {state!r}"))
    return out


def log_joint(net: DiagnosticNetwork, case: CaseRecord, mode: PriorMode = PriorMode.EXPERT) -> np.ndarray:
    """Unnormalized log P(disease, observations) for every disease."""
    with np.errstate(divide="ignore"):
        acc = np.log(net.prior_vector(mode))
    tables = net._log_tables
    obs = case.observations
    # fixed accumulation order: network finding order
    for i, f in enumerate(net.findings):
        state = obs.get(f.id)
        if state is not None:
            acc = acc + tables[i][:, f.state_index(state)]
    return acc


def infer_posterior(net: DiagnosticNetwork, case: CaseRecord, mode: PriorMode = PriorMode.EXPERT) -> Posterior:
    """Posterior over diseases given the case's observed findings.

    Unobserved findings are marginalized out, which under the single-fault
    model means they simply drop out of the product.

    Raises
    ------
    InconsistentCase
        If the observations have zero probability under every disease.
    """
    acc = log_joint(net, case, mode)
    top = acc.max()
    if top == -np.inf:
        raise InconsistentCase(case.id)
    w = np.exp(acc - top)
    return Posterior(net.disease_ids, w / w.sum())


def leading_disease(p: Posterior) -> str:
    # np.argmax returns the first maximum: ties go to the lowest index
    return p.disease_ids[int(np.argmax(p.probs))]


def top_two(p: Posterior) -> tuple[tuple[str, float], tuple[str, float]]:
    if len(p.probs) < 2:
        raise ValueError("top_two needs at least two diseases")
    i = int(np.argmax(p.probs))
    rest = p.probs.copy()
    rest[i] = -np.inf
    j = int(np.argmax(rest))
    return (p.disease_ids[i], float(p.probs[i])), (p.disease_ids[j], float(p.probs[j]))
