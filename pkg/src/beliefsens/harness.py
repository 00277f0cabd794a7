"""Replicated perturbation experiments and synthetic stand-in networks."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import metrics
from .metrics import CaseOutcome, ComparisonSummary, RunSummary
from .model import (
    CaseRecord,
    ConditionalRow,
    DiagnosticNetwork,
    Disease,
    FindingVariable,
    InconsistentCase,
    PriorMode,
    infer_posterior,
)
from .perturb import NoiseScheme, SeedSpec, perturb_network, scheme_label

log = logging.getLogger(__name__)

SYNTH_MIN_ENTRY = 1e-6


@dataclass(frozen=True)
class ExperimentPlan:
    noise_configs: tuple[NoiseScheme, ...]
    replicates: int = 5
    prior_modes: tuple[PriorMode, ...] = (PriorMode.EXPERT,)
    master_seed: int = 0
    epsilon: float = metrics.DEFAULT_EPSILON

    def __post_init__(self):
        object.__setattr__(self, "noise_configs", tuple(self.noise_configs))
        object.__setattr__(self, "prior_modes", tuple(self.prior_modes))
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not self.noise_configs:
            raise ValueError("plan needs at least one noise config")
        if not self.prior_modes:
            raise ValueError("plan needs at least one prior mode")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")


@dataclass(frozen=True)
class SyntheticSpec:
    n_diseases: int = 20
    n_findings: int = 30
    states_per_finding: int = 2
    certainty_fraction: float = 0.4
    concentration: float = 3.0
    seed: int = 0
    prior_concentration: float = 10.0

    def __post_init__(self):
        if min(self.n_diseases, self.n_findings, self.states_per_finding) < 2:
            raise ValueError("counts must be >= 2")
        if not 0.0 <= self.certainty_fraction <= 1.0:
            raise ValueError("certainty_fraction must lie in [0, 1]")
        if self.concentration <= 0 or self.prior_concentration <= 0:
            raise ValueError("concentrations must be positive")


@dataclass
class ReportRow:
    prior_mode: PriorMode
    label: str
    scheme: Optional[NoiseScheme]
    summary: RunSummary
    comparison: Optional[ComparisonSummary] = None
    replicates: list[RunSummary] = field(default_factory=list)
    degenerate_rows: int = 0
    seeds: tuple[SeedSpec, ...] = ()

    @property
    def is_baseline(self) -> bool:
        return self.scheme is None


@dataclass
class ExperimentReport:
    plan: ExperimentPlan
    n_cases: int
    rows: list[ReportRow]

    def row(self, mode: PriorMode, scheme: Optional[NoiseScheme] = None) -> ReportRow:
        for r in self.rows:
            if r.prior_mode is mode and r.scheme == scheme:
                return r
        raise KeyError((mode, scheme))

    def baseline(self, mode: PriorMode) -> ReportRow:
        return self.row(mode, None)


def evaluate_cases(net: DiagnosticNetwork, cases: Sequence[CaseRecord], mode: PriorMode) -> list[CaseOutcome]:
    out = []
    for case in cases:
        try:
            post = infer_posterior(net, case, mode)
        except InconsistentCase:
            out.append(metrics.inconsistent_outcome(case.id))
            continue
        out.append(metrics.case_outcome(post, case.gold, case.id))
    return out


def baseline_run(net: DiagnosticNetwork, cases: Sequence[CaseRecord], mode: PriorMode) -> list[CaseOutcome]:
    """Outcomes of the unperturbed network; impossible cases are tallied, not raised."""
    if not cases:
        raise ValueError("baseline_run needs at least one case")
    return evaluate_cases(net, cases, mode)


def _replicate_task(net, cases, scheme, seed, modes):
    degenerate: list = []
    noisy = perturb_network(net, scheme, seed, degenerate)
    return {m: evaluate_cases(noisy, cases, m) for m in modes}, len(degenerate)


def run_experiment(net: DiagnosticNetwork, cases: Sequence[CaseRecord], plan: ExperimentPlan,
                   jobs: int = 1) -> ExperimentReport:
    """Run every (noise config, replicate) of ``plan`` against ``cases``.

    Replicate ``r`` of every config is perturbed from ``SeedSpec(master_seed, r)``.
    Results are keyed and reduced in plan order, so the report does not depend
    on ``jobs`` or on task completion order.
    """
    if not cases:
        raise ValueError("run_experiment needs at least one case")
    cases = list(cases)
    modes = plan.prior_modes
    seeds = tuple(SeedSpec(plan.master_seed, r) for r in range(plan.replicates))
    tasks = [(c, r) for c in range(len(plan.noise_configs)) for r in range(plan.replicates)]

    results = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                key: pool.submit(_replicate_task, net, cases, plan.noise_configs[key[0]], seeds[key[1]], modes)
                for key in tasks
            }
            results = {key: fut.result() for key, fut in futures.items()}
    else:
        for key in tasks:
            results[key] = _replicate_task(net, cases, plan.noise_configs[key[0]], seeds[key[1]], modes)

    rows = []
    for mode in modes:
        base = baseline_run(net, cases, mode)
        rows.append(ReportRow(mode, "Original knowledge base", None, metrics.summarize(base)))
        for c, scheme in enumerate(plan.noise_configs):
            pooled, reps, n_degenerate = [], [], 0
            for r in range(plan.replicates):
                outcomes, n_deg = results[(c, r)]
                pooled.extend(outcomes[mode])
                reps.append(metrics.summarize(outcomes[mode]))
                n_degenerate += n_deg
            if n_degenerate:
                log.warning("%s: %d degenerate rows replaced by uniform rows", scheme_label(scheme), n_degenerate)
            rows.append(ReportRow(
                prior_mode=mode,
                label=scheme_label(scheme),
                scheme=scheme,
                summary=metrics.summarize(pooled),
                comparison=metrics.compare(pooled, base * plan.replicates, plan.epsilon),
                replicates=reps,
                degenerate_rows=n_degenerate,
                seeds=seeds,
            ))
    return ExperimentReport(plan, len(cases), rows)


def _sharpened_row(rng: np.random.Generator, n: int, concentration: float) -> np.ndarray:
    u = rng.dirichlet(np.ones(n)) ** concentration
    u = np.maximum(u / u.sum(), SYNTH_MIN_ENTRY)
    return u / u.sum()


def generate_synthetic_network(spec: SyntheticSpec) -> DiagnosticNetwork:
    """Random single-fault network.

    Each row is, with probability ``certainty_fraction``, a point mass on a
    random state (so it holds exact 0.0 and 1.0 entries); otherwise a Dirichlet
    draw raised to the power ``concentration`` and renormalized, with every
    entry kept at or above ``SYNTH_MIN_ENTRY``.
    """
    rng = np.random.default_rng(spec.seed)
    diseases = tuple(Disease(f"D{i:02d}", f"disease {i}") for i in range(spec.n_diseases))
    states = tuple(f"s{k}" for k in range(spec.states_per_finding))
    if spec.states_per_finding == 2:
        states = ("absent", "present")
    findings = tuple(FindingVariable(f"F{j:02d}", states) for j in range(spec.n_findings))
    priors = rng.dirichlet(np.full(spec.n_diseases, spec.prior_concentration))
    priors = np.maximum(priors, SYNTH_MIN_ENTRY)
    priors = priors / priors.sum()

    rows = []
    for f in findings:
        for d in diseases:
            if rng.random() < spec.certainty_fraction:
                probs = np.zeros(spec.states_per_finding)
                probs[rng.integers(spec.states_per_finding)] = 1.0
            else:
                probs = _sharpened_row(rng, spec.states_per_finding, spec.concentration)
            rows.append(ConditionalRow(f.id, d.id, tuple(probs.tolist())))
    return DiagnosticNetwork(diseases, tuple(priors.tolist()), findings, rows)


def sample_cases(net: DiagnosticNetwork, n: int, seed: int, observed_fraction: float = 1.0) -> list[CaseRecord]:
    """Draw ``n`` cases from the network's own joint distribution.

    Each case draws a gold disease from the priors, then every finding's state
    given that disease; a random ``observed_fraction`` of findings is kept.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= observed_fraction <= 1.0:
        raise ValueError("observed_fraction must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    priors = np.asarray(net.priors)
    cases = []
    for k in range(n):
        gold = net.diseases[rng.choice(len(priors), p=priors / priors.sum())].id
        obs = {}
        for f in net.findings:
            probs = np.asarray(net.row(f.id, gold).probs)
            state = f.states[rng.choice(len(probs), p=probs / probs.sum())]
            if observed_fraction >= 1.0 or rng.random() < observed_fraction:
                obs[f.id] = state
        cases.append(CaseRecord(f"case{k:03d}", obs, gold))
    return cases


def prior_argmax_accuracy(net: DiagnosticNetwork, cases: Sequence[CaseRecord], mode: PriorMode) -> float:
    """Fraction of cases a guess of the most probable disease a priori would get right."""
    guess = net.diseases[int(np.argmax(net.prior_vector(mode)))].id
    return sum(c.gold == guess for c in cases) / len(cases)
