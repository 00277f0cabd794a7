"""Per-case diagnostic statistics and their aggregates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import Posterior, leading_disease, top_two

DEFAULT_EPSILON = 0.01


def quadratic_score(probs, gold_index: int) -> float:
    """Quadratic scoring rule: 2 * p[gold] - sum(p**2). Ranges over [-1, 1]."""
    p = np.asarray(probs, dtype=float)
    return 2.0 * float(p[gold_index]) - math.fsum(p * p)


@dataclass(frozen=True, eq=False)
class CaseOutcome:
    case_id: str
    posterior: Optional[Posterior]
    leading: Optional[str]
    correct: bool
    confidence: Optional[float]
    gold_prob: float
    score: float

    @property
    def inconsistent(self) -> bool:
        return self.posterior is None


def case_outcome(p: Posterior, gold: str, case_id: str = "") -> CaseOutcome:
    if len(p.probs) > 1:
        (lead, p1), (_, p2) = top_two(p)
    else:
        lead, p1, p2 = leading_disease(p), float(p.probs[0]), 0.0
    g = p.disease_ids.index(gold)
    return CaseOutcome(
        case_id=case_id,
        posterior=p,
        leading=lead,
        correct=lead == gold,
        confidence=p1 - p2,
        gold_prob=float(p.probs[g]),
        score=quadratic_score(p.probs, g),
    )


def inconsistent_outcome(case_id: str) -> CaseOutcome:
    """Outcome for a case whose evidence is impossible under the network.

    Counted as incorrect; scored against an all-zero posterior (score 0);
    carries no confidence so it stays out of the confidence cells.
    """
    return CaseOutcome(case_id, None, None, False, None, 0.0, 0.0)


@dataclass(frozen=True)
class ConfidenceCell:
    mean: Optional[float]
    count: int


@dataclass(frozen=True)
class RunSummary:
    n_cases: int
    pct_correct: float
    conf_correct: ConfidenceCell
    conf_incorrect: ConfidenceCell
    avg_score: float
    n_inconsistent: int = 0


@dataclass(frozen=True)
class ComparisonSummary:
    pct_better: float
    avg_amount_better: Optional[float]
    epsilon: float
    n_better: int = 0


def _mean(xs: Sequence[float]) -> Optional[float]:
    return math.fsum(xs) / len(xs) if xs else None


def summarize(outcomes: Sequence[CaseOutcome]) -> RunSummary:
    if not outcomes:
        raise ValueError("summarize needs at least one outcome")
    right = [o.confidence for o in outcomes if o.correct]
    wrong = [o.confidence for o in outcomes if not o.correct and not o.inconsistent]
    n = len(outcomes)
    return RunSummary(
        n_cases=n,
        pct_correct=100.0 * len(right) / n,
        conf_correct=ConfidenceCell(_mean(right), len(right)),
        conf_incorrect=ConfidenceCell(_mean(wrong), len(wrong)),
        avg_score=math.fsum(o.score for o in outcomes) / n,
        n_inconsistent=sum(o.inconsistent for o in outcomes),
    )


def compare(noisy: Sequence[CaseOutcome], baseline: Sequence[CaseOutcome],
            epsilon: float = DEFAULT_EPSILON) -> ComparisonSummary:
    """Share of cases where the noisy network is correct and gives the gold
    disease more than ``epsilon`` extra posterior probability."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if len(noisy) != len(baseline) or any(a.case_id != b.case_id for a, b in zip(noisy, baseline)):
        raise ValueError("noisy and baseline outcomes are not aligned case by case")
    if not noisy:
        raise ValueError("compare needs at least one case")
    gains = [a.gold_prob - b.gold_prob for a, b in zip(noisy, baseline)
             if a.correct and a.gold_prob - b.gold_prob > epsilon]
    return ComparisonSummary(
        pct_better=100.0 * len(gains) / len(noisy),
        avg_amount_better=_mean(gains),
        epsilon=epsilon,
        n_better=len(gains),
    )
