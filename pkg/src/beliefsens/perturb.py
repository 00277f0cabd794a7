"""Noise distributions and the CPT perturbation schemes.

Three ways of producing a modified knowledge base:

* ``AdditiveRenormalize`` adds noise directly to each probability, clamps to
  [0, 1] and renormalizes. Entries at 0 and 1 move like any other entry.
* ``LogOddsPreserveCertainty`` adds noise in log-odds space and leaves entries
  that are exactly 0.0 or 1.0 untouched.
* ``RandomReplace`` throws the stored rows away and draws fresh random ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .model import ConditionalRow, DiagnosticNetwork

RENORM_TOL = 1e-12
RANDOM_ROW_FLOOR = 1e-6


class DegenerateRow(ValueError):
    """A row cannot be renormalized: all free mass vanished."""

    def __init__(self, message: str, finding: str | None = None, disease: str | None = None):
        if finding is not None:
            message = f"cpt[{finding}, {disease}]: {message}"
        super().__init__(message)
        self.finding = finding
        self.disease = disease


@dataclass(frozen=True)
class Uniform:
    lo: float = -0.5
    hi: float = 0.5

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"Uniform needs lo < hi, got ({self.lo}, {self.hi})")

    def label(self) -> str:
        return "Uniform noise"


@dataclass(frozen=True)
class Normal:
    mu: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"Normal needs sigma >= 0, got {self.sigma}")

    def label(self) -> str:
        return f"Normal noise, sigma={self.sigma:g}"


NoiseDistribution = Union[Uniform, Normal]

# parameters for freshly drawn rows (RandomReplace); these are choices, not measured values
RANDOM_UNIFORM = Uniform(0.0, 1.0)
RANDOM_NORMAL = Normal(0.5, 0.15)


@dataclass(frozen=True)
class AdditiveRenormalize:
    dist: NoiseDistribution
    name = "additive"


@dataclass(frozen=True)
class LogOddsPreserveCertainty:
    dist: NoiseDistribution
    name = "logodds"


@dataclass(frozen=True)
class RandomReplace:
    dist: NoiseDistribution
    name = "random"


NoiseScheme = Union[AdditiveRenormalize, LogOddsPreserveCertainty, RandomReplace]


def scheme_label(scheme: NoiseScheme) -> str:
    if isinstance(scheme, RandomReplace):
        kind = "uniform" if isinstance(scheme.dist, Uniform) else "normal"
        return f"Random CPT ({kind})"
    return scheme.dist.label()


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    replicate_index: int = 0

    def __post_init__(self):
        if self.replicate_index < 0:
            raise ValueError("replicate_index must be >= 0")

    def rng(self) -> np.random.Generator:
        # spawn_key addresses the stream directly, so replicate r never
        # depends on how many other replicates exist
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.replicate_index,))
        return np.random.Generator(np.random.PCG64(ss))


def logit(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"logit is defined on (0, 1), got {p!r}")
    return math.log(p) - math.log1p(-p)


def inverse_logit(v: float) -> float:
    if v >= 0:
        return 1.0 / (1.0 + math.exp(-v))
    e = math.exp(v)
    return e / (1.0 + e)


def sample_noise(dist: NoiseDistribution, rng: np.random.Generator, size=None):
    if isinstance(dist, Uniform):
        return rng.uniform(dist.lo, dist.hi, size)
    return rng.normal(dist.mu, dist.sigma, size)


def renormalize(row, fixed_mask=None) -> np.ndarray:
    """Scale the non-fixed entries so the whole row sums to 1.

    Fixed entries are returned bit-identical. A row that already sums to 1
    within ``RENORM_TOL`` is returned unchanged, which makes the operation
    idempotent to the bit.
    """
    row = np.array(row, dtype=float)
    fixed = np.zeros(row.shape, dtype=bool) if fixed_mask is None else np.asarray(fixed_mask, dtype=bool)
    if np.any(row < 0):
        raise ValueError("renormalize needs non-negative entries")
    total = math.fsum(row)
    if abs(total - 1.0) <= RENORM_TOL:
        return row
    free = ~fixed
    target = 1.0 - math.fsum(row[fixed])
    free_mass = math.fsum(row[free])
    if target < -RENORM_TOL:
        raise DegenerateRow(f"fixed entries sum to {1.0 - target!r} > 1")
    if free_mass == 0.0:
        if target > RENORM_TOL:
            raise DegenerateRow("all free entries are zero")
        return row
    row[free] = row[free] * (max(target, 0.0) / free_mass)
    return row


def _uniform_row(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def perturb_row_additive(probs, dist: NoiseDistribution, rng: np.random.Generator, noise=None) -> np.ndarray:
    """p -> clamp(p + eps, 0, 1), then renormalize. ``noise`` overrides the draws."""
    p = np.asarray(probs, dtype=float)
    eps = sample_noise(dist, rng, p.shape) if noise is None else np.asarray(noise, dtype=float)
    return renormalize(np.clip(p + eps, 0.0, 1.0))


def certainty_mask(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    return (p == 0.0) | (p == 1.0)


def _logit_array(p: np.ndarray) -> np.ndarray:
    return np.log(p) - np.log1p(-p)


def _inverse_logit_array(v: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(v))
    return np.where(v >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def logodds_shift(probs, eps) -> np.ndarray:
    """Shift every non-certain entry by ``eps`` in log-odds, without renormalizing."""
    p = np.asarray(probs, dtype=float)
    eps = np.broadcast_to(np.asarray(eps, dtype=float), p.shape)
    free = ~certainty_mask(p)
    out = p.copy()
    out[free] = _inverse_logit_array(_logit_array(p[free]) + eps[free])
    return out


def perturb_row_logodds(probs, dist: NoiseDistribution, rng: np.random.Generator, noise=None) -> np.ndarray:
    """Log-odds noise on entries strictly inside (0, 1); exact 0/1 entries are kept.

    One draw is consumed per non-certain entry, in row order.
    """
    p = np.asarray(probs, dtype=float)
    fixed = certainty_mask(p)
    if fixed.all():
        return p.copy()
    if noise is None:
        eps = np.zeros(p.shape)
        eps[~fixed] = sample_noise(dist, rng, int((~fixed).sum()))
    else:
        eps = np.asarray(noise, dtype=float)
    return renormalize(logodds_shift(p, eps), fixed)


def random_row(n_states: int, dist: NoiseDistribution, rng: np.random.Generator) -> np.ndarray:
    """A fresh row: draws from ``dist`` clamped to [RANDOM_ROW_FLOOR, 1], renormalized."""
    if n_states < 2:
        raise ValueError("random_row needs at least 2 states")
    draws = np.clip(sample_noise(dist, rng, n_states), RANDOM_ROW_FLOOR, 1.0)
    return renormalize(draws)


def perturb_row(scheme: NoiseScheme, probs, rng: np.random.Generator) -> np.ndarray:
    if isinstance(scheme, AdditiveRenormalize):
        return perturb_row_additive(probs, scheme.dist, rng)
    if isinstance(scheme, LogOddsPreserveCertainty):
        return perturb_row_logodds(probs, scheme.dist, rng)
    if isinstance(scheme, RandomReplace):
        return random_row(len(probs), scheme.dist, rng)
    raise TypeError(f"unknown noise scheme {scheme!r}")


def perturb_network(net: DiagnosticNetwork, scheme: NoiseScheme, seed: SeedSpec,
                    degenerate: list | None = None) -> DiagnosticNetwork:
    """Return a new network with every CPT row transformed by ``scheme``.

    Rows are visited finding-major, disease-minor from one RNG stream, so the
    result depends only on ``(net, scheme, seed)``. Priors are copied as-is.

    When ``degenerate`` is a list, rows that cannot be renormalized are replaced
    by the uniform row and their ``(finding, disease)`` pair is appended to it;
    otherwise :class:`DegenerateRow` propagates.
    """
    rng = seed.rng()
    rows = []
    for row in net.rows():
        try:
            new = perturb_row(scheme, row.probs, rng)
        except DegenerateRow as exc:
            if degenerate is None:
                raise DegenerateRow(str(exc), row.finding, row.disease) from exc
            degenerate.append((row.finding, row.disease))
            new = _uniform_row(len(row.probs))
        rows.append(ConditionalRow(row.finding, row.disease, tuple(new.tolist())))
    return net.with_cpt(rows)
