"""Distribution comparison metrics and synthetic counting statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDistributionError, ValidationError

RNG_ALGORITHM = "numpy.random.PCG64"


def _common_support(p: dict, q: dict) -> list:
    keys = set(p) | set(q)
    if not keys:
        raise EmptyDistributionError("both distributions are empty")
    return sorted(keys)


def similarity(p: dict, q: dict) -> float:
    """Bhattacharyya-style overlap (sum sqrt(P P'))^2 / (sum P sum P')."""
    keys = _common_support(p, q)
    sp = sum(p.get(k, 0.0) for k in keys)
    sq = sum(q.get(k, 0.0) for k in keys)
    if sp <= 0 or sq <= 0:
        raise EmptyDistributionError("a distribution has zero total mass")
    s = sum(np.sqrt(p.get(k, 0.0) * q.get(k, 0.0)) for k in keys)
    return float(s * s / (sp * sq))


def tvd(p: dict, q: dict) -> float:
    """Total variation distance, sum |P - P'| / 2 (after normalization)."""
    keys = _common_support(p, q)
    sp = sum(p.get(k, 0.0) for k in keys)
    sq = sum(q.get(k, 0.0) for k in keys)
    if sp <= 0 or sq <= 0:
        raise EmptyDistributionError("a distribution has zero total mass")
    return float(sum(abs(p.get(k, 0.0) / sp - q.get(k, 0.0) / sq) for k in keys) / 2)


@dataclass(frozen=True)
class CountRecord:
    """Outcome counts from a finite number of shots."""

    counts: dict = field(repr=False)
    shots: int
    seed: int | None = None

    def frequencies(self) -> dict:
        return {k: v / self.shots for k, v in self.counts.items()}


def sample_counts(p: dict, shots: int, seed: int) -> CountRecord:
    """Multinomial draw from a distribution; sub-normalized distributions get
    an implicit no-detection bucket for the missing mass."""
    if shots <= 0:
        raise ValidationError("shots must be positive")
    keys = sorted(p)
    if not keys:
        raise EmptyDistributionError("cannot sample an empty distribution")
    probs = np.array([p[k] for k in keys], dtype=float)
    if probs.min() < -1e-12:
        raise ValidationError("negative probability")
    total = probs.sum()
    if total > 1 + 1e-9:
        raise ValidationError(f"probabilities sum to {total} > 1")
    rng = np.random.default_rng(seed)
    if total < 1 - 1e-12:
        draw = rng.multinomial(shots, np.append(probs, 1.0 - total))[:-1]
    else:
        draw = rng.multinomial(shots, probs / total)
    return CountRecord({k: int(c) for k, c in zip(keys, draw)}, shots, seed)


def poisson_sigma(record: CountRecord) -> dict:
    """Per-outcome one-standard-deviation Poisson uncertainty, sqrt(N)."""
    return {k: float(np.sqrt(v)) for k, v in record.counts.items()}


def metrics_report(p: dict, q: dict, shots: int | None = None,
                   seed: int | None = None) -> dict:
    doc = {"similarity": similarity(p, q), "tvd": tvd(p, q)}
    if shots is not None:
        doc["shots"] = shots
    if seed is not None:
        doc["seed"] = seed
        doc["rng"] = RNG_ALGORITHM
    return doc
