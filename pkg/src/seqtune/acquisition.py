"""Expected improvement and its trust-region-constrained local-search maximiser.

The trust region is a Hamming ball around the best sequence found so far.
Its radius grows by one after a streak of improving evaluations, shrinks by
one after a streak of non-improving ones, and a radius of zero triggers a
restart from a fresh random centre (keeping all observed data).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .gp import GpModel, posterior_one
from .sequences import (
    Alphabet,
    Sequence,
    random_neighbor_in_ball,
    random_point_in_ball,
    random_sequence,
)

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class TrustRegionState:
    center: Sequence
    radius: int
    success_streak: int = 0
    fail_streak: int = 0
    restarts: int = 0

    def __post_init__(self):
        k = len(self.center)
        if not (0 <= self.radius <= k):
            raise ValueError(f"radius {self.radius} outside [0, {k}]")
        if self.success_streak < 0 or self.fail_streak < 0:
            raise ValueError("streak counters must be non-negative")
        if self.success_streak and self.fail_streak:
            raise ValueError("at most one streak may be non-zero")


@dataclass(frozen=True)
class AcqConfig:
    ls_budget: int = 100
    succ_threshold: int = 3
    fail_threshold: int = 20

    def __post_init__(self):
        if self.ls_budget < 1:
            raise ValueError("ls_budget must be >= 1")


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / _SQRT2)


def _norm_pdf(z: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def expected_improvement(model: GpModel, seq: Sequence, incumbent: float) -> float:
    """Closed-form EI of the posterior at `seq` over the incumbent value.

    The objective is maximised (use -QoR); returns 0 when the posterior is
    effectively deterministic.
    """
    mu, var = posterior_one(model, seq)
    sigma = math.sqrt(var)
    if sigma <= SIGMA_FLOOR:
        return 0.0
    z = (mu - incumbent) / sigma
    return sigma * (z * _norm_cdf(z) + _norm_pdf(z))


def local_search_maximize(
    model: GpModel,
    tr: TrustRegionState,
    cfg: AcqConfig,
    rng: np.random.Generator,
    alphabet: Alphabet,
) -> Sequence:
    """Hill-climb EI inside the trust region with a fixed evaluation budget.

    Starts from a random point in the ball and repeatedly scores a random
    Hamming-1 neighbour, moving only on strict improvement.  Returns the
    best-scoring visited sequence, preferring ones not already in the
    training set.
    """
    incumbent = float(np.max(model.train_y_raw))
    train_set = set(model.train_x)
    # scores are deterministic per model, so revisited candidates are free
    score_memo: dict[Sequence, float] = {}

    def score_of(seq: Sequence) -> float:
        s = score_memo.get(seq)
        if s is None:
            s = expected_improvement(model, seq, incumbent)
            score_memo[seq] = s
        return s

    current = random_point_in_ball(rng, tr.center, tr.radius, alphabet)
    current_score = score_of(current)
    evals = 1

    best_novel: tuple[float, Sequence] | None = None
    best_any = (current_score, current)
    if current not in train_set:
        best_novel = (current_score, current)

    while evals < cfg.ls_budget:
        neighbor = random_neighbor_in_ball(rng, current, tr.center, tr.radius, alphabet)
        score = score_of(neighbor)
        evals += 1
        if score > best_any[0]:
            best_any = (score, neighbor)
        if neighbor not in train_set and (best_novel is None or score > best_novel[0]):
            best_novel = (score, neighbor)
        if score > current_score:
            current, current_score = neighbor, score

    return best_novel[1] if best_novel is not None else best_any[1]


def update_trust_region(
    tr: TrustRegionState, improved: bool, cfg: AcqConfig | None = None
) -> TrustRegionState:
    """Apply one improve/fail event to the streak counters and radius."""
    cfg = cfg or AcqConfig()
    k = len(tr.center)
    if improved:
        succ = tr.success_streak + 1
        if succ >= cfg.succ_threshold:
            return replace(tr, radius=min(tr.radius + 1, k),
                           success_streak=0, fail_streak=0)
        return replace(tr, success_streak=succ, fail_streak=0)
    fail = tr.fail_streak + 1
    if fail >= cfg.fail_threshold:
        return replace(tr, radius=max(tr.radius - 1, 0),
                       success_streak=0, fail_streak=0)
    return replace(tr, fail_streak=fail, success_streak=0)


def restart_trust_region(
    tr: TrustRegionState, rng: np.random.Generator, alphabet: Alphabet, k: int
) -> TrustRegionState:
    """Reset an exhausted trust region: full radius, fresh random centre."""
    if tr.radius != 0:
        raise ValueError("restart requires radius 0")
    return TrustRegionState(
        center=random_sequence(rng, alphabet, k),
        radius=k,
        success_streak=0,
        fail_streak=0,
        restarts=tr.restarts + 1,
    )
