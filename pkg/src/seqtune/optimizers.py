"""Optimisation loops over one black-box interface with strict budget accounting.

Every optimizer consumes black-box evaluations through a `BlackBox`, which
counts every call (duplicates included), records an `EvalRecord` per call and
enforces the budget.  All randomness flows through one explicit generator per
run, so (optimizer, config, seed) determines the run history exactly.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .acquisition import (
    AcqConfig,
    TrustRegionState,
    local_search_maximize,
    restart_trust_region,
    update_trust_region,
)
from .gp import FitConfig, GpFitError, fit
from .kernels import OverlapKernel, OverlapParams, SskKernel, SskParams
from .sequences import (
    Alphabet,
    Sequence,
    random_point_in_ball,
    random_sequence,
    stratified_sample,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalRecord:
    seq: Sequence
    area: int
    delay: int
    qor: float
    iteration: int
    wall_time: float


@dataclass
class RunHistory:
    records: list[EvalRecord] = field(default_factory=list)

    @property
    def best_so_far(self) -> list[float]:
        trace = []
        best = np.inf
        for r in self.records:
            best = min(best, r.qor)
            trace.append(best)
        return trace

    @property
    def best_record(self) -> EvalRecord:
        best = self.records[0]
        for r in self.records[1:]:
            if r.qor < best.qor:
                best = r
        return best

    @property
    def best_qor(self) -> float:
        return self.best_record.qor


class BudgetExhausted(RuntimeError):
    pass


class StopRun(Exception):
    """Raised internally when a stop-at-QoR threshold has been reached."""


class BlackBox:
    """Budgeted, recording wrapper around an evaluation function."""

    def __init__(self, eval_fn, n_max: int, stop_at_qor: float | None = None):
        if n_max < 1:
            raise ValueError("budget must be >= 1")
        self._eval_fn = eval_fn
        self.n_max = n_max
        self.stop_at_qor = stop_at_qor
        self.history = RunHistory()
        self._best = np.inf

    @property
    def calls_used(self) -> int:
        return len(self.history.records)

    @property
    def remaining(self) -> int:
        return self.n_max - self.calls_used

    @property
    def best_qor(self) -> float:
        return self._best

    def evaluate(self, seq: Sequence) -> tuple[int, int, float]:
        if self.remaining <= 0:
            raise BudgetExhausted(f"budget of {self.n_max} evaluations spent")
        t0 = time.perf_counter()
        area, delay, qor = self._eval_fn(seq)
        wall = time.perf_counter() - t0
        self.history.records.append(
            EvalRecord(tuple(seq), int(area), int(delay), float(qor),
                       iteration=self.calls_used, wall_time=wall)
        )
        self._best = min(self._best, qor)
        if self.stop_at_qor is not None and self._best <= self.stop_at_qor:
            raise StopRun
        return int(area), int(delay), float(qor)


@dataclass
class GaConfig:
    population: int = 20
    tournament: int = 3
    crossover_rate: float = 0.5
    mutation_rate: float | None = None  # default 1/K
    elitism: int = 1


@dataclass
class RunConfig:
    alphabet: Alphabet
    k: int = 20
    n_init: int = 20
    ssk: SskParams = field(default_factory=SskParams)
    fit: FitConfig = field(default_factory=FitConfig)
    refit_steps: int = 3
    warm_start: bool = True
    acq: AcqConfig = field(default_factory=AcqConfig)
    jitter: float = 1e-6
    ga: GaConfig = field(default_factory=GaConfig)

    def __post_init__(self):
        if self.k < 1 or self.n_init < 1:
            raise ValueError("k and n_init must be >= 1")


def qor_improvement(best_qor: float, ref_qor: float) -> float:
    """Relative improvement over the reference flow, in percent."""
    if ref_qor <= 0:
        raise ValueError("reference QoR must be positive")
    return 100.0 * (ref_qor - best_qor) / ref_qor


def _evaluate_initial(bb: BlackBox, config: RunConfig, rng) -> list[Sequence]:
    seqs = []
    for _ in range(min(config.n_init, bb.remaining)):
        seqs.append(random_sequence(rng, config.alphabet, config.k))
        bb.evaluate(seqs[-1])
    return seqs


def _bo_loop(bb: BlackBox, config: RunConfig, rng, kernel_kind: str) -> None:
    """Shared skeleton of the trust-region and standard BO loops.

    kernel_kind "ssk" uses the subsequence kernel inside an adaptive trust
    region; "overlap" uses the positional kernel with the radius pinned at K
    (full space, no schedule, no restarts).
    """
    train_x = _evaluate_initial(bb, config, rng)
    if bb.remaining <= 0:
        return
    train_y = [-r.qor for r in bb.history.records]

    best_idx = int(np.argmin([r.qor for r in bb.history.records]))
    tr = TrustRegionState(center=bb.history.records[best_idx].seq, radius=config.k)

    if kernel_kind == "ssk":
        kernel = SskKernel(config.ssk)
    else:
        kernel = OverlapKernel(OverlapParams.uniform(config.k))
    cache = kernel.make_cache(config.k)
    cache.extend(train_x)

    theta = kernel.theta()
    first_fit = True
    while bb.remaining > 0:
        steps = config.fit.steps if (first_fit or not config.warm_start) \
            else config.refit_steps
        fit_cfg = replace(config.fit, steps=steps)
        model = None
        try:
            model = fit(
                train_x,
                np.asarray(train_y),
                kernel.with_theta(theta).params,
                fit_cfg,
                jitter=config.jitter,
                gram_cache=cache,
            )
            first_fit = False
            if config.warm_start:
                theta = model.kernel.theta()
        except GpFitError as exc:
            log.warning("GP fit failed (%s); proposing a random point", exc)

        if model is not None:
            proposal = local_search_maximize(model, tr, config.acq, rng,
                                             config.alphabet)
        else:
            proposal = random_point_in_ball(rng, tr.center, tr.radius,
                                            config.alphabet)

        best_before = bb.best_qor
        _, _, qor = bb.evaluate(proposal)
        improved = qor < best_before

        train_x.append(proposal)
        train_y.append(-qor)
        cache.extend([proposal])

        if kernel_kind == "ssk":
            if improved:
                tr = replace(tr, center=proposal)
            tr = update_trust_region(tr, improved, config.acq)
            if tr.radius == 0:
                tr = restart_trust_region(tr, rng, config.alphabet, config.k)
        else:
            if improved:
                tr = replace(tr, center=proposal)


def run_boils(bb: BlackBox, config: RunConfig, rng) -> RunHistory:
    """Trust-region BO with the subsequence kernel (the full algorithm)."""
    try:
        _bo_loop(bb, config, rng, kernel_kind="ssk")
    except StopRun:
        pass
    return bb.history


def run_sbo(bb: BlackBox, config: RunConfig, rng) -> RunHistory:
    """Standard BO: positional overlap kernel, full-space hill climbing."""
    try:
        _bo_loop(bb, config, rng, kernel_kind="overlap")
    except StopRun:
        pass
    return bb.history


def run_rs(bb: BlackBox, config: RunConfig, rng) -> RunHistory:
    """Random search via per-position stratified batches."""
    try:
        while bb.remaining > 0:
            batch = stratified_sample(
                rng, min(len(config.alphabet), bb.remaining),
                config.alphabet, config.k,
            )
            for seq in batch:
                bb.evaluate(seq)
    except StopRun:
        pass
    return bb.history


def run_ga(bb: BlackBox, config: RunConfig, rng) -> RunHistory:
    """Generational GA: tournament selection, uniform crossover, elitism."""
    ga = config.ga
    if ga.population < 2:
        raise ValueError("population must be >= 2")
    mut_rate = ga.mutation_rate if ga.mutation_rate is not None else 1.0 / config.k
    a_size = len(config.alphabet)

    def mutate(seq: Sequence) -> Sequence:
        out = list(seq)
        for pos in range(config.k):
            if rng.random() < mut_rate:
                draw = int(rng.integers(0, a_size - 1))
                if draw >= out[pos]:
                    draw += 1
                out[pos] = draw
        return tuple(out)

    def crossover(p1: Sequence, p2: Sequence) -> Sequence:
        mask = rng.random(config.k) < ga.crossover_rate
        return tuple(p2[i] if mask[i] else p1[i] for i in range(config.k))

    def tournament(pop: list[tuple[Sequence, float]]) -> Sequence:
        size = min(ga.tournament, len(pop))
        idx = rng.choice(len(pop), size=size, replace=False)
        best = min(idx, key=lambda i: (pop[i][1], i))
        return pop[best][0]

    try:
        population: list[tuple[Sequence, float]] = []
        for _ in range(min(ga.population, bb.remaining)):
            seq = random_sequence(rng, config.alphabet, config.k)
            _, _, qor = bb.evaluate(seq)
            population.append((seq, qor))

        while bb.remaining > 0 and population:
            elites = sorted(range(len(population)),
                            key=lambda i: (population[i][1], i))[: ga.elitism]
            children: list[Sequence] = [population[i][0] for i in elites]
            while len(children) < ga.population:
                child = crossover(tournament(population), tournament(population))
                children.append(mutate(child))
            next_pop = []
            for seq in children:
                if bb.remaining <= 0:
                    break
                _, _, qor = bb.evaluate(seq)
                next_pop.append((seq, qor))
            population = next_pop
    except StopRun:
        pass
    return bb.history


def run_greedy(bb: BlackBox, config: RunConfig, rng) -> RunHistory:
    """Left-to-right construction, appending the best immediate extension."""
    prefix: list[int] = []
    try:
        while len(prefix) < config.k and bb.remaining > 0:
            best_tok = None
            best_qor = np.inf
            step_complete = True
            for tok in range(len(config.alphabet)):
                if bb.remaining <= 0:
                    step_complete = False
                    break
                _, _, qor = bb.evaluate(tuple(prefix + [tok]))
                if qor < best_qor:
                    best_qor, best_tok = qor, tok
            if not step_complete:
                break
            prefix.append(best_tok)
    except StopRun:
        pass
    return bb.history


OPTIMIZERS = {
    "boils": run_boils,
    "sbo": run_sbo,
    "ga": run_ga,
    "rs": run_rs,
    "greedy": run_greedy,
}
