"""Gaussian-process regression over operation sequences.

Exact zero-mean GP with a jittered Cholesky solve.  Targets are standardised
internally; hyperparameters are fitted by minimising the negative log
marginal likelihood with a projected Adam loop (each iterate is clamped back
into the kernel's box constraints).  The model retains the best iterate seen,
not the last one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.linalg.lapack import dtrtri

from .kernels import (
    OverlapKernel,
    OverlapParams,
    SskKernel,
    SskParams,
    ZeroSelfSimilarityError,
    finite_difference_gradient,
)
from .sequences import Sequence

MAX_JITTER = 1e-2

KernelParams = SskParams | OverlapParams


class GpFitError(RuntimeError):
    """Raised when the Gram matrix cannot be factorised at any usable jitter."""


def _kernel_for(params: KernelParams):
    if isinstance(params, SskParams):
        return SskKernel(params)
    if isinstance(params, OverlapParams):
        return OverlapKernel(params)
    raise TypeError(f"unsupported kernel parameters: {type(params).__name__}")


def _chol_with_escalation(k_mat: np.ndarray, jitter: float) -> tuple[np.ndarray, float]:
    """Cholesky of K + jitter*I, escalating jitter x10 up to MAX_JITTER."""
    j = jitter
    eye = np.eye(k_mat.shape[0])
    while True:
        try:
            return np.linalg.cholesky(k_mat + j * eye), j
        except np.linalg.LinAlgError:
            j = jitter * 10.0 if j == 0.0 else j * 10.0
            if j > MAX_JITTER:
                raise GpFitError(
                    f"Cholesky factorisation failed up to jitter {MAX_JITTER}"
                ) from None


def _nll_from_gram(k_mat: np.ndarray, y: np.ndarray, jitter: float) -> float:
    chol, _ = _chol_with_escalation(k_mat, jitter)
    alpha = cho_solve((chol, True), y)
    return float(np.sum(np.log(np.diag(chol))) + 0.5 * y @ alpha)


def nll(
    train_x: list[Sequence],
    train_y_std: np.ndarray,
    kernel_params: KernelParams,
    jitter: float = 1e-6,
) -> float:
    """Negative log marginal likelihood 0.5*logdet(K+jI) + 0.5*y'(K+jI)^-1 y.

    The constant n/2*log(2*pi) term is dropped; it does not depend on the
    hyperparameters being fitted.
    """
    y = np.asarray(train_y_std, dtype=float)
    kernel = _kernel_for(kernel_params)
    return _nll_from_gram(kernel.gram(train_x), y, jitter)


@dataclass
class FitConfig:
    learning_rate: float = 0.1
    steps: int = 60
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    restarts: int = 1

    def __post_init__(self):
        if self.steps < 0 or self.learning_rate <= 0 or self.restarts < 1:
            raise ValueError("invalid fit configuration")


@dataclass
class GpModel:
    """Fitted GP with cached factorisation; immutable once constructed."""

    train_x: list[Sequence]
    train_y_raw: np.ndarray
    y_mean: float
    y_std: float
    kernel: SskKernel | OverlapKernel
    jitter: float
    chol: np.ndarray
    alpha: np.ndarray
    train_self: np.ndarray
    chol_inv: np.ndarray
    train_matrix: np.ndarray
    final_nll: float = field(default=np.nan)

    @property
    def kernel_params(self) -> KernelParams:
        return self.kernel.params

    @property
    def train_y_std(self) -> np.ndarray:
        return (self.train_y_raw - self.y_mean) / self.y_std


def _standardise(y_raw: np.ndarray) -> tuple[np.ndarray, float, float]:
    mean = float(np.mean(y_raw))
    std = float(np.std(y_raw)) if len(y_raw) >= 2 else 0.0
    if std <= 0.0:
        std = 1.0
    return (y_raw - mean) / std, mean, std


# deterministic restart fractions inside the box (no RNG in the fit path)
_RESTART_FRACTIONS = (0.5, 0.25, 0.75, 0.1, 0.9, 0.35, 0.65)


def fit(
    train_x: list[Sequence],
    train_y_raw: np.ndarray,
    init_params: KernelParams,
    config: FitConfig | None = None,
    jitter: float = 1e-6,
    gram_cache=None,
    on_step: Callable[[np.ndarray, float], None] | None = None,
) -> GpModel:
    """Standardise targets and fit kernel hyperparameters by projected Adam.

    `gram_cache` is an optional pre-built incremental cache (see
    SskGramCache / OverlapGramCache) reused across refits of a growing
    training set; when absent, one is built here.
    """
    if not train_x:
        raise ValueError("need at least one training point")
    config = config or FitConfig()
    y_raw = np.asarray(train_y_raw, dtype=float)
    y, y_mean, y_std = _standardise(y_raw)

    kernel = _kernel_for(init_params)
    if gram_cache is None:
        gram_cache = kernel.make_cache(len(train_x[0]))
        gram_cache.extend(train_x)
    if len(gram_cache) != len(train_x):
        raise ValueError("gram cache does not cover the training set")

    eye = np.eye(len(train_x))

    def objective(theta: np.ndarray) -> float:
        try:
            return _nll_from_gram(kernel.cache_gram(gram_cache, theta), y, jitter)
        except (GpFitError, ZeroSelfSimilarityError):
            return np.inf

    def value_and_grad(theta: np.ndarray) -> tuple[float, np.ndarray | None]:
        if kernel.analytic_gradient:
            try:
                k_mat, grads = kernel.cache_gram_and_grads(gram_cache, theta)
                chol, _ = _chol_with_escalation(k_mat, jitter)
            except (GpFitError, ZeroSelfSimilarityError):
                return np.inf, None
            alpha = cho_solve((chol, True), y)
            obj = float(np.sum(np.log(np.diag(chol))) + 0.5 * y @ alpha)
            k_inv = cho_solve((chol, True), eye)
            inner = k_inv - np.outer(alpha, alpha)
            return obj, 0.5 * np.einsum("ab,abk->k", inner, grads)
        obj = objective(theta)
        if not np.isfinite(obj):
            return obj, None
        try:
            grad = finite_difference_gradient(objective, theta,
                                              kernel.lower, kernel.upper)
        except FloatingPointError:
            return obj, None
        return obj, grad

    best_theta = None
    best_obj = np.inf
    starts = [kernel.theta()]
    span = kernel.upper - kernel.lower
    for r in range(1, config.restarts):
        frac = _RESTART_FRACTIONS[(r - 1) % len(_RESTART_FRACTIONS)]
        starts.append(kernel.lower + frac * span)

    for theta0 in starts:
        theta = np.clip(np.asarray(theta0, dtype=float), kernel.lower, kernel.upper)
        obj, grad = value_and_grad(theta)
        if obj < best_obj:
            best_obj, best_theta = obj, theta.copy()
        m = np.zeros_like(theta)
        v = np.zeros_like(theta)
        for t in range(1, config.steps + 1):
            if grad is None:
                break
            m = config.adam_beta1 * m + (1 - config.adam_beta1) * grad
            v = config.adam_beta2 * v + (1 - config.adam_beta2) * grad * grad
            m_hat = m / (1 - config.adam_beta1**t)
            v_hat = v / (1 - config.adam_beta2**t)
            theta = theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
            theta = np.clip(theta, kernel.lower, kernel.upper)
            obj, grad = value_and_grad(theta)
            if on_step is not None:
                on_step(theta.copy(), obj)
            if obj < best_obj:
                best_obj, best_theta = obj, theta.copy()

    if best_theta is None or not np.isfinite(best_obj):
        raise GpFitError("no usable hyperparameters found (all factorisations failed)")

    fitted = kernel.with_theta(best_theta)
    k_mat = fitted.cache_gram(gram_cache, best_theta)
    chol, jitter_used = _chol_with_escalation(k_mat, jitter)
    alpha = cho_solve((chol, True), y)
    chol_inv, info = dtrtri(chol, lower=1)
    if info != 0:
        chol_inv = solve_triangular(chol, eye, lower=True)
    return GpModel(
        train_x=list(train_x),
        train_y_raw=y_raw,
        y_mean=y_mean,
        y_std=y_std,
        kernel=fitted,
        jitter=jitter_used,
        chol=chol,
        alpha=alpha,
        train_self=fitted.train_self_values(train_x),
        chol_inv=chol_inv,
        train_matrix=np.asarray(train_x, dtype=np.int32),
        final_nll=best_obj,
    )


def posterior(
    model: GpModel, test_x: list[Sequence]
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance at test sequences, in raw target units."""
    k_star = model.kernel.cross(model.train_x, test_x,
                                train_self=model.train_self)
    mu_std = k_star.T @ model.alpha
    v = model.chol_inv @ k_star
    # normalised kernels have unit prior variance at every point
    var_std = 1.0 - np.einsum("ij,ij->j", v, v)
    var_std = np.maximum(var_std, 0.0)
    mean = mu_std * model.y_std + model.y_mean
    var = var_std * model.y_std**2
    return mean, var


def posterior_one(model: GpModel, seq: Sequence) -> tuple[float, float]:
    """Posterior mean and variance at a single sequence (fast path)."""
    k_star = model.kernel.cross_one(model.train_matrix, model.train_self, seq)
    mu_std = float(k_star @ model.alpha)
    v = model.chol_inv @ k_star
    var_std = max(1.0 - float(v @ v), 0.0)
    return mu_std * model.y_std + model.y_mean, var_std * model.y_std**2
