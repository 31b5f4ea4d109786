"""Sequence kernels: subsequence string kernel (SSK) and positional overlap.

The SSK scores a pair of operation sequences by the gap-decayed, ordered
subsequences they share, with a match decay ``theta_m`` damping long shared
subsequences and a gap decay ``theta_g`` damping non-contiguous ones.  Gram
matrices are built from the normalised kernel, which keeps the diagonal at 1
regardless of sequence length.

The DP inner loops live in a compiled extension with a pure numpy fallback;
set SEQTUNE_PURE=1 to force the fallback.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .sequences import Sequence

if os.environ.get("SEQTUNE_PURE"):
    from . import _sskpure as _core
else:
    try:
        from . import _sskfast as _core  # type: ignore[no-redef]
    except ImportError:
        from . import _sskpure as _core  # type: ignore[no-redef]

BACKEND = _core.IMPLEMENTATION


class ZeroSelfSimilarityError(ValueError):
    """Normalisation is undefined when a self-kernel value is zero."""


@dataclass(frozen=True)
class SskParams:
    """Subsequence-kernel hyperparameters: decays in [0,1], max order >= 1."""

    theta_m: float = 0.5
    theta_g: float = 0.25
    max_order: int = 3

    def __post_init__(self):
        if not (0.0 <= self.theta_m <= 1.0 and 0.0 <= self.theta_g <= 1.0):
            raise ValueError("decay parameters must lie in [0, 1]")
        if self.max_order < 1:
            raise ValueError("max_order must be >= 1")


@dataclass(frozen=True)
class OverlapParams:
    """Per-position lengthscales of the positional overlap kernel."""

    lengthscales: tuple[float, ...]

    def __post_init__(self):
        if not self.lengthscales or any(l <= 0 for l in self.lengthscales):
            raise ValueError("lengthscales must be positive")

    @classmethod
    def uniform(cls, k: int, value: float = 1.0) -> "OverlapParams":
        return cls(tuple(value for _ in range(k)))


def _seq_matrix(seqs: list[Sequence]) -> np.ndarray:
    arr = np.asarray(seqs, dtype=np.int32)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return arr


def ssk_contribution_bruteforce(u: Sequence, seq: Sequence, params: SskParams) -> float:
    """Contribution of fragment u to seq by explicit index-tuple enumeration.

    c_u(seq) = theta_m^|u| * sum over strictly increasing index tuples whose
    symbols equal u of theta_g^(span - |u|).  Testing oracle; exponential in
    |u| and deliberately independent of the DP path.
    """
    lu = len(u)
    if lu > len(seq):
        return 0.0
    total = 0.0
    for idx in itertools.combinations(range(len(seq)), lu):
        if all(seq[i] == u[j] for j, i in enumerate(idx)):
            gap = idx[-1] - idx[0] + 1 - lu
            total += params.theta_g ** gap
    return (params.theta_m ** lu) * total


def ssk_value(a: Sequence, b: Sequence, params: SskParams) -> float:
    """Unnormalised SSK: sum over shared subsequences up to max_order."""
    return float(
        _core.ssk_pair(
            np.asarray(a, dtype=np.int32),
            np.asarray(b, dtype=np.int32),
            params.theta_m,
            params.theta_g,
            params.max_order,
        )
    )


def ssk_normalized(a: Sequence, b: Sequence, params: SskParams) -> float:
    """Cosine-normalised SSK; 1 when a == b, bounded by 1 in magnitude."""
    kaa = ssk_value(a, a, params)
    kbb = ssk_value(b, b, params)
    if kaa <= 0.0 or kbb <= 0.0:
        raise ZeroSelfSimilarityError(
            "self-similarity is zero; normalisation undefined (theta_m == 0?)"
        )
    return ssk_value(a, b, params) / float(np.sqrt(kaa * kbb))


def _normalize_gram(raw: np.ndarray) -> np.ndarray:
    d = np.sqrt(np.diag(raw))
    if np.any(d <= 0.0) or not np.all(np.isfinite(d)):
        raise ZeroSelfSimilarityError(
            "self-similarity is zero; normalisation undefined (theta_m == 0?)"
        )
    out = raw / np.outer(d, d)
    np.fill_diagonal(out, 1.0)
    return out


def gram(seqs: list[Sequence], params: SskParams) -> np.ndarray:
    """Normalised SSK Gram matrix; symmetric with unit diagonal."""
    if not seqs:
        raise ValueError("need at least one sequence")
    X = _seq_matrix(seqs)
    raw = _core.ssk_gram(X, params.theta_m, params.theta_g, params.max_order)
    return _normalize_gram(raw)


def ssk_cross_normalized(
    a_seqs: list[Sequence],
    b_seqs: list[Sequence],
    params: SskParams,
    a_self: np.ndarray | None = None,
    b_self: np.ndarray | None = None,
) -> np.ndarray:
    """Normalised kernel values between two sequence lists."""
    A = _seq_matrix(a_seqs)
    B = _seq_matrix(b_seqs)
    raw = _core.ssk_cross(A, B, params.theta_m, params.theta_g, params.max_order)
    if a_self is None:
        a_self = np.array([_core.ssk_pair(r, r, params.theta_m, params.theta_g,
                                          params.max_order) for r in A])
    if b_self is None:
        b_self = np.array([_core.ssk_pair(r, r, params.theta_m, params.theta_g,
                                          params.max_order) for r in B])
    denom = np.sqrt(np.outer(a_self, b_self))
    if np.any(denom <= 0.0):
        raise ZeroSelfSimilarityError("self-similarity is zero")
    return raw / denom


def ssk_self_values(seqs: list[Sequence], params: SskParams) -> np.ndarray:
    X = _seq_matrix(seqs)
    return np.array(
        [_core.ssk_pair(r, r, params.theta_m, params.theta_g, params.max_order)
         for r in X]
    )


def overlap_value(a: Sequence, b: Sequence, params: OverlapParams) -> float:
    """Positional overlap kernel: exp(-(1/K) * sum_i [a_i != b_i] / theta_i)."""
    if len(a) != len(b) or len(a) != len(params.lengthscales):
        raise ValueError("sequence lengths must match the lengthscale count")
    ls = np.asarray(params.lengthscales)
    mism = np.asarray(a) != np.asarray(b)
    return float(np.exp(-np.sum(mism / ls) / len(a)))


def overlap_gram(seqs: list[Sequence], params: OverlapParams) -> np.ndarray:
    X = np.asarray(seqs)
    mism = X[:, None, :] != X[None, :, :]
    ls = np.asarray(params.lengthscales)
    return np.exp(-(mism / ls).sum(axis=2) / X.shape[1])


def overlap_cross(
    a_seqs: list[Sequence], b_seqs: list[Sequence], params: OverlapParams
) -> np.ndarray:
    A = np.asarray(a_seqs)
    B = np.asarray(b_seqs)
    mism = A[:, None, :] != B[None, :, :]
    ls = np.asarray(params.lengthscales)
    return np.exp(-(mism / ls).sum(axis=2) / A.shape[1])


def finite_difference_gradient(
    objective: Callable[[np.ndarray], float],
    theta: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    step: float = 1e-5,
) -> np.ndarray:
    """Central finite differences with perturbations clamped into the box.

    The divided difference uses the actually-evaluated span, so estimates
    stay first-order accurate at the box boundary.
    """
    theta = np.asarray(theta, dtype=float)
    grad = np.zeros_like(theta)
    for i in range(len(theta)):
        hi = min(theta[i] + step, upper[i])
        lo = max(theta[i] - step, lower[i])
        span = hi - lo
        if span <= 0.0:
            grad[i] = 0.0
            continue
        tp = theta.copy()
        tp[i] = hi
        tm = theta.copy()
        tm[i] = lo
        fp = objective(tp)
        fm = objective(tm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise FloatingPointError(
                f"objective not finite at perturbed coordinate {i}"
            )
        grad[i] = (fp - fm) / span
    return grad


def kernel_param_gradient(
    seqs: list[Sequence],
    targets: np.ndarray,
    params: SskParams,
    nll_fn: Callable[[list[Sequence], np.ndarray, SskParams], float],
    step: float = 1e-5,
) -> np.ndarray:
    """Finite-difference gradient of an NLL objective over (theta_m, theta_g)."""

    def objective(t: np.ndarray) -> float:
        p = SskParams(float(t[0]), float(t[1]), params.max_order)
        return nll_fn(seqs, targets, p)

    theta = np.array([params.theta_m, params.theta_g])
    return finite_difference_gradient(
        objective, theta, np.zeros(2), np.ones(2), step=step
    )


class SskGramCache:
    """Incremental Gram evaluator for a growing training set.

    Stores per-pair gap-decay polynomial coefficient tables, which are
    independent of (theta_m, theta_g); a Gram matrix at new decays is then a
    single tensor contraction instead of a fresh DP per pair.  This is what
    makes repeated likelihood evaluations inside the fit loop cheap.
    """

    def __init__(self, k_len: int, max_order: int):
        self.k_len = k_len
        self.max_order = max_order
        self.num_powers = max(1, 2 * k_len - 1)
        self._n = 0
        self._num_pairs = 0
        width = max_order * self.num_powers
        # flat buffers, capacity-doubled: pair (i, j) with i < j sits at
        # offset j*(j-1)/2 + i, so a Gram evaluation is one contiguous gemv
        self._pair_rows = np.zeros((64, width))
        self._diag = np.zeros((16, width))
        self._X = np.zeros((0, k_len), dtype=np.int32)
        self._tril_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def __len__(self) -> int:
        return self._n

    @staticmethod
    def _ensure(buf: np.ndarray, need: int) -> np.ndarray:
        if need <= buf.shape[0]:
            return buf
        cap = buf.shape[0]
        while cap < need:
            cap *= 2
        out = np.zeros((cap, buf.shape[1]))
        out[: buf.shape[0]] = buf
        return out

    def extend(self, seqs: list[Sequence]) -> None:
        for seq in seqs:
            if len(seq) != self.k_len:
                raise ValueError("all cached sequences must share one length")
            new = np.asarray(seq, dtype=np.int32)
            n = self._n
            self._pair_rows = self._ensure(self._pair_rows, self._num_pairs + n)
            self._diag = self._ensure(self._diag, n + 1)
            if n > 0:
                rows = _core.gap_coeff_rows(self._X, new, self.max_order,
                                            self.num_powers).reshape(n, -1)
                self._pair_rows[self._num_pairs: self._num_pairs + n] = rows
            self._num_pairs += n
            self._diag[n] = _core.gap_coeff_table(new, new, self.max_order,
                                                  self.num_powers).ravel()
            self._X = np.vstack([self._X, new[None, :]])
            self._n = n + 1

    def _weights(self, theta_m: float, theta_g: float) -> np.ndarray:
        powers_m = float(theta_m) ** (2 * np.arange(1, self.max_order + 1))
        powers_g = float(theta_g) ** np.arange(self.num_powers)
        return np.outer(powers_m, powers_g).ravel()

    def _tril(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        hit = self._tril_cache.get(n)
        if hit is None:
            hit = np.tril_indices(n, k=-1)
            self._tril_cache = {n: hit}
        return hit

    def raw_gram(self, theta_m: float, theta_g: float) -> np.ndarray:
        n = self._n
        w = self._weights(theta_m, theta_g)
        vals = self._pair_rows[: self._num_pairs] @ w
        out = np.empty((n, n))
        rows, cols = self._tril(n)
        out[rows, cols] = vals
        out[cols, rows] = vals
        np.fill_diagonal(out, self._diag[:n] @ w)
        return out

    def gram(self, theta_m: float, theta_g: float) -> np.ndarray:
        return _normalize_gram(self.raw_gram(theta_m, theta_g))

    def self_values(self, theta_m: float, theta_g: float) -> np.ndarray:
        return self._diag[: self._n] @ self._weights(theta_m, theta_g)


class OverlapGramCache:
    """Incremental mismatch-mask cache for the overlap kernel."""

    def __init__(self, k_len: int):
        self.k_len = k_len
        self._X = np.zeros((0, k_len), dtype=np.int32)
        self._mism = np.zeros((0, 0, k_len), dtype=bool)

    def __len__(self) -> int:
        return self._X.shape[0]

    def extend(self, seqs: list[Sequence]) -> None:
        for seq in seqs:
            new = np.asarray(seq, dtype=np.int32)
            row = self._X != new[None, :]
            n = self._X.shape[0]
            m = np.zeros((n + 1, n + 1, self.k_len), dtype=bool)
            m[:n, :n] = self._mism
            m[:n, n] = row
            m[n, :n] = row
            self._mism = m
            self._X = np.vstack([self._X, new[None, :]])

    def gram(self, lengthscales: np.ndarray) -> np.ndarray:
        inv = 1.0 / np.asarray(lengthscales)
        return np.exp(-(self._mism @ inv) / self.k_len)

    def gram_and_grads(
        self, lengthscales: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Gram plus dK/d(theta_i) stacked on the last axis."""
        ls = np.asarray(lengthscales)
        k = self.gram(ls)
        # dK/dtheta_i = K * mism_i / (k_len * theta_i^2)
        grads = k[:, :, None] * self._mism / (self.k_len * ls**2)
        return k, grads


class SskKernel:
    """GP-facing adapter bundling SskParams with gram/cross evaluation."""

    lower = np.array([0.0, 0.0])
    upper = np.array([1.0, 1.0])

    def __init__(self, params: SskParams):
        self.params = params

    def theta(self) -> np.ndarray:
        return np.array([self.params.theta_m, self.params.theta_g])

    def with_theta(self, theta: np.ndarray) -> "SskKernel":
        return SskKernel(
            SskParams(float(theta[0]), float(theta[1]), self.params.max_order)
        )

    def gram(self, seqs: list[Sequence]) -> np.ndarray:
        return gram(seqs, self.params)

    def make_cache(self, k_len: int):
        return SskGramCache(k_len, self.params.max_order)

    def cache_gram(self, cache: SskGramCache, theta: np.ndarray) -> np.ndarray:
        return cache.gram(float(theta[0]), float(theta[1]))

    analytic_gradient = False

    def cross(
        self, train: list[Sequence], test: list[Sequence],
        train_self: np.ndarray | None = None,
    ) -> np.ndarray:
        return ssk_cross_normalized(train, test, self.params, a_self=train_self)

    def cross_one(
        self, train_matrix: np.ndarray, train_self: np.ndarray, seq: Sequence
    ) -> np.ndarray:
        """Normalised kernel column against one candidate, array-cached path."""
        p = self.params
        arr = np.asarray(seq, dtype=np.int32)
        raw = _core.ssk_cross(train_matrix, arr[None, :],
                              p.theta_m, p.theta_g, p.max_order)[:, 0]
        self_v = _core.ssk_pair(arr, arr, p.theta_m, p.theta_g, p.max_order)
        denom = np.sqrt(train_self * self_v)
        if np.any(denom <= 0.0):
            raise ZeroSelfSimilarityError("self-similarity is zero")
        return raw / denom

    def train_self_values(self, train: list[Sequence]) -> np.ndarray:
        return ssk_self_values(train, self.params)


class OverlapKernel:
    """GP-facing adapter for the positional overlap kernel."""

    def __init__(self, params: OverlapParams):
        self.params = params
        k = len(params.lengthscales)
        self.lower = np.full(k, 1e-3)
        self.upper = np.full(k, 1e3)
        self._inv_ls = 1.0 / np.asarray(params.lengthscales)

    def theta(self) -> np.ndarray:
        return np.asarray(self.params.lengthscales, dtype=float)

    def with_theta(self, theta: np.ndarray) -> "OverlapKernel":
        return OverlapKernel(OverlapParams(tuple(float(t) for t in theta)))

    def gram(self, seqs: list[Sequence]) -> np.ndarray:
        return overlap_gram(seqs, self.params)

    def make_cache(self, k_len: int):
        return OverlapGramCache(k_len)

    def cache_gram(self, cache: OverlapGramCache, theta: np.ndarray) -> np.ndarray:
        return cache.gram(theta)

    analytic_gradient = True

    def cache_gram_and_grads(self, cache: OverlapGramCache, theta: np.ndarray):
        return cache.gram_and_grads(theta)

    def cross(
        self, train: list[Sequence], test: list[Sequence],
        train_self: np.ndarray | None = None,
    ) -> np.ndarray:
        return overlap_cross(train, test, self.params)

    def cross_one(
        self, train_matrix: np.ndarray, train_self: np.ndarray, seq: Sequence
    ) -> np.ndarray:
        mism = train_matrix != np.asarray(seq, dtype=np.int32)
        return np.exp(-(mism @ self._inv_ls) / train_matrix.shape[1])

    def train_self_values(self, train: list[Sequence]) -> np.ndarray:
        return np.ones(len(train))
