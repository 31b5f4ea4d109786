"""Pure numpy implementation of the subsequence-kernel inner loops.

Drop-in twin of the compiled extension ``_sskfast``; selected at import time
by :mod:`seqtune.kernels` when the extension is unavailable (or when
``SEQTUNE_PURE=1`` is set).

The recurrence: let M(i,j) indicate a symbol match and A_p(i,j) the
gap-decayed weight of all order-p index pairs ending exactly at (i,j).  With
S_p the doubly decay-discounted prefix sum of A_p,

    A_1(i,j) = M(i,j)
    A_p(i,j) = M(i,j) * S_{p-1}(i-1, j-1)

and the kernel value is sum_p  tm^(2p) * sum_ij A_p(i,j).  The prefix sum
factorises into two one-dimensional scans (rows then columns), which is what
both backends exploit.
"""

from __future__ import annotations

import numpy as np

IMPLEMENTATION = "pure"


def _decay_prefix(a: np.ndarray, g: float) -> np.ndarray:
    """S(...,i,j) = sum_{i'<=i, j'<=j} g^(i-i') * g^(j-j') * a(...,i',j')."""
    s = a.copy()
    for i in range(1, s.shape[-2]):
        s[..., i, :] += g * s[..., i - 1, :]
    for j in range(1, s.shape[-1]):
        s[..., :, j] += g * s[..., :, j - 1]
    return s


def _order_sums(match: np.ndarray, tg: float, max_order: int) -> np.ndarray:
    """Per-order gap-decayed match-pair totals, batched over leading axes."""
    lead = match.shape[:-2]
    sums = np.zeros(lead + (max_order,))
    a = match.astype(float)
    sums[..., 0] = a.sum(axis=(-2, -1))
    for p in range(1, max_order):
        s = _decay_prefix(a, tg)
        a = np.zeros_like(a)
        a[..., 1:, 1:] = match[..., 1:, 1:] * s[..., :-1, :-1]
        sums[..., p] = a.sum(axis=(-2, -1))
    return sums


def _order_weights(theta_m: float, max_order: int) -> np.ndarray:
    return float(theta_m) ** (2 * np.arange(1, max_order + 1))


def ssk_pair(a, b, theta_m: float, theta_g: float, max_order: int) -> float:
    """Unnormalised kernel value between two index vectors."""
    a = np.asarray(a, dtype=np.int32)
    b = np.asarray(b, dtype=np.int32)
    match = a[:, None] == b[None, :]
    sums = _order_sums(match, theta_g, max_order)
    return float(sums @ _order_weights(theta_m, max_order))


def ssk_cross(A, B, theta_m: float, theta_g: float, max_order: int) -> np.ndarray:
    """Unnormalised kernel values for every row pair of two sequence matrices."""
    A = np.asarray(A, dtype=np.int32)
    B = np.asarray(B, dtype=np.int32)
    na, nb = A.shape[0], B.shape[0]
    out = np.empty((na, nb))
    weights = _order_weights(theta_m, max_order)
    # chunk the leading axis to bound the (chunk, nb, k, k) workspace
    cell = max(1, nb * A.shape[1] * B.shape[1])
    chunk = max(1, 4_000_000 // cell)
    for lo in range(0, na, chunk):
        hi = min(na, lo + chunk)
        match = A[lo:hi, None, :, None] == B[None, :, None, :]
        out[lo:hi] = _order_sums(match, theta_g, max_order) @ weights
    return out


def ssk_gram(X, theta_m: float, theta_g: float, max_order: int) -> np.ndarray:
    """Symmetric unnormalised Gram matrix over the rows of X."""
    X = np.asarray(X, dtype=np.int32)
    n = X.shape[0]
    out = np.empty((n, n))
    weights = _order_weights(theta_m, max_order)
    for i in range(n):
        match = X[i][None, :, None] == X[i:][:, None, :]
        vals = _order_sums(match, theta_g, max_order) @ weights
        out[i, i:] = vals
        out[i:, i] = vals
    return out


def gap_coeff_table(a, b, max_order: int, num_powers: int) -> np.ndarray:
    """Gap-decay polynomial coefficients of the kernel between two vectors.

    Returns C with C[p-1, d] = number of matched order-p index-tuple pairs
    whose total gap is d, so the kernel value at (tm, tg) is
    sum_{p,d} tm^(2p) * tg^d * C[p-1, d].
    """
    a = np.asarray(a, dtype=np.int32)
    b = np.asarray(b, dtype=np.int32)
    n, m = len(a), len(b)
    match = a[:, None] == b[None, :]
    out = np.zeros((max_order, num_powers))
    cur = np.zeros((n, m, num_powers))
    cur[:, :, 0] = match
    out[0] = cur.sum(axis=(0, 1))
    for p in range(1, max_order):
        s = _coeff_prefix(cur)
        nxt = np.zeros_like(cur)
        nxt[1:, 1:] = match[1:, 1:, None] * s[:-1, :-1]
        out[p] = nxt.sum(axis=(0, 1))
        cur = nxt
    return out


def _coeff_prefix(a: np.ndarray) -> np.ndarray:
    """Coefficient-space analogue of _decay_prefix: decay is a power shift."""
    s = a.copy()
    for i in range(1, s.shape[0]):
        s[i, :, 1:] += s[i - 1, :, :-1]
    for j in range(1, s.shape[1]):
        s[:, j, 1:] += s[:, j - 1, :-1]
    return s


def gap_coeff_rows(X, new, max_order: int, num_powers: int) -> np.ndarray:
    """Coefficient tables between every row of X and one vector."""
    X = np.asarray(X, dtype=np.int32)
    out = np.empty((X.shape[0], max_order, num_powers))
    for i in range(X.shape[0]):
        out[i] = gap_coeff_table(X[i], new, max_order, num_powers)
    return out
