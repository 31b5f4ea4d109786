"""Categorical sequence search space: alphabet, Hamming geometry, seeded sampling.

A sequence is a fixed-length tuple of alphabet indices.  All sampling helpers
take an explicit ``numpy.random.Generator`` so that every draw stream is
reproducible from a single integer seed and independent runs can own
independent generators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Sequence = tuple[int, ...]

TOKEN_SEPARATOR = ";"


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of operation tokens; index <-> token is a bijection."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("alphabet must be non-empty")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("alphabet tokens must be pairwise distinct")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def token(self, index: int) -> str:
        return self.tokens[index]

    def index(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise ValueError(f"unknown operation token: {token!r}") from None

    def to_text(self, seq: Sequence) -> str:
        """Render a sequence as ';'-joined operation tokens."""
        return TOKEN_SEPARATOR.join(self.tokens[i] for i in seq)

    def from_text(self, text: str) -> Sequence:
        if text == "":
            return ()
        return tuple(self.index(t) for t in text.split(TOKEN_SEPARATOR))

    def to_tokens(self, seq: Sequence) -> tuple[str, ...]:
        return tuple(self.tokens[i] for i in seq)


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic generator; identical seed gives an identical draw stream."""
    return np.random.default_rng(seed)


def check_sequence(seq: Sequence, alphabet: Alphabet, k: int | None = None) -> None:
    if k is not None and len(seq) != k:
        raise ValueError(f"sequence length {len(seq)} != expected {k}")
    n = len(alphabet)
    if any(not (0 <= i < n) for i in seq):
        raise ValueError("sequence contains an index outside the alphabet")


def hamming(a: Sequence, b: Sequence) -> int:
    """Number of positions where the two sequences differ."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return sum(x != y for x, y in zip(a, b))


def random_sequence(rng: np.random.Generator, alphabet: Alphabet, k: int) -> Sequence:
    """Uniform i.i.d. draw per position."""
    if k < 1:
        raise ValueError("sequence length must be >= 1")
    return tuple(int(v) for v in rng.integers(0, len(alphabet), size=k))


def stratified_sample(
    rng: np.random.Generator, n: int, alphabet: Alphabet, k: int
) -> list[Sequence]:
    """Per-position stratified batch of n sequences.

    At every position the n draws cover each symbol either floor(n/|A|) or
    ceil(n/|A|) times; the symbols receiving the extra occurrence are chosen
    uniformly, and each position's column is shuffled independently.
    """
    if n < 1:
        raise ValueError("sample count must be >= 1")
    a = len(alphabet)
    base, extra = divmod(n, a)
    columns = np.empty((k, n), dtype=np.int64)
    symbols = np.arange(a)
    for pos in range(k):
        pool = np.repeat(symbols, base) if base > 0 else np.empty(0, dtype=np.int64)
        if extra:
            pool = np.concatenate([pool, rng.permutation(a)[:extra]])
        rng.shuffle(pool)
        columns[pos] = pool
    return [tuple(int(columns[pos, i]) for pos in range(k)) for i in range(n)]


def random_point_in_ball(
    rng: np.random.Generator, center: Sequence, radius: int, alphabet: Alphabet
) -> Sequence:
    """Sample within Hamming distance `radius` of `center`.

    Distribution: draw d uniform in {0..radius}, pick d positions without
    replacement, resample each to a different symbol (uniform over the rest).
    """
    k = len(center)
    radius = max(0, min(radius, k))
    d = int(rng.integers(0, radius + 1))
    if d == 0:
        return tuple(center)
    positions = rng.choice(k, size=d, replace=False)
    a = len(alphabet)
    if a < 2:
        return tuple(center)
    out = list(center)
    for pos in positions:
        draw = int(rng.integers(0, a - 1))
        if draw >= out[pos]:
            draw += 1
        out[pos] = draw
    return tuple(out)


def _neighbor_feasible(pos: int, sym: int, current: Sequence, center: Sequence,
                       radius: int, d: int) -> bool:
    if current[pos] == center[pos]:
        return d + 1 <= radius
    # flipping a differing position either restores the center symbol or
    # keeps the distance unchanged
    return sym == center[pos] or d <= radius


def random_neighbor_in_ball(
    rng: np.random.Generator,
    current: Sequence,
    center: Sequence,
    radius: int,
    alphabet: Alphabet,
) -> Sequence:
    """Uniform draw over single-position changes of `current` that stay in the ball.

    Returns `current` unchanged when no feasible neighbour exists.  Sampling
    is by rejection from the uniform distribution over all K*(|A|-1) moves,
    which conditions to the uniform distribution over the feasible ones.
    """
    k = len(current)
    a = len(alphabet)
    if a < 2:
        return tuple(current)
    d = hamming(current, center)
    for _ in range(64 * k):
        pos = int(rng.integers(0, k))
        sym = int(rng.integers(0, a - 1))
        if sym >= current[pos]:
            sym += 1
        if _neighbor_feasible(pos, sym, current, center, radius, d):
            out = list(current)
            out[pos] = sym
            return tuple(out)
    # vanishing feasible set; fall back to exhaustive enumeration
    feasible = [
        (pos, sym)
        for pos in range(k)
        for sym in range(a)
        if sym != current[pos]
        and _neighbor_feasible(pos, sym, current, center, radius, d)
    ]
    if not feasible:
        return tuple(current)
    pos, sym = feasible[int(rng.integers(0, len(feasible)))]
    out = list(current)
    out[pos] = sym
    return tuple(out)
