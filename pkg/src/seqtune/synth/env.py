"""Black-box QoR evaluation against the native AIG environment.

QoR(seq) = area(seq)/area(ref) + delay(seq)/delay(ref), where the reference
statistics come from applying the fixed 10-pass reference flow to the fresh
circuit.  By construction the reference flow itself scores exactly 2.0.

`SynthEnv` memoises (graph, pass) applications and whole-sequence results;
both caches are sound because every pass is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..sequences import Alphabet, Sequence
from .aig import Aig, stats
from .passes import NATIVE_PASSES, ORACLE_ONLY_PASSES, apply_pass

NATIVE_TOKENS = NATIVE_PASSES
ALL_TOKENS = NATIVE_PASSES + ORACLE_ONLY_PASSES

REFERENCE_TOKENS = (
    "balance",
    "rewrite",
    "refactor",
    "balance",
    "rewrite",
    "rewrite -z",
    "balance",
    "refactor -z",
    "rewrite -z",
    "balance",
)


def native_alphabet() -> Alphabet:
    """The seven passes implemented natively."""
    return Alphabet(NATIVE_TOKENS)


def full_alphabet() -> Alphabet:
    """All eleven passes; the last four only run against an external oracle."""
    return Alphabet(ALL_TOKENS)


def reference_sequence(alphabet: Alphabet | None = None) -> Sequence:
    """The fixed reference flow as indices of `alphabet`."""
    alphabet = alphabet or native_alphabet()
    return tuple(alphabet.index(t) for t in REFERENCE_TOKENS)


@dataclass(frozen=True)
class QorSpec:
    """Reference statistics normalising the QoR objective."""

    ref_area: int
    ref_delay: int

    def __post_init__(self):
        if self.ref_area <= 0 or self.ref_delay <= 0:
            raise ValueError("reference area and delay must be strictly positive")

    def qor(self, area: int, delay: int) -> float:
        return area / self.ref_area + delay / self.ref_delay


def apply_tokens(fresh: Aig, tokens) -> Aig:
    aig = fresh
    for token in tokens:
        aig = apply_pass(aig, token)
    return aig


def reference_spec(fresh: Aig) -> QorSpec:
    """QorSpec from running the reference flow on the fresh circuit."""
    ref_stats = stats(apply_tokens(fresh, REFERENCE_TOKENS))
    return QorSpec(ref_stats.area, ref_stats.delay)


def evaluate_qor(fresh: Aig, tokens, spec: QorSpec) -> tuple[int, int, float]:
    """Apply a token sequence to a fresh copy and score it: (area, delay, qor)."""
    final = apply_tokens(fresh, tokens)
    s = stats(final)
    return s.area, s.delay, spec.qor(s.area, s.delay)


class SynthEnv:
    """Native evaluation environment for one circuit.

    Exposes `evaluate(seq) -> (area, delay, qor)` over index sequences of the
    given alphabet.  Sequences containing oracle-only passes are rejected.
    """

    def __init__(self, fresh: Aig, alphabet: Alphabet | None = None,
                 spec: QorSpec | None = None):
        self.fresh = fresh
        self.alphabet = alphabet or native_alphabet()
        for token in self.alphabet.tokens:
            if token in ORACLE_ONLY_PASSES:
                raise ValueError(
                    f"token {token!r} requires an external oracle endpoint"
                )
        self.spec = spec or reference_spec(fresh)
        self._pass_cache: dict[tuple[Aig, str], Aig] = {}
        self._result_cache: dict[tuple[str, ...], tuple[int, int, float]] = {}

    def _apply_cached(self, aig: Aig, token: str) -> Aig:
        key = (aig, token)
        out = self._pass_cache.get(key)
        if out is None:
            out = apply_pass(aig, token)
            self._pass_cache[key] = out
        return out

    def evaluate_tokens(self, tokens: tuple[str, ...]) -> tuple[int, int, float]:
        hit = self._result_cache.get(tokens)
        if hit is not None:
            return hit
        aig = self.fresh
        for token in tokens:
            aig = self._apply_cached(aig, token)
        s = stats(aig)
        result = (s.area, s.delay, self.spec.qor(s.area, s.delay))
        self._result_cache[tokens] = result
        return result

    def evaluate(self, seq: Sequence) -> tuple[int, int, float]:
        return self.evaluate_tokens(self.alphabet.to_tokens(seq))
