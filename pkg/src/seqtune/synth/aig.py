"""And-Inverter Graphs with complemented edges and structural hashing.

Encoding follows the AIGER convention: variable 0 is constant false, variables
1..I are the primary inputs, and AND nodes occupy variables I+1 onwards in
topological order.  A literal is 2*var + complement_bit, so literal 0 is
false and literal 1 is true.

`Aig` is an immutable value; transformation passes build new graphs through
`AigBuilder`, which performs constant propagation, trivial-AND collapsing and
structural hashing on the fly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

CONST_FALSE = 0
CONST_TRUE = 1


def lit_var(lit: int) -> int:
    return lit >> 1

def lit_neg(lit: int) -> bool:
    return bool(lit & 1)

def make_lit(var: int, neg: bool = False) -> int:
    return (var << 1) | int(neg)


@dataclass(frozen=True)
class CircuitStats:
    area: int
    delay: int


@dataclass(frozen=True)
class Aig:
    """Combinational AIG. `nodes[i]` holds the fanin literal pair of
    variable num_inputs + 1 + i."""

    num_inputs: int
    nodes: tuple[tuple[int, int], ...]
    outputs: tuple[int, ...]

    @property
    def num_ands(self) -> int:
        return len(self.nodes)

    @property
    def max_var(self) -> int:
        return self.num_inputs + len(self.nodes)

    def and_var(self, position: int) -> int:
        return self.num_inputs + 1 + position

    def node(self, var: int) -> tuple[int, int]:
        return self.nodes[var - self.num_inputs - 1]

    def is_and_var(self, var: int) -> bool:
        return var > self.num_inputs

    def is_input_var(self, var: int) -> bool:
        return 1 <= var <= self.num_inputs

    def check(self, hashed: bool = True) -> None:
        """Validate topological order and, optionally, hashing invariants."""
        seen: set[tuple[int, int]] = set()
        for pos, (f0, f1) in enumerate(self.nodes):
            var = self.and_var(pos)
            if lit_var(f0) >= var or lit_var(f1) >= var:
                raise ValueError(f"node {var} has a non-topological fanin")
            if lit_var(f0) > self.max_var or lit_var(f1) > self.max_var:
                raise ValueError(f"node {var} references an undefined variable")
            if hashed:
                if f0 > f1:
                    raise ValueError(f"node {var} fanins not canonically ordered")
                if f0 == f1 or f0 == (f1 ^ 1):
                    raise ValueError(f"node {var} is a trivial AND")
                if lit_var(f0) == CONST_FALSE:
                    raise ValueError(f"node {var} has a constant fanin")
                if (f0, f1) in seen:
                    raise ValueError(f"node {var} duplicates an existing fanin pair")
                seen.add((f0, f1))
        for lit in self.outputs:
            if lit_var(lit) > self.max_var:
                raise ValueError("output references an undefined variable")


class AigBuilder:
    """Bottom-up AIG construction with hashing and constant propagation."""

    def __init__(self, num_inputs: int):
        self.num_inputs = num_inputs
        self.nodes: list[tuple[int, int]] = []
        self._hash: dict[tuple[int, int], int] = {}

    def input_lit(self, index: int) -> int:
        """Literal of the index-th input (0-based)."""
        if not (0 <= index < self.num_inputs):
            raise ValueError(f"input index {index} out of range")
        return make_lit(index + 1)

    def _simplify(self, a: int, b: int) -> int | None:
        if a > b:
            a, b = b, a
        if a == CONST_FALSE or a == (b ^ 1):
            return CONST_FALSE
        if a == CONST_TRUE:
            return b
        if a == b:
            return a
        return None

    def lookup(self, a: int, b: int) -> int | None:
        """Literal of AND(a, b) if it needs no new node, else None."""
        triv = self._simplify(a, b)
        if triv is not None:
            return triv
        if a > b:
            a, b = b, a
        return self._hash.get((a, b))

    def cost(self, a: int, b: int) -> int:
        """Number of new nodes AND(a, b) would create (0 or 1)."""
        return 0 if self.lookup(a, b) is not None else 1

    def and_(self, a: int, b: int) -> int:
        triv = self._simplify(a, b)
        if triv is not None:
            return triv
        if a > b:
            a, b = b, a
        lit = self._hash.get((a, b))
        if lit is not None:
            return lit
        var = self.num_inputs + 1 + len(self.nodes)
        self.nodes.append((a, b))
        lit = make_lit(var)
        self._hash[(a, b)] = lit
        return lit

    def or_(self, a: int, b: int) -> int:
        return self.and_(a ^ 1, b ^ 1) ^ 1

    def xor_(self, a: int, b: int) -> int:
        return self.or_(self.and_(a, b ^ 1), self.and_(a ^ 1, b))

    def mux_(self, sel: int, hi: int, lo: int) -> int:
        return self.or_(self.and_(sel, hi), self.and_(sel ^ 1, lo))

    def node_fanins(self, var: int) -> tuple[int, int]:
        return self.nodes[var - self.num_inputs - 1]

    def is_and_var(self, var: int) -> bool:
        return var > self.num_inputs

    def to_aig(self, outputs: list[int]) -> Aig:
        return Aig(self.num_inputs, tuple(self.nodes), tuple(outputs))


def rebuild(aig: Aig, subst: dict[int, int] | None = None) -> Aig:
    """Reconstruct through a fresh builder, applying an optional var->literal
    substitution; re-hashes, propagates constants and drops nothing reachable."""
    b = AigBuilder(aig.num_inputs)
    lit_map: dict[int, int] = {CONST_FALSE: CONST_FALSE}
    for i in range(aig.num_inputs):
        lit_map[i + 1] = b.input_lit(i)

    def mapped(lit: int) -> int:
        new = lit_map[lit_var(lit)]
        return new ^ (lit & 1)

    subst = subst or {}
    for pos, (f0, f1) in enumerate(aig.nodes):
        var = aig.and_var(pos)
        if var in subst:
            lit_map[var] = mapped(subst[var])
        else:
            lit_map[var] = b.and_(mapped(f0), mapped(f1))
    return b.to_aig([mapped(o) for o in aig.outputs])


def reachable_vars(aig: Aig) -> set[int]:
    """Variables in the transitive fanin of the outputs (inputs included)."""
    seen: set[int] = set()
    stack = [lit_var(o) for o in aig.outputs]
    while stack:
        var = stack.pop()
        if var in seen:
            continue
        seen.add(var)
        if aig.is_and_var(var):
            f0, f1 = aig.node(var)
            stack.append(lit_var(f0))
            stack.append(lit_var(f1))
    return seen


def compact(aig: Aig) -> Aig:
    """Drop AND nodes not reachable from any output, preserving order."""
    reach = reachable_vars(aig)
    b = AigBuilder(aig.num_inputs)
    lit_map: dict[int, int] = {CONST_FALSE: CONST_FALSE}
    for i in range(aig.num_inputs):
        lit_map[i + 1] = b.input_lit(i)

    def mapped(lit: int) -> int:
        return lit_map[lit_var(lit)] ^ (lit & 1)

    for pos, (f0, f1) in enumerate(aig.nodes):
        var = aig.and_var(pos)
        if var in reach:
            lit_map[var] = b.and_(mapped(f0), mapped(f1))
    return b.to_aig([mapped(o) for o in aig.outputs])


def depths(aig: Aig) -> dict[int, int]:
    """AND-depth per variable; inputs and the constant sit at depth 0."""
    depth = {CONST_FALSE: 0}
    for i in range(aig.num_inputs):
        depth[i + 1] = 0
    for pos, (f0, f1) in enumerate(aig.nodes):
        depth[aig.and_var(pos)] = 1 + max(depth[lit_var(f0)], depth[lit_var(f1)])
    return depth


def stats(aig: Aig) -> CircuitStats:
    """Area = reachable AND count; delay = max AND depth over output cones."""
    reach = reachable_vars(aig)
    area = sum(1 for v in reach if aig.is_and_var(v))
    if area == 0:
        return CircuitStats(0, 0)
    depth = depths(aig)
    delay = max(depth[lit_var(o)] for o in aig.outputs)
    return CircuitStats(area, delay)


MAX_EQUIV_INPUTS = 16


@lru_cache(maxsize=32)
def input_patterns(num_inputs: int) -> tuple[int, ...]:
    """Exhaustive word-parallel input patterns: bit p of pattern i equals
    bit i of the minterm index p."""
    patterns = []
    total = 1 << num_inputs
    for i in range(num_inputs):
        block = 1 << i
        unit = ((1 << block) - 1) << block
        width = block << 1
        val = unit
        while width < total:
            val |= val << width
            width <<= 1
        patterns.append(val)
    return tuple(patterns)


def simulate(aig: Aig, patterns: list[int] | tuple[int, ...], mask: int) -> list[int]:
    """Evaluate every output literal under word-parallel input patterns."""
    val: dict[int, int] = {CONST_FALSE: 0}
    for i in range(aig.num_inputs):
        val[i + 1] = patterns[i]

    def lit_value(lit: int) -> int:
        v = val[lit_var(lit)]
        return (v ^ mask) if (lit & 1) else v

    for pos, (f0, f1) in enumerate(aig.nodes):
        val[aig.and_var(pos)] = lit_value(f0) & lit_value(f1)
    return [lit_value(o) for o in aig.outputs]


def equivalence_check(a: Aig, b: Aig) -> bool:
    """Exhaustive-simulation equivalence over all input assignments."""
    if a.num_inputs != b.num_inputs:
        raise ValueError("input counts differ")
    if len(a.outputs) != len(b.outputs):
        raise ValueError("output counts differ")
    if a.num_inputs > MAX_EQUIV_INPUTS:
        raise ValueError(
            f"equivalence checking supports at most {MAX_EQUIV_INPUTS} inputs"
        )
    patterns = input_patterns(a.num_inputs)
    mask = (1 << (1 << a.num_inputs)) - 1
    return simulate(a, patterns, mask) == simulate(b, patterns, mask)
