"""Bundled benchmark circuits, small enough for exhaustive equivalence checks.

The corpus is deliberately non-minimal.  Several circuits duplicate logic
blocks in structurally different forms (other associativity, SOP vs mux
decompositions) stacked in layers: window-based substitution can only merge
one layer per application, deep chains reward balancing, and redundant
conjunctions reward rewriting, so the quality a sequence reaches genuinely
depends on which passes it applies and in which order.

The same circuits are shipped as ASCII AIGER files under ``data/`` for the
command-line harness; a test pins the files to these builders.
"""

from __future__ import annotations

from pathlib import Path

from importlib import resources

from .aig import Aig, AigBuilder
from .aiger import parse_aiger_ascii, serialize_aiger_ascii


# structurally distinct implementations of small blocks; hashing cannot
# merge them, window-based substitution can

def _xor2_a(b: AigBuilder, x: int, y: int) -> int:
    return b.xor_(x, y)


def _xor2_b(b: AigBuilder, x: int, y: int) -> int:
    return b.and_(b.or_(x, y), b.and_(x, y) ^ 1)


def _xor3_a(b: AigBuilder, x: int, y: int, z: int) -> int:
    return _xor2_a(b, _xor2_a(b, x, y), z)


def _xor3_b(b: AigBuilder, x: int, y: int, z: int) -> int:
    return _xor2_b(b, x, _xor2_b(b, y, z))


def _maj_a(b: AigBuilder, x: int, y: int, z: int) -> int:
    return b.or_(b.or_(b.and_(x, y), b.and_(x, z)), b.and_(y, z))


def _maj_b(b: AigBuilder, x: int, y: int, z: int) -> int:
    return b.mux_(x, b.or_(y, z), b.and_(y, z))


def _and_chain_a(b: AigBuilder, lits: list[int]) -> int:
    acc = lits[0]
    for l in lits[1:]:
        acc = b.and_(acc, l)
    return acc


def _and_chain_b(b: AigBuilder, lits: list[int]) -> int:
    acc = lits[-1]
    for l in reversed(lits[:-1]):
        acc = b.and_(l, acc)
    return acc


def build_adder(bits: int = 3) -> Aig:
    """Ripple-carry adder with the carry chain duplicated per bit.

    The two chains use different majority implementations, so substitution
    passes merge them one bit position per application, bottom up.
    """
    b = AigBuilder(2 * bits)
    xs = [b.input_lit(i) for i in range(bits)]
    ys = [b.input_lit(bits + i) for i in range(bits)]
    carry_a = 0
    carry_b = 0
    outs = []
    for i in range(bits):
        outs.append(_xor3_a(b, xs[i], ys[i], carry_a))
        new_a = _maj_a(b, xs[i], ys[i], carry_a)
        new_b = _maj_b(b, xs[i], ys[i], carry_b)
        carry_a, carry_b = new_a, new_b
    outs.append(carry_a)
    outs.append(b.xor_(carry_b, xs[0]))  # keeps the duplicate chain alive
    return b.to_aig(outs)


def build_comparator(bits: int = 3) -> Aig:
    """Magnitude comparator with the whole recursion duplicated per stage.

    Outputs (a > b, a == b variants).  Each stage of the greater-than
    recursion exists as flat sum-of-products and as a mux form, with the
    equality prefix chains under two associations; merges cascade one bit
    position per substitution sweep.
    """
    b = AigBuilder(2 * bits)
    xs = [b.input_lit(i) for i in range(bits)]
    ys = [b.input_lit(bits + i) for i in range(bits)]
    g = []
    e_a = []
    e_b = []
    for i in range(bits):
        g.append(b.and_(xs[i], ys[i] ^ 1))
        e_a.append(_xor2_a(b, xs[i], ys[i]) ^ 1)
        e_b.append(_xor2_b(b, xs[i], ys[i]) ^ 1)

    gt_a = g[0]
    gt_b = g[0]
    for i in range(1, bits):
        gt_a = b.or_(g[i], b.and_(e_a[i], gt_a))
        gt_b = b.mux_(e_b[i] ^ 1, g[i], gt_b)

    eq_a = _and_chain_a(b, e_a)
    eq_b = _and_chain_b(b, e_b)
    o1 = b.or_(gt_a, eq_a)
    o2 = b.or_(gt_b, eq_b)
    o3 = _xor2_a(b, gt_b, eq_b)
    return b.to_aig([o1, o2, o3])


def build_mux_tree(num_data: int = 8) -> Aig:
    """8-to-1 multiplexer as a naive sum of minterms.

    The data side uses a linear OR chain (deep, rewards balancing); a second
    output ORs seven of the eight select minterms built independently, a
    wide cone over three variables that cone resynthesis collapses.
    """
    sel_bits = (num_data - 1).bit_length()
    b = AigBuilder(num_data + sel_bits)
    data = [b.input_lit(i) for i in range(num_data)]
    sel = [b.input_lit(num_data + i) for i in range(sel_bits)]

    def minterm(i: int, nest: bool) -> int:
        bits = [sel[s] if (i >> s) & 1 else sel[s] ^ 1 for s in range(sel_bits)]
        if nest:
            return b.and_(bits[0], b.and_(bits[1], bits[2]))
        return b.and_(b.and_(bits[0], bits[1]), bits[2])

    acc = 0
    for i in range(num_data):
        acc = b.or_(acc, b.and_(data[i], minterm(i, nest=False)))
    almost = 0
    for i in range(num_data - 1):
        almost = b.or_(almost, minterm(i, nest=True))
    return b.to_aig([acc, almost])


def build_parity(width: int = 10) -> Aig:
    """Parity as a four-level dual XOR tree with an absorption gate.

    Every tree level exists in two structural forms, merging one level per
    substitution sweep.  Between the quad and top levels one duplicate path
    routes through a redundant conjunction that only rewriting removes, so
    the deepest merges need a rewrite in the right place.  A side AND tree
    duplicated under two associations (support 5) is only merged by
    balancing.
    """
    b = AigBuilder(width)
    x = [b.input_lit(i) for i in range(width)]

    pairs_a = [_xor2_a(b, x[2 * i], x[2 * i + 1]) for i in range(4)]
    pairs_b = [_xor2_b(b, x[2 * i], x[2 * i + 1]) for i in range(4)]
    quad_a = [_xor2_a(b, pairs_a[0], pairs_a[1]),
              _xor2_a(b, pairs_a[2], pairs_a[3])]
    quad_b = [_xor2_b(b, pairs_b[0], pairs_b[1]),
              _xor2_b(b, pairs_b[2], pairs_b[3])]

    # rewrite gate: inner feeds an output too, outer absorbs onto it; the
    # duplicated final XOR pair below can only merge after the absorption
    inner = b.and_(quad_a[0], x[8])
    outer = b.and_(quad_a[0], inner)
    oct_a = _xor2_a(b, quad_a[0], quad_a[1])
    oct_b = _xor2_b(b, quad_b[0], quad_b[1])
    top_a = _xor2_a(b, oct_a, _xor2_a(b, x[8], x[9]))
    top_b = _xor2_b(b, oct_b, _xor2_b(b, x[8], x[9]))
    final_a = _xor2_a(b, top_a, inner)
    final_b = _xor2_b(b, top_b, outer)

    # balance gate: same 5-literal conjunction under two associations
    tree_a = _and_chain_a(b, [pairs_a[0], x[4] ^ 1, x[6] ^ 1, x[8], x[9]])
    tree_b = _and_chain_b(b, [pairs_a[0], x[4] ^ 1, x[6] ^ 1, x[8], x[9]])

    o1 = b.or_(final_a, tree_a)
    o2 = b.or_(final_b, tree_b)
    o3 = inner
    return b.to_aig([o1, o2, o3])


def build_multiplier(bits: int = 3) -> Aig:
    """Shift-and-add multiplier with duplicated row-adder carry logic.

    [a, b] -> a * b over 2*bits outputs.  Each row addition builds its sums
    and carries through per-position duplicated blocks (two structural
    forms), so substitution merges them one position per sweep.
    """
    b = AigBuilder(2 * bits)
    xs = [b.input_lit(i) for i in range(bits)]
    ys = [b.input_lit(bits + i) for i in range(bits)]
    outs = []
    spare = []
    acc = [b.and_(xs[0], ys[j]) for j in range(bits)]
    outs.append(acc[0])
    acc = acc[1:]
    for i in range(1, bits):
        row = [b.and_(xs[i], ys[j]) for j in range(bits)]
        new = []
        carry_a = 0
        carry_b = 0
        for j in range(bits):
            x = acc[j] if j < len(acc) else 0
            new.append(_xor3_a(b, x, row[j], carry_a))
            spare.append(_xor3_b(b, x, row[j], carry_b))
            na = _maj_a(b, x, row[j], carry_a)
            nb = _maj_b(b, x, row[j], carry_b)
            carry_a, carry_b = na, nb
        new.append(carry_a)
        spare.append(carry_b)
        outs.append(new[0])
        acc = new[1:]
    outs.extend(acc)
    # keep the duplicate blocks alive without changing the product outputs
    guard = spare[0]
    for s in spare[1:]:
        guard = _xor2_a(b, guard, s)
    outs.append(guard)
    return b.to_aig(outs)


def build_dag_mix() -> Aig:
    """Layered tower of duplicated blocks with rewrite and balance gates.

    Two towers compute the same function through structurally different
    XOR/majority blocks; window substitution merges them one level per
    application.  Between tower levels, one duplicate path routes through a
    redundant conjunction (rewrite gate) and another through a 5-literal
    conjunction duplicated under two associations (balance gate), so the
    upper merges require the right pass mix in the right order.
    """
    b = AigBuilder(12)
    x = [b.input_lit(i) for i in range(12)]

    qa = [_xor3_a(b, x[0], x[1], x[2]),
          _maj_a(b, x[3], x[4], x[5]),
          _xor3_a(b, x[6], x[7], x[8])]
    qb = [_xor3_b(b, x[0], x[1], x[2]),
          _maj_b(b, x[3], x[4], x[5]),
          _xor3_b(b, x[6], x[7], x[8])]
    mid_a = _maj_a(b, qa[0], qa[1], qa[2])
    mid_b = _maj_b(b, qb[0], qb[1], qb[2])

    # rewrite gate between levels: outer == inner once absorbed
    inner = b.and_(mid_a, x[9])
    outer = b.and_(mid_a, inner)
    top_a = _xor2_a(b, mid_a, inner)
    top_b = _xor2_b(b, mid_b, outer)

    # balance gate: 5-literal conjunction, two associations
    lits = [qa[0], x[9] ^ 1, x[10], x[11], mid_a ^ 1]
    tree_a = _and_chain_a(b, lits)
    tree_b = _and_chain_b(b, lits)
    deep_a = _xor2_a(b, top_a, tree_a)
    deep_b = _xor2_b(b, top_b, tree_b)

    chain = b.or_(qa[1], b.or_(qb[2], b.or_(deep_b, b.and_(x[10], x[11]))))
    o1 = b.or_(deep_a, b.and_(x[11], mid_a))
    o2 = chain
    o3 = inner
    return b.to_aig([o1, o2, o3])


BUILDERS = {
    "adder": build_adder,
    "cmp": build_comparator,
    "mux": build_mux_tree,
    "parity": build_parity,
    "mult": build_multiplier,
    "dagmix": build_dag_mix,
}


def corpus() -> dict[str, Aig]:
    """All bundled circuits, freshly built."""
    return {name: fn() for name, fn in BUILDERS.items()}


def data_path(name: str) -> Path:
    """Path of a bundled .aag file (packaged data)."""
    return Path(str(resources.files("seqtune.synth") / "data" / f"{name}.aag"))


def load_bundled(name: str) -> Aig:
    if name not in BUILDERS:
        raise ValueError(f"unknown bundled circuit {name!r}")
    return parse_aiger_ascii(data_path(name).read_text())


def write_data_files(directory: str | Path) -> list[Path]:
    """Regenerate the bundled .aag files from the builders."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, fn in BUILDERS.items():
        path = directory / f"{name}.aag"
        path.write_text(serialize_aiger_ascii(fn()))
        written.append(path)
    return written
