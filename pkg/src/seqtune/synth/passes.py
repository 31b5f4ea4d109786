"""Function-preserving AIG transformation passes.

Native tokens and their contracts:

  balance       reassociate maximal AND trees into depth-minimal balanced form
  rewrite       local two-level simplifications, accepted on strict area gain
  rewrite -z    same rule set, area-neutral replacements also accepted
  refactor      resynthesise fanout-free cones (<= 4 leaves) via Shannon
                decomposition, accepted when the cone shrinks
  refactor -z   accept area-neutral resynthesis too
  resub         replace a node with an existing node (or complement) that
                computes the same function on the node's cut window
  resub -z      additionally re-express a node as an AND of two existing
                divisors even at zero area gain

Every pass is deterministic, returns a functionally equivalent graph, and a
final guard returns the input unchanged rather than ever increasing the
reachable AND count.
"""

from __future__ import annotations

from .aig import (
    Aig,
    AigBuilder,
    CONST_FALSE,
    compact,
    depths,
    lit_var,
    stats,
)

NATIVE_PASSES = (
    "rewrite",
    "rewrite -z",
    "refactor",
    "refactor -z",
    "resub",
    "resub -z",
    "balance",
)

ORACLE_ONLY_PASSES = ("fraig", "sopb", "blut", "dsdb")


# ---------------------------------------------------------------------------
# shared graph analyses

def _ref_counts(aig: Aig) -> dict[int, int]:
    """References per variable, counting output uses."""
    refs = {v: 0 for v in range(aig.max_var + 1)}
    for f0, f1 in aig.nodes:
        refs[lit_var(f0)] += 1
        refs[lit_var(f1)] += 1
    for o in aig.outputs:
        refs[lit_var(o)] += 1
    return refs


def _mffc(aig: Aig, root: int, refs: dict[int, int]) -> set[int]:
    """Maximal fanout-free cone: AND vars whose every path leads through root."""
    cone = {root}
    local: dict[int, int] = {}
    stack = [root]
    while stack:
        var = stack.pop()
        for fan in aig.node(var):
            fv = lit_var(fan)
            if not aig.is_and_var(fv):
                continue
            local[fv] = local.get(fv, refs[fv]) - 1
            if local[fv] == 0:
                cone.add(fv)
                stack.append(fv)
    return cone


def _tt_patterns(num_vars: int) -> list[int]:
    pats = []
    total = 1 << num_vars
    for j in range(num_vars):
        block = 1 << j
        unit = ((1 << block) - 1) << block
        width = block << 1
        val = unit
        while width < total:
            val |= val << width
            width <<= 1
        pats.append(val)
    return pats


def _window_tt(aig: Aig, root: int, leaves: list[int]) -> int:
    """Truth table of `root` over the leaf variables (recursion stops there)."""
    pats = _tt_patterns(len(leaves))
    mask = (1 << (1 << len(leaves))) - 1
    values: dict[int, int] = {leaf: pats[j] for j, leaf in enumerate(leaves)}
    values[CONST_FALSE] = 0

    def var_value(var: int) -> int:
        cached = values.get(var)
        if cached is not None:
            return cached
        f0, f1 = aig.node(var)
        v0 = var_value(lit_var(f0)) ^ (mask if f0 & 1 else 0)
        v1 = var_value(lit_var(f1)) ^ (mask if f1 & 1 else 0)
        values[var] = v0 & v1
        return values[var]

    return var_value(root)


def _cofactors(tt: int, j: int, num_vars: int, pat: int) -> tuple[int, int]:
    block = 1 << j
    mask = (1 << (1 << num_vars)) - 1
    hi = tt & pat
    lo = tt & ~pat & mask
    return (lo | (lo << block)) & mask, hi | (hi >> block)


# ---------------------------------------------------------------------------
# Shannon resynthesis (used by refactor)

def _shannon_synth(tt: int, leaf_lits: list[int], and_fn) -> int:
    """Synthesise a truth table over the leaf literals with 2-input ANDs."""
    num_vars = len(leaf_lits)
    mask = (1 << (1 << num_vars)) - 1
    pats = _tt_patterns(num_vars)
    memo: dict[int, int] = {}

    def rec(t: int) -> int:
        if t == 0:
            return 0
        if t == mask:
            return 1
        hit = memo.get(t)
        if hit is not None:
            return hit
        for j in range(num_vars):
            if t == pats[j]:
                return leaf_lits[j]
            if t == pats[j] ^ mask:
                return leaf_lits[j] ^ 1
        out = None
        for j in range(num_vars):
            t0, t1 = _cofactors(t, j, num_vars, pats[j])
            if t0 == t1:
                continue
            l0 = rec(t0)
            l1 = rec(t1)
            x = leaf_lits[j]
            if l1 == 1:
                out = and_fn(x ^ 1, l0 ^ 1) ^ 1
            elif l1 == 0:
                out = and_fn(x ^ 1, l0)
            elif l0 == 1:
                out = and_fn(x, l1 ^ 1) ^ 1
            elif l0 == 0:
                out = and_fn(x, l1)
            else:
                out = and_fn(and_fn(x, l1) ^ 1, and_fn(x ^ 1, l0) ^ 1) ^ 1
            break
        assert out is not None
        memo[t] = out
        return out

    return rec(tt)


class _CountingAnd:
    """AND constructor that only counts the nodes a synthesis would create."""

    def __init__(self, next_var: int):
        self.count = 0
        self._table: dict[tuple[int, int], int] = {}
        self._next_var = next_var

    def __call__(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        if a == 0 or a == (b ^ 1):
            return 0
        if a == 1:
            return b
        if a == b:
            return a
        lit = self._table.get((a, b))
        if lit is None:
            lit = self._next_var * 2
            self._next_var += 1
            self.count += 1
            self._table[(a, b)] = lit
        return lit


# ---------------------------------------------------------------------------
# balance

def _balance(aig: Aig) -> Aig:
    import heapq

    aig = compact(aig)
    # a node is internal to an AND tree iff it has exactly one reference,
    # that reference is positive, comes from an AND node, and it is not an output
    pos_and_refs = {v: 0 for v in range(aig.max_var + 1)}
    other_refs = {v: 0 for v in range(aig.max_var + 1)}
    for f0, f1 in aig.nodes:
        for fan in (f0, f1):
            if fan & 1:
                other_refs[lit_var(fan)] += 1
            else:
                pos_and_refs[lit_var(fan)] += 1
    for o in aig.outputs:
        other_refs[lit_var(o)] += 1

    def internal(var: int) -> bool:
        return (
            aig.is_and_var(var)
            and pos_and_refs[var] == 1
            and other_refs[var] == 0
        )

    def collect_leaves(root: int) -> list[int]:
        leaves: list[int] = []
        stack = list(aig.node(root))
        while stack:
            fan = stack.pop()
            fv = lit_var(fan)
            if not (fan & 1) and internal(fv):
                stack.extend(aig.node(fv))
            else:
                leaves.append(fan)
        return leaves

    b = AigBuilder(aig.num_inputs)
    lit_map: dict[int, int] = {CONST_FALSE: CONST_FALSE}
    depth: dict[int, int] = {CONST_FALSE: 0}
    for i in range(aig.num_inputs):
        lit_map[i + 1] = b.input_lit(i)
        depth[i + 1] = 0

    def mapped(lit: int) -> int:
        return lit_map[lit_var(lit)] ^ (lit & 1)

    def lit_depth(lit: int) -> int:
        return depth[lit_var(lit)]

    for pos in range(aig.num_ands):
        var = aig.and_var(pos)
        if internal(var):
            continue
        mapped_leaves = {mapped(l) for l in collect_leaves(var)}
        if CONST_FALSE in mapped_leaves or any((l ^ 1) in mapped_leaves
                                               for l in mapped_leaves):
            lit_map[var] = CONST_FALSE
            continue
        mapped_leaves.discard(1)
        if not mapped_leaves:
            lit_map[var] = 1
            continue
        heap = [(lit_depth(l), l) for l in mapped_leaves]
        heapq.heapify(heap)
        while len(heap) > 1:
            d0, l0 = heapq.heappop(heap)
            d1, l1 = heapq.heappop(heap)
            lit = b.and_(l0, l1)
            v = lit_var(lit)
            if v not in depth:
                depth[v] = 1 + max(d0, d1)
            heapq.heappush(heap, (depth[v], lit))
        lit_map[var] = heap[0][1]

    return compact(b.to_aig([mapped(o) for o in aig.outputs]))


# ---------------------------------------------------------------------------
# rewrite

def _rewrite(aig: Aig, zero_cost: bool) -> Aig:
    aig = compact(aig)
    b = AigBuilder(aig.num_inputs)
    lit_map: dict[int, int] = {CONST_FALSE: CONST_FALSE}
    for i in range(aig.num_inputs):
        lit_map[i + 1] = b.input_lit(i)

    def mapped(lit: int) -> int:
        return lit_map[lit_var(lit)] ^ (lit & 1)

    def decompose(lit: int) -> tuple[int, int] | None:
        """Fanins of `lit` if it points (in the new graph) at an AND node."""
        var = lit_var(lit)
        if b.is_and_var(var):
            return b.node_fanins(var)
        return None

    def candidates(x: int, y: int):
        """Two-level alternatives for AND(x, y): (cost, rank, thunk)."""
        out = []
        rank = 0
        for u, w in ((x, y), (y, x)):
            fan = decompose(u)
            if fan is None:
                continue
            p, q = fan
            if not (u & 1):
                # u = p & q
                if w == p or w == q:
                    out.append((0, rank, lambda u=u: u))  # absorption
                if w == (p ^ 1) or w == (q ^ 1):
                    out.append((0, rank + 1, lambda: CONST_FALSE))  # contradiction
                fan_w = decompose(w)
                if fan_w is not None and not (w & 1):
                    r, s = fan_w
                    shared = {p, q} & {r, s}
                    if shared:
                        # (t & u2) & (t & v2) -> t & (u2 & v2)
                        t = min(shared)
                        u2 = q if p == t else p
                        v2 = s if r == t else r
                        inner = b.lookup(u2, v2)
                        cost = b.cost(u2, v2) + (
                            b.cost(t, inner) if inner is not None else 1
                        )
                        out.append(
                            (cost, rank + 3,
                             lambda t=t, u2=u2, v2=v2: b.and_(t, b.and_(u2, v2)))
                        )
            else:
                # u = ~(p & q)
                if w == (p ^ 1) or w == (q ^ 1):
                    out.append((0, rank, lambda w=w: w))  # w implies u
                if w == p:
                    out.append((b.cost(p, q ^ 1), rank + 2,
                                lambda p=p, q=q: b.and_(p, q ^ 1)))
                elif w == q:
                    out.append((b.cost(q, p ^ 1), rank + 2,
                                lambda p=p, q=q: b.and_(q, p ^ 1)))
            rank += 10
        return out

    for pos in range(aig.num_ands):
        var = aig.and_var(pos)
        f0, f1 = aig.node(var)
        x, y = mapped(f0), mapped(f1)
        plain_cost = b.cost(x, y)
        alts = candidates(x, y)
        chosen = None
        if alts:
            cost, _, thunk = min(alts, key=lambda c: (c[0], c[1]))
            if cost < plain_cost or (zero_cost and cost <= plain_cost):
                chosen = thunk
        lit_map[var] = chosen() if chosen is not None else b.and_(x, y)

    return compact(b.to_aig([mapped(o) for o in aig.outputs]))


# ---------------------------------------------------------------------------
# refactor

def _refactor(aig: Aig, zero_cost: bool) -> Aig:
    aig = compact(aig)
    refs = _ref_counts(aig)
    accepted: dict[int, tuple[list[int], int]] = {}
    consumed: set[int] = set()

    for pos in reversed(range(aig.num_ands)):
        root = aig.and_var(pos)
        if root in consumed:
            continue
        cone = _mffc(aig, root, refs)
        leaves = sorted(
            {lit_var(f) for v in cone for f in aig.node(v) if lit_var(f) not in cone}
        )
        if CONST_FALSE in leaves or not (1 <= len(leaves) <= 4):
            continue
        tt = _window_tt(aig, root, leaves)
        counter = _CountingAnd(aig.max_var + 1)
        _shannon_synth(tt, [2 * v for v in leaves], counter)
        gain_ok = counter.count < len(cone) or (zero_cost and counter.count == len(cone))
        if gain_ok:
            accepted[root] = (leaves, tt)
            consumed.update(cone)

    if not accepted:
        return compact(aig)

    b = AigBuilder(aig.num_inputs)
    lit_map: dict[int, int] = {CONST_FALSE: CONST_FALSE}
    for i in range(aig.num_inputs):
        lit_map[i + 1] = b.input_lit(i)

    def get_lit(var: int) -> int:
        cached = lit_map.get(var)
        if cached is not None:
            return cached
        if var in accepted:
            leaves, tt = accepted[var]
            leaf_lits = [get_lit(v) for v in leaves]
            lit = _shannon_synth(tt, leaf_lits, b.and_)
        else:
            f0, f1 = aig.node(var)
            lit = b.and_(get_lit(lit_var(f0)) ^ (f0 & 1),
                         get_lit(lit_var(f1)) ^ (f1 & 1))
        lit_map[var] = lit
        return lit

    outputs = [get_lit(lit_var(o)) ^ (o & 1) for o in aig.outputs]
    return compact(b.to_aig(outputs))


# ---------------------------------------------------------------------------
# resub

def _merge_cut(c0: tuple[int, ...], c1: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sorted(set(c0) | set(c1)))


def _resub(aig: Aig, zero_cost: bool) -> Aig:
    aig = compact(aig)
    refs = _ref_counts(aig)
    pair_hash = {pair: 2 * aig.and_var(pos) for pos, pair in enumerate(aig.nodes)}

    cuts: dict[int, tuple[int, ...]] = {i + 1: (i + 1,) for i in range(aig.num_inputs)}
    registry: dict[tuple[tuple[int, ...], int], int] = {}
    by_cut: dict[tuple[int, ...], list[tuple[int, int]]] = {}
    subst: dict[int, int | tuple[str, int, int]] = {}

    for pos in range(aig.num_ands):
        var = aig.and_var(pos)
        f0, f1 = aig.node(var)
        v0, v1 = lit_var(f0), lit_var(f1)
        cut = _merge_cut(cuts.get(v0, (v0,)), cuts.get(v1, (v1,)))
        if len(cut) > 4 or CONST_FALSE in cut:
            cut = tuple(sorted({v0, v1}))
        cuts[var] = cut

        leaves = list(cut)
        tt = _window_tt(aig, var, leaves)
        mask = (1 << (1 << len(leaves))) - 1

        if tt == 0:
            subst[var] = CONST_FALSE
            continue
        if tt == mask:
            subst[var] = 1
            continue

        hit = registry.get((cut, tt))
        hit_c = registry.get((cut, tt ^ mask))
        resolved = None
        if hit is not None and lit_var(hit) != var:
            resolved = hit
        elif hit_c is not None and lit_var(hit_c) != var:
            resolved = hit_c ^ 1
        if resolved is not None:
            # the node's exclusive cone dies; always a strict gain
            subst[var] = resolved
            continue

        group = by_cut.get(cut)
        if group and len(cut) >= 2:
            found = _find_divisor_pair(group, tt, mask, pair_hash,
                                       len(_mffc(aig, var, refs)), zero_cost)
            if found is not None:
                subst[var] = ("and", found[0], found[1])

        registry.setdefault((cut, tt), 2 * var)
        by_cut.setdefault(cut, []).append((tt, 2 * var))

    if not subst:
        return compact(aig)

    b = AigBuilder(aig.num_inputs)
    lit_map: dict[int, int] = {CONST_FALSE: CONST_FALSE}
    for i in range(aig.num_inputs):
        lit_map[i + 1] = b.input_lit(i)

    def mapped(lit: int) -> int:
        return lit_map[lit_var(lit)] ^ (lit & 1)

    for pos in range(aig.num_ands):
        var = aig.and_var(pos)
        spec = subst.get(var)
        if spec is None:
            f0, f1 = aig.node(var)
            lit_map[var] = b.and_(mapped(f0), mapped(f1))
        elif isinstance(spec, tuple):
            _, la, lb = spec
            lit_map[var] = b.and_(mapped(la), mapped(lb))
        else:
            lit_map[var] = mapped(spec)

    return compact(b.to_aig([mapped(o) for o in aig.outputs]))


def _find_divisor_pair(
    group: list[tuple[int, int]],
    tt: int,
    mask: int,
    pair_hash: dict[tuple[int, int], int],
    mffc_size: int,
    zero_cost: bool,
) -> tuple[int, int] | None:
    """First divisor pair (by registration order) with tt_a & tt_b == tt."""
    cap = group[:32]
    for i1, (ta, la) in enumerate(cap):
        for t_a, l_a in ((ta, la), (ta ^ mask, la ^ 1)):
            if t_a & tt != tt:
                continue  # a divisor must cover the target function
            for ta2, la2 in cap[i1 + 1:]:
                for t_b, l_b in ((ta2, la2), (ta2 ^ mask, la2 ^ 1)):
                    if t_a & t_b == tt:
                        x, y = (l_a, l_b) if l_a <= l_b else (l_b, l_a)
                        new_nodes = 0 if (x, y) in pair_hash else 1
                        delta = mffc_size - new_nodes
                        if delta >= 1 or (zero_cost and delta >= 0):
                            return x, y
    return None


# ---------------------------------------------------------------------------
# dispatch

_DISPATCH = {
    "balance": lambda aig: _balance(aig),
    "rewrite": lambda aig: _rewrite(aig, zero_cost=False),
    "rewrite -z": lambda aig: _rewrite(aig, zero_cost=True),
    "refactor": lambda aig: _refactor(aig, zero_cost=False),
    "refactor -z": lambda aig: _refactor(aig, zero_cost=True),
    "resub": lambda aig: _resub(aig, zero_cost=False),
    "resub -z": lambda aig: _resub(aig, zero_cost=True),
}


def apply_pass(aig: Aig, op_token: str) -> Aig:
    """Apply one native pass; the result never has more reachable ANDs."""
    fn = _DISPATCH.get(op_token)
    if fn is None:
        if op_token in ORACLE_ONLY_PASSES:
            raise ValueError(
                f"pass {op_token!r} is only available through an external oracle"
            )
        raise ValueError(f"unknown pass token {op_token!r}")
    before = stats(aig).area
    out = fn(aig)
    if stats(out).area > before:
        return compact(aig)
    return out
