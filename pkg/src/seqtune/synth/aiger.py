"""ASCII AIGER (`aag`) reader and writer, combinational subset.

The reader accepts the `aag M I L O A` header with L = 0, canonical input
numbering (literals 2, 4, ..., 2I), output literals, and AND-gate lines in
any acyclic order.  Trailing symbol-table and comment sections are ignored.
Parsed gate lists are rebuilt through the hashing builder, so the returned
graph is structurally hashed and constant-propagated.
"""

from __future__ import annotations

from .aig import Aig, AigBuilder, CONST_FALSE, lit_var

class AigerError(ValueError):
    """Malformed AIGER input; message carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _ints(line: str, line_no: int, expect: int) -> list[int]:
    parts = line.split()
    if len(parts) != expect:
        raise AigerError(line_no, f"expected {expect} fields, got {len(parts)}")
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise AigerError(line_no, f"non-integer field in {line!r}") from None


def parse_aiger_ascii(text: str) -> Aig:
    lines = text.splitlines()
    if not lines:
        raise AigerError(1, "empty input")
    header = lines[0].split()
    if len(header) != 6 or header[0] != "aag":
        raise AigerError(1, f"bad header {lines[0]!r}")
    try:
        m, i, l, o, a = (int(x) for x in header[1:])
    except ValueError:
        raise AigerError(1, "non-integer header field") from None
    if l != 0:
        raise AigerError(1, "latches are not supported (combinational only)")
    if m < i + a:
        raise AigerError(1, f"max variable {m} below I+A = {i + a}")
    needed = 1 + i + o + a
    if len(lines) < needed:
        raise AigerError(len(lines), f"truncated file: need {needed} lines")

    line_no = 1
    for idx in range(i):
        line_no += 1
        (lit,) = _ints(lines[idx + 1], line_no, 1)
        if lit != 2 * (idx + 1):
            raise AigerError(line_no, f"input literal {lit}, expected {2 * (idx + 1)}")

    outputs: list[int] = []
    for idx in range(o):
        line_no += 1
        (lit,) = _ints(lines[1 + i + idx], line_no, 1)
        if lit_var(lit) > m:
            raise AigerError(line_no, f"dangling output literal {lit}")
        outputs.append(lit)

    gates: dict[int, tuple[int, int, int]] = {}
    for idx in range(a):
        line_no += 1
        lhs, rhs0, rhs1 = _ints(lines[1 + i + o + idx], line_no, 3)
        if lhs % 2 != 0:
            raise AigerError(line_no, f"gate output literal {lhs} is complemented")
        var = lit_var(lhs)
        if var <= i or var > m:
            raise AigerError(line_no, f"gate variable {var} outside (I, M]")
        if var in gates:
            raise AigerError(line_no, f"gate variable {var} defined twice")
        if lit_var(rhs0) > m or lit_var(rhs1) > m:
            raise AigerError(line_no, "dangling fanin literal")
        gates[var] = (rhs0, rhs1, line_no)

    for lit in outputs:
        var = lit_var(lit)
        if var != CONST_FALSE and var > i and var not in gates:
            raise AigerError(1 + i, f"output references undefined variable {var}")

    # topological order over the gate set (inputs/constant are sources)
    order: list[int] = []
    state: dict[int, int] = {}  # 0 unvisited, 1 on stack, 2 done

    def visit(var: int, from_line: int) -> None:
        stack = [(var, from_line, False)]
        while stack:
            v, ln, expanded = stack.pop()
            if expanded:
                state[v] = 2
                order.append(v)
                continue
            st = state.get(v, 0)
            if st == 2:
                continue
            if st == 1:
                raise AigerError(ln, f"combinational cycle through variable {v}")
            state[v] = 1
            stack.append((v, ln, True))
            rhs0, rhs1, gline = gates[v]
            for fan in (rhs0, rhs1):
                fv = lit_var(fan)
                if fv > i and fv in gates and state.get(fv, 0) != 2:
                    stack.append((fv, gline, False))
                elif fv > i and fv not in gates:
                    raise AigerError(gline, f"dangling fanin variable {fv}")

    for var, (_, _, gline) in sorted(gates.items()):
        if state.get(var, 0) == 0:
            visit(var, gline)

    builder = AigBuilder(i)
    lit_map: dict[int, int] = {CONST_FALSE: CONST_FALSE}
    for idx in range(i):
        lit_map[idx + 1] = builder.input_lit(idx)

    def mapped(lit: int) -> int:
        return lit_map[lit_var(lit)] ^ (lit & 1)

    for var in order:
        rhs0, rhs1, _ = gates[var]
        lit_map[var] = builder.and_(mapped(rhs0), mapped(rhs1))

    aig = builder.to_aig([mapped(lit) for lit in outputs])
    aig.check()
    return aig


def serialize_aiger_ascii(aig: Aig) -> str:
    lines = [f"aag {aig.max_var} {aig.num_inputs} 0 {len(aig.outputs)} {aig.num_ands}"]
    lines.extend(str(2 * (idx + 1)) for idx in range(aig.num_inputs))
    lines.extend(str(lit) for lit in aig.outputs)
    for pos, (f0, f1) in enumerate(aig.nodes):
        lines.append(f"{2 * aig.and_var(pos)} {f0} {f1}")
    return "\n".join(lines) + "\n"
