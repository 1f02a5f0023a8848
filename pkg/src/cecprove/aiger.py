"""AIGER ingestion and emission.

Reads ASCII ("aag") and binary ("aig") combinational files, no latches.
Writing is ASCII only; XOR gates are expanded into their three-AND form
so the output is plain AIG.
"""

from __future__ import annotations

from .xag import FALSE, GateKind, Lit, Xag, XagBuilder


class AigerError(ValueError):
    pass


class MalformedHeader(AigerError):
    pass


class LatchesUnsupported(AigerError):
    pass


class DanglingLiteral(AigerError):
    pass


def _parse_header(line: bytes) -> tuple[str, int, int, int, int, int]:
    parts = line.split()
    if len(parts) < 6 or parts[0] not in (b"aag", b"aig"):
        raise MalformedHeader(f"bad AIGER header: {line!r}")
    try:
        m, i, l, o, a = (int(p) for p in parts[1:6])
    except ValueError as exc:
        raise MalformedHeader(f"non-integer header field: {line!r}") from exc
    if any(int(p) != 0 for p in parts[6:]):
        raise MalformedHeader("extension sections (B/C/J/F) are not supported")
    if m < i + l + a:
        raise MalformedHeader(f"declared maximum {m} below I+L+A={i + l + a}")
    return parts[0].decode(), m, i, l, o, a


def parse_aiger(data: bytes) -> Xag:
    """Parse ASCII or binary AIGER bytes into an AND-only Xag."""
    if isinstance(data, str):
        data = data.encode()
    newline = data.find(b"\n")
    if newline < 0:
        raise MalformedHeader("missing header line")
    fmt, m, num_in, num_latch, num_out, num_and = _parse_header(data[:newline])
    if num_latch:
        raise LatchesUnsupported(f"{num_latch} latches declared")
    body = data[newline + 1 :]
    if fmt == "aag":
        return _parse_ascii(body, m, num_in, num_out, num_and)
    return _parse_binary(body, m, num_in, num_out, num_and)


def _build(num_in: int, m: int, num_and: int, and_defs: dict[int, tuple[int, int]],
           out_lits: list[int]) -> Xag:
    if len(and_defs) != num_and:
        raise MalformedHeader("duplicate or missing AND definitions")
    b = XagBuilder(num_in)
    lit_of: dict[int, Lit] = {0: FALSE}
    # Definitions may appear out of order in ASCII files; DFS gives a valid
    # emission order and catches cycles.
    state: dict[int, int] = {}  # 1 = on stack, 2 = emitted
    order: list[int] = []
    for root in and_defs:
        if state.get(root) == 2:
            continue
        stack = [(root, False)]
        while stack:
            v, expanded = stack.pop()
            if expanded:
                state[v] = 2
                order.append(v)
                continue
            if state.get(v) == 2:
                continue
            if state.get(v) == 1:
                raise AigerError("cyclic AND definitions")
            state[v] = 1
            stack.append((v, True))
            for d in and_defs[v]:
                dv = d >> 1
                if dv == 0 or 1 <= dv <= num_in or state.get(dv) == 2:
                    continue
                if dv not in and_defs:
                    raise DanglingLiteral(f"variable {dv} is never defined")
                if state.get(dv) == 1:
                    raise AigerError("cyclic AND definitions")
                stack.append((dv, False))

    def lit(aig_lit: int) -> Lit:
        var, neg = aig_lit >> 1, bool(aig_lit & 1)
        if var > m:
            raise DanglingLiteral(f"literal {aig_lit} exceeds declared maximum {m}")
        if 1 <= var <= num_in:
            return Lit(var, neg)
        base = lit_of[var]
        return Lit(base.node, base.neg != neg)

    for v in order:
        r0, r1 = and_defs[v]
        lit_of[v] = b.add_and(lit(r0), lit(r1))
    outputs = []
    for ol in out_lits:
        var = ol >> 1
        if var > m or (var > num_in and var not in lit_of and var != 0):
            raise DanglingLiteral(f"output literal {ol} undefined")
        outputs.append(lit(ol))
    return b.finish(outputs)


def _parse_ascii(body: bytes, m: int, num_in: int, num_out: int, num_and: int) -> Xag:
    lines = body.split(b"\n")
    need = num_in + num_out + num_and
    fields: list[list[int]] = []
    for raw in lines:
        if len(fields) == need:
            break
        raw = raw.strip()
        if not raw:
            continue
        try:
            fields.append([int(t) for t in raw.split()])
        except ValueError as exc:
            raise MalformedHeader(f"non-numeric body line: {raw!r}") from exc
    if len(fields) < need:
        raise MalformedHeader("truncated file body")
    pos = 0
    for k in range(num_in):
        row = fields[pos + k]
        if len(row) != 1 or row[0] & 1 or row[0] == 0:
            raise MalformedHeader(f"bad input literal line: {row}")
    pos += num_in
    out_lits = []
    for k in range(num_out):
        row = fields[pos + k]
        if len(row) != 1:
            raise MalformedHeader(f"bad output literal line: {row}")
        out_lits.append(row[0])
    pos += num_out
    and_defs: dict[int, tuple[int, int]] = {}
    for k in range(num_and):
        row = fields[pos + k]
        if len(row) != 3 or row[0] & 1:
            raise MalformedHeader(f"bad AND line: {row}")
        var = row[0] >> 1
        if var <= num_in or var > m or var in and_defs:
            raise MalformedHeader(f"AND defines illegal variable {var}")
        and_defs[var] = (row[1], row[2])
    return _build(num_in, m, num_and, and_defs, out_lits)


def _parse_binary(body: bytes, m: int, num_in: int, num_out: int, num_and: int) -> Xag:
    pos = 0
    out_lits = []
    for _ in range(num_out):
        end = body.find(b"\n", pos)
        if end < 0:
            raise MalformedHeader("truncated output section")
        try:
            out_lits.append(int(body[pos:end]))
        except ValueError as exc:
            raise MalformedHeader("bad output literal") from exc
        pos = end + 1

    def read_delta() -> int:
        nonlocal pos
        value, shift = 0, 0
        while True:
            if pos >= len(body):
                raise MalformedHeader("truncated binary AND section")
            byte = body[pos]
            pos += 1
            value |= (byte & 0x7F) << shift
            if not byte & 0x80:
                return value
            shift += 7

    and_defs: dict[int, tuple[int, int]] = {}
    for k in range(num_and):
        lhs = 2 * (num_in + k + 1)
        delta0 = read_delta()
        delta1 = read_delta()
        rhs0 = lhs - delta0
        rhs1 = rhs0 - delta1
        if rhs0 < 0 or rhs1 < 0:
            raise DanglingLiteral(f"binary AND {lhs} decodes to negative fanin")
        and_defs[lhs >> 1] = (rhs0, rhs1)
    return _build(num_in, m, num_and, and_defs, out_lits)


def write_aiger(xag: Xag) -> bytes:
    """ASCII AIGER bytes; XOR gates become NOT(NOT(a AND NOT b) AND NOT(NOT a AND b))."""
    num_in = xag.num_pis
    ands: list[tuple[int, int, int]] = []
    lit_of: dict[int, int] = {0: 0}
    for i in range(1, num_in + 1):
        lit_of[i] = 2 * i

    def fresh_and(r0: int, r1: int) -> int:
        lhs = 2 * (num_in + len(ands) + 1)
        ands.append((lhs, max(r0, r1), min(r0, r1)))
        return lhs

    for i, g in enumerate(xag.gates):
        a = lit_of[g.in0.node] ^ int(g.in0.neg)
        b = lit_of[g.in1.node] ^ int(g.in1.neg)
        if g.kind == GateKind.AND:
            lit_of[xag.first_gate + i] = fresh_and(a, b)
        else:
            n1 = fresh_and(a, b ^ 1)
            n2 = fresh_and(a ^ 1, b)
            lit_of[xag.first_gate + i] = fresh_and(n1 ^ 1, n2 ^ 1) ^ 1
    out_lits = [lit_of[o.node] ^ int(o.neg) for o in xag.outputs]
    total_vars = num_in + len(ands)
    lines = [f"aag {total_vars} {num_in} 0 {len(xag.outputs)} {len(ands)}"]
    lines.extend(str(2 * i) for i in range(1, num_in + 1))
    lines.extend(str(ol) for ol in out_lits)
    lines.extend(f"{lhs} {r0} {r1}" for lhs, r0, r1 in ands)
    return ("\n".join(lines) + "\n").encode()
