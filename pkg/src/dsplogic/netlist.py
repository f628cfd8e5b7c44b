"""Gate-level netlist frontend.

Parses a small structural-Verilog subset into an immutable combinational
DAG of 2-input gates, and provides the brute-force reference evaluator
that every other stage of the pipeline is checked against.

Accepted source shape (extension ``.v``)::

    module NAME ( ports );
    input a, b;            // comma lists, ;-terminated
    output y;
    wire w1;
    assign w1 = a & b;     // one gate per assign
    assign y  = ~(w1 ^ b); // ~ only on a net or a single binary op
    endmodule

Operators are limited to ``&``, ``|``, ``^``, plus ``~net``, ``net``
(buffer) and the constants ``1'b0`` / ``1'b1``. Anything else is
rejected with a positioned diagnostic. Multi-bit ports, parameters and
sequential elements are out of scope.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping, NamedTuple, Sequence


class GateOp(Enum):
    AND = "AND"
    OR = "OR"
    XOR = "XOR"
    NAND = "NAND"
    NOR = "NOR"
    XNOR = "XNOR"
    NOT = "NOT"
    BUF = "BUF"
    CONST0 = "CONST0"
    CONST1 = "CONST1"

    @property
    def arity(self) -> int:
        return _ARITY[self]


_ARITY = {
    GateOp.AND: 2,
    GateOp.OR: 2,
    GateOp.XOR: 2,
    GateOp.NAND: 2,
    GateOp.NOR: 2,
    GateOp.XNOR: 2,
    GateOp.NOT: 1,
    GateOp.BUF: 1,
    GateOp.CONST0: 0,
    GateOp.CONST1: 0,
}

# Scalar semantics over {0, 1}; the single source of truth for the oracle.
_EVAL = {
    GateOp.AND: lambda a, b: a & b,
    GateOp.OR: lambda a, b: a | b,
    GateOp.XOR: lambda a, b: a ^ b,
    GateOp.NAND: lambda a, b: 1 - (a & b),
    GateOp.NOR: lambda a, b: 1 - (a | b),
    GateOp.XNOR: lambda a, b: 1 - (a ^ b),
    GateOp.NOT: lambda a, _: 1 - a,
    GateOp.BUF: lambda a, _: a,
}

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class NetlistError(Exception):
    """Base class for parse and validation failures."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.line is not None:
            return f"line {self.line}, col {self.col}: {self.message}"
        return self.message


class NetlistSyntaxError(NetlistError):
    pass


class UnsupportedExpressionError(NetlistError):
    pass


class UndeclaredNetError(NetlistError):
    pass


class MultiplyDrivenError(NetlistError):
    pass


class UndrivenNetError(NetlistError):
    pass


class CycleError(NetlistError):
    pass


class NetlistInvariantError(NetlistError):
    pass


class Gate(NamedTuple):
    output: str
    op: GateOp
    operands: tuple[str, ...]


@dataclass(frozen=True)
class GateNetlist:
    """A combinational DAG of single-output gates.

    ``primary_inputs`` / ``primary_outputs`` keep declaration order;
    ``gates`` keep source order, which need not be topological.
    """

    name: str
    primary_inputs: tuple[str, ...]
    primary_outputs: tuple[str, ...]
    gates: tuple[Gate, ...]

    @property
    def nets(self) -> frozenset[str]:
        return frozenset(self.primary_inputs) | frozenset(g.output for g in self.gates)

    @property
    def n_gates(self) -> int:
        return len(self.gates)

    def validate(self) -> None:
        """Check all structural invariants, raising a specific error per defect."""
        for label, name in [("module", self.name)] + [("input", n) for n in self.primary_inputs]:
            if not _IDENT_RE.match(name):
                raise NetlistInvariantError(f"invalid {label} name {name!r}")
        if len(set(self.primary_inputs)) != len(self.primary_inputs):
            raise NetlistInvariantError("duplicate primary input")
        if len(set(self.primary_outputs)) != len(self.primary_outputs):
            raise NetlistInvariantError("duplicate primary output")

        pis = set(self.primary_inputs)
        driven = set(pis)
        for g in self.gates:
            if not _IDENT_RE.match(g.output):
                raise NetlistInvariantError(f"invalid net name {g.output!r}")
            if len(g.operands) != g.op.arity:
                raise NetlistInvariantError(
                    f"gate {g.output!r}: {g.op.value} takes {g.op.arity} operand(s), got {len(g.operands)}"
                )
            if g.output in driven:
                raise MultiplyDrivenError(f"net {g.output!r} is driven more than once")
            driven.add(g.output)
        for g in self.gates:
            for net in g.operands:
                if net not in driven:
                    raise UndeclaredNetError(f"gate {g.output!r} reads undriven net {net!r}")
        for po in self.primary_outputs:
            if po not in driven:
                raise UndrivenNetError(f"primary output {po!r} is not driven")
        self.topological_gates()

    def topological_gates(self) -> list[Gate]:
        """Gates in dependency order (stable w.r.t. declaration), or CycleError."""
        producer = {g.output: i for i, g in enumerate(self.gates)}
        pis = set(self.primary_inputs)
        indeg = [0] * len(self.gates)
        users: list[list[int]] = [[] for _ in self.gates]
        for i, g in enumerate(self.gates):
            for net in g.operands:
                if net in pis:
                    continue
                j = producer[net]
                indeg[i] += 1
                users[j].append(i)
        ready = [i for i, d in enumerate(indeg) if d == 0]
        ready.sort()
        order: list[int] = []
        cursor = 0
        while cursor < len(ready):
            i = ready[cursor]
            cursor += 1
            order.append(i)
            for j in users[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    ready.append(j)
        if len(order) != len(self.gates):
            stuck = [self.gates[i].output for i, d in enumerate(indeg) if d > 0]
            raise CycleError(f"combinational cycle through net(s): {', '.join(sorted(stuck)[:5])}")
        return [self.gates[i] for i in order]


def reference_eval(netlist: GateNetlist, assignment: Mapping[str, int]) -> dict[str, int]:
    """Evaluate every net for one input assignment (the golden oracle).

    ``assignment`` must cover exactly the primary inputs, each 0 or 1.
    """
    pis = set(netlist.primary_inputs)
    if set(assignment) != pis:
        raise ValueError("assignment must cover exactly the primary inputs")
    values = {name: int(assignment[name]) & 1 for name in netlist.primary_inputs}
    for g in netlist.topological_gates():
        if g.op is GateOp.CONST0:
            values[g.output] = 0
        elif g.op is GateOp.CONST1:
            values[g.output] = 1
        else:
            a = values[g.operands[0]]
            b = values[g.operands[1]] if len(g.operands) == 2 else 0
            values[g.output] = _EVAL[g.op](a, b)
    return values


def reference_eval_packed(
    netlist: GateNetlist, words: Mapping[str, int], n_lanes: int
) -> dict[str, int]:
    """Evaluate all nets over many assignments at once, one per bit lane.

    Same traversal as :func:`reference_eval` but each net carries an
    ``n_lanes``-bit integer. Used to keep bulk verification fast; its
    agreement with the scalar evaluator is itself under test.
    """
    pis = set(netlist.primary_inputs)
    if set(words) != pis:
        raise ValueError("words must cover exactly the primary inputs")
    mask = (1 << n_lanes) - 1
    values = {name: words[name] & mask for name in netlist.primary_inputs}
    for g in netlist.topological_gates():
        op = g.op
        if op is GateOp.CONST0:
            values[g.output] = 0
        elif op is GateOp.CONST1:
            values[g.output] = mask
        else:
            a = values[g.operands[0]]
            if op is GateOp.AND:
                v = a & values[g.operands[1]]
            elif op is GateOp.OR:
                v = a | values[g.operands[1]]
            elif op is GateOp.XOR:
                v = a ^ values[g.operands[1]]
            elif op is GateOp.NAND:
                v = mask ^ (a & values[g.operands[1]])
            elif op is GateOp.NOR:
                v = mask ^ (a | values[g.operands[1]])
            elif op is GateOp.XNOR:
                v = mask ^ a ^ values[g.operands[1]]
            elif op is GateOp.NOT:
                v = mask ^ a
            else:  # BUF
                v = a
            values[g.output] = v
    return values


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>//[^\n]*)
      | (?P<const>1'b[01])
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<punct>[();,=&|^~])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"module", "endmodule", "input", "output", "wire", "assign"}


class _Token(NamedTuple):
    kind: str  # "const" | "ident" | "punct" | "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise NetlistSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_punct(self, text: str) -> _Token:
        tok = self.take()
        if tok.kind != "punct" or tok.text != text:
            raise NetlistSyntaxError(f"expected {text!r}, found {tok.text or 'end of file'!r}", tok.line, tok.col)
        return tok

    def expect_keyword(self, word: str) -> _Token:
        tok = self.take()
        if tok.kind != "ident" or tok.text != word:
            raise NetlistSyntaxError(f"expected {word!r}, found {tok.text or 'end of file'!r}", tok.line, tok.col)
        return tok

    def expect_name(self) -> _Token:
        tok = self.take()
        if tok.kind != "ident" or tok.text in _KEYWORDS:
            raise NetlistSyntaxError(f"expected identifier, found {tok.text or 'end of file'!r}", tok.line, tok.col)
        return tok

    def name_list(self) -> list[_Token]:
        names = [self.expect_name()]
        while self.peek().text == ",":
            self.take()
            names.append(self.expect_name())
        self.expect_punct(";")
        return names


_BINOPS = {"&": GateOp.AND, "|": GateOp.OR, "^": GateOp.XOR}
_NEGATED = {GateOp.AND: GateOp.NAND, GateOp.OR: GateOp.NOR, GateOp.XOR: GateOp.XNOR}


def parse_netlist(text: str) -> GateNetlist:
    """Parse netlist source into a validated :class:`GateNetlist`."""
    p = _Parser(_tokenize(text))
    p.expect_keyword("module")
    mod_name = p.expect_name().text
    p.expect_punct("(")
    ports = [p.expect_name()]
    while p.peek().text == ",":
        p.take()
        ports.append(p.expect_name())
    p.expect_punct(")")
    p.expect_punct(";")

    inputs: list[_Token] = []
    outputs: list[_Token] = []
    wires: list[_Token] = []
    declared: dict[str, _Token] = {}
    while p.peek().text in ("input", "output", "wire"):
        kw = p.take().text
        names = p.name_list()
        for tok in names:
            if tok.text in declared:
                raise NetlistSyntaxError(f"net {tok.text!r} declared twice", tok.line, tok.col)
            declared[tok.text] = tok
        {"input": inputs, "output": outputs, "wire": wires}[kw].extend(names)

    port_names = {t.text for t in ports}
    for tok in ports:
        if tok.text not in declared:
            raise UndeclaredNetError(f"port {tok.text!r} has no input/output declaration", tok.line, tok.col)
    for tok in inputs + outputs:
        if tok.text not in port_names:
            raise NetlistSyntaxError(f"{tok.text!r} declared but not in the port list", tok.line, tok.col)
    for tok in wires:
        if tok.text in port_names:
            raise NetlistSyntaxError(f"wire {tok.text!r} may not be a port", tok.line, tok.col)
    if len(port_names) != len(ports):
        dup = [t for t in ports if sum(1 for u in ports if u.text == t.text) > 1][0]
        raise NetlistSyntaxError(f"port {dup.text!r} listed twice", dup.line, dup.col)

    input_names = {t.text for t in inputs}
    drivers: dict[str, _Token] = {t.text: t for t in inputs}
    gates: list[Gate] = []

    def operand(tok: _Token) -> str:
        if tok.text not in declared:
            raise UndeclaredNetError(f"undeclared net {tok.text!r}", tok.line, tok.col)
        return tok.text

    while p.peek().text == "assign":
        p.take()
        target = p.expect_name()
        if target.text not in declared:
            raise UndeclaredNetError(f"undeclared net {target.text!r}", target.line, target.col)
        if target.text in input_names:
            raise MultiplyDrivenError(
                f"net {target.text!r} is driven by an input port and an assign", target.line, target.col
            )
        if target.text in drivers:
            raise MultiplyDrivenError(f"net {target.text!r} is driven more than once", target.line, target.col)
        p.expect_punct("=")

        tok = p.take()
        if tok.kind == "const":
            op = GateOp.CONST0 if tok.text == "1'b0" else GateOp.CONST1
            gates.append(Gate(target.text, op, ()))
        elif tok.text == "~":
            nxt = p.take()
            if nxt.kind == "ident" and nxt.text not in _KEYWORDS:
                gates.append(Gate(target.text, GateOp.NOT, (operand(nxt),)))
            elif nxt.text == "(":
                lhs = p.expect_name()
                op_tok = p.take()
                if op_tok.text not in _BINOPS:
                    raise UnsupportedExpressionError(
                        f"expected '&', '|' or '^' inside ~(...), found {op_tok.text!r}", op_tok.line, op_tok.col
                    )
                rhs = p.expect_name()
                p.expect_punct(")")
                gates.append(
                    Gate(target.text, _NEGATED[_BINOPS[op_tok.text]], (operand(lhs), operand(rhs)))
                )
            else:
                raise UnsupportedExpressionError(
                    f"'~' must apply to a net or a parenthesized binary op", nxt.line, nxt.col
                )
        elif tok.kind == "ident" and tok.text not in _KEYWORDS:
            follow = p.peek()
            if follow.text == ";":
                gates.append(Gate(target.text, GateOp.BUF, (operand(tok),)))
            elif follow.text in _BINOPS:
                p.take()
                rhs = p.expect_name()
                gates.append(Gate(target.text, _BINOPS[follow.text], (operand(tok), operand(rhs))))
            else:
                raise NetlistSyntaxError(
                    f"expected ';' or an operator after {tok.text!r}", follow.line, follow.col
                )
        else:
            raise NetlistSyntaxError(f"expected expression, found {tok.text!r}", tok.line, tok.col)
        semi = p.peek()
        if semi.text != ";":
            raise UnsupportedExpressionError(
                "expression too complex: one operator per assign", semi.line, semi.col
            )
        p.take()
        drivers[target.text] = target

    p.expect_keyword("endmodule")
    tail = p.take()
    if tail.kind != "eof":
        raise NetlistSyntaxError(f"unexpected {tail.text!r} after endmodule", tail.line, tail.col)

    for tok in outputs + wires:
        if tok.text not in drivers:
            raise UndrivenNetError(f"net {tok.text!r} is never assigned", tok.line, tok.col)

    netlist = GateNetlist(
        name=mod_name,
        primary_inputs=tuple(t.text for t in inputs),
        primary_outputs=tuple(t.text for t in outputs),
        gates=tuple(gates),
    )
    netlist.validate()
    return netlist


def format_netlist(netlist: GateNetlist) -> str:
    """Print a netlist in canonical source form; re-parsing yields an equal netlist."""
    pis = list(netlist.primary_inputs)
    pos = list(netlist.primary_outputs)
    po_set = set(pos)
    internal = [g.output for g in netlist.gates if g.output not in po_set]
    lines = [f"module {netlist.name} ({', '.join(pis + pos)});"]
    if pis:
        lines.append(f"input {', '.join(pis)};")
    if pos:
        lines.append(f"output {', '.join(pos)};")
    if internal:
        lines.append(f"wire {', '.join(internal)};")
    for g in netlist.gates:
        lines.append(f"assign {g.output} = {_format_expr(g)};")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def _format_expr(g: Gate) -> str:
    op = g.op
    if op is GateOp.CONST0:
        return "1'b0"
    if op is GateOp.CONST1:
        return "1'b1"
    if op is GateOp.BUF:
        return g.operands[0]
    if op is GateOp.NOT:
        return f"~{g.operands[0]}"
    sym = {GateOp.AND: "&", GateOp.OR: "|", GateOp.XOR: "^"}.get(op)
    if sym is not None:
        return f"{g.operands[0]} {sym} {g.operands[1]}"
    base = {GateOp.NAND: "&", GateOp.NOR: "|", GateOp.XNOR: "^"}[op]
    return f"~({g.operands[0]} {base} {g.operands[1]})"


# ---------------------------------------------------------------------------
# Fuzz-test generator
# ---------------------------------------------------------------------------

_RANDOM_OPS = (
    GateOp.AND,
    GateOp.OR,
    GateOp.XOR,
    GateOp.NAND,
    GateOp.NOR,
    GateOp.XNOR,
    GateOp.NOT,
    GateOp.BUF,
)


def random_netlist(seed: int, n_pi: int, n_gates: int, n_po: int) -> GateNetlist:
    """Deterministic random DAG: operands drawn from earlier nets only."""
    if n_pi < 1 or n_po < 1 or n_gates < n_po:
        raise ValueError("need n_pi >= 1, n_po >= 1, n_gates >= n_po")
    rng = random.Random(seed)
    pis = [f"pi{i}" for i in range(n_pi)]
    avail = list(pis)
    gates: list[Gate] = []
    for i in range(n_gates):
        op = rng.choice(_RANDOM_OPS)
        operands = tuple(rng.choice(avail) for _ in range(op.arity))
        out = f"n{i}"
        gates.append(Gate(out, op, operands))
        avail.append(out)
    outs = rng.sample([g.output for g in gates], n_po)
    return GateNetlist(
        name=f"rand{seed}",
        primary_inputs=tuple(pis),
        primary_outputs=tuple(outs),
        gates=tuple(gates),
    )


def exhaustive_assignments(pi_names: Sequence[str]) -> Iterator[dict[str, int]]:
    """All 2**n input assignments; the first name toggles fastest."""
    n = len(pi_names)
    for index in range(1 << n):
        yield {name: (index >> i) & 1 for i, name in enumerate(pi_names)}


def random_assignments(pi_names: Sequence[str], count: int, seed: int) -> list[dict[str, int]]:
    rng = random.Random(seed)
    return [{name: rng.getrandbits(1) for name in pi_names} for _ in range(count)]
