"""Reader and writer for a small OpenQASM 2 subset.

Accepted programs have one ``qreg``, at most one ``creg`` (only as the target
of ``measure``), no custom gate definitions and no classical control. Gate
names are the lowercase kinds of :data:`cutforge.circuit.GATE_SPECS`, with
``cp`` for the controlled phase. ``reset`` reads as ``prep_z``.

``prep_x`` and ``prep_y`` have no QASM spelling; they are written as
``reset`` followed by ``h`` (and ``s``), which reads back as the equivalent
three-gate sequence rather than the original single op.
"""

from __future__ import annotations

import ast
import math
import operator
import re

from .circuit import GATE_SPECS, Circuit, Gate


class QasmError(ValueError):
    pass


class QasmSyntaxError(QasmError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


class UnsupportedGateError(QasmError):
    def __init__(self, token: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: unsupported gate {token!r}")
        self.token = token
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[\[\]();,+\-*/^])
  | (?P<bad>.)
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        value = m.group()
        col = m.start() - line_start + 1
        if kind == "bad":
            raise QasmSyntaxError(f"unexpected character {value!r}", line, col)
        if kind not in ("ws", "comment"):
            yield kind, value, line, col
        nl = value.count("\n")
        if nl:
            line += nl
            line_start = m.start() + value.rindex("\n") + 1


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_angle(expr: str, line: int, col: int) -> float:
    try:
        node = ast.parse(expr.replace("^", "**").strip(), mode="eval").body
    except SyntaxError:
        raise QasmSyntaxError(f"bad angle expression {expr!r}", line, col) from None

    def ev(n):
        if isinstance(n, ast.Constant) and isinstance(n.value, (int, float)):
            return float(n.value)
        if isinstance(n, ast.Name) and n.id == "pi":
            return math.pi
        if isinstance(n, ast.UnaryOp) and isinstance(n.op, (ast.USub, ast.UAdd)):
            v = ev(n.operand)
            return -v if isinstance(n.op, ast.USub) else v
        if isinstance(n, ast.BinOp) and type(n.op) in _BINOPS:
            return _BINOPS[type(n.op)](ev(n.left), ev(n.right))
        if isinstance(n, ast.BinOp) and isinstance(n.op, ast.Pow):
            return ev(n.left) ** ev(n.right)
        raise QasmSyntaxError(f"bad angle expression {expr!r}", line, col)

    return ev(node)


class _Parser:
    def __init__(self, text: str):
        self.toks = list(_tokenize(text))
        self.i = 0
        self.qreg: tuple[str, int] | None = None
        self.creg: tuple[str, int] | None = None
        self.gates: list[Gate] = []

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def where(self):
        tok = self.peek()
        if tok is not None:
            return tok[2], tok[3]
        if self.toks:
            return self.toks[-1][2], self.toks[-1][3] + len(self.toks[-1][1])
        return 1, 1

    def next(self, expect: str | None = None):
        tok = self.peek()
        if tok is None:
            raise QasmSyntaxError(f"unexpected end of input (expected {expect or 'token'})", *self.where())
        if expect is not None and tok[1] != expect:
            raise QasmSyntaxError(f"expected {expect!r}, got {tok[1]!r}", tok[2], tok[3])
        self.i += 1
        return tok

    def integer(self) -> int:
        kind, value, line, col = self.next()
        if kind != "number" or not value.isdigit():
            raise QasmSyntaxError(f"expected integer, got {value!r}", line, col)
        return int(value)

    def register_ref(self, reg: tuple[str, int] | None, what: str) -> int:
        kind, value, line, col = self.next()
        if reg is None:
            raise QasmSyntaxError(f"{what} used before declaration", line, col)
        if kind != "ident" or value != reg[0]:
            raise QasmSyntaxError(f"unknown register {value!r}", line, col)
        self.next("[")
        idx = self.integer()
        self.next("]")
        if idx >= reg[1]:
            raise QasmSyntaxError(f"index {idx} out of range for {value}[{reg[1]}]", line, col)
        return idx

    def parse(self) -> Circuit:
        while self.peek() is not None:
            self.statement()
        if self.qreg is None:
            raise QasmSyntaxError("missing qreg declaration", *self.where())
        return Circuit(self.qreg[1], tuple(self.gates), "qasm")

    def statement(self):
        kind, value, line, col = self.next()
        if kind != "ident":
            raise QasmSyntaxError(f"unexpected {value!r}", line, col)
        if value == "OPENQASM":
            self.next()
            self.next(";")
        elif value == "include":
            tok = self.next()
            if tok[0] != "string":
                raise QasmSyntaxError("include expects a file name", tok[2], tok[3])
            self.next(";")
        elif value in ("qreg", "creg"):
            name = self.next()
            if name[0] != "ident":
                raise QasmSyntaxError("expected register name", name[2], name[3])
            self.next("[")
            size = self.integer()
            self.next("]")
            self.next(";")
            if value == "qreg":
                if self.qreg is not None:
                    raise QasmSyntaxError("only one qreg is supported", line, col)
                self.qreg = (name[1], size)
            else:
                if self.creg is not None:
                    raise QasmSyntaxError("only one creg is supported", line, col)
                self.creg = (name[1], size)
        elif value == "measure":
            q = self.register_ref(self.qreg, "qreg")
            self.next("->")
            self.register_ref(self.creg, "creg")
            self.next(";")
            self.gates.append(Gate("measure", (q,)))
        elif value == "reset":
            q = self.register_ref(self.qreg, "qreg")
            self.next(";")
            self.gates.append(Gate("prep_z", (q,)))
        else:
            self.gate(value, line, col)

    def gate(self, name: str, line: int, col: int):
        if name not in GATE_SPECS or name in ("measure", "prep_z", "prep_x", "prep_y"):
            raise UnsupportedGateError(name, line, col)
        arity, nparams = GATE_SPECS[name]
        params: list[float] = []
        if self.peek() is not None and self.peek()[1] == "(":
            self.next("(")
            depth, buf, start = 0, [], self.peek()
            while True:
                tok = self.next()
                if tok[1] == "(":
                    depth += 1
                elif tok[1] == ")":
                    if depth == 0:
                        params.append(_eval_angle("".join(buf), start[2], start[3]))
                        break
                    depth -= 1
                elif tok[1] == ";":
                    raise QasmSyntaxError("unterminated parameter list", tok[2], tok[3])
                elif tok[1] == "," and depth == 0:
                    params.append(_eval_angle("".join(buf), start[2], start[3]))
                    buf, start = [], self.peek()
                    continue
                buf.append(tok[1] if tok[0] != "ident" else f" {tok[1]} ")
        if len(params) != nparams:
            raise QasmSyntaxError(f"{name} takes {nparams} parameter(s), got {len(params)}", line, col)
        qubits = [self.register_ref(self.qreg, "qreg")]
        for _ in range(arity - 1):
            self.next(",")
            qubits.append(self.register_ref(self.qreg, "qreg"))
        self.next(";")
        if arity == 2 and qubits[0] == qubits[1]:
            raise QasmSyntaxError(f"{name} on repeated qubit", line, col)
        self.gates.append(Gate(name, tuple(qubits), tuple(params)))


def parse_qasm_subset(text: str) -> Circuit:
    return _Parser(text).parse()


def emit_qasm(c: Circuit) -> str:
    lines = ["OPENQASM 2.0;", f"qreg q[{c.num_qubits}];"]
    if any(g.kind == "measure" for g in c.gates):
        lines.append(f"creg c[{c.num_qubits}];")
    for g in c.gates:
        qs = ",".join(f"q[{q}]" for q in g.qubits)
        if g.kind == "measure":
            lines.append(f"measure {qs} -> c[{g.qubits[0]}];")
        elif g.kind == "prep_z":
            lines.append(f"reset {qs};")
        elif g.kind == "prep_x":
            lines += [f"reset {qs};", f"h {qs};"]
        elif g.kind == "prep_y":
            lines += [f"reset {qs};", f"h {qs};", f"s {qs};"]
        elif g.params:
            # repr keeps the float exact through a round trip
            args = ",".join(repr(p) for p in g.params)
            lines.append(f"{g.kind}({args}) {qs};")
        else:
            lines.append(f"{g.kind} {qs};")
    return "\n".join(lines) + "\n"
