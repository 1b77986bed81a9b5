"""OpenQASM 2.0 subset: hand-rolled lexer, recursive-descent parser, canonical printer.

Accepted statements::

    OPENQASM 2.0;
    include "qelib1.inc";          // recognised, never read from disk
    qreg q[4];  creg c[2];
    x q[0];  cx q[0],q[1];  u1(pi/4) q[2];
    measure q[0] -> c[0];
    barrier q[0],q[1];

Gates: ``id x y z h s sdg t tdg u1 cx``. Whole-register arguments broadcast.
Angles accept numbers, ``pi``, unary minus and ``* / + -`` with parentheses.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Optional

from .circuit import Circuit, Instruction
from .errors import QsimError, UnsupportedExportError

MNEMONICS = {
    "id": "I",
    "x": "X",
    "y": "Y",
    "z": "Z",
    "h": "H",
    "s": "S",
    "sdg": "SDG",
    "t": "T",
    "tdg": "TDG",
    "u1": "P",
    "cx": "CNOT",
}
_PRINT_NAMES = {v: k for k, v in MNEMONICS.items()}
_ARITY = {"cx": 2}
_PARAMETRIC = {"u1"}


@dataclass(frozen=True)
class SourcePosition:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(QsimError):
    """Rejected source, with the 1-based position of the offending token."""

    def __init__(self, position: SourcePosition, expected: str, found: str, message: str = ""):
        self.position = position
        self.expected = expected
        self.found = found
        self.message = message or f"expected {expected}, found {found}"
        super().__init__(f"line {position.line}, column {position.column}: {self.message}")


@dataclass(frozen=True)
class Token:
    kind: str  # id, int, real, string, sym, eof
    text: str
    pos: SourcePosition

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<real>(?:\d+\.\d*|\.\d+)(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<sym>->|[;,\[\](){}*/+\-^])
    """,
    re.VERBOSE,
)


def tokenize(source: str) -> Iterator[Token]:
    line, line_start = 1, 0
    i = 0
    while i < len(source):
        m = _TOKEN_RE.match(source, i)
        pos = SourcePosition(line, i - line_start + 1)
        if m is None:
            raise ParseError(pos, "token", repr(source[i]), f"unexpected character {source[i]!r}")
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            yield Token(kind, text, pos)
        for k, ch in enumerate(text):
            if ch == "\n":
                line += 1
                line_start = i + k + 1
        i = m.end()
    yield Token("eof", "", SourcePosition(line, i - line_start + 1))


class _Parser:
    def __init__(self, source: str):
        self.tokens = list(tokenize(source))
        self.i = 0
        self.qregs: dict[str, tuple[int, int]] = {}  # name -> (offset, size)
        self.cregs: dict[str, tuple[int, int]] = {}
        self.nq = 0
        self.nc = 0
        self.instructions: list[Instruction] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, expected: str, tok: Optional[Token] = None, message: str = "") -> ParseError:
        tok = tok or self.tok
        return ParseError(tok.pos, expected, tok.describe(), message)

    def expect_sym(self, sym: str) -> Token:
        if self.tok.kind == "sym" and self.tok.text == sym:
            return self.advance()
        raise self.error(f"'{sym}'")

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind == kind:
            return self.advance()
        raise self.error(what)

    def at_sym(self, sym: str) -> bool:
        return self.tok.kind == "sym" and self.tok.text == sym

    # program ------------------------------------------------------------
    def program(self) -> Circuit:
        t = self.tok
        if not (t.kind == "id" and t.text == "OPENQASM"):
            raise self.error("'OPENQASM' header")
        self.advance()
        ver = self.tok
        if ver.kind not in ("real", "int") or float(ver.text) != 2.0:
            raise self.error("version 2.0", message=f"unsupported OpenQASM version {ver.describe()}")
        self.advance()
        self.expect_sym(";")
        while self.tok.kind != "eof":
            self.statement()
        if self.nq == 0:
            raise self.error("qreg declaration", message="program declares no qubits")
        return Circuit(
            self.nq,
            self.nc,
            tuple(self.instructions),
            qregs=tuple((k, s) for k, (_, s) in self.qregs.items()),
            cregs=tuple((k, s) for k, (_, s) in self.cregs.items()),
        )

    def statement(self) -> None:
        t = self.tok
        if t.kind != "id":
            raise self.error("statement")
        word = t.text
        if word == "include":
            self.advance()
            s = self.expect_kind("string", "file name string")
            if s.text != '"qelib1.inc"':
                raise ParseError(s.pos, '"qelib1.inc"', s.text, f"cannot include {s.text}")
            self.expect_sym(";")
        elif word in ("qreg", "creg"):
            self.declaration(word)
        elif word == "measure":
            self.measure()
        elif word == "barrier":
            self.advance()
            qubits = [q for arg in self.arg_list("qubit") for q in arg[1]]
            self.expect_sym(";")
            self.instructions.append(Instruction.barrier(*qubits))
        elif word in ("gate", "opaque", "if", "reset"):
            raise self.error("statement", message=f"unsupported statement '{word}'")
        else:
            self.gate_call()

    def declaration(self, word: str) -> None:
        self.advance()
        name_tok = self.expect_kind("id", "register name")
        self.expect_sym("[")
        size_tok = self.expect_kind("int", "register size")
        self.expect_sym("]")
        self.expect_sym(";")
        size = int(size_tok.text)
        if size < 1:
            raise ParseError(size_tok.pos, "positive size", size_tok.text, "register size must be positive")
        name = name_tok.text
        if name in self.qregs or name in self.cregs:
            raise ParseError(name_tok.pos, "new register name", name, f"register '{name}' already declared")
        if word == "qreg":
            self.qregs[name] = (self.nq, size)
            self.nq += size
        else:
            self.cregs[name] = (self.nc, size)
            self.nc += size

    def argument(self, space: str) -> tuple[Token, list[int]]:
        """``name`` or ``name[i]`` resolved to flat indices."""
        regs = self.qregs if space == "qubit" else self.cregs
        name_tok = self.expect_kind("id", f"{space} register")
        if name_tok.text not in regs:
            raise ParseError(
                name_tok.pos, f"declared {space} register", repr(name_tok.text),
                f"undeclared {space} register '{name_tok.text}'",
            )
        offset, size = regs[name_tok.text]
        if not self.at_sym("["):
            return name_tok, list(range(offset, offset + size))
        self.advance()
        idx_tok = self.tok
        if idx_tok.kind != "int":
            raise self.error("integer index", message=f"malformed index {idx_tok.describe()}")
        self.advance()
        self.expect_sym("]")
        idx = int(idx_tok.text)
        if idx >= size:
            raise ParseError(
                idx_tok.pos, f"index < {size}", idx_tok.text,
                f"index {idx} out of range for {name_tok.text}[{size}]",
            )
        return name_tok, [offset + idx]

    def arg_list(self, space: str) -> list[tuple[Token, list[int]]]:
        args = [self.argument(space)]
        while self.at_sym(","):
            self.advance()
            args.append(self.argument(space))
        return args

    def measure(self) -> None:
        self.advance()
        q_tok, qs = self.argument("qubit")
        self.expect_sym("->")
        c_tok, cs = self.argument("clbit")
        self.expect_sym(";")
        if len(qs) != len(cs):
            raise ParseError(c_tok.pos, f"{len(qs)} clbit(s)", str(len(cs)), "measure register sizes differ")
        for q, c in zip(qs, cs):
            self.instructions.append(Instruction.measure(q, c))

    def gate_call(self) -> None:
        name_tok = self.advance()
        mnemonic = name_tok.text
        if mnemonic not in MNEMONICS:
            raise ParseError(name_tok.pos, "gate name", repr(mnemonic), f"unknown gate '{mnemonic}'")
        theta = None
        if mnemonic in _PARAMETRIC:
            self.expect_sym("(")
            theta = self.expr()
            self.expect_sym(")")
            if not math.isfinite(theta):
                raise ParseError(name_tok.pos, "finite angle", str(theta), "angle is not finite")
        elif self.at_sym("("):
            raise self.error("qubit argument", message=f"gate '{mnemonic}' takes no parameters")
        args = self.arg_list("qubit")
        self.expect_sym(";")
        arity = _ARITY.get(mnemonic, 1)
        if len(args) != arity:
            raise ParseError(
                name_tok.pos, f"{arity} argument(s)", str(len(args)),
                f"gate '{mnemonic}' takes {arity} argument(s), got {len(args)}",
            )
        lengths = {len(a[1]) for a in args if len(a[1]) > 1}
        if len(lengths) > 1:
            raise ParseError(name_tok.pos, "equal register sizes", str(sorted(lengths)), "register size mismatch")
        width = lengths.pop() if lengths else 1
        for k in range(width):
            qubits = [a[1][k] if len(a[1]) > 1 else a[1][0] for a in args]
            self.instructions.append(Instruction.gate(MNEMONICS[mnemonic], *qubits, theta=theta))

    # expressions ---------------------------------------------------------
    def expr(self) -> float:
        value = self.term()
        while self.at_sym("+") or self.at_sym("-"):
            op = self.advance().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> float:
        value = self.factor()
        while self.at_sym("*") or self.at_sym("/"):
            op_tok = self.advance()
            rhs = self.factor()
            if op_tok.text == "*":
                value = value * rhs
            elif rhs == 0:
                raise ParseError(op_tok.pos, "non-zero divisor", "0", "division by zero")
            else:
                value = value / rhs
        return value

    def factor(self) -> float:
        t = self.tok
        if self.at_sym("-"):
            self.advance()
            return -self.factor()
        if self.at_sym("("):
            self.advance()
            v = self.expr()
            self.expect_sym(")")
            return v
        if t.kind in ("int", "real"):
            self.advance()
            return float(t.text)
        if t.kind == "id" and t.text == "pi":
            self.advance()
            return math.pi
        raise self.error("angle expression")


def parse(source: str) -> Circuit:
    """Parse OpenQASM source into a :class:`Circuit`.

    Raises:
        ParseError: with the position of the offending token.
    """
    return _Parser(source).program()


def load(path) -> Circuit:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse(fh.read())


def eval_angle(text: str) -> float:
    p = _Parser(text)
    v = p.expr()
    if p.tok.kind != "eof":
        raise p.error("end of expression")
    return v


def format_angle(theta: float) -> str:
    """Shortest ``pi`` form that parses back to exactly ``theta``; else ``repr``."""
    if theta == 0:
        return "0"
    sign = "-" if theta < 0 else ""
    mag = abs(theta)
    for m in range(1, 129):
        k = round(mag * m / math.pi)
        if k < 1 or math.gcd(k, m) != 1:
            continue
        body = "pi" if k == 1 else f"{k}*pi"
        if m != 1:
            body += f"/{m}"
        text = sign + body
        if eval_angle(text) == theta:
            return text
    text = repr(float(theta))
    assert eval_angle(text) == theta
    return text


def _arg(regs: tuple[tuple[str, int], ...], index: int) -> str:
    offset = 0
    for name, size in regs:
        if index < offset + size:
            return f"{name}[{index - offset}]"
        offset += size
    raise UnsupportedExportError(f"index {index} outside declared registers")


def dumps(circuit: Circuit, dense_placeholders: bool = False) -> str:
    """Canonical OpenQASM text of ``circuit`` (LF line endings, trailing newline).

    Raises:
        UnsupportedExportError: the circuit contains dense ``unitary`` instructions
            (unless ``dense_placeholders`` renders them as hashed comments).
    """
    import hashlib

    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    lines += [f"qreg {name}[{size}];" for name, size in circuit.qregs]
    lines += [f"creg {name}[{size}];" for name, size in circuit.cregs]
    q = lambda i: _arg(circuit.qregs, i)  # noqa: E731
    for ins in circuit.instructions:
        if ins.kind == "gate":
            mnem = _PRINT_NAMES[ins.name]
            if ins.theta is not None:
                mnem += f"({format_angle(ins.theta)})"
            lines.append(f"{mnem} {','.join(q(i) for i in ins.qubits)};")
        elif ins.kind == "measure":
            lines.append(f"measure {q(ins.qubits[0])} -> {_arg(circuit.cregs, ins.clbits[0])};")
        elif ins.kind == "barrier":
            lines.append(f"barrier {','.join(q(i) for i in ins.qubits)};")
        elif ins.kind == "unitary":
            if not dense_placeholders:
                raise UnsupportedExportError(
                    f"dense operator '{ins.label}' has no OpenQASM 2.0 spelling"
                )
            digest = hashlib.sha256(ins.matrix.tobytes()).hexdigest()
            lines.append(f"// unitary {ins.label} {','.join(q(i) for i in ins.qubits)} {digest}")
    return "\n".join(lines) + "\n"


def normalize_whitespace(text: str) -> str:
    """Collapse runs of whitespace inside lines and drop blank lines/comments."""
    out = []
    for raw in text.replace("\r\n", "\n").split("\n"):
        line = raw.split("//", 1)[0]
        line = " ".join(line.split())
        if line:
            out.append(line)
    return "\n".join(out)
