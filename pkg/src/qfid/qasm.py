"""OpenQASM 2.0 frontend: a closed-subset parser and a canonical emitter.

Supported grammar (whitespace and // comments between any tokens):

    program := "OPENQASM 2.0;" include? decl* stmt*
    include := "include" STRING ";"
    decl    := ("qreg" | "creg") ID "[" INT "]" ";"
    stmt    := ID params? args ";"              (gate application)
             | "measure" arg "->" arg ";"
             | "barrier" args ";"
    params  := "(" expr ("," expr)* ")"
    arg     := ID ("[" INT "]")?

Parameter expressions are evaluated to 64-bit floats at parse time and may
use float/int literals, ``pi``, unary minus, ``+ - * /`` and parentheses.

Gate applications on whole registers broadcast to per-index gates; a
whole-register ``measure q -> c`` expands pairwise.  Error taxonomy:
syntactic problems (including wrong parameter counts and division by zero)
raise :class:`QasmSyntaxError`; unknown gate names raise
:class:`UnknownGate`; operand resolution problems (undeclared registers,
out-of-range indices, broadcast width mismatches, duplicate qubits) raise
:class:`RegisterError`; recognized-but-excluded constructs (``gate``
definitions, ``if``, ``reset``, OpenQASM 3 syntax) raise
:class:`UnsupportedFeature`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .circuit import GATE_SIGNATURES, Circuit, Gate, Measure


class QasmError(Exception):
    """Base class for all frontend errors."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {message}" if line else message)


class QasmSyntaxError(QasmError):
    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.expected = expected
        if expected:
            message = f"{message} (expected {', '.join(expected)})"
        super().__init__(message, line, col)


class UnknownGate(QasmError):
    pass


class RegisterError(QasmError):
    pass


class UnsupportedFeature(QasmError):
    pass


_UNSUPPORTED_KEYWORDS = {"gate", "if", "reset", "opaque"}

_SYMBOLS = ("->", "(", ")", "[", "]", ",", ";", "+", "-", "*", "/", "{", "}", "==")


@dataclass(frozen=True)
class _Token:
    kind: str  # id | number | string | symbol | eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise QasmSyntaxError("unterminated string", line, col)
                j += 1
            if j >= n:
                raise QasmSyntaxError("unterminated string", line, col)
            tokens.append(_Token("string", text[i + 1 : j], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = seen_exp = False
            while j < n:
                cj = text[j]
                if cj.isdigit():
                    j += 1
                elif cj == "." and not seen_dot and not seen_exp:
                    seen_dot = True
                    j += 1
                elif cj in "eE" and not seen_exp and j > i:
                    seen_exp = True
                    j += 1
                    if j < n and text[j] in "+-":
                        j += 1
                else:
                    break
            tokens.append(_Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("id", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(_Token("symbol", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise QasmSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


@dataclass(frozen=True)
class _Arg:
    reg: str
    index: int | None
    line: int
    col: int


@dataclass(frozen=True)
class _Stmt:
    kind: str  # gate | measure | barrier
    name: str
    params: tuple[float, ...]
    args: tuple[_Arg, ...]
    line: int
    col: int


@dataclass
class QasmProgram:
    """Parsed program before register flattening and broadcast expansion."""

    version: str = "2.0"
    qregs: dict[str, int] = field(default_factory=dict)
    cregs: dict[str, int] = field(default_factory=dict)
    statements: list[_Stmt] = field(default_factory=list)


_MAX_EXPR_DEPTH = 64


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.expr_depth = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise QasmSyntaxError(
                f"unexpected {tok.kind} {tok.text!r}", tok.line, tok.col, (want,)
            )
        return self.next()

    # -- header ----------------------------------------------------------

    def parse_program(self) -> QasmProgram:
        prog = QasmProgram()
        tok = self.expect("id", "OPENQASM")
        ver = self.expect("number")
        if ver.text != "2.0":
            raise UnsupportedFeature(
                f"OPENQASM version {ver.text} not supported", ver.line, ver.col
            )
        self.expect("symbol", ";")
        if self.peek().kind == "id" and self.peek().text == "include":
            self.next()
            fname = self.expect("string")
            if fname.text != "qelib1.inc":
                raise UnsupportedFeature(
                    f"include {fname.text!r} not supported", fname.line, fname.col
                )
            self.expect("symbol", ";")
        while self.peek().kind != "eof":
            self.parse_statement(prog)
        return prog

    # -- statements ------------------------------------------------------

    def parse_statement(self, prog: QasmProgram) -> None:
        tok = self.peek()
        if tok.kind != "id":
            raise QasmSyntaxError(
                f"unexpected {tok.kind} {tok.text!r}", tok.line, tok.col, ("statement",)
            )
        if tok.text in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(f"{tok.text!r} is not supported", tok.line, tok.col)
        if tok.text in ("qreg", "creg"):
            self.parse_decl(prog)
        elif tok.text == "measure":
            self.parse_measure(prog)
        elif tok.text == "barrier":
            self.parse_barrier(prog)
        else:
            self.parse_gate(prog)

    def parse_decl(self, prog: QasmProgram) -> None:
        kw = self.next()
        name = self.expect("id")
        self.expect("symbol", "[")
        width_tok = self.expect("number")
        try:
            width = int(width_tok.text)
        except ValueError:
            raise QasmSyntaxError(
                f"register width must be an integer, got {width_tok.text!r}",
                width_tok.line,
                width_tok.col,
            ) from None
        self.expect("symbol", "]")
        self.expect("symbol", ";")
        if width < 1:
            raise RegisterError(f"register {name.text!r} has width {width} < 1", name.line, name.col)
        if name.text in prog.qregs or name.text in prog.cregs:
            raise RegisterError(f"register {name.text!r} redeclared", name.line, name.col)
        (prog.qregs if kw.text == "qreg" else prog.cregs)[name.text] = width

    def parse_arg(self) -> _Arg:
        name = self.expect("id")
        index = None
        if self.peek().kind == "symbol" and self.peek().text == "[":
            self.next()
            idx_tok = self.expect("number")
            try:
                index = int(idx_tok.text)
            except ValueError:
                raise QasmSyntaxError(
                    f"index must be an integer, got {idx_tok.text!r}",
                    idx_tok.line,
                    idx_tok.col,
                ) from None
            self.expect("symbol", "]")
        return _Arg(name.text, index, name.line, name.col)

    def parse_measure(self, prog: QasmProgram) -> None:
        tok = self.next()
        src = self.parse_arg()
        self.expect("symbol", "->")
        dst = self.parse_arg()
        self.expect("symbol", ";")
        prog.statements.append(_Stmt("measure", "measure", (), (src, dst), tok.line, tok.col))

    def parse_barrier(self, prog: QasmProgram) -> None:
        tok = self.next()
        args = [self.parse_arg()]
        while self.peek().kind == "symbol" and self.peek().text == ",":
            self.next()
            args.append(self.parse_arg())
        self.expect("symbol", ";")
        prog.statements.append(_Stmt("barrier", "barrier", (), tuple(args), tok.line, tok.col))

    def parse_gate(self, prog: QasmProgram) -> None:
        name = self.next()
        params: tuple[float, ...] = ()
        if self.peek().kind == "symbol" and self.peek().text == "(":
            self.next()
            exprs = [self.parse_expr()]
            while self.peek().kind == "symbol" and self.peek().text == ",":
                self.next()
                exprs.append(self.parse_expr())
            self.expect("symbol", ")")
            params = tuple(exprs)
        args = [self.parse_arg()]
        while self.peek().kind == "symbol" and self.peek().text == ",":
            self.next()
            args.append(self.parse_arg())
        self.expect("symbol", ";")
        prog.statements.append(
            _Stmt("gate", name.text, params, tuple(args), name.line, name.col)
        )

    # -- parameter expressions --------------------------------------------

    def parse_expr(self) -> float:
        value = self.parse_term()
        while self.peek().kind == "symbol" and self.peek().text in "+-":
            op = self.next()
            rhs = self.parse_term()
            value = value + rhs if op.text == "+" else value - rhs
        return value

    def parse_term(self) -> float:
        value = self.parse_factor()
        while self.peek().kind == "symbol" and self.peek().text in "*/":
            op = self.next()
            rhs = self.parse_factor()
            if op.text == "/":
                if rhs == 0.0:
                    raise QasmSyntaxError("division by zero in parameter", op.line, op.col)
                value = value / rhs
            else:
                value = value * rhs
        return value

    def parse_factor(self) -> float:
        tok = self.peek()
        if self.expr_depth > _MAX_EXPR_DEPTH:
            raise QasmSyntaxError("expression too deeply nested", tok.line, tok.col)
        if tok.kind == "symbol" and tok.text == "-":
            self.next()
            self.expr_depth += 1
            try:
                return -self.parse_factor()
            finally:
                self.expr_depth -= 1
        if tok.kind == "symbol" and tok.text == "(":
            self.next()
            self.expr_depth += 1
            try:
                value = self.parse_expr()
            finally:
                self.expr_depth -= 1
            self.expect("symbol", ")")
            return value
        if tok.kind == "number":
            self.next()
            return float(tok.text)
        if tok.kind == "id" and tok.text == "pi":
            self.next()
            return math.pi
        raise QasmSyntaxError(
            f"unexpected {tok.kind} {tok.text!r} in expression",
            tok.line,
            tok.col,
            ("number", "pi", "(", "-"),
        )


def _lower(prog: QasmProgram) -> Circuit:
    """Flatten registers to a single index space and expand broadcasts."""
    q_offset: dict[str, int] = {}
    c_offset: dict[str, int] = {}
    nq = nc = 0
    for name, width in prog.qregs.items():
        q_offset[name] = nq
        nq += width
    for name, width in prog.cregs.items():
        c_offset[name] = nc
        nc += width
    circ = Circuit(nq, nc)

    def resolve(arg: _Arg, quantum: bool) -> list[int]:
        regs = prog.qregs if quantum else prog.cregs
        offs = q_offset if quantum else c_offset
        space = "qreg" if quantum else "creg"
        if arg.reg not in regs:
            raise RegisterError(f"undeclared {space} {arg.reg!r}", arg.line, arg.col)
        width = regs[arg.reg]
        if arg.index is None:
            return [offs[arg.reg] + i for i in range(width)]
        if not 0 <= arg.index < width:
            raise RegisterError(
                f"index {arg.index} out of range for {space} {arg.reg!r} of width {width}",
                arg.line,
                arg.col,
            )
        return [offs[arg.reg] + arg.index]

    for stmt in prog.statements:
        if stmt.kind == "barrier":
            qubits: list[int] = []
            for arg in stmt.args:
                qubits.extend(resolve(arg, quantum=True))
            circ.barrier(*qubits)
            continue

        if stmt.kind == "measure":
            src, dst = stmt.args
            qs = resolve(src, quantum=True)
            cs = resolve(dst, quantum=False)
            if (src.index is None) != (dst.index is None):
                raise RegisterError(
                    "measure requires both operands indexed or both whole registers",
                    stmt.line,
                    stmt.col,
                )
            if len(qs) != len(cs):
                raise RegisterError(
                    f"measure width mismatch: {len(qs)} qubits -> {len(cs)} clbits",
                    stmt.line,
                    stmt.col,
                )
            for q, c in zip(qs, cs):
                circ.measure(q, c)
            continue

        sig = GATE_SIGNATURES.get(stmt.name)
        if sig is None:
            raise UnknownGate(f"unknown gate {stmt.name!r}", stmt.line, stmt.col)
        nq_expected, np_expected = sig
        if len(stmt.params) != np_expected:
            raise QasmSyntaxError(
                f"gate {stmt.name!r} expects {np_expected} parameter(s), got {len(stmt.params)}",
                stmt.line,
                stmt.col,
            )
        if len(stmt.args) != nq_expected:
            raise QasmSyntaxError(
                f"gate {stmt.name!r} expects {nq_expected} qubit argument(s), got {len(stmt.args)}",
                stmt.line,
                stmt.col,
            )
        operands = [resolve(arg, quantum=True) for arg in stmt.args]
        widths = {len(ops) for ops in operands if len(ops) > 1}
        if len(widths) > 1:
            raise RegisterError(
                f"broadcast width mismatch in {stmt.name!r}: {sorted(widths)}",
                stmt.line,
                stmt.col,
            )
        repeat = widths.pop() if widths else 1
        for i in range(repeat):
            qubits = tuple(ops[i] if len(ops) > 1 else ops[0] for ops in operands)
            if len(set(qubits)) != len(qubits):
                raise RegisterError(
                    f"duplicate qubit operands in {stmt.name!r}: {qubits}",
                    stmt.line,
                    stmt.col,
                )
            circ.add(stmt.name, qubits, stmt.params)
    return circ


def parse_qasm(text: str | bytes) -> Circuit:
    """Parse OpenQASM 2.0 source into a Circuit.

    Accepts bytes for convenience; invalid UTF-8 is reported as a syntax
    error rather than raising UnicodeDecodeError.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise QasmSyntaxError(f"input is not valid UTF-8: {exc}", 1, 1) from None
    prog = _Parser(text).parse_program()
    return _lower(prog)


def _format_angle(value: float) -> str:
    # repr round-trips doubles exactly, keeping emit(parse(emit(c))) a fixed point
    return repr(value)


def emit_qasm(c: Circuit) -> str:
    """Render a Circuit as canonical QASM text.

    One flat qreg ``q`` (and creg ``c`` if the circuit has clbits); one
    statement per op in circuit order.  ``parse_qasm(emit_qasm(c))`` is
    structurally equal to ``c``.
    """
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    if c.num_qubits > 0:
        lines.append(f"qreg q[{c.num_qubits}];")
    if c.num_clbits > 0:
        lines.append(f"creg c[{c.num_clbits}];")
    for op in c.ops:
        if isinstance(op, Gate):
            args = ",".join(f"q[{q}]" for q in op.qubits)
            if op.params:
                params = ",".join(_format_angle(p) for p in op.params)
                lines.append(f"{op.kind}({params}) {args};")
            else:
                lines.append(f"{op.kind} {args};")
        elif isinstance(op, Measure):
            lines.append(f"measure q[{op.qubit}] -> c[{op.clbit}];")
        elif op.qubits:
            args = ",".join(f"q[{q}]" for q in op.qubits)
            lines.append(f"barrier {args};")
    return "\n".join(lines) + "\n"
