"""Design DSL: lexer, parser, validation and branch-site numbering.

Designs are small imperative programs over 32-bit unsigned words.  A design
declares a number of input slots (readable via ``in[k]``) and may pull
further words off a sequential stream via ``next_input()``.  Every ``if``
and ``while`` receives a stable branch id, assigned in pre-order over the
(desugared) statement tree, so re-parsing the same source always yields the
same ids.  Those ids are the instrumentation points for the whole engine.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

WORD_BITS = 32
WORD_MASK = 0xFFFFFFFF


class ParseError(Exception):
    """Malformed source text."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class SemanticError(Exception):
    """Well-formed source with invalid meaning (bad slot, kind mismatch, ...)."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col
        self.message = message


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class InSlot:
    slot: int


@dataclass(frozen=True)
class NextInput:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # '-', '~'
    operand: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # + - * / % & | ^ << >>
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Cmp:
    op: str  # == != < <= > >=
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Logic:
    op: str  # '&&' or '||'
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    operand: "Expr"


Expr = Union[Const, Var, InSlot, NextInput, Unary, Bin, Cmp, Logic, Not]


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class InputRead:
    var: str
    slot: int


@dataclass(frozen=True)
class Output:
    expr: Expr


@dataclass(frozen=True)
class Halt:
    pass


@dataclass(frozen=True)
class If:
    branch_id: int
    cond: Expr
    then_body: tuple
    else_body: tuple


@dataclass(frozen=True)
class While:
    branch_id: int
    cond: Expr
    body: tuple


Stmt = Union[Assign, InputRead, Output, Halt, If, While]


class BranchEdge(NamedTuple):
    branch_id: int
    polarity: bool  # True = true-edge, False = false-edge


@dataclass(frozen=True)
class Design:
    name: str
    input_arity: int
    body: tuple
    branch_count: int


def all_edges(design: Design) -> tuple[BranchEdge, ...]:
    """The edge universe: exactly two edges per branch site, fixed order."""
    edges = []
    for b in range(design.branch_count):
        edges.append(BranchEdge(b, True))
        edges.append(BranchEdge(b, False))
    return tuple(edges)


def harvest_literals(design: Design) -> tuple[int, ...]:
    """All integer literals in the design, ascending and deduplicated.

    Used by the fuzzer's interesting-value table when design-aware
    substitution is enabled.
    """
    found: set[int] = set()

    def walk_expr(e: Expr) -> None:
        if isinstance(e, Const):
            found.add(e.value)
        elif isinstance(e, Unary):
            walk_expr(e.operand)
        elif isinstance(e, (Bin, Cmp, Logic)):
            walk_expr(e.left)
            walk_expr(e.right)
        elif isinstance(e, Not):
            walk_expr(e.operand)

    def walk_body(body: tuple) -> None:
        for st in body:
            if isinstance(st, Assign):
                walk_expr(st.expr)
            elif isinstance(st, Output):
                walk_expr(st.expr)
            elif isinstance(st, If):
                walk_expr(st.cond)
                walk_body(st.then_body)
                walk_body(st.else_body)
            elif isinstance(st, While):
                walk_expr(st.cond)
                walk_body(st.body)

    walk_body(design.body)
    return tuple(sorted(found))


# --------------------------------------------------------------------------
# Lexer
# --------------------------------------------------------------------------

_KEYWORDS = {"design", "inputs", "if", "else", "while", "output", "halt",
             "in", "next_input"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>//[^\n]*)
  | (?P<nl>\n)
  | (?P<hex>0[xX][0-9a-fA-F]+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^~!<>=(){}\[\];?:,])
""", re.VERBOSE)


class _Token(NamedTuple):
    kind: str  # 'int' | 'ident' | 'kw' | 'op' | 'eof'
    text: str
    line: int
    col: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(line, col, f"unexpected character {source[pos]!r}")
        pos = m.end()
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            col = 1
            continue
        if kind in ("ws", "comment"):
            col += len(text)
            continue
        tok_col = col
        col += len(text)
        if kind == "hex":
            tokens.append(_Token("int", str(int(text, 16)), line, tok_col))
        elif kind == "ident" and text in _KEYWORDS:
            tokens.append(_Token("kw", text, line, tok_col))
        else:
            tokens.append(_Token(kind, text, line, tok_col))
    tokens.append(_Token("eof", "", line, col))
    return tokens


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

# Transient node; desugared into If statements before a Design is built.
@dataclass(frozen=True)
class _Ternary:
    cond: Expr
    then_expr: Expr
    else_expr: Expr


_WORD = "word"
_BOOL = "bool"

# Binary operator tiers, loosest first (C-like).
_BIN_TIERS = [
    ("|",),
    ("^",),
    ("&",),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "%"),
]
_CMP_EQ = ("==", "!=")
_CMP_REL = ("<", "<=", ">", ">=")


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.input_arity = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise ParseError(tok.line, tok.col,
                             f"expected {want!r}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def at_op(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text == text

    def eat_op(self, text: str) -> bool:
        if self.at_op(text):
            self.advance()
            return True
        return False

    # -- program ----------------------------------------------------------

    def parse_design(self) -> Design:
        self.expect("kw", "design")
        name = self.expect("ident").text
        self.expect("op", "{")
        self.expect("kw", "inputs")
        arity_tok = self.expect("int")
        self.input_arity = int(arity_tok.text)
        self.expect("op", ";")
        body = self.parse_stmts(until="}")
        self.expect("op", "}")
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(tok.line, tok.col, "trailing input after design body")
        body, count = _number_branches(body, 0)
        design = Design(name=name, input_arity=self.input_arity,
                        body=body, branch_count=count)
        _check_vars(design)
        return design

    def parse_stmts(self, until: str) -> tuple:
        stmts = []
        while not self.at_op(until):
            tok = self.peek()
            if tok.kind == "eof":
                raise ParseError(tok.line, tok.col, f"expected {until!r} before end of input")
            stmts.append(self.parse_stmt())
        return tuple(stmts)

    def parse_stmt(self) -> Stmt:
        tok = self.peek()
        if tok.kind == "kw" and tok.text == "if":
            return self.parse_if()
        if tok.kind == "kw" and tok.text == "while":
            return self.parse_while()
        if tok.kind == "kw" and tok.text == "output":
            self.advance()
            self.expect("op", "(")
            value = self.parse_value(allow_ternary=True)
            self.expect("op", ")")
            self.expect("op", ";")
            return _desugar_output(value)
        if tok.kind == "kw" and tok.text == "halt":
            self.advance()
            self.expect("op", ";")
            return Halt()
        if tok.kind == "ident":
            name = self.advance().text
            self.expect("op", "=")
            value = self.parse_value(allow_ternary=True)
            self.expect("op", ";")
            return _desugar_assign(name, value)
        raise ParseError(tok.line, tok.col, f"expected statement, found {tok.text!r}")

    def parse_if(self) -> If:
        self.expect("kw", "if")
        self.expect("op", "(")
        cond = self.parse_cond()
        self.expect("op", ")")
        self.expect("op", "{")
        then_body = self.parse_stmts(until="}")
        self.expect("op", "}")
        else_body: tuple = ()
        if self.peek().kind == "kw" and self.peek().text == "else":
            self.advance()
            self.expect("op", "{")
            else_body = self.parse_stmts(until="}")
            self.expect("op", "}")
        return If(-1, cond, then_body, else_body)

    def parse_while(self) -> While:
        self.expect("kw", "while")
        self.expect("op", "(")
        cond = self.parse_cond()
        self.expect("op", ")")
        self.expect("op", "{")
        body = self.parse_stmts(until="}")
        self.expect("op", "}")
        return While(-1, cond, body)

    # -- expressions --------------------------------------------------------

    def parse_cond(self) -> Expr:
        tok = self.peek()
        expr, kind = self.parse_or()
        if kind != _BOOL:
            raise SemanticError("condition must be a comparison or logical expression",
                                tok.line, tok.col)
        return expr

    def parse_value(self, allow_ternary: bool = False):
        """A word-valued expression; optionally a top-level ternary."""
        tok = self.peek()
        expr, kind = self.parse_or()
        if allow_ternary and self.at_op("?"):
            if kind != _BOOL:
                raise SemanticError("ternary condition must be boolean", tok.line, tok.col)
            self.advance()
            then_expr = self.parse_value(allow_ternary=True)
            self.expect("op", ":")
            else_expr = self.parse_value(allow_ternary=True)
            return _Ternary(expr, then_expr, else_expr)
        if kind != _WORD:
            raise SemanticError("condition used where a word value is required",
                                tok.line, tok.col)
        return expr

    def parse_or(self) -> tuple[Expr, str]:
        left, kind = self.parse_and()
        while self.at_op("||"):
            tok = self.advance()
            right, rkind = self.parse_and()
            if kind != _BOOL or rkind != _BOOL:
                raise SemanticError("'||' requires boolean operands", tok.line, tok.col)
            left, kind = Logic("||", left, right), _BOOL
        return left, kind

    def parse_and(self) -> tuple[Expr, str]:
        left, kind = self.parse_equality()
        while self.at_op("&&"):
            tok = self.advance()
            right, rkind = self.parse_equality()
            if kind != _BOOL or rkind != _BOOL:
                raise SemanticError("'&&' requires boolean operands", tok.line, tok.col)
            left, kind = Logic("&&", left, right), _BOOL
        return left, kind

    def parse_equality(self) -> tuple[Expr, str]:
        left, kind = self.parse_relational()
        while self.peek().kind == "op" and self.peek().text in _CMP_EQ:
            tok = self.advance()
            right, rkind = self.parse_relational()
            if kind != _WORD or rkind != _WORD:
                raise SemanticError(f"{tok.text!r} requires word operands", tok.line, tok.col)
            left, kind = Cmp(tok.text, left, right), _BOOL
        return left, kind

    def parse_relational(self) -> tuple[Expr, str]:
        left, kind = self.parse_bin(0)
        while self.peek().kind == "op" and self.peek().text in _CMP_REL:
            tok = self.advance()
            right, rkind = self.parse_bin(0)
            if kind != _WORD or rkind != _WORD:
                raise SemanticError(f"{tok.text!r} requires word operands", tok.line, tok.col)
            left, kind = Cmp(tok.text, left, right), _BOOL
        return left, kind

    def parse_bin(self, tier: int) -> tuple[Expr, str]:
        if tier >= len(_BIN_TIERS):
            return self.parse_unary()
        ops = _BIN_TIERS[tier]
        left, kind = self.parse_bin(tier + 1)
        while self.peek().kind == "op" and self.peek().text in ops:
            tok = self.advance()
            right, rkind = self.parse_bin(tier + 1)
            if kind != _WORD or rkind != _WORD:
                raise SemanticError(f"{tok.text!r} requires word operands", tok.line, tok.col)
            left, kind = Bin(tok.text, left, right), _WORD
        return left, kind

    def parse_unary(self) -> tuple[Expr, str]:
        tok = self.peek()
        if self.eat_op("!"):
            operand, kind = self.parse_unary()
            if kind != _BOOL:
                raise SemanticError("'!' requires a boolean operand", tok.line, tok.col)
            return Not(operand), _BOOL
        if self.eat_op("-"):
            operand, kind = self.parse_unary()
            if kind != _WORD:
                raise SemanticError("unary '-' requires a word operand", tok.line, tok.col)
            return Unary("-", operand), _WORD
        if self.eat_op("~"):
            operand, kind = self.parse_unary()
            if kind != _WORD:
                raise SemanticError("'~' requires a word operand", tok.line, tok.col)
            return Unary("~", operand), _WORD
        return self.parse_primary()

    def parse_primary(self) -> tuple[Expr, str]:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            value = int(tok.text)
            if value > WORD_MASK:
                raise SemanticError(f"literal {value} exceeds 32 bits", tok.line, tok.col)
            return Const(value), _WORD
        if tok.kind == "kw" and tok.text == "in":
            self.advance()
            self.expect("op", "[")
            slot_tok = self.expect("int")
            self.expect("op", "]")
            slot = int(slot_tok.text)
            if slot >= self.input_arity:
                raise SemanticError(
                    f"input slot {slot} out of range (design declares {self.input_arity})",
                    slot_tok.line, slot_tok.col)
            return InSlot(slot), _WORD
        if tok.kind == "kw" and tok.text == "next_input":
            self.advance()
            self.expect("op", "(")
            self.expect("op", ")")
            return NextInput(), _WORD
        if tok.kind == "ident":
            self.advance()
            return Var(tok.text), _WORD
        if self.eat_op("("):
            expr, kind = self.parse_or()
            self.expect("op", ")")
            return expr, kind
        if tok.kind == "op" and tok.text == "?":
            raise ParseError(tok.line, tok.col,
                             "ternary is only allowed as a full assignment or output value")
        raise ParseError(tok.line, tok.col,
                         f"expected expression, found {tok.text or 'end of input'!r}")


def _desugar_assign(name: str, value) -> Stmt:
    if isinstance(value, _Ternary):
        return If(-1, value.cond,
                  (_desugar_assign(name, value.then_expr),),
                  (_desugar_assign(name, value.else_expr),))
    if isinstance(value, InSlot):
        return InputRead(name, value.slot)
    return Assign(name, value)


def _desugar_output(value) -> Stmt:
    if isinstance(value, _Ternary):
        return If(-1, value.cond,
                  (_desugar_output(value.then_expr),),
                  (_desugar_output(value.else_expr),))
    return Output(value)


def _number_branches(body: tuple, next_id: int) -> tuple[tuple, int]:
    out = []
    for st in body:
        if isinstance(st, If):
            my_id = next_id
            next_id += 1
            then_body, next_id = _number_branches(st.then_body, next_id)
            else_body, next_id = _number_branches(st.else_body, next_id)
            out.append(If(my_id, st.cond, then_body, else_body))
        elif isinstance(st, While):
            my_id = next_id
            next_id += 1
            inner, next_id = _number_branches(st.body, next_id)
            out.append(While(my_id, st.cond, inner))
        else:
            out.append(st)
    return tuple(out), next_id


def _check_vars(design: Design) -> None:
    assigned: set[str] = set()

    def collect(body: tuple) -> None:
        for st in body:
            if isinstance(st, (Assign, InputRead)):
                assigned.add(st.var)
            elif isinstance(st, If):
                collect(st.then_body)
                collect(st.else_body)
            elif isinstance(st, While):
                collect(st.body)

    collect(design.body)

    def check_expr(e: Expr) -> None:
        if isinstance(e, Var):
            if e.name not in assigned:
                raise SemanticError(f"undeclared variable '{e.name}'")
        elif isinstance(e, Unary):
            check_expr(e.operand)
        elif isinstance(e, (Bin, Cmp, Logic)):
            check_expr(e.left)
            check_expr(e.right)
        elif isinstance(e, Not):
            check_expr(e.operand)

    def check_body(body: tuple) -> None:
        for st in body:
            if isinstance(st, Assign):
                check_expr(st.expr)
            elif isinstance(st, Output):
                check_expr(st.expr)
            elif isinstance(st, If):
                check_expr(st.cond)
                check_body(st.then_body)
                check_body(st.else_body)
            elif isinstance(st, While):
                check_expr(st.cond)
                check_body(st.body)

    check_body(design.body)


def parse_design(source: str) -> Design:
    """Parse DSL source into a validated, branch-numbered Design."""
    return _Parser(source).parse_design()


# --------------------------------------------------------------------------
# Pretty printer (canonical form; parse -> print is a fixed point)
# --------------------------------------------------------------------------

def _fmt_expr(e: Expr) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, InSlot):
        return f"in[{e.slot}]"
    if isinstance(e, NextInput):
        return "next_input()"
    if isinstance(e, Unary):
        return f"({e.op}{_fmt_expr(e.operand)})"
    if isinstance(e, Not):
        return f"(!{_fmt_expr(e.operand)})"
    if isinstance(e, (Bin, Cmp, Logic)):
        return f"({_fmt_expr(e.left)} {e.op} {_fmt_expr(e.right)})"
    raise TypeError(f"unknown expression node {e!r}")


def _fmt_body(body: tuple, indent: int, lines: list[str]) -> None:
    pad = "  " * indent
    for st in body:
        if isinstance(st, Assign):
            lines.append(f"{pad}{st.var} = {_fmt_expr(st.expr)};")
        elif isinstance(st, InputRead):
            lines.append(f"{pad}{st.var} = in[{st.slot}];")
        elif isinstance(st, Output):
            lines.append(f"{pad}output({_fmt_expr(st.expr)});")
        elif isinstance(st, Halt):
            lines.append(f"{pad}halt;")
        elif isinstance(st, If):
            lines.append(f"{pad}if ({_fmt_expr(st.cond)}) {{")
            _fmt_body(st.then_body, indent + 1, lines)
            if st.else_body:
                lines.append(f"{pad}}} else {{")
                _fmt_body(st.else_body, indent + 1, lines)
            lines.append(f"{pad}}}")
        elif isinstance(st, While):
            lines.append(f"{pad}while ({_fmt_expr(st.cond)}) {{")
            _fmt_body(st.body, indent + 1, lines)
            lines.append(f"{pad}}}")
        else:
            raise TypeError(f"unknown statement node {st!r}")


def pretty_print(design: Design) -> str:
    lines = [f"design {design.name} {{", f"  inputs {design.input_arity};"]
    _fmt_body(design.body, 1, lines)
    lines.append("}")
    return "\n".join(lines) + "\n"
