"""Small expression language for user-defined charts and families.

Grammar (EBNF), whitespace-insensitive::

    expr   = term { ("+" | "-") term } ;
    term   = unary { ("*" | "/") unary } ;
    unary  = "-" unary | power ;
    power  = atom [ "^" unary ] ;            (* right-associative *)
    atom   = NUMBER | "pi" | VAR | FUNC "(" expr ")" | "(" expr ")" ;
    NUMBER = digits ["." digits] [("e"|"E") ["+"|"-"] digits] | "." digits ;
    VAR    = "u1" .. "u9" | "t" ;
    FUNC   = "sin" | "cos" | "tan" | "exp" | "log" | "sqrt"
           | "sinh" | "cosh" | "atan" ;

Precedence: ``^`` binds tighter than unary minus, which binds tighter than
``*``/``/``, which bind tighter than ``+``/``-``.  Offsets in error messages
are 1-based byte positions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import dual
from .dual import Dual, EvalDomainError

FUNCTIONS = {
    "sin": dual.sin,
    "cos": dual.cos,
    "tan": dual.tan,
    "exp": dual.exp,
    "log": dual.log,
    "sqrt": dual.sqrt,
    "sinh": dual.sinh,
    "cosh": dual.cosh,
    "atan": dual.atan,
}

VARIABLES = frozenset(f"u{k}" for k in range(1, 10)) | {"t"}

PI = 3.141592653589793


class ParseError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class EvalError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = 0


@dataclass(frozen=True)
class Var:
    name: str
    pos: int = 0


@dataclass(frozen=True)
class Pi:
    pos: int = 0


@dataclass(frozen=True)
class Neg:
    arg: object
    pos: int = 0


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: int = 0


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object
    pos: int = 0


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {stripped[0]!r}", bad_at + 1)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num") + 1))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident") + 1))
        else:
            tokens.append(("op", m.group("op"), m.start("op") + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"syntax error, expected {op!r}", pos)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"syntax error, unexpected {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                node = BinOp(val, node, self.term(), pos)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                node = BinOp(val, node, self.unary(), pos)
            else:
                return node

    def unary(self):
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(self.unary(), pos)
        return self.power()

    def power(self):
        node = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            return BinOp("^", node, self.unary(), pos)
        return node

    def atom(self):
        kind, val, pos = self.advance()
        if kind == "num":
            return Num(float(val), pos)
        if kind == "ident":
            nxt_kind, nxt_val, _ = self.peek()
            if nxt_kind == "op" and nxt_val == "(":
                if val not in FUNCTIONS:
                    raise ParseError(f"unknown function {val!r}", pos)
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg, pos)
            if val == "pi":
                return Pi(pos)
            if val in VARIABLES:
                return Var(val, pos)
            raise ParseError(f"unknown identifier {val!r}", pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "end":
            raise ParseError("syntax error, expected ')'" if _open_parens(self.tokens, self.i)
                             else "syntax error, unexpected end of input", pos)
        raise ParseError(f"syntax error, unexpected {val!r}", pos)


def _open_parens(tokens, upto):
    depth = 0
    for kind, val, _ in tokens[:upto]:
        if kind == "op" and val == "(":
            depth += 1
        elif kind == "op" and val == ")":
            depth -= 1
    return depth > 0


def parse(text):
    """Parse expression text into an AST; raises ParseError on bad input."""
    return _Parser(text).parse()


def free_variables(ast):
    """Set of variable names referenced by the AST."""
    if isinstance(ast, Var):
        return {ast.name}
    if isinstance(ast, Neg):
        return free_variables(ast.arg)
    if isinstance(ast, BinOp):
        return free_variables(ast.left) | free_variables(ast.right)
    if isinstance(ast, Call):
        return free_variables(ast.arg)
    return set()


def evaluate(ast, bindings):
    """Evaluate on floats or duals; bindings maps variable names to scalars."""
    if isinstance(ast, Num):
        return ast.value
    if isinstance(ast, Pi):
        return PI
    if isinstance(ast, Var):
        try:
            return bindings[ast.name]
        except KeyError:
            raise EvalError(f"unbound variable {ast.name!r}", ast.pos) from None
    if isinstance(ast, Neg):
        return -evaluate(ast.arg, bindings)
    if isinstance(ast, BinOp):
        a = evaluate(ast.left, bindings)
        b = evaluate(ast.right, bindings)
        try:
            if ast.op == "+":
                return a + b
            if ast.op == "-":
                return a - b
            if ast.op == "*":
                return a * b
            if ast.op == "/":
                return a / b
            return dual.power(a, b)
        except ZeroDivisionError:
            raise EvalError("division by zero", ast.pos) from None
        except EvalDomainError as err:
            raise EvalError(str(err), ast.pos) from None
    if isinstance(ast, Call):
        arg = evaluate(ast.arg, bindings)
        try:
            return FUNCTIONS[ast.fn](arg)
        except EvalDomainError as err:
            raise EvalError(str(err), ast.pos) from None
    raise TypeError(f"not an AST node: {ast!r}")


def eval_number(ast, bindings):
    """Evaluate with plain float bindings, returning a float."""
    return dual.value(evaluate(ast, bindings))


def eval_dual(ast, bindings, seed):
    """Value and directional derivative along the seed direction.

    ``seed`` maps variable names to the components of the direction; missing
    names get derivative zero.
    """
    lifted = {name: Dual(val, seed.get(name, 0.0)) for name, val in bindings.items()}
    out = evaluate(ast, lifted)
    return dual.value(out), dual.deriv(out)


# -- canonical printer ------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _prec(ast):
    if isinstance(ast, BinOp):
        return _PREC[ast.op]
    if isinstance(ast, Neg):
        return _PREC["neg"]
    return _PREC["atom"]


def to_text(ast):
    """Canonical text form; parse(to_text(parse(s))) round-trips."""
    if isinstance(ast, Num):
        return repr(ast.value)
    if isinstance(ast, Pi):
        return "pi"
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Neg):
        inner = to_text(ast.arg)
        if _prec(ast.arg) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(ast, Call):
        return f"{ast.fn}({to_text(ast.arg)})"
    if isinstance(ast, BinOp):
        lhs, rhs = to_text(ast.left), to_text(ast.right)
        p = _PREC[ast.op]
        if ast.op == "^":
            # left operand must be an atom; right side may be any unary chain
            if _prec(ast.left) < _PREC["atom"]:
                lhs = f"({lhs})"
            if isinstance(ast.right, BinOp):
                rhs = f"({rhs})"
        else:
            if _prec(ast.left) < p:
                lhs = f"({lhs})"
            # -, / are left-associative: parenthesize equal-precedence rhs
            if _prec(ast.right) < p or (_prec(ast.right) == p and ast.op in "-/"):
                rhs = f"({rhs})"
        return f"{lhs} {ast.op} {rhs}" if ast.op in "+-" else f"{lhs}{ast.op}{rhs}"
    raise TypeError(f"not an AST node: {ast!r}")
