"""
Recursive-descent parser for custom target functions.

    expr   :: term (('+' | '-') term)*
    term   :: unary (('*' | '/') unary)*
    unary  :: '-' unary | power
    power  :: atom ('^' unary)?          right-associative
    atom   :: number | 'x' | 'pi' | 'e' | fn '(' expr ')' | '(' expr ')'

Parsed expressions compile to vectorised numpy callables of x.
"""
import re
from typing import Callable, List, NamedTuple, Tuple

import numpy as np

from ..core.errors import ExpressionError

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "abs": np.abs,
}
CONSTANTS = {"pi": np.pi, "e": np.e}
VARIABLE = "x"

_TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


class Token(NamedTuple):
    kind: str
    value: str
    pos: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionError(f"unexpected character {text[bad]!r}", bad, text)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: Token = None):
        tok = tok or self.current
        raise ExpressionError(message, tok.pos, self.text)

    def expect(self, value: str) -> Token:
        if self.current.value != value:
            found = self.current.value or "end of input"
            self.error(f"expected {value!r}, found {found!r}")
        return self.advance()

    def parse(self) -> Tuple:
        if self.current.kind == "end":
            self.error("empty expression")
        node = self.expr()
        if self.current.kind != "end":
            self.error(f"unexpected {self.current.value!r}")
        return node

    def expr(self) -> Tuple:
        node = self.term()
        while self.current.value in ("+", "-"):
            op = self.advance().value
            node = (op, node, self.term())
        return node

    def term(self) -> Tuple:
        node = self.unary()
        while self.current.value in ("*", "/"):
            op = self.advance().value
            node = (op, node, self.unary())
        return node

    def unary(self) -> Tuple:
        if self.current.value == "-":
            self.advance()
            return ("neg", self.unary())
        if self.current.value == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Tuple:
        base = self.atom()
        if self.current.value == "^":
            self.advance()
            return ("^", base, self.unary())
        return base

    def atom(self) -> Tuple:
        tok = self.current
        if tok.kind == "number":
            self.advance()
            return ("num", float(tok.value))
        if tok.kind == "name":
            self.advance()
            if tok.value == VARIABLE:
                return ("var",)
            if tok.value in CONSTANTS:
                return ("num", float(CONSTANTS[tok.value]))
            if tok.value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ("call", tok.value, arg)
            self.error(f"unknown identifier {tok.value!r}", tok)
        if tok.value == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = tok.value or "end of input"
        self.error(f"unexpected {found!r}")


def parse(text: str) -> Tuple:
    """Parse into a nested-tuple syntax tree."""
    return _Parser(text).parse()


def _evaluate(node: Tuple, x: np.ndarray) -> np.ndarray:
    tag = node[0]
    if tag == "num":
        return np.full_like(x, node[1])
    if tag == "var":
        return x
    if tag == "neg":
        return -_evaluate(node[1], x)
    if tag == "call":
        return FUNCTIONS[node[1]](_evaluate(node[2], x))
    lhs, rhs = _evaluate(node[1], x), _evaluate(node[2], x)
    if tag == "+":
        return lhs + rhs
    if tag == "-":
        return lhs - rhs
    if tag == "*":
        return lhs * rhs
    if tag == "/":
        return lhs / rhs
    return np.power(lhs, rhs)


def compile_expression(text: str) -> Callable[[np.ndarray], np.ndarray]:
    tree = parse(text)

    def fn(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            return _evaluate(tree, x)

    fn.__name__ = "expr"
    fn.__doc__ = text
    return fn
