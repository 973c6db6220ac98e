"""
Text mini-language for entire functions, e.g. ``exp(-z) + 2*z`` or
``z + sin(2*pi*z) + 0.0127464``.

Grammar (recursive descent):

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom (('^' | '**') INTEGER)?
    atom  := NUMBER | 'z' | 'pi' | 'i' | 'j' | FUNC '(' expr ')' | '(' expr ')'

Division is allowed only by constant subexpressions.
"""
import math
import re
from typing import List, Tuple

from src.core.expr import Const, Cos, Exp, Expr, Sin, Var, add, intpow, mul, neg
from src.utils.error_handler import ExpressionSyntaxError

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?[ij]?)"
    r"|(?P<name>[A-Za-z_]+)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)
_FUNCTIONS = {"exp": Exp, "sin": Sin, "cos": Cos}


def tokenize(text: str) -> List[Tuple[str, str]]:
    tokens: List[Tuple[str, str]] = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}",
                                        text=text, position=pos)
        kind = match.lastgroup or "op"
        tokens.append((kind, match.group(kind)))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self) -> Tuple[str, str]:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return ("end", "")

    def take(self) -> Tuple[str, str]:
        token = self.peek()
        self.pos += 1
        return token

    def expect(self, value: str) -> None:
        kind, got = self.take()
        if got != value:
            self.fail(f"expected {value!r}, got {got or 'end of input'!r}")

    def fail(self, message: str) -> None:
        raise ExpressionSyntaxError(message, text=self.text, token_index=self.pos)

    def parse(self) -> Expr:
        result = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"trailing input {self.peek()[1]!r}")
        return result

    def expr(self) -> Expr:
        result = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            right = self.term()
            result = add(result, right if op == "+" else neg(right))
        return result

    def term(self) -> Expr:
        result = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            right = self.unary()
            if op == "*":
                result = mul(result, right)
            else:
                if not isinstance(right, Const) or right.value == 0:
                    self.fail("division only by a nonzero constant")
                result = mul(result, Const(1.0 / right.value))
        return result

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.take()
            return neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            kind, value = self.take()
            if kind != "num" or not value.isdigit():
                self.fail("exponent must be a non-negative integer literal")
            return intpow(base, int(value))
        return base

    def atom(self) -> Expr:
        kind, value = self.take()
        if kind == "num":
            if value[-1] in "ij":
                return Const(complex(0.0, float(value[:-1])))
            return Const(float(value))
        if kind == "name":
            if value == "z":
                return Var()
            if value == "pi":
                return Const(math.pi)
            if value in ("i", "j"):
                return Const(1j)
            if value in _FUNCTIONS:
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                inner_node = _FUNCTIONS[value](inner)
                if isinstance(inner, Const):
                    return Const(complex(inner_node(inner.value)))
                return inner_node
            self.fail(f"unknown name {value!r}")
        if value == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        self.fail(f"unexpected token {value or 'end of input'!r}")
        raise AssertionError("unreachable")


def parse_expr(text: str) -> Expr:
    """Parse expression text into an ``Expr`` tree."""
    return _Parser(text).parse()
