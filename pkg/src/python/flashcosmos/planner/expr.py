# See the NOTICE file distributed with this work for additional information
# regarding copyright ownership.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Boolean expressions over named bit-vectors.

The text grammar knows identifiers, parentheses and the operators ``!`` (NOT), ``&`` (AND), ``^`` (XOR) and
``|`` (OR), from the tightest binding to the loosest. A negated AND, OR or XOR is read as NAND, NOR or XNOR.

Typical usage example::

    from flashcosmos.planner import evaluate, parse_expression

    expr = parse_expression("(a | b) & !c")
    bits = evaluate(expr, {"a": a_bits, "b": b_bits, "c": c_bits})

"""

__all__ = [
    "Expr",
    "Var",
    "Not",
    "And",
    "Or",
    "Xor",
    "Xnor",
    "Nand",
    "Nor",
    "parse_expression",
    "evaluate",
    "to_nnf",
    "variables",
    "negate",
    "is_literal",
    "literal_of",
    "conjunction",
    "disjunction",
]

from dataclasses import dataclass
import re
from typing import ClassVar, Iterator, Mapping, Sequence, Union

import numpy as np

from flashcosmos.errors import ExpressionSyntaxError


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Not:
    operand: "Expr"

    def __str__(self) -> str:
        return f"!{_wrap(self.operand)}"


@dataclass(frozen=True)
class _Nary:
    operands: tuple["Expr", ...]

    symbol: ClassVar[str] = "?"

    def __post_init__(self) -> None:
        if len(self.operands) < 2:
            raise ValueError(f"{type(self).__name__} needs at least two operands, got {len(self.operands)}")

    def __str__(self) -> str:
        return f" {self.symbol} ".join(_wrap(operand) for operand in self.operands)


class And(_Nary):
    symbol = "&"


class Or(_Nary):
    symbol = "|"


class Nand(_Nary):
    symbol = "&"

    def __str__(self) -> str:
        return f"!({_Nary.__str__(self)})"


class Nor(_Nary):
    symbol = "|"

    def __str__(self) -> str:
        return f"!({_Nary.__str__(self)})"


@dataclass(frozen=True)
class Xor:
    left: "Expr"
    right: "Expr"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} ^ {_wrap(self.right)}"


@dataclass(frozen=True)
class Xnor:
    left: "Expr"
    right: "Expr"

    def __str__(self) -> str:
        return f"!({_wrap(self.left)} ^ {_wrap(self.right)})"


Expr = Union[Var, Not, And, Or, Nand, Nor, Xor, Xnor]


def _wrap(expr: Expr) -> str:
    if isinstance(expr, (Var, Not, Nand, Nor, Xnor)):
        return str(expr)
    return f"({expr})"


_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokenize(text: str) -> list[str]:
    tokens = []
    position = 0
    text = text.rstrip()
    while position < len(text):
        match = _TOKEN.match(text, position)
        if match is None:
            break
        name, symbol = match.groups()
        if name is not None:
            tokens.append(name)
        elif symbol in "!&^|()":
            tokens.append(symbol)
        else:
            raise ExpressionSyntaxError(f"Illegal symbol '{symbol}' at position {match.start(2)}")
        position = match.end()
    return tokens


class _Parser:
    """Recursive-descent parser, one method per precedence level."""

    def __init__(self, tokens: list[str]) -> None:
        self.tokens = tokens
        self.position = 0

    def peek(self) -> str | None:
        return self.tokens[self.position] if self.position < len(self.tokens) else None

    def advance(self) -> str:
        token = self.peek()
        if token is None:
            raise ExpressionSyntaxError("Unexpected end of expression")
        self.position += 1
        return token

    def parse(self) -> Expr:
        expr = self.parse_or()
        if self.peek() is not None:
            raise ExpressionSyntaxError(f"Unexpected '{self.peek()}' after a complete expression")
        return expr

    def parse_or(self) -> Expr:
        operands = [self.parse_xor()]
        while self.peek() == "|":
            self.advance()
            operands.append(self.parse_xor())
        return operands[0] if len(operands) == 1 else Or(tuple(operands))

    def parse_xor(self) -> Expr:
        expr = self.parse_and()
        while self.peek() == "^":
            self.advance()
            expr = Xor(expr, self.parse_and())
        return expr

    def parse_and(self) -> Expr:
        operands = [self.parse_not()]
        while self.peek() == "&":
            self.advance()
            operands.append(self.parse_not())
        return operands[0] if len(operands) == 1 else And(tuple(operands))

    def parse_not(self) -> Expr:
        if self.peek() == "!":
            self.advance()
            operand = self.parse_not()
            if isinstance(operand, And):
                return Nand(operand.operands)
            if isinstance(operand, Or):
                return Nor(operand.operands)
            if isinstance(operand, Xor):
                return Xnor(operand.left, operand.right)
            return Not(operand)
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        token = self.advance()
        if token == "(":
            expr = self.parse_or()
            if self.advance() != ")":
                raise ExpressionSyntaxError("Missing closing parenthesis")
            return expr
        if token in "!&^|)":
            raise ExpressionSyntaxError(f"Expected an operand, found '{token}'")
        return Var(token)


def parse_expression(text: str) -> Expr:
    """Returns the expression written in ``text``.

    Raises:
        ExpressionSyntaxError: if ``text`` is empty or malformed.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise ExpressionSyntaxError("Empty expression")
    return _Parser(tokens).parse()


def _walk(expr: Expr) -> Iterator[Expr]:
    yield expr
    if isinstance(expr, Not):
        yield from _walk(expr.operand)
    elif isinstance(expr, (Xor, Xnor)):
        yield from _walk(expr.left)
        yield from _walk(expr.right)
    elif isinstance(expr, _Nary):
        for operand in expr.operands:
            yield from _walk(operand)


def variables(expr: Expr) -> list[str]:
    """Returns the variable names of ``expr`` in order of first appearance."""
    names = {}
    for node in _walk(expr):
        if isinstance(node, Var):
            names.setdefault(node.name, None)
    return list(names)


def evaluate(expr: Expr, env: Mapping[str, np.ndarray]) -> np.ndarray:
    """Returns the bitwise value of ``expr`` over the bit-vectors of ``env``.

    Raises:
        KeyError: if a variable of ``expr`` is missing from ``env``.
    """
    if isinstance(expr, Var):
        return np.asarray(env[expr.name], dtype=bool)
    if isinstance(expr, Not):
        return ~evaluate(expr.operand, env)
    if isinstance(expr, (Xor, Xnor)):
        value = evaluate(expr.left, env) ^ evaluate(expr.right, env)
        return ~value if isinstance(expr, Xnor) else value
    values = [evaluate(operand, env) for operand in expr.operands]
    if isinstance(expr, (And, Nand)):
        value = np.logical_and.reduce(values)
    else:
        value = np.logical_or.reduce(values)
    return ~value if isinstance(expr, (Nand, Nor)) else value


def conjunction(operands: Sequence[Expr]) -> Expr:
    """Returns the AND of ``operands``, or the operand itself when there is only one."""
    return operands[0] if len(operands) == 1 else And(tuple(operands))


def disjunction(operands: Sequence[Expr]) -> Expr:
    """Returns the OR of ``operands``, or the operand itself when there is only one."""
    return operands[0] if len(operands) == 1 else Or(tuple(operands))


def _flatten(kind: type, operands: Sequence[Expr]) -> tuple[Expr, ...]:
    flat: list[Expr] = []
    for operand in operands:
        if type(operand) is kind:
            flat.extend(operand.operands)
        else:
            flat.append(operand)
    return tuple(flat)


def to_nnf(expr: Expr) -> Expr:
    """Returns ``expr`` in negation normal form.

    The result only uses :class:`Var`, :class:`Not` of a variable, and flattened :class:`And` / :class:`Or`
    nodes. XOR and XNOR are expanded into a sum of products, and double negations cancel.
    """
    return _nnf(expr, False)


def _nnf(expr: Expr, negated: bool) -> Expr:
    if isinstance(expr, Var):
        return Not(expr) if negated else expr
    if isinstance(expr, Not):
        return _nnf(expr.operand, not negated)
    if isinstance(expr, (Xor, Xnor)):
        if isinstance(expr, Xnor):
            negated = not negated
        left, right = expr.left, expr.right
        if negated:
            terms = [And((left, right)), And((Not(left), Not(right)))]
        else:
            terms = [And((left, Not(right))), And((Not(left), right))]
        return _nnf(Or(tuple(terms)), False)
    if isinstance(expr, (Nand, Nor)):
        negated = not negated
    conjunctive = isinstance(expr, (And, Nand)) != negated
    operands = [_nnf(operand, negated) for operand in expr.operands]
    if conjunctive:
        return And(_flatten(And, operands))
    return Or(_flatten(Or, operands))


def negate(expr: Expr) -> Expr:
    """Returns the negation normal form of ``!expr``."""
    return _nnf(expr, True)


def is_literal(expr: Expr) -> bool:
    """Returns whether ``expr`` is a variable or a negated variable."""
    return isinstance(expr, Var) or (isinstance(expr, Not) and isinstance(expr.operand, Var))


def literal_of(expr: Expr) -> tuple[str, bool]:
    """Returns the ``(name, negated)`` pair of the literal ``expr``.

    Raises:
        ValueError: if ``expr`` is not a literal.
    """
    if isinstance(expr, Var):
        return expr.name, False
    if isinstance(expr, Not) and isinstance(expr.operand, Var):
        return expr.operand.name, True
    raise ValueError(f"'{expr}' is not a literal")
