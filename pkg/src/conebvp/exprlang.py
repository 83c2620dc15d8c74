"""Scalar expression language for the weight a(t) and the nonlinearity f(u).

Grammar (recursive descent)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | var | func '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than a leading minus, so ``-u^2``
is ``-(u^2)`` and ``2^3^2`` is ``2^(3^2)``. Exactly one free variable is bound
at parse time. Functions: exp, log, sin, cos, sqrt, abs.

Evaluation follows IEEE semantics for overflow (results may be +/-inf) but never
lets a NaN through: domain faults (log of a nonpositive value, sqrt of a negative
value, division by zero, 0 to a negative power, a negative base to a
non-integer power) raise :class:`EvalError` with ``kind="domain"``, and
indeterminate forms produced by earlier overflow raise it with
``kind="indeterminate"``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Final, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

FUNCTION_NAMES: Final[frozenset[str]] = frozenset(
    {"exp", "log", "sin", "cos", "sqrt", "abs"}
)
BINARY_OPERATORS: Final[frozenset[str]] = frozenset({"+", "-", "*", "/", "^"})

NUMBER_PATTERN: Final[re.Pattern[str]] = re.compile(
    r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
)
IDENTIFIER_PATTERN: Final[re.Pattern[str]] = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
WHITESPACE_PATTERN: Final[re.Pattern[str]] = re.compile(r"\s+")
PUNCTUATION: Final[str] = "+-*/^()"

EvalFaultKind = Literal["domain", "indeterminate"]


class ExpressionError(Exception):
    """Base class for expression parse and evaluation failures."""


class ExpressionSyntaxError(ExpressionError):
    """The source text does not match the grammar."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at offset {offset}")
        self.offset: int = offset


class UnknownIdentifierError(ExpressionError):
    """An identifier other than the bound variable was used."""

    def __init__(self, name: str, offset: int, varname: str) -> None:
        super().__init__(
            f"unknown identifier {name!r} at offset {offset}; only {varname!r} is bound"
        )
        self.name: str = name
        self.offset: int = offset


class UnknownFunctionError(ExpressionError):
    """A call names a function outside the supported set."""

    def __init__(self, name: str, offset: int) -> None:
        supported = ", ".join(sorted(FUNCTION_NAMES))
        super().__init__(
            f"unknown function {name!r} at offset {offset}; supported: {supported}"
        )
        self.name: str = name
        self.offset: int = offset


class EvalError(ExpressionError):
    """Evaluation hit a domain fault or an indeterminate form."""

    def __init__(
        self, message: str, *, node: Node, value: float, kind: EvalFaultKind
    ) -> None:
        super().__init__(f"{message} in {format_node(node)} at input {value!r}")
        self.node: Node = node
        self.value: float = value
        self.kind: EvalFaultKind = kind


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Negate:
    operand: Node


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Call:
    func: str
    argument: Node


Node = Number | Variable | Negate | BinaryOp | Call


@dataclass(frozen=True)
class Expression:
    """A parsed, immutable expression in one free variable."""

    ast: Node
    varname: str
    source: str

    def __call__(self, x: float) -> float:
        return evaluate(self, x)


@dataclass(frozen=True)
class Token:
    kind: Literal["number", "name", "punct", "end"]
    text: str
    offset: int


def tokenize(source: str) -> list[Token]:
    """Split source text into tokens, recording byte offsets."""

    tokens: list[Token] = []
    position = 0
    while position < len(source):
        whitespace = WHITESPACE_PATTERN.match(source, position)
        if whitespace is not None:
            position = whitespace.end()
            continue
        number = NUMBER_PATTERN.match(source, position)
        if number is not None:
            tokens.append(Token("number", number.group(), position))
            position = number.end()
            continue
        name = IDENTIFIER_PATTERN.match(source, position)
        if name is not None:
            tokens.append(Token("name", name.group(), position))
            position = name.end()
            continue
        char = source[position]
        if char in PUNCTUATION:
            tokens.append(Token("punct", char, position))
            position += 1
            continue
        raise ExpressionSyntaxError(f"unexpected character {char!r}", _byte_offset(source, position))
    tokens.append(Token("end", "", len(source)))
    return tokens


def _byte_offset(source: str, position: int) -> int:
    return len(source[:position].encode("utf-8"))


class _Parser:
    def __init__(self, source: str, varname: str) -> None:
        self._source: str = source
        self._varname: str = varname
        self._tokens: list[Token] = tokenize(source)
        self._index: int = 0

    def parse(self) -> Node:
        node = self._expr()
        token = self._peek()
        if token.kind != "end":
            raise self._error(f"unexpected {token.text!r}", token)
        return node

    def _peek(self) -> Token:
        return self._tokens[self._index]

    def _advance(self) -> Token:
        token = self._tokens[self._index]
        self._index += 1
        return token

    def _accept(self, text: str) -> bool:
        token = self._peek()
        if token.kind == "punct" and token.text == text:
            self._index += 1
            return True
        return False

    def _expect(self, text: str) -> None:
        if not self._accept(text):
            token = self._peek()
            found = "end of input" if token.kind == "end" else repr(token.text)
            raise self._error(f"expected {text!r}, found {found}", token)

    def _error(self, message: str, token: Token) -> ExpressionSyntaxError:
        return ExpressionSyntaxError(message, _byte_offset(self._source, token.offset))

    def _expr(self) -> Node:
        node = self._term()
        while True:
            token = self._peek()
            if token.kind == "punct" and token.text in ("+", "-"):
                _ = self._advance()
                node = BinaryOp(token.text, node, self._term())
            else:
                return node

    def _term(self) -> Node:
        node = self._unary()
        while True:
            token = self._peek()
            if token.kind == "punct" and token.text in ("*", "/"):
                _ = self._advance()
                node = BinaryOp(token.text, node, self._unary())
            else:
                return node

    def _unary(self) -> Node:
        if self._accept("-"):
            return Negate(self._unary())
        return self._power()

    def _power(self) -> Node:
        base = self._atom()
        if self._accept("^"):
            return BinaryOp("^", base, self._unary())
        return base

    def _atom(self) -> Node:
        token = self._advance()
        if token.kind == "number":
            value = float(token.text)
            if not math.isfinite(value):
                raise self._error(f"numeric literal {token.text!r} overflows", token)
            return Number(value)
        if token.kind == "name":
            if self._accept("("):
                if token.text not in FUNCTION_NAMES:
                    raise UnknownFunctionError(
                        token.text, _byte_offset(self._source, token.offset)
                    )
                argument = self._expr()
                self._expect(")")
                return Call(token.text, argument)
            if token.text != self._varname:
                raise UnknownIdentifierError(
                    token.text, _byte_offset(self._source, token.offset), self._varname
                )
            return Variable(token.text)
        if token.kind == "punct" and token.text == "(":
            node = self._expr()
            self._expect(")")
            return node
        found = "end of input" if token.kind == "end" else repr(token.text)
        raise self._error(f"expected a number, {self._varname!r}, a call or '(', found {found}", token)


def parse(source: str, varname: str) -> Expression:
    """Parse ``source`` with ``varname`` as the only free variable."""

    if not source.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    if not IDENTIFIER_PATTERN.fullmatch(varname) or varname in FUNCTION_NAMES:
        raise ValueError(f"invalid variable name {varname!r}")
    return Expression(ast=_Parser(source, varname).parse(), varname=varname, source=source)


def format_node(node: Node) -> str:
    match node:
        case Number(value=value):
            return repr(value)
        case Variable(name=name):
            return name
        case Negate(operand=operand):
            return f"(-{format_node(operand)})"
        case BinaryOp(op=op, left=left, right=right):
            return f"({format_node(left)} {op} {format_node(right)})"
        case Call(func=func, argument=argument):
            return f"{func}({format_node(argument)})"


def format_expression(e: Expression) -> str:
    """Fully parenthesized text that parses back to an equivalent tree."""

    return format_node(e.ast)


def evaluate(e: Expression, x: float) -> float:
    """Evaluate at a scalar input."""

    with np.errstate(all="ignore"):
        result = _eval(e.ast, np.asarray(float(x), dtype=np.float64), float(x))
    return float(result)


def evaluate_array(e: Expression, xs: ArrayLike) -> NDArray[np.float64]:
    """Evaluate elementwise; any faulting element raises for the whole array."""

    values = np.asarray(xs, dtype=np.float64)
    with np.errstate(all="ignore"):
        result = _eval(e.ast, values, values)
    return np.broadcast_to(result, values.shape).astype(np.float64, copy=True)


def _first(mask: NDArray[np.bool_], inputs: NDArray[np.float64] | float) -> float:
    if isinstance(inputs, float):
        return inputs
    mask_b, inputs_b = np.broadcast_arrays(mask, inputs)
    flat = inputs_b[mask_b]
    return float(flat.flat[0]) if flat.size else float("nan")


def _check(
    node: Node,
    values: NDArray[np.float64],
    inputs: NDArray[np.float64] | float,
) -> NDArray[np.float64]:
    nan_mask = np.isnan(values)
    if np.any(nan_mask):
        raise EvalError(
            "indeterminate result",
            node=node,
            value=_first(nan_mask, inputs),
            kind="indeterminate",
        )
    return values


def _domain(
    node: Node,
    mask: NDArray[np.bool_],
    inputs: NDArray[np.float64] | float,
    message: str,
) -> None:
    if np.any(mask):
        raise EvalError(message, node=node, value=_first(mask, inputs), kind="domain")


def _eval(
    node: Node, x: NDArray[np.float64], inputs: NDArray[np.float64] | float
) -> NDArray[np.float64]:
    match node:
        case Number(value=value):
            return np.asarray(value, dtype=np.float64)
        case Variable():
            return x
        case Negate(operand=operand):
            return -_eval(operand, x, inputs)
        case BinaryOp(op=op, left=left, right=right):
            lhs = _eval(left, x, inputs)
            rhs = _eval(right, x, inputs)
            return _check(node, _binary(node, op, lhs, rhs, inputs), inputs)
        case Call(func=func, argument=argument):
            arg = _eval(argument, x, inputs)
            return _check(node, _call(node, func, arg, inputs), inputs)


def _binary(
    node: Node,
    op: str,
    lhs: NDArray[np.float64],
    rhs: NDArray[np.float64],
    inputs: NDArray[np.float64] | float,
) -> NDArray[np.float64]:
    match op:
        case "+":
            return lhs + rhs
        case "-":
            return lhs - rhs
        case "*":
            return lhs * rhs
        case "/":
            _domain(node, np.asarray(rhs == 0.0), inputs, "division by zero")
            return lhs / rhs
        case "^":
            _domain(
                node,
                np.asarray((lhs == 0.0) & (rhs < 0.0)),
                inputs,
                "zero raised to a negative power",
            )
            _domain(
                node,
                np.asarray((lhs < 0.0) & (rhs != np.round(rhs))),
                inputs,
                "negative base raised to a non-integer power",
            )
            return np.power(lhs, rhs)
        case _:
            raise AssertionError(f"unsupported operator {op!r}")


def _call(
    node: Node,
    func: str,
    arg: NDArray[np.float64],
    inputs: NDArray[np.float64] | float,
) -> NDArray[np.float64]:
    match func:
        case "exp":
            return np.exp(arg)
        case "log":
            _domain(node, np.asarray(arg <= 0.0), inputs, "log of a nonpositive value")
            return np.log(arg)
        case "sin":
            return np.sin(arg)
        case "cos":
            return np.cos(arg)
        case "sqrt":
            _domain(node, np.asarray(arg < 0.0), inputs, "sqrt of a negative value")
            return np.sqrt(arg)
        case "abs":
            return np.abs(arg)
        case _:
            raise AssertionError(f"unsupported function {func!r}")


__all__ = [
    "BinaryOp",
    "Call",
    "EvalError",
    "Expression",
    "ExpressionError",
    "ExpressionSyntaxError",
    "FUNCTION_NAMES",
    "Negate",
    "Node",
    "Number",
    "UnknownFunctionError",
    "UnknownIdentifierError",
    "Variable",
    "evaluate",
    "evaluate_array",
    "format_expression",
    "parse",
    "tokenize",
]
