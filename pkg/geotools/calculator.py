"""Recursive descent evaluator for the Calculator tool.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary ('^' unary)*
    unary  := '-'* atom
    atom   := number | ident '(' expr (',' expr)* ')' | '(' expr ')'

'^' is right-associative; trigonometry works in radians. Parentheses and
function calls nest at most MAX_DEPTH levels.
"""

import math
import re
from typing import Callable, NamedTuple

from models.errors import DivisionByZero, DomainError, ParseError, UnknownFunction

MAX_LENGTH = 4096
MAX_DEPTH = 64

TOKEN_RE = re.compile(r"""
    (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
  | (?P<space>\s+)
""", re.VERBOSE)

# name -> (min arity, max arity or None, implementation)
FUNCTIONS: dict[str, tuple[int, int | None, Callable[..., float]]] = {
    'sqrt': (1, 1, math.sqrt),
    'abs': (1, 1, abs),
    'min': (1, None, min),
    'max': (1, None, max),
    'sin': (1, 1, math.sin),
    'cos': (1, 1, math.cos),
    'tan': (1, 1, math.tan),
    'atan2': (2, 2, math.atan2),
    'pow': (2, 2, math.pow),
}


class Token(NamedTuple):
    kind: str
    text: str
    position: int


def tokenize(expression: str) -> list[Token]:
    tokens = []
    position = 0
    while position < len(expression):
        match = TOKEN_RE.match(expression, position)
        if match is None:
            raise ParseError(f'Unexpected character "{expression[position]}"', position)
        if match.lastgroup != 'space':
            tokens.append(Token(match.lastgroup, match.group(), position))
        position = match.end()
    tokens.append(Token('end', '', len(expression)))
    return tokens


def _pow(base: float, exponent: float) -> float:
    if base == 0 and exponent < 0:
        raise DivisionByZero('Zero raised to a negative power')
    try:
        return math.pow(base, exponent)
    except (ValueError, OverflowError) as err:
        raise DomainError(f'{base} ^ {exponent}: {err}') from err


class Parser:
    def __init__(self, expression: str):
        self.tokens = tokenize(expression)
        self.index = 0
        self.depth = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        if self.current.text != text:
            found = self.current.text or 'end of input'
            raise ParseError(f'Expected "{text}", found "{found}"', self.current.position)
        return self.advance()

    def parse(self) -> float:
        value = self.expr()
        if self.current.kind != 'end':
            raise ParseError(f'Unexpected "{self.current.text}"', self.current.position)
        return value

    def expr(self) -> float:
        value = self.term()
        while self.current.text in ('+', '-'):
            if self.advance().text == '+':
                value += self.term()
            else:
                value -= self.term()
        return value

    def term(self) -> float:
        value = self.factor()
        while self.current.text in ('*', '/'):
            operator = self.advance()
            right = self.factor()
            if operator.text == '*':
                value *= right
            elif right == 0:
                raise DivisionByZero(f'Division by zero at position {operator.position}')
            else:
                value /= right
        return value

    def factor(self) -> float:
        operands = [self.unary()]
        while self.current.text == '^':
            self.advance()
            operands.append(self.unary())
        value = operands.pop()
        while operands:
            value = _pow(operands.pop(), value)
        return value

    def unary(self) -> float:
        negate = False
        while self.current.text == '-':
            self.advance()
            negate = not negate
        value = self.atom()
        return -value if negate else value

    def enter(self, token: Token) -> None:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ParseError(f'Nesting deeper than {MAX_DEPTH} levels', token.position)

    def atom(self) -> float:
        token = self.current
        if token.kind == 'number':
            self.advance()
            return float(token.text)
        if token.text == '(':
            self.enter(token)
            self.advance()
            value = self.expr()
            self.expect(')')
            self.depth -= 1
            return value
        if token.kind == 'ident':
            self.enter(token)
            value = self.call()
            self.depth -= 1
            return value
        found = token.text or 'end of input'
        raise ParseError(f'Unexpected "{found}"', token.position)

    def call(self) -> float:
        name = self.advance()
        if name.text not in FUNCTIONS:
            raise UnknownFunction(f'Unknown function "{name.text}"', position=name.position)
        self.expect('(')
        args = [self.expr()]
        while self.current.text == ',':
            self.advance()
            args.append(self.expr())
        self.expect(')')

        min_arity, max_arity, func = FUNCTIONS[name.text]
        if len(args) < min_arity or (max_arity is not None and len(args) > max_arity):
            raise ParseError(f'{name.text} takes {min_arity}'
                             f'{"" if max_arity == min_arity else "+"} argument(s), got {len(args)}',
                             name.position)
        if name.text == 'pow':
            return _pow(*args)
        if name.text == 'sqrt' and args[0] < 0:
            raise DomainError(f'sqrt of negative number {args[0]}')
        try:
            return float(func(*args))
        except (ValueError, OverflowError) as err:
            raise DomainError(f'{name.text}: {err}') from err


def evaluate(expression: str) -> float:
    """Value of ``expression`` as a 64-bit float

    :raises ParseError: Empty, oversized or ungrammatical expression
    :raises DivisionByZero: Division by zero
    :raises UnknownFunction: Call of a function outside the whitelist
    :raises DomainError: Argument outside a function's domain, or overflow
    """
    if not expression.strip():
        raise ParseError('Empty expression', 0)
    if len(expression) > MAX_LENGTH:
        raise ParseError(f'Expression longer than {MAX_LENGTH} characters', MAX_LENGTH)
    value = Parser(expression).parse()
    if not math.isfinite(value):
        raise DomainError('Result is not a finite number')
    return value


def calculator(context, args: dict) -> dict:
    return {'result': evaluate(args['expression'])}
