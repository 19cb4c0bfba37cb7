"""Solver tool: a two-form program language, arguments being calculator
expressions::

    solve_linear(a, b)          -> {x}       root of a*x + b = 0
    centroid(x1, y1, x2, y2)    -> {cx, cy}  midpoint of two points (box corners)
"""

from models.errors import ParseError, SingularEquation
from .calculator import MAX_LENGTH, Parser

FORMS = {'solve_linear': 2, 'centroid': 4}


def parse_program(program: str) -> tuple[str, list[float]]:
    if not program.strip():
        raise ParseError('Empty program', 0)
    if len(program) > MAX_LENGTH:
        raise ParseError(f'Program longer than {MAX_LENGTH} characters', MAX_LENGTH)
    parser = Parser(program)
    name = parser.current
    if name.kind != 'ident' or name.text not in FORMS:
        raise ParseError(f'Expected one of {", ".join(FORMS)}', name.position)
    parser.advance()
    parser.expect('(')
    args = [parser.expr()]
    while parser.current.text == ',':
        parser.advance()
        args.append(parser.expr())
    parser.expect(')')
    if parser.current.kind != 'end':
        raise ParseError(f'Unexpected "{parser.current.text}"', parser.current.position)
    if len(args) != FORMS[name.text]:
        raise ParseError(f'{name.text} takes {FORMS[name.text]} arguments, got {len(args)}',
                         name.position)
    return name.text, args


def solve(program: str) -> dict[str, float]:
    """Runs a solver program

    :raises ParseError: Program outside the two forms
    :raises SingularEquation: solve_linear with a = 0
    """
    form, args = parse_program(program)
    if form == 'solve_linear':
        a, b = args
        if a == 0:
            raise SingularEquation(f'{a}*x + {b} = 0 has no unique root')
        # + 0.0 folds -0.0 into 0.0
        return {'x': -b / a + 0.0}
    x1, y1, x2, y2 = args
    return {'cx': (x1 + x2) / 2, 'cy': (y1 + y2) / 2}


def solver(context, args: dict) -> dict:
    return solve(args['command'])
