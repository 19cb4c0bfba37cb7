import math

import pytest

from geotools.calculator import MAX_DEPTH, evaluate
from geotools.solver import solve
from models.errors import DivisionByZero, DomainError, ParseError, SingularEquation, UnknownFunction


class TestCalculator:
    @pytest.mark.parametrize('expression, value', [
        ('2*(3+4)', 14),
        ('sqrt((200-100)^2 + (100-100)^2) * 0.072', 7.2),
        ('2^3^2', 512),
        ('-2^2', 4),
        ('--3', 3),
        ('min(4, 2, 8) + max(1, 5)', 7),
        ('atan2(1, 1) * 4', math.pi),
        ('pow(2, 10)', 1024),
        ('1.5e2 / 3', 50),
        ('abs(-7)', 7),
    ])
    def test_values(self, expression, value):
        assert evaluate(expression) == pytest.approx(value, rel=1e-12)

    def test_division_by_zero(self):
        with pytest.raises(DivisionByZero):
            evaluate('1/0')

    def test_parse_error_position(self):
        with pytest.raises(ParseError) as err:
            evaluate('2 * (3 + 4')
        assert err.value.details['position'] == 10

    @pytest.mark.parametrize('expression', ['', '   ', '2 +', '3 4', '2 $ 3', 'x' * 4097])
    def test_parse_errors(self, expression):
        with pytest.raises(ParseError):
            evaluate(expression)

    def test_unknown_function(self):
        with pytest.raises(UnknownFunction):
            evaluate('log(10)')

    @pytest.mark.parametrize('expression', ['sqrt(-1)', '10^400', '(-8)^0.5'])
    def test_domain_errors(self, expression):
        with pytest.raises(DomainError):
            evaluate(expression)

    def test_zero_to_negative_power(self):
        with pytest.raises(DivisionByZero):
            evaluate('0^-1')

    def test_long_sign_runs(self):
        assert evaluate('-' * 3001 + '2') == -2
        assert evaluate('2^' + '-' * 2000 + '1') == 2

    def test_long_power_chain(self):
        assert evaluate('^'.join(['1'] * 1500)) == 1

    def test_nesting_limit(self):
        assert evaluate('(' * MAX_DEPTH + '7' + ')' * MAX_DEPTH) == 7
        with pytest.raises(ParseError) as err:
            evaluate('(' * (MAX_DEPTH + 1) + '7' + ')' * (MAX_DEPTH + 1))
        assert err.value.details['position'] == MAX_DEPTH

    def test_nested_calls_count_as_depth(self):
        with pytest.raises(ParseError):
            evaluate('abs(' * 500 + '1' + ')' * 500)


class TestSolver:
    def test_linear(self):
        assert solve('solve_linear(2, -8)') == {'x': 4}

    def test_centroid(self):
        assert solve('centroid(90, 80, 110, 120)') == {'cx': 100, 'cy': 100}

    def test_expression_arguments(self):
        assert solve('solve_linear(2*2, 2^3)') == {'x': -2}

    def test_negative_zero_root(self):
        assert math.copysign(1, solve('solve_linear(-3, 0)')['x']) == 1

    def test_singular(self):
        with pytest.raises(SingularEquation):
            solve('solve_linear(0, 3)')

    @pytest.mark.parametrize('program', ['', 'solve(1, 2)', 'centroid(1, 2, 3)', 'solve_linear(1, 2) + 1'])
    def test_parse_errors(self, program):
        with pytest.raises(ParseError):
            solve(program)
