import math

import numpy as np
import pytest

from app.core.exceptions import ExprArityError, ExprEvaluationError, ExprNameError, ExprSyntaxError
from app.numerics.field_dsl import Binary, Number, eval_on_grid, format_expr, parse_expr
from app.numerics.torus_field import TorusGrid

def test_precedence_and_right_associative_power():
    tree = parse_expr('1 + 2 * 3 ^ 2 ^ 0.5')
    assert isinstance(tree, Binary) and tree.op == '+'
    grid = TorusGrid(2, 4)
    value = eval_on_grid(tree, grid).field.values[0, 0]
    assert value == pytest.approx(1.0 + 2.0 * 3.0 ** (2.0 ** 0.5))

def test_unary_minus_binds_looser_than_power():
    grid = TorusGrid(2, 4)
    assert eval_on_grid(parse_expr('-2^2'), grid).field.values[0, 0] == pytest.approx(-4.0)

def test_format_round_trip():
    tree = parse_expr('max(cos(2*pi*x1), -0.5) + exp(-x2)/3')
    assert parse_expr(format_expr(tree)) == tree

def test_constant_expression_broadcasts():
    grid = TorusGrid(3, 4)
    sample = eval_on_grid(parse_expr('-1'), grid)
    assert sample.field.values.shape == grid.shape
    assert np.all(sample.field.values == -1.0)
    assert not sample.seam_warning

def test_periodic_expression_has_no_seam_warning():
    grid = TorusGrid(2, 8)
    sample = eval_on_grid(parse_expr('cos(2*pi*x1) - 0.5*sin(4*pi*x2)'), grid)
    assert not sample.seam_warning

def test_non_periodic_expression_warns():
    grid = TorusGrid(2, 8)
    sample = eval_on_grid(parse_expr('x1'), grid)
    assert sample.seam_warning
    assert sample.seam_axes == (1,)

def test_expression_undefined_past_the_period_warns():
    grid = TorusGrid(2, 8)
    sample = eval_on_grid(parse_expr('sqrt(1-x1)'), grid)
    assert sample.seam_warning
    assert sample.seam_axes == (1,)
    np.testing.assert_allclose(sample.field.values[:, 0], np.sqrt(1.0 - (np.arange(8) + 0.5) / 8))

@pytest.mark.parametrize('text, offset', [('1 + * 2', 4), ('(1 + 2', 6), ('2 $ 3', 2)])
def test_syntax_error_reports_offset(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(text)
    assert info.value.offset == offset

def test_unknown_name():
    with pytest.raises(ExprNameError):
        parse_expr('foo + 1')

def test_wrong_arity():
    with pytest.raises(ExprArityError):
        parse_expr('max(1)')

def test_variable_beyond_dimension():
    with pytest.raises(ExprEvaluationError, match='variable beyond dimension'):
        eval_on_grid(parse_expr('x3'), TorusGrid(2, 4))

def test_negative_square_root():
    with pytest.raises(ExprEvaluationError):
        eval_on_grid(parse_expr('sqrt(-1 - x1)'), TorusGrid(2, 4))

def test_number_literal():
    assert parse_expr('2.5e-1') == Number(0.25)
    assert math.isclose(eval_on_grid(parse_expr('pi'), TorusGrid(2, 4)).field.values[1, 1], math.pi)
