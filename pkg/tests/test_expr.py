import math

import numpy as np
import pytest

import proflim as pl
from proflim.expr import parse_index_token


def fd_grad(fn, x, h=1e-6):
    out = np.zeros_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        out[i] = (fn(xp) - fn(xm)) / (2 * h)
    return out


def test_arithmetic_and_value():
    fn, grad = pl.compile_scalar(2, "x0*x1 + 2")
    assert fn(np.array([3.0, 4.0])) == 14.0
    assert np.array_equal(grad(np.array([3.0, 4.0])), [4.0, 3.0])


def test_functions_and_constants():
    fn, _ = pl.compile_scalar(1, "sqr(x0) + pi")
    assert fn(np.array([2.0])) == pytest.approx(4.0 + math.pi)
    fn2, _ = pl.compile_scalar(1, "exp(log(x0))")
    assert fn2(np.array([5.0])) == pytest.approx(5.0)
    fn3, _ = pl.compile_scalar(2, "tanh(x0) * sqrt(x1) - abs(x0)")
    x = np.array([0.4, 9.0])
    assert fn3(x) == pytest.approx(math.tanh(0.4) * 3.0 - 0.4)


def test_analytic_gradient_matches_fd(rng):
    fn, grad = pl.compile_scalar(3, "sin(x0)*x1 + exp(x2/3) - x0*x2")
    for _ in range(10):
        x = rng.standard_normal(3)
        assert np.max(np.abs(grad(x) - fd_grad(fn, x))) < 1e-6


def test_guard_rejections():
    with pytest.raises(pl.ExpressionError):
        pl.compile_scalar(1, "__class__")
    with pytest.raises(pl.ExpressionError):
        pl.compile_scalar(1, "x0 @ x0")
    with pytest.raises(pl.ExpressionError):
        pl.compile_scalar(1, "mystery(x0)")
    with pytest.raises(pl.ExpressionError):
        pl.compile_scalar(2, "x5 + 1")  # out of range for dim 2
    with pytest.raises(pl.ExpressionError):
        pl.compile_scalar(1, "x0 +* 2")
    with pytest.raises(pl.ExpressionError):
        pl.compile_scalar(2, "level:2:0 + x0")  # refs need an antichain


def test_parse_index_token():
    assert parse_index_token("3") == 3
    assert parse_index_token("J") == "J"


def test_cylindrical_from_expression(euclid, rng):
    f = pl.cylindrical_from_expression(
        euclid.family, [3], "level:3:1 + sin(level:3:2)")
    t = euclid["sequence_thread"](np.array([0.0, 2.0, 0.5, 0, 0, 0, 0, 0, 0, 0]))
    assert f(t) == pytest.approx(2.0 + math.sin(0.5))
    grad = pl.differential(f, t)
    assert np.allclose(grad, [0.0, 1.0, math.cos(0.5)])


def test_expression_across_antichain(cross):
    f = pl.cylindrical_from_expression(
        cross.family, ["J", "K"], "level:J:0 * level:K:0")
    t = pl.Thread(cross.family, lambda n: {"I": np.zeros(0),
                                           "J": np.array([2.0]),
                                           "K": np.array([3.0]),
                                           "L": np.array([2.0, 3.0])}[n])
    assert f(t) == pytest.approx(6.0)


def test_expression_local_names_address_gathered_coords(euclid):
    # x0.. address the gathered member coordinates directly
    f = pl.cylindrical_from_expression(euclid.family, [2], "x0 - x1")
    t = euclid["sequence_thread"](np.array([5.0, 1.5] + [0.0] * 8))
    assert f(t) == pytest.approx(3.5)


def test_expression_reference_errors(euclid):
    with pytest.raises(pl.ExpressionError):
        pl.cylindrical_from_expression(euclid.family, [3], "level:4:0")
    with pytest.raises(pl.ExpressionError):
        pl.cylindrical_from_expression(euclid.family, [3], "level:3:7")
    with pytest.raises(pl.ExpressionError):
        pl.cylindrical_from_expression(euclid.family, [3], "level:3:0; import os")
