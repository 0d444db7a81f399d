# Copyright 2026 irand development team.

# Permission is hereby granted, free of charge, to any person obtaining a copy of
# this software and associated documentation files (the "Software"), to deal in
# the Software without restriction, including without limitation the rights to use,
# copy, modify, merge, publish, distribute, sublicense, and/or sell copies of the
# Software, and to permit persons to whom the Software is furnished to do so,
# subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all copies
# or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED,
# INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR
# PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE
# FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR
# OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER
# DEALINGS IN THE SOFTWARE.

import math

import pytest
import torch
from irand.dynamics.lsv import (
    MapParams,
    deterministic_xseq,
    limit_constant,
    lsv_forward,
    lsv_left_inverse,
    quenched_limit,
    taylor_sandwich,
)


def test_lsv_forward():
    assert lsv_forward(0.5, 0.5) == 1.0
    assert lsv_forward(MapParams(0.3), 0.5) == 1.0
    for alpha in (0.2, 0.5, 1.0, 2.0):
        assert lsv_forward(alpha, 0.75) == 0.5
    assert math.isclose(lsv_forward(0.5, 0.25), 0.4267766953, rel_tol=1e-10)
    assert lsv_forward(0.5, 0.0) == 0.0

    x = torch.tensor([0.0, 0.25, 0.5, 0.75, 1.0], dtype=torch.float64)
    y = lsv_forward(0.5, x)
    assert torch.allclose(y, torch.tensor([0.0, 0.4267766953, 1.0, 0.5, 1.0], dtype=torch.float64))

    # per-point exponents
    y = lsv_forward(torch.tensor([0.5, 1.0], dtype=torch.float64), torch.tensor([0.25, 0.25], dtype=torch.float64))
    assert math.isclose(float(y[1]), 0.25 * 1.5)

    for bad in (-0.1, 1.1, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            lsv_forward(0.5, bad)
    with pytest.raises(ValueError):
        lsv_forward(0.5, torch.tensor([0.2, 1.5], dtype=torch.float64))
    with pytest.raises(ValueError):
        MapParams(0.0)


def test_lsv_left_inverse():
    for alpha in (0.1, 0.5, 0.75, 1.0, 3.0):
        assert lsv_left_inverse(alpha, 1.0) == 0.5
        assert lsv_left_inverse(alpha, 0.0) == 0.0
    assert math.isclose(lsv_left_inverse(1.0, 0.5), (math.sqrt(5) - 1) / 4, rel_tol=1e-13)

    y = torch.linspace(0.0, 1.0, 101, dtype=torch.float64)
    for alpha in (0.3, 0.75, 2.0):
        x = lsv_left_inverse(alpha, y)
        assert bool((x <= 0.5).all()) and bool((x >= 0).all())
        assert torch.allclose(lsv_forward(alpha, x), y, rtol=1e-13, atol=1e-15)
        # scalar and vectorized inverses agree
        assert math.isclose(float(x[37]), lsv_left_inverse(alpha, float(y[37])), rel_tol=1e-13)

    # tiny arguments keep their relative precision
    assert math.isclose(lsv_forward(0.5, lsv_left_inverse(0.5, 1e-20)), 1e-20, rel_tol=1e-12)

    with pytest.raises(ValueError):
        lsv_left_inverse(0.5, 1.5)


def test_deterministic_xseq():
    assert deterministic_xseq(1.0, 1).tolist() == [0.5]
    # alpha = 1 inverts a quadratic: 2x^2 + x - y = 0
    xs = deterministic_xseq(1.0, 3)
    x1 = (math.sqrt(5) - 1) / 4
    x2 = (math.sqrt(1 + 8 * x1) - 1) / 4
    assert torch.allclose(xs, torch.tensor([0.5, x1, x2], dtype=torch.float64), rtol=1e-13)

    xs = deterministic_xseq(0.5, 2000)
    assert xs.dtype == torch.float64
    assert bool((xs[1:] < xs[:-1]).all())
    # n^(1/alpha) x_n(alpha) -> c(alpha)
    assert limit_constant(0.5) == 2.0
    assert abs(2000 ** 2 * float(xs[-1]) / limit_constant(0.5) - 1) < 0.02

    with pytest.raises(ValueError):
        deterministic_xseq(0.5, 0)


def test_limit_constants():
    assert math.isclose(limit_constant(1.0), 0.5)
    assert math.isclose(quenched_limit(0.5, 0.5), 8.0)
    assert math.isclose(quenched_limit(0.5, 1.0), limit_constant(0.5))


def test_taylor_sandwich():
    x = torch.linspace(0.0, 1.0, 257, dtype=torch.float64)
    for alpha in (0.25, 0.5, 0.9):
        lower, value, upper = taylor_sandwich(alpha, x)
        assert bool((lower <= value + 1e-15).all())
        assert bool((value <= upper + 1e-15).all())
