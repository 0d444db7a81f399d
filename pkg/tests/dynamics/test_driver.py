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
from irand.dynamics.driver import (
    MAX_CYLINDER_LENGTH,
    ModelParams,
    SkewState,
    Symbol,
    SymbolStream,
    SymbolString,
    cylinder_enumerate,
    cylinder_table,
    draw_codes,
    draw_symbols,
    skew_step,
)

from tests.dynamics.utils import DEFAULT_PARAMS, seeded_generator


def test_model_params():
    mp = ModelParams(0.5, 0.75, 0.3)
    assert math.isclose(mp.p2, 0.7)
    assert mp.exponent(Symbol.FAST) == 0.5 and mp.exponent(Symbol.SLOW) == 0.75
    assert mp.fast.alpha == 0.5 and mp.slow.alpha == 0.75

    codes = torch.tensor([0, 1, 1], dtype=torch.uint8)
    assert mp.exponents(codes).tolist() == [0.5, 0.75, 0.75]

    bad = ((0.75, 0.5, 0.5), (0.5, 0.5, 0.5), (0.0, 0.5, 0.5), (0.5, 0.75, 1.5), (0.5, float("inf"), 0.5))
    for alpha, beta, p1 in bad:
        with pytest.raises(ValueError):
            ModelParams(alpha, beta, p1)

    # degenerate drivers are expressible
    ModelParams(0.5, 0.75, 0.0)
    ModelParams(0.5, 0.75, 1.0)


def test_symbol_string():
    sym = SymbolString("FSF")
    assert len(sym) == 3
    assert list(sym) == [Symbol.FAST, Symbol.SLOW, Symbol.FAST]
    assert sym.shift(1) == SymbolString("SF")
    assert sym.count(Symbol.FAST) == 2
    assert math.isclose(sym.weight(ModelParams(0.5, 0.75, 0.3)), 0.3 * 0.7 * 0.3)
    assert math.isclose(sym.log_weight(ModelParams(0.5, 0.75, 0.3)), math.log(0.3 * 0.7 * 0.3))
    assert SymbolString.constant(Symbol.SLOW, 2) == SymbolString([1, 1])
    assert repr(sym) == "SymbolString('FSF')"

    with pytest.raises(ValueError):
        SymbolString("FX")
    with pytest.raises(ValueError):
        SymbolString([0, 2])


def test_draw_symbols():
    assert list(draw_symbols(ModelParams(0.5, 0.75, 1.0), 3, seed=11)) == [Symbol.FAST] * 3
    assert list(draw_symbols(ModelParams(0.5, 0.75, 0.0), 2, seed=11)) == [Symbol.SLOW] * 2

    first = draw_symbols(DEFAULT_PARAMS, 500, seed=7)
    assert first == draw_symbols(DEFAULT_PARAMS, 500, seed=7)
    assert first != draw_symbols(DEFAULT_PARAMS, 500, seed=8)
    assert 150 < first.count(Symbol.FAST) < 350

    with pytest.raises(ValueError):
        draw_symbols(DEFAULT_PARAMS, 0, seed=1)


def test_symbol_stream():
    stream = SymbolStream.seeded(0.5, seed=3)
    shifted = stream.shifted(5)
    # shifted views read the same buffer, whichever is extended first
    tail = shifted.prefix(2000)
    assert stream.prefix(2005)[5:] == tail
    assert shifted.symbol(0) == stream.symbol(5)

    fixed = SymbolStream.from_string("FS")
    assert fixed.symbol(1) == Symbol.SLOW
    with pytest.raises(ValueError):
        fixed.symbol(2)

    padded = SymbolStream.from_string("F", fill=Symbol.SLOW)
    assert list(padded.prefix(4)) == [Symbol.FAST] + [Symbol.SLOW] * 3
    assert SymbolStream.constant(Symbol.FAST).symbol(10000) == Symbol.FAST


def test_skew_step():
    state = SkewState(x=0.75, stream=SymbolStream.seeded(0.5, seed=1))
    assert skew_step(state, DEFAULT_PARAMS).x == 0.5

    state = SkewState(x=0.25, stream=SymbolStream.from_string("FS"))
    moved = skew_step(state, ModelParams(0.5, 1.0, 0.4))
    assert math.isclose(moved.x, 0.4267766953, rel_tol=1e-10)
    assert moved.steps == 1
    assert moved.stream.symbol(0) == Symbol.SLOW
    assert math.isclose(moved.logweight, math.log(0.4))
    # the original state is left untouched
    assert state.x == 0.25 and state.stream.offset == 0


def test_cylinder_enumerate():
    cylinders = cylinder_enumerate(ModelParams(0.5, 0.75, 0.3), 1)
    assert [list(s) for s, _ in cylinders] == [[Symbol.FAST], [Symbol.SLOW]]
    assert [w for _, w in cylinders] == pytest.approx([0.3, 0.7])

    cylinders = cylinder_enumerate(DEFAULT_PARAMS, 2)
    assert [repr(s) for s, _ in cylinders] == [
        "SymbolString('FF')",
        "SymbolString('FS')",
        "SymbolString('SF')",
        "SymbolString('SS')",
    ]
    assert all(w == 0.25 for _, w in cylinders)

    _, weights = cylinder_table(ModelParams(0.5, 0.75, 0.2), 10)
    assert math.isclose(float(weights.sum()), 1.0, rel_tol=1e-12)

    with pytest.raises(ValueError):
        cylinder_table(DEFAULT_PARAMS, MAX_CYLINDER_LENGTH + 1)
    with pytest.raises(ValueError):
        cylinder_enumerate(DEFAULT_PARAMS, 0)


def test_draw_codes():
    codes = draw_codes(DEFAULT_PARAMS, 64, 10000, seeded_generator(5))
    assert codes.shape == (64, 10000) and codes.dtype == torch.uint8
    assert abs(float(codes.to(torch.float64).mean()) - 0.5) < 0.01
    assert torch.equal(codes, draw_codes(DEFAULT_PARAMS, 64, 10000, seeded_generator(5)))
    assert draw_codes(DEFAULT_PARAMS, 8, 0, seeded_generator(5)).shape == (8, 0)
