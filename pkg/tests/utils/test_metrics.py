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
from irand.utils.metrics import SampleMoments, binomial_stderr, mean_stderr


def test_sample_moments():
    values = torch.linspace(-1.0, 3.0, 101, dtype=torch.float64)
    metric = SampleMoments()
    for chunk in values.split(17):
        metric.update(chunk)
    out = metric.compute()

    assert int(out["count"]) == 101
    assert math.isclose(float(out["mean"]), float(values.mean()), rel_tol=1e-12)
    assert math.isclose(float(out["std"]), float(values.std()), rel_tol=1e-10)
    assert math.isclose(float(out["stderr"]), float(values.std()) / math.sqrt(101), rel_tol=1e-10)

    metric.reset()
    metric.update(torch.tensor([2.0, 4.0]))
    assert float(metric.compute()["mean"]) == 3.0


def test_mean_stderr():
    stats = mean_stderr(torch.tensor([1.0, 2.0, 3.0, 4.0]))
    assert math.isclose(stats["mean"], 2.5)
    assert math.isclose(stats["std"], math.sqrt(5 / 3))
    assert math.isclose(stats["stderr"], math.sqrt(5 / 3) / 2)

    assert mean_stderr(torch.full((10,), 0.3, dtype=torch.float64)) == {"mean": 0.3, "std": 0.0, "stderr": 0.0}

    # a large common offset does not swamp the spread
    stats = mean_stderr(1e9 + torch.tensor([0.0, 1.0], dtype=torch.float64))
    assert math.isclose(stats["mean"], 1e9 + 0.5, rel_tol=1e-15)
    assert math.isclose(stats["std"], math.sqrt(0.5), rel_tol=1e-9)

    with pytest.raises(ValueError):
        mean_stderr(torch.tensor([1.0]))


def test_binomial_stderr():
    assert math.isclose(binomial_stderr(0.5, 100), 0.05)
    assert binomial_stderr(0.0, 100) == 0.0
    assert binomial_stderr(1.0, 100) == 0.0
