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

import numpy as np
import pytest
import torch
from irand.dynamics.driver import ModelParams
from irand.dynamics.ulam import (
    DensityEstimate,
    annealed_density,
    cone_check,
    density_exponent,
    density_l1_distance,
    make_grid,
    nu_sample,
    refinement_gap,
    sample_density,
    ulam_matrix,
)

from tests.dynamics.utils import DEFAULT_PARAMS, SMALL_CELLS, seeded_generator, small_density


def test_make_grid():
    grid = make_grid(16)
    assert grid.cells == 16
    assert float(grid.breakpoints[0]) == 0.0 and float(grid.breakpoints[-1]) == 1.0
    assert 0.5 in grid.breakpoints.tolist()
    assert math.isclose(float(grid.breakpoints[1]), 1e-12, rel_tol=1e-9)
    assert math.isclose(float(grid.lengths.sum()), 1.0)
    assert torch.allclose(grid.midpoints, (grid.left + grid.right) / 2)

    fixed = make_grid(16, ratio=1.5)
    assert fixed.ratio == 1.5
    assert math.isclose(float(fixed.breakpoints[2] / fixed.breakpoints[1]), 1.5)

    index = grid.locate(torch.tensor([0.0, 0.5, 0.75, 1.0], dtype=torch.float64))
    assert float(grid.left[index[1]]) == 0.5
    assert int(index[3]) == grid.cells - 1

    bad = ({"cells": 4}, {"cells": 16, "ratio": 1.0}, {"cells": 16, "split": 0.6}, {"cells": 16, "smallest": 0.2})
    for kwargs in bad:
        with pytest.raises(ValueError):
            make_grid(**kwargs)


def test_ulam_matrix():
    grid = make_grid(64)
    matrix = ulam_matrix(grid, DEFAULT_PARAMS)
    assert matrix.shape == (64, 64)
    assert np.allclose(np.asarray(matrix.sum(axis=1)).ravel(), 1.0)
    assert matrix.min() >= 0

    # the slow map carries no weight when p1 = 1
    first = ulam_matrix(grid, ModelParams(0.5, 0.75, 1.0)).toarray()
    second = ulam_matrix(grid, ModelParams(0.5, 0.95, 1.0)).toarray()
    assert np.allclose(first, second)

    # the last cell only reaches cells to the right of 2 b_(K-1) - 1
    last = matrix.getrow(63).toarray().ravel()
    reached = grid.right.numpy()[last > 0]
    assert (reached > float(2 * grid.left[63] - 1)).all()
    assert math.isclose(last.sum(), 1.0)


def test_density_estimate():
    grid = make_grid(32)
    uniform = DensityEstimate.uniform(grid)
    assert math.isclose(uniform.total(), 1.0)
    assert math.isclose(uniform.cdf(0.25), 0.25)
    assert uniform.value_at(0.3) == 1.0
    assert uniform.right_value(0.5) == 1.0
    ends = torch.tensor([0.0, 1.0], dtype=torch.float64)
    assert torch.allclose(uniform.cdf(ends), ends)

    d = DensityEstimate.from_masses(2 * grid.lengths, grid)
    assert math.isclose(d.total(), 1.0)
    assert torch.allclose(d.cell_values, torch.ones(32, dtype=torch.float64))
    assert density_l1_distance(d, DensityEstimate.uniform(make_grid(48))) < 1e-12


def test_invariant_density():
    d = small_density()
    assert d.converged
    assert d.residual < 1e-9
    assert math.isclose(d.total(), 1.0)
    assert bool((d.cell_values >= 0).all())
    assert d.right_value(0.5) > 0


def test_cone_check():
    d = small_density()
    report = cone_check(d, DEFAULT_PARAMS.beta)
    assert report.nonnegative and report.integral_bound
    assert report.a == 16.0
    assert set(report.as_dict()) >= {"passed", "worst_monotone_ratio", "worst_integral_ratio"}

    grid = make_grid(64)
    decreasing = DensityEstimate.from_masses(grid.lengths * grid.midpoints ** -0.5, grid)
    assert cone_check(decreasing, 0.75).passed
    increasing = DensityEstimate.from_masses(grid.lengths * grid.midpoints, grid)
    report = cone_check(increasing, 0.75)
    assert not report.monotone and not report.passed

    with pytest.raises(ValueError):
        cone_check(d, 1.0)


def test_density_exponent():
    d = small_density()
    gamma, r2 = density_exponent(d)
    assert abs(gamma - DEFAULT_PARAMS.alpha) < 0.15
    assert r2 > 0.99


def test_sampling():
    grid = make_grid(32)
    samples = sample_density(DensityEstimate.uniform(grid), 20000, seeded_generator(1))
    assert bool((samples >= 0).all()) and bool((samples <= 1).all())
    assert abs(float(samples.mean()) - 0.5) < 0.01

    states = nu_sample(small_density(), DEFAULT_PARAMS, 5, seed=2)
    assert len(states) == 5
    assert [s.stream.offset for s in states] == [0] * 5
    assert states[0].x == nu_sample(small_density(), DEFAULT_PARAMS, 5, seed=2)[0].x

    with pytest.raises(ValueError):
        nu_sample(small_density(), DEFAULT_PARAMS, 0, seed=2)


def test_refinement_gap():
    rows = refinement_gap(DEFAULT_PARAMS, [256, 128])
    assert [row["cells"] for row in rows] == [128, 256]
    assert rows[1]["l1_gap"] < rows[0]["l1_gap"]

    d, matrix = annealed_density(DEFAULT_PARAMS, SMALL_CELLS)
    assert matrix.shape == (SMALL_CELLS, SMALL_CELLS)
