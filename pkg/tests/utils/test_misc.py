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
from irand.utils.misc import (
    ConfigError,
    ReplicaChunks,
    chunk_kernel,
    configure_runner,
    derive_seed,
    linear_fit,
    log_grid,
    loglog_slope,
    make_generator,
    run_replicas,
    uniform_delta0,
)


def uniform_kernel(size: int, generator: torch.Generator, scale: float = 1.0) -> torch.Tensor:
    return scale * torch.rand(size, generator=generator, dtype=torch.float64)


def paired_kernel(size: int, generator: torch.Generator):
    u = torch.rand(size, generator=generator, dtype=torch.float64)
    return {"u": u, "pair": (u, 2 * u)}


def test_derive_seed():
    seed = derive_seed(5, 1, 2)
    assert seed == derive_seed(5, 1, 2)
    assert 0 <= seed < 2 ** 63
    assert len({derive_seed(5), derive_seed(5, 0), derive_seed(5, 1), derive_seed(6, 1), derive_seed(5, 1, 0)}) == 5

    with pytest.raises(ValueError):
        derive_seed(-1)

    first = torch.rand(4, generator=make_generator(5, 3))
    assert torch.equal(first, torch.rand(4, generator=make_generator(5, 3)))
    assert not torch.equal(first, torch.rand(4, generator=make_generator(5, 4)))


def test_config_error():
    assert issubclass(ConfigError, ValueError)


def test_replica_chunks():
    chunks = ReplicaChunks(uniform_kernel, 2500, seed=1, tag=7, chunk_size=1000)
    assert len(chunks) == 3
    assert [chunks[i].numel() for i in range(3)] == [1000, 1000, 500]
    assert torch.equal(chunks[1], uniform_kernel(1000, make_generator(1, 7, 1)))

    with pytest.raises(ValueError):
        ReplicaChunks(uniform_kernel, 0, seed=1)


def test_run_replicas():
    kernel = chunk_kernel(uniform_kernel, scale=2.0)
    serial = run_replicas(kernel, 2500, seed=3, tag=1, chunk_size=1000)
    assert serial.shape == (2500,)
    assert bool((serial >= 0).all()) and bool((serial < 2).all())

    # workers change the schedule, not the numbers
    parallel = run_replicas(kernel, 2500, seed=3, tag=1, workers=2, chunk_size=1000)
    assert torch.equal(serial, parallel)

    assert not torch.equal(serial, run_replicas(kernel, 2500, seed=3, tag=2, chunk_size=1000))
    assert not torch.equal(serial, run_replicas(kernel, 2500, seed=4, tag=1, chunk_size=1000))

    out = run_replicas(paired_kernel, 300, seed=3, chunk_size=128)
    assert out["u"].shape == (300,)
    assert torch.equal(out["pair"][1], 2 * out["u"])


def test_configure_runner():
    try:
        configure_runner(progress=False, chunk_size=100)
        chunked = run_replicas(uniform_kernel, 250, seed=3)
        assert torch.equal(chunked, run_replicas(uniform_kernel, 250, seed=3, chunk_size=100))
        with pytest.raises(ValueError):
            configure_runner(chunk_size=0)
    finally:
        configure_runner()


def test_grids_and_fits():
    grid = log_grid(1, 1000, per_decade=4)
    assert grid[0] == 1 and grid[-1] == 1000
    assert all(a < b for a, b in zip(grid, grid[1:]))

    x = [1.0, 2.0, 4.0, 8.0]
    slope, intercept, r2 = loglog_slope(x, [3 * v ** 2 for v in x])
    assert math.isclose(slope, 2.0) and math.isclose(intercept, math.log(3)) and math.isclose(r2, 1.0)
    slope, _, _ = loglog_slope(x, [-v for v in x])
    assert math.isclose(slope, 1.0)
    with pytest.raises(ValueError):
        loglog_slope([1.0, 2.0], [0.0, 1.0])

    slope, intercept, r2 = linear_fit(x, [2 * v - 1 for v in x])
    assert math.isclose(slope, 2.0) and math.isclose(intercept, -1.0) and math.isclose(r2, 1.0)


def test_uniform_delta0():
    x = uniform_delta0(10000, make_generator(0))
    assert bool((x > 0.5).all()) and bool((x <= 1.0).all())
    assert abs(float(x.mean()) - 0.75) < 0.01
