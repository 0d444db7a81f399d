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
from typing import Dict

import torch
from torchmetrics.metric import Metric


class SampleMoments(Metric):
    full_state_update = False
    is_differentiable = False
    higher_is_better = None

    def __init__(self, **kwargs):
        """Streaming count, mean and standard error of scalar samples.

        Chunks are accumulated in the order they are passed to :meth:`update`, so the
        result is reproducible for a fixed chunking.
        """

        super().__init__(**kwargs)
        self.add_state("count", default=torch.tensor(0, dtype=torch.int64), dist_reduce_fx="sum")
        self.add_state("total", default=torch.tensor(0.0, dtype=torch.float64), dist_reduce_fx="sum")
        self.add_state("total_sq", default=torch.tensor(0.0, dtype=torch.float64), dist_reduce_fx="sum")

    def update(self, values: torch.Tensor):
        values = values.detach().to(torch.float64).flatten()
        self.count += values.numel()
        self.total += values.sum()
        self.total_sq += (values * values).sum()

    def compute(self) -> Dict[str, torch.Tensor]:
        n = self.count.to(torch.float64)
        mean = self.total / n
        var = torch.clamp(self.total_sq / n - mean * mean, min=0.0) * n / torch.clamp(n - 1, min=1)
        return {"mean": mean, "std": var.sqrt(), "stderr": (var / n).sqrt(), "count": self.count}


def mean_stderr(values: torch.Tensor) -> Dict[str, float]:
    """Sample mean, standard deviation and standard error of a tensor of samples.

    Constant samples give exactly zero spread.
    """

    values = values.to(torch.float64).flatten()
    n = values.numel()
    if n < 2:
        raise ValueError("need at least two samples for a standard error")
    if bool((values == values[0]).all()):
        return {"mean": float(values[0]), "std": 0.0, "stderr": 0.0}
    # moments of the shifted samples, so total_sq does not cancel
    shift = values.mean()
    metric = SampleMoments()
    metric.update(values - shift)
    out = metric.compute()
    return {"mean": float(shift + out["mean"]), "std": float(out["std"]), "stderr": float(out["stderr"])}


def binomial_stderr(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)
