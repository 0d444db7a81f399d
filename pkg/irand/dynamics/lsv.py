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
from dataclasses import dataclass
from typing import Tuple, Union

import torch

Exponent = Union["MapParams", float, torch.Tensor]
Real = Union[float, torch.Tensor]

NEWTON_ATOL = 1e-14
NEWTON_MAX_ITER = 100


@dataclass(frozen=True)
class MapParams:
    """Intermittency exponent of a single LSV map T_alpha."""

    alpha: float

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha <= 0:
            raise ValueError(f"alpha must be a positive finite real, got {self.alpha}")


def _exponent(p: Exponent) -> Union[float, torch.Tensor]:
    if isinstance(p, MapParams):
        return p.alpha
    return p


def _check_unit_interval(x: Real, name: str = "x"):
    if isinstance(x, torch.Tensor):
        if not bool(torch.isfinite(x).all()) or bool((x < 0).any()) or bool((x > 1).any()):
            raise ValueError(f"{name} must lie in [0, 1] and be finite")
    elif not math.isfinite(x) or x < 0 or x > 1:
        raise ValueError(f"{name} must lie in [0, 1] and be finite, got {x}")


def forward_tensor(alpha: Union[float, torch.Tensor], x: torch.Tensor) -> torch.Tensor:
    """Unchecked vectorized T_alpha. ``alpha`` may be a per-element tensor."""

    return torch.where(x <= 0.5, x * (1 + (2 * x) ** alpha), 2 * x - 1)


def left_inverse_tensor(
    alpha: Union[float, torch.Tensor],
    y: torch.Tensor,
    atol: float = NEWTON_ATOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> torch.Tensor:
    """Unchecked vectorized inverse of the left branch x(1 + (2x)^alpha) on [0, 1/2].

    Newton's method seeded at min(y, 1/2). The branch is increasing and convex, so
    iterates approach the root from above; a step leaving the current bracket is
    replaced by bisection.
    """

    x = torch.clamp(y, max=0.5)
    lo = torch.zeros_like(x)
    hi = torch.full_like(x, 0.5)
    for _ in range(max_iter):
        u = (2 * x) ** alpha
        g = x * (1 + u) - y
        hi = torch.where(g > 0, x, hi)
        lo = torch.where(g < 0, x, lo)
        x_new = x - g / (1 + (1 + alpha) * u)
        outside = (x_new < lo) | (x_new > hi)
        x_new = torch.where(outside, 0.5 * (lo + hi), x_new)
        done = (x_new - x).abs() <= torch.clamp(atol * x_new, max=atol)
        x = x_new
        if bool(done.all()):
            return x
    raise RuntimeError("left-branch inverse did not converge")


def left_inverse_scalar(
    alpha: float, y: float, atol: float = NEWTON_ATOL, max_iter: int = NEWTON_MAX_ITER
) -> float:
    if y <= 0.0:
        return 0.0
    x = min(y, 0.5)
    lo, hi = 0.0, 0.5
    for _ in range(max_iter):
        u = (2.0 * x) ** alpha
        g = x * (1.0 + u) - y
        if g == 0.0:
            return x
        if g > 0.0:
            hi = x
        else:
            lo = x
        x_new = x - g / (1.0 + (1.0 + alpha) * u)
        if not lo <= x_new <= hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= min(atol, atol * x_new):
            return x_new
        x = x_new
    raise RuntimeError(f"left-branch inverse did not converge for y={y}, alpha={alpha}")


def lsv_forward(p: Exponent, x: Real) -> Real:
    """Applies the LSV map T_alpha.

    Args:
        p (Exponent): map parameters, a float exponent or a tensor of per-point exponents.
        x (Real): point(s) in [0, 1].

    Returns:
        Real: x(1 + 2^alpha x^alpha) on [0, 1/2] and 2x - 1 on (1/2, 1].
    """

    alpha = _exponent(p)
    _check_unit_interval(x)
    if isinstance(x, torch.Tensor):
        return forward_tensor(alpha, x)
    x = float(x)
    if x <= 0.5:
        return x * (1.0 + (2.0 * x) ** alpha)
    return 2.0 * x - 1.0


def lsv_left_inverse(p: Exponent, y: Real) -> Real:
    """Inverts the left branch of T_alpha.

    Args:
        p (Exponent): map parameters, a float exponent or a tensor of per-point exponents.
        y (Real): value(s) in [0, 1].

    Returns:
        Real: the unique x in [0, 1/2] with T_alpha(x) = y.
    """

    alpha = _exponent(p)
    _check_unit_interval(y, "y")
    if isinstance(y, torch.Tensor):
        return left_inverse_tensor(alpha, y.to(torch.float64))
    return left_inverse_scalar(float(alpha), float(y))


def deterministic_xseq(p: Exponent, N: int) -> torch.Tensor:
    """Backward orbit x_1(alpha), ..., x_N(alpha) of 1/2 under the left branch.

    Args:
        p (Exponent): map parameters.
        N (int): number of points.

    Returns:
        torch.Tensor: float64 tensor of length N, strictly decreasing.
    """

    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}")
    alpha = float(_exponent(p))
    xs = [0.5]
    for _ in range(N - 1):
        xs.append(left_inverse_scalar(alpha, xs[-1]))
    return torch.tensor(xs, dtype=torch.float64)


def limit_constant(p: Exponent) -> float:
    """c(alpha) = 1 / (2 alpha^(1/alpha)), the limit of n^(1/alpha) x_n(alpha)."""

    alpha = float(_exponent(p))
    return 0.5 * alpha ** (-1.0 / alpha)


def quenched_limit(alpha: float, p1: float) -> float:
    """c(alpha) p1^(-1/alpha) = (alpha p1)^(-1/alpha) / 2."""

    return 0.5 * (alpha * p1) ** (-1.0 / alpha)


def taylor_sandwich(p: Exponent, x: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Lower bound, value and upper bound of (1 + x)^(-alpha) on [0, 1].

    Returns:
        Tuple[torch.Tensor, torch.Tensor, torch.Tensor]: 1 - alpha x, (1 + x)^(-alpha)
            and 1 - alpha x + alpha (1 + alpha) x^2 / 2.
    """

    alpha = float(_exponent(p))
    _check_unit_interval(x)
    lower = 1 - alpha * x
    upper = lower + alpha * (1 + alpha) * x ** 2 / 2
    return lower, (1 + x) ** (-alpha), upper
