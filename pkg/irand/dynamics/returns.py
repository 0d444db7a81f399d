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
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import torch

from irand.dynamics.driver import (
    ModelParams,
    SkewState,
    SymbolStream,
    SymbolString,
    cylinder_table,
    draw_codes,
    skew_step,
)
from irand.dynamics.lsv import forward_tensor, lsv_forward, quenched_limit
from irand.dynamics.quenched import Itinerary, expected_xn_exact, quenched_xn, quenched_xprime, xn_batch
from irand.utils.metrics import binomial_stderr, mean_stderr
from irand.utils.misc import chunk_kernel, make_generator, run_replicas, uniform_delta0

DEFAULT_CAP = 10 ** 7


@dataclass
class ReturnRecord:
    R: int
    entry_x: float
    cylinder: SymbolString
    weight: float


@dataclass(frozen=True)
class Capped:
    cap: int
    x: float


def _check_delta0(x: float):
    if not 0.5 < x <= 1.0:
        raise ValueError(f"x must lie in (1/2, 1], got {x}")


def return_time_iterate(
    s: SkewState, mp: ModelParams, cap: int = DEFAULT_CAP
) -> Union[ReturnRecord, Capped]:
    """First return to (1/2, 1] by stepping the skew product.

    Args:
        s (SkewState): start state with x in (1/2, 1].
        mp (ModelParams): model parameters.
        cap (int, optional): largest return time searched. Defaults to 10^7.

    Returns:
        Union[ReturnRecord, Capped]: the return record, or a Capped marker carrying the
            position reached after ``cap`` steps.
    """

    _check_delta0(s.x)
    state = s
    for _ in range(cap):
        state = skew_step(state, mp)
        if state.x > 0.5:
            R = state.steps - s.steps
            return ReturnRecord(
                R=R,
                entry_x=state.x,
                cylinder=s.stream.prefix(R),
                weight=math.exp(state.logweight - s.logweight),
            )
    return Capped(cap=cap, x=state.x)


def return_time_locate(x: float, sym: Itinerary, mp: ModelParams, cap: int = DEFAULT_CAP) -> int:
    """Return time as the index n with x in J_n(omega) = (x'_n(omega), x'_{n-1}(omega)].

    Args:
        x (float): point in (1/2, 1].
        sym (Itinerary): itinerary of omega; a finite string raises once exhausted, a
            stream is extended on demand.
        mp (ModelParams): model parameters.
        cap (int, optional): largest index searched. Defaults to 10^7.

    Returns:
        int: the return time.
    """

    _check_delta0(x)
    for n in range(1, cap + 1):
        if x > quenched_xprime(sym, n, mp):
            return n
    raise RuntimeError(f"no bracketing interval found below n={cap}")


def passage_chain(x: float, sym: Itinerary, mp: ModelParams) -> List[Tuple[float, float, float]]:
    """Positions of an excursion next to the intervals predicted for them.

    Returns:
        List[Tuple[float, float, float]]: for steps k = 1..R-1, the triple
            (x_{R-k+1}(phi^k omega), T^k_omega(x), x_{R-k}(phi^k omega)); the middle value
            must lie in the half-open interval formed by the outer ones.
    """

    R = return_time_locate(x, sym, mp)
    exps = (sym.prefix(R) if not isinstance(sym, SymbolString) else sym[:R]).exponents(mp)
    out = []
    position = x
    for k in range(1, R):
        position = lsv_forward(exps[k - 1], position)
        shifted = sym.shifted(k) if not isinstance(sym, SymbolString) else sym.shift(k)
        m = R - k
        out.append((quenched_xn(shifted, m + 1, mp), position, quenched_xn(shifted, m, mp)))
    return out


def partition_completeness(mp: ModelParams, n_max: int) -> Dict[str, float]:
    """Adds up weight times length over the return cells {R = i}, i <= n_max.

    Lengths are normalized by m(Delta_0) = 1/2, so the total must equal
    1 - P(R > n_max) = 1 - E x_n_max.
    """

    if not 1 <= n_max <= 12:
        raise ValueError(f"n_max must lie in [1, 12], got {n_max}")
    total = 0.5  # R = 1 on (3/4, 1]
    for i in range(2, n_max + 1):
        codes, weights = cylinder_table(mp, i - 1)
        lengths = xn_batch(codes, i - 1, mp) - xn_batch(codes, i, mp)
        total += float((weights * lengths).sum())
    expected = 1.0 - expected_xn_exact(mp, n_max)
    return {"total": total, "expected": expected, "residual": abs(total - expected)}


def return_times_batch(
    x: torch.Tensor, mp: ModelParams, generator: torch.Generator, cap: int
) -> torch.Tensor:
    """Vectorized first return times of points in (1/2, 1] with fresh i.i.d. symbols.

    Points still away after ``cap`` steps get ``cap + 1``.
    """

    R = torch.full(x.shape, cap + 1, dtype=torch.int64)
    active = torch.arange(x.numel())
    y = x.clone()
    alpha = torch.tensor(mp.alpha, dtype=torch.float64)
    beta = torch.tensor(mp.beta, dtype=torch.float64)
    for step in range(1, cap + 1):
        u = torch.rand(active.numel(), generator=generator, dtype=torch.float64)
        y = forward_tensor(torch.where(u < mp.p1, alpha, beta), y)
        back = y > 0.5
        if bool(back.any()):
            R[active[back]] = step
            active, y = active[~back], y[~back]
            if active.numel() == 0:
                break
    return R


def _iterate_kernel(size: int, generator: torch.Generator, mp: ModelParams, horizon: int) -> torch.Tensor:
    x = uniform_delta0(size, generator)
    return return_times_batch(x, mp, generator, horizon)


def _conditional_kernel(
    size: int, generator: torch.Generator, mp: ModelParams, n_grid: Sequence[int]
) -> torch.Tensor:
    # rows are itineraries of phi omega; P(R > n | omega) = x_n(phi omega)
    codes = draw_codes(mp, size, max(n_grid) - 1, generator)
    return torch.stack([xn_batch(codes, n, mp) for n in n_grid], dim=1)


@dataclass
class TailEstimate:
    method: str
    M: int
    rows: List[Dict[str, float]] = field(default_factory=list)


def predicted_tail(mp: ModelParams, n: int) -> float:
    """Asymptotic P(R > n) = c(alpha) p1^(-1/alpha) n^(-1/alpha) under uniform Delta_0 starts."""

    return quenched_limit(mp.alpha, mp.p1) * n ** (-1.0 / mp.alpha)


def tail_estimate(
    mp: ModelParams,
    n_grid: Sequence[int],
    M: int,
    seed: int,
    method: str = "iterate",
    workers: int = 0,
) -> TailEstimate:
    """Survival function of the return time for uniform starts on Delta_0.

    Args:
        mp (ModelParams): model parameters.
        n_grid (Sequence[int]): values of n.
        M (int): replicas.
        seed (int): master seed.
        method (str, optional): ``"iterate"`` counts simulated returns (binomial errors);
            ``"conditional"`` averages P(R > n | omega) = x_n(phi omega), which stays
            accurate deep in the tail. Defaults to "iterate".
        workers (int, optional): dataloader workers. Defaults to 0.

    Returns:
        TailEstimate: rows (n, empirical_tail, stderr, predicted_tail).
    """

    n_grid = sorted(int(n) for n in n_grid)
    out = TailEstimate(method=method, M=M)
    if method == "iterate":
        horizon = max(n_grid)
        R = run_replicas(
            chunk_kernel(_iterate_kernel, mp=mp, horizon=horizon),
            M,
            seed,
            tag=10,
            workers=workers,
            desc="return times",
        )
        for n in n_grid:
            p = float((R > n).to(torch.float64).mean())
            out.rows.append(
                {"n": n, "empirical_tail": p, "stderr": binomial_stderr(p, M), "predicted_tail": predicted_tail(mp, n)}
            )
    elif method == "conditional":
        samples = run_replicas(
            chunk_kernel(_conditional_kernel, mp=mp, n_grid=n_grid),
            M,
            seed,
            tag=11,
            workers=workers,
            desc="conditional tail",
        )
        for i, n in enumerate(n_grid):
            stats = mean_stderr(samples[:, i])
            out.rows.append(
                {
                    "n": n,
                    "empirical_tail": stats["mean"],
                    "stderr": stats["stderr"],
                    "predicted_tail": predicted_tail(mp, n),
                }
            )
    else:
        raise ValueError(f"unknown tail method {method!r}, expected 'iterate' or 'conditional'")
    return out


def dual_return_check(mp: ModelParams, M: int, seed: int, cap: int = DEFAULT_CAP) -> Dict[str, int]:
    """Compares :func:`return_time_iterate` with :func:`return_time_locate` on ``M`` random
    points of (1/2, 1], each with its own seeded stream."""

    x = uniform_delta0(M, make_generator(seed, 12))
    mismatches, capped = 0, 0
    for i in range(M):
        stream = SymbolStream.seeded(mp.p1, seed, i)
        record = return_time_iterate(SkewState(x=float(x[i]), stream=stream), mp, cap)
        if isinstance(record, Capped):
            capped += 1
            continue
        if record.R != return_time_locate(float(x[i]), stream, mp, cap):
            mismatches += 1
    return {"samples": M, "mismatches": mismatches, "capped": capped}


def passage_check(mp: ModelParams, M: int, seed: int, max_R: int = 10) -> Dict[str, int]:
    """Runs :func:`passage_chain` on random points whose return time is at most ``max_R`` and
    counts the steps that leave their predicted interval."""

    x = uniform_delta0(M, make_generator(seed, 13))
    checked, violations = 0, 0
    for i in range(M):
        stream = SymbolStream.seeded(mp.p1, seed, i)
        try:
            return_time_locate(float(x[i]), stream, mp, cap=max_R)
        except RuntimeError:
            continue
        checked += 1
        for low, position, high in passage_chain(float(x[i]), stream, mp):
            if not low < position <= high:
                violations += 1
    return {"samples": M, "checked": checked, "violations": violations}
