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
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import torch
from scipy import stats

from irand.dynamics.driver import ModelParams, SymbolStream, draw_codes
from irand.dynamics.lsv import forward_tensor, left_inverse_scalar, left_inverse_tensor
from irand.dynamics.observables import Observable
from irand.dynamics.quenched import Itinerary, quenched_xprime
from irand.dynamics.returns import DEFAULT_CAP, Capped, return_time_locate, return_times_batch
from irand.utils.metrics import mean_stderr
from irand.utils.misc import chunk_kernel, linear_fit, loglog_slope, make_generator, run_replicas, uniform_delta0

DEFAULT_DEPTH_CAP = 10 ** 6
LOCKSTEP_CHUNK = 4096
MIN_BURN = 1000

# level -> {k: x_k(phi^level omega)}
BreakpointCache = Dict[int, Dict[int, float]]


@dataclass
class LinearizedState:
    """Point of the piecewise affine skew product.

    ``branch`` is the index n with x in (x_n(omega), x_(n-1)(omega)] when it is known,
    using x_0 = 1 and x_1 = 1/2 so that branch 1 is the right half.
    """

    x: float
    stream: SymbolStream
    breakpoint_cache: BreakpointCache = field(default_factory=dict)
    steps: int = 0
    branch: Optional[int] = None

    @property
    def level(self) -> int:
        return self.stream.offset


def breakpoint(
    s: LinearizedState, mp: ModelParams, k: int, shift: int = 0, depth_cap: int = DEFAULT_DEPTH_CAP
) -> float:
    """x_k(phi^shift omega) for the state's omega, filling the cache along the way.

    Uses x_k(phi^j omega) = T_(alpha(omega_j))^-1 x_(k-1)(phi^(j+1) omega), so a value
    costs one backward pass that stops at the first cached entry.
    """

    if k > depth_cap:
        raise RuntimeError(f"branch search exceeded the depth cap {depth_cap}")
    if k == 0:
        return 1.0
    if k == 1:
        return 0.5
    cache = s.breakpoint_cache
    level = s.level + shift
    i = 0
    while k - i > 1 and (k - i) not in cache.get(level + i, {}):
        i += 1
    value = 0.5 if k - i == 1 else cache[level + i][k - i]
    exps = s.stream.shifted(shift).prefix(i).exponents(mp)
    for t in range(i - 1, -1, -1):
        value = left_inverse_scalar(exps[t], value)
        cache.setdefault(level + t, {})[k - t] = value
    return value


def locate_branch(s: LinearizedState, mp: ModelParams, depth_cap: int = DEFAULT_DEPTH_CAP) -> int:
    """Smallest n >= 2 with x_n(omega) < x, for x in (0, 1/2]."""

    x = s.x
    hi = 2
    while breakpoint(s, mp, hi, depth_cap=depth_cap) >= x:
        if hi >= depth_cap:
            raise RuntimeError(f"branch search exceeded the depth cap {depth_cap}")
        hi = min(2 * hi, depth_cap)
    lo = max(1, hi // 2)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if breakpoint(s, mp, mid, depth_cap=depth_cap) < x:
            hi = mid
        else:
            lo = mid
    return hi


def _prune(cache: BreakpointCache, level: int):
    for old in [k for k in cache if k < level]:
        del cache[old]


def linearized_step(s: LinearizedState, mp: ModelParams, depth_cap: int = DEFAULT_DEPTH_CAP) -> LinearizedState:
    """One step of the piecewise affine skew product.

    Points of (1/2, 1] go to 2x - 1; a point of (x_n(omega), x_(n-1)(omega)] goes affinely
    onto (x_(n-1)(phi omega), x_(n-2)(phi omega)]; 0 is fixed.
    """

    x = s.x
    if not (math.isfinite(x) and 0.0 <= x <= 1.0):
        raise ValueError(f"x must lie in [0, 1], got {x}")
    next_branch = None
    if x > 0.5:
        new = 2.0 * x - 1.0
    elif x == 0.0:
        new = 0.0
    else:
        n = s.branch
        if n is None or n < 2 or not (
            breakpoint(s, mp, n, depth_cap=depth_cap) < x <= breakpoint(s, mp, n - 1, depth_cap=depth_cap)
        ):
            n = locate_branch(s, mp, depth_cap)
        lo = breakpoint(s, mp, n, depth_cap=depth_cap)
        hi = breakpoint(s, mp, n - 1, depth_cap=depth_cap)
        image_lo = breakpoint(s, mp, n - 1, shift=1, depth_cap=depth_cap)
        image_hi = breakpoint(s, mp, n - 2, shift=1, depth_cap=depth_cap)
        if x == hi:
            new = image_hi
        else:
            new = (image_hi - image_lo) / (hi - lo) * (x - lo) + image_lo
            new = min(max(new, math.nextafter(image_lo, 1.0)), image_hi)
        next_branch = n - 1
    _prune(s.breakpoint_cache, s.level + 1)
    return LinearizedState(
        x=new,
        stream=s.stream.shifted(1),
        breakpoint_cache=s.breakpoint_cache,
        steps=s.steps + 1,
        branch=next_branch,
    )


def induced_affine_step(
    s: LinearizedState, mp: ModelParams, cap: int = DEFAULT_CAP, depth_cap: int = DEFAULT_DEPTH_CAP
) -> Tuple[LinearizedState, Union[int, Capped]]:
    """Iterates :func:`linearized_step` until the point is back in (1/2, 1].

    Returns:
        Tuple[LinearizedState, Union[int, Capped]]: the returned state and the return time,
            or the state after ``cap`` steps with a Capped marker.
    """

    if not 0.5 < s.x <= 1.0:
        raise ValueError(f"x must lie in (1/2, 1], got {s.x}")
    state = s
    for r in range(1, cap + 1):
        state = linearized_step(state, mp, depth_cap)
        if state.x > 0.5:
            return state, r
    return state, Capped(cap=cap, x=state.x)


def induced_closed_form(x: float, sym: Itinerary, mp: ModelParams) -> Tuple[float, int]:
    """Induced linearized map in closed form: on J_R(omega) = (x'_R, x'_(R-1)] it is
    x -> 1/2 + (x - x'_R) / (2 (x'_(R-1) - x'_R))."""

    R = return_time_locate(x, sym, mp)
    low = quenched_xprime(sym, R, mp)
    high = quenched_xprime(sym, R - 1, mp)
    return 0.5 + (x - low) / (2.0 * (high - low)), R


def sample_nu_delta0(
    mp: ModelParams, burn: int, M: int, seed: int, cap: int = DEFAULT_CAP
) -> List[LinearizedState]:
    """Approximate nu_Delta0 samples: uniform starts on (1/2, 1] with fresh seeded streams,
    followed by ``burn >= MIN_BURN`` induced steps.

    Normalized Lebesgue measure on (1/2, 1] times the Bernoulli measure is already
    invariant for the induced map, so the burn-in does not move the law; short burn-ins are
    only measured, by :func:`burn_in_shift`.
    """

    if burn < MIN_BURN:
        raise ValueError(f"burn must be at least {MIN_BURN}, got {burn}")
    if M < 1:
        raise ValueError(f"M must be positive, got {M}")
    x = uniform_delta0(M, make_generator(seed, 40))
    out, capped = [], 0
    for i in range(M):
        state = LinearizedState(x=float(x[i]), stream=SymbolStream.seeded(mp.p1, seed, i))
        for _ in range(burn):
            moved, R = induced_affine_step(state, mp, cap)
            if isinstance(R, Capped):
                capped += 1
                break
            state = moved
        out.append(state)
    if capped:
        warnings.warn(f"{capped} of {M} burn-in trajectories hit the return cap {cap}")
    return out


def induced_lockstep(
    x: torch.Tensor,
    codes: torch.Tensor,
    mp: ModelParams,
    horizon: int,
    max_returns: Optional[int] = None,
    visit: Optional[Callable[[torch.Tensor, torch.Tensor, torch.Tensor], None]] = None,
) -> Dict[str, torch.Tensor]:
    """Runs the induced linearized map on a batch of points of (1/2, 1] up to clock ``horizon``.

    Each sample alternates between a forward search for its return time R (the nonlinear
    and linearized maps share the partition into return cells) and a backward pass that
    evaluates x_R(phi omega) and x_(R-1)(phi omega) along the same symbols; the new point
    is 1/2 + t/2 with t the relative position of 2x - 1 between them. Samples advance one
    micro-step per iteration, so no sample waits for the longest excursion.

    Args:
        x (torch.Tensor): start points in (1/2, 1].
        codes (torch.Tensor): (len(x), horizon + 1) symbol codes, column j read at clock j.
        mp (ModelParams): model parameters.
        horizon (int): largest clock of interest.
        max_returns (Optional[int], optional): stop a sample after this many returns.
        visit (Callable, optional): called as visit(rows, clocks, points) at every return.

    Returns:
        Dict[str, torch.Tensor]: final points, clocks and return counts.
    """

    size = x.numel()
    if codes.shape[1] < horizon + 1:
        raise ValueError(f"insufficient symbols: need {horizon + 1} columns, have {codes.shape[1]}")
    x = x.to(torch.float64).clone()
    rows = torch.arange(size)
    clock = torch.zeros(size, dtype=torch.int64)
    returns = torch.zeros(size, dtype=torch.int64)
    backward = torch.zeros(size, dtype=torch.bool)
    done = torch.zeros(size, dtype=torch.bool) if max_returns != 0 else torch.ones(size, dtype=torch.bool)
    y = x.clone()
    r = torch.zeros(size, dtype=torch.int64)
    j = torch.zeros(size, dtype=torch.int64)
    a = torch.full_like(x, 0.5)
    b = torch.ones_like(x)
    while not bool(done.all()):
        forward_rows = rows[~done & ~backward]
        backward_rows = rows[~done & backward]
        if forward_rows.numel():
            pos = clock[forward_rows] + r[forward_rows]
            moved = forward_tensor(mp.exponents(codes[forward_rows, pos]), y[forward_rows])
            steps = r[forward_rows] + 1
            y[forward_rows] = moved
            r[forward_rows] = steps
            back = moved > 0.5
            lost = ~back & (clock[forward_rows] + steps >= horizon)
            done[forward_rows[lost]] = True
            switched = forward_rows[back]
            backward[switched] = True
            j[switched] = steps[back] - 1
            a[switched] = 0.5
            b[switched] = 1.0
        if backward_rows.numel():
            pulling = backward_rows[j[backward_rows] >= 1]
            if pulling.numel():
                e = mp.exponents(codes[pulling, clock[pulling] + j[pulling]])
                pulled = left_inverse_tensor(torch.cat([e, e]), torch.cat([a[pulling], b[pulling]]))
                a[pulling] = pulled[: pulling.numel()]
                b[pulling] = pulled[pulling.numel() :]
                j[pulling] -= 1
            ready = backward_rows[j[backward_rows] == 0]
            if ready.numel():
                t = ((2 * x[ready] - 1 - a[ready]) / (b[ready] - a[ready])).clamp(0.0, 1.0)
                new = 0.5 + t / 2
                new = torch.where(new > 0.5, new, torch.nextafter(new, torch.ones_like(new)))
                clock[ready] += r[ready]
                returns[ready] += 1
                if visit is not None:
                    visit(ready, clock[ready], new)
                x[ready] = new
                y[ready] = new
                r[ready] = 0
                backward[ready] = False
                finished = clock[ready] >= horizon
                if max_returns is not None:
                    finished |= returns[ready] >= max_returns
                done[ready[finished]] = True
    return {"x": x, "clock": clock, "returns": returns}


def _infinite_corr_kernel(
    size: int,
    generator: torch.Generator,
    mp: ModelParams,
    pairs: Sequence[Tuple[Observable, Observable]],
    n_grid: Sequence[int],
) -> torch.Tensor:
    horizon = max(n_grid)
    x0 = uniform_delta0(size, generator)
    codes = draw_codes(mp, size, horizon + 1, generator)
    lookup = torch.full((horizon + 1,), -1, dtype=torch.int64)
    lookup[torch.tensor(n_grid)] = torch.arange(len(n_grid))
    start = torch.stack([f(x0) for f, _ in pairs])
    out = torch.zeros(size, len(pairs), len(n_grid), dtype=torch.float64)
    if n_grid[0] == 0:
        for p, (_, g) in enumerate(pairs):
            out[:, p, 0] = start[p] * g(x0)

    def visit(ready: torch.Tensor, clocks: torch.Tensor, points: torch.Tensor):
        valid = clocks <= horizon
        slots = lookup[clocks[valid]]
        hit = slots >= 0
        hit_rows, slots, points = ready[valid][hit], slots[hit], points[valid][hit]
        for p, (_, g) in enumerate(pairs):
            out[hit_rows, p, slots] = start[p, hit_rows] * g(points)

    induced_lockstep(x0, codes, mp, horizon, visit=visit)
    return out


@dataclass
class InfiniteCorrelation:
    rows: List[Dict[str, float]]
    fitted_slope: float
    r2: float
    regime: str


def _fit_decay(mp: ModelParams, rows: List[Dict[str, float]], n_lo: float, n_hi: float) -> Tuple[float, float, str]:
    picked = [r for r in rows if n_lo <= r["n"] <= n_hi and r["estimate"] > 0]
    if len(picked) < 2:
        return float("nan"), float("nan"), "insufficient"
    if mp.alpha == 1:
        slope, _, r2 = linear_fit([1.0 / math.log(r["n"]) for r in picked], [r["estimate"] for r in picked])
        return slope, r2, "inverse_log"
    slope, _, r2 = loglog_slope([r["n"] for r in picked], [r["estimate"] for r in picked])
    return slope, r2, "power"


def infinite_correlations(
    pairs: Sequence[Tuple[Observable, Observable]],
    mp: ModelParams,
    n_grid: Sequence[int],
    M: int,
    seed: int,
    workers: int = 0,
    fit_range: Optional[Tuple[float, float]] = None,
) -> List[InfiniteCorrelation]:
    """E f(z) g(S^n z) for z ~ nu_Delta0 under the linearized skew product, for several
    (f, g) pairs on common samples.

    The estimate equals int_Delta0 f g o S^n dnu with nu(Delta_0) = 1. Rows carry
    n, estimate, stderr, the normalizer n^(1 - 1/alpha) (ln n when alpha = 1) and the
    normalized estimate; the fit is log-log for alpha > 1 and against 1/ln n for alpha = 1.
    """

    if mp.alpha < 1:
        raise ValueError(f"infinite-measure correlations need alpha >= 1, got {mp.alpha}")
    n_grid = sorted({int(n) for n in n_grid})
    if n_grid[0] < 0:
        raise ValueError("n must be nonnegative")
    samples = run_replicas(
        chunk_kernel(_infinite_corr_kernel, mp=mp, pairs=list(pairs), n_grid=n_grid),
        M,
        seed,
        tag=41,
        workers=workers,
        chunk_size=LOCKSTEP_CHUNK,
        desc="induced correlations",
    )
    lo, hi = fit_range if fit_range is not None else (max(1, n_grid[0]), n_grid[-1])
    results = []
    for p in range(len(pairs)):
        rows = []
        for i, n in enumerate(n_grid):
            stats_n = mean_stderr(samples[:, p, i])
            if n == 0:
                normalizer = float("nan")
            elif mp.alpha == 1:
                normalizer = math.log(n) if n > 1 else float("nan")
            else:
                normalizer = n ** (1.0 - 1.0 / mp.alpha)
            rows.append(
                {
                    "n": n,
                    "estimate": stats_n["mean"],
                    "stderr": stats_n["stderr"],
                    "normalizer": normalizer,
                    "normalized": stats_n["mean"] * normalizer,
                }
            )
        slope, r2, regime = _fit_decay(mp, rows, lo, hi)
        results.append(InfiniteCorrelation(rows=rows, fitted_slope=slope, r2=r2, regime=regime))
    return results


def infinite_correlation(
    f: Observable,
    g: Observable,
    mp: ModelParams,
    n_grid: Sequence[int],
    M: int,
    seed: int,
    workers: int = 0,
    fit_range: Optional[Tuple[float, float]] = None,
) -> InfiniteCorrelation:
    return infinite_correlations([(f, g)], mp, n_grid, M, seed, workers, fit_range)[0]


def _growth_kernel(size: int, generator: torch.Generator, mp: ModelParams, caps: Sequence[int]) -> torch.Tensor:
    R = return_times_batch(uniform_delta0(size, generator), mp, generator, max(caps))
    return torch.stack([R.clamp(max=cap).to(torch.float64) for cap in caps], dim=1)


@dataclass
class GrowthReport:
    rows: List[Dict[str, float]]
    regime: str
    slope: float
    r2: float
    relative_change: float


def truncated_return_growth(
    mp: ModelParams, caps: Sequence[int], M: int, seed: int, workers: int = 0
) -> GrowthReport:
    """E min(R, cap) for uniform starts on Delta_0.

    The linearized map has the same return cells as the nonlinear one, so return times
    are simulated with the forward map. For alpha > 1 the mean grows like cap^(1 - 1/alpha)
    (log-log slope reported), for alpha = 1 like ln(cap) (r^2 of the fit in ln cap
    reported), and for alpha < 1 it converges (relative change over the last two caps).
    """

    caps = sorted({int(c) for c in caps})
    if caps[0] < 1 or len(caps) < 2:
        raise ValueError("need at least two positive caps")
    samples = run_replicas(
        chunk_kernel(_growth_kernel, mp=mp, caps=caps),
        M,
        seed,
        tag=42,
        workers=workers,
        chunk_size=LOCKSTEP_CHUNK,
        desc="truncated returns",
    )
    rows = []
    for i, cap in enumerate(caps):
        stats_c = mean_stderr(samples[:, i])
        rows.append({"cap": cap, "mean": stats_c["mean"], "stderr": stats_c["stderr"]})
    means = [r["mean"] for r in rows]
    relative_change = abs(means[-1] - means[-2]) / means[-2]
    if mp.alpha > 1:
        slope, _, r2 = loglog_slope(caps, means)
        regime = "power"
    elif mp.alpha == 1:
        slope, _, r2 = linear_fit([math.log(c) for c in caps], means)
        regime = "logarithmic"
    else:
        slope, _, r2 = loglog_slope(caps, means)
        regime = "finite"
    return GrowthReport(rows=rows, regime=regime, slope=slope, r2=r2, relative_change=relative_change)


def _burn_kernel(size: int, generator: torch.Generator, mp: ModelParams, burn: int, horizon: int) -> torch.Tensor:
    x0 = uniform_delta0(size, generator)
    codes = draw_codes(mp, size, horizon + 1, generator)
    out = induced_lockstep(x0, codes, mp, horizon, max_returns=burn)
    completed = (out["returns"] >= burn).to(torch.float64)
    return torch.stack([out["x"], completed], dim=1)


def burn_in_shift(
    mp: ModelParams, burn: int, M: int, seed: int, horizon: int = 10 ** 4, workers: int = 0
) -> Dict[str, float]:
    """KS distance between the x-marginal after ``burn`` induced steps and the uniform law on
    (1/2, 1], over the samples completing their burn-in before clock ``horizon``."""

    if burn < 1:
        raise ValueError(f"burn must be positive, got {burn}")
    out = run_replicas(
        chunk_kernel(_burn_kernel, mp=mp, burn=burn, horizon=horizon),
        M,
        seed,
        tag=43,
        workers=workers,
        chunk_size=LOCKSTEP_CHUNK,
        desc="burn-in",
    )
    completed = out[:, 1] > 0
    x = out[completed, 0].numpy()
    fraction = float(completed.to(torch.float64).mean())
    if fraction < 1:
        warnings.warn(f"{1 - fraction:.3g} of the burn-in runs did not finish before clock {horizon}")
    ks = float(stats.kstest(x, "uniform", args=(0.5, 0.5)).statistic) if x.size else 1.0
    return {"burn": burn, "ks": ks, "completed": fraction, "samples": int(x.size)}
