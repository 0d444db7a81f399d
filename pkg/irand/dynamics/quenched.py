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
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import torch

from irand.dynamics.driver import (
    ModelParams,
    Symbol,
    SymbolStream,
    SymbolString,
    cylinder_table,
    draw_codes,
)
from irand.dynamics.lsv import (
    deterministic_xseq,
    left_inverse_scalar,
    left_inverse_tensor,
    limit_constant,
    quenched_limit,
)
from irand.utils.metrics import binomial_stderr, mean_stderr
from irand.utils.misc import chunk_kernel, run_replicas

MAX_EXACT_N = 20
Itinerary = Union[SymbolString, SymbolStream]


@lru_cache(maxsize=32)
def cached_xseq(alpha: float, N: int) -> torch.Tensor:
    return deterministic_xseq(alpha, N)


def _prefix(sym: Itinerary, n: int) -> SymbolString:
    if isinstance(sym, SymbolStream):
        return sym.prefix(n)
    if len(sym) < n:
        raise ValueError(f"insufficient symbols: need {n}, have {len(sym)}")
    return sym[:n]


def quenched_chain(sym: Itinerary, n: int, mp: ModelParams) -> List[float]:
    """Backward chain of the quenched orbit.

    Returns:
        List[float]: entry k - 1 holds x_k(phi^(n-k) omega) for k = 1..n, so the last
            entry is x_n(omega).
    """

    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    exps = _prefix(sym, n - 1).exponents(mp)
    chain = [0.5]
    for k in range(n - 2, -1, -1):
        chain.append(left_inverse_scalar(exps[k], chain[-1]))
    return chain


def quenched_xn(sym: Itinerary, n: int, mp: ModelParams) -> float:
    """x_n(omega): 1/2 pulled back along symbols n-2, ..., 0 of the itinerary."""

    return quenched_chain(sym, n, mp)[-1]


def quenched_xprime(sym: Itinerary, n: int, mp: ModelParams) -> float:
    """Right-branch points x'_0 = 1, x'_1 = 3/4 and x'_n = (x_n(phi omega) + 1) / 2."""

    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if n == 0:
        return 1.0
    if n == 1:
        return 0.75
    shifted = sym.shifted(1) if isinstance(sym, SymbolStream) else _prefix(sym, n).shift(1)
    return (quenched_xn(shifted, n, mp) + 1.0) / 2.0


def xn_batch(codes: torch.Tensor, n: int, mp: ModelParams) -> torch.Tensor:
    """x_n for every row of a (M, >= n-1) code matrix."""

    if codes.shape[1] < n - 1:
        raise ValueError(f"insufficient symbols: need {n - 1}, have {codes.shape[1]}")
    x = torch.full((codes.shape[0],), 0.5, dtype=torch.float64)
    for k in range(n - 2, -1, -1):
        x = left_inverse_tensor(mp.exponents(codes[:, k]), x)
    return x


def chain_violations(
    codes: torch.Tensor, n: int, mp: ModelParams, rtol: float = 1e-12
) -> Tuple[torch.Tensor, torch.Tensor]:
    """Counts sandwich violations x_k(alpha) <= x_k(phi^(n-k) omega) <= x_k(beta) along
    the whole backward chain of each row.

    Returns:
        Tuple[torch.Tensor, torch.Tensor]: per-row counts of bound violations (beyond
            ``rtol``) and of mixed itineraries that fail to lie strictly inside.
    """

    lower = cached_xseq(mp.alpha, n)
    upper = cached_xseq(mp.beta, n)
    M = codes.shape[0]
    x = torch.full((M,), 0.5, dtype=torch.float64)
    has_fast = torch.zeros(M, dtype=torch.bool)
    has_slow = torch.zeros(M, dtype=torch.bool)
    violations = torch.zeros(M, dtype=torch.int64)
    strict = torch.zeros(M, dtype=torch.int64)
    for level, k in enumerate(range(n - 2, -1, -1), start=2):
        column = codes[:, k]
        x = left_inverse_tensor(mp.exponents(column), x)
        has_fast |= column == Symbol.FAST
        has_slow |= column == Symbol.SLOW
        lo, hi = lower[level - 1], upper[level - 1]
        violations += ((x < lo * (1 - rtol)) | (x > hi * (1 + rtol))).to(torch.int64)
        mixed = has_fast & has_slow
        strict += (mixed & ((x <= lo) | (x >= hi))).to(torch.int64)
    return violations, strict


def _xn_kernel(size: int, generator: torch.Generator, mp: ModelParams, n: int) -> torch.Tensor:
    codes = draw_codes(mp, size, max(n - 1, 0), generator)
    return xn_batch(codes, n, mp)


def _cn_kernel(
    size: int, generator: torch.Generator, mp: ModelParams, n_values: Sequence[int]
) -> torch.Tensor:
    codes = draw_codes(mp, size, max(n_values) - 1, generator)
    cols = [n ** (1.0 / mp.alpha) * xn_batch(codes, n, mp) for n in n_values]
    return torch.stack(cols, dim=1)


def _sandwich_kernel(size: int, generator: torch.Generator, mp: ModelParams, n: int) -> torch.Tensor:
    codes = draw_codes(mp, size, n - 1, generator)
    return torch.stack(chain_violations(codes, n, mp), dim=1)


def expected_xn_exact(mp: ModelParams, n: int) -> float:
    """E_omega x_n(omega) by summing over all 2^(n-1) relevant cylinders."""

    if not 1 <= n <= MAX_EXACT_N:
        raise ValueError(f"exact expectation limited to 1 <= n <= {MAX_EXACT_N}, got {n}")
    if n == 1:
        return 0.5
    codes, weights = cylinder_table(mp, n - 1)
    return float((weights * xn_batch(codes, n, mp)).sum())


def expected_xn_mc(
    mp: ModelParams, n: int, M: int, seed: int, workers: int = 0
) -> Tuple[float, float]:
    """Monte Carlo mean and standard error of x_n(omega) over ``M`` itineraries."""

    if M < 2:
        raise ValueError(f"need at least 2 replicas, got {M}")
    samples = run_replicas(
        chunk_kernel(_xn_kernel, mp=mp, n=n),
        M,
        seed,
        workers=workers,
        desc=f"E x_{n}",
    )
    stats = mean_stderr(samples)
    return stats["mean"], stats["stderr"]


def sandwich_violations(
    mp: ModelParams, n: int, M: int, seed: int, workers: int = 0
) -> Dict[str, int]:
    """Runs the chain sandwich check on ``M`` itineraries of depth ``n``."""

    counts = run_replicas(
        chunk_kernel(_sandwich_kernel, mp=mp, n=n), M, seed, tag=1, workers=workers, desc="sandwich"
    )
    return {"violations": int(counts[:, 0].sum()), "strict_failures": int(counts[:, 1].sum())}


def an_batch(codes: torch.Tensor, n: int, mp: ModelParams, variant: str = "A") -> torch.Tensor:
    """A_n (``variant="A"``) or A'_n (``variant="Aprime"``) for every row of ``codes``."""

    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if codes.shape[1] < n - 1:
        raise ValueError(f"insufficient symbols: need {n - 1}, have {codes.shape[1]}")
    alpha = mp.alpha
    # column k - 2 holds the exponent of symbol n - k, k = 2..n
    exps = mp.exponents(codes[:, : n - 1].flip(1))
    if variant == "A":
        base_a = 2 * cached_xseq(mp.alpha, n)[1:]
        base_b = 2 * cached_xseq(mp.beta, n)[1:]
        first = (base_a ** (exps - alpha)).mean(dim=1)
        second = (base_b ** (2 * exps - alpha)).mean(dim=1)
        return first - (1 + alpha) / 2 * second
    if variant == "Aprime":
        if mp.p1 <= 0:
            raise ValueError("A'_n needs p1 > 0")
        m = math.isqrt(n)
        base = 2 * (limit_constant(alpha) * mp.p1 ** (-1 / alpha) + 1) / n ** (1 / alpha)
        return (base ** (exps[:, m - 1 :] - alpha)).mean(dim=1)
    raise ValueError(f"unknown variant {variant!r}, expected 'A' or 'Aprime'")


def an_statistic(sym: Itinerary, n: int, mp: ModelParams, variant: str = "A") -> float:
    """A_n(omega) or A'_n(omega) for a single itinerary; both converge to p1."""

    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    codes = _prefix(sym, n - 1).codes[None, :]
    return float(an_batch(codes, n, mp, variant)[0])


def _an_kernel(
    size: int, generator: torch.Generator, mp: ModelParams, n: int, variant: str
) -> torch.Tensor:
    return an_batch(draw_codes(mp, size, n - 1, generator), n, mp, variant)


def an_samples(
    mp: ModelParams, n: int, M: int, seed: int, variant: str = "A", workers: int = 0
) -> torch.Tensor:
    return run_replicas(
        chunk_kernel(_an_kernel, mp=mp, n=n, variant=variant),
        M,
        seed,
        tag=2,
        workers=workers,
        desc=f"{variant}_{n}",
    )


def hoeffding_summands(codes: torch.Tensor, n: int, mp: ModelParams) -> Tuple[torch.Tensor, torch.Tensor]:
    """The ``n`` bounded summands X_k = (2 x_k(alpha))^(alpha(.) - alpha), k = 2..n+1,
    with values in [0, 1], and their exact means p1 + p2 (2 x_k(alpha))^(beta - alpha).
    """

    base = 2 * cached_xseq(mp.alpha, n + 1)[1:]
    exps = mp.exponents(codes[:, :n].flip(1))
    summands = base ** (exps - mp.alpha)
    means = mp.p1 + mp.p2 * base ** (mp.beta - mp.alpha)
    return summands, means


def _hoeffding_kernel(size: int, generator: torch.Generator, mp: ModelParams, n: int) -> torch.Tensor:
    summands, means = hoeffding_summands(draw_codes(mp, size, n, generator), n, mp)
    return summands.mean(dim=1) - means.mean()


@dataclass
class HoeffdingReport:
    n: int
    M: int
    rows: List[Dict[str, float]] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(int(row["violated"]) for row in self.rows)

    @property
    def passed(self) -> bool:
        return self.violations == 0


def hoeffding_check(
    mp: ModelParams,
    n: int,
    t_grid: Optional[Sequence[float]],
    M: int,
    seed: int,
    workers: int = 0,
) -> HoeffdingReport:
    """Empirical deviation frequencies of the bounded-summand average against exp(-2 n t^2).

    Args:
        mp (ModelParams): model parameters.
        n (int): number of summands.
        t_grid (Optional[Sequence[float]]): deviation thresholds; ``None`` uses the single
            Borel-Cantelli threshold t_n = n^(-1/3).
        M (int): replicas.
        seed (int): master seed.
        workers (int, optional): dataloader workers. Defaults to 0.

    Returns:
        HoeffdingReport: one row per threshold.
    """

    if t_grid is None:
        t_grid = [n ** (-1.0 / 3.0)]
    deviations = run_replicas(
        chunk_kernel(_hoeffding_kernel, mp=mp, n=n), M, seed, tag=3, workers=workers, desc="hoeffding"
    ).abs()
    report = HoeffdingReport(n=n, M=M)
    for t in t_grid:
        empirical = float((deviations >= t).to(torch.float64).mean())
        bound = math.exp(-2 * n * t * t)
        stderr = binomial_stderr(bound, M)
        report.rows.append(
            {
                "t": float(t),
                "empirical": empirical,
                "bound": bound,
                "stderr": stderr,
                "violated": empirical > bound + 3 * stderr,
            }
        )
    return report


def borel_cantelli_series(n_max: int) -> List[float]:
    """Partial sums of exp(-2 n t_n^2) with t_n = n^(-1/3); bounded partial sums mean the
    deviations of A_n happen finitely often almost surely."""

    total, sums = 0.0, []
    for n in range(1, n_max + 1):
        total += math.exp(-2 * n ** (1.0 / 3.0))
        sums.append(total)
    return sums


def expectation_upper_bound(mp: ModelParams, n: int, p0: float) -> float:
    """n^(1/alpha) x_[p0 n](alpha) + n^(1/alpha) exp(-2 n (p1 - p0)^2), valid for 0 < p0 < p1."""

    if not 0 < p0 < mp.p1:
        raise ValueError(f"need 0 < p0 < p1, got p0={p0}, p1={mp.p1}")
    m = max(1, math.floor(p0 * n))
    scale = n ** (1.0 / mp.alpha)
    x_m = float(cached_xseq(mp.alpha, m)[-1])
    return scale * (x_m + math.exp(-2 * n * (mp.p1 - p0) ** 2))


@dataclass
class QuenchedReport:
    n_values: List[int]
    cn_samples: torch.Tensor
    limit_value: float

    @property
    def l1_errors(self) -> List[float]:
        return (self.cn_samples - self.limit_value).abs().mean(dim=0).tolist()

    def rows(self) -> List[Dict[str, float]]:
        out = []
        for i, n in enumerate(self.n_values):
            column = self.cn_samples[:, i]
            stats = mean_stderr(column)
            out.append(
                {
                    "n": n,
                    "mean_cn": stats["mean"],
                    "stderr": stats["stderr"],
                    "l1_error": float((column - self.limit_value).abs().mean()),
                    "limit_value": self.limit_value,
                    "median_cn": float(column.median()),
                }
            )
        return out


def quenched_report(
    mp: ModelParams, n_values: Sequence[int], M: int, seed: int, workers: int = 0
) -> QuenchedReport:
    """Samples c_n(omega) = n^(1/alpha) x_n(omega) on a grid of n, sharing omega across n."""

    if M < 2:
        raise ValueError(f"need at least 2 replicas, got {M}")
    n_values = sorted(int(n) for n in n_values)
    samples = run_replicas(
        chunk_kernel(_cn_kernel, mp=mp, n_values=n_values),
        M,
        seed,
        tag=4,
        workers=workers,
        desc="c_n",
    )
    return QuenchedReport(n_values, samples, quenched_limit(mp.alpha, mp.p1))
