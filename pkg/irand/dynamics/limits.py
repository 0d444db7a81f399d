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
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np
import torch
from scipy import special, stats

from irand.dynamics.driver import ModelParams, draw_codes
from irand.dynamics.lsv import forward_tensor
from irand.dynamics.observables import Observable, holder_constant, is_zero_c
from irand.dynamics.ulam import DensityEstimate, sample_density
from irand.utils.misc import chunk_kernel, loglog_slope, run_replicas

NEAR_ZERO_SIGMA = 1e-8

DEFAULT_TOLERANCES = {
    "ks": 0.02,
    "ks_half": 0.05,
    "flatness": 0.10,
    "cf": 0.05,
    "tail_slope": 0.15,
}


class LimitKind(str, Enum):
    CLT = "CLT"
    CLT_CENTERED = "CLT_centered"
    HALF = "LogNormal_halfcase"
    STABLE = "Stable"


@dataclass(frozen=True)
class LimitCase:
    """One of the four distributional regimes of the Birkhoff sums S_n f, with its
    normalizing sequence B_n and target law."""

    kind: LimitKind
    alpha: float
    c: float = 0.0
    A: Optional[float] = None

    def normalizer(self, n: int) -> float:
        if self.kind in (LimitKind.CLT, LimitKind.CLT_CENTERED):
            return math.sqrt(n)
        if self.kind == LimitKind.HALF:
            return math.sqrt(self.c ** 2 * self.A * n * math.log(n))
        return n ** self.alpha

    @property
    def target(self) -> str:
        if self.kind in (LimitKind.CLT, LimitKind.CLT_CENTERED):
            return "normal_fitted"
        if self.kind == LimitKind.HALF:
            return "normal"
        return "stable"


def select_case(
    alpha: float,
    c: float,
    gamma: Optional[float] = None,
    beta: Optional[float] = None,
    A: Optional[float] = None,
) -> LimitCase:
    """Picks the limit regime from (alpha, c).

    alpha < 1/2 gives the CLT; alpha in [1/2, 1) with c = 0 gives the centered CLT, which
    also needs the Hoelder exponent gamma > (beta / alpha)(alpha - 1/2); alpha = 1/2 with
    c != 0 gives the sqrt(c^2 A n ln n) normalization; alpha in (1/2, 1) with c != 0 gives
    the stable law of index 1/alpha.
    """

    if not 0 < alpha < 1:
        raise ValueError(f"limit laws need 0 < alpha < 1, got {alpha}")
    if alpha < 0.5:
        return LimitCase(LimitKind.CLT, alpha, c, A)
    if is_zero_c(c):
        if gamma is None or beta is None:
            raise ValueError("the centered case needs the Hoelder exponent gamma and beta")
        threshold = beta / alpha * (alpha - 0.5)
        if gamma <= threshold:
            raise ValueError(f"the centered case needs gamma > {threshold:.6g}, got gamma={gamma}")
        return LimitCase(LimitKind.CLT_CENTERED, alpha, 0.0, A)
    if A is None or A <= 0:
        raise ValueError("cases with c != 0 need the tail constant A > 0")
    if alpha == 0.5:
        return LimitCase(LimitKind.HALF, alpha, c, A)
    return LimitCase(LimitKind.STABLE, alpha, c, A)


def stable_cf(t: Union[float, np.ndarray], alpha: float, c: float, A: float) -> Union[complex, np.ndarray]:
    """exp{-A |c|^(1/alpha) Gamma(1 - 1/alpha) cos(pi / 2alpha) |t|^(1/alpha)
    (1 - i sgn(ct) tan(pi / 2alpha))}, the characteristic function of the stable limit.
    """

    if not 0.5 < alpha < 1:
        raise ValueError(f"the stable law needs 1/2 < alpha < 1, got {alpha}")
    if c == 0 or not math.isfinite(c):
        raise ValueError(f"c must be a nonzero finite real, got {c}")
    if not A > 0:
        raise ValueError(f"A must be positive, got {A}")
    scalar = np.isscalar(t)
    t = np.asarray(t, dtype=np.float64)
    index = 1.0 / alpha
    angle = math.pi / (2.0 * alpha)
    scale = A * abs(c) ** index * special.gamma(1.0 - index) * math.cos(angle)
    exponent = -scale * np.abs(t) ** index * (1.0 - 1j * np.sign(c * t) * math.tan(angle))
    out = np.exp(exponent)
    return complex(out) if scalar else out


def empirical_cf(samples: torch.Tensor, t_grid: Sequence[float]) -> np.ndarray:
    """(1/M) sum_j exp(i t s_j) for every t."""

    s = samples.to(torch.float64).flatten()
    if s.numel() == 0:
        raise ValueError("empirical characteristic function of an empty batch")
    t = torch.as_tensor(np.asarray(t_grid, dtype=np.float64))
    phase = t[:, None] * s[None, :]
    return torch.complex(torch.cos(phase).mean(dim=1), torch.sin(phase).mean(dim=1)).numpy()


def ks_against(samples: torch.Tensor, target: Union[str, Callable]) -> float:
    """Kolmogorov-Smirnov distance to ``target``.

    ``"normal_fitted"`` fits location and scale to the batch first, ``"normal"`` is the
    standard normal, anything else is passed to :func:`scipy.stats.kstest` as a cdf.
    """

    x = samples.to(torch.float64).flatten().numpy()
    if target == "normal_fitted":
        loc, scale = stats.norm.fit(x)
        if scale <= 0:
            warnings.warn("degenerate batch: fitted normal has zero scale")
            return 1.0
        return float(stats.kstest(x, "norm", args=(loc, scale)).statistic)
    if target == "normal":
        return float(stats.kstest(x, "norm").statistic)
    cdf = getattr(target, "cdf", target)
    return float(stats.kstest(x, cdf).statistic)


def tail_slope(
    samples: torch.Tensor, z_lo: Optional[float] = None, z_hi: Optional[float] = None, points: int = 12
) -> float:
    """Log-log slope of the survival function P(|s| > z) over [z_lo, z_hi].

    Defaults span the 90% quantile of |s| to ten times that, capped at the 99.8% quantile.
    """

    s = samples.to(torch.float64).abs().flatten()
    if z_lo is None:
        z_lo = float(torch.quantile(s, 0.9))
    if z_hi is None:
        z_hi = min(10 * z_lo, float(torch.quantile(s, 0.998)))
    if not 0 < z_lo < z_hi:
        raise ValueError(f"need 0 < z_lo < z_hi, got {z_lo}, {z_hi}")
    z = np.geomspace(z_lo, z_hi, points)
    survival = [float((s > v).to(torch.float64).mean()) for v in z]
    return loglog_slope(z, survival)[0]


def _birkhoff_kernel(
    size: int,
    generator: torch.Generator,
    mp: ModelParams,
    d: DensityEstimate,
    f: Observable,
    times: Sequence[int],
) -> torch.Tensor:
    x = sample_density(d, size, generator)
    horizon = max(times)
    codes = draw_codes(mp, size, horizon + f.symbol_horizon, generator)
    total = torch.zeros_like(x)
    wanted = set(times)
    columns = {}
    for k in range(horizon):
        total += f(x, codes[:, k:])
        x = forward_tensor(mp.exponents(codes[:, k]), x)
        if k + 1 in wanted:
            columns[k + 1] = total.clone()
    return torch.stack([columns[t] for t in times], dim=1)


def birkhoff_paths(
    f: Observable,
    mp: ModelParams,
    d: DensityEstimate,
    times: Sequence[int],
    M: int,
    seed: int,
    workers: int = 0,
) -> torch.Tensor:
    """Samples S_k f(x, omega) = sum_(j < k) f(S^j(x, omega)) at several k from stationary
    starts; one row per replica, one column per time."""

    times = sorted(int(t) for t in times)
    if times[0] < 1:
        raise ValueError("Birkhoff sums need n >= 1")
    return run_replicas(
        chunk_kernel(_birkhoff_kernel, mp=mp, d=d, f=f, times=times),
        M,
        seed,
        tag=30,
        workers=workers,
        desc="birkhoff sums",
    )


def birkhoff_samples(
    f: Observable, mp: ModelParams, d: DensityEstimate, n: int, M: int, seed: int, workers: int = 0
) -> torch.Tensor:
    """M independent samples of S_n f."""

    return birkhoff_paths(f, mp, d, [n], M, seed, workers)[:, 0]


@dataclass
class LimitVerdict:
    kind: LimitKind
    n: int
    M: int
    metrics: Dict[str, float] = field(default_factory=dict)
    thresholds: Dict[str, float] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)
    normalized: Optional[torch.Tensor] = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_dict(self) -> Dict:
        return {
            "case": self.kind.value,
            "n": self.n,
            "M": self.M,
            "metrics": self.metrics,
            "thresholds": self.thresholds,
            "checks": self.checks,
            "passed": self.passed,
        }


def validate_case(mp: ModelParams, f: Observable, case: LimitCase) -> float:
    """Rejects a case whose hypotheses the observable does not meet.

    Returns:
        float: the Hoelder envelope constant C_f for the centered case, otherwise nan.
    """

    if case.alpha != mp.alpha:
        raise ValueError(f"case built for alpha={case.alpha}, model has alpha={mp.alpha}")
    c = f.c_value(mp)
    expected = select_case(mp.alpha, c, f.holder_exponent, mp.beta, case.A).kind
    if expected != case.kind:
        raise ValueError(
            f"observable with c={c:.6g} at alpha={mp.alpha} belongs to {expected.value}, not {case.kind.value}"
        )
    if case.kind != LimitKind.CLT and not is_zero_c(c) and not math.isclose(c, case.c, rel_tol=1e-9):
        raise ValueError(f"case built for c={case.c}, observable has c={c}")
    if case.kind == LimitKind.CLT_CENTERED:
        envelope = holder_constant(f, f.holder_exponent, mp)
        if not math.isfinite(envelope):
            raise ValueError("observable has no finite Hoelder envelope at 0")
        return envelope
    return float("nan")


def run_limit_case(
    mp: ModelParams,
    f: Observable,
    case: LimitCase,
    d: DensityEstimate,
    n: int,
    M: int,
    seed: int,
    workers: int = 0,
    t_grid: Optional[Sequence[float]] = None,
    tolerances: Optional[Dict[str, float]] = None,
) -> LimitVerdict:
    """Samples S_n f / B_n and compares it with the case's limit law.

    CLT cases report the KS distance to a fitted normal, the fitted sigma and the flatness
    of Var(S_n f) / n between n/2 and n. The alpha = 1/2 case compares KS distances under
    the logarithmic and the plain sqrt(n) normalizations. The stable case reports the sup
    distance to :func:`stable_cf` on ``t_grid`` (41 points on [-5, 5] by default) and the
    tail slope of the normalized sums against -1/alpha.
    """

    if n < 4:
        raise ValueError(f"n must be at least 4, got {n}")
    envelope = validate_case(mp, f, case)
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    paths = birkhoff_paths(f, mp, d, [n // 2, n], M, seed, workers)
    half, sums = paths[:, 0], paths[:, 1]
    normalized = sums / case.normalizer(n)
    verdict = LimitVerdict(kind=case.kind, n=n, M=M, normalized=normalized)
    verdict.metrics["mean"] = float(normalized.mean())
    if case.kind in (LimitKind.CLT, LimitKind.CLT_CENTERED):
        sigma = float(normalized.std())
        if sigma < NEAR_ZERO_SIGMA:
            warnings.warn(f"fitted sigma {sigma:.3e} is close to zero; the limit may be degenerate")
        ratio = float(sums.var() / n) / float(half.var() / (n // 2)) if float(half.var()) > 0 else float("nan")
        verdict.metrics.update(
            {"ks": ks_against(normalized, "normal_fitted"), "sigma": sigma, "variance_ratio": ratio}
        )
        if case.kind == LimitKind.CLT_CENTERED:
            verdict.metrics["holder_envelope"] = envelope
        verdict.thresholds.update({"ks": tol["ks"], "flatness": tol["flatness"]})
        verdict.checks["ks"] = verdict.metrics["ks"] < tol["ks"]
        verdict.checks["variance_flat"] = abs(ratio - 1.0) <= tol["flatness"]
    elif case.kind == LimitKind.HALF:
        ks = ks_against(normalized, "normal")
        ks_sqrt = ks_against(sums / math.sqrt(n), "normal")
        verdict.metrics.update({"ks": ks, "ks_sqrt_n": ks_sqrt})
        verdict.thresholds["ks"] = tol["ks_half"]
        verdict.checks["ks"] = ks < tol["ks_half"]
        verdict.checks["beats_sqrt_n"] = ks < ks_sqrt
    else:
        if t_grid is None:
            t_grid = np.linspace(-5.0, 5.0, 41)
        target = stable_cf(np.asarray(t_grid), case.alpha, case.c, case.A)
        distance = float(np.abs(empirical_cf(normalized, t_grid) - target).max())
        coherence = float(
            np.abs(empirical_cf(normalized, t_grid) - empirical_cf(half / case.normalizer(n // 2), t_grid)).max()
        )
        slope = tail_slope(normalized)
        verdict.metrics.update(
            {
                "cf_distance": distance,
                "cf_scaling_gap": coherence,
                "tail_slope": slope,
                "tail_target": -1.0 / case.alpha,
            }
        )
        verdict.thresholds.update({"cf": tol["cf"], "tail_slope": tol["tail_slope"]})
        verdict.checks["cf"] = distance < tol["cf"]
        verdict.checks["tail_slope"] = abs(slope + 1.0 / case.alpha) <= tol["tail_slope"]
    return verdict
