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

import cmath
import math

import numpy as np
import pytest
import torch
from irand.dynamics.correlation import corr_constants
from irand.dynamics.driver import ModelParams
from irand.dynamics.limits import (
    LimitCase,
    LimitKind,
    birkhoff_paths,
    birkhoff_samples,
    empirical_cf,
    ks_against,
    run_limit_case,
    select_case,
    stable_cf,
    tail_slope,
    validate_case,
)
from irand.dynamics.observables import bump_observable, unit_c_observable
from irand.dynamics.ulam import annealed_density
from scipy import special, stats

from tests.dynamics.utils import DEFAULT_PARAMS, constant_observable, seeded_generator, small_density


def test_select_case():
    assert select_case(0.4, 1.0).kind == LimitKind.CLT
    assert select_case(0.75, 0.0, gamma=1.0, beta=0.9).kind == LimitKind.CLT_CENTERED
    assert select_case(0.5, 1.0, A=2.0).kind == LimitKind.HALF
    assert select_case(0.6, -1.0, A=1.0).kind == LimitKind.STABLE

    # the centered case needs gamma above (beta / alpha)(alpha - 1/2) = 0.3 here
    with pytest.raises(ValueError):
        select_case(0.75, 0.0, gamma=0.25, beta=0.9)
    assert select_case(0.75, 0.0, gamma=0.31, beta=0.9).kind == LimitKind.CLT_CENTERED
    with pytest.raises(ValueError):
        select_case(0.75, 0.0)
    with pytest.raises(ValueError):
        select_case(0.6, 1.0)
    for alpha in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            select_case(alpha, 1.0, A=1.0)


def test_limit_case():
    assert LimitCase(LimitKind.CLT, 0.4).normalizer(100) == 10.0
    half = LimitCase(LimitKind.HALF, 0.5, c=2.0, A=3.0)
    assert math.isclose(half.normalizer(100), math.sqrt(4 * 3 * 100 * math.log(100)))
    assert math.isclose(LimitCase(LimitKind.STABLE, 0.75, 1.0, 1.0).normalizer(16), 8.0)
    assert [LimitCase(kind, 0.5).target for kind in LimitKind] == ["normal_fitted", "normal_fitted", "normal", "stable"]
    assert LimitKind.HALF.value == "LogNormal_halfcase"


def test_stable_cf():
    assert stable_cf(0.0, 0.75, 1.0, 1.0) == 1.0
    value = stable_cf(1.0, 0.75, 1.0, 1.0)
    assert abs(value - complex(-0.12199, 0.04823)) < 1e-3

    t = np.linspace(-3, 3, 13)
    cf = stable_cf(t, 0.75, 2.0, 0.5)
    scale = 0.5 * 2.0 ** (4 / 3) * special.gamma(-1 / 3) * math.cos(2 * math.pi / 3)
    assert np.allclose(np.abs(cf), np.exp(-scale * np.abs(t) ** (4 / 3)))
    assert np.allclose(cf[::-1], np.conj(cf))

    for args in ((0.5, 1.0, 1.0), (0.75, 0.0, 1.0), (0.75, 1.0, 0.0)):
        with pytest.raises(ValueError):
            stable_cf(1.0, *args)


def test_stable_cf_closed_form():
    # alpha = 2/3: Gamma(-1/2) cos(3 pi / 4) = sqrt(2 pi) and tan(3 pi / 4) = -1
    for t, c, A in ((1.0, 1.0, 1.0), (0.5, 2.0, 0.3), (-2.0, 1.0, 0.3), (1.5, -0.5, 2.0)):
        s = math.sqrt(2 * math.pi) * A * abs(c) ** 1.5 * abs(t) ** 1.5
        expected = cmath.exp(-s * (1 + 1j * math.copysign(1.0, c * t)))
        assert cmath.isclose(stable_cf(t, 2 / 3, c, A), expected, rel_tol=1e-9)

    # positive c skews the limit to the right: the cf lies below the real axis for t > 0
    assert stable_cf(1.0, 2 / 3, 1.0, 0.3).imag < 0
    assert cmath.isclose(stable_cf(1.0, 2 / 3, -1.0, 0.3), stable_cf(1.0, 2 / 3, 1.0, 0.3).conjugate())


def test_stable_cf_matches_scipy_samples(monkeypatch):
    monkeypatch.setattr(stats.levy_stable, "parameterization", "S1")
    alpha, c, A = 2 / 3, 1.0, 0.3
    sigma = (math.sqrt(2 * math.pi) * A) ** alpha
    samples = stats.levy_stable.rvs(1 / alpha, 1.0, scale=sigma, size=20000, random_state=np.random.default_rng(7))

    t = np.array([0.5, 1.0, 2.0])
    empirical = np.exp(1j * np.outer(t, samples)).mean(axis=1)
    assert np.max(np.abs(empirical - stable_cf(t, alpha, c, A))) < 0.03


def test_empirical_cf():
    cf = empirical_cf(torch.zeros(10, dtype=torch.float64), [0.0, 1.0, 2.0])
    assert np.allclose(cf, 1.0)

    samples = torch.randn(20000, generator=seeded_generator(1), dtype=torch.float64)
    t = [0.5, 1.0, 2.0]
    assert np.abs(empirical_cf(samples, t) - np.exp(-np.square(t) / 2)).max() < 4 / math.sqrt(20000)

    with pytest.raises(ValueError):
        empirical_cf(torch.zeros(0), t)


def test_ks_against():
    samples = torch.randn(4000, generator=seeded_generator(2), dtype=torch.float64)
    assert ks_against(samples, "normal") < 1.95 / math.sqrt(4000)
    assert ks_against(3 * samples + 1, "normal_fitted") < 1.95 / math.sqrt(4000)
    assert ks_against(3 * samples + 1, "normal") > 0.2

    uniform = torch.rand(4000, generator=seeded_generator(2), dtype=torch.float64)
    assert ks_against(uniform, lambda x: np.clip(x, 0.0, 1.0)) < 1.95 / math.sqrt(4000)

    with pytest.warns(UserWarning):
        assert ks_against(torch.ones(100, dtype=torch.float64), "normal_fitted") == 1.0


def test_tail_slope():
    u = torch.rand(100_000, generator=seeded_generator(3), dtype=torch.float64)
    pareto = u ** (-1 / 1.5)
    assert abs(tail_slope(pareto) + 1.5) < 0.1

    with pytest.raises(ValueError):
        tail_slope(pareto, z_lo=5.0, z_hi=2.0)


def test_birkhoff_paths():
    d = small_density()
    paths = birkhoff_paths(constant_observable(2.0), DEFAULT_PARAMS, d, [3, 1], 50, seed=4)
    assert paths.shape == (50, 2)
    assert torch.allclose(paths[:, 0], torch.full((50,), 2.0, dtype=torch.float64))
    assert torch.allclose(paths[:, 1], torch.full((50,), 6.0, dtype=torch.float64))

    samples = birkhoff_samples(bump_observable(), DEFAULT_PARAMS, d, 16, 100, seed=4)
    assert samples.shape == (100,)
    assert bool((samples >= 0).all()) and bool((samples <= 16).all())

    with pytest.raises(ValueError):
        birkhoff_paths(constant_observable(), DEFAULT_PARAMS, d, [0, 2], 10, seed=4)


def test_validate_case():
    mp = ModelParams(0.4, 0.8, 0.5)
    f = bump_observable()
    assert math.isnan(validate_case(mp, f, select_case(0.4, 0.0)))
    with pytest.raises(ValueError):
        validate_case(DEFAULT_PARAMS, f, select_case(0.4, 0.0))

    stable = ModelParams(0.75, 0.9, 0.5)
    d, _ = annealed_density(stable, 1024)
    unit = unit_c_observable(d, stable)
    with pytest.raises(ValueError):
        validate_case(stable, unit, LimitCase(LimitKind.CLT_CENTERED, 0.75))
    with pytest.raises(ValueError):
        validate_case(stable, unit, LimitCase(LimitKind.STABLE, 0.75, c=2.0, A=1.0))


def test_run_limit_case_clt():
    mp = ModelParams(0.4, 0.8, 0.5)
    d, _ = annealed_density(mp, 1024)
    f = bump_observable()
    tolerances = {"ks": 0.1, "flatness": 0.5}
    verdict = run_limit_case(mp, f, select_case(0.4, 0.0), d, 200, 2000, seed=5, tolerances=tolerances)
    assert verdict.kind == LimitKind.CLT and verdict.M == 2000
    assert set(verdict.metrics) == {"mean", "ks", "sigma", "variance_ratio"}
    assert verdict.thresholds == {"ks": 0.1, "flatness": 0.5}
    assert verdict.passed
    assert verdict.normalized.shape == (2000,)
    assert verdict.as_dict()["case"] == "CLT"

    with pytest.raises(ValueError):
        run_limit_case(mp, f, select_case(0.4, 0.0), d, 3, 10, seed=5)


def test_run_limit_case_heavy():
    d = small_density()
    unit = unit_c_observable(d, DEFAULT_PARAMS)
    A, _ = corr_constants(DEFAULT_PARAMS, d)
    case = select_case(0.5, unit.c_value(DEFAULT_PARAMS), A=A)
    verdict = run_limit_case(DEFAULT_PARAMS, unit, case, d, 64, 400, seed=6)
    assert verdict.kind == LimitKind.HALF
    assert set(verdict.checks) == {"ks", "beats_sqrt_n"}
    assert set(verdict.metrics) == {"mean", "ks", "ks_sqrt_n"}

    stable = ModelParams(0.75, 0.9, 0.5)
    d, _ = annealed_density(stable, 1024)
    unit = unit_c_observable(d, stable)
    A, _ = corr_constants(stable, d)
    case = select_case(0.75, unit.c_value(stable), A=A)
    verdict = run_limit_case(stable, unit, case, d, 64, 400, seed=7)
    assert verdict.kind == LimitKind.STABLE
    assert set(verdict.checks) == {"cf", "tail_slope"}
    assert verdict.metrics["tail_target"] == -1 / 0.75
    assert verdict.thresholds == {"cf": 0.05, "tail_slope": 0.15}
