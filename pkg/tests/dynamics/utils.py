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

from functools import lru_cache

import torch
from irand.dynamics.driver import ModelParams
from irand.dynamics.observables import Affine, Observable, Tent
from irand.dynamics.ulam import annealed_density

DEFAULT_PARAMS = ModelParams(alpha=0.5, beta=0.75, p1=0.5)
SMALL_CELLS = 2 ** 10


@lru_cache(maxsize=4)
def small_density(mp: ModelParams = DEFAULT_PARAMS, cells: int = SMALL_CELLS):
    return annealed_density(mp, cells)[0]


def constant_observable(value: float = 1.0) -> Observable:
    return Observable(Affine(Tent(0.5), 0.0, value), name=f"const({value})")


def seeded_generator(seed: int = 0) -> torch.Generator:
    generator = torch.Generator()
    generator.manual_seed(seed)
    return generator
