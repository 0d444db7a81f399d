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

from irand.experiments.asymptotics import Asymptotics
from irand.experiments.base import BaseExperiment
from irand.experiments.correlation import Correlation
from irand.experiments.density import Density
from irand.experiments.infinite import Infinite
from irand.experiments.limits import Limits
from irand.experiments.tail import ReturnTail

EXPERIMENTS = {
    "asymptotics": Asymptotics,
    "tail": ReturnTail,
    "density": Density,
    "correlation": Correlation,
    "limits": Limits,
    "infinite": Infinite,
}
__all__ = [
    "Asymptotics",
    "BaseExperiment",
    "Correlation",
    "Density",
    "Infinite",
    "Limits",
    "ReturnTail",
]
