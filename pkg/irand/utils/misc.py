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
from functools import partial
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
import torch
from scipy import stats
from torch.utils.data import DataLoader, Dataset
from tqdm import tqdm

REPLICAS_PER_CHUNK = 1024
_runner = {"progress": True, "chunk_size": REPLICAS_PER_CHUNK}


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


def configure_runner(progress: bool = True, chunk_size: int = REPLICAS_PER_CHUNK):
    """Process-wide defaults of :func:`run_replicas`: progress bars and replicas per chunk.

    The chunk size is part of the seeding scheme, so it is recorded in every manifest.
    """

    if chunk_size < 1:
        raise ValueError(f"chunk_size must be positive, got {chunk_size}")
    _runner["progress"] = progress
    _runner["chunk_size"] = chunk_size


def derive_seed(seed: int, *key: int) -> int:
    """Derives a 63-bit seed from a master seed and an integer key path.

    Args:
        seed (int): master seed (nonnegative).
        key (int): spawn key, e.g. (stream tag, chunk index).

    Returns:
        int: seed usable by ``torch.Generator.manual_seed``.
    """

    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    words = np.random.SeedSequence(seed, spawn_key=tuple(key)).generate_state(2, dtype=np.uint32)
    return int(words[0]) | (int(words[1]) & 0x7FFFFFFF) << 32


def make_generator(seed: int, *key: int) -> torch.Generator:
    generator = torch.Generator()
    generator.manual_seed(derive_seed(seed, *key))
    return generator


class ReplicaChunks(Dataset):
    def __init__(
        self,
        kernel: Callable[[int, torch.Generator], Any],
        replicas: int,
        seed: int,
        tag: int = 0,
        chunk_size: int = REPLICAS_PER_CHUNK,
    ):
        """Splits ``replicas`` independent runs into fixed-size chunks. Chunk ``i`` is
        simulated by ``kernel(size, generator)`` with a generator derived from
        (seed, tag, i), so results do not depend on how chunks are scheduled.

        Args:
            kernel (Callable): picklable function of (chunk size, torch generator).
            replicas (int): total number of replicas.
            seed (int): master seed.
            tag (int, optional): stream tag separating kernels of one experiment.
                Defaults to 0.
            chunk_size (int, optional): replicas per chunk. Defaults to 1024.
        """

        if replicas < 1:
            raise ValueError(f"replicas must be positive, got {replicas}")
        self.kernel = kernel
        self.replicas = replicas
        self.seed = seed
        self.tag = tag
        self.chunk_size = chunk_size

    def __len__(self) -> int:
        return math.ceil(self.replicas / self.chunk_size)

    def __getitem__(self, index: int):
        size = min(self.chunk_size, self.replicas - index * self.chunk_size)
        return self.kernel(size, make_generator(self.seed, self.tag, index))


def _concat(outputs: List[Any]) -> Any:
    first = outputs[0]
    if isinstance(first, torch.Tensor):
        return torch.cat(outputs)
    if isinstance(first, (tuple, list)):
        return tuple(_concat([out[i] for out in outputs]) for i in range(len(first)))
    if isinstance(first, dict):
        return {k: _concat([out[k] for out in outputs]) for k in first}
    raise TypeError(f"cannot concatenate chunk outputs of type {type(first)}")


def run_replicas(
    kernel: Callable[[int, torch.Generator], Any],
    replicas: int,
    seed: int,
    tag: int = 0,
    workers: int = 0,
    chunk_size: Optional[int] = None,
    desc: Optional[str] = None,
) -> Any:
    """Runs a chunked replica kernel and concatenates chunk outputs in index order.

    Args:
        kernel (Callable): picklable function of (chunk size, torch generator) returning a
            tensor, or a tuple/dict of tensors, with the replica axis first.
        replicas (int): total number of replicas.
        seed (int): master seed.
        tag (int, optional): stream tag. Defaults to 0.
        workers (int, optional): dataloader workers, 0 runs in-process. Defaults to 0.
        chunk_size (Optional[int], optional): replicas per chunk. Defaults to the value
            set by :func:`configure_runner` (1024).
        desc (str, optional): progress bar description. Defaults to None.

    Returns:
        Any: concatenated outputs.
    """

    loader = DataLoader(
        ReplicaChunks(kernel, replicas, seed, tag, chunk_size or _runner["chunk_size"]),
        batch_size=None,
        shuffle=False,
        num_workers=workers,
    )
    outputs = list(tqdm(loader, desc=desc, leave=False, disable=None if _runner["progress"] else True))
    return _concat(outputs)


def chunk_kernel(func: Callable, **kwargs) -> Callable[[int, torch.Generator], Any]:
    """Binds keyword arguments of a module-level kernel so it stays picklable."""

    return partial(func, **kwargs)


def log_grid(lo: float, hi: float, per_decade: int = 16) -> List[int]:
    """Distinct integers spaced evenly in log scale between ``lo`` and ``hi``."""

    count = max(2, int(round(per_decade * math.log10(hi / lo))) + 1)
    values = np.unique(np.round(np.geomspace(lo, hi, count)).astype(np.int64))
    return [int(v) for v in values]


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float, float]:
    """Least-squares slope of log|y| against log x.

    Returns:
        Tuple[float, float, float]: slope, intercept and r^2.
    """

    x = np.asarray(x, dtype=np.float64)
    y = np.abs(np.asarray(y, dtype=np.float64))
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        raise ValueError("need at least two positive points for a log-log fit")
    fit = stats.linregress(np.log(x[keep]), np.log(y[keep]))
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)


def linear_fit(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float, float]:
    """Ordinary least squares y = slope x + intercept, with r^2."""

    fit = stats.linregress(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)


def uniform_delta0(size: int, generator: torch.Generator) -> torch.Tensor:
    """Uniform samples on (1/2, 1]."""

    return 1.0 - 0.5 * torch.rand(size, generator=generator, dtype=torch.float64)
