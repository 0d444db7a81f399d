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
from enum import IntEnum
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np
import torch

from irand.dynamics.lsv import MapParams, lsv_forward

MAX_CYLINDER_LENGTH = 24
SYMBOL_BLOCK = 1024
CODE_COLUMN_BLOCK = 4096


class Symbol(IntEnum):
    FAST = 0
    SLOW = 1


_LETTERS = {"F": Symbol.FAST, "S": Symbol.SLOW}


@dataclass(frozen=True)
class ModelParams:
    """Random LSV system {T_alpha, T_beta; p1, p2}.

    ``p1`` is the probability of the Fast symbol (exponent ``alpha``); ``p2`` is always
    derived. The endpoints p1 = 0 and p1 = 1 are accepted so that degenerate itineraries
    can be expressed; experiment configs require 0 < p1 < 1.
    """

    alpha: float
    beta: float
    p1: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")
        if not 0 < self.alpha < self.beta:
            raise ValueError(f"need 0 < alpha < beta, got alpha={self.alpha}, beta={self.beta}")
        if not 0 <= self.p1 <= 1:
            raise ValueError(f"p1 must lie in [0, 1], got {self.p1}")

    @property
    def p2(self) -> float:
        return 1.0 - self.p1

    @property
    def fast(self) -> MapParams:
        return MapParams(self.alpha)

    @property
    def slow(self) -> MapParams:
        return MapParams(self.beta)

    def exponent(self, symbol: Symbol) -> float:
        return self.alpha if symbol == Symbol.FAST else self.beta

    def probability(self, symbol: Symbol) -> float:
        return self.p1 if symbol == Symbol.FAST else self.p2

    def exponents(self, codes: torch.Tensor) -> torch.Tensor:
        """Maps a tensor of symbol codes to float64 exponents."""

        return torch.where(
            codes == Symbol.FAST,
            torch.tensor(self.alpha, dtype=torch.float64),
            torch.tensor(self.beta, dtype=torch.float64),
        )


class SymbolString:
    """Finite itinerary over {Fast, Slow}, stored as uint8 codes."""

    def __init__(self, symbols: Union[str, Iterable[int], torch.Tensor] = ()):
        if isinstance(symbols, torch.Tensor):
            codes = symbols.to(torch.uint8).flatten()
        elif isinstance(symbols, str):
            try:
                codes = torch.tensor([_LETTERS[c] for c in symbols.upper()], dtype=torch.uint8)
            except KeyError as e:
                raise ValueError(f"unknown symbol letter {e} in {symbols!r}") from e
        else:
            codes = torch.tensor([int(s) for s in symbols], dtype=torch.uint8)
        if bool((codes > Symbol.SLOW).any()):
            raise ValueError("symbol codes must be 0 (Fast) or 1 (Slow)")
        self.codes = codes

    @classmethod
    def constant(cls, symbol: Symbol, n: int) -> "SymbolString":
        return cls(torch.full((n,), int(symbol), dtype=torch.uint8))

    def __len__(self) -> int:
        return self.codes.numel()

    def __getitem__(self, index):
        if isinstance(index, slice):
            return SymbolString(self.codes[index])
        return Symbol(int(self.codes[index]))

    def __iter__(self):
        return (Symbol(int(c)) for c in self.codes)

    def __eq__(self, other) -> bool:
        return isinstance(other, SymbolString) and torch.equal(self.codes, other.codes)

    def __repr__(self) -> str:
        return "SymbolString('" + "".join("FS"[int(c)] for c in self.codes) + "')"

    def shift(self, k: int = 1) -> "SymbolString":
        """Itinerary of phi^k omega."""

        return self[k:]

    def count(self, symbol: Symbol) -> int:
        return int((self.codes == symbol).sum())

    def log_weight(self, mp: ModelParams) -> float:
        fast, slow = self.count(Symbol.FAST), self.count(Symbol.SLOW)
        total = 0.0
        for count, p in ((fast, mp.p1), (slow, mp.p2)):
            if count:
                total += count * math.log(p) if p > 0 else -math.inf
        return total

    def weight(self, mp: ModelParams) -> float:
        """Cylinder weight p1^#Fast p2^#Slow."""

        return mp.p1 ** self.count(Symbol.FAST) * mp.p2 ** self.count(Symbol.SLOW)

    def exponents(self, mp: ModelParams) -> List[float]:
        return [mp.alpha if c == Symbol.FAST else mp.beta for c in self.codes.tolist()]


class _SeededSource:
    def __init__(self, p1: float, seed: int, replica: int):
        self.p1 = p1
        self._rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(seed, spawn_key=(replica,)))
        )
        self.codes = torch.empty(0, dtype=torch.uint8)

    def ensure(self, n: int):
        while self.codes.numel() < n:
            block = torch.from_numpy((self._rng.random(SYMBOL_BLOCK) >= self.p1).astype(np.uint8))
            self.codes = torch.cat([self.codes, block])


class _FixedSource:
    def __init__(self, sym: SymbolString, fill: Optional[Symbol]):
        self.codes = sym.codes.clone()
        self.fill = fill

    def ensure(self, n: int):
        missing = n - self.codes.numel()
        if missing <= 0:
            return
        if self.fill is None:
            raise ValueError(f"insufficient symbols: need {n}, have {self.codes.numel()}")
        tail = torch.full((max(missing, SYMBOL_BLOCK),), int(self.fill), dtype=torch.uint8)
        self.codes = torch.cat([self.codes, tail])


class SymbolStream:
    """Lazily extended itinerary seen from a shift position.

    Views created by :meth:`shifted` share one growable buffer, so the symbol at an
    absolute index never changes once generated.
    """

    def __init__(self, source, offset: int = 0):
        self._source = source
        self.offset = offset

    @classmethod
    def seeded(cls, p1: float, seed: int, replica: int = 0) -> "SymbolStream":
        return cls(_SeededSource(p1, seed, replica))

    @classmethod
    def from_string(cls, sym: Union[SymbolString, str], fill: Optional[Symbol] = None) -> "SymbolStream":
        if isinstance(sym, str):
            sym = SymbolString(sym)
        return cls(_FixedSource(sym, fill))

    @classmethod
    def constant(cls, symbol: Symbol) -> "SymbolStream":
        return cls.from_string(SymbolString(), fill=symbol)

    def symbol(self, k: int = 0) -> Symbol:
        """Symbol of phi^(offset + k) omega."""

        self._source.ensure(self.offset + k + 1)
        return Symbol(int(self._source.codes[self.offset + k]))

    def prefix(self, n: int) -> SymbolString:
        """The next ``n`` symbols starting at the current offset."""

        self._source.ensure(self.offset + n)
        return SymbolString(self._source.codes[self.offset : self.offset + n])

    def shifted(self, k: int = 1) -> "SymbolStream":
        return SymbolStream(self._source, self.offset + k)

    def shift(self, k: int = 1):
        self.offset += k


@dataclass
class SkewState:
    x: float
    stream: SymbolStream
    logweight: float = 0.0
    steps: int = 0


def draw_symbols(mp: ModelParams, n: int, seed: int) -> SymbolString:
    """Draws ``n`` i.i.d. Bernoulli(p1) symbols, identical for identical (mp, n, seed)."""

    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return SymbolStream.seeded(mp.p1, seed).prefix(n)


def skew_step(s: SkewState, mp: ModelParams) -> SkewState:
    """One step of S(x, omega) = (T_alpha(omega) x, phi omega)."""

    symbol = s.stream.symbol(0)
    p = mp.probability(symbol)
    return SkewState(
        x=lsv_forward(mp.exponent(symbol), s.x),
        stream=s.stream.shifted(1),
        logweight=s.logweight + (math.log(p) if p > 0 else -math.inf),
        steps=s.steps + 1,
    )


def cylinder_table(mp: ModelParams, n: int) -> Tuple[torch.Tensor, torch.Tensor]:
    """All 2^n itineraries of length ``n`` as a code matrix plus their weights.

    Rows are ordered lexicographically with Fast before Slow and the first symbol most
    significant, i.e. FF, FS, SF, SS for n = 2.
    """

    if n > MAX_CYLINDER_LENGTH:
        raise ValueError(f"cylinder enumeration limited to n <= {MAX_CYLINDER_LENGTH}, got {n}")
    index = torch.arange(2 ** n, dtype=torch.int64)
    shifts = torch.arange(n - 1, -1, -1, dtype=torch.int64)
    codes = ((index[:, None] >> shifts[None, :]) & 1).to(torch.uint8)
    slow = codes.sum(dim=1, dtype=torch.float64)
    p1 = torch.tensor(mp.p1, dtype=torch.float64)
    p2 = torch.tensor(mp.p2, dtype=torch.float64)
    weights = p1 ** (n - slow) * p2 ** slow
    return codes, weights


def cylinder_enumerate(mp: ModelParams, n: int) -> List[Tuple[SymbolString, float]]:
    """Lists every length-``n`` cylinder with its Bernoulli weight."""

    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    codes, weights = cylinder_table(mp, n)
    return [(SymbolString(row), float(w)) for row, w in zip(codes, weights)]


def draw_codes(mp: ModelParams, replicas: int, n: int, generator: torch.Generator) -> torch.Tensor:
    """Batch of i.i.d. symbol codes of shape (replicas, n) from a chunk generator."""

    codes = torch.empty(replicas, n, dtype=torch.uint8)
    for start in range(0, n, CODE_COLUMN_BLOCK):
        stop = min(n, start + CODE_COLUMN_BLOCK)
        u = torch.rand(replicas, stop - start, generator=generator, dtype=torch.float64)
        codes[:, start:stop] = (u >= mp.p1).to(torch.uint8)
    return codes
