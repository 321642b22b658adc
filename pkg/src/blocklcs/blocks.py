"""Random binary strings built from i.i.d. blocks of three lengths.

The model has two integer parameters, a block scale ``l >= 2`` and a
string length ``n``.  An infinite binary sequence is built from runs
("blocks") of alternating symbols whose lengths are drawn i.i.d. and
uniformly from ``{l-1, l, l+1}``; the first symbol is a fair coin.  The
model string is the first ``n`` symbols of that sequence.

Cutting at ``n`` generally splits a block.  A string therefore carries
provenance: the ordered lengths of its complete blocks, plus a trailing
*rest* segment of length ``r`` belonging to the block that was cut
(``r = 0`` when the cut lands exactly on a block boundary).  Because a
cut block has full length at least ``r + 1`` and at most ``l + 1``, the
rest satisfies ``0 <= r <= l``.

Three summary statistics of the complete blocks drive everything else:

    t  =  total number of complete blocks
    z  =  (# blocks of length l) - (# of length l-1) - (# of length l+1)
    r  =  rest length

``(t, z, r)`` determines the individual counts ``(n1, n2, n3)`` of
blocks of length ``l-1``, ``l``, ``l+1`` through an affine map:

    n2 = (t + z) / 2
    n3 - n1 = (n - r) - l*t
    n1 + n3 = (t - z) / 2

and the probability of observing a given triple is

    P(t, z, r) = multinomial(t; n1, n2, n3) * (1/3)^t * surv(r)

where ``surv(r)`` is the probability that a fresh block is longer than
``r`` (the cut block must extend past position ``n``): 1 for ``r = 0``,
``|{b in {l-1, l, l+1} : b > r}| / 3`` otherwise.

Conditioned on ``(t, z, r)``, the string is uniform over all orderings
of its block multiset times the two choices of initial symbol; that set
is enumerated by :func:`enumerate_xi` and sampled by
:func:`sample_conditional`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidTzr, TooLarge
from .seeding import as_generator

__all__ = [
    "ModelParams",
    "BlockString",
    "TzrStats",
    "BlockCounts",
    "sample_block_lengths",
    "build_string",
    "compute_tzr",
    "counts_from_tzr",
    "try_counts",
    "survival_factor",
    "joint_prob_tzr",
    "joint_prob_tzr_exact",
    "rest_length_pmf",
    "sample_conditional",
    "enumerate_xi",
    "xi_support_size",
]

DEFAULT_ENUM_CAP = 10**6


@dataclass(frozen=True)
class ModelParams:
    """Block scale l and string length n."""

    l: int
    n: int

    def __post_init__(self) -> None:
        if self.l < 2:
            raise ValueError(f"l must be >= 2, got {self.l}")
        if self.n < self.l + 1:
            raise ValueError(f"n must be >= l+1 = {self.l + 1}, got {self.n}")

    @property
    def block_support(self) -> tuple[int, int, int]:
        return (self.l - 1, self.l, self.l + 1)


@dataclass(frozen=True)
class BlockString:
    """A binary string with block provenance.

    ``block_lengths`` lists the complete blocks in order; a trailing rest
    segment of length ``rest_len`` follows them.  ``truncated`` records
    whether the final block of the underlying infinite sequence was cut
    at position n (equivalently, whether the rest is non-empty).
    Symbols alternate starting from ``initial_symbol``.
    """

    l: int
    initial_symbol: int
    block_lengths: tuple[int, ...]
    rest_len: int = 0
    truncated: bool = False

    def __post_init__(self) -> None:
        if self.initial_symbol not in (0, 1):
            raise ValueError("initial_symbol must be 0 or 1")
        support = (self.l - 1, self.l, self.l + 1)
        for b in self.block_lengths:
            if b not in support:
                raise ValueError(f"block length {b} not in {support}")
        if not 0 <= self.rest_len <= self.l:
            raise ValueError(f"rest_len must be in [0, {self.l}], got {self.rest_len}")
        if (self.rest_len > 0) != self.truncated:
            raise ValueError("truncated must hold exactly when rest_len > 0")

    @property
    def length(self) -> int:
        return sum(self.block_lengths) + self.rest_len

    def counts(self) -> "BlockCounts":
        n1 = n2 = n3 = 0
        for b in self.block_lengths:
            if b == self.l - 1:
                n1 += 1
            elif b == self.l:
                n2 += 1
            else:
                n3 += 1
        return BlockCounts(n1, n2, n3)

    def run_lengths(self) -> tuple[int, ...]:
        if self.rest_len:
            return self.block_lengths + (self.rest_len,)
        return self.block_lengths

    def to_array(self) -> np.ndarray:
        """Symbols as a uint8 array."""
        runs = np.asarray(self.run_lengths(), dtype=np.int64)
        symbols = (np.arange(len(runs)) + self.initial_symbol) % 2
        return np.repeat(symbols.astype(np.uint8), runs)

    def to_string(self) -> str:
        """Symbols as an ASCII '0'/'1' string."""
        parts = []
        sym = self.initial_symbol
        for run in self.run_lengths():
            parts.append(("0" if sym == 0 else "1") * run)
            sym ^= 1
        return "".join(parts)

    def to_json_dict(self) -> dict:
        return {
            "initial": self.initial_symbol,
            "blocks": list(self.block_lengths),
            "rest": self.rest_len,
            "truncated": self.truncated,
        }

    @classmethod
    def from_json_dict(cls, l: int, d: dict) -> "BlockString":
        return cls(l, d["initial"], tuple(d["blocks"]), d["rest"], d["truncated"])

    @classmethod
    def from_symbols(cls, symbols: str, l: int) -> "BlockString":
        """Classify a raw '0'/'1' string (lossy fallback).

        Without generation provenance the trailing run is ambiguous: a
        run of length in {l-1, l, l+1} may be a complete block or the
        rest of a longer cut block.  This classifier treats a trailing
        run shorter than l-1 as rest and one in {l-1, l, l+1} as a
        complete block, so round-trips are not guaranteed for truncated
        strings.
        """
        if not symbols or any(ch not in "01" for ch in symbols):
            raise ValueError("symbols must be a non-empty '0'/'1' string")
        runs: list[int] = []
        count = 0
        prev = symbols[0]
        for ch in symbols:
            if ch == prev:
                count += 1
            else:
                runs.append(count)
                prev = ch
                count = 1
        runs.append(count)
        support = (l - 1, l, l + 1)
        for b in runs[:-1]:
            if b not in support:
                raise ValueError(f"interior run of length {b} not in {support}")
        last = runs[-1]
        if last in support:
            blocks, rest = runs, 0
        elif last < l - 1:
            blocks, rest = runs[:-1], last
        else:
            raise ValueError(f"trailing run of length {last} exceeds l+1 = {l + 1}")
        return cls(l, int(symbols[0]), tuple(blocks), rest, rest > 0)


@dataclass(frozen=True)
class TzrStats:
    """Total block count t, balance z, rest length r."""

    t: int
    z: int
    r: int


@dataclass(frozen=True)
class BlockCounts:
    """Counts of blocks of length l-1, l, l+1."""

    n1: int
    n2: int
    n3: int

    @property
    def total(self) -> int:
        return self.n1 + self.n2 + self.n3

    @property
    def balance(self) -> int:
        return self.n2 - self.n1 - self.n3


def sample_block_lengths(
    params: ModelParams, seed: int | np.random.Generator, count: int
) -> list[int]:
    """Draw ``count`` i.i.d. block lengths, uniform on {l-1, l, l+1}."""
    if count < 0:
        raise ValueError("count must be >= 0")
    rng = as_generator(seed)
    if count == 0:
        return []
    return list(rng.integers(params.l - 1, params.l + 2, size=count, dtype=np.int64))


def build_string(params: ModelParams, seed: int | np.random.Generator) -> BlockString:
    """Generate the first n symbols of the infinite block sequence.

    Draw order is fixed (initial symbol, then block lengths) so a given
    seed always yields the same string.
    """
    rng = as_generator(seed)
    initial = int(rng.integers(0, 2))
    # ceil(n/(l-1)) blocks always suffice to cover n symbols
    kmax = -(-params.n // (params.l - 1))
    lengths = rng.integers(params.l - 1, params.l + 2, size=kmax, dtype=np.int64)
    sums = np.cumsum(lengths)
    t = int(np.searchsorted(sums, params.n, side="right"))
    consumed = int(sums[t - 1]) if t > 0 else 0
    rest = params.n - consumed
    return BlockString(
        l=params.l,
        initial_symbol=initial,
        block_lengths=tuple(int(b) for b in lengths[:t]),
        rest_len=rest,
        truncated=rest > 0,
    )


def compute_tzr(s: BlockString) -> TzrStats:
    """Summary statistics (t, z, r) from block provenance."""
    c = s.counts()
    return TzrStats(t=c.total, z=c.balance, r=s.rest_len)


def counts_from_tzr(params: ModelParams, stats: TzrStats) -> BlockCounts:
    """Invert (t, z, r) to the block counts (n1, n2, n3).

    Raises InvalidTzr when the affine map has no non-negative integer
    solution for this (l, n), i.e. the triple has probability zero.
    """
    t, z, r = stats.t, stats.z, stats.r
    if t < 0:
        raise InvalidTzr(f"t must be >= 0, got {t}")
    if not 0 <= r <= params.l:
        raise InvalidTzr(f"r must be in [0, {params.l}], got {r}")
    if (t + z) % 2:
        raise InvalidTzr(f"t + z must be even, got t={t}, z={z}")
    n2 = (t + z) // 2
    half = (t - z) // 2  # n1 + n3
    diff = (params.n - r) - params.l * t  # n3 - n1
    if (half + diff) % 2:
        raise InvalidTzr(f"no integer counts for (t={t}, z={z}, r={r})")
    n3 = (half + diff) // 2
    n1 = (half - diff) // 2
    if n1 < 0 or n2 < 0 or n3 < 0:
        raise InvalidTzr(f"negative count for (t={t}, z={z}, r={r}): ({n1}, {n2}, {n3})")
    return BlockCounts(n1, n2, n3)


def try_counts(params: ModelParams, t: int, z: int, r: int) -> BlockCounts | None:
    """Non-raising variant of :func:`counts_from_tzr` for admissibility scans."""
    if t < 0 or not 0 <= r <= params.l or (t + z) % 2:
        return None
    n2 = (t + z) // 2
    half = (t - z) // 2
    diff = (params.n - r) - params.l * t
    if (half + diff) % 2:
        return None
    n3 = (half + diff) // 2
    n1 = (half - diff) // 2
    if n1 < 0 or n2 < 0 or n3 < 0:
        return None
    return BlockCounts(n1, n2, n3)


# Log-factorial table, grown on demand; entries are independent lgamma
# evaluations so there is no cumulative rounding.
_LOGFACT: list[float] = [0.0]


def _logfact(k: int) -> float:
    while len(_LOGFACT) <= k:
        _LOGFACT.append(math.lgamma(len(_LOGFACT) + 1))
    return _LOGFACT[k]


def survival_factor(params: ModelParams, r: int) -> Fraction:
    """Probability that a fresh block is longer than the rest length r.

    A non-empty rest belongs to a block cut at position n, so that block
    must be strictly longer than r; an empty rest imposes no constraint.
    """
    if r == 0:
        return Fraction(1)
    return Fraction(sum(1 for b in params.block_support if b > r), 3)


def joint_prob_tzr(params: ModelParams, stats: TzrStats) -> float:
    """log P((T, Z, R) = (t, z, r)), computed via the log-factorial table."""
    c = counts_from_tzr(params, stats)
    surv = survival_factor(params, stats.r)
    log_mult = (
        _logfact(stats.t) - _logfact(c.n1) - _logfact(c.n2) - _logfact(c.n3)
    )
    return log_mult - stats.t * math.log(3.0) + math.log(surv)


def joint_prob_tzr_exact(params: ModelParams, stats: TzrStats) -> Fraction:
    """Exact rational P((T, Z, R) = (t, z, r)); verification path."""
    c = counts_from_tzr(params, stats)
    mult = math.comb(stats.t, c.n1) * math.comb(stats.t - c.n1, c.n2)
    return mult * Fraction(1, 3**stats.t) * survival_factor(params, stats.r)


def rest_length_pmf(params: ModelParams) -> list[Fraction]:
    """Exact P(R = r) for r = 0..l via the renewal hit-probability recursion.

    Independent of the multinomial route: f(s) = P(some block prefix sums
    to exactly s) satisfies f(s) = (f(s-l+1) + f(s-l) + f(s-l-1)) / 3, and
    P(R = r) = f(n - r) * surv(r).
    """
    n = params.n
    f = [Fraction(0)] * (n + 1)
    f[0] = Fraction(1)
    third = Fraction(1, 3)
    for s in range(1, n + 1):
        acc = Fraction(0)
        for b in params.block_support:
            if s >= b:
                acc += f[s - b]
        f[s] = acc * third
    return [f[n - r] * survival_factor(params, r) for r in range(params.l + 1)]


def sample_conditional(
    params: ModelParams, stats: TzrStats, seed: int | np.random.Generator
) -> BlockString:
    """Sample uniformly from the strings with statistics (t, z, r).

    A uniform permutation of the block multiset makes each distinct
    arrangement equally likely; the initial symbol is a fair coin.
    """
    c = counts_from_tzr(params, stats)
    rng = as_generator(seed)
    initial = int(rng.integers(0, 2))
    blocks = np.repeat(
        np.asarray(params.block_support, dtype=np.int64),
        [c.n1, c.n2, c.n3],
    )
    blocks = rng.permutation(blocks)
    return BlockString(
        l=params.l,
        initial_symbol=initial,
        block_lengths=tuple(int(b) for b in blocks),
        rest_len=stats.r,
        truncated=stats.r > 0,
    )


def xi_support_size(params: ModelParams, stats: TzrStats) -> int:
    """Number of strings with statistics (t, z, r): 2 * multinomial(t; n1, n2, n3)."""
    c = counts_from_tzr(params, stats)
    return 2 * math.comb(stats.t, c.n1) * math.comb(stats.t - c.n1, c.n2)


def _multiset_arrangements(counts: list[int]):
    """Yield all distinct orderings of a 3-value multiset as index tuples."""
    total = sum(counts)
    arrangement: list[int] = []

    def rec():
        if len(arrangement) == total:
            yield tuple(arrangement)
            return
        for v in range(3):
            if counts[v] > 0:
                counts[v] -= 1
                arrangement.append(v)
                yield from rec()
                arrangement.pop()
                counts[v] += 1

    yield from rec()


def enumerate_xi(
    params: ModelParams, stats: TzrStats, cap: int = DEFAULT_ENUM_CAP
) -> list[BlockString]:
    """The complete set of strings with statistics (t, z, r).

    Raises TooLarge when the support exceeds ``cap`` (use
    :func:`sample_conditional` instead).
    """
    c = counts_from_tzr(params, stats)
    size = xi_support_size(params, stats)
    if size > cap:
        raise TooLarge(f"support size {size} exceeds cap {cap}")
    support = params.block_support
    out: list[BlockString] = []
    for arrangement in _multiset_arrangements([c.n1, c.n2, c.n3]):
        lengths = tuple(support[v] for v in arrangement)
        for initial in (0, 1):
            out.append(
                BlockString(
                    l=params.l,
                    initial_symbol=initial,
                    block_lengths=lengths,
                    rest_len=stats.r,
                    truncated=stats.r > 0,
                )
            )
    return out
