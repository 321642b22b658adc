"""Random block modifications and the LCS drift they induce.

The *tilde* modification picks, uniformly at random, one block of length
l-1 and one block of length l+1 and sets both to length l.  It preserves
the block count t, the rest r and the total string length, and raises
the balance z by exactly 4.  Applied to a string that is uniform over
the strings with statistics (t, z, r), the result is uniform over those
with (t, z+4, r); :func:`tilde_enumerate` exposes the full outcome law
(n1*n3 outcomes, each with probability 1/(n1*n3)) so that property can
be checked exactly.

The *half* step changes a single block (length l-1 or l+1, side chosen
with equal probability among the feasible ones) to length l, raising z
by 2.  A single block change alters the total length by one symbol; to
keep the string length at n the difference is absorbed by the rest
segment, so the rest grows or shrinks by one.  A side is feasible only
when a block is available and the adjusted rest stays within [0, l].

The *drift* of a string s against a fixed y is the conditional expected
LCS change E[lcs(tilde(s), y) - lcs(s, y)] under the tilde law, computed
either exactly by enumerating all n1*n3 outcomes or by Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .blocks import BlockString
from .errors import NoModifiableBlocks, TooLarge
from .lcs import lcs_len
from .seeding import as_generator

__all__ = [
    "ModStep",
    "DriftEstimate",
    "tilde",
    "tilde_traced",
    "tilde_enumerate",
    "half_tilde",
    "half_tilde_traced",
    "drift_exact",
    "drift_sampled",
    "DEFAULT_DRIFT_CAP",
]

DEFAULT_DRIFT_CAP = 10**5


@dataclass(frozen=True)
class ModStep:
    """One recorded modification (for reproducible ladder traces)."""

    step: int
    kind: str  # "tilde" | "half"
    chosen_short_index: int | None
    chosen_long_index: int | None

    def to_json_dict(self) -> dict:
        return {
            "step": self.step,
            "kind": self.kind,
            "chosen_short_index": self.chosen_short_index,
            "chosen_long_index": self.chosen_long_index,
        }


@dataclass(frozen=True)
class DriftEstimate:
    """Estimated or exact conditional expected LCS change of one tilde step."""

    mean: float
    stderr: float
    outcomes: int  # size of the exact outcome set, n1 * n3
    exact: bool


def _block_indices(s: BlockString) -> tuple[list[int], list[int]]:
    short = [i for i, b in enumerate(s.block_lengths) if b == s.l - 1]
    long = [i for i, b in enumerate(s.block_lengths) if b == s.l + 1]
    return short, long


def _with_levelled(s: BlockString, indices: tuple[int, ...]) -> BlockString:
    lengths = list(s.block_lengths)
    for i in indices:
        lengths[i] = s.l
    return BlockString(
        l=s.l,
        initial_symbol=s.initial_symbol,
        block_lengths=tuple(lengths),
        rest_len=s.rest_len,
        truncated=s.truncated,
    )


def tilde_traced(
    s: BlockString, seed: int | np.random.Generator, step: int = 0
) -> tuple[BlockString, ModStep]:
    """Tilde modification plus its trace record."""
    short, long = _block_indices(s)
    if not short or not long:
        raise NoModifiableBlocks(
            f"need one block of length {s.l - 1} and one of {s.l + 1}; "
            f"have {len(short)} and {len(long)}"
        )
    rng = as_generator(seed)
    i = short[int(rng.integers(len(short)))]
    j = long[int(rng.integers(len(long)))]
    return _with_levelled(s, (i, j)), ModStep(step, "tilde", i, j)


def tilde(s: BlockString, seed: int | np.random.Generator) -> BlockString:
    """Set one uniformly chosen l-1 block and one l+1 block to length l."""
    out, _ = tilde_traced(s, seed)
    return out


def tilde_enumerate(s: BlockString) -> list[tuple[BlockString, Fraction]]:
    """All n1*n3 tilde outcomes, each with probability 1/(n1*n3)."""
    short, long = _block_indices(s)
    if not short or not long:
        raise NoModifiableBlocks(
            f"need one block of length {s.l - 1} and one of {s.l + 1}; "
            f"have {len(short)} and {len(long)}"
        )
    p = Fraction(1, len(short) * len(long))
    return [(_with_levelled(s, (i, j)), p) for i in short for j in long]


def _half_sides(s: BlockString) -> list[str]:
    """Feasible sides for the half step.

    Growing an l-1 block consumes one symbol from the rest; shrinking an
    l+1 block pushes one symbol into it.  Either way the rest must stay
    within [0, l].
    """
    short, long = _block_indices(s)
    sides = []
    if short and s.rest_len >= 1:
        sides.append("short")
    if long and s.rest_len <= s.l - 1:
        sides.append("long")
    return sides


def half_tilde_traced(
    s: BlockString, seed: int | np.random.Generator, step: int = 0
) -> tuple[BlockString, ModStep]:
    """Half-step modification plus its trace record."""
    sides = _half_sides(s)
    if not sides:
        raise NoModifiableBlocks(
            "no feasible half step: need an l-1 block with rest >= 1 "
            "or an l+1 block with rest <= l-1"
        )
    rng = as_generator(seed)
    side = sides[0] if len(sides) == 1 else sides[int(rng.integers(2))]
    short, long = _block_indices(s)
    if side == "short":
        i = short[int(rng.integers(len(short)))]
        new_rest = s.rest_len - 1
        step_rec = ModStep(step, "half", i, None)
    else:
        i = long[int(rng.integers(len(long)))]
        new_rest = s.rest_len + 1
        step_rec = ModStep(step, "half", None, i)
    lengths = list(s.block_lengths)
    lengths[i] = s.l
    out = BlockString(
        l=s.l,
        initial_symbol=s.initial_symbol,
        block_lengths=tuple(lengths),
        rest_len=new_rest,
        truncated=new_rest > 0,
    )
    return out, step_rec


def half_tilde(s: BlockString, seed: int | np.random.Generator) -> BlockString:
    """Set a single block (length l-1 or l+1) to length l; z rises by 2."""
    out, _ = half_tilde_traced(s, seed)
    return out


def drift_exact(
    s: BlockString,
    y,
    engine: str = "bitparallel",
    cap: int = DEFAULT_DRIFT_CAP,
) -> DriftEstimate:
    """Exact conditional expected LCS change of one tilde step.

    Enumerates all n1*n3 outcomes; raises TooLarge beyond ``cap``.
    """
    short, long = _block_indices(s)
    if not short or not long:
        raise NoModifiableBlocks("no tilde outcomes to average")
    count = len(short) * len(long)
    if count > cap:
        raise TooLarge(f"{count} outcomes exceed cap {cap}")
    base = lcs_len(s.to_array(), y, engine=engine)
    total = 0
    for i in short:
        for j in long:
            out = _with_levelled(s, (i, j))
            total += lcs_len(out.to_array(), y, engine=engine) - base
    return DriftEstimate(mean=total / count, stderr=0.0, outcomes=count, exact=True)


def drift_sampled(
    s: BlockString,
    y,
    k: int,
    seed: int | np.random.Generator,
    engine: str = "bitparallel",
) -> DriftEstimate:
    """Monte Carlo estimate of the tilde drift from k independent draws."""
    if k < 2:
        raise ValueError("k must be >= 2 for a variance estimate")
    short, long = _block_indices(s)
    if not short or not long:
        raise NoModifiableBlocks("no tilde outcomes to sample")
    rng = as_generator(seed)
    base = lcs_len(s.to_array(), y, engine=engine)
    diffs = np.empty(k, dtype=np.int64)
    for d in range(k):
        i = short[int(rng.integers(len(short)))]
        j = long[int(rng.integers(len(long)))]
        out = _with_levelled(s, (i, j))
        diffs[d] = lcs_len(out.to_array(), y, engine=engine) - base
    mean = float(diffs.mean())
    stderr = float(math.sqrt(diffs.var(ddof=1) / k))
    return DriftEstimate(
        mean=mean, stderr=stderr, outcomes=len(short) * len(long), exact=False
    )
