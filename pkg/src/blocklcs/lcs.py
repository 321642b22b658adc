"""Longest-common-subsequence length for binary strings.

Two interchangeable engines compute the exact LCS length:

* ``reference`` — the textbook quadratic dynamic program over two
  rolling rows, compiled with numba (the batch variant distributes
  pairs over threads; results are independent of the schedule because
  every pair is computed in isolation).
* ``bitparallel`` — a word-parallel row encoding: each DP row is stored
  as the bit vector of its vertical increments inside one arbitrary-
  precision integer, so a full row update is a handful of integer
  operations (Allison-Dix style recurrence).

Only lengths are computed, never alignments.  Inputs are ASCII '0'/'1'
strings or uint8 arrays of 0/1 values.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

from .errors import InputTooLarge

__all__ = ["lcs_len", "lcs_len_batch", "lcs_csv", "ENGINES", "MAX_LEN"]

ENGINES = ("reference", "bitparallel")
MAX_LEN = 2**20


@njit(cache=True)
def _ref_kernel(x, y):
    m = x.shape[0]
    n = y.shape[0]
    prev = np.zeros(n + 1, dtype=np.int32)
    cur = np.zeros(n + 1, dtype=np.int32)
    for i in range(m):
        xi = x[i]
        for j in range(n):
            if xi == y[j]:
                cur[j + 1] = prev[j] + 1
            else:
                a = prev[j + 1]
                b = cur[j]
                cur[j + 1] = a if a >= b else b
        prev, cur = cur, prev
    return prev[n]


@njit(cache=True, parallel=True)
def _ref_batch_kernel(xs, ys, xlens, ylens):
    k = xs.shape[0]
    out = np.empty(k, dtype=np.int64)
    for p in prange(k):
        out[p] = _ref_kernel(xs[p, : xlens[p]], ys[p, : ylens[p]])
    return out


def _as_bits(s) -> np.ndarray:
    if isinstance(s, np.ndarray):
        arr = s.astype(np.uint8, copy=False)
    elif isinstance(s, str):
        arr = np.frombuffer(s.encode("ascii"), dtype=np.uint8)
        if arr.size and not np.all((arr == 48) | (arr == 49)):
            raise ValueError("strings must contain only '0' and '1'")
        arr = arr & 1
    else:
        raise TypeError(f"expected str or uint8 array, got {type(s).__name__}")
    if arr.size > MAX_LEN:
        raise InputTooLarge(f"length {arr.size} exceeds cap {MAX_LEN}")
    if arr.size and arr.max() > 1:
        raise ValueError("arrays must contain only 0 and 1")
    return arr


def _bitparallel(x: np.ndarray, y: np.ndarray) -> int:
    m = x.size
    if m == 0 or y.size == 0:
        return 0
    ones = (1 << m) - 1
    mask1 = int.from_bytes(np.packbits(x, bitorder="little").tobytes(), "little")
    masks = (ones ^ mask1, mask1)
    row = 0
    for ch in y.tobytes():
        u = row | masks[ch]
        w = (row << 1) | 1
        row = u & ~(u - w)
    return row.bit_count()


def lcs_len(x, y, engine: str = "bitparallel") -> int:
    """Exact LCS length of two binary strings.

    The result is in [0, min(|x|, |y|)] and identical for both engines.
    """
    xa = _as_bits(x)
    ya = _as_bits(y)
    if engine == "bitparallel":
        return _bitparallel(xa, ya)
    if engine == "reference":
        if xa.size == 0 or ya.size == 0:
            return 0
        return int(_ref_kernel(xa, ya))
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def lcs_len_batch(pairs, engine: str = "bitparallel") -> list[int]:
    """Element-wise :func:`lcs_len` over a list of (x, y) pairs.

    The reference engine evaluates pairs on multiple threads; the output
    order always matches the input order.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    if not pairs:
        return []
    xs, ys = [], []
    for i, (x, y) in enumerate(pairs):
        try:
            xs.append(_as_bits(x))
            ys.append(_as_bits(y))
        except (ValueError, InputTooLarge) as exc:
            raise type(exc)(f"pair {i}: {exc}") from None
    if engine == "bitparallel":
        return [_bitparallel(x, y) for x, y in zip(xs, ys)]
    k = len(pairs)
    xlens = np.array([a.size for a in xs], dtype=np.int64)
    ylens = np.array([a.size for a in ys], dtype=np.int64)
    xmat = np.zeros((k, max(1, int(xlens.max()))), dtype=np.uint8)
    ymat = np.zeros((k, max(1, int(ylens.max()))), dtype=np.uint8)
    for i, a in enumerate(xs):
        xmat[i, : a.size] = a
    for i, a in enumerate(ys):
        ymat[i, : a.size] = a
    return [int(v) for v in _ref_batch_kernel(xmat, ymat, xlens, ylens)]


def lcs_csv(in_path, out_path, engine: str = "bitparallel") -> int:
    """File interface: CSV with columns x,y in; CSV with index,lcs out.

    Returns the number of pairs processed.
    """
    import csv
    from pathlib import Path

    with open(in_path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or not {"x", "y"} <= set(reader.fieldnames):
            raise ValueError(f"{in_path}: expected a header with columns x,y")
        pairs = [(row["x"], row["y"]) for row in reader]
    values = lcs_len_batch(pairs, engine=engine)
    lines = ["index,lcs"]
    lines.extend(f"{i},{v}" for i, v in enumerate(values))
    Path(out_path).write_text("\n".join(lines) + "\n")
    return len(values)
