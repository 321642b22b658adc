"""Named verification suites: exact enumeration and statistical checks.

Each ``check_*`` function runs one self-contained suite and returns a
JSON-serializable report ``{"check", "passed", "cases": [...]}``.  The
CLI ``verify`` subcommand wraps these and converts ``passed`` into the
process exit status.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from fractions import Fraction

import numpy as np
from scipy.stats import chi2

from .analysis import SlopeMapSpec, check_bonetto_refined, hoeffding_tail_check
from .blocks import (
    ModelParams,
    TzrStats,
    build_string,
    compute_tzr,
    counts_from_tzr,
    enumerate_xi,
    joint_prob_tzr,
    rest_length_pmf,
    try_counts,
)
from .lcs import lcs_len_batch
from .modify import tilde_enumerate
from .seeding import child_seed

__all__ = [
    "check_possz",
    "check_linear_system",
    "check_multinomial",
    "check_engines",
    "check_bonetto",
    "check_hoeffding",
    "conditional_counts_pmf",
    "staircase_fixture",
    "CHECKS",
]


def check_possz(l: int = 3, max_total: int = 6) -> dict:
    """Exact pushforward check: one tilde step maps the uniform law on the
    (t, z, r) string set onto the uniform law on the (t, z+4, r) set.

    Enumerates every block multiset with n1 + n2 + n3 <= max_total and
    n1, n3 >= 1 at r = 0 and compares the laws in rational arithmetic;
    the total-variation distance must be exactly zero.
    """
    cases = []
    for n1 in range(1, max_total + 1):
        for n3 in range(1, max_total + 1 - n1):
            for n2 in range(0, max_total + 1 - n1 - n3):
                n = (l - 1) * n1 + l * n2 + (l + 1) * n3
                params = ModelParams(l=l, n=n)
                t = n1 + n2 + n3
                z = n2 - n1 - n3
                source = enumerate_xi(params, TzrStats(t, z, 0))
                push: dict[str, Fraction] = defaultdict(Fraction)
                source_mass = Fraction(1, len(source))
                for s in source:
                    for out, p in tilde_enumerate(s):
                        push[out.to_string()] += source_mass * p
                target = enumerate_xi(params, TzrStats(t, z + 4, 0))
                uniform = Fraction(1, len(target))
                target_keys = {s.to_string() for s in target}
                tv = sum(abs(push.get(k, Fraction(0)) - uniform) for k in target_keys)
                tv += sum(p for k, p in push.items() if k not in target_keys)
                tv /= 2
                cases.append(
                    {
                        "counts": [n1, n2, n3],
                        "n": n,
                        "support": len(target),
                        "tv_distance": str(tv),
                        "ok": tv == 0 and set(push) == target_keys,
                    }
                )
    return {
        "check": "possz",
        "passed": all(c["ok"] for c in cases),
        "cases": cases,
    }


def check_linear_system(
    ls: tuple[int, ...] = (3, 5, 10), max_total: int = 50
) -> dict:
    """Round-trip of counts -> (t, z, r) -> counts for all small multisets."""
    failures = []
    checked = 0
    for l in ls:
        for total in range(1, max_total + 1):
            for n1 in range(total + 1):
                for n2 in range(total + 1 - n1):
                    n3 = total - n1 - n2
                    for r in range(l + 1):
                        n = (l - 1) * n1 + l * n2 + (l + 1) * n3 + r
                        if n < l + 1:
                            continue
                        params = ModelParams(l=l, n=n)
                        t = total
                        z = n2 - n1 - n3
                        got = counts_from_tzr(params, TzrStats(t, z, r))
                        checked += 1
                        if (got.n1, got.n2, got.n3) != (n1, n2, n3):
                            failures.append(
                                {"l": l, "counts": [n1, n2, n3], "r": r,
                                 "got": [got.n1, got.n2, got.n3]}
                            )
    # the worked example: l=3, n=15, (t,z,r)=(5,-1,1) <-> (2,2,1)
    example = counts_from_tzr(ModelParams(3, 15), TzrStats(5, -1, 1))
    example_ok = (example.n1, example.n2, example.n3) == (2, 2, 1)
    return {
        "check": "linear-system",
        "passed": not failures and example_ok,
        "cases": [
            {"round_trips": checked, "failures": failures[:20]},
            {"example_l3_n15": [example.n1, example.n2, example.n3],
             "ok": example_ok},
        ],
    }


def conditional_counts_pmf(
    params: ModelParams, r: int
) -> dict[tuple[int, int, int], Fraction]:
    """Exact law of (n1, n2, n3) conditioned on R = r (rational)."""
    s = params.n - r
    l = params.l
    weights: dict[tuple[int, int, int], Fraction] = {}
    t_min = max(1, -(-s // (l + 1)))
    t_max = s // (l - 1)
    for t in range(t_min, t_max + 1):
        d = s - l * t  # n3 - n1
        for n1 in range(max(0, -d), (t - d) // 2 + 1):
            n3 = n1 + d
            n2 = t - n1 - n3
            if n3 < 0 or n2 < 0:
                continue
            mult = math.comb(t, n1) * math.comb(t - n1, n2)
            weights[(n1, n2, n3)] = mult * Fraction(1, 3**t)
    total = sum(weights.values())
    return {k: v / total for k, v in weights.items()}


def _chi_square_run(params: ModelParams, r: int, reps: int, seed: int) -> dict:
    """One seeded goodness-of-fit run of counts conditioned on R = r."""
    pmf = conditional_counts_pmf(params, r)
    observed: Counter = Counter()
    kept = 0
    for i in range(reps):
        x = build_string(params, child_seed(seed, "mult", i))
        if x.rest_len != r:
            continue
        c = x.counts()
        observed[(c.n1, c.n2, c.n3)] += 1
        kept += 1
    # merge low-expectation cells (< 5) into one bucket
    cells = sorted(pmf.items(), key=lambda kv: (-kv[1], kv[0]))
    stat = 0.0
    merged_exp = 0.0
    merged_obs = 0
    used = 0
    for key, prob in cells:
        expected = float(prob) * kept
        if expected >= 5.0:
            stat += (observed.get(key, 0) - expected) ** 2 / expected
            used += 1
        else:
            merged_exp += expected
            merged_obs += observed.get(key, 0)
    if merged_exp > 0:
        stat += (merged_obs - merged_exp) ** 2 / merged_exp
        used += 1
    dof = max(1, used - 1)
    pval = float(chi2.sf(stat, dof))
    return {"samples": kept, "cells": used, "stat": stat, "dof": dof, "p": pval}


def check_multinomial(
    seed: int,
    params: ModelParams = ModelParams(3, 30),
    reps: int = 10**4,
    runs: int = 20,
    min_passing: int = 19,
) -> dict:
    """Multinomial law of the block counts.

    Statistical part: ``runs`` seeded chi-square tests of the counts
    conditioned on R = 0; at least ``min_passing`` must give p > 0.001.
    Exact part: for every r, the joint probabilities summed over the
    (t, z) support must match the renewal-recursion P(R = r) to 1e-9.
    """
    run_reports = [
        _chi_square_run(params, 0, reps, child_seed(seed, "run", k))
        for k in range(runs)
    ]
    passing = sum(1 for rep in run_reports if rep["p"] > 0.001)

    pmf_r = rest_length_pmf(params)
    sum_cases = []
    for r in range(params.l + 1):
        total = 0.0
        for t in range(0, params.n + 1):
            for z in range(-t, t + 1):
                if try_counts(params, t, z, r) is not None:
                    total += math.exp(joint_prob_tzr(params, TzrStats(t, z, r)))
        err = abs(total - float(pmf_r[r]))
        sum_cases.append({"r": r, "sum": total, "exact": float(pmf_r[r]), "err": err})
    sums_ok = all(c["err"] < 1e-9 for c in sum_cases)

    return {
        "check": "multinomial",
        "passed": passing >= min_passing and sums_ok,
        "cases": [
            {"runs": runs, "passing": passing, "required": min_passing,
             "pvalues": [rep["p"] for rep in run_reports]},
            {"support_sums": sum_cases, "ok": sums_ok},
        ],
    }


def check_engines(
    seed: int, ns: tuple[int, ...] = (64, 512, 4096), pairs_per_n: int = 10**4
) -> dict:
    """Reference and bit-parallel engines agree on seeded random pairs."""
    cases = []
    for n in ns:
        rng = np.random.default_rng(child_seed(seed, "engines", n))
        xs = rng.integers(0, 2, size=(pairs_per_n, n), dtype=np.uint8)
        ys = rng.integers(0, 2, size=(pairs_per_n, n), dtype=np.uint8)
        pairs = [(xs[i], ys[i]) for i in range(pairs_per_n)]
        ref = lcs_len_batch(pairs, engine="reference")
        bit = lcs_len_batch(pairs, engine="bitparallel")
        mismatches = sum(1 for a, b in zip(ref, bit) if a != b)
        cases.append({"n": n, "pairs": pairs_per_n, "mismatches": mismatches})
    return {
        "check": "engines",
        "passed": all(c["mismatches"] == 0 for c in cases),
        "cases": cases,
    }


def staircase_fixture(
    epsilon: float = 4.0, m: float = 4.0, width: int = 24001, z_min: int = 0
) -> SlopeMapSpec:
    """A ceiling staircase whose slope constants provably hold.

    The ceiling of a line with slope ``a`` can fall short of the exact
    linear gain by almost one unit, so the declared growth rate must be
    slightly below the built slope: with a = epsilon/8 + 1/m, any gap
    g >= m gains at least a*g - 1 >= (epsilon/8)*g.  The local bound is
    beta = a + 1 (one unit of ceiling jitter on top of the slope).
    """
    a = epsilon / 8.0 + 1.0 / m
    zs = np.arange(z_min, z_min + width)
    values = tuple(int(v) for v in np.ceil(a * zs).astype(np.int64))
    return SlopeMapSpec(epsilon=epsilon, m=m, beta=a + 1.0, z_min=z_min, values=values)


def check_bonetto(seed: int) -> dict:
    """Three fixtures for the staircase variance inequality."""
    rng = np.random.default_rng(child_seed(seed, "bonetto"))
    cases = []

    # identity map: lhs equals VAR[B] exactly, rhs is strictly smaller
    ident = SlopeMapSpec(epsilon=8.0, m=1.0, beta=1.0, z_min=0,
                         values=tuple(range(201)))
    b = rng.binomial(200, 0.5, size=20000)
    lhs, rhs, holds = check_bonetto_refined(ident, b)
    cases.append({"fixture": "identity", "lhs": lhs, "rhs": rhs, "holds": holds,
                  "ok": holds and rhs <= lhs})

    # matched staircase on a wide binomial: rhs positive, inequality holds
    stair = staircase_fixture()
    b = rng.binomial(24000, 0.5, size=10**5)
    lhs, rhs, holds = check_bonetto_refined(stair, b)
    required = 32 * (stair.epsilon / 8 + stair.beta) * stair.m / stair.epsilon
    spread_ok = math.sqrt(float(np.asarray(b).var(ddof=1))) >= required
    cases.append({"fixture": "staircase", "lhs": lhs, "rhs": rhs, "holds": holds,
                  "rhs_positive": rhs > 0, "spread_ok": spread_ok,
                  "ok": holds and rhs > 0 and spread_ok})

    # narrow binomial: rhs goes non-positive, inequality is vacuous
    narrow = staircase_fixture(width=101)
    b = rng.binomial(100, 0.5, size=20000)
    lhs, rhs, holds = check_bonetto_refined(narrow, b)
    cases.append({"fixture": "vacuous", "lhs": lhs, "rhs": rhs, "holds": holds,
                  "ok": holds and rhs <= 0})

    return {
        "check": "bonetto",
        "passed": all(c["ok"] for c in cases),
        "cases": cases,
    }


def check_hoeffding(
    seed: int,
    deltas: tuple[float, ...] = (0.05, 0.1, 0.2),
    n: int = 1000,
    reps: int = 10**4,
    a: float = 1.0,
) -> dict:
    """Empirical tail of the mean of fair +/-a variables vs the bound."""
    cases = []
    for i, delta in enumerate(deltas):
        emp, bound = hoeffding_tail_check(a, delta, n, reps, child_seed(seed, "hoeff", i))
        cases.append({"delta": delta, "empirical": emp, "bound": bound,
                      "ok": emp <= bound})
    return {
        "check": "hoeffding",
        "passed": all(c["ok"] for c in cases),
        "cases": cases,
    }


CHECKS = {
    "possz": lambda seed, reps: check_possz(),
    "linear-system": lambda seed, reps: check_linear_system(),
    "multinomial": lambda seed, reps: check_multinomial(seed, reps=reps or 10**4),
    "engines": lambda seed, reps: check_engines(seed, pairs_per_n=reps or 10**4),
    "bonetto": lambda seed, reps: check_bonetto(seed),
    "hoeffding": lambda seed, reps: check_hoeffding(seed, reps=reps or 10**4),
}
