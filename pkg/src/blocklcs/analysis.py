"""Typical-value domain, exact probability scans, and variance experiments.

The domain D is the product window of width c*sqrt(n) around the typical
block count n/l and the typical balance -n/(3l).  Scans over D evaluate
the exact joint law: the minimum of n*P(t, z, r), and the largest
sqrt(n)-scaled deviation of the consecutive-z probability ratio from 1.
These are the empirical counterparts of the existential constants in the
concentration arguments; nothing is hard-coded, the scans just report
the numbers and the tests check their stability across an n-grid.

Also here: the variance scan over an n-grid (sample variance of the LCS
length and of the balance z, with chi-square confidence intervals), a
numeric checker for the staircase variance inequality, and an empirical
check of the two-sided Hoeffding tail bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import chi2

from .blocks import ModelParams, TzrStats, build_string, compute_tzr, joint_prob_tzr, try_counts
from .errors import EmptyDomain, SpecViolation
from .lcs import lcs_len
from .seeding import as_generator, child_seed

__all__ = [
    "DomainD",
    "make_domain",
    "admissible_triples",
    "calibrate_c",
    "min_prob_over_D",
    "ratio_check",
    "VarianceRow",
    "VarianceTable",
    "variance_scan",
    "linear_fit",
    "SlopeMapSpec",
    "validate_slope_map",
    "check_bonetto_refined",
    "hoeffding_tail_check",
]


@dataclass(frozen=True)
class DomainD:
    """Integer product window for (t, z), rounded outward."""

    c: float
    t_lo: int
    t_hi: int
    z_lo: int
    z_hi: int

    def contains(self, t: int, z: int) -> bool:
        return self.t_lo <= t <= self.t_hi and self.z_lo <= z <= self.z_hi


def make_domain(params: ModelParams, c: float) -> DomainD:
    """Window of half-width c*sqrt(n) around (n/l, -n/(3l))."""
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    n, l = params.n, params.l
    root = math.sqrt(n)
    return DomainD(
        c=c,
        t_lo=math.floor(n / l - c * root),
        t_hi=math.ceil(n / l + c * root),
        z_lo=math.floor(-n / (3 * l) - c * root),
        z_hi=math.ceil(-n / (3 * l) + c * root),
    )


def _simulate_tz(params: ModelParams, reps: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    ts = np.empty(reps, dtype=np.int64)
    zs = np.empty(reps, dtype=np.int64)
    for i in range(reps):
        stats = compute_tzr(build_string(params, child_seed(seed, "tz", i)))
        ts[i] = stats.t
        zs[i] = stats.z
    return ts, zs


def calibrate_c(
    params: ModelParams,
    target: float,
    reps: int,
    seed: int,
    grid_step: float = 0.25,
    c_max: float = 16.0,
) -> float:
    """Smallest grid multiple of ``grid_step`` whose domain covers (T, Z)
    with empirical probability >= target over ``reps`` simulated strings."""
    if not 0 < target < 1:
        raise ValueError(f"target must be in (0, 1), got {target}")
    ts, zs = _simulate_tz(params, reps, seed)
    k = 1
    while k * grid_step <= c_max:
        c = k * grid_step
        d = make_domain(params, c)
        inside = (ts >= d.t_lo) & (ts <= d.t_hi) & (zs >= d.z_lo) & (zs <= d.z_hi)
        if inside.mean() >= target:
            return c
        k += 1
    raise RuntimeError(f"no c <= {c_max} reaches coverage {target}")


def admissible_triples(params: ModelParams, domain: DomainD):
    """Yield (t, z, r, counts) for every admissible triple with (t, z) in D."""
    for t in range(max(0, domain.t_lo), domain.t_hi + 1):
        for z in range(domain.z_lo, domain.z_hi + 1):
            for r in range(params.l + 1):
                counts = try_counts(params, t, z, r)
                if counts is not None:
                    yield t, z, r, counts


def min_prob_over_D(params: ModelParams, domain: DomainD) -> tuple[float, TzrStats]:
    """Exact minimum of n*P((T,Z,R)=(t,z,r)) over admissible triples in D."""
    best = None
    arg = None
    for t, z, r, _ in admissible_triples(params, domain):
        val = params.n * math.exp(joint_prob_tzr(params, TzrStats(t, z, r)))
        if best is None or val < best:
            best, arg = val, TzrStats(t, z, r)
    if best is None:
        raise EmptyDomain("no admissible (t, z, r) in the domain")
    return best, arg


def ratio_check(params: ModelParams, domain: DomainD) -> float:
    """Largest sqrt(n) * |P(z+4 | t, r) / P(z | t, r) - 1| over D.

    The conditional ratio reduces to n1*n3 / ((n2+2)*(n2+1)); it is
    evaluated in exact rational arithmetic before the final float.
    """
    worst: Fraction | None = None
    for t, z, r, counts in admissible_triples(params, domain):
        if counts.n1 < 1 or counts.n3 < 1:
            continue  # (t, z+4, r) not admissible
        ratio = Fraction(counts.n1 * counts.n3, (counts.n2 + 2) * (counts.n2 + 1))
        dev = abs(ratio - 1)
        if worst is None or dev > worst:
            worst = dev
    if worst is None:
        raise EmptyDomain("no consecutive-z pair in the domain")
    return math.sqrt(params.n) * float(worst)


@dataclass(frozen=True)
class VarianceRow:
    n: int
    replicates: int
    mean_l: float
    var_l: float
    ci_low: float
    ci_high: float
    var_z: float


@dataclass(frozen=True)
class VarianceTable:
    rows: tuple[VarianceRow, ...]


def variance_scan(
    l: int,
    ns: list[int],
    reps: int,
    seed: int,
    engine: str = "bitparallel",
) -> VarianceTable:
    """Sample variance of the LCS length and of the balance z per n.

    ``engine="none"`` skips LCS entirely (the L columns become NaN) so
    the z-variance scan runs without any quadratic work.  Confidence
    intervals for var_l are the usual chi-square ones, a heuristic under
    approximate normality.
    """
    if reps < 30:
        raise ValueError(f"reps must be >= 30, got {reps}")
    rows = []
    for n in ns:
        params = ModelParams(l=l, n=n)
        zs = np.empty(reps, dtype=np.int64)
        ls = np.empty(reps, dtype=np.int64)
        for i in range(reps):
            x = build_string(params, child_seed(seed, "scan", n, i, "x"))
            zs[i] = compute_tzr(x).z
            if engine != "none":
                y = build_string(params, child_seed(seed, "scan", n, i, "y"))
                ls[i] = lcs_len(x.to_array(), y.to_array(), engine=engine)
        var_z = float(zs.var(ddof=1))
        if engine != "none":
            mean_l = float(ls.mean())
            var_l = float(ls.var(ddof=1))
            dof = reps - 1
            ci_low = dof * var_l / float(chi2.ppf(0.975, dof))
            ci_high = dof * var_l / float(chi2.ppf(0.025, dof))
        else:
            mean_l = var_l = ci_low = ci_high = math.nan
        rows.append(VarianceRow(n, reps, mean_l, var_l, ci_low, ci_high, var_z))
    return VarianceTable(tuple(rows))


def linear_fit(xs, ys) -> tuple[float, float, float]:
    """Least-squares line fit; returns (slope, intercept, r_squared)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


@dataclass(frozen=True)
class SlopeMapSpec:
    """An integer map on a contiguous interval plus its slope constants.

    The map must grow at rate at least epsilon/8 over gaps of at least m
    and at most beta per unit over shorter gaps; both conditions are
    checked by :func:`validate_slope_map` before any scoring.
    """

    epsilon: float
    m: float
    beta: float
    z_min: int
    values: tuple[int, ...]

    @property
    def z_max(self) -> int:
        return self.z_min + len(self.values) - 1

    def apply(self, zs) -> np.ndarray:
        z = np.asarray(zs)
        if z.min() < self.z_min or z.max() > self.z_max:
            raise ValueError("samples outside the stored map interval")
        return np.asarray(self.values)[z - self.z_min]


def validate_slope_map(spec: SlopeMapSpec) -> None:
    """Raise SpecViolation unless both slope conditions hold on the interval."""
    if spec.epsilon <= 0 or spec.m <= 0 or spec.beta <= 0:
        raise SpecViolation("epsilon, m and beta must be positive")
    f = np.asarray(spec.values, dtype=float)
    w = len(f)
    gap_min = math.ceil(spec.m)  # smallest integer gap with gap >= m
    # growth condition: s(z) = f(z) - (eps/8) z must be non-decreasing
    # across gaps >= m, checked against the running prefix maximum
    s = f - (spec.epsilon / 8.0) * np.arange(w)
    if w > gap_min:
        prefix = np.maximum.accumulate(s)
        bad = s[gap_min:] < prefix[:-gap_min]
        if bad.any():
            i = int(np.argmax(bad)) + gap_min
            raise SpecViolation(
                f"growth condition fails at z={spec.z_min + i} over a gap >= {spec.m}"
            )
    # local bound: f may rise at most beta per unit over gaps < m
    for g in range(1, min(gap_min, w)):
        excess = f[g:] - f[:-g] - spec.beta * g
        if (excess > 0).any():
            i = int(np.argmax(excess > 0))
            raise SpecViolation(
                f"local bound fails between z={spec.z_min + i} and z={spec.z_min + i + g}"
            )


def check_bonetto_refined(
    spec: SlopeMapSpec, b_samples
) -> tuple[float, float, bool]:
    """Evaluate the staircase variance inequality on samples of B.

    Returns (lhs, rhs, holds) where lhs = VAR[f(B)] and
    rhs = (eps^2/64) * (1 - 16*(eps/8+beta)*m / (eps*sqrt(VAR[B]))) * VAR[B].
    A non-positive rhs makes the inequality vacuously true.
    """
    validate_slope_map(spec)
    b = np.asarray(b_samples, dtype=np.int64)
    if b.size < 2 or b.min() == b.max():
        raise ValueError("b_samples must be non-degenerate")
    var_b = float(b.var(ddof=1))
    fb = spec.apply(b)
    lhs = float(fb.var(ddof=1))
    eps, m, beta = spec.epsilon, spec.m, spec.beta
    rhs = (eps**2 / 64.0) * (1.0 - 16.0 * (eps / 8.0 + beta) * m / (eps * math.sqrt(var_b))) * var_b
    return lhs, rhs, lhs >= rhs or rhs <= 0


def hoeffding_tail_check(
    a: float, delta: float, n: int, reps: int, seed: int
) -> tuple[float, float]:
    """Empirical two-sided tail of a mean of n fair +/-a variables vs the
    analytic bound 2*exp(-(delta^2 / (2 a^2)) * n)."""
    if a <= 0 or delta < 0:
        raise ValueError("a must be positive and delta non-negative")
    rng = as_generator(seed)
    hits = 0
    chunk = max(1, min(reps, 10**7 // max(1, n)))
    done = 0
    while done < reps:
        count = min(chunk, reps - done)
        signs = rng.integers(0, 2, size=(count, n), dtype=np.int8)
        means = a * (2.0 * signs.sum(axis=1, dtype=np.int64) / n - 1.0)
        hits += int((np.abs(means) >= delta).sum())
        done += count
    bound = 2.0 * math.exp(-(delta**2) / (2.0 * a * a) * n)
    return hits / reps, bound
