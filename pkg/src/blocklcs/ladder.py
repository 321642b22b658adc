"""Coupled families of conditioned strings over a z-grid.

For a fixed (t, r) and a fixed opponent string y, a *ladder* is the
family of strings X_(t,z,r) over increasing balance z, built so that
consecutive members are coupled: the even sub-ladder starts from a
conditional sample at the leftmost admissible z0 and applies repeated
tilde steps (z0, z0+4, z0+8, ...); the odd sub-ladder seeds itself with
a single half step from the z0 string (landing on z0+2, with the rest
shifted by one; see :mod:`blocklcs.modify`) and then applies tilde steps
as well.  Interleaved, the two chains cover z0, z0+2, z0+4, ... until a
chain runs out of modifiable blocks or would leave the admissible
z-window.

Each rung stores its own (z, r, parity) and its LCS value against y.
The diagnostics treat the per-step LCS increments of one parity class
as a drifting random walk: a slope event checks a minimum growth rate
over wide windows, the repaired sequence replaces post-failure values
by deterministic +epsilon increments, and the Azuma-style tail bound
2*exp(-(eps^2/32)*(z2-z1)) is evaluated for the checked window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blocks import BlockString, ModelParams, TzrStats, counts_from_tzr, sample_conditional
from .errors import InvalidTzr, MisalignedInput, NoAdmissibleZ, NoModifiableBlocks
from .lcs import lcs_len
from .modify import ModStep, half_tilde_traced, tilde_traced
from .seeding import as_generator

__all__ = [
    "LadderRung",
    "LcsLadder",
    "SlopeEvent",
    "LadderDiagnostics",
    "build_ladder",
    "slope_event_check",
    "repair_ladder",
    "martingale_diagnostics",
]


@dataclass(frozen=True)
class LadderRung:
    z: int
    r: int
    parity: str  # "even" | "odd"
    lcs: int
    string: BlockString


@dataclass(frozen=True)
class LcsLadder:
    params: ModelParams
    t: int
    r: int
    rungs: tuple[LadderRung, ...]
    traces: tuple[ModStep, ...]
    termination: str

    @property
    def z_values(self) -> list[int]:
        return [rung.z for rung in self.rungs]

    @property
    def lcs_values(self) -> list[int]:
        return [rung.lcs for rung in self.rungs]

    @property
    def parity_origin(self) -> list[str]:
        return [rung.parity for rung in self.rungs]

    def parity_class(self, parity: str) -> list[LadderRung]:
        return [rung for rung in self.rungs if rung.parity == parity]


@dataclass(frozen=True)
class SlopeEvent:
    epsilon: float
    c2: float
    holds: bool
    violating_pair: tuple[int, int] | None


@dataclass(frozen=True)
class LadderDiagnostics:
    e_values: list[float]
    martingale_residuals: list[float]
    azuma_bound: float
    azuma_bound_lipschitz2: float
    tau: float


def _leftmost_admissible_z(params: ModelParams, t: int, r: int, z_lo: int, z_hi: int) -> int:
    for z in range(z_lo, z_hi + 1):
        try:
            counts_from_tzr(params, TzrStats(t, z, r))
        except InvalidTzr:
            continue
        return z
    raise NoAdmissibleZ(f"no admissible z in [{z_lo}, {z_hi}] for t={t}, r={r}")


def _tilde_chain(
    params: ModelParams,
    start: BlockString,
    z_start: int,
    parity: str,
    z_hi: int,
    y_arr,
    engine: str,
    rng,
    traces: list[ModStep],
) -> tuple[list[LadderRung], str]:
    rungs = [
        LadderRung(
            z=z_start,
            r=start.rest_len,
            parity=parity,
            lcs=lcs_len(start.to_array(), y_arr, engine=engine),
            string=start,
        )
    ]
    cur, z = start, z_start
    while z + 4 <= z_hi:
        try:
            cur, rec = tilde_traced(cur, rng, step=len(traces))
        except NoModifiableBlocks:
            return rungs, "exhausted"
        traces.append(rec)
        z += 4
        rungs.append(
            LadderRung(
                z=z,
                r=cur.rest_len,
                parity=parity,
                lcs=lcs_len(cur.to_array(), y_arr, engine=engine),
                string=cur,
            )
        )
    return rungs, "domain-edge"


def build_ladder(
    params: ModelParams,
    t: int,
    r: int,
    y,
    domain,
    seed: int | np.random.Generator,
    engine: str = "bitparallel",
) -> LcsLadder:
    """Build the coupled ladder for (t, r) against y over domain's z-window.

    Deterministic given (params, t, r, y, domain, seed).
    """
    rng = as_generator(seed)
    y_arr = y if isinstance(y, np.ndarray) else np.frombuffer(y.encode(), np.uint8) & 1
    z0 = _leftmost_admissible_z(params, t, r, domain.z_lo, domain.z_hi)
    x0 = sample_conditional(params, TzrStats(t, z0, r), rng)
    traces: list[ModStep] = []

    even_rungs, even_term = _tilde_chain(
        params, x0, z0, "even", domain.z_hi, y_arr, engine, rng, traces
    )

    odd_rungs: list[LadderRung] = []
    odd_term = "unseeded"
    if z0 + 2 <= domain.z_hi:
        try:
            x_odd, rec = half_tilde_traced(x0, rng, step=len(traces))
        except NoModifiableBlocks:
            pass
        else:
            traces.append(rec)
            odd_rungs, odd_term = _tilde_chain(
                params, x_odd, z0 + 2, "odd", domain.z_hi, y_arr, engine, rng, traces
            )

    merged = sorted(even_rungs + odd_rungs, key=lambda rung: rung.z)
    trimmed = False
    if odd_rungs:
        keep = [merged[0]]
        for rung in merged[1:]:
            if rung.z == keep[-1].z + 2:
                keep.append(rung)
            else:
                trimmed = True
                break
        merged = keep
    termination = f"even={even_term};odd={odd_term}" + (";trimmed" if trimmed else "")
    return LcsLadder(
        params=params,
        t=t,
        r=r,
        rungs=tuple(merged),
        traces=tuple(traces),
        termination=termination,
    )


def slope_event_check(ladder: LcsLadder, epsilon: float, c2: float) -> SlopeEvent:
    """Check minimum growth over all windows of width >= c2*ln(n).

    Holds iff every pair z1 < z2 with z2 - z1 >= c2*ln(n) satisfies
    lcs(z2) - lcs(z1) >= (epsilon/8)*(z2 - z1).  Vacuously true when the
    ladder spans less than one window.
    """
    if epsilon <= 0 or c2 <= 0:
        raise ValueError("epsilon and c2 must be positive")
    window = c2 * math.log(ladder.params.n)
    zs = ladder.z_values
    ls = ladder.lcs_values
    for i in range(len(zs)):
        for j in range(i + 1, len(zs)):
            dz = zs[j] - zs[i]
            if dz < window:
                continue
            if ls[j] - ls[i] < (epsilon / 8.0) * dz:
                return SlopeEvent(epsilon, c2, False, (zs[i], zs[j]))
    return SlopeEvent(epsilon, c2, True, None)


def repair_ladder(ladder: LcsLadder, drifts, epsilon: float, parity: str = "even") -> list[float]:
    """Repaired value sequence for one parity class.

    Values follow the observed LCS as long as every prior drift estimate
    meets the threshold epsilon; from the first failure on, each value is
    the previous one plus epsilon.
    """
    values = [rung.lcs for rung in ladder.parity_class(parity)]
    means = [getattr(d, "mean", d) for d in drifts]
    if len(means) != max(0, len(values) - 1):
        raise MisalignedInput(
            f"need {max(0, len(values) - 1)} drift estimates for {len(values)} rungs, "
            f"got {len(means)}"
        )
    repaired = [float(values[0])] if values else []
    intact = True
    for i, mean in enumerate(means):
        if mean < epsilon:
            intact = False
        repaired.append(float(values[i + 1]) if intact else repaired[-1] + epsilon)
    return repaired


def martingale_diagnostics(
    repaired: list[float], epsilon: float, c2: float, n: int
) -> LadderDiagnostics:
    """Increment statistics and concentration bounds for a repaired sequence.

    ``repaired`` covers one parity class, one +4 z-step per increment.
    Residuals are the centered increments.  Two tail bounds are reported:
    the unit-increment bound 2*exp(-(eps^2/32)*(z2-z1)) and the variant
    for increments bounded by 2, 2*exp(-(eps^2/128)*(z2-z1)).
    """
    diffs = [repaired[i + 1] - repaired[i] for i in range(len(repaired) - 1)]
    mean = sum(diffs) / len(diffs) if diffs else 0.0
    residuals = [d - mean for d in diffs]
    window = 4 * len(diffs)
    return LadderDiagnostics(
        e_values=diffs,
        martingale_residuals=residuals,
        azuma_bound=2.0 * math.exp(-(epsilon**2 / 32.0) * window),
        azuma_bound_lipschitz2=2.0 * math.exp(-(epsilon**2 / 128.0) * window),
        tau=epsilon**2 * c2 / 32.0,
    )
