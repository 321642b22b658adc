"""Tilde and half-step modifications, outcome enumeration, drift."""

from collections import defaultdict
from fractions import Fraction

import numpy as np
import pytest

from blocklcs import (
    BlockString,
    ModelParams,
    NoModifiableBlocks,
    TooLarge,
    TzrStats,
    build_string,
    compute_tzr,
    drift_exact,
    drift_sampled,
    enumerate_xi,
    half_tilde,
    tilde,
    tilde_enumerate,
)
from blocklcs.modify import half_tilde_traced, tilde_traced
from oracles import drift_brute


def test_tilde_forced_choice():
    s = BlockString(3, 0, (2, 3, 4))  # n1 = n3 = 1
    out = tilde(s, 0)
    assert out.block_lengths == (3, 3, 3)
    before, after = compute_tzr(s), compute_tzr(out)
    assert (after.t, after.z, after.r) == (before.t, before.z + 4, before.r)


def test_tilde_preserves_t_r_and_length():
    params = ModelParams(3, 60)
    rng = np.random.default_rng(1)
    done = 0
    while done < 100:
        s = build_string(params, int(rng.integers(2**32)))
        c = s.counts()
        if c.n1 == 0 or c.n3 == 0:
            continue
        out = tilde(s, int(rng.integers(2**32)))
        b, a = compute_tzr(s), compute_tzr(out)
        assert (a.t, a.z, a.r) == (b.t, b.z + 4, b.r)
        assert out.length == s.length == params.n
        done += 1


def test_tilde_requires_both_lengths():
    with pytest.raises(NoModifiableBlocks):
        tilde(BlockString(3, 0, (3, 4, 3)), 0)  # n1 = 0
    with pytest.raises(NoModifiableBlocks):
        tilde(BlockString(3, 0, (2, 3, 2)), 0)  # n3 = 0


def test_tilde_enumerate_counts_and_probs():
    s = BlockString(3, 0, (2, 2, 4, 4, 4, 3))  # n1 = 2, n3 = 3
    outcomes = tilde_enumerate(s)
    assert len(outcomes) == 6
    assert all(p == Fraction(1, 6) for _, p in outcomes)
    assert sum(p for _, p in outcomes) == 1


def test_tilde_enumerate_single():
    outcomes = tilde_enumerate(BlockString(3, 1, (2, 4)))
    assert len(outcomes) == 1
    assert outcomes[0][1] == 1


def test_tilde_pushforward_uniform():
    # uniform law on the (t, z, r) set maps exactly onto uniform on (t, z+4, r)
    for counts, r in (((1, 1, 1), 0), ((2, 1, 2), 1)):
        n1, n2, n3 = counts
        l = 3
        n = (l - 1) * n1 + l * n2 + (l + 1) * n3 + r
        params = ModelParams(l, n)
        t, z = n1 + n2 + n3, n2 - n1 - n3
        source = enumerate_xi(params, TzrStats(t, z, r))
        push: dict[str, Fraction] = defaultdict(Fraction)
        for s in source:
            for out, p in tilde_enumerate(s):
                push[out.to_string()] += Fraction(1, len(source)) * p
        target = enumerate_xi(params, TzrStats(t, z + 4, r))
        uniform = Fraction(1, len(target))
        assert set(push) == {s.to_string() for s in target}
        assert all(p == uniform for p in push.values())


def test_half_tilde_forced_short_side():
    # only an l-1 block available and rest >= 1: it must become length l
    s = BlockString(3, 0, (2, 3), 2, True)
    out = half_tilde(s, 0)
    assert out.block_lengths == (3, 3)
    assert out.rest_len == 1
    assert compute_tzr(out).z == compute_tzr(s).z + 2
    assert out.length == s.length


def test_half_tilde_forced_long_side_at_rest_zero():
    # rest 0 cannot lend a symbol, so the l+1 side is the only choice
    s = BlockString(3, 0, (2, 4))
    out = half_tilde(s, 1)
    assert out.block_lengths == (2, 3)
    assert out.rest_len == 1 and out.truncated
    assert compute_tzr(out).z == compute_tzr(s).z + 2
    assert out.length == s.length


def test_half_tilde_forced_short_side_at_full_rest():
    # rest l cannot absorb another symbol, so the l-1 side is forced
    s = BlockString(3, 0, (2, 4), 3, True)
    out = half_tilde(s, 2)
    assert out.block_lengths == (3, 4)
    assert out.rest_len == 2


def test_half_tilde_raises_z_by_two():
    params = ModelParams(3, 60)
    rng = np.random.default_rng(2)
    done = 0
    while done < 100:
        s = build_string(params, int(rng.integers(2**32)))
        c = s.counts()
        try:
            out = half_tilde(s, int(rng.integers(2**32)))
        except NoModifiableBlocks:
            assert (c.n1 == 0 or s.rest_len == 0) and (c.n3 == 0 or s.rest_len == s.l)
            continue
        b, a = compute_tzr(s), compute_tzr(out)
        assert a.z == b.z + 2
        assert a.t == b.t
        assert abs(a.r - b.r) == 1
        assert out.length == s.length
        done += 1


def test_half_tilde_no_feasible_side():
    # no short/long blocks at all
    with pytest.raises(NoModifiableBlocks):
        half_tilde(BlockString(3, 0, (3, 3)), 0)
    # a short block exists but rest is 0, and there is no long block
    with pytest.raises(NoModifiableBlocks):
        half_tilde(BlockString(3, 0, (2, 3, 2, 3)), 0)


def test_traces_record_choices():
    s = BlockString(3, 0, (2, 4))
    _, rec = tilde_traced(s, 0, step=7)
    assert rec.to_json_dict() == {
        "step": 7,
        "kind": "tilde",
        "chosen_short_index": 0,
        "chosen_long_index": 1,
    }
    _, rec = half_tilde_traced(s, 1, step=8)
    assert rec.kind == "half"
    assert (rec.chosen_short_index is None) != (rec.chosen_long_index is None)


def test_drift_exact_single_outcome():
    s = BlockString(3, 0, (2, 3, 4))
    y = "010101010"
    est = drift_exact(s, y)
    only = tilde(s, 0)
    from blocklcs import lcs_len

    want = lcs_len(only.to_string(), y) - lcs_len(s.to_string(), y)
    assert est.mean == want
    assert est.stderr == 0.0
    assert est.exact and est.outcomes == 1


def test_drift_exact_matches_brute_force():
    params = ModelParams(3, 40)
    rng = np.random.default_rng(3)
    done = 0
    while done < 25:
        s = build_string(params, int(rng.integers(2**32)))
        c = s.counts()
        if c.n1 == 0 or c.n3 == 0:
            continue
        y = build_string(params, int(rng.integers(2**32))).to_string()
        est = drift_exact(s, y)
        assert est.mean == pytest.approx(drift_brute(s, y), abs=1e-12)
        assert abs(est.mean) <= 2
        assert est.outcomes == c.n1 * c.n3
        done += 1


def test_drift_exact_cap():
    s = BlockString(3, 0, (2, 2, 4, 4))
    with pytest.raises(TooLarge):
        drift_exact(s, "0101", cap=3)


def test_drift_requires_modifiable_blocks():
    with pytest.raises(NoModifiableBlocks):
        drift_exact(BlockString(3, 0, (3, 3)), "01")
    with pytest.raises(NoModifiableBlocks):
        drift_sampled(BlockString(3, 0, (3, 3)), "01", 4, 0)


def test_drift_sampled_degenerate():
    s = BlockString(3, 0, (2, 3, 4))
    y = "001100110"
    exact = drift_exact(s, y)
    est = drift_sampled(s, y, 8, 123)
    assert est.mean == exact.mean
    assert est.stderr == 0.0
    assert not est.exact


def test_drift_sampled_two_draws_formula():
    params = ModelParams(3, 40)
    rng = np.random.default_rng(9)
    while True:
        s = build_string(params, int(rng.integers(2**32)))
        c = s.counts()
        if c.n1 >= 2 and c.n3 >= 2:
            break
    y = build_string(params, int(rng.integers(2**32))).to_string()
    est = drift_sampled(s, y, 2, 77)
    # unbiased two-sample variance: stderr = |d1 - d2| / 2
    diffs = est.mean  # mean = (d1 + d2) / 2
    assert est.stderr >= 0
    # reconstruct |d1 - d2| from mean and stderr: var = (d1-d2)^2 / 2
    # so stderr = sqrt(var/2) = |d1-d2|/2, an integer multiple of 0.5
    assert (2 * est.stderr) == int(2 * est.stderr)
    assert (2 * diffs) == int(2 * diffs)


def test_drift_sampled_requires_k2():
    with pytest.raises(ValueError):
        drift_sampled(BlockString(3, 0, (2, 4)), "01", 1, 0)


def test_drift_sampled_consistent_with_exact():
    params = ModelParams(3, 80)
    rng = np.random.default_rng(10)
    close = 0
    total = 30
    done = 0
    while done < total:
        s = build_string(params, int(rng.integers(2**32)))
        c = s.counts()
        if c.n1 == 0 or c.n3 == 0:
            continue
        y = build_string(params, int(rng.integers(2**32))).to_string()
        exact = drift_exact(s, y)
        est = drift_sampled(s, y, 64, int(rng.integers(2**32)))
        if est.stderr == 0:
            close += est.mean == exact.mean
        else:
            close += abs(est.mean - exact.mean) <= 3 * est.stderr
        done += 1
    assert close >= total - 1
