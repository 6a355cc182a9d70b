import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circle_lab._util import substream
from circle_lab.polyavg import Signal
from circle_lab.seminorms import (
    RealSequence,
    jump_count,
    lacunary,
    lepingle_stat,
    martingale,
    oscillation,
    variation,
    variation_values,
)

from oracles import brute_jump, brute_variation

finite_values = st.lists(
    st.floats(min_value=-5, max_value=5, allow_nan=False), min_size=1, max_size=10
)


def recompute_variation_witness(seq: RealSequence, report) -> float:
    pos = {int(t): i for i, t in enumerate(seq.labels)}
    idx = [pos[t] for t in report.witness]
    r = report.parameters["r"]
    if len(idx) < 2:
        return 0.0
    if r == math.inf:
        return max(
            abs(seq.values[b] - seq.values[a]) for a, b in zip(idx, idx[1:])
        )
    return sum(
        abs(seq.values[b] - seq.values[a]) ** r for a, b in zip(idx, idx[1:])
    ) ** (1.0 / r)


class TestVariation:
    def test_constant(self):
        for r in (1, 2, 3, math.inf):
            assert variation(np.zeros(6) + 2.5, r).value == 0.0

    def test_skip_midpoint(self):
        rep = variation([0.0, 0.5, 1.0], 2)
        assert rep.value == pytest.approx(1.0)
        assert rep.witness == (0, 2)

    def test_zigzag_total(self):
        rep = variation([0.0, 1.0, 0.0, 1.0], 1)
        assert rep.value == pytest.approx(3.0)
        assert rep.witness == (0, 1, 2, 3)

    def test_infinity_is_best_pair(self):
        rep = variation([0.0, 3.0, -1.0, 2.0], math.inf)
        assert rep.value == pytest.approx(4.0)
        assert rep.witness == (1, 2)

    def test_rejects_small_exponent(self):
        with pytest.raises(ValueError):
            variation([1.0, 2.0], 0.5)

    def test_singleton(self):
        rep = variation([4.2], 2)
        assert rep.value == 0.0 and rep.witness == (0,)

    def test_complex_modulus(self):
        rep = variation(np.array([0.0, 1j, 1.0 + 1j]), 1)
        assert rep.value == pytest.approx(2.0)

    def test_custom_labels(self):
        seq = RealSequence([0.0, 1.0, 0.0], labels=[3, 10, 20])
        rep = variation(seq, 1)
        assert rep.witness == (3, 10, 20)

    @given(finite_values, st.sampled_from([1.0, 2.0, 3.0, math.inf]))
    @settings(max_examples=120, deadline=None)
    def test_matches_brute_force(self, vals, r):
        got = variation(np.array(vals), r).value
        want = brute_variation(vals, r)
        assert got == pytest.approx(want, abs=1e-12)

    @given(finite_values)
    @settings(max_examples=60, deadline=None)
    def test_witness_reproduces_value(self, vals):
        seq = RealSequence(np.array(vals))
        for r in (1.0, 2.5, math.inf):
            rep = variation(seq, r)
            assert recompute_variation_witness(seq, rep) == pytest.approx(
                rep.value, abs=1e-12
            )


class TestJumpCount:
    def test_constant(self):
        assert jump_count(np.ones(5), 0.5).value == 0

    def test_zigzag(self):
        rep = jump_count([0.0, 1.0, 0.0, 1.0], 1.0)
        assert rep.value == 3 and rep.witness == (0, 1, 2, 3)

    def test_greedy_trap(self):
        rep = jump_count([0.5, 0.0, 1.0], 1.0)
        assert rep.value == 1
        assert rep.witness == (1, 2)

    def test_rejects_nonpositive_threshold(self):
        with pytest.raises(ValueError):
            jump_count([1.0], 0.0)

    @given(finite_values, st.sampled_from([0.1, 0.5, 1.0]))
    @settings(max_examples=120, deadline=None)
    def test_matches_brute_force(self, vals, lam):
        assert jump_count(np.array(vals), lam).value == brute_jump(vals, lam)

    @given(finite_values)
    @settings(max_examples=60, deadline=None)
    def test_witness_chain_is_valid(self, vals):
        lam = 0.5
        rep = jump_count(np.array(vals), lam)
        w = list(rep.witness)
        assert len(w) == rep.value + 1
        for a, b in zip(w, w[1:]):
            assert abs(vals[b] - vals[a]) >= lam


class TestOscillation:
    def test_constant(self):
        assert oscillation(np.full(5, 1.3), [0, 2, 4], 2).value == 0.0

    def test_single_block(self):
        rep = oscillation([0.0, 5.0, 1.0], [0, 2], 1)
        assert rep.value == pytest.approx(5.0)
        assert rep.witness == (1,)

    def test_block_count_bound(self):
        rng = substream(2)
        vals = rng.standard_normal(16)
        anchors = [0, 4, 8, 12, 15]
        for r in (1.0, 2.0, 3.0):
            rep = oscillation(vals, anchors, r)
            sups = []
            for a, b in zip(anchors, anchors[1:]):
                sups.append(max(abs(vals[t] - vals[a]) for t in range(a, b)))
            blocks = len(anchors) - 1
            assert rep.value <= blocks ** (1.0 / r) * max(sups) + 1e-12

    def test_oscillation_below_variation(self):
        rng = substream(3)
        vals = rng.standard_normal(12)
        anchors = [0, 3, 7, 11]
        for r in (1.0, 2.0):
            o = oscillation(vals, anchors, r).value
            v = variation(vals[: anchors[-1] + 1], r).value
            assert o <= v + 1e-12

    def test_doubling_flag(self):
        vals = np.arange(8.0)
        assert oscillation(vals, [1, 3, 7], 2).parameters["doubling"]
        assert not oscillation(vals, [1, 2, 7], 2).parameters["doubling"]

    def test_anchor_validation(self):
        with pytest.raises(ValueError, match="label"):
            oscillation([1.0, 2.0], [0, 5], 2)
        with pytest.raises(ValueError, match="increasing"):
            oscillation([1.0, 2.0, 3.0], [2, 0], 2)
        with pytest.raises(ValueError, match="anchors"):
            oscillation([1.0, 2.0], [0], 2)


class TestInequalities:
    def test_jump_variation_duality(self):
        rng = substream(4)
        for _ in range(50):
            vals = rng.standard_normal(rng.integers(2, 20))
            for lam in (0.1, 0.5, 1.0):
                n_lam = jump_count(vals, lam).value
                for r in (1.0, 2.0, 3.0):
                    vr = variation(vals, r).value
                    assert lam * n_lam ** (1.0 / r) <= vr + 1e-9

    def test_sup_dominance(self):
        rng = substream(5)
        for _ in range(50):
            vals = rng.standard_normal(rng.integers(1, 16))
            for r in (1.0, 2.0, 3.0):
                vr = variation(vals, r).value
                assert np.abs(vals).max() <= vr + abs(vals[0]) + 1e-12

    def test_monotone_in_exponent(self):
        rng = substream(6)
        for _ in range(50):
            vals = rng.standard_normal(rng.integers(2, 16))
            seq = [variation(vals, r).value for r in (1.0, 1.5, 2.0, 3.0)]
            assert all(a >= b - 1e-12 for a, b in zip(seq, seq[1:]))
            assert seq[-1] >= variation(vals, math.inf).value - 1e-12


class TestLacunary:
    def test_powers_of_two(self):
        assert lacunary(2.0, 10).elements == (1, 2, 4, 8)

    def test_three_halves(self):
        assert lacunary(1.5, 12).elements == (1, 2, 3, 5, 7, 11)

    def test_bound_one(self):
        assert lacunary(3.0, 1).elements == (1,)

    def test_rejects_tau(self):
        with pytest.raises(ValueError):
            lacunary(1.0, 5)


class TestMartingale:
    def test_delta_levels(self):
        mart = martingale(Signal.delta(8, weight=8.0))
        for n, level in enumerate(mart.levels):
            expect = np.zeros(8)
            expect[: 2 ** (3 - n)] = 2.0**n
            assert np.allclose(level.values.real, expect)

    def test_constant(self):
        mart = martingale(Signal.constant(16, 2.0))
        stack = np.stack([lev.values for lev in mart.levels])
        assert np.allclose(variation_values(stack, 2.0), 0.0)

    def test_tower_property_exact(self):
        rng = substream(7)
        q = 32
        mart = martingale(Signal(q, rng.standard_normal(q)))
        depth = mart.depth
        for n in range(depth):
            finer_blocks = mart.levels[n + 1].values[:: q // 2 ** (n + 1)]
            pairwise = (finer_blocks[0::2] + finer_blocks[1::2]) / 2.0
            expect = np.repeat(pairwise, q // 2**n)
            assert np.array_equal(mart.levels[n].values, expect)

    def test_level_norm_contraction(self):
        rng = substream(8)
        g = Signal(64, rng.standard_normal(64))
        mart = martingale(g)
        for p in (1.0, 2.0, 4.0):
            norms = [lev.norm(p) for lev in mart.levels]
            assert all(n <= g.norm(p) + 1e-12 for n in norms)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError, match="power-of-two"):
            martingale(Signal.constant(12))


class TestLepingle:
    def test_deterministic(self):
        a = lepingle_stat(2, 3, 6, 25, 11)
        b = lepingle_stat(2, 3, 6, 25, 11)
        assert a == b

    def test_batching_invariance(self):
        a = lepingle_stat(2, 3, 6, 25, 11, batch=1)
        b = lepingle_stat(2, 3, 6, 25, 11, batch=7)
        assert a["max"] == pytest.approx(b["max"], rel=1e-12)

    def test_sqrt_depth_ceiling(self):
        stat = lepingle_stat(2, 3, 10, 50, 11)
        assert stat["max"] <= math.sqrt(10) + 1e-9

    def test_r_two_flagged(self):
        stat = lepingle_stat(2, 2, 5, 5, 1)
        assert not stat["bound_asserted"]
        assert stat["note"] is not None

    def test_depth_cap(self):
        with pytest.raises(ValueError, match="desk"):
            lepingle_stat(2, 3, 21, 1, 0)

    def test_quantile_order(self):
        stat = lepingle_stat(2, 3, 8, 40, 2)
        q = stat["quantiles"]
        assert q["0.5"] <= q["0.9"] <= q["1.0"] == pytest.approx(stat["max"])


class TestRealSequence:
    def test_label_validation(self):
        with pytest.raises(ValueError, match="increasing"):
            RealSequence([1.0, 2.0], labels=[3, 3])
        with pytest.raises(ValueError, match="length"):
            RealSequence([1.0, 2.0], labels=[0])
        with pytest.raises(ValueError):
            RealSequence([])

    def test_report_dict(self):
        rep = variation([0.0, 1.0], math.inf)
        d = rep.to_dict()
        assert d["kind"] == "variation" and d["parameters"]["r"] == "inf"
