import numpy as np
import pytest

from circle_lab._util import substream
from circle_lab.arcs import DyadicScale, ReducedFraction, canonical_fractions, wrap_signed
from circle_lab.expsums import weyl_multiplier_grid
from circle_lab.multipliers import (
    MultiplierOp,
    PipelineConfig,
    approx_average_op,
    arc_split,
    eta,
    eta_at_scale,
    factorization_gap,
    identity_op,
    kernel_l1_bound,
    l2_operator_norm,
    lp_norm_probe,
    multiplier_apply,
    project,
    project_dyadic,
    projection_op,
    projection_symbol,
)
from circle_lab.polyavg import (
    IntPolynomial,
    Signal,
    average_linear,
    signal_from_spectrum,
    spectrum,
)

SQUARE = IntPolynomial((0, 0, 1))


def random_signal(q, seed, real=False):
    rng = substream(seed)
    vals = rng.standard_normal(q)
    if not real:
        vals = vals + 1j * rng.standard_normal(q)
    return Signal(q, vals)


def signal_supported_near_centers(q, level, halfwidth, seed):
    """Random spectrum living within `halfwidth` of the level-l fractions."""
    rng = substream(seed)
    xs = np.arange(q) / q
    centers = np.array([fr.value for fr in canonical_fractions(2.0**level)])
    dist = np.abs(wrap_signed(xs[:, None] - centers[None, :])).min(axis=1)
    sel = dist <= halfwidth
    spec = np.zeros(q, dtype=np.complex128)
    spec[sel] = rng.standard_normal(int(sel.sum())) + 1j * rng.standard_normal(
        int(sel.sum())
    )
    return signal_from_spectrum(q, spec), sel


class TestEta:
    def test_flat_and_vanishing(self):
        assert eta(0.2) == 1.0
        assert eta(0.25) == 1.0
        assert eta(0.5) == 0.0
        assert eta(0.6) == 0.0

    def test_even(self):
        for x in (0.1, 0.3, 0.45):
            assert eta(-x) == eta(x)

    def test_range_and_monotone_band(self):
        xs = np.linspace(0.25, 0.5, 200)
        vals = eta(xs)
        assert ((vals >= 0.0) & (vals <= 1.0)).all()
        assert (np.diff(vals) <= 1e-12).all()

    def test_vectorized_matches_scalar(self):
        xs = np.array([-0.6, -0.3, 0.0, 0.26, 0.49])
        assert np.allclose(eta(xs), [eta(float(x)) for x in xs])

    def test_scaled(self):
        cut = eta_at_scale(-3)
        assert cut(np.array([2.0**-5]))[0] == 1.0
        assert cut(np.array([2.0**-3]))[0] == 0.0


class TestProject:
    def test_constant_unchanged(self):
        f = Signal.constant(64, 2.0 - 1j)
        out = project(f, 4, 2**-8)
        assert np.allclose(out.values, f.values, atol=1e-12)

    def test_wide_bump_is_identity(self):
        f = random_signal(128, 1)
        out = project(f, 1, 2)
        assert (out - f).norm(2) <= 1e-12 * f.norm(2)

    def test_l2_contraction(self):
        f = random_signal(512, 2)
        out = project(f, 4, 2**-10)
        assert out.norm(2) <= f.norm(2)

    def test_symbol_real_even(self):
        sym = projection_symbol(256, 4, 2**-6)
        assert np.all(sym >= 0) and np.all(sym <= 1 + 1e-12)
        assert np.allclose(sym[1:], sym[1:][::-1])

    def test_support_confinement(self):
        q, l, m = 512, 3, -8
        f = random_signal(q, 3)
        out = project_dyadic(f, DyadicScale(l, m))
        xs = np.arange(q) / q
        centers = np.array([fr.value for fr in canonical_fractions(2.0**l)])
        dist = np.abs(wrap_signed(xs[:, None] - centers[None, :])).min(axis=1)
        outside = dist > 2.0 ** (m - 1)
        assert np.abs(spectrum(out)[outside]).max() <= 1e-12 * f.norm(2)


class TestProjectDyadic:
    def test_reproduction_on_deep_support(self):
        q, l = 512, 2
        m = -2 * l - 2
        f, sel = signal_supported_near_centers(q, l, 2.0 ** (m - 2), 4)
        assert sel.any()
        out = project_dyadic(f, DyadicScale(l, m))
        assert (out - f).norm(2) <= 1e-10 * max(f.norm(2), 1e-30)

    def test_annihilation_off_support(self):
        q, l, m = 512, 2, -6
        rng = substream(5)
        xs = np.arange(q) / q
        centers = np.array([fr.value for fr in canonical_fractions(2.0**l)])
        dist = np.abs(wrap_signed(xs[:, None] - centers[None, :])).min(axis=1)
        spec = np.zeros(q, dtype=np.complex128)
        far = dist > 2.0 ** (m - 1)
        spec[far] = rng.standard_normal(int(far.sum()))
        f = signal_from_spectrum(q, spec)
        out = project_dyadic(f, DyadicScale(l, m))
        assert out.norm(2) <= 1e-10 * f.norm(2)

    def test_shell_is_difference(self):
        f = random_signal(256, 6)
        scale = DyadicScale(3, -8)
        shell = project_dyadic(f, scale, shell=True)
        full = project_dyadic(f, scale)
        lower = project_dyadic(f, DyadicScale(2, -8))
        assert (shell - (full - lower)).norm(2) <= 1e-12 * f.norm(2)

    def test_self_adjoint(self):
        q = 256
        f, g = random_signal(q, 7), random_signal(q, 8)
        scale = DyadicScale(2, -6)
        pf, pg = project_dyadic(f, scale), project_dyadic(g, scale)
        lhs = np.vdot(g.values, pf.values)
        rhs = np.vdot(pg.values, f.values)
        assert abs(lhs - rhs) <= 1e-10 * f.norm(2) * g.norm(2)


class TestMultiplierOp:
    def test_identity(self):
        f = random_signal(64, 9)
        out = multiplier_apply(f, identity_op())
        assert (out - f).norm(2) <= 1e-12 * f.norm(2)

    def test_projection_op_reproduces_project(self):
        f = random_signal(128, 10)
        op = projection_op(4, 2**-7)
        a = multiplier_apply(f, op)
        b = project(f, 4, 2**-7)
        assert (a - b).norm(2) <= 1e-12 * f.norm(2)

    def test_weighted_symbol(self):
        op = MultiplierOp(
            (ReducedFraction(0, 1),),
            {ReducedFraction(0, 1): 2.0},
            lambda x: eta(np.asarray(x) / 0.25),
        )
        assert l2_operator_norm(op, 64) == pytest.approx(2.0)

    def test_needs_frequencies(self):
        with pytest.raises(ValueError):
            MultiplierOp((), None, lambda x: x)

    def test_support_halfwidth_skips_far_offsets(self):
        calls = []

        def base(x):
            calls.append(np.abs(x).max())
            return np.ones_like(x)

        op = MultiplierOp((ReducedFraction(0, 1),), None, base, support_halfwidth=0.1)
        op.symbol_on_grid(64)
        assert calls and max(calls) <= 0.1


class TestOperatorNorms:
    def test_identity_norm(self):
        assert l2_operator_norm(identity_op(), 32) == pytest.approx(1.0)

    def test_disjoint_projection_contracts(self):
        assert l2_operator_norm(projection_op(4, 2**-8), 256) <= 1.0 + 1e-12

    def test_probe_identity(self):
        assert lp_norm_probe(identity_op(), 4.0, 64, 2, 0) == pytest.approx(1.0, abs=1e-12)

    def test_probe_consistent_with_l2(self):
        op = projection_op(3, 2**-6)
        probe = lp_norm_probe(op, 2.0, 128, 4, 1)
        assert probe <= l2_operator_norm(op, 128) + 1e-9

    def test_probe_below_kernel_l1(self):
        op = projection_op(3, 2**-6)
        for p in (1.5, 2.0, 4.0):
            probe = lp_norm_probe(op, p, 128, 3, 2)
            assert probe <= kernel_l1_bound(op, 128) + 1e-9

    def test_growth_curve_below_crude_bound(self):
        p = 4.0
        for level in range(0, 6):
            m = -6 * (level + 1) * 4
            op = projection_op(2.0**level, 2.0**m)
            probe = lp_norm_probe(op, p, 512, 2, 17, ascent_steps=6)
            assert probe <= 2.0 ** (2 * level) * 4.0

    def test_probe_validation(self):
        with pytest.raises(ValueError):
            lp_norm_probe(identity_op(), 4.0, 16, 0, 0)
        with pytest.raises(ValueError):
            lp_norm_probe(identity_op(), 1.0, 16, 1, 0)


class TestPipelineConfig:
    def test_desk_defaults_valid(self):
        cfg = PipelineConfig.desk(degree=2)
        assert cfg.p0 == 4 and cfg.tau == 2.0
        assert 0 < cfg.alpha < 1.0 / (1_000_000 * 2 * 4)

    def test_alpha_range_enforced(self):
        with pytest.raises(ValueError, match="alpha"):
            PipelineConfig(alpha=1e-3, c0=64, p0=4, degree=2, tau=2.0)

    def test_p0_must_be_even(self):
        with pytest.raises(ValueError, match="p0"):
            PipelineConfig(alpha=1e-9, c0=64, p0=3, degree=2, tau=2.0)

    def test_tau_above_one(self):
        with pytest.raises(ValueError, match="tau"):
            PipelineConfig(alpha=1e-9, c0=64, p0=4, degree=2, tau=1.0)

    def test_scales(self):
        cfg = PipelineConfig.desk(degree=2)
        assert cfg.low_scale(4096) == 0
        assert cfg.high_scale(4096) == 12
        assert cfg.scale_at(4096) == DyadicScale(0, -24)


class TestArcSplit:
    def test_exact_additivity(self):
        f = random_signal(1024, 11)
        cfg = PipelineConfig.desk(degree=2)
        major, minor, report = arc_split(f, SQUARE, 128, cfg)
        total = average_linear(SQUARE, 128, f)
        assert (major + minor - total).norm(2) <= 1e-9 * total.norm(2)

    def test_constant_has_no_minor_part(self):
        f = Signal.constant(256, 1.5)
        cfg = PipelineConfig.desk(degree=2)
        _, minor, report = arc_split(f, SQUARE, 64, cfg)
        assert minor.norm(2) <= 1e-10
        assert report["minor_ratio"]["2.0"] <= 1e-10

    def test_spectrum_off_arcs_goes_entirely_minor(self):
        q = 2048
        cfg = PipelineConfig.desk(degree=2)
        n = 256
        scale = cfg.scale_at(n)
        rng = substream(12)
        xs = np.arange(q) / q
        centers = np.array(
            [fr.value for fr in canonical_fractions(2.0**scale.l)]
        )
        dist = np.abs(wrap_signed(xs[:, None] - centers[None, :])).min(axis=1)
        far = dist > 2.0 ** (scale.m - 1)
        spec = np.zeros(q, dtype=np.complex128)
        spec[far] = rng.standard_normal(int(far.sum()))
        f = signal_from_spectrum(q, spec)
        major, minor, report = arc_split(f, SQUARE, n, cfg)
        assert major.norm(2) <= 1e-10 * f.norm(2)
        grid_sup = float(np.abs(weyl_multiplier_grid(SQUARE, n, q)[far]).max())
        assert report["l2_ratio"] <= grid_sup + 1e-9

    def test_floor_enforced(self):
        cfg = PipelineConfig.desk(degree=2, c0=128)
        with pytest.raises(ValueError, match="c0"):
            arc_split(random_signal(64, 13), SQUARE, 64, cfg)

    def test_degree_mismatch(self):
        cfg = PipelineConfig.desk(degree=3)
        with pytest.raises(ValueError, match="degree"):
            arc_split(random_signal(64, 14), SQUARE, 64, cfg)


class TestShellVanishing:
    def test_disjoint_when_cuts_are_narrow(self):
        from circle_lab.multipliers import shell_vanishing_overlap

        assert shell_vanishing_overlap(3, -9, 2, -7) == 0.0

    def test_overlap_when_lower_cut_is_wide(self):
        from circle_lab.multipliers import shell_vanishing_overlap

        assert shell_vanishing_overlap(3, -9, 2, -4) > 0.0

    def test_shell_meets_its_own_level(self):
        from circle_lab.multipliers import shell_vanishing_overlap

        assert shell_vanishing_overlap(2, -9, 2, -9) > 0.0


class TestApproximationOperators:
    def test_matches_average_of_projection(self):
        q, n, level, high = 2**12, 2**7, 2, 5
        f = random_signal(q, 15)
        op = approx_average_op(SQUARE, n, level, high)
        lhs = multiplier_apply(f, op)
        rhs = average_linear(SQUARE, n, project_dyadic(f, DyadicScale(level, -2 * high)))
        # budget: the rational-approximation bound at M = 2^(d*high), with the
        # empirical grid constant from the residual sweep (about 1/2) doubled
        budget = 2.0**level * (n / 2.0 ** (2 * high) + 1.0 / n)
        assert (lhs - rhs).norm(2) <= budget * f.norm(2)

    def test_factorization_identity(self):
        q = 2**12
        f = random_signal(q, 16)
        gap = factorization_gap(f, SQUARE, 2**7, level=2, high_scale=5, narrow_scale=9)
        assert gap <= 1e-9 * f.norm(2)

    def test_factorization_shell_zero(self):
        q = 2**10
        f = random_signal(q, 17)
        gap = factorization_gap(f, SQUARE, 2**6, level=0, high_scale=5, narrow_scale=8)
        assert gap <= 1e-9 * f.norm(2)
