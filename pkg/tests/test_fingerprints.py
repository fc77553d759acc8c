"""Grids, masking, imputation, match scoring, and the imputation bias factor."""

import math

import numpy as np
import pytest

from forensic_bias.contextual import Provenance
from forensic_bias.fingerprints import (
    Cell,
    CellAgreementModel,
    DEFAULT_THRESHOLDS,
    ImputationSimParams,
    LatentVector,
    MatchSummary,
    MinutiaVector,
    PrintGrid,
    SourceDecision,
    agreement_log_likelihood,
    count_matches,
    decide_source,
    delta_impute_exact,
    estimate_delta_impute,
    generate_print,
    imputation_grid_fixture,
    impute_from_reference,
    mask_missing,
    sample_delta_impute,
    source_lr,
)
from forensic_bias.seeding import substream

TOL = 1e-12

# The six-cell worked example.
X6 = MinutiaVector.from_text("...mmm")
Y6 = MinutiaVector.from_text(".m.mm.")
LATENT6 = LatentVector.from_text("??.?m.")


class TestVectors:
    def test_text_round_trip(self):
        assert "".join(c.value for c in X6.cells) == "...mmm"
        assert X6.bits == (0, 0, 0, 1, 1, 1)
        assert MinutiaVector.from_bits((0, 1, 0)).cells[1] is Cell.PRESENT

    def test_latent_counts(self):
        assert LATENT6.n_missing == 3
        assert LATENT6.missing_indices == (0, 1, 3)

    def test_minutia_vector_rejects_missing(self):
        with pytest.raises(ValueError):
            MinutiaVector.from_text("m?.")

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            MinutiaVector(())
        with pytest.raises(ValueError):
            LatentVector(())

    def test_unknown_character_rejected(self):
        with pytest.raises(ValueError, match="x"):
            MinutiaVector.from_text("m.x")

    def test_grid_shape_checked(self):
        with pytest.raises(ValueError):
            PrintGrid(2, 4, X6)
        grid = PrintGrid(2, 3, X6)
        assert grid.to_text() == "...\nmmm"
        assert PrintGrid.from_text("...\nmmm").vector == X6

    def test_ragged_grid_rejected(self):
        with pytest.raises(ValueError, match="ragged"):
            PrintGrid.from_text("..\nmmm")


class TestCountMatches:
    def test_complete_pair(self):
        summary = count_matches(X6, Y6)
        assert summary == MatchSummary(6, 4, 2, 0)

    def test_latent_pair(self):
        summary = count_matches(X6, LATENT6)
        assert summary == MatchSummary(6, 2, 1, 3)

    def test_imputed_pair(self):
        imputed = impute_from_reference(LATENT6, X6)
        assert "".join(c.value for c in imputed.cells) == "...mm."
        assert count_matches(X6, imputed) == MatchSummary(6, 5, 2, 0)

    def test_self_match(self):
        summary = count_matches(X6, X6)
        assert summary.n_correspondences == 6
        assert summary.n_matches == X6.n_minutiae

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="mismatch"):
            count_matches(X6, MinutiaVector.from_text("..m"))

    def test_latent_exemplar_rejected(self):
        with pytest.raises(ValueError, match="fully observed"):
            count_matches(LATENT6, Y6)

    def test_inconsistent_summary_rejected(self):
        with pytest.raises(ValueError):
            MatchSummary(6, 4, 5, 0)
        with pytest.raises(ValueError):
            MatchSummary(6, 5, 2, 2)


class TestImpute:
    def test_no_missing_is_identity(self):
        assert impute_from_reference(Y6, X6) == Y6

    def test_all_missing_copies_reference(self):
        latent = LatentVector.from_text("??????")
        assert impute_from_reference(latent, X6) == X6

    def test_grid_in_grid_out(self):
        grid = PrintGrid(2, 3, LATENT6)
        ref = PrintGrid(2, 3, X6)
        out = impute_from_reference(grid, ref)
        assert isinstance(out, PrintGrid)
        assert out.rows == 2

    def test_imputed_cells_agree_with_reference(self):
        rng = substream(101)
        for _ in range(200):
            ref = generate_print(rng, 4, 4, 6.0)
            mark = generate_print(rng, 4, 4, 6.0)
            latent = mask_missing(mark, 0.4, rng=rng)
            imputed = impute_from_reference(latent, ref)
            for i in latent.vector.missing_indices:
                assert imputed.vector.cells[i] is ref.vector.cells[i]
            # correspondences never drop when ambiguity resolves toward the
            # reference
            before = count_matches(ref, latent)
            after = count_matches(ref, imputed)
            assert after.n_correspondences == before.n_correspondences + before.n_missing
            assert after.n_matches >= before.n_matches


class TestDecide:
    @pytest.mark.parametrize(
        "matches, expected",
        [
            (0, SourceDecision.EXCLUSION),
            (2, SourceDecision.EXCLUSION),
            (3, SourceDecision.INCONCLUSIVE),
            (6, SourceDecision.INCONCLUSIVE),
            (7, SourceDecision.SUPPORT_SAME_SOURCE),
            (11, SourceDecision.SUPPORT_SAME_SOURCE),
            (12, SourceDecision.IDENTIFICATION),
            (40, SourceDecision.IDENTIFICATION),
        ],
    )
    def test_threshold_bands(self, matches, expected):
        summary = MatchSummary(50, matches, matches, 0)
        assert decide_source(summary) is expected

    def test_default_thresholds(self):
        assert DEFAULT_THRESHOLDS == (12, 7, 3)

    def test_bad_thresholds_rejected(self):
        summary = MatchSummary(50, 5, 5, 0)
        for bad in ((7, 7, 3), (3, 7, 12), (12, 7, -1)):
            with pytest.raises(ValueError):
                decide_source(summary, bad)

    def test_monotone_in_matches(self):
        order = [
            SourceDecision.EXCLUSION,
            SourceDecision.INCONCLUSIVE,
            SourceDecision.SUPPORT_SAME_SOURCE,
            SourceDecision.IDENTIFICATION,
        ]
        last = 0
        for m in range(0, 20):
            rank = order.index(decide_source(MatchSummary(50, m, m, 0)))
            assert rank >= last
            last = rank


class TestGenerate:
    def test_extreme_rates(self):
        rng = substream(1)
        none = generate_print(rng, 4, 5, 0.0)
        assert none.vector.n_minutiae == 0
        full = generate_print(rng, 4, 5, 20.0)
        assert full.vector.n_minutiae == 20

    def test_rate_out_of_range_rejected(self):
        rng = substream(2)
        with pytest.raises(ValueError):
            generate_print(rng, 2, 3, 7.0)
        with pytest.raises(ValueError):
            generate_print(rng, 2, 3, -1.0)

    def test_seeded_reproducibility(self):
        a = generate_print(substream(42, 0), 10, 5, 15.0)
        b = generate_print(substream(42, 0), 10, 5, 15.0)
        assert a == b

    def test_mean_minutiae_calibrated(self):
        # 10,000 independent prints: the average count sits near 15.
        counts = [
            generate_print(substream(7, i), 10, 5, 15.0).vector.n_minutiae
            for i in range(10_000)
        ]
        assert 14.7 <= float(np.mean(counts)) <= 15.3


class TestMask:
    def test_share_zero_identity(self):
        masked = mask_missing(Y6, 0.0, rng=substream(3))
        assert masked.n_missing == 0
        assert tuple(masked.cells) == Y6.cells

    def test_share_one_hides_everything(self):
        masked = mask_missing(Y6, 1.0, rng=substream(3))
        assert masked.n_missing == 6

    def test_exact_count_rounds_half_up(self):
        grid = generate_print(substream(4), 10, 5, 15.0)
        masked = mask_missing(grid, 0.25, rng=substream(5))
        assert masked.vector.n_missing == 13  # not banker's 12

    def test_exact_mode_distinct_cells(self):
        for i in range(50):
            masked = mask_missing(Y6, 0.5, rng=substream(6, i))
            assert masked.n_missing == 3

    def test_per_cell_mode_varies(self):
        counts = {
            mask_missing(Y6, 0.5, rng=substream(8, i), mode="per_cell").n_missing
            for i in range(50)
        }
        assert len(counts) > 1

    def test_visible_cells_unchanged(self):
        rng = substream(9)
        grid = generate_print(rng, 6, 6, 12.0)
        masked = mask_missing(grid, 0.3, rng=rng)
        for before, after in zip(grid.vector.cells, masked.vector.cells):
            assert after is Cell.MISSING or after is before

    def test_bad_inputs_rejected(self):
        rng = substream(10)
        with pytest.raises(ValueError):
            mask_missing(Y6, 1.5, rng=rng)
        with pytest.raises(ValueError):
            mask_missing(Y6, 0.2, rng=rng, mode="often")
        with pytest.raises(ValueError, match="already"):
            mask_missing(LATENT6, 0.2, rng=rng)


class TestAgreementModel:
    def test_defaults(self):
        model = CellAgreementModel()
        assert model.p_same == 0.5 and model.p_diff == 0.25

    @pytest.mark.parametrize("ps, pd", [(0.25, 0.5), (0.5, 0.5), (1.0, 0.25), (0.5, 0.0)])
    def test_degenerate_rejected(self, ps, pd):
        with pytest.raises(ValueError):
            CellAgreementModel(ps, pd)

    def test_log_likelihood_skips_missing(self):
        full = agreement_log_likelihood(Y6, X6, 0.5)
        assert full == pytest.approx(6 * math.log(0.5), abs=TOL)
        partial = agreement_log_likelihood(LATENT6, X6, 0.5)
        assert partial == pytest.approx(3 * math.log(0.5), abs=TOL)

    def test_source_lr_counts_agreements(self):
        # 4 agreements, 2 disagreements against (0.5, 0.25).
        lr = source_lr(Y6, X6)
        expected = (0.5 / 0.25) ** 4 * (0.5 / 0.75) ** 2
        assert lr.linear == pytest.approx(expected, rel=1e-12)


class TestDeltaImpute:
    def test_closed_form(self):
        delta = delta_impute_exact(LATENT6, X6)
        assert delta.provenance is Provenance.IMPUTE
        assert delta.linear == pytest.approx((0.5 / 0.25) ** 3, rel=1e-12)

    def test_no_missing_is_unit(self):
        assert abs(delta_impute_exact(Y6, X6).log_value) < TOL

    def test_full_mask_is_ratio_power_n(self):
        latent = LatentVector.from_text("??????")
        delta = delta_impute_exact(latent, X6)
        assert delta.linear == pytest.approx(2.0**6, rel=1e-12)

    def test_never_deflates(self):
        rng = substream(11)
        for _ in range(300):
            ref = generate_print(rng, 3, 4, 5.0)
            mark = generate_print(rng, 3, 4, 5.0)
            latent = mask_missing(mark, 0.4, rng=rng, mode="per_cell")
            assert delta_impute_exact(latent, ref).log_value >= -TOL

    def test_imputed_lr_dominates_observed(self):
        rng = substream(12)
        model = CellAgreementModel(0.7, 0.2)
        for _ in range(300):
            ref = generate_print(rng, 3, 4, 5.0)
            mark = generate_print(rng, 3, 4, 5.0)
            latent = mask_missing(mark, 0.5, rng=rng, mode="per_cell")
            imputed = impute_from_reference(latent, ref)
            assert (
                source_lr(imputed, ref, model).log_value
                >= source_lr(latent, ref, model).log_value - TOL
            )

    def test_monte_carlo_matches_binomial_mean(self):
        # Per-cell masking makes n_missing ~ Binomial(n, s), so
        # E[delta] = (1 - s + s * p_same/p_diff)^n.
        sim = ImputationSimParams(rows=2, cols=3, expected_minutiae=3.0)
        draws = sample_delta_impute(sim, 0.25, 4_000, rng=substream(13))
        expected = 1.25**6
        assert abs(draws.mean() - expected) / expected < 0.05

    def test_exact_mask_mode_is_degenerate(self):
        # n_missing is pinned at 3, so every draw is (p_same/p_diff)^3 up
        # to the rounding of the log-space round trip.
        sim = ImputationSimParams(rows=2, cols=3, expected_minutiae=3.0)
        draws = sample_delta_impute(sim, 0.5, 50, rng=substream(14), mask_mode="exact")
        assert np.all(np.abs(draws - 2.0**3) <= 1e-11)

    def test_estimate_is_mean_factor(self):
        sim = ImputationSimParams(rows=2, cols=3, expected_minutiae=3.0)
        draws = sample_delta_impute(sim, 0.25, 500, rng=substream(15))
        est = estimate_delta_impute(sim, 0.25, 500, rng=substream(15))
        assert est.linear == pytest.approx(float(draws.mean()), rel=1e-12)

    def test_bad_params_rejected(self):
        with pytest.raises(ValueError):
            ImputationSimParams(rows=0)
        with pytest.raises(ValueError):
            ImputationSimParams(expected_minutiae=51.0)
        with pytest.raises(ValueError):
            sample_delta_impute(n_reps=0, rng=substream(16))


class TestGridFixture:
    def test_counts_and_decisions(self):
        fx = imputation_grid_fixture()
        assert fx.exemplar.vector.n_minutiae == 15
        assert fx.true_mark.vector.n_minutiae == 15
        assert fx.observed.vector.n_missing == 13
        assert fx.true_summary.n_matches == 5
        assert fx.observed_summary.n_matches == 3
        assert fx.imputed_summary.n_matches == 8
        assert fx.observed_decision is SourceDecision.INCONCLUSIVE
        assert fx.imputed_decision is SourceDecision.SUPPORT_SAME_SOURCE

    def test_shapes(self):
        fx = imputation_grid_fixture()
        for grid in (fx.exemplar, fx.true_mark, fx.observed, fx.imputed):
            assert (grid.rows, grid.cols) == (10, 5)

    def test_observed_is_true_mark_smudged(self):
        fx = imputation_grid_fixture()
        for t, o in zip(fx.true_mark.vector.cells, fx.observed.vector.cells):
            assert o is Cell.MISSING or o is t
