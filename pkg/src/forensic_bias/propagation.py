"""Bias propagation along a chain of analysts on one case.

Each of k analysts examines an independent evidence stream for the same
case and reports posterior odds.  Every analyst's reported likelihood
ratio is tilted by six multiplicative terms, recorded in a ledger:

    impute         direct: filling in missing evidence toward the exemplar
    context        direct: exposure to a task-irrelevant case trait
    peer           direct: a constant conformity pull
    tilde_impute   history: imputation amplified by earlier reports
    tilde_context  history: context amplified by earlier reports
    tilde_peer     history: conformity growing with supportive reports

CASCADE mode applies only the direct terms, so analysts distort
independently.  SNOWBALL mode also applies the history terms, so each
report feeds the next analyst's distortion and the tilt compounds along
the chain.  At k = 1 there is no history and the two modes coincide
exactly.

The history handed to the tilde terms is, by default, each predecessor's
evidence contribution: reported posterior odds divided by the shared
prior, i.e. the reported LR as odds relative to an even prior
(peer_history="contribution").  Passing peer_history="posterior" records
raw reported posterior odds instead; with a small prior (say 1/10) those
rarely clear 1, which mutes the history terms and makes snowball collapse
onto cascade.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .contextual import BiasFactor, BiasLedger, Provenance, apply_bias, race_example_delta
from .fingerprints import CellAgreementModel
from .odds import LikelihoodRatio, OddsRatio, SuspectPool, posterior_odds, uniform_prior_odds
from .seeding import substream

__all__ = [
    "ChainMode",
    "HistoryFn",
    "BiasProfile",
    "tilde_peer_count",
    "cascade_delta",
    "AnalystReport",
    "ChainResult",
    "run_chain",
    "run_chain_pair",
    "ChainRecord",
    "IndexSummary",
    "PropagationStudy",
    "monte_carlo_chains",
]


class ChainMode(Enum):
    CASCADE = "cascade"
    SNOWBALL = "snowball"


HistoryFn = Callable[[tuple[OddsRatio, ...]], BiasFactor]


def tilde_peer_count(history: Sequence[OddsRatio]) -> BiasFactor:
    """Conformity factor 1 + (number of prior reports with odds >= 1)."""
    supportive = sum(1 for h in history if h.log_value >= 0.0)
    return BiasFactor.from_linear(1.0 + supportive, Provenance.PEER)


def _unit_history(provenance: Provenance) -> HistoryFn:
    def fn(history: tuple[OddsRatio, ...]) -> BiasFactor:
        return BiasFactor.unit(provenance)

    return fn


@dataclass(frozen=True)
class BiasProfile:
    """The six per-analyst tilt terms.

    Direct terms may depend on the analyst's own missing share and the
    case trait; history terms see the tuple of earlier reports.
    """

    delta_impute: Callable[[float, bool], BiasFactor]
    delta_context: Callable[[bool], BiasFactor]
    delta_peer: BiasFactor
    tilde_impute: HistoryFn
    tilde_context: HistoryFn
    tilde_peer: HistoryFn

    @classmethod
    def standard(cls, trait_prob: float = 0.15) -> "BiasProfile":
        """The profile used by the chain experiments.

        Imputation tilts by 1 + missing_share (+0.5 more on trait cases);
        context tilts like an analyst doubling a rare trait's source-side
        rate; the only active history term is the conformity count.
        """

        def delta_impute(missing_share: float, trait: bool) -> BiasFactor:
            return BiasFactor.from_linear(
                1.0 + missing_share + (0.5 if trait else 0.0), Provenance.IMPUTE
            )

        def delta_context(trait: bool) -> BiasFactor:
            return race_example_delta(trait_prob, trait)

        return cls(
            delta_impute=delta_impute,
            delta_context=delta_context,
            delta_peer=BiasFactor.unit(Provenance.PEER),
            tilde_impute=_unit_history(Provenance.IMPUTE),
            tilde_context=_unit_history(Provenance.CONTEXTUAL),
            tilde_peer=tilde_peer_count,
        )

    @classmethod
    def unbiased(cls) -> "BiasProfile":
        """All six terms unit: reports reproduce neutral odds exactly."""
        return cls(
            delta_impute=lambda share, trait: BiasFactor.unit(Provenance.IMPUTE),
            delta_context=lambda trait: BiasFactor.unit(Provenance.CONTEXTUAL),
            delta_peer=BiasFactor.unit(Provenance.PEER),
            tilde_impute=_unit_history(Provenance.IMPUTE),
            tilde_context=_unit_history(Provenance.CONTEXTUAL),
            tilde_peer=_unit_history(Provenance.PEER),
        )


def cascade_delta(*factors: BiasFactor) -> BiasFactor:
    """Product of one analyst's direct tilt terms."""
    total = 0.0
    for f in factors:
        total += f.log_value
    return BiasFactor(total, Provenance.CASCADE)


@dataclass(frozen=True)
class AnalystReport:
    index: int  # 1-based position in the chain
    match: bool
    missing_share: float
    neutral_lr: LikelihoodRatio
    reported_lr: LikelihoodRatio
    neutral_odds: OddsRatio
    reported_odds: OddsRatio
    ledger: BiasLedger

    @property
    def bias_ratio(self) -> float:
        return float(np.exp(self.reported_odds.log_value - self.neutral_odds.log_value))


@dataclass(frozen=True)
class ChainResult:
    mode: ChainMode
    pool: SuspectPool
    same_source: bool
    trait: bool
    reports: tuple[AnalystReport, ...]

    @property
    def bias_ratios(self) -> tuple[float, ...]:
        return tuple(r.bias_ratio for r in self.reports)


@dataclass(frozen=True)
class _ChainDraws:
    trait: bool
    missing_shares: tuple[float, ...]
    matches: tuple[bool, ...]


_LEDGER_ORDER = ("impute", "context", "peer", "tilde_impute", "tilde_context", "tilde_peer")


def _draw_chain(
    rng: np.random.Generator,
    k: int,
    trait_prob: float,
    model: CellAgreementModel,
    same_source: bool,
    missing_share: float | None,
) -> _ChainDraws:
    # Draw order is part of the reproducibility contract: trait, then
    # missing shares (only when random), then the k match indicators.
    trait = bool(rng.random() < trait_prob)
    if missing_share is None:
        shares = tuple(float(s) for s in rng.random(k) * 0.5)
    else:
        shares = (float(missing_share),) * k
    p_agree = model.p_same if same_source else model.p_diff
    matches = tuple(bool(m) for m in (rng.random(k) < p_agree))
    return _ChainDraws(trait=trait, missing_shares=shares, matches=matches)


def _evaluate_chain(
    mode: ChainMode,
    draws: _ChainDraws,
    pool: SuspectPool,
    model: CellAgreementModel,
    profile: BiasProfile,
    same_source: bool,
    peer_history: str,
) -> ChainResult:
    prior = uniform_prior_odds(pool)
    lr_match = LikelihoodRatio.from_linear(model.p_same / model.p_diff)
    lr_mismatch = LikelihoodRatio.from_linear((1.0 - model.p_same) / (1.0 - model.p_diff))
    history: tuple[OddsRatio, ...] = ()
    snowball = mode is ChainMode.SNOWBALL
    reports = []
    for j, (match, share) in enumerate(zip(draws.matches, draws.missing_shares), start=1):
        neutral_lr = lr_match if match else lr_mismatch
        factors = {
            "impute": profile.delta_impute(share, draws.trait),
            "context": profile.delta_context(draws.trait),
            "peer": profile.delta_peer,
            "tilde_impute": profile.tilde_impute(history)
            if snowball
            else BiasFactor.unit(Provenance.IMPUTE),
            "tilde_context": profile.tilde_context(history)
            if snowball
            else BiasFactor.unit(Provenance.CONTEXTUAL),
            "tilde_peer": profile.tilde_peer(history)
            if snowball
            else BiasFactor.unit(Provenance.PEER),
        }
        ledger = BiasLedger()
        reported_lr = neutral_lr
        for label in _LEDGER_ORDER:
            ledger = ledger.add(label, factors[label])
            reported_lr = apply_bias(reported_lr, factors[label])
        neutral = posterior_odds(prior, neutral_lr)
        reported = posterior_odds(prior, reported_lr)
        reports.append(
            AnalystReport(
                index=j,
                match=match,
                missing_share=share,
                neutral_lr=neutral_lr,
                reported_lr=reported_lr,
                neutral_odds=neutral,
                reported_odds=reported,
                ledger=ledger,
            )
        )
        if peer_history == "contribution":
            history = history + (OddsRatio(reported_lr.log_value),)
        else:
            history = history + (reported,)
    return ChainResult(
        mode=mode,
        pool=pool,
        same_source=same_source,
        trait=draws.trait,
        reports=tuple(reports),
    )


def _check_chain_args(
    k: int, trait_prob: float, missing_share: float | None, peer_history: str
) -> None:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k!r}")
    if not 0.0 <= trait_prob <= 1.0:
        raise ValueError(f"trait_prob must lie in [0, 1], got {trait_prob!r}")
    if missing_share is not None and not 0.0 <= missing_share <= 1.0:
        raise ValueError(f"missing_share must lie in [0, 1], got {missing_share!r}")
    if peer_history not in ("contribution", "posterior"):
        raise ValueError(
            f"peer_history must be 'contribution' or 'posterior', got {peer_history!r}"
        )


def run_chain(
    mode: ChainMode,
    *,
    k: int = 5,
    pool: SuspectPool = SuspectPool(10),
    trait_prob: float = 0.15,
    model: CellAgreementModel = CellAgreementModel(),
    profile: BiasProfile | None = None,
    same_source: bool = True,
    missing_share: float | None = None,
    peer_history: str = "contribution",
    rng: np.random.Generator,
) -> ChainResult:
    """Run one k-analyst chain in one mode."""
    _check_chain_args(k, trait_prob, missing_share, peer_history)
    if profile is None:
        profile = BiasProfile.standard(trait_prob)
    draws = _draw_chain(rng, k, trait_prob, model, same_source, missing_share)
    return _evaluate_chain(mode, draws, pool, model, profile, same_source, peer_history)


def run_chain_pair(
    *,
    k: int = 5,
    pool: SuspectPool = SuspectPool(10),
    trait_prob: float = 0.15,
    model: CellAgreementModel = CellAgreementModel(),
    profile: BiasProfile | None = None,
    same_source: bool = True,
    missing_share: float | None = None,
    peer_history: str = "contribution",
    rng: np.random.Generator,
) -> tuple[ChainResult, ChainResult]:
    """Evaluate cascade and snowball on one shared set of draws.

    The pairing is structural: randomness is drawn once, so the two modes
    differ only in the history terms, and at k = 1 their reports are
    bit-identical.
    """
    _check_chain_args(k, trait_prob, missing_share, peer_history)
    if profile is None:
        profile = BiasProfile.standard(trait_prob)
    draws = _draw_chain(rng, k, trait_prob, model, same_source, missing_share)
    cascade = _evaluate_chain(
        ChainMode.CASCADE, draws, pool, model, profile, same_source, peer_history
    )
    snowball = _evaluate_chain(
        ChainMode.SNOWBALL, draws, pool, model, profile, same_source, peer_history
    )
    return cascade, snowball


@dataclass(frozen=True)
class ChainRecord:
    """One analyst's row in the replicated experiment."""

    mode: str
    run_id: int
    analyst_index: int
    neutral_odds: float
    reported_odds: float
    bias_ratio: float
    trait: bool
    missing_share: float


@dataclass(frozen=True)
class IndexSummary:
    mode: str
    analyst_index: int
    mean_bias_ratio: float
    q025: float
    median: float
    q975: float


@dataclass(frozen=True)
class PropagationStudy:
    n_runs: int
    k: int
    records: tuple[ChainRecord, ...]
    summaries: tuple[IndexSummary, ...]

    def records_for(self, mode: ChainMode) -> tuple[ChainRecord, ...]:
        return tuple(r for r in self.records if r.mode == mode.value)

    def mean_curve(self, mode: ChainMode) -> tuple[float, ...]:
        by_index = {s.analyst_index: s.mean_bias_ratio for s in self.summaries if s.mode == mode.value}
        return tuple(by_index[i] for i in range(1, self.k + 1))


def _records_from_chain(run_id: int, chain: ChainResult) -> list[ChainRecord]:
    return [
        ChainRecord(
            mode=chain.mode.value,
            run_id=run_id,
            analyst_index=r.index,
            neutral_odds=float(np.exp(r.neutral_odds.log_value)),
            reported_odds=float(np.exp(r.reported_odds.log_value)),
            bias_ratio=r.bias_ratio,
            trait=chain.trait,
            missing_share=r.missing_share,
        )
        for r in chain.reports
    ]


def monte_carlo_chains(
    n_runs: int = 1000,
    *,
    master_seed: int,
    threads: int = 1,
    k: int = 5,
    pool: SuspectPool = SuspectPool(10),
    trait_prob: float = 0.15,
    model: CellAgreementModel = CellAgreementModel(),
    profile: BiasProfile | None = None,
    same_source: bool = True,
    missing_share: float | None = None,
    peer_history: str = "contribution",
) -> PropagationStudy:
    """Replicate paired chains; deterministic for a given master seed.

    Replicate i draws from substream(master_seed, i) regardless of which
    thread runs it, so any thread count produces identical records.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs!r}")
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads!r}")

    def one(run_id: int) -> tuple[ChainResult, ChainResult]:
        return run_chain_pair(
            k=k,
            pool=pool,
            trait_prob=trait_prob,
            model=model,
            profile=profile,
            same_source=same_source,
            missing_share=missing_share,
            peer_history=peer_history,
            rng=substream(master_seed, run_id),
        )

    if threads == 1:
        pairs = [one(i) for i in range(n_runs)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool_:
            pairs = list(pool_.map(one, range(n_runs)))

    records: list[ChainRecord] = []
    for run_id, (cascade, snowball) in enumerate(pairs):
        records.extend(_records_from_chain(run_id, cascade))
        records.extend(_records_from_chain(run_id, snowball))

    summaries = []
    for mode in (ChainMode.CASCADE, ChainMode.SNOWBALL):
        for index in range(1, k + 1):
            ratios = np.array(
                [r.bias_ratio for r in records if r.mode == mode.value and r.analyst_index == index]
            )
            q025, median, q975 = np.percentile(ratios, [2.5, 50.0, 97.5])
            summaries.append(
                IndexSummary(
                    mode=mode.value,
                    analyst_index=index,
                    mean_bias_ratio=float(ratios.mean()),
                    q025=float(q025),
                    median=float(median),
                    q975=float(q975),
                )
            )
    return PropagationStudy(
        n_runs=n_runs, k=k, records=tuple(records), summaries=tuple(summaries)
    )
