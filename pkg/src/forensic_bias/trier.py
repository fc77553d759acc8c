"""How the trier of fact compounds biased expert reports.

The trier multiplies the prior guilt odds by every discipline's reported
likelihood ratio and by the contextual evidence heard directly.  The
trier applies no discipline weights and cannot see bias, so if stream j
arrives tilted by beta_j the guilt odds come out exactly
prod(beta_j) too large: per-stream tilts compound multiplicatively, they
never dilute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .contextual import BiasFactor, Provenance
from .odds import (
    LikelihoodRatio,
    OddsRatio,
    SuspectPool,
    odds_to_probability,
    uniform_prior_odds,
)
from .propagation import ChainResult

__all__ = [
    "EvidenceBundle",
    "StreamBias",
    "neutral_guilt_odds",
    "biased_guilt_odds",
    "systemic_bias_ratio",
    "bundle_from_chain",
    "case_report",
]


@dataclass(frozen=True)
class EvidenceBundle:
    """Everything the trier hears: prior pool, expert streams, direct context."""

    pool: SuspectPool
    stream_lrs: tuple[LikelihoodRatio, ...]
    context_lr: LikelihoodRatio = LikelihoodRatio(0.0)

    def __post_init__(self) -> None:
        streams = tuple(self.stream_lrs)
        if not streams:
            raise ValueError("an evidence bundle needs at least one stream")
        object.__setattr__(self, "stream_lrs", streams)

    @property
    def n_streams(self) -> int:
        return len(self.stream_lrs)


@dataclass(frozen=True)
class StreamBias:
    """The per-stream multiplicative tilt each expert report carries."""

    betas: tuple[BiasFactor, ...]

    def __post_init__(self) -> None:
        betas = tuple(self.betas)
        if not betas:
            raise ValueError("StreamBias needs at least one factor")
        object.__setattr__(self, "betas", betas)

    @property
    def total_log(self) -> float:
        total = 0.0
        for beta in self.betas:
            total += beta.log_value
        return total


def _weights(bundle: EvidenceBundle, stream_weights: Sequence[float] | None) -> tuple[float, ...]:
    if stream_weights is None:
        return (1.0,) * bundle.n_streams
    weights = tuple(float(w) for w in stream_weights)
    if len(weights) != bundle.n_streams:
        raise ValueError(
            f"{len(weights)} weights for {bundle.n_streams} streams"
        )
    if any(not math.isfinite(w) or w < 0.0 for w in weights):
        raise ValueError(f"stream weights must be finite and nonnegative, got {weights!r}")
    return weights


def neutral_guilt_odds(
    bundle: EvidenceBundle, stream_weights: Sequence[float] | None = None
) -> OddsRatio:
    """Guilt odds from unbiased reports: prior * prod(LR_j) * context.

    `stream_weights` exponentiates each stream's LR before compounding
    (1.0 recovers the plain product); the default trier weighs nothing.
    """
    weights = _weights(bundle, stream_weights)
    total = uniform_prior_odds(bundle.pool).log_value
    for w, lr in zip(weights, bundle.stream_lrs):
        total += w * lr.log_value
    total += bundle.context_lr.log_value
    if not math.isfinite(total):
        raise OverflowError("guilt log-odds overflowed")
    return OddsRatio(total)


def biased_guilt_odds(
    bundle: EvidenceBundle,
    bias: StreamBias,
    stream_weights: Sequence[float] | None = None,
) -> OddsRatio:
    """Guilt odds when stream j arrives tilted by beta_j."""
    if len(bias.betas) != bundle.n_streams:
        raise ValueError(
            f"{len(bias.betas)} bias factors for {bundle.n_streams} streams"
        )
    weights = _weights(bundle, stream_weights)
    total = uniform_prior_odds(bundle.pool).log_value
    for w, lr, beta in zip(weights, bundle.stream_lrs, bias.betas):
        total += w * (lr.log_value + beta.log_value)
    total += bundle.context_lr.log_value
    if not math.isfinite(total):
        raise OverflowError("guilt log-odds overflowed")
    return OddsRatio(total)


def systemic_bias_ratio(
    bundle: EvidenceBundle,
    bias: StreamBias,
    stream_weights: Sequence[float] | None = None,
) -> BiasFactor:
    """biased / neutral guilt odds; the product of the betas when unweighted."""
    ratio = (
        biased_guilt_odds(bundle, bias, stream_weights).log_value
        - neutral_guilt_odds(bundle, stream_weights).log_value
    )
    return BiasFactor(ratio, Provenance.COMPOSITE)


def bundle_from_chain(
    chain: ChainResult, context_lr: LikelihoodRatio = LikelihoodRatio(0.0)
) -> tuple[EvidenceBundle, StreamBias]:
    """Treat each chain analyst as one expert stream before the trier."""
    bundle = EvidenceBundle(
        pool=chain.pool,
        stream_lrs=tuple(r.neutral_lr for r in chain.reports),
        context_lr=context_lr,
    )
    bias = StreamBias(tuple(r.ledger.total for r in chain.reports))
    return bundle, bias


def case_report(
    bundle: EvidenceBundle,
    bias: StreamBias,
    stream_weights: Sequence[float] | None = None,
) -> dict:
    """JSON-ready account of one case: inputs, both verdict odds, the gap."""
    neutral = neutral_guilt_odds(bundle, stream_weights)
    biased = biased_guilt_odds(bundle, bias, stream_weights)
    ratio = systemic_bias_ratio(bundle, bias, stream_weights)
    return {
        "pool_size": bundle.pool.n,
        "prior_odds": uniform_prior_odds(bundle.pool).linear,
        "context_lr": bundle.context_lr.linear,
        "streams": [
            {
                "stream": i + 1,
                "neutral_lr": lr.linear,
                "beta": beta.linear,
                "reported_lr": math.exp(lr.log_value + beta.log_value),
            }
            for i, (lr, beta) in enumerate(zip(bundle.stream_lrs, bias.betas))
        ],
        "neutral_guilt_odds": neutral.linear,
        "biased_guilt_odds": biased.linear,
        "neutral_guilt_probability": odds_to_probability(neutral).value,
        "biased_guilt_probability": odds_to_probability(biased).value,
        "systemic_bias_ratio": ratio.linear,
    }
