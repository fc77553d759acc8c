"""The conviction feedback loop on an analyst's prevalence belief.

An analyst holds a Beta belief about how often actual sources carry some
trait and updates it conjugately after every adjudicated case.  Under a
truthful court the observed sources are real sources, so the belief
converges to the true rate.  Under a biased court a fraction of
convictions are wrongful and trait-skewed: those cases feed distorted
observations back into the belief, which then converges to the wrong
place, and more slowly toward truth than a clean record would.

Both regimes consume the random stream identically (two uniforms per
case), so running them on generators with the same seed compares them
under common random numbers; a biased regime with a zero wrongful rate
reproduces the truthful run bit for bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .seeding import substream

__all__ = [
    "FeedbackKind",
    "FeedbackRegime",
    "BetaPrior",
    "DEFAULT_PRIOR",
    "conjugate_update",
    "Trajectory",
    "simulate_feedback",
    "convergence_gap",
    "PairedFeedbackResult",
    "run_paired_feedback",
]


class FeedbackKind(Enum):
    TRUTHFUL = "truthful"
    BIASED = "biased"


@dataclass(frozen=True)
class FeedbackRegime:
    """How adjudicated cases are generated.

    wrongful_rate is the share of convictions that are wrongful; in those
    cases the trait appears at min(1, trait_skew * true rate) instead of
    the true rate.  A truthful regime has no wrongful convictions.
    """

    kind: FeedbackKind
    wrongful_rate: float = 0.0
    trait_skew: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.kind, FeedbackKind):
            raise ValueError(f"kind must be a FeedbackKind, got {self.kind!r}")
        rate, skew = float(self.wrongful_rate), float(self.trait_skew)
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"wrongful_rate must lie in [0, 1], got {rate!r}")
        if not skew > 0.0 or not np.isfinite(skew):
            raise ValueError(f"trait_skew must be positive and finite, got {skew!r}")
        if self.kind is FeedbackKind.TRUTHFUL and (rate != 0.0 or skew != 1.0):
            raise ValueError("a truthful regime cannot have wrongful convictions or skew")
        object.__setattr__(self, "wrongful_rate", rate)
        object.__setattr__(self, "trait_skew", skew)

    @classmethod
    def truthful(cls) -> "FeedbackRegime":
        return cls(FeedbackKind.TRUTHFUL)

    @classmethod
    def biased(cls, wrongful_rate: float = 0.06, trait_skew: float = 2.0) -> "FeedbackRegime":
        return cls(FeedbackKind.BIASED, wrongful_rate, trait_skew)


@dataclass(frozen=True)
class BetaPrior:
    """Beta(a, b) belief over a rate; mean a / (a + b)."""

    a: float
    b: float

    def __post_init__(self) -> None:
        a, b = float(self.a), float(self.b)
        if not (a > 0.0 and b > 0.0 and np.isfinite(a) and np.isfinite(b)):
            raise ValueError(f"Beta parameters must be positive and finite, got a={a!r} b={b!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def mean(self) -> float:
        return self.a / (self.a + self.b)


DEFAULT_PRIOR = BetaPrior(12.0, 8.0)


def conjugate_update(prior: BetaPrior, trait_observed: bool) -> BetaPrior:
    """One Bernoulli observation: increment a on a trait, b otherwise."""
    if trait_observed:
        return BetaPrior(prior.a + 1.0, prior.b)
    return BetaPrior(prior.a, prior.b + 1.0)


@dataclass(frozen=True)
class Trajectory:
    prior: BetaPrior
    alpha_true: float
    traits: tuple[bool, ...]
    posterior_means: tuple[float, ...]  # after observation 1, 2, ..., n

    @property
    def n_obs(self) -> int:
        return len(self.traits)

    @property
    def final(self) -> BetaPrior:
        k = sum(self.traits)
        return BetaPrior(self.prior.a + k, self.prior.b + (self.n_obs - k))


def _validate_alpha(alpha_true: float) -> float:
    alpha_true = float(alpha_true)
    if not 0.0 < alpha_true < 1.0:
        raise ValueError(f"alpha_true must lie strictly inside (0, 1), got {alpha_true!r}")
    return alpha_true


def simulate_feedback(
    regime: FeedbackRegime,
    alpha_true: float,
    n_obs: int = 100,
    prior: BetaPrior = DEFAULT_PRIOR,
    *,
    rng: np.random.Generator,
) -> Trajectory:
    """Run one belief trajectory through n_obs adjudicated cases."""
    alpha_true = _validate_alpha(alpha_true)
    if n_obs < 1:
        raise ValueError(f"n_obs must be >= 1, got {n_obs!r}")
    skewed = regime.trait_skew * alpha_true
    if regime.kind is FeedbackKind.BIASED and skewed > 1.0:
        warnings.warn(
            f"trait_skew * alpha_true = {skewed!r} exceeds 1; clamping the "
            "wrongful-case trait rate to 1",
            RuntimeWarning,
            stacklevel=2,
        )
        skewed = 1.0
    # Fixed stream layout: one uniform for the wrongful draw, one for the
    # trait, for every case in both regimes.
    u_wrongful = rng.random(n_obs)
    u_trait = rng.random(n_obs)
    wrongful = u_wrongful < regime.wrongful_rate
    p_trait = np.where(wrongful, skewed, alpha_true)
    traits = u_trait < p_trait
    steps = np.arange(1, n_obs + 1, dtype=float)
    means = (prior.a + np.cumsum(traits)) / (prior.a + prior.b + steps)
    return Trajectory(
        prior=prior,
        alpha_true=alpha_true,
        traits=tuple(bool(t) for t in traits),
        posterior_means=tuple(float(m) for m in means),
    )


def convergence_gap(trajectory: Trajectory, alpha_true: float | None = None) -> float:
    """Absolute distance between the final posterior mean and the true rate."""
    target = trajectory.alpha_true if alpha_true is None else _validate_alpha(alpha_true)
    return abs(trajectory.posterior_means[-1] - target)


@dataclass(frozen=True)
class PairedFeedbackResult:
    """Final posterior means from truthful/biased pairs sharing each seed."""

    alpha_true: float
    n_obs: int
    truthful_means: tuple[float, ...]
    biased_means: tuple[float, ...]

    @property
    def truthful_gaps(self) -> tuple[float, ...]:
        return tuple(abs(m - self.alpha_true) for m in self.truthful_means)

    @property
    def biased_gaps(self) -> tuple[float, ...]:
        return tuple(abs(m - self.alpha_true) for m in self.biased_means)

    @property
    def mean_truthful_gap(self) -> float:
        return float(np.mean(self.truthful_gaps))

    @property
    def mean_biased_gap(self) -> float:
        return float(np.mean(self.biased_gaps))


def run_paired_feedback(
    n_seeds: int = 1000,
    alpha_true: float = 0.5,
    n_obs: int = 100,
    prior: BetaPrior = DEFAULT_PRIOR,
    biased: FeedbackRegime | None = None,
    *,
    master_seed: int,
) -> PairedFeedbackResult:
    """Replicate truthful and biased runs under common random numbers.

    Replicate i replays substream(master_seed, i) for both regimes, so
    every difference between the paired trajectories is the regime's
    doing, not the draw's.
    """
    if n_seeds < 1:
        raise ValueError(f"n_seeds must be >= 1, got {n_seeds!r}")
    if biased is None:
        biased = FeedbackRegime.biased()
    truthful = FeedbackRegime.truthful()
    t_means = []
    b_means = []
    for i in range(n_seeds):
        t = simulate_feedback(truthful, alpha_true, n_obs, prior, rng=substream(master_seed, i))
        b = simulate_feedback(biased, alpha_true, n_obs, prior, rng=substream(master_seed, i))
        t_means.append(t.posterior_means[-1])
        b_means.append(b.posterior_means[-1])
    return PairedFeedbackResult(
        alpha_true=float(alpha_true),
        n_obs=n_obs,
        truthful_means=tuple(t_means),
        biased_means=tuple(b_means),
    )
