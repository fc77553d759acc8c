"""A toy minutiae-comparison model for imputation bias.

Prints are binary grids: each cell either shows a minutia or does not.
A latent print additionally has missing cells (smudged or not lifted).
An examiner who fills missing cells by copying the suspect's exemplar
("imputation") manufactures agreement, which inflates the reported
likelihood ratio by a factor of (p_same/p_diff) per imputed cell.

Grid text format, one row per line:

    'm' minutia present, '.' absent, '?' missing

Match scoring counts cell agreements over comparable (non-missing)
cells; the source decision is taken on the number of agreeing minutiae
(cells where both prints show one), with the usual 12-point style
thresholds: >= 12 identification, >= 7 support for same source, >= 3
inconclusive, below that exclusion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Sequence, Union

import numpy as np

from .contextual import BiasFactor, Provenance
from .odds import LikelihoodRatio

__all__ = [
    "Cell",
    "MinutiaVector",
    "LatentVector",
    "PrintGrid",
    "MatchSummary",
    "SourceDecision",
    "DEFAULT_THRESHOLDS",
    "CellAgreementModel",
    "ImputationSimParams",
    "generate_print",
    "mask_missing",
    "impute_from_reference",
    "count_matches",
    "decide_source",
    "agreement_log_likelihood",
    "source_lr",
    "delta_impute_exact",
    "sample_delta_impute",
    "estimate_delta_impute",
    "GridFixture",
    "imputation_grid_fixture",
]


class Cell(Enum):
    ABSENT = "."
    PRESENT = "m"
    MISSING = "?"


_CHAR_TO_CELL = {c.value: c for c in Cell}


def _cells_from_text(text: str) -> tuple[Cell, ...]:
    cells = []
    for ch in text:
        if ch in (" ", "\n", "\r"):
            continue
        try:
            cells.append(_CHAR_TO_CELL[ch])
        except KeyError:
            raise ValueError(f"unknown grid character {ch!r}; expected one of 'm', '.', '?'")
    return tuple(cells)


@dataclass(frozen=True)
class MinutiaVector:
    """A fully observed print: every cell is PRESENT or ABSENT."""

    cells: tuple[Cell, ...]

    def __post_init__(self) -> None:
        cells = tuple(self.cells)
        if not cells:
            raise ValueError("MinutiaVector needs at least one cell")
        for i, cell in enumerate(cells):
            if not isinstance(cell, Cell):
                raise ValueError(f"cell {i} is {cell!r}, not a Cell")
            if cell is Cell.MISSING:
                raise ValueError(f"MinutiaVector cannot contain MISSING (cell {i})")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "MinutiaVector":
        return cls(tuple(Cell.PRESENT if b else Cell.ABSENT for b in bits))

    @classmethod
    def from_text(cls, text: str) -> "MinutiaVector":
        return cls(_cells_from_text(text))

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(1 if c is Cell.PRESENT else 0 for c in self.cells)

    @property
    def n_minutiae(self) -> int:
        return sum(self.bits)

    def __len__(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class LatentVector:
    """A partially observed print: cells may also be MISSING."""

    cells: tuple[Cell, ...]

    def __post_init__(self) -> None:
        cells = tuple(self.cells)
        if not cells:
            raise ValueError("LatentVector needs at least one cell")
        for i, cell in enumerate(cells):
            if not isinstance(cell, Cell):
                raise ValueError(f"cell {i} is {cell!r}, not a Cell")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_text(cls, text: str) -> "LatentVector":
        return cls(_cells_from_text(text))

    @property
    def n_missing(self) -> int:
        return sum(1 for c in self.cells if c is Cell.MISSING)

    @property
    def missing_indices(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.cells) if c is Cell.MISSING)

    def __len__(self) -> int:
        return len(self.cells)


PrintVector = Union[MinutiaVector, LatentVector]


@dataclass(frozen=True)
class PrintGrid:
    """A print vector laid out as rows x cols for display and fixtures."""

    rows: int
    cols: int
    vector: PrintVector

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid shape must be positive, got {self.rows}x{self.cols}")
        if self.rows * self.cols != len(self.vector):
            raise ValueError(
                f"{self.rows}x{self.cols} grid needs {self.rows * self.cols} cells, "
                f"got {len(self.vector)}"
            )

    @classmethod
    def from_text(cls, text: str) -> "PrintGrid":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty grid text")
        widths = {len(ln) for ln in lines}
        if len(widths) != 1:
            raise ValueError(f"ragged grid rows: widths {sorted(widths)!r}")
        cells = _cells_from_text("".join(lines))
        vector: PrintVector
        if any(c is Cell.MISSING for c in cells):
            vector = LatentVector(cells)
        else:
            vector = MinutiaVector(cells)
        return cls(len(lines), widths.pop(), vector)

    def to_text(self) -> str:
        chars = [c.value for c in self.vector.cells]
        return "\n".join(
            "".join(chars[r * self.cols : (r + 1) * self.cols]) for r in range(self.rows)
        )

    def __len__(self) -> int:
        return len(self.vector)


def _as_vector(print_like: Union[PrintGrid, PrintVector]) -> PrintVector:
    return print_like.vector if isinstance(print_like, PrintGrid) else print_like


@dataclass(frozen=True)
class MatchSummary:
    """Cell-level comparison counts between an exemplar and a print."""

    n_cells: int
    n_correspondences: int  # comparable cells that agree (both absent counts)
    n_matches: int  # agreeing cells where both show a minutia
    n_missing: int

    def __post_init__(self) -> None:
        ok = (
            0 <= self.n_matches <= self.n_correspondences
            and self.n_correspondences + self.n_missing <= self.n_cells
            and self.n_missing >= 0
        )
        if not ok:
            raise ValueError(
                f"inconsistent counts: cells={self.n_cells} correspondences="
                f"{self.n_correspondences} matches={self.n_matches} missing={self.n_missing}"
            )


class SourceDecision(Enum):
    IDENTIFICATION = "Identification"
    SUPPORT_SAME_SOURCE = "SupportSameSource"
    INCONCLUSIVE = "Inconclusive"
    EXCLUSION = "Exclusion"


DEFAULT_THRESHOLDS: tuple[int, int, int] = (12, 7, 3)


def count_matches(
    exemplar: Union[PrintGrid, MinutiaVector], print_: Union[PrintGrid, PrintVector]
) -> MatchSummary:
    """Count agreements between a complete exemplar and a (possibly latent) print.

    Missing cells are not comparable and contribute only to n_missing.
    """
    x = _as_vector(exemplar)
    y = _as_vector(print_)
    if isinstance(x, LatentVector):
        raise ValueError("the exemplar must be fully observed")
    if len(x) != len(y):
        raise ValueError(f"length mismatch: exemplar has {len(x)} cells, print has {len(y)}")
    correspondences = 0
    matches = 0
    missing = 0
    for cx, cy in zip(x.cells, y.cells):
        if cy is Cell.MISSING:
            missing += 1
        elif cx is cy:
            correspondences += 1
            if cx is Cell.PRESENT:
                matches += 1
    return MatchSummary(len(x), correspondences, matches, missing)


def decide_source(
    summary: MatchSummary, thresholds: tuple[int, int, int] = DEFAULT_THRESHOLDS
) -> SourceDecision:
    """Threshold the agreeing-minutiae count into a categorical decision."""
    t_id, t_support, t_inconclusive = thresholds
    if not t_id > t_support > t_inconclusive >= 0:
        raise ValueError(f"thresholds must be strictly decreasing and nonnegative, got {thresholds!r}")
    m = summary.n_matches
    if m >= t_id:
        return SourceDecision.IDENTIFICATION
    if m >= t_support:
        return SourceDecision.SUPPORT_SAME_SOURCE
    if m >= t_inconclusive:
        return SourceDecision.INCONCLUSIVE
    return SourceDecision.EXCLUSION


def generate_print(
    rng: np.random.Generator, rows: int = 10, cols: int = 5, expected_minutiae: float = 15.0
) -> PrintGrid:
    """Draw a print with iid cells; presence rate = expected / cell count."""
    n = rows * cols
    if n < 1:
        raise ValueError(f"grid shape must be positive, got {rows}x{cols}")
    rate = expected_minutiae / n
    if not 0.0 <= rate <= 1.0:
        raise ValueError(
            f"expected_minutiae={expected_minutiae!r} implies presence rate {rate!r} outside [0, 1]"
        )
    bits = rng.random(n) < rate
    return PrintGrid(rows, cols, MinutiaVector.from_bits(bits.tolist()))


def _round_half_up(x: float) -> int:
    # round() would take 12.5 to 12 (banker's rounding); the share contract
    # is half-up, so 0.25 of 50 cells masks 13 of them.
    return int(math.floor(x + 0.5))


def mask_missing(
    print_like: Union[PrintGrid, MinutiaVector],
    missing_share: float = 0.25,
    *,
    rng: np.random.Generator,
    mode: str = "exact",
) -> Union[PrintGrid, LatentVector]:
    """Hide a share of cells as MISSING.

    mode="exact" hides round-half-up(share * n) distinct cells chosen
    uniformly; mode="per_cell" hides each cell independently with
    probability `missing_share`.  The return type mirrors the input.
    """
    if not 0.0 <= missing_share <= 1.0:
        raise ValueError(f"missing_share must lie in [0, 1], got {missing_share!r}")
    vector = _as_vector(print_like)
    if isinstance(vector, LatentVector):
        raise ValueError("input already has missing cells")
    n = len(vector)
    if mode == "exact":
        k = _round_half_up(missing_share * n)
        hidden = set(rng.choice(n, size=k, replace=False).tolist()) if k else set()
    elif mode == "per_cell":
        hidden = {i for i, u in enumerate(rng.random(n)) if u < missing_share}
    else:
        raise ValueError(f"mode must be 'exact' or 'per_cell', got {mode!r}")
    cells = tuple(
        Cell.MISSING if i in hidden else c for i, c in enumerate(vector.cells)
    )
    latent = LatentVector(cells)
    if isinstance(print_like, PrintGrid):
        return PrintGrid(print_like.rows, print_like.cols, latent)
    return latent


def impute_from_reference(
    latent: Union[PrintGrid, LatentVector, MinutiaVector],
    reference: Union[PrintGrid, MinutiaVector],
) -> Union[PrintGrid, MinutiaVector]:
    """Fill every missing cell with the reference's cell value.

    This is the biasing move: the examiner resolves ambiguity toward the
    exemplar, so each imputed cell agrees with it by construction.
    """
    y = _as_vector(latent)
    x = _as_vector(reference)
    if isinstance(x, LatentVector):
        raise ValueError("the reference must be fully observed")
    if len(x) != len(y):
        raise ValueError(f"length mismatch: reference has {len(x)} cells, print has {len(y)}")
    cells = tuple(cx if cy is Cell.MISSING else cy for cx, cy in zip(x.cells, y.cells))
    completed = MinutiaVector(cells)
    if isinstance(latent, PrintGrid):
        return PrintGrid(latent.rows, latent.cols, completed)
    return completed


@dataclass(frozen=True)
class CellAgreementModel:
    """Per-cell agreement rates: p_same under same source, p_diff otherwise.

    Informative, non-degenerate evidence requires 0 < p_diff < p_same < 1;
    each agreeing cell then multiplies the source LR by p_same/p_diff and
    each disagreeing cell by (1-p_same)/(1-p_diff).
    """

    p_same: float = 0.5
    p_diff: float = 0.25

    def __post_init__(self) -> None:
        p_same, p_diff = float(self.p_same), float(self.p_diff)
        if not (0.0 < p_diff < p_same < 1.0):
            raise ValueError(
                f"need 0 < p_diff < p_same < 1, got p_same={p_same!r} p_diff={p_diff!r}"
            )
        object.__setattr__(self, "p_same", p_same)
        object.__setattr__(self, "p_diff", p_diff)


def agreement_log_likelihood(
    print_: Union[PrintGrid, PrintVector],
    reference: Union[PrintGrid, MinutiaVector],
    p_agree: float,
) -> float:
    """log P(print | reference) when each comparable cell agrees iid w.p. p_agree.

    Missing cells are marginalised out: they contribute a factor of one.
    """
    if not 0.0 < p_agree < 1.0:
        raise ValueError(f"p_agree must lie strictly inside (0, 1), got {p_agree!r}")
    y = _as_vector(print_)
    x = _as_vector(reference)
    if isinstance(x, LatentVector):
        raise ValueError("the reference must be fully observed")
    if len(x) != len(y):
        raise ValueError(f"length mismatch: reference has {len(x)} cells, print has {len(y)}")
    log_agree = math.log(p_agree)
    log_disagree = math.log1p(-p_agree)
    total = 0.0
    for cx, cy in zip(x.cells, y.cells):
        if cy is Cell.MISSING:
            continue
        total += log_agree if cx is cy else log_disagree
    return total


def source_lr(
    print_: Union[PrintGrid, PrintVector],
    reference: Union[PrintGrid, MinutiaVector],
    model: CellAgreementModel = CellAgreementModel(),
) -> LikelihoodRatio:
    """Likelihood ratio P(print | same source) / P(print | different source)."""
    return LikelihoodRatio(
        agreement_log_likelihood(print_, reference, model.p_same)
        - agreement_log_likelihood(print_, reference, model.p_diff)
    )


def delta_impute_exact(
    latent: Union[PrintGrid, LatentVector, MinutiaVector],
    reference: Union[PrintGrid, MinutiaVector],
    model: CellAgreementModel = CellAgreementModel(),
) -> BiasFactor:
    """Bias factor from imputing, LR(imputed) / LR(observed).

    The observed LR marginalises missing cells out; the imputed print adds
    one agreeing cell per missing cell, so the factor is exactly
    (p_same/p_diff) ** n_missing.  Complete prints give a unit factor.
    """
    imputed = impute_from_reference(latent, reference)
    log_delta = (
        source_lr(imputed, reference, model).log_value
        - source_lr(latent, reference, model).log_value
    )
    return BiasFactor(log_delta, Provenance.IMPUTE)


@dataclass(frozen=True)
class ImputationSimParams:
    """Generation settings for the imputation-bias Monte Carlo."""

    rows: int = 10
    cols: int = 5
    expected_minutiae: float = 15.0
    model: CellAgreementModel = CellAgreementModel()
    same_source: bool = True

    def __post_init__(self) -> None:
        n = self.rows * self.cols
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid shape must be positive, got {self.rows}x{self.cols}")
        if not 0.0 <= self.expected_minutiae <= n:
            raise ValueError(
                f"expected_minutiae must lie in [0, {n}], got {self.expected_minutiae!r}"
            )


def _draw_pair(
    rng: np.random.Generator, params: ImputationSimParams
) -> tuple[MinutiaVector, MinutiaVector]:
    """Draw an exemplar and a mark whose cells agree per the agreement model."""
    x = _as_vector(generate_print(rng, params.rows, params.cols, params.expected_minutiae))
    p_agree = params.model.p_same if params.same_source else params.model.p_diff
    agree = rng.random(len(x)) < p_agree
    flip = {Cell.PRESENT: Cell.ABSENT, Cell.ABSENT: Cell.PRESENT}
    cells = tuple(cx if a else flip[cx] for cx, a in zip(x.cells, agree))
    return x, MinutiaVector(cells)


def sample_delta_impute(
    params: ImputationSimParams = ImputationSimParams(),
    missing_share: float = 0.25,
    n_reps: int = 10_000,
    *,
    rng: np.random.Generator,
    mask_mode: str = "per_cell",
) -> np.ndarray:
    """Monte Carlo draws of the linear imputation bias factor.

    Each replicate draws an exemplar, a mark from the agreement model,
    and a missing mask, then evaluates LR(imputed)/LR(observed).  The
    default per-cell masking makes n_missing random, which is what gives
    the factor a nondegenerate distribution.
    """
    if n_reps < 1:
        raise ValueError(f"n_reps must be >= 1, got {n_reps!r}")
    out = np.empty(n_reps, dtype=float)
    for i in range(n_reps):
        x, y = _draw_pair(rng, params)
        latent = mask_missing(y, missing_share, rng=rng, mode=mask_mode)
        out[i] = delta_impute_exact(latent, x, params.model).linear
    return out


def estimate_delta_impute(
    params: ImputationSimParams = ImputationSimParams(),
    missing_share: float = 0.25,
    n_reps: int = 10_000,
    *,
    rng: np.random.Generator,
    mask_mode: str = "per_cell",
) -> BiasFactor:
    """Mean imputation bias factor over Monte Carlo replicates."""
    draws = sample_delta_impute(params, missing_share, n_reps, rng=rng, mask_mode=mask_mode)
    return BiasFactor.from_linear(float(draws.mean()), Provenance.IMPUTE)


@dataclass(frozen=True)
class GridFixture:
    """The committed worked example: one exemplar, the true mark, the
    observed (smudged) mark, and everything imputation changes."""

    exemplar: PrintGrid
    true_mark: PrintGrid
    observed: PrintGrid
    imputed: PrintGrid
    true_summary: MatchSummary
    observed_summary: MatchSummary
    imputed_summary: MatchSummary
    observed_decision: SourceDecision
    imputed_decision: SourceDecision


def _grid_dir():
    return resources.files("forensic_bias").joinpath("fixtures/grids")


def imputation_grid_fixture() -> GridFixture:
    """Load the committed 10x5 example where imputation flips the decision.

    The true mark shares 5 minutiae with the exemplar; smudging drops the
    observed count to 3 (Inconclusive) and imputation raises it to 8
    (SupportSameSource).
    """
    d = _grid_dir()
    exemplar = PrintGrid.from_text(d.joinpath("exemplar_x.txt").read_text(encoding="utf-8"))
    true_mark = PrintGrid.from_text(d.joinpath("true_y.txt").read_text(encoding="utf-8"))
    observed = PrintGrid.from_text(d.joinpath("observed_y.txt").read_text(encoding="utf-8"))
    imputed = impute_from_reference(observed, exemplar)
    assert isinstance(imputed, PrintGrid)
    return GridFixture(
        exemplar=exemplar,
        true_mark=true_mark,
        observed=observed,
        imputed=imputed,
        true_summary=count_matches(exemplar, true_mark),
        observed_summary=count_matches(exemplar, observed),
        imputed_summary=count_matches(exemplar, imputed),
        observed_decision=decide_source(count_matches(exemplar, observed)),
        imputed_decision=decide_source(count_matches(exemplar, imputed)),
    )
