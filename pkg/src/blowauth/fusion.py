"""Score normalisation, channel fusion, kNN scoring, and threshold decisions.

Distances from the blow and face channels live on different scales, so
each channel is min-max normalised over the evaluation batch before a
weighted sum combines them.  A query is scored against a user's enrolled
sessions with kNN aggregation and accepted when the score does not exceed
the user's calibrated threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelConfig


@dataclass(frozen=True)
class DecisionConfig:
    """Knobs of the matching pipeline.

    ``k`` is the number of nearest enrolled sessions aggregated per query
    (mean by default, max with ``aggregate='max'``); ``q`` selects the
    q-th smallest genuine score as the threshold; ``weights`` are the
    (blow, face) fusion weights and must sum to 1.
    """

    kernel: KernelConfig = field(default_factory=KernelConfig)
    k: int = 1
    q: int = 10
    weights: tuple[float, float] = (0.5, 0.5)
    aggregate: str = "mean"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")
        w_blow, w_face = self.weights
        if w_blow < 0 or w_face < 0:
            raise ValueError(f"weights must be non-negative, got {self.weights}")
        if abs(w_blow + w_face - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {self.weights}")
        if self.aggregate not in ("mean", "max"):
            raise ValueError(f"aggregate must be 'mean' or 'max', got {self.aggregate!r}")


@dataclass(frozen=True)
class NormalizationBounds:
    """Min/max observed for one channel during calibration."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("normalization bounds must be finite")
        if self.hi < self.lo:
            raise ValueError(f"hi < lo in normalization bounds: {self.lo}, {self.hi}")

    def apply(self, scores) -> np.ndarray:
        """Map scores into [0, 1], clamping anything outside the fitted range."""
        s = np.asarray(scores, dtype=np.float64)
        if self.hi == self.lo:
            return np.zeros_like(s)
        return np.clip((s - self.lo) / (self.hi - self.lo), 0.0, 1.0)


def fit_bounds(scores) -> NormalizationBounds:
    """Record the min and max of a score population."""
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        raise ValueError("cannot fit normalization bounds on an empty population")
    if not np.all(np.isfinite(s)):
        raise ValueError("score population contains non-finite values")
    return NormalizationBounds(float(s.min()), float(s.max()))


def min_max_normalize(scores) -> np.ndarray:
    """Scale a batch of scores into [0, 1]; a constant batch maps to all zeros."""
    return fit_bounds(scores).apply(scores)


def fuse(blow_score, face_score, weights: tuple[float, float] = (0.5, 0.5)):
    """Weighted sum of already-normalised channel scores.

    Works elementwise on arrays; with default weights this is the plain
    average of the two channels.
    """
    w_blow, w_face = weights
    if w_blow < 0 or w_face < 0 or abs(w_blow + w_face - 1.0) > 1e-9:
        raise ValueError(f"weights must be non-negative and sum to 1, got {weights}")
    return w_blow * np.asarray(blow_score) + w_face * np.asarray(face_score)


def knn_score(distances, k: int, aggregate: str = "mean") -> float:
    """Aggregate a query's distances to enrolled sessions over the k nearest.

    ``mean`` averages the k smallest distances; ``max`` takes the largest
    of them (the distance to the k-th nearest neighbour).
    """
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 1 or d.size == 0:
        raise ValueError("distances must be a non-empty 1-D array")
    if k < 1 or k > d.size:
        raise ValueError(f"k must be in [1, {d.size}], got {k}")
    if aggregate not in ("mean", "max"):
        raise ValueError(f"aggregate must be 'mean' or 'max', got {aggregate!r}")
    smallest = np.partition(d, k - 1)[:k]
    return float(smallest.max() if aggregate == "max" else smallest.mean())


@dataclass(frozen=True)
class Threshold:
    """A user's calibrated acceptance threshold.

    Carries the decision configuration it was calibrated under plus, for
    fused scoring, the normalization bounds needed to map held-out query
    scores onto the calibration scale.
    """

    user_id: str
    tau: float
    config: DecisionConfig = field(default_factory=DecisionConfig)
    norm_blow: NormalizationBounds | None = None
    norm_face: NormalizationBounds | None = None


def calibrate_threshold(
    genuine_scores,
    q: int,
    user_id: str = "",
    config: DecisionConfig | None = None,
    norm_blow: NormalizationBounds | None = None,
    norm_face: NormalizationBounds | None = None,
) -> Threshold:
    """Set tau to the q-th smallest genuine score.

    With n genuine scores and q = n every genuine attempt is accepted;
    smaller q trades acceptance of the user's own worst sessions for a
    stricter threshold.
    """
    g = np.asarray(genuine_scores, dtype=np.float64)
    if g.ndim != 1 or g.size == 0:
        raise ValueError("genuine_scores must be a non-empty 1-D array")
    if q < 1 or q > g.size:
        raise ValueError(f"q must be in [1, {g.size}], got {q}")
    tau = float(np.partition(g, q - 1)[q - 1])
    cfg = config if config is not None else DecisionConfig(q=q)
    return Threshold(user_id, tau, cfg, norm_blow, norm_face)


def authenticate(score: float, threshold: Threshold) -> bool:
    """Accept when the query score does not exceed tau (ties accept)."""
    return score <= threshold.tau
