"""Authentication evaluation: genuine/impostor scoring, rates, EER, reports.

The protocol treats every session of every user as a query.  A user's own
sessions are scored leave-one-out against her remaining sessions (genuine
attempts); every other user's sessions are scored against all of her
enrolled sessions (impostor attempts).  Per-user thresholds come from the
q-th smallest genuine score; TP/FN/FP/TN accumulate over users into FAR,
FRR, and accuracy, while EER is a single global sweep over the pooled
scores.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, SessionRecord
from .fusion import (
    DecisionConfig,
    NormalizationBounds,
    Threshold,
    fit_bounds,
    knn_score,
)
from .kernels import (
    KernelConfig,
    ScoreMatrix,
    dtw,
    dtw_path,
    kernel_distance,
    pairwise_matrix,
)
from .signal_prep import BlowSeries

CHANNELS = ("blow", "face", "fused")

_REPORT_MAGIC = "# blowauth/report v1"
_REPORT_COLUMNS = [
    "method",
    "mode",
    "k",
    "q",
    "tp",
    "fn",
    "fp",
    "tn",
    "eer",
    "accuracy",
    "far",
    "frr",
]


@dataclass(frozen=True)
class ConfusionCounts:
    """Confusion counts of one evaluation: genuine (tp/fn), impostor (fp/tn)."""

    tp: int = 0
    fn: int = 0
    fp: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp,
            self.fn + other.fn,
            self.fp + other.fp,
            self.tn + other.tn,
        )

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


def rates(counts: ConfusionCounts) -> tuple[float, float, float]:
    """(FAR, FRR, accuracy) from confusion counts.

    FAR = FP/(FP+TN) over impostor attempts, FRR = FN/(FN+TP) over genuine
    attempts, accuracy = (TP+TN)/total.  A zero denominator is rejected,
    naming the undefined rate.
    """
    if counts.fp + counts.tn == 0:
        raise ValueError("FAR undefined: no impostor attempts (FP + TN = 0)")
    if counts.tp + counts.fn == 0:
        raise ValueError("FRR undefined: no genuine attempts (TP + FN = 0)")
    far = counts.fp / (counts.fp + counts.tn)
    frr = counts.fn / (counts.fn + counts.tp)
    accuracy = (counts.tp + counts.tn) / counts.total
    return far, frr, accuracy


def eer(genuine, impostor) -> float:
    """Equal error rate: min over thresholds of max(FAR, FRR).

    The threshold sweeps the sorted union of all observed scores plus
    -inf, under the accept-iff-score<=tau rule.
    """
    g = np.asarray(genuine, dtype=np.float64)
    imp = np.asarray(impostor, dtype=np.float64)
    if g.size == 0 or imp.size == 0:
        raise ValueError("eer needs non-empty genuine and impostor score lists")
    g_sorted = np.sort(g)
    i_sorted = np.sort(imp)
    taus = np.unique(np.concatenate([g_sorted, i_sorted]))
    # FAR(tau) = share of impostor scores <= tau; FRR(tau) = share of genuine > tau
    far = np.searchsorted(i_sorted, taus, side="right") / imp.size
    frr = (g.size - np.searchsorted(g_sorted, taus, side="right")) / g.size
    worst = np.maximum(far, frr)
    # tau = -inf accepts nothing: FAR 0, FRR 1
    return float(min(worst.min(), 1.0))


@dataclass(frozen=True)
class EvalRow:
    """One report row: a method/mode/k/q cell with its counts and rates."""

    method: str
    mode: str
    k: int
    q: int
    tp: int
    fn: int
    fp: int
    tn: int
    eer: float
    accuracy: float
    far: float
    frr: float


@dataclass(frozen=True)
class ProtocolResult:
    """Everything one protocol run produced.

    ``row`` is the report line; ``counts``, per-user ``thresholds``, and
    the pooled ``genuine``/``impostor`` score arrays support exports and
    further analysis.
    """

    row: EvalRow
    counts: ConfusionCounts
    thresholds: tuple[Threshold, ...]
    genuine: np.ndarray
    impostor: np.ndarray


def genuine_scores(user_sessions, kernel: KernelConfig, k: int, aggregate: str = "mean") -> list[float]:
    """Leave-one-out kNN scores of a user's sessions against each other.

    Session ``i`` is scored by its k nearest neighbours among the user's
    other n-1 sessions; the n scores come back in session order.
    """
    series = list(user_sessions)
    n = len(series)
    if n < k + 1:
        raise ValueError(f"need at least k+1 = {k + 1} sessions, got {n}")
    D = pairwise_matrix(series, kernel).values
    return [knn_score(np.delete(D[i], i), k, aggregate) for i in range(n)]


def impostor_scores(
    target_sessions,
    other_sessions,
    kernel: KernelConfig,
    k: int,
    aggregate: str = "mean",
) -> list[float]:
    """kNN scores of every non-target session against the target's sessions."""
    targets = list(target_sessions)
    others = list(other_sessions)
    if len(targets) < k:
        raise ValueError(f"target has {len(targets)} sessions, need at least k = {k}")
    out = []
    for query in others:
        d = [kernel_distance(query, enrolled, kernel) for enrolled in targets]
        out.append(knn_score(d, k, aggregate))
    return out


def _knn_rows(D: np.ndarray, k: int, aggregate: str) -> np.ndarray:
    """Row-wise kNN aggregation: rows are queries, columns enrolled sessions."""
    part = np.partition(D, k - 1, axis=1)[:, :k]
    return part.max(axis=1) if aggregate == "max" else part.mean(axis=1)


def _face_matrix(records: tuple[SessionRecord, ...]) -> np.ndarray:
    missing = [r.key for r in records if r.embedding is None]
    if missing:
        raise ValueError(
            f"face channel requires embeddings; {len(missing)} sessions lack one "
            f"(first: {missing[0]})"
        )
    E = np.stack([r.embedding.vector for r in records])
    E = E / np.linalg.norm(E, axis=1, keepdims=True)
    D = np.clip(1.0 - E @ E.T, 0.0, 2.0)
    np.fill_diagonal(D, 0.0)
    return D


def _blow_matrix(records: tuple[SessionRecord, ...], kernel: KernelConfig) -> np.ndarray:
    return pairwise_matrix(
        [r.series for r in records], kernel, ids=[r.key for r in records]
    ).values


def _off_diagonal(D: np.ndarray) -> np.ndarray:
    return D[~np.eye(len(D), dtype=bool)]


def run_protocol(
    dataset: Dataset,
    config: DecisionConfig,
    mode: str = "both",
    channel: str = "blow",
    blow_matrix: ScoreMatrix | None = None,
) -> ProtocolResult:
    """Evaluate one (channel, kernel, mode, k, q) cell over a dataset.

    Scores all genuine and impostor attempts, calibrates a per-user
    threshold at the q-th smallest genuine score, and accumulates the
    confusion counts; EER comes from one pooled sweep over all scores.
    For the fused channel both distance matrices are min-max normalised
    over their off-diagonal population and combined with the configured
    weights before any kNN aggregation.

    ``blow_matrix`` may supply precomputed kernel distances (keyed by the
    ``user/session`` ids); sessions are looked up by key.
    """
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}, got {channel!r}")
    subset = dataset.filter_mode(mode)
    records = subset.records
    users = subset.users()
    if len(users) < 2:
        raise ValueError("evaluation needs at least 2 users for impostor attempts")
    n = subset.uniform_session_count()
    if config.q > n:
        raise ValueError(f"q = {config.q} exceeds sessions per user ({n}) for mode {mode!r}")
    if config.k > n - 1:
        raise ValueError(
            f"k = {config.k} exceeds n - 1 = {n - 1} leave-one-out neighbours"
        )

    norm_blow: NormalizationBounds | None = None
    norm_face: NormalizationBounds | None = None
    if channel in ("blow", "fused"):
        if blow_matrix is not None:
            Db = blow_matrix.submatrix([r.key for r in records]).values
        else:
            Db = _blow_matrix(records, config.kernel)
    if channel in ("face", "fused"):
        Df = _face_matrix(records)
    if channel == "blow":
        D = Db
    elif channel == "face":
        D = Df
    else:
        norm_blow = fit_bounds(_off_diagonal(Db))
        norm_face = fit_bounds(_off_diagonal(Df))
        w_blow, w_face = config.weights
        D = w_blow * norm_blow.apply(Db) + w_face * norm_face.apply(Df)
        np.fill_diagonal(D, 0.0)

    by_user: dict[str, list[int]] = {u: [] for u in users}
    for idx, rec in enumerate(records):
        by_user[rec.user_id].append(idx)

    counts = ConfusionCounts()
    thresholds: list[Threshold] = []
    genuine_pool: list[np.ndarray] = []
    impostor_pool: list[np.ndarray] = []
    all_idx = np.arange(len(records))
    for user in users:
        own = np.array(by_user[user])
        others = np.setdiff1d(all_idx, own)
        G = D[np.ix_(own, own)].copy()
        np.fill_diagonal(G, np.inf)
        g_scores = _knn_rows(G, config.k, config.aggregate)
        imp_scores = _knn_rows(D[np.ix_(others, own)], config.k, config.aggregate)
        tau = float(np.partition(g_scores, config.q - 1)[config.q - 1])
        thresholds.append(Threshold(user, tau, config, norm_blow, norm_face))
        tp = int(np.sum(g_scores <= tau))
        fp = int(np.sum(imp_scores <= tau))
        counts = counts + ConfusionCounts(
            tp, len(g_scores) - tp, fp, len(imp_scores) - fp
        )
        genuine_pool.append(g_scores)
        impostor_pool.append(imp_scores)

    genuine_all = np.concatenate(genuine_pool)
    impostor_all = np.concatenate(impostor_pool)
    far, frr, accuracy = rates(counts)
    method = {
        "blow": config.kernel.kind,
        "face": "face",
        "fused": f"fusion-{config.kernel.kind}",
    }[channel]
    row = EvalRow(
        method,
        mode,
        config.k,
        config.q,
        counts.tp,
        counts.fn,
        counts.fp,
        counts.tn,
        eer(genuine_all, impostor_all),
        accuracy,
        far,
        frr,
    )
    return ProtocolResult(row, counts, tuple(thresholds), genuine_all, impostor_all)


# ---------------------------------------------------------------------------
# DBA signature (illustration only)


def dba_signature(sessions, iterations: int = 10) -> BlowSeries:
    """DTW barycenter average of a user's sessions.

    Starts from the medoid (smallest summed DTW distance to the rest) and
    repeatedly aligns every session to the current centre with DTW,
    averaging the values mapped onto each centre position.  The output
    keeps the medoid's length.  Intended for visual signatures, not for
    authentication.
    """
    if iterations < 0:
        raise ValueError(f"iterations must be >= 0, got {iterations}")
    series = [s if isinstance(s, BlowSeries) else BlowSeries(np.asarray(s, dtype=np.float64)) for s in sessions]
    if len(series) == 0:
        raise ValueError("dba_signature needs at least one series")
    dts = {s.dt for s in series}
    if len(dts) != 1:
        raise ValueError(f"all series must share one dt, got {sorted(dts)}")
    dt = dts.pop()
    if len(series) == 1:
        return BlowSeries(series[0].values.copy(), dt=dt)

    values = [s.values for s in series]
    sums = [sum(dtw(a, b) for b in values) for a in values]
    center = values[int(np.argmin(sums))].copy()
    for _ in range(iterations):
        buckets_sum = np.zeros(len(center))
        buckets_cnt = np.zeros(len(center))
        for v in values:
            _, path = dtw_path(center, v)
            for i, j in path:
                buckets_sum[i] += v[j]
                buckets_cnt[i] += 1
        center = buckets_sum / buckets_cnt
    return BlowSeries(center, dt=dt)


# ---------------------------------------------------------------------------
# report persistence and rendering


def save_report(rows: list[EvalRow], path: str | os.PathLike) -> None:
    """Write report rows as CSV (order preserved)."""
    with open(path, "w", newline="") as fh:
        fh.write(f"{_REPORT_MAGIC}\n")
        writer = csv.writer(fh)
        writer.writerow(_REPORT_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.method,
                    r.mode,
                    r.k,
                    r.q,
                    r.tp,
                    r.fn,
                    r.fp,
                    r.tn,
                    repr(float(r.eer)),
                    repr(float(r.accuracy)),
                    repr(float(r.far)),
                    repr(float(r.frr)),
                ]
            )


def load_report(path: str | os.PathLike) -> list[EvalRow]:
    """Read a report written by :func:`save_report`."""
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith(_REPORT_MAGIC):
            raise ValueError(f"{path}: not a blowauth report file (v1)")
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _REPORT_COLUMNS:
            raise ValueError(f"{path}: unexpected report header {header}")
        out = []
        for row in reader:
            if len(row) != len(_REPORT_COLUMNS):
                raise ValueError(f"{path}: malformed report row {row}")
            out.append(
                EvalRow(
                    row[0],
                    row[1],
                    int(row[2]),
                    int(row[3]),
                    int(row[4]),
                    int(row[5]),
                    int(row[6]),
                    int(row[7]),
                    float(row[8]),
                    float(row[9]),
                    float(row[10]),
                    float(row[11]),
                )
            )
    return out


def render_report_text(rows: list[EvalRow]) -> str:
    """Aligned text table of the report's rate columns."""
    header = ["method", "mode", "k", "q", "EER", "accuracy", "FAR", "FRR"]
    body = [
        [
            r.method,
            r.mode,
            str(r.k),
            str(r.q),
            f"{r.eer:.4f}",
            f"{r.accuracy:.4f}",
            f"{r.far:.4f}",
            f"{r.frr:.4f}",
        ]
        for r in rows
    ]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(header)]
    lines = []
    for cells in [header] + body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip())
    return "\n".join(lines) + "\n"
