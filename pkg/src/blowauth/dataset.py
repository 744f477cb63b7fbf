"""Dataset loading, synthetic data generation, and artifact persistence.

Sessions travel as long-format CSV (``user_id, session_id, mode, t_index,
value``).  A leading comment line tags our files with a format version and
a value kind — ``samples`` (raw audio, full preprocessing on load),
``rms`` (per-window RMS, smoothing only), or ``series`` (already
preprocessed).  Foreign files can be adapted with a column mapping and an
explicit value kind.

Score matrices, threshold sets, and evaluation reports round-trip through
CSV byte-stably: floats are written with ``repr`` so re-reading recovers
the exact values.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .face import FaceEmbedding
from .fusion import DecisionConfig, NormalizationBounds, Threshold
from .kernels import KernelConfig, ScoreMatrix
from .signal_prep import BlowSeries, PreprocessConfig, RawAudio, preprocess_session, sma

MODES = ("sit", "stand")
VALUE_KINDS = ("samples", "rms", "series")

_SESSIONS_MAGIC = "# blowauth/sessions v1"
_MATRIX_MAGIC = "# blowauth/scorematrix v1"
_THRESHOLDS_MAGIC = "# blowauth/thresholds v1"

_THRESHOLD_COLUMNS = [
    "user_id",
    "kernel",
    "k",
    "q",
    "tau",
    "w_blow",
    "w_face",
    "norm_min_blow",
    "norm_max_blow",
    "norm_min_face",
    "norm_max_face",
]


@dataclass(frozen=True)
class ColumnMap:
    """Maps the canonical session-CSV column names onto a foreign schema."""

    user_id: str = "user_id"
    session_id: str = "session_id"
    mode: str = "mode"
    t_index: str = "t_index"
    value: str = "value"


@dataclass(frozen=True)
class SessionRecord:
    """One recorded session: who, which session, posture, and the series."""

    user_id: str
    session_id: str
    mode: str
    series: BlowSeries
    embedding: FaceEmbedding | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.user_id or not self.session_id:
            raise ValueError("user_id and session_id must be non-empty")

    @property
    def key(self) -> str:
        return f"{self.user_id}/{self.session_id}"


@dataclass(frozen=True)
class Dataset:
    """An immutable collection of session records.

    ``provenance`` records where the data came from (``published``,
    ``synthetic``, or ``raw-audio``); ``preprocess`` is the configuration
    the series were produced with.
    """

    records: tuple[SessionRecord, ...]
    provenance: str = "synthetic"
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        if self.provenance not in ("published", "synthetic", "raw-audio"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        seen: set[str] = set()
        for rec in self.records:
            if rec.key in seen:
                raise ValueError(f"duplicate (user_id, session_id): {rec.key}")
            seen.add(rec.key)

    def __len__(self) -> int:
        return len(self.records)

    def users(self) -> list[str]:
        """User ids in first-appearance order."""
        out: list[str] = []
        seen: set[str] = set()
        for rec in self.records:
            if rec.user_id not in seen:
                seen.add(rec.user_id)
                out.append(rec.user_id)
        return out

    def filter_mode(self, mode: str) -> "Dataset":
        """Restrict to one posture; ``both`` keeps everything."""
        if mode == "both":
            return self
        if mode not in MODES:
            raise ValueError(f"mode must be 'sit', 'stand', or 'both', got {mode!r}")
        kept = tuple(r for r in self.records if r.mode == mode)
        if not kept:
            raise ValueError(f"no sessions with mode {mode!r}")
        return Dataset(kept, self.provenance, self.preprocess)

    def sessions_of(self, user_id: str) -> list[SessionRecord]:
        return [r for r in self.records if r.user_id == user_id]

    def uniform_session_count(self) -> int:
        """Sessions per user, requiring every user to have the same number."""
        counts: dict[str, int] = {}
        for rec in self.records:
            counts[rec.user_id] = counts.get(rec.user_id, 0) + 1
        distinct = set(counts.values())
        if len(distinct) != 1:
            raise ValueError(
                f"users have unequal session counts: {sorted(distinct)}"
            )
        return distinct.pop()

    def with_embeddings(self, embeddings: list[FaceEmbedding]) -> "Dataset":
        """Attach face embeddings by (user_id, session_id) key.

        Every session must receive an embedding; unmatched embeddings are
        ignored so a larger embedding file can serve a filtered dataset.
        """
        by_key = {e.key: e for e in embeddings}
        missing = [r.key for r in self.records if r.key not in by_key]
        if missing:
            raise ValueError(
                f"no embedding for {len(missing)} sessions (first: {missing[0]})"
            )
        recs = tuple(replace(r, embedding=by_key[r.key]) for r in self.records)
        return Dataset(recs, self.provenance, self.preprocess)


# ---------------------------------------------------------------------------
# session CSV


def save_sessions_csv(dataset: Dataset, path: str | os.PathLike) -> None:
    """Write sessions in the canonical long format with kind ``series``."""
    with open(path, "w", newline="") as fh:
        fh.write(f"{_SESSIONS_MAGIC} kind=series\n")
        writer = csv.writer(fh)
        writer.writerow(["user_id", "session_id", "mode", "t_index", "value"])
        for rec in dataset.records:
            for t, v in enumerate(rec.series.values):
                writer.writerow([rec.user_id, rec.session_id, rec.mode, t, repr(float(v))])


def load_sessions_csv(
    path: str | os.PathLike,
    cfg: PreprocessConfig | None = None,
    columns: ColumnMap | None = None,
    value_kind: str | None = None,
    provenance: str = "published",
) -> Dataset:
    """Load a long-format session CSV into a Dataset.

    Rows may arrive in any order; they are grouped by (user, session) and
    sorted by ``t_index``, with duplicate indices rejected.  The value
    kind — how much preprocessing remains to be applied — comes from the
    explicit argument, else from the file's leading comment, else defaults
    to ``rms``.
    """
    cfg = cfg if cfg is not None else PreprocessConfig()
    cols = columns if columns is not None else ColumnMap()
    with open(path, newline="") as fh:
        first = fh.readline()
        file_kind = None
        if first.startswith("# blowauth/sessions"):
            if not first.startswith(_SESSIONS_MAGIC):
                raise ValueError(f"{path}: unsupported session file version: {first.strip()}")
            for token in first.strip().split():
                if token.startswith("kind="):
                    file_kind = token[5:]
        elif first.startswith("#"):
            pass  # foreign comment line; ignore
        else:
            fh.seek(0)
        kind = value_kind or file_kind or "rms"
        if kind not in VALUE_KINDS:
            raise ValueError(f"value kind must be one of {VALUE_KINDS}, got {kind!r}")
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty file")
        for name in (cols.user_id, cols.session_id, cols.mode, cols.t_index, cols.value):
            if name not in reader.fieldnames:
                raise ValueError(f"{path}: missing column {name!r}")
        groups: dict[tuple[str, str], dict] = {}
        order: list[tuple[str, str]] = []
        first_data_line = 3 if first.startswith("#") else 2
        for row_no, row in enumerate(reader, start=first_data_line):
            key = (row[cols.user_id], row[cols.session_id])
            try:
                t = int(row[cols.t_index])
                v = float(row[cols.value])
            except ValueError as e:
                raise ValueError(f"{path}: row {row_no}: {e}") from e
            mode = row[cols.mode]
            if key not in groups:
                groups[key] = {"mode": mode, "points": {}}
                order.append(key)
            g = groups[key]
            if g["mode"] != mode:
                raise ValueError(
                    f"{path}: row {row_no}: session {key} changes mode "
                    f"from {g['mode']!r} to {mode!r}"
                )
            if t in g["points"]:
                raise ValueError(
                    f"{path}: row {row_no}: duplicate t_index {t} for session {key}"
                )
            g["points"][t] = v
    records: list[SessionRecord] = []
    for key in order:
        g = groups[key]
        ts = sorted(g["points"])
        values = np.array([g["points"][t] for t in ts], dtype=np.float64)
        records.append(
            SessionRecord(key[0], key[1], g["mode"], _apply_kind(values, kind, cfg))
        )
    return Dataset(tuple(records), provenance, cfg)


def _apply_kind(values: np.ndarray, kind: str, cfg: PreprocessConfig) -> BlowSeries:
    if kind == "series":
        return BlowSeries(values, dt=cfg.dt)
    if kind == "rms":
        return sma(BlowSeries(values, dt=cfg.dt), cfg.sma_window)
    return preprocess_session(RawAudio(values, cfg.sample_rate), cfg)


# ---------------------------------------------------------------------------
# synthetic data


def synth_dataset(
    n_users: int,
    sessions_per_user: int,
    length: int = 250,
    time_jitter: float = 2.0,
    amp_jitter: float = 0.1,
    seed: int = 0,
    noise: float = 0.0,
) -> Dataset:
    """Generate a deterministic synthetic blow dataset.

    Each user gets a smooth archetype envelope — a sum of 2 to 4 Gaussian
    bumps of random position, width, and height over a small positive
    baseline.  A session is the archetype shifted in time by
    ``N(0, time_jitter)`` points (linear interpolation, edges held),
    scaled by ``1 + N(0, amp_jitter)``, plus optional additive Gaussian
    ``noise``, clipped at zero.  The first half of each user's sessions is
    labelled ``sit``, the rest ``stand``.  All randomness flows from one
    PCG64 generator, so equal seeds give equal datasets on any platform.
    """
    if n_users < 1 or sessions_per_user < 1 or length < 1:
        raise ValueError("n_users, sessions_per_user, and length must be >= 1")
    if time_jitter < 0 or amp_jitter < 0 or noise < 0:
        raise ValueError("jitter and noise magnitudes must be >= 0")
    rng = np.random.default_rng(seed)
    t = np.arange(length, dtype=np.float64)
    n_sit = (sessions_per_user + 1) // 2
    records: list[SessionRecord] = []
    for u in range(n_users):
        n_bumps = int(rng.integers(2, 5))
        centers = rng.uniform(0.15, 0.85, n_bumps) * length
        widths = rng.uniform(0.03, 0.12, n_bumps) * length
        heights = rng.uniform(0.4, 1.0, n_bumps)
        archetype = np.full(length, 0.05)
        for c, w, h in zip(centers, widths, heights):
            archetype = archetype + h * np.exp(-0.5 * ((t - c) / w) ** 2)
        for s in range(sessions_per_user):
            shift = rng.normal(0.0, time_jitter) if time_jitter > 0 else 0.0
            scale = max(1.0 + (rng.normal(0.0, amp_jitter) if amp_jitter > 0 else 0.0), 0.05)
            wobble = rng.normal(0.0, noise, length) if noise > 0 else np.zeros(length)
            values = scale * np.interp(t - shift, t, archetype) + wobble
            records.append(
                SessionRecord(
                    f"u{u:03d}",
                    f"s{s:02d}",
                    "sit" if s < n_sit else "stand",
                    BlowSeries(np.maximum(values, 0.0)),
                )
            )
    return Dataset(tuple(records), "synthetic")


# ---------------------------------------------------------------------------
# score matrix persistence


def save_matrix(matrix: ScoreMatrix, path: str | os.PathLike) -> None:
    """Write a ScoreMatrix as CSV with its kernel configuration embedded."""
    with open(path, "w", newline="") as fh:
        fh.write(f"{_MATRIX_MAGIC} kernel={matrix.kernel.to_json()}\n")
        writer = csv.writer(fh)
        writer.writerow(["id"] + list(matrix.ids))
        for i, id_ in enumerate(matrix.ids):
            writer.writerow([id_] + [repr(float(v)) for v in matrix.values[i]])


def load_matrix(path: str | os.PathLike) -> ScoreMatrix:
    """Read a ScoreMatrix written by :func:`save_matrix`."""
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith(_MATRIX_MAGIC):
            raise ValueError(f"{path}: not a blowauth score matrix (v1)")
        marker = " kernel="
        pos = first.find(marker)
        if pos < 0:
            raise ValueError(f"{path}: score matrix header lacks kernel config")
        kernel = KernelConfig.from_json(first[pos + len(marker) :].strip())
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "id":
            raise ValueError(f"{path}: malformed score matrix header row")
        ids = tuple(header[1:])
        rows = []
        row_ids = []
        for row in reader:
            if len(row) != len(ids) + 1:
                raise ValueError(f"{path}: row {row[0]!r} has {len(row) - 1} cells, expected {len(ids)}")
            row_ids.append(row[0])
            rows.append([float(v) for v in row[1:]])
        if tuple(row_ids) != ids:
            raise ValueError(f"{path}: row ids do not match column ids")
    return ScoreMatrix(ids, np.array(rows, dtype=np.float64), kernel)


# ---------------------------------------------------------------------------
# threshold persistence


def _bound_cells(b: NormalizationBounds | None) -> list[str]:
    return ["", ""] if b is None else [repr(float(b.lo)), repr(float(b.hi))]


def save_thresholds(thresholds: list[Threshold], path: str | os.PathLike) -> None:
    """Export per-user thresholds with their calibration context."""
    with open(path, "w", newline="") as fh:
        fh.write(f"{_THRESHOLDS_MAGIC}\n")
        writer = csv.writer(fh)
        writer.writerow(_THRESHOLD_COLUMNS)
        for th in thresholds:
            cfg = th.config
            writer.writerow(
                [
                    th.user_id,
                    cfg.kernel.to_json(),
                    cfg.k,
                    cfg.q,
                    repr(float(th.tau)),
                    repr(float(cfg.weights[0])),
                    repr(float(cfg.weights[1])),
                ]
                + _bound_cells(th.norm_blow)
                + _bound_cells(th.norm_face)
            )


def load_thresholds(path: str | os.PathLike, aggregate: str = "mean") -> list[Threshold]:
    """Read thresholds written by :func:`save_thresholds`.

    The CSV schema does not carry the kNN aggregation mode; pass
    ``aggregate`` if the exporting run used ``max``.
    """
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith(_THRESHOLDS_MAGIC):
            raise ValueError(f"{path}: not a blowauth thresholds file (v1)")
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _THRESHOLD_COLUMNS:
            raise ValueError(f"{path}: unexpected thresholds header {header}")
        out: list[Threshold] = []
        for row_no, row in enumerate(reader, start=3):
            if len(row) != len(_THRESHOLD_COLUMNS):
                raise ValueError(f"{path}:{row_no}: expected {len(_THRESHOLD_COLUMNS)} cells")
            cfg = DecisionConfig(
                kernel=KernelConfig.from_json(row[1]),
                k=int(row[2]),
                q=int(row[3]),
                weights=(float(row[5]), float(row[6])),
                aggregate=aggregate,
            )
            nb = None if row[7] == "" else NormalizationBounds(float(row[7]), float(row[8]))
            nf = None if row[9] == "" else NormalizationBounds(float(row[9]), float(row[10]))
            out.append(Threshold(row[0], float(row[4]), cfg, nb, nf))
    return out
