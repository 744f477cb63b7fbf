"""Face-embedding channel: cosine distances over fixed 512-dim vectors.

Embeddings are assumed to come from an external face encoder; this module
only stores, compares, and synthesises them.  Synthetic embeddings place
each user at a random unit anchor and scatter sessions around it with
Gaussian noise, which is enough to exercise fusion and evaluation.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

EMBEDDING_DIM = 512


@dataclass(frozen=True)
class FaceEmbedding:
    """One session's face embedding, keyed by user and session id."""

    user_id: str
    session_id: str
    vector: np.ndarray

    def __post_init__(self) -> None:
        vec = np.asarray(self.vector, dtype=np.float64)
        if vec.shape != (EMBEDDING_DIM,):
            raise ValueError(
                f"embedding must have shape ({EMBEDDING_DIM},), got {vec.shape}"
            )
        if not np.all(np.isfinite(vec)):
            raise ValueError("embedding contains non-finite values")
        if np.linalg.norm(vec) == 0.0:
            raise ValueError("embedding must have non-zero norm")
        object.__setattr__(self, "vector", vec)

    @property
    def key(self) -> str:
        return f"{self.user_id}/{self.session_id}"


def cosine_distance(a, b) -> float:
    """1 - cos(a, b), clamped to [0, 2].

    Accepts :class:`FaceEmbedding` or plain vectors; zero-norm vectors are
    rejected because the angle is undefined.
    """
    av = a.vector if isinstance(a, FaceEmbedding) else np.asarray(a, dtype=np.float64)
    bv = b.vector if isinstance(b, FaceEmbedding) else np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape:
        raise ValueError(f"shape mismatch: {av.shape} vs {bv.shape}")
    na = np.linalg.norm(av)
    nb = np.linalg.norm(bv)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine distance is undefined for zero-norm vectors")
    cos = float(np.dot(av, bv) / (na * nb))
    return min(max(1.0 - cos, 0.0), 2.0)


def synth_embeddings(
    n_users: int,
    sessions_per_user: int,
    sigma: float = 0.05,
    seed: int = 0,
) -> list[FaceEmbedding]:
    """Generate one anchored cloud of unit embeddings per user.

    Each user gets a random unit anchor; each session draws
    ``anchor + sigma * noise`` and renormalises.  User/session ids follow
    the ``u###``/``s##`` convention used by the synthetic blow datasets so
    the two channels line up by key.  Deterministic for a given seed.
    """
    if n_users < 1 or sessions_per_user < 1:
        raise ValueError("need at least one user and one session per user")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    rng = np.random.default_rng(seed)
    out: list[FaceEmbedding] = []
    for u in range(n_users):
        anchor = rng.standard_normal(EMBEDDING_DIM)
        anchor /= np.linalg.norm(anchor)
        for s in range(sessions_per_user):
            vec = anchor + sigma * rng.standard_normal(EMBEDDING_DIM)
            norm = np.linalg.norm(vec)
            if norm == 0.0:  # essentially impossible, but keep the invariant
                vec = anchor.copy()
                norm = 1.0
            out.append(FaceEmbedding(f"u{u:03d}", f"s{s:02d}", vec / norm))
    return out


def _header() -> list[str]:
    return ["user_id", "session_id"] + [f"e{i}" for i in range(EMBEDDING_DIM)]


def write_embeddings(path: str | os.PathLike, embeddings: list[FaceEmbedding]) -> None:
    """Write embeddings as CSV: user_id, session_id, e0..e511."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_header())
        for emb in embeddings:
            writer.writerow([emb.user_id, emb.session_id] + [repr(float(v)) for v in emb.vector])


def load_embeddings(path: str | os.PathLike) -> list[FaceEmbedding]:
    """Read embeddings written by :func:`write_embeddings`.

    The header is checked column-for-column and duplicate
    (user, session) keys are rejected.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _header():
            raise ValueError(
                f"{path}: unexpected embedding header; "
                f"expected user_id,session_id,e0..e{EMBEDDING_DIM - 1}"
            )
        out: list[FaceEmbedding] = []
        seen: set[tuple[str, str]] = set()
        for row_no, row in enumerate(reader, start=2):
            if len(row) != EMBEDDING_DIM + 2:
                raise ValueError(
                    f"{path}:{row_no}: expected {EMBEDDING_DIM + 2} columns, got {len(row)}"
                )
            key = (row[0], row[1])
            if key in seen:
                raise ValueError(f"{path}:{row_no}: duplicate embedding for {key}")
            seen.add(key)
            vec = np.array([float(v) for v in row[2:]])
            out.append(FaceEmbedding(row[0], row[1], vec))
    return out
