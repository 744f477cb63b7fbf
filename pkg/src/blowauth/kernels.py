"""Similarity kernels for intensity time series.

Six interchangeable distance functions over 1-D series: plain Euclidean,
dynamic time warping (DTW), shape-descriptor DTW, shapelet-representation
DTW, shape-based distance (SBD), and time-warp edit distance (TWED).
All return non-negative floats where smaller means more similar, and all
are symmetric with zero self-distance.

The dynamic programs run as numba-compiled kernels; the first call per
process pays a one-off JIT cost.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit
from scipy.signal import correlate

from .signal_prep import BlowSeries

KERNEL_KINDS = ("ed", "dtw", "shapedtw", "dtws", "sbd", "twed")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ShapeletConfig:
    """Dictionary of local patterns for the shapelet representation.

    Each window of ``window`` consecutive points is scored against the
    named patterns; ``up``/``down``/``peak``/``valley`` measure the
    (clipped) cosine between the mean-centred window and the pattern
    shape, and ``flat`` captures the energy orthogonal to all of them.
    """

    window: int = 5
    patterns: tuple[str, ...] = ("up", "down", "peak", "valley", "flat")

    def __post_init__(self) -> None:
        if self.window < 2:
            raise ValueError(f"shapelet window must be >= 2, got {self.window}")
        if len(self.patterns) == 0:
            raise ValueError("at least one shapelet pattern is required")
        known = {"up", "down", "peak", "valley", "flat"}
        bad = [p for p in self.patterns if p not in known]
        if bad:
            raise ValueError(f"unknown shapelet patterns: {bad}; known: {sorted(known)}")
        if len(set(self.patterns)) != len(self.patterns):
            raise ValueError("duplicate shapelet patterns")

    def to_dict(self) -> dict:
        return {"window": self.window, "patterns": list(self.patterns)}

    @classmethod
    def from_dict(cls, d: dict) -> "ShapeletConfig":
        return cls(window=int(d["window"]), patterns=tuple(d["patterns"]))


@dataclass(frozen=True)
class KernelConfig:
    """Selects a kernel and its parameters.

    Parameters
    ----------
    kind : str
        One of ``ed``, ``dtw``, ``shapedtw``, ``dtws``, ``sbd``, ``twed``.
    band : int or None
        Optional Sakoe-Chiba band half-width for ``dtw`` (None = unconstrained).
    descriptor_len : int
        Odd subsequence length L for ``shapedtw`` descriptors.
    include_derivative : bool
        Whether ``shapedtw`` descriptors append first differences.
    shapelets : ShapeletConfig
        Pattern dictionary for ``dtws``.
    nu, lam : float
        TWED stiffness (> 0) and edit penalty (>= 0).
    """

    kind: str = "dtw"
    band: int | None = None
    descriptor_len: int = 9
    include_derivative: bool = True
    shapelets: ShapeletConfig = field(default_factory=ShapeletConfig)
    nu: float = 0.001
    lam: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; choose from {KERNEL_KINDS}")
        if self.band is not None and self.band < 0:
            raise ValueError(f"band must be >= 0, got {self.band}")
        if self.descriptor_len < 1 or self.descriptor_len % 2 == 0:
            raise ValueError(f"descriptor_len must be odd and >= 1, got {self.descriptor_len}")
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.lam < 0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "band": self.band,
            "descriptor_len": self.descriptor_len,
            "include_derivative": self.include_derivative,
            "shapelets": self.shapelets.to_dict(),
            "nu": self.nu,
            "lam": self.lam,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "KernelConfig":
        d = dict(d)
        if "shapelets" in d:
            d["shapelets"] = ShapeletConfig.from_dict(d["shapelets"])
        band = d.get("band")
        if band is not None:
            d["band"] = int(band)
        return cls(**d)

    @classmethod
    def from_json(cls, s: str) -> "KernelConfig":
        return cls.from_dict(json.loads(s))


# ---------------------------------------------------------------------------
# numba dynamic programs


@njit(cache=True)
def _dtw_core(x, y):
    n = len(x)
    m = len(y)
    prev = np.empty(m)
    cur = np.empty(m)
    acc = 0.0
    for j in range(m):
        acc += abs(x[0] - y[j])
        prev[j] = acc
    for i in range(1, n):
        cur[0] = prev[0] + abs(x[i] - y[0])
        for j in range(1, m):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = abs(x[i] - y[j]) + best
        tmp = prev
        prev = cur
        cur = tmp
    return prev[m - 1]


@njit(cache=True)
def _dtw_band_core(x, y, band):
    n = len(x)
    m = len(y)
    D = np.full((n + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, n + 1):
        lo = max(1, i - band)
        hi = min(m, i + band)
        for j in range(lo, hi + 1):
            best = D[i - 1, j - 1]
            if D[i - 1, j] < best:
                best = D[i - 1, j]
            if D[i, j - 1] < best:
                best = D[i, j - 1]
            D[i, j] = abs(x[i - 1] - y[j - 1]) + best
    return D[n, m]


@njit(cache=True)
def _dtw_multi_core(X, Y):
    # rows are feature vectors; local cost is the Euclidean row distance
    n = X.shape[0]
    m = Y.shape[0]
    d = X.shape[1]
    prev = np.empty(m)
    cur = np.empty(m)
    acc = 0.0
    for j in range(m):
        acc += _row_dist(X, Y, 0, j, d)
        prev[j] = acc
    for i in range(1, n):
        cur[0] = prev[0] + _row_dist(X, Y, i, 0, d)
        for j in range(1, m):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = _row_dist(X, Y, i, j, d) + best
        tmp = prev
        prev = cur
        cur = tmp
    return prev[m - 1]


@njit(cache=True, inline="always")
def _row_dist(X, Y, i, j, d):
    if d == 1:
        return abs(X[i, 0] - Y[j, 0])
    s = 0.0
    for t in range(d):
        diff = X[i, t] - Y[j, t]
        s += diff * diff
    return np.sqrt(s)


@njit(cache=True)
def _dtw_full_matrix(x, y):
    n = len(x)
    m = len(y)
    D = np.full((n + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            best = D[i - 1, j - 1]
            if D[i - 1, j] < best:
                best = D[i - 1, j]
            if D[i, j - 1] < best:
                best = D[i, j - 1]
            D[i, j] = abs(x[i - 1] - y[j - 1]) + best
    return D


@njit(cache=True)
def _twed_core(x, tx, y, ty, nu, lam):
    n = len(x)
    m = len(y)
    D = np.full((n + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, n + 1):
        xi = x[i - 1]
        xp = x[i - 2] if i > 1 else 0.0
        ti = tx[i - 1]
        tp = tx[i - 2] if i > 1 else 0.0
        for j in range(1, m + 1):
            yj = y[j - 1]
            yq = y[j - 2] if j > 1 else 0.0
            tj = ty[j - 1]
            tq = ty[j - 2] if j > 1 else 0.0
            del_x = D[i - 1, j] + abs(xi - xp) + nu * (ti - tp) + lam
            del_y = D[i, j - 1] + abs(yj - yq) + nu * (tj - tq) + lam
            match = (
                D[i - 1, j - 1]
                + abs(xi - yj)
                + abs(xp - yq)
                + nu * (abs(ti - tj) + abs(tp - tq))
            )
            best = del_x
            if del_y < best:
                best = del_y
            if match < best:
                best = match
            D[i, j] = best
    return D[n, m]


def warm_up_jit() -> None:
    """Compile the numba kernels on tiny inputs (optional, for timing-sensitive callers)."""
    z = np.array([0.0, 1.0])
    t = np.array([1.0, 2.0])
    _dtw_core(z, z)
    _dtw_band_core(z, z, 1)
    _dtw_multi_core(z.reshape(-1, 1), z.reshape(-1, 1))
    _dtw_full_matrix(z, z)
    _twed_core(z, t, z, t, 0.001, 1.0)


# ---------------------------------------------------------------------------
# public kernels


def _as_values(x) -> np.ndarray:
    if isinstance(x, BlowSeries):
        return x.values
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or len(arr) == 0:
        raise ValueError("series must be a non-empty 1-D array")
    return arr


def euclidean(x, y) -> float:
    """Euclidean distance between two equal-length series."""
    xv, yv = _as_values(x), _as_values(y)
    if len(xv) != len(yv):
        raise ValueError(
            f"length mismatch: euclidean distance needs equal lengths, "
            f"got {len(xv)} and {len(yv)}"
        )
    diff = xv - yv
    return float(np.sqrt(np.dot(diff, diff)))


def dtw(x, y, band: int | None = None) -> float:
    """Dynamic time warping distance with absolute-difference local cost.

    Alignments may only step down, right, or diagonally through the cost
    grid.  ``band`` optionally restricts alignment to |i - j| <= band
    around the diagonal (a Sakoe-Chiba band); it must be wide enough to
    bridge any length difference.
    """
    xv, yv = _as_values(x), _as_values(y)
    if band is None:
        return float(_dtw_core(xv, yv))
    if band < abs(len(xv) - len(yv)):
        raise ValueError(
            f"band {band} cannot connect series of lengths {len(xv)} and {len(yv)}"
        )
    return float(_dtw_band_core(xv, yv, band))


def dtw_path(x, y) -> tuple[float, list[tuple[int, int]]]:
    """DTW cost plus one optimal alignment path as (i, j) index pairs.

    Ties during backtracking prefer the diagonal step, then the step that
    advances the first series, so the path is deterministic.
    """
    xv, yv = _as_values(x), _as_values(y)
    D = _dtw_full_matrix(xv, yv)
    i, j = len(xv), len(yv)
    path = [(i - 1, j - 1)]
    while i > 1 or j > 1:
        diag = D[i - 1, j - 1] if i > 1 and j > 1 else np.inf
        up = D[i - 1, j] if i > 1 else np.inf
        left = D[i, j - 1] if j > 1 else np.inf
        if diag <= up and diag <= left:
            i, j = i - 1, j - 1
        elif up <= left:
            i = i - 1
        else:
            j = j - 1
        path.append((i - 1, j - 1))
    path.reverse()
    return float(D[len(xv), len(yv)]), path


def shape_descriptors(x, descriptor_len: int = 9, include_derivative: bool = True) -> np.ndarray:
    """Per-point shape descriptors: a local subsequence, optionally with slopes.

    Point ``i`` is described by the raw subsequence of ``descriptor_len``
    points centred on it (edges replicate the first/last value), and, when
    ``include_derivative`` is set, the first differences of that
    subsequence appended to it.  ``descriptor_len=1`` degenerates to the
    raw point value.
    """
    if descriptor_len < 1 or descriptor_len % 2 == 0:
        raise ValueError(f"descriptor_len must be odd and >= 1, got {descriptor_len}")
    xv = _as_values(x)
    n = len(xv)
    half = descriptor_len // 2
    idx = np.arange(n)[:, None] + np.arange(-half, half + 1)[None, :]
    sub = xv[np.clip(idx, 0, n - 1)]
    if include_derivative and descriptor_len > 1:
        return np.concatenate([sub, np.diff(sub, axis=1)], axis=1)
    return sub


def shape_dtw(x, y, descriptor_len: int = 9, include_derivative: bool = True) -> float:
    """DTW where local cost is the Euclidean distance between shape descriptors.

    With ``descriptor_len=1`` (raw-value descriptor) this coincides exactly
    with plain :func:`dtw`.
    """
    dx = shape_descriptors(x, descriptor_len, include_derivative)
    dy = shape_descriptors(y, descriptor_len, include_derivative)
    return float(_dtw_multi_core(dx, dy))


class _ShapeletBasis:
    """Precomputed pattern matrix for the shapelet representation."""

    def __init__(self, config: ShapeletConfig) -> None:
        w = config.window
        ramp = np.linspace(-1.0, 1.0, w)
        bump = 1.0 - np.abs(ramp)
        shapes = {
            "up": ramp,
            "down": -ramp,
            "peak": bump,
            "valley": -bump,
        }
        rows = []
        self.names = config.patterns
        self.flat_slot = None
        for slot, name in enumerate(config.patterns):
            if name == "flat":
                self.flat_slot = slot
                continue
            v = shapes[name]
            v = v - v.mean()
            norm = np.linalg.norm(v)
            if norm == 0:
                raise ValueError(f"pattern {name!r} is degenerate at window {w}")
            rows.append(v / norm)
        self.window = w
        self.directional = np.array(rows) if rows else np.zeros((0, w))
        if rows:
            # orthonormal basis of the directional span, for the residual
            # term; SVD stays correct when patterns are sign flips of each
            # other (up/down, peak/valley), where plain QR picks up junk
            # directions from the dependent columns
            _, s, vt = np.linalg.svd(self.directional, full_matrices=False)
            self.span = vt[s > 1e-12 * s[0]]
        else:
            self.span = np.zeros((0, w))

    def transform(self, values: np.ndarray) -> np.ndarray:
        n = len(values)
        w = self.window
        if n < w:
            raise ValueError(f"series of length {n} is shorter than shapelet window {w}")
        windows = np.lib.stride_tricks.sliding_window_view(values, w).astype(np.float64)
        centred = windows - windows.mean(axis=1, keepdims=True)
        norms = np.linalg.norm(centred, axis=1)
        ok = norms > 0
        k = len(self.names)
        out = np.zeros((n - w + 1, k))
        dir_slots = [s for s, name in enumerate(self.names) if name != "flat"]
        if dir_slots:
            cos = np.zeros((n - w + 1, len(dir_slots)))
            cos[ok] = (centred[ok] @ self.directional.T) / norms[ok, None]
            out[:, dir_slots] = np.maximum(cos, 0.0)
        if self.flat_slot is not None:
            if len(self.span):
                proj = np.zeros(n - w + 1)
                comp = np.zeros((n - w + 1, self.span.shape[0]))
                comp[ok] = (centred[ok] @ self.span.T) / norms[ok, None]
                proj = np.sum(comp * comp, axis=1)
                out[:, self.flat_slot] = np.sqrt(np.maximum(1.0 - proj, 0.0))
            else:
                out[:, self.flat_slot] = 1.0
            # windows with no variation are pure "flat"
            out[~ok, :] = 0.0
            out[~ok, self.flat_slot] = 1.0
        return out


def shapelet_representation(x, config: ShapeletConfig | None = None) -> np.ndarray:
    """Score every sliding window of a series against the pattern dictionary.

    Returns an (n - window + 1, n_patterns) matrix whose columns follow
    ``config.patterns``.  With the default dictionary each row has unit
    norm: the up/down and peak/valley pairs cover opposite signs of two
    orthogonal shape axes and ``flat`` absorbs the remaining energy.
    """
    cfg = config if config is not None else ShapeletConfig()
    return _ShapeletBasis(cfg).transform(_as_values(x))


def dtw_plus_s(x, y, config: ShapeletConfig | None = None) -> float:
    """DTW over shapelet representations instead of raw values.

    Rows of the representation matrices are compared with Euclidean
    distance inside the usual DTW recursion.
    """
    cfg = config if config is not None else ShapeletConfig()
    basis = _ShapeletBasis(cfg)
    rx = basis.transform(_as_values(x))
    ry = basis.transform(_as_values(y))
    return float(_dtw_multi_core(rx, ry))


def sbd(x, y) -> float:
    """Shape-based distance: one minus the strongest normalised cross-correlation.

    The cross-correlation (zero-padded, all overlapping shifts) is
    normalised by ``norm(x) * norm(y)``; the shift with the largest
    correlation magnitude decides the score, so an exact negative copy is
    maximally distant.  For non-negative intensity series this is the
    plain maximum.  Result lies in [0, 2]; 0 means equal up to positive
    scaling and shift.
    """
    xv, yv = _as_values(x), _as_values(y)
    nx = np.linalg.norm(xv)
    ny = np.linalg.norm(yv)
    if nx == 0.0 and ny == 0.0:
        raise ValueError("undefined normalization: both series are all-zero")
    if nx == 0.0 or ny == 0.0:
        return 1.0
    cc = correlate(xv, yv, mode="full")
    ncc = cc / (nx * ny)
    hi = float(ncc.max())
    lo = float(ncc.min())
    # strongest correlation magnitude decides; exact ties prefer the positive
    best = hi if hi >= -lo else lo
    return float(min(max(1.0 - best, 0.0), 2.0))


def twed(x, y, nu: float = 0.001, lam: float = 1.0, dt: float = 1.0) -> float:
    """Time-warp edit distance (a metric for ``nu`` > 0).

    Series are treated as starting from a padding point of value 0 at time
    0, with timestamps ``dt, 2*dt, ...``.  Deleting point *i* costs
    ``|x_i - x_{i-1}| + nu*dt + lam``; matching points costs their value
    difference plus that of their predecessors plus ``nu`` times the
    timestamp gaps.
    """
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    if lam < 0:
        raise ValueError(f"lam must be non-negative, got {lam}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    xv, yv = _as_values(x), _as_values(y)
    tx = dt * np.arange(1, len(xv) + 1, dtype=np.float64)
    ty = dt * np.arange(1, len(yv) + 1, dtype=np.float64)
    return float(_twed_core(xv, tx, yv, ty, nu, lam))


# ---------------------------------------------------------------------------
# dispatch and pairwise matrices


def kernel_distance(x, y, config: KernelConfig) -> float:
    """Compute the configured kernel between two series."""
    kind = config.kind
    if kind == "ed":
        return euclidean(x, y)
    if kind == "dtw":
        return dtw(x, y, band=config.band)
    if kind == "shapedtw":
        return shape_dtw(x, y, config.descriptor_len, config.include_derivative)
    if kind == "dtws":
        return dtw_plus_s(x, y, config.shapelets)
    if kind == "sbd":
        return sbd(x, y)
    if kind == "twed":
        return twed(x, y, nu=config.nu, lam=config.lam)
    raise ValueError(f"unknown kernel kind {kind!r}")


@dataclass(frozen=True)
class ScoreMatrix:
    """Symmetric pairwise distance matrix with the ids it was built from."""

    ids: tuple[str, ...]
    values: np.ndarray
    kernel: KernelConfig

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        n = len(self.ids)
        if values.shape != (n, n):
            raise ValueError(f"matrix shape {values.shape} does not match {n} ids")
        if len(set(self.ids)) != n:
            raise ValueError("duplicate ids in score matrix")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ids", tuple(self.ids))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScoreMatrix):
            return NotImplemented
        return (
            self.ids == other.ids
            and self.kernel == other.kernel
            and np.array_equal(self.values, other.values)
        )

    def index_of(self, id_: str) -> int:
        try:
            return self.ids.index(id_)
        except ValueError:
            raise KeyError(f"id {id_!r} not in score matrix") from None

    def submatrix(self, ids: Sequence[str]) -> "ScoreMatrix":
        idx = np.array([self.index_of(i) for i in ids])
        return ScoreMatrix(tuple(ids), self.values[np.ix_(idx, idx)], self.kernel)


def _prepare(values: np.ndarray, config: KernelConfig, basis: _ShapeletBasis | None):
    """Per-series representation so pairwise loops do not redo descriptor work."""
    kind = config.kind
    if kind == "shapedtw":
        return shape_descriptors(values, config.descriptor_len, config.include_derivative)
    if kind == "dtws":
        assert basis is not None
        return basis.transform(values)
    return values


def _pair_distance(a, b, config: KernelConfig) -> float:
    kind = config.kind
    if kind == "ed":
        return euclidean(a, b)
    if kind == "dtw":
        return dtw(a, b, band=config.band)
    if kind in ("shapedtw", "dtws"):
        return float(_dtw_multi_core(a, b))
    if kind == "sbd":
        return sbd(a, b)
    if kind == "twed":
        return twed(a, b, nu=config.nu, lam=config.lam)
    raise ValueError(f"unknown kernel kind {kind!r}")


def pairwise_matrix(
    series: Sequence,
    config: KernelConfig,
    ids: Sequence[str] | None = None,
) -> ScoreMatrix:
    """All pairwise kernel distances between the given series.

    Each unordered pair is computed once and mirrored; the diagonal is 0.
    Kernel errors are re-raised with the offending pair named.
    """
    values = [_as_values(s) for s in series]
    if len(values) == 0:
        raise ValueError("need at least one series")
    if ids is None:
        ids = tuple(str(i) for i in range(len(values)))
    else:
        ids = tuple(ids)
        if len(ids) != len(values):
            raise ValueError(f"{len(ids)} ids for {len(values)} series")
    basis = _ShapeletBasis(config.shapelets) if config.kind == "dtws" else None
    try:
        prepared = [_prepare(v, config, basis) for v in values]
    except ValueError as e:
        raise ValueError(f"kernel preparation failed: {e}") from e
    n = len(values)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            try:
                d = _pair_distance(prepared[i], prepared[j], config)
            except ValueError as e:
                raise ValueError(
                    f"kernel failed for pair ({ids[i]}, {ids[j]}): {e}"
                ) from e
            out[i, j] = d
            out[j, i] = d
    return ScoreMatrix(ids, out, config)
