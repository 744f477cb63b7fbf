"""Slow, independent reference implementations used to validate the kernels.

Everything here favours obviousness over speed: explicit path enumeration,
plain Python loops, no shared code with the package internals.
"""

import math

import numpy as np


def warping_paths(n, m):
    """Yield every monotone path from (0,0) to (n-1,m-1) with steps
    right, down, or diagonal."""
    stack = [((0, 0),)]
    while stack:
        path = stack.pop()
        i, j = path[-1]
        if i == n - 1 and j == m - 1:
            yield path
            continue
        if i + 1 < n and j + 1 < m:
            stack.append(path + ((i + 1, j + 1),))
        if i + 1 < n:
            stack.append(path + ((i + 1, j),))
        if j + 1 < m:
            stack.append(path + ((i, j + 1),))


def dtw_brute(x, y):
    """Minimum path cost over all enumerated warping paths, |.| local cost."""
    best = math.inf
    for path in warping_paths(len(x), len(y)):
        cost = sum(abs(x[i] - y[j]) for i, j in path)
        best = min(best, cost)
    return best


def dtw_brute_multi(X, Y):
    """Path-enumeration DTW with Euclidean distance between feature rows."""
    best = math.inf
    for path in warping_paths(len(X), len(Y)):
        cost = 0.0
        for i, j in path:
            cost += math.sqrt(sum((a - b) ** 2 for a, b in zip(X[i], Y[j])))
        best = min(best, cost)
    return best


def dtw_dp_multi(X, Y):
    """Plain-Python DTW over feature rows (for series too long to enumerate)."""
    n, m = len(X), len(Y)
    D = [[math.inf] * (m + 1) for _ in range(n + 1)]
    D[0][0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            c = math.sqrt(sum((a - b) ** 2 for a, b in zip(X[i - 1], Y[j - 1])))
            D[i][j] = c + min(D[i - 1][j - 1], D[i - 1][j], D[i][j - 1])
    return D[n][m]


def shape_descriptors_loops(x, L, include_derivative=True):
    """Edge-replicated subsequence descriptors built point by point."""
    n = len(x)
    half = L // 2
    out = []
    for i in range(n):
        sub = []
        for o in range(-half, half + 1):
            idx = min(max(i + o, 0), n - 1)
            sub.append(float(x[idx]))
        desc = list(sub)
        if include_derivative and L > 1:
            desc += [sub[t + 1] - sub[t] for t in range(L - 1)]
        out.append(desc)
    return out


def shapedtw_brute(x, y, L, include_derivative=True):
    """shapeDTW by direct descriptor expansion + path enumeration."""
    return dtw_brute_multi(
        shape_descriptors_loops(x, L, include_derivative),
        shape_descriptors_loops(y, L, include_derivative),
    )


def dtws_reference(x, y, window=5):
    """Straight-line reimplementation of the default shapelet-matrix DTW.

    Patterns: up (rising line), down, peak (triangle), valley, flat
    (residual energy), each scored on the mean-centred unit window.
    """

    def unit(v):
        v = [a - sum(v) / len(v) for a in v]
        norm = math.sqrt(sum(a * a for a in v))
        return [a / norm for a in v]

    w = window
    ramp = [-1.0 + 2.0 * t / (w - 1) for t in range(w)]
    bump = [1.0 - abs(r) for r in ramp]
    up = unit(ramp)
    peak = unit(bump)

    def representation(series):
        rows = []
        for t in range(len(series) - w + 1):
            win = [float(v) for v in series[t : t + w]]
            mean = sum(win) / w
            c = [v - mean for v in win]
            norm = math.sqrt(sum(a * a for a in c))
            if norm == 0.0:
                rows.append([0.0, 0.0, 0.0, 0.0, 1.0])
                continue
            cu = sum(a * b for a, b in zip(c, up)) / norm
            cp = sum(a * b for a, b in zip(c, peak)) / norm
            flat = math.sqrt(max(1.0 - cu * cu - cp * cp, 0.0))
            rows.append([max(cu, 0.0), max(-cu, 0.0), max(cp, 0.0), max(-cp, 0.0), flat])
        return rows

    return dtw_dp_multi(representation(x), representation(y))


def twed_brute(x, y, nu, lam, dt=1.0):
    """TWED by exhaustive enumeration of edit paths (tiny inputs only).

    States walk (i, j) over consumed prefix lengths; operations are
    delete-from-x, delete-from-y, and match, each priced per the TWED
    definition with a zero-valued padding point at time 0.  As in the
    standard formulation, every path starts by matching the two first
    points: the DP borders D(i,0) and D(0,j) are infinite for i,j >= 1,
    so an initial point can never be deleted before the first match.
    """

    def val(s, i):  # 1-based with padding at index 0
        return float(s[i - 1]) if i >= 1 else 0.0

    def ts(i):
        return dt * i

    n, m = len(x), len(y)
    best = [math.inf]

    def walk(i, j, cost):
        if cost >= best[0]:
            return
        if i == n and j == m:
            best[0] = cost
            return
        if i < n and j >= 1:
            step = abs(val(x, i + 1) - val(x, i)) + nu * (ts(i + 1) - ts(i)) + lam
            walk(i + 1, j, cost + step)
        if j < m and i >= 1:
            step = abs(val(y, j + 1) - val(y, j)) + nu * (ts(j + 1) - ts(j)) + lam
            walk(i, j + 1, cost + step)
        if i < n and j < m:
            step = (
                abs(val(x, i + 1) - val(y, j + 1))
                + abs(val(x, i) - val(y, j))
                + nu * (abs(ts(i + 1) - ts(j + 1)) + abs(ts(i) - ts(j)))
            )
            walk(i + 1, j + 1, cost + step)

    walk(0, 0, 0.0)
    return best[0]


def twed_reference(x, y, nu, lam):
    """Classic TWED dynamic program, written directly from the recurrence."""
    n, m = len(x), len(y)
    xp = [0.0] + [float(v) for v in x]
    yp = [0.0] + [float(v) for v in y]
    tx = [0.0] + [float(i) for i in range(1, n + 1)]
    ty = [0.0] + [float(j) for j in range(1, m + 1)]
    D = [[math.inf] * (m + 1) for _ in range(n + 1)]
    D[0][0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            del_x = D[i - 1][j] + abs(xp[i] - xp[i - 1]) + nu * (tx[i] - tx[i - 1]) + lam
            del_y = D[i][j - 1] + abs(yp[j] - yp[j - 1]) + nu * (ty[j] - ty[j - 1]) + lam
            match = (
                D[i - 1][j - 1]
                + abs(xp[i] - yp[j])
                + abs(xp[i - 1] - yp[j - 1])
                + nu * (abs(tx[i] - ty[j]) + abs(tx[i - 1] - ty[j - 1]))
            )
            D[i][j] = min(del_x, del_y, match)
    return D[n][m]


def sbd_brute(x, y):
    """SBD with an explicit shift loop over every overlapping alignment."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    nx = math.sqrt(sum(v * v for v in x))
    ny = math.sqrt(sum(v * v for v in y))
    if nx == 0.0 or ny == 0.0:
        raise ValueError("zero-norm input")
    n, m = len(x), len(y)
    best = 0.0
    best_abs = -1.0
    for shift in range(-(m - 1), n):
        cc = 0.0
        for j in range(m):
            i = j + shift
            if 0 <= i < n:
                cc += x[i] * y[j]
        ncc = cc / (nx * ny)
        if abs(ncc) > best_abs or (abs(ncc) == best_abs and ncc > best):
            best_abs = abs(ncc)
            best = ncc
    return min(max(1.0 - best, 0.0), 2.0)


def eer_brute(genuine, impostor):
    """min over candidate thresholds of max(FAR, FRR), by explicit loops."""
    candidates = sorted(set(list(genuine) + list(impostor)))
    best = 1.0  # tau = -inf: FAR 0, FRR 1
    for tau in candidates:
        far = sum(1 for s in impostor if s <= tau) / len(impostor)
        frr = sum(1 for s in genuine if s > tau) / len(genuine)
        best = min(best, max(far, frr))
    return best


def knn_brute(distances, k, aggregate="mean"):
    smallest = sorted(float(d) for d in distances)[:k]
    return max(smallest) if aggregate == "max" else sum(smallest) / k


def euclidean_brute(x, y):
    return math.sqrt(sum((float(a) - float(b)) ** 2 for a, b in zip(x, y)))


def random_series(rng, lo=20, hi=250, positive=True):
    """One random test series with a random length in [lo, hi]."""
    n = int(rng.integers(lo, hi + 1))
    base = rng.uniform(0.0 if positive else -5.0, 10.0, n)
    return np.asarray(base)
