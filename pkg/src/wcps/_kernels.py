"""Float kernels for long scans, compiled with numba when available.

Set WCPS_DISABLE_NUMBA=1 to force the pure-numpy versions (also used when
numba cannot be imported). Both backends implement the same contracts and
are cross-checked in the test-suite.
"""
import os

import numpy as np

try:
    if os.environ.get("WCPS_DISABLE_NUMBA", "") not in ("", "0"):
        raise ImportError("disabled by WCPS_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

BACKEND = "numba" if HAS_NUMBA else "numpy"

__all__ = [
    "BACKEND",
    "HAS_NUMBA",
    "polygon_chords",
    "segment_profile",
    "riemann_inside_count",
    "polygon_chords_numpy",
    "segment_profile_numpy",
    "riemann_inside_count_numpy",
]


def edges_from_rings(rings):
    """(E, 4) array of x0, y0, x1, y1 for every ring edge."""
    out = []
    for ring in rings:
        n = len(ring)
        for i in range(n):
            x0, y0 = ring[i]
            x1, y1 = ring[(i + 1) % n]
            out.append((x0, y0, x1, y1))
    return np.array(out, dtype=np.float64).reshape(-1, 4)


# numpy reference implementations -------------------------------------------
def polygon_chords_numpy(iota, alpha, edges):
    """Even-odd chord intervals of lines y = alpha x + iota.

    Returns (lo, hi), arrays of shape (len(iota), E//2) padded with NaN.
    """
    iota = np.asarray(iota, dtype=np.float64)
    f0 = edges[None, :, 1] - alpha * edges[None, :, 0] - iota[:, None]
    f1 = edges[None, :, 3] - alpha * edges[None, :, 2] - iota[:, None]
    cross = (f0 > 0) != (f1 > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        x = edges[None, :, 0] + (edges[None, :, 2] - edges[None, :, 0]) * f0 / (f0 - f1)
    x = np.where(cross, x, np.nan)
    x = np.sort(x, axis=1)  # NaN sorts last
    k = x.shape[1] // 2
    return x[:, 0:2 * k:2], x[:, 1:2 * k:2]


def segment_profile_numpy(u0, u1, lo, hi, lam):
    """Per segment: time inside, and max/min of the running defect.

    Along a segment the defect starts at 0, rises with slope 1 - lam inside
    the chord intervals and falls with slope -lam outside; extrema sit at
    interval ends or at the segment ends.
    """
    u0 = np.asarray(u0, dtype=np.float64)
    u1 = np.asarray(u1, dtype=np.float64)
    a = np.clip(lo, u0[:, None], u1[:, None])
    b = np.clip(hi, u0[:, None], u1[:, None])
    a = np.where(np.isnan(a), u1[:, None], a)
    b = np.where(np.isnan(b), u1[:, None], b)
    b = np.maximum(a, b)
    piece = b - a
    inside_before = np.cumsum(piece, axis=1) - piece
    val_at_a = inside_before - lam * (a - u0[:, None])
    val_at_b = inside_before + piece - lam * (b - u0[:, None])
    inside = piece.sum(axis=1)
    end_val = inside - lam * (u1 - u0)
    mx = np.maximum(np.maximum(val_at_b.max(axis=1, initial=0.0), end_val), 0.0)
    mn = np.minimum(np.minimum(val_at_a.min(axis=1, initial=0.0), end_val), 0.0)
    return inside, mx, mn


def riemann_inside_count_numpy(x1, x2, alpha, step, n, edges, chunk=1 << 20):
    """Number of midpoint samples s_k = (k + 1/2) step, k < n, inside the polygon."""
    total = 0
    for start in range(0, n, chunk):
        k = np.arange(start, min(n, start + chunk), dtype=np.float64)
        s = (k + 0.5) * step
        px = np.mod(x1 + s, 1.0)
        py = np.mod(x2 + alpha * s, 1.0)
        inside = np.zeros(len(k), dtype=bool)
        for e in edges:
            xa, ya, xb, yb = e
            c = (ya > py) != (yb > py)
            with np.errstate(invalid="ignore", divide="ignore"):
                xc = xa + (xb - xa) * (py - ya) / (yb - ya)
            inside ^= c & (xc > px)
        total += int(inside.sum())
    return total


# numba implementations -----------------------------------------------------
if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def _polygon_chords_nb(iota, alpha, edges):
        n = iota.shape[0]
        m = edges.shape[0]
        k = m // 2
        lo = np.full((n, k), np.nan)
        hi = np.full((n, k), np.nan)
        buf = np.empty(m)
        for i in range(n):
            c = 0
            for e in range(m):
                f0 = edges[e, 1] - alpha * edges[e, 0] - iota[i]
                f1 = edges[e, 3] - alpha * edges[e, 2] - iota[i]
                if (f0 > 0) != (f1 > 0):
                    x = edges[e, 0] + (edges[e, 2] - edges[e, 0]) * f0 / (f0 - f1)
                    # few crossings per line: insertion sort in place
                    j = c
                    while j > 0 and buf[j - 1] > x:
                        buf[j] = buf[j - 1]
                        j -= 1
                    buf[j] = x
                    c += 1
            for j in range(c // 2):
                lo[i, j] = buf[2 * j]
                hi[i, j] = buf[2 * j + 1]
        return lo, hi

    @njit(cache=True, nogil=True)
    def _segment_profile_nb(u0, u1, lo, hi, lam):
        n = u0.shape[0]
        k = lo.shape[1]
        inside = np.zeros(n)
        mx = np.zeros(n)
        mn = np.zeros(n)
        for i in range(n):
            acc = 0.0
            best = 0.0
            worst = 0.0
            for j in range(k):
                a = lo[i, j]
                b = hi[i, j]
                if np.isnan(a):
                    continue
                a = min(max(a, u0[i]), u1[i])
                b = min(max(b, u0[i]), u1[i])
                if b <= a:
                    continue
                va = acc - lam * (a - u0[i])
                if va < worst:
                    worst = va
                acc += b - a
                vb = acc - lam * (b - u0[i])
                if vb > best:
                    best = vb
            end = acc - lam * (u1[i] - u0[i])
            if end > best:
                best = end
            if end < worst:
                worst = end
            inside[i] = acc
            mx[i] = best
            mn[i] = worst
        return inside, mx, mn

    @njit(cache=True, nogil=True)
    def _riemann_nb(x1, x2, alpha, step, n, edges):
        total = 0
        m = edges.shape[0]
        for k in range(n):
            s = (k + 0.5) * step
            px = (x1 + s) % 1.0
            py = (x2 + alpha * s) % 1.0
            inside = False
            for e in range(m):
                ya = edges[e, 1]
                yb = edges[e, 3]
                if (ya > py) != (yb > py):
                    xc = edges[e, 0] + (edges[e, 2] - edges[e, 0]) * (py - ya) / (yb - ya)
                    if xc > px:
                        inside = not inside
            if inside:
                total += 1
        return total


def polygon_chords(iota, alpha, edges):
    iota = np.ascontiguousarray(iota, dtype=np.float64)
    if HAS_NUMBA:
        return _polygon_chords_nb(iota, float(alpha), np.ascontiguousarray(edges, dtype=np.float64))
    return polygon_chords_numpy(iota, alpha, edges)


def segment_profile(u0, u1, lo, hi, lam):
    if HAS_NUMBA:
        return _segment_profile_nb(
            np.ascontiguousarray(u0, dtype=np.float64),
            np.ascontiguousarray(u1, dtype=np.float64),
            np.ascontiguousarray(lo, dtype=np.float64),
            np.ascontiguousarray(hi, dtype=np.float64),
            float(lam),
        )
    return segment_profile_numpy(u0, u1, lo, hi, lam)


def riemann_inside_count(x1, x2, alpha, step, n, edges):
    if HAS_NUMBA:
        return int(_riemann_nb(float(x1), float(x2), float(alpha), float(step), int(n),
                               np.ascontiguousarray(edges, dtype=np.float64)))
    return riemann_inside_count_numpy(x1, x2, alpha, step, n, edges)
