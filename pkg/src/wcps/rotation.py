"""Discrete and continuous toral rotations.

The continuous flow is X(s) = (x1 + s, x2 + alpha s) mod 1. Between two
wrap times it runs along one line y = alpha x + iota of the unit square,
with iota = x2 - alpha x1 + alpha i - j in cell (i, j). The distributional
error Delta_t(P) is the time spent in P up to t minus t * area(P).
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import _kernels
from .exactnum import QuadNum, QVec, as_quad, qn_floor, qn_to_mpf
from .regions import (
    EllipseRegion,
    GraphPairRegion,
    PolygonRegion,
    Region,
    ShearedGraphRegion,
    overlap_length,
)

__all__ = [
    "OrbitSegment",
    "DiscrepancyTrace",
    "KestenResult",
    "discrete_deficiency",
    "kesten_test",
    "orbit_segments",
    "delta_t",
    "delta_t_series",
    "delta_sup_scan",
    "delta_riemann",
    "float_segments",
]

MP = 256


def _mp(x, prec=MP):
    if isinstance(x, QuadNum):
        return qn_to_mpf(x, prec)
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


# discrete rotation -------------------------------------------------------
def _qvec_floor(v: QVec) -> np.ndarray:
    f = np.floor(v.to_float())
    frac = v.to_float() - f
    out = f.astype(object)
    for i in np.nonzero((frac < 1e-9) | (frac > 1 - 1e-9))[0]:
        out[i] = qn_floor(v[int(i)])
    return out


def discrete_deficiency(S, alpha, x, n: int, convention: str = "half_open_right") -> QuadNum:
    """D_n(S, x) = #{0 <= k < n : x + k alpha mod 1 in S} - n |S|, exactly."""
    if n < 0:
        raise ValueError("n must be >= 0")
    a, b = as_quad(S[0]), as_quad(S[1])
    al, x = as_quad(alpha), as_quad(x)
    if not (0 <= a <= b <= 1):
        raise ValueError("S must be a subinterval of [0, 1]")
    if n == 0:
        return QuadNum(0)
    d = next((v.d for v in (a, b, al, x) if v.d != 1), 1)
    k = np.arange(n, dtype=object)
    pts = QVec.affine(x, al, QuadNum(0), k, np.zeros(n, dtype=object), d)
    fl = _qvec_floor(pts)
    frac = pts - QVec(fl, np.zeros(n, dtype=object), 1, d)
    lo = (frac - a).sign()
    hi = (-(frac - b)).sign()
    if convention == "half_open_right":
        hits = (lo >= 0) & (hi > 0)
    elif convention == "closed":
        hits = (lo >= 0) & (hi >= 0)
    else:
        hits = (lo > 0) & (hi >= 0)
    return QuadNum(int(hits.sum())) - n * (b - a)


@dataclass(frozen=True)
class KestenResult:
    in_lattice: bool
    m: object = None
    n: object = None

    def __str__(self):
        return f"in_lattice({self.m},{self.n})" if self.in_lattice else "not_in"


def kesten_test(L, alpha) -> KestenResult:
    """Decide L in Z + alpha Z by matching coefficients in the basis {1, sqrt d}."""
    L, al = as_quad(L), as_quad(alpha)
    if al.is_rational:
        raise ValueError("alpha must be irrational")
    if L.d not in (1, al.d):
        raise ValueError("L and alpha live in different fields")
    n = L.b / al.b if L.d != 1 else Fraction(0)
    m = L.a - n * al.a
    if n.denominator == 1 and m.denominator == 1:
        return KestenResult(True, int(m), int(n))
    return KestenResult(False, m, n)


# orbit segmentation ------------------------------------------------------
@dataclass(frozen=True)
class OrbitSegment:
    s_start: object
    s_end: object
    cell: tuple
    entry: tuple

    @property
    def duration(self):
        return self.s_end - self.s_start


def orbit_segments(x, alpha, t_max, numeric: bool = False, prec: int = MP) -> list[OrbitSegment]:
    """Pieces of the flow on [0, t_max] between consecutive wraps.

    Exact (QuadNum) unless `numeric`, in which case everything is done with
    `prec`-bit floats; that path also accepts arbitrary real alpha.
    """
    if numeric:
        with mpmath.workprec(prec):
            x1, x2, al, T = (_mp(v, prec) for v in (x[0], x[1], alpha, t_max))
            return _segments(x1, x2, al, T, lambda v: int(mpmath.floor(v)))
    x1, x2 = as_quad(x[0]), as_quad(x[1])
    return _segments(x1, x2, as_quad(alpha), as_quad(t_max), qn_floor)


def _segments(x1, x2, al, T, floor):
    if not T > 0:
        return []
    i0, j0 = floor(x1), floor(x2)
    # next wraps: x1 + s = i0 + 1 + p and x2 + al s = j0 + 1 + q
    px, py = 1, 1
    segs = []
    s = 0 * T
    i, j = i0, j0
    while s < T:
        sx = i0 + px - x1
        sy = (j0 + py - x2) / al
        nxt = sx if sx < sy else sy
        end = nxt if nxt < T else T
        if end > s:
            segs.append(OrbitSegment(s, end, (i, j), (x1 + s - i, x2 + al * s - j)))
        if nxt >= T:
            break
        if sx == nxt:
            px += 1
            i += 1
        if sy == nxt:
            py += 1
            j += 1
        s = nxt
    return segs


def float_segments(x, alpha, t_max):
    """Vectorised float orbit segments: (s0, s1, u0, u1, iota)."""
    x1, x2, al = float(x[0]), float(x[1]), float(alpha)
    T = float(t_max)
    fx, fy = math.floor(x1), math.floor(x2)
    kx = np.arange(1, int(math.floor(x1 + T - fx)) + 2)
    sx = fx + kx - x1
    ky = np.arange(1, int(math.floor(x2 + al * T - fy)) + 2)
    sy = (fy + ky - x2) / al
    wraps = np.concatenate([sx, sy])
    kind = np.concatenate([np.zeros(len(sx), dtype=np.int8), np.ones(len(sy), dtype=np.int8)])
    order = np.argsort(wraps, kind="stable")
    wraps, kind = wraps[order], kind[order]
    keep = wraps < T
    wraps, kind = wraps[keep], kind[keep]
    s0 = np.concatenate([[0.0], wraps])
    s1 = np.concatenate([wraps, [T]])
    i = fx + np.concatenate([[0], np.cumsum(kind == 0)])
    j = fy + np.concatenate([[0], np.cumsum(kind == 1)])
    u0 = x1 + s0 - i
    u1 = x1 + s1 - i
    iota = x2 - al * x1 + al * i - j
    ok = s1 > s0
    return s0[ok], s1[ok], u0[ok], u1[ok], iota[ok]


# distributional error ----------------------------------------------------
def _area(P: Region, numeric: bool, prec=MP):
    if isinstance(P, PolygonRegion):
        return P.area_mp(prec) if numeric else P.area()
    a = P.area(prec)
    if numeric and isinstance(a, QuadNum):
        return _mp(a, prec)
    return a


def delta_t(P: Region, alpha, x, t, numeric: bool | None = None, prec: int = MP):
    """Delta_t(P, alpha, x) = time in P over [0, t] minus t * area(P).

    Exact for polygons and for sheared regions of exact weights; every
    other region (or numeric=True) runs at `prec` bits.
    """
    if numeric is None:
        numeric = not P.exact
    if numeric:
        with mpmath.workprec(prec):
            segs = orbit_segments(x, alpha, t, numeric=True, prec=prec)
            al = _mp(alpha, prec)
            x1, x2 = _mp(x[0], prec), _mp(x[1], prec)
            total = mpmath.mpf(0)
            cache = {}
            for sg in segs:
                i, j = sg.cell
                key = (i, j)
                if key not in cache:
                    cache[key] = P.chord_intervals(al, x2 - al * x1 + al * i - j, numeric=True)
                u0 = x1 + sg.s_start - i
                u1 = x1 + sg.s_end - i
                total += overlap_length(cache[key], u0, u1, mpmath.mpf(0))
            return total - _mp(t, prec) * _area(P, True, prec)
    if not P.exact:
        raise ValueError("exact evaluation needs a polygon or an exact weight region")
    al = as_quad(alpha)
    x1, x2 = as_quad(x[0]), as_quad(x[1])
    segs = orbit_segments((x1, x2), al, t)
    total = QuadNum(0)
    base = x2 - al * x1
    for sg in segs:
        i, j = sg.cell
        ivs = P.chord_intervals(al, base + al * i - j)
        if ivs:
            total = total + overlap_length(ivs, x1 + sg.s_start - i, x1 + sg.s_end - i, QuadNum(0))
    return total - as_quad(t) * _area(P, False)


def delta_t_series(P: Region, alpha, x, times, numeric: bool = False, prec: int = MP) -> list:
    """Delta_t at each of `times` from a single pass over the orbit.

    Same arithmetic as delta_t (exact, or `prec`-bit floats when numeric),
    but segments are walked once up to the largest time, so a whole grid
    costs about as much as its last point.
    """
    if not numeric and not P.exact:
        raise ValueError("exact evaluation needs a polygon or an exact weight region")
    with mpmath.workprec(prec):
        if numeric:
            conv = lambda v: _mp(v, prec)  # noqa: E731
            zero = mpmath.mpf(0)
        else:
            conv, zero = as_quad, QuadNum(0)
        ts = [conv(t) for t in times]
        out = [zero] * len(ts)
        if not ts:
            return out
        order = sorted(range(len(ts)), key=lambda k: ts[k])
        al, x1, x2 = conv(alpha), conv(x[0]), conv(x[1])
        lam = _area(P, numeric, prec)
        base = x2 - al * x1
        acc = zero
        cache = {}
        pos = 0
        for sg in orbit_segments((x1, x2), al, max(ts), numeric=numeric, prec=prec):
            i, j = sg.cell
            if (i, j) not in cache:
                cache[(i, j)] = P.chord_intervals(al, base + al * i - j, numeric=numeric)
            ivs = cache[(i, j)]
            u0 = x1 + sg.s_start - i
            # requested times inside this segment (or at its end)
            while pos < len(order) and ts[order[pos]] <= sg.s_end:
                t = ts[order[pos]]
                part = overlap_length(ivs, u0, x1 + t - i, zero) if t > sg.s_start else zero
                out[order[pos]] = acc + part - t * lam
                pos += 1
            acc = acc + overlap_length(ivs, u0, x1 + sg.s_end - i, zero)
        return out


def _chord_matrix(P: Region, alpha: float, iota: np.ndarray):
    if isinstance(P, PolygonRegion):
        edges = _kernels.edges_from_rings(P.float_rings())
        return _kernels.polygon_chords(iota, alpha, edges)
    if isinstance(P, ShearedGraphRegion):
        L = float(P.cprime) * P.h.eval_float(float(P.kappa) - iota)
        sp = (1 - iota) / (1 + float(P.alpha))
        lo = np.where(L > 0, sp - L / 2, np.nan)
        hi = np.where(L > 0, sp + L / 2, np.nan)
        return lo[:, None], hi[:, None]
    if isinstance(P, EllipseRegion):
        cx, cy, a, b = (float(v) for v in (P.cx, P.cy, P.a, P.b))
        k = alpha * cx + iota - cy
        A = 1 / a ** 2 + alpha ** 2 / b ** 2
        B = 2 * alpha * k / b ** 2
        C = k ** 2 / b ** 2 - 1
        disc = B * B - 4 * A * C
        r = np.sqrt(np.where(disc > 0, disc, np.nan))
        return (cx + (-B - r) / (2 * A))[:, None], (cx + (-B + r) / (2 * A))[:, None]
    if isinstance(P, GraphPairRegion):
        uniq, inv = np.unique(np.round(iota, 15), return_inverse=True)
        lo = np.full(len(uniq), np.nan)
        hi = np.full(len(uniq), np.nan)
        for k, io in enumerate(uniq):
            ivs = P.chord_intervals(alpha, io, prec=64)
            if ivs:
                lo[k], hi[k] = float(ivs[0][0]), float(ivs[-1][1])
        return lo[inv][:, None], hi[inv][:, None]
    raise ValueError(f"unsupported region kind {P.kind}")


@dataclass
class DiscrepancyTrace:
    times: np.ndarray
    values: np.ndarray
    running_sup: np.ndarray
    checkpoints: list = field(default_factory=list)  # (T, sup |Delta| on [0, T])
    events: np.ndarray | None = None

    def sup_at(self, T) -> float:
        for t, v in self.checkpoints:
            if t == T:
                return v
        k = np.searchsorted(self.times, T, side="right") - 1
        return float(self.running_sup[max(k, 0)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "delta", "running_sup", "events_since_last"])
        ev = self.events if self.events is not None else np.zeros(len(self.times), dtype=int)
        for t, v, s, e in zip(self.times, self.values, self.running_sup, ev):
            w.writerow([repr(float(t)), repr(float(v)), repr(float(s)), int(e)])
        return buf.getvalue()


def delta_sup_scan(P: Region, alpha, x, t_max, checkpoints=None, block: int = 1 << 16,
                   jobs: int = 1) -> DiscrepancyTrace:
    """Running sup of |Delta_t| over [0, t_max], sampled at every clip event.

    Delta is affine between chord entries/exits, so taking per-segment
    extrema (from the kernel) is exhaustive up to float rounding. Reported
    rows are the checkpoints (or powers of ten when none are given).
    """
    T = float(t_max)
    if checkpoints is None:
        checkpoints = [10.0 ** k for k in range(0, 20) if 10.0 ** k <= T]
    checkpoints = sorted(float(c) for c in checkpoints if float(c) <= T)
    al = float(alpha)
    lam = float(_area(P, True, 64)) if not isinstance(P, PolygonRegion) else float(P.area())
    s0, s1, u0, u1, iota = float_segments(x, alpha, T)
    starts = np.empty(len(s0))
    seg_max = np.empty(len(s0))
    seg_min = np.empty(len(s0))
    blocks = [slice(b0, b0 + block) for b0 in range(0, len(s0), block)]

    def work(sl):
        lo, hi = _chord_matrix(P, al, iota[sl])
        return _kernels.segment_profile(u0[sl], u1[sl], lo, hi, lam)

    # blocks are independent; stitching below runs in order, so the result
    # does not depend on the number of workers
    if jobs > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(work, blocks))
    else:
        parts = [work(sl) for sl in blocks]
    acc = 0.0
    for sl, (inside, mx, mn) in zip(blocks, parts):
        incr = inside - lam * (u1[sl] - u0[sl])
        cs = np.cumsum(incr)
        starts[sl] = acc + cs - incr
        seg_max[sl] = starts[sl] + mx
        seg_min[sl] = starts[sl] + mn
        acc += cs[-1] if len(cs) else 0.0
    absmax = np.maximum(np.abs(seg_max), np.abs(seg_min))
    running = np.maximum.accumulate(absmax) if len(absmax) else absmax
    rows = [min(int(np.searchsorted(s1, c, side="left")), len(s1) - 1) for c in checkpoints]
    ev = np.diff(np.concatenate([[-1], rows])).astype(int)
    # the checkpoint may cut its segment short, so redo that segment partially
    vals, sups = [], []
    for c, r in zip(checkpoints, rows):
        lo, hi = _chord_matrix(P, al, iota[r:r + 1])
        part_end = np.array([u0[r] + (c - s0[r])])
        inside, mx, mn = _kernels.segment_profile(u0[r:r + 1], part_end, lo, hi, lam)
        vals.append(starts[r] + inside[0] - lam * (c - s0[r]))
        prev = running[r - 1] if r > 0 else 0.0
        sups.append(float(max(prev, abs(starts[r] + mx[0]), abs(starts[r] + mn[0]))))
    table = list(zip(checkpoints, sups))
    values = np.array(vals)
    return DiscrepancyTrace(np.array(checkpoints), values, np.array(sups), table, ev)


def delta_riemann(P: PolygonRegion, alpha, x, t, step: float = 1e-6) -> float:
    """Midpoint-rule oracle for Delta_t of a polygon (float)."""
    n = int(round(float(t) / step))
    edges = _kernels.edges_from_rings(P.float_rings())
    cnt = _kernels.riemann_inside_count(float(x[0]), float(x[1]), float(alpha), float(t) / n, n, edges)
    return cnt * (float(t) / n) - float(t) * float(P.area())
