"""Planar regions in the unit square, chord lengths, width functions,
curvature, and the hypothesis checks for polygonal and convex BRS.

Lines are always written y = alpha*x + iota; iota is called the intercept
and doubles as the internal coordinate of the ``orthogonal``/``oblique``
axes in :mod:`wcps.scheme`. A chord is measured by default in "time", i.e.
by the x-extent, which is the time the flow s -> x + s(1, alpha) spends on
it. Euclidean lengths are that value times sqrt(1 + alpha^2).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath

from .exactnum import QuadNum, as_quad, qn_floor, qn_to_mpf
from .weights import Indicator, PiecewiseLinear, WeightError, WeightFn

__all__ = [
    "Region",
    "PolygonRegion",
    "ShearedGraphRegion",
    "GraphPairRegion",
    "EllipseRegion",
    "NumericWeight",
    "RegionError",
    "HypothesisReport",
    "region_from_weight",
    "width_function",
    "curvature",
    "GraphCurve",
    "ParametricCurve",
    "ArcLengthCurve",
    "EllipseCurve",
    "check_brs_hypotheses",
    "dome_decomposition",
    "unit_square",
    "fit_cap",
    "flow_strip",
]

MP = 256


class RegionError(ValueError):
    pass


def _mp(x, prec=MP):
    if isinstance(x, QuadNum):
        return qn_to_mpf(x, prec)
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _merge(intervals):
    out = []
    for a, b in sorted(intervals, key=lambda p: p[0]):
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1] = (out[-1][0], b)
        else:
            out.append((a, b))
    return out


def overlap_length(intervals, u0, u1, zero=0):
    """Total length of the union of `intervals` inside [u0, u1]."""
    total = zero
    for a, b in intervals:
        lo = a if a > u0 else u0
        hi = b if b < u1 else u1
        if hi > lo:
            total = total + (hi - lo)
    return total


class Region:
    kind = "abstract"
    exact = False

    def chord_intervals(self, alpha, iota, numeric: bool = False) -> list:
        """x-intervals where the line y = alpha x + iota lies in the region."""
        raise NotImplementedError

    def chord_length(self, alpha, iota, numeric: bool = False):
        ivs = self.chord_intervals(alpha, iota, numeric)
        zero = mpmath.mpf(0) if numeric or not self.exact else QuadNum(0)
        return overlap_length(ivs, ivs[0][0], ivs[-1][1], zero) if ivs else zero

    def area(self, prec=MP):
        raise NotImplementedError

    def inside_unit_square(self) -> bool:
        raise NotImplementedError

    def intercept_range(self, alpha):
        """(lo, hi) bounding all intercepts of lines meeting the region."""
        raise NotImplementedError


# polygons ----------------------------------------------------------------
def _ring_area2(ring):
    s = 0
    n = len(ring)
    for i in range(n):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % n]
        s = s + (x0 * y1 - x1 * y0)
    return s


def _crossings(rings, alpha, iota):
    """Even-odd crossings of the line with all ring edges (generic arithmetic)."""
    xs = []
    for ring in rings:
        n = len(ring)
        fs = [v[1] - alpha * v[0] - iota for v in ring]
        for i in range(n):
            j = (i + 1) % n
            fi, fj = fs[i], fs[j]
            if (fi > 0) != (fj > 0):
                xi, xj = ring[i][0], ring[j][0]
                xs.append(xi + (xj - xi) * fi / (fi - fj))
    xs.sort()
    return [(xs[k], xs[k + 1]) for k in range(0, len(xs) - 1, 2)]


def _point_in_rings(rings, p) -> bool:
    # even-odd ray cast to the right
    x, y = p
    inside = False
    for ring in rings:
        n = len(ring)
        for i in range(n):
            (x0, y0), (x1, y1) = ring[i], ring[(i + 1) % n]
            if (y0 > y) != (y1 > y):
                xc = x0 + (x1 - x0) * (y - y0) / (y1 - y0)
                if xc > x:
                    inside = not inside
    return inside


@dataclass(frozen=True, eq=False)
class PolygonRegion(Region):
    """Union of rings under the even-odd rule; vertices exact (QuadNum)."""

    rings: tuple
    meta: dict = field(default_factory=dict)
    kind = "polygon"
    exact = True

    def __post_init__(self):
        rings = tuple(tuple((as_quad(x), as_quad(y)) for x, y in ring) for ring in self.rings)
        for ring in rings:
            if len(ring) < 3:
                raise RegionError("a polygon ring needs at least 3 vertices")
            if not _ring_area2(ring):
                raise RegionError("degenerate (zero-area) polygon ring")
        object.__setattr__(self, "rings", rings)
        object.__setattr__(self, "_mp_cache", {})

    @classmethod
    def from_vertices(cls, verts) -> "PolygonRegion":
        return cls((tuple(verts),))

    def union(self, other: "PolygonRegion") -> "PolygonRegion":
        """Disjoint union, or set difference when `other` is nested inside."""
        return PolygonRegion(self.rings + other.rings)

    def mp_rings(self, prec=MP):
        if prec not in self._mp_cache:
            self._mp_cache[prec] = [[(_mp(x, prec), _mp(y, prec)) for x, y in r] for r in self.rings]
        return self._mp_cache[prec]

    def float_rings(self):
        return [[(float(x), float(y)) for x, y in r] for r in self.rings]

    def edges(self):
        for ring in self.rings:
            n = len(ring)
            for i in range(n):
                yield ring[i], ring[(i + 1) % n]

    def chord_intervals(self, alpha, iota, numeric=False, prec=MP):
        if numeric:
            with mpmath.workprec(prec):
                return _crossings(self.mp_rings(prec), _mp(alpha, prec), _mp(iota, prec))
        return _crossings(self.rings, as_quad(alpha), as_quad(iota))

    def area(self, prec=MP) -> QuadNum:
        # ring depth decides the sign of each ring's contribution
        total = QuadNum(0)
        for k, ring in enumerate(self.rings):
            others = self.rings[:k] + self.rings[k + 1:]
            depth_odd = _point_in_rings(others, ring[0]) if others else False
            a = abs(_ring_area2(ring)) / 2
            total = total - a if depth_odd else total + a
        return total

    def area_mp(self, prec=MP):
        with mpmath.workprec(prec):
            total = mpmath.mpf(0)
            rings = self.mp_rings(prec)
            for k, ring in enumerate(rings):
                others = rings[:k] + rings[k + 1:]
                depth_odd = _point_in_rings(others, ring[0]) if others else False
                a = abs(_ring_area2(ring)) / 2
                total = total - a if depth_odd else total + a
            return total

    def contains(self, p) -> bool:
        return _point_in_rings(self.rings, (as_quad(p[0]), as_quad(p[1])))

    def inside_unit_square(self) -> bool:
        return all(0 <= x <= 1 and 0 <= y <= 1 for r in self.rings for x, y in r)

    def intercept_range(self, alpha):
        al = as_quad(alpha)
        vals = [y - al * x for r in self.rings for x, y in r]
        return min(vals), max(vals)


def unit_square() -> PolygonRegion:
    return PolygonRegion.from_vertices([(0, 0), (1, 0), (1, 1), (0, 1)])


def flow_strip(alpha, width) -> PolygonRegion:
    """Parallelogram of the given width whose long edges follow the flow.

    Every passage of the flow through it lasts min(1, 1/alpha), so Delta
    sampled at passage ends is a rescaled discrete deficiency of an
    interval of length `width` under rotation by alpha (or 1/alpha).
    """
    al, w = as_quad(alpha), as_quad(width)
    if not (al > 0 and w > 0):
        raise RegionError("slope and width must be positive")
    if al <= 1:
        if al + w > 1:
            raise RegionError("strip does not fit the unit square")
        verts = [(0, 0), (1, al), (1, al + w), (0, w)]
    else:
        if 1 / al + w > 1:
            raise RegionError("strip does not fit the unit square")
        verts = [(0, 0), (w, 0), (w + 1 / al, 1), (1 / al, 1)]
    return PolygonRegion.from_vertices(verts)


# regions built from weights ----------------------------------------------
def fit_cap(alpha, iota):
    """Longest chord (in time) centred on the anti-diagonal that stays in [0,1]^2."""
    k = (1 if alpha <= 1 else 1 / alpha) * 2 / (1 + alpha)
    m = 1 - iota if 1 - iota < alpha + iota else alpha + iota
    return k * m if m > 0 else 0 * m


@dataclass(frozen=True, eq=False)
class ShearedGraphRegion(Region):
    """Chords of time-length c'*h(kappa - iota) along slope alpha.

    Each chord is centred on the anti-diagonal x + y = 1, so the region is
    the image of the symmetric graph region {|s| <= c' h(z)/2} under an
    affine map and is convex whenever h is concave.
    """

    h: WeightFn
    cprime: QuadNum
    kappa: QuadNum
    alpha: QuadNum
    kind = "sheared_graph"

    @property
    def exact(self):
        return self.h.exact

    def spine(self, iota):
        return (1 - iota) / (1 + self.alpha)

    def _check_alpha(self, alpha):
        if alpha is None or isinstance(alpha, mpmath.mpf):
            return
        if as_quad(alpha) != self.alpha:
            raise RegionError("sheared regions only resolve chords along their own slope")

    def chord_intervals(self, alpha, iota, numeric=False, prec=MP):
        self._check_alpha(alpha)
        if numeric or not self.h.exact:
            with mpmath.workprec(prec):
                io = _mp(iota, prec)
                al = _mp(self.alpha, prec)
                L = _mp(self.cprime, prec) * self.h.eval_mp(_mp(self.kappa, prec) - io, prec)
                if L <= 0:
                    return []
                sp = (1 - io) / (1 + al)
                return [(sp - L / 2, sp + L / 2)]
        io = as_quad(iota)
        L = self.cprime * self.h(self.kappa - io)
        if not L > 0:
            return []
        sp = self.spine(io)
        return [(sp - L / 2, sp + L / 2)]

    def area(self, prec=MP):
        integ = self.h.integral(prec)
        if isinstance(integ, QuadNum):
            return self.cprime * integ
        return _mp(self.cprime, prec) * integ

    def area_quadrature(self, prec=MP):
        with mpmath.workprec(prec):
            a, b = (_mp(v, prec) for v in self.h.support)
            pts = [a] + [_mp(x, prec) for x in self.h.breakpoints()[1:-1]] + [b]
            return _mp(self.cprime, prec) * mpmath.quad(lambda z: self.h.eval_mp(z, prec), pts)

    def intercept_range(self, alpha=None):
        a, b = self.h.support
        return self.kappa - b, self.kappa - a

    def inside_unit_square(self) -> bool:
        lo, hi = self.intercept_range()
        if not (-self.alpha <= lo and hi <= 1):
            return False
        if isinstance(self.h, PiecewiseLinear):
            return _pl_fits(self.h, self.cprime, self.kappa, self.alpha)
        if isinstance(self.h, Indicator):
            top = self.cprime * self.h.value
            return all(top <= fit_cap(self.alpha, self.kappa - x) for x in (self.h.a, self.h.b))
        return _curved_fits(self.h, self.cprime, self.kappa, self.alpha)

    def as_polygon(self) -> PolygonRegion:
        """Exact polygon for piecewise-linear (or indicator) weights."""
        h = self.h
        if isinstance(h, Indicator):
            xs, vs = [h.a, h.b], [QuadNum(h.value), QuadNum(h.value)]
        elif isinstance(h, PiecewiseLinear):
            xs, vs = list(h.xs), list(h.vs)
        else:
            raise RegionError("only piecewise-linear weights give polygons")
        right, left = [], []
        for x, v in zip(xs, vs):
            io = self.kappa - x
            sp = self.spine(io)
            half = self.cprime * v / 2
            right.append((sp + half, self.alpha * (sp + half) + io))
            left.append((sp - half, self.alpha * (sp - half) + io))
        ring = right + left[::-1]
        dedup = []
        for p in ring:
            if not dedup or dedup[-1] != p:
                dedup.append(p)
        if dedup[0] == dedup[-1]:
            dedup.pop()
        return PolygonRegion((tuple(dedup),))


def _pl_fits(h: PiecewiseLinear, cprime, kappa, alpha) -> bool:
    al = as_quad(alpha)
    knots = {x for x in h.xs}
    kink = kappa - (1 - al) / 2
    if h.xs[0] < kink < h.xs[-1]:
        knots.add(kink)
    for x in knots:
        if cprime * h(x) > fit_cap(al, kappa - x):
            return False
    return True


def _curved_fits(h, cprime, kappa, alpha, n: int = 4096) -> bool:
    """Certified check of c' h(c) <= cap(kappa - c) on the support.

    g = cap - c' h is Lipschitz with constant |cap'| + c' sup|h'|, so the
    grid minimum minus L*step/2 bounds g from below everywhere.
    """
    with mpmath.workprec(128):
        al = _mp(alpha)
        a, b = (_mp(v) for v in h.support)
        kap, cp = _mp(kappa), _mp(cprime)
        step = (b - a) / n
        gmin = mpmath.mpf("inf")
        for k in range(n + 1):
            c = a + step * k
            gmin = min(gmin, fit_cap(al, kap - c) - cp * h.eval_mp(c, 128))
        s1 = h.sup_h1()
        lip = 2 / (1 + al) * min(1, 1 / al) + cp * (_mp(s1) if isinstance(s1, QuadNum) else s1)
        return bool(gmin - lip * step / 2 >= 0)


def _default_cprime(h, kappa, alpha):
    """Largest dyadic c' = k / 2^20 that keeps the sheared region inside the square."""
    al = as_quad(alpha)
    if isinstance(h, PiecewiseLinear):
        ratio = None
        knots = list(h.xs)
        kink = kappa - (1 - al) / 2
        if h.xs[0] < kink < h.xs[-1]:
            knots.append(kink)
        for x in knots:
            v = h(x)
            if v > 0:
                r = fit_cap(al, kappa - x) / v
                ratio = r if ratio is None or r < ratio else ratio
    elif isinstance(h, Indicator):
        # constant height against a concave cap: the support ends decide
        v = as_quad(h.value)
        ratio = min(fit_cap(al, kappa - h.a), fit_cap(al, kappa - h.b)) / v
    else:
        return _default_cprime_curved(h, kappa, al)
    if ratio is None or not ratio > 0:
        raise RegionError("weight does not fit the projected unit square; split the scheme first")
    k = qn_floor(ratio * (1 << 20))
    if k <= 0:
        raise RegionError("weight does not fit the projected unit square; split the scheme first")
    return QuadNum(Fraction(k, 1 << 20))


def _default_cprime_curved(h, kappa, alpha, n: int = 1024):
    # grid ratio with a 5% safety margin, then certified and halved until it fits
    with mpmath.workprec(128):
        al, kap = _mp(alpha), _mp(kappa)
        a, b = (_mp(v) for v in h.support)
        ratio = mpmath.mpf("inf")
        for k in range(1, n):
            c = a + (b - a) * k / n
            v = h.eval_mp(c, 128)
            if v > 0:
                ratio = min(ratio, fit_cap(al, kap - c) / v)
    k = int(mpmath.floor(ratio * mpmath.mpf("0.95") * (1 << 20)))
    while k > 0:
        cp = QuadNum(Fraction(k, 1 << 20))
        if _curved_fits(h, cp, kappa, alpha):
            return cp
        k //= 2
    raise RegionError("weight does not fit the projected unit square; split the scheme first")


@dataclass(frozen=True, eq=False)
class GraphPairRegion(Region):
    """{(x, y): z0 <= x <= z1, lower(x) <= y <= upper(x)} (mp callables)."""

    upper: Callable
    lower: Callable
    z0: object
    z1: object
    upper_d2: Callable | None = None
    area_value: object = None
    meta: dict = field(default_factory=dict)
    kind = "graph_pair"
    exact = False

    def chord_intervals(self, alpha, iota, numeric=True, prec=MP, grid: int = 64):
        with mpmath.workprec(prec):
            al, io = _mp(alpha, prec), _mp(iota, prec)
            z0, z1 = _mp(self.z0, prec), _mp(self.z1, prec)

            def g(x):
                y = al * x + io
                return min(self.upper(x) - y, y - self.lower(x))

            xs = [z0 + (z1 - z0) * k / grid for k in range(grid + 1)]
            vals = [g(x) for x in xs]
            out = []
            tol = mpmath.mpf(2) ** (-(prec - 20))
            k = 0
            while k <= grid:
                if vals[k] >= 0:
                    start = k
                    while k + 1 <= grid and vals[k + 1] >= 0:
                        k += 1
                    lo = xs[start] if start == 0 else _bisect(g, xs[start - 1], xs[start], tol)
                    hi = xs[k] if k == grid else _bisect(g, xs[k + 1], xs[k], tol)
                    out.append((lo, hi))
                k += 1
            if not out:
                # a chord shorter than the grid step: look for a positive max
                best = max(range(grid + 1), key=lambda i: vals[i])
                lo_i, hi_i = max(best - 1, 0), min(best + 1, grid)
                xm = mpmath.findroot(lambda x: mpmath.diff(g, x), xs[best]) if 0 < best < grid else xs[best]
                if lo_i < hi_i and xs[lo_i] <= xm <= xs[hi_i] and g(xm) > 0:
                    out.append((_bisect(g, xs[lo_i], xm, tol), _bisect(g, xs[hi_i], xm, tol)))
            return out

    def area(self, prec=MP):
        if self.area_value is not None:
            return self.area_value
        with mpmath.workprec(prec):
            return mpmath.quad(lambda x: self.upper(x) - self.lower(x), [_mp(self.z0, prec), _mp(self.z1, prec)])

    def inside_unit_square(self, samples: int = 257) -> bool:
        z0, z1 = _mp(self.z0), _mp(self.z1)
        if z0 < 0 or z1 > 1:
            return False
        for k in range(samples):
            x = z0 + (z1 - z0) * k / (samples - 1)
            if self.upper(x) > 1 or self.lower(x) < 0:
                return False
        return True

    def intercept_range(self, alpha):
        al = _mp(alpha)
        z0, z1 = _mp(self.z0), _mp(self.z1)
        xs = [z0 + (z1 - z0) * k / 256 for k in range(257)]
        vals = [f(x) - al * x for x in xs for f in (self.upper, self.lower)]
        return min(vals) - mpmath.mpf(1e-6), max(vals) + mpmath.mpf(1e-6)


def _bisect(g, out_pt, in_pt, tol):
    """Boundary between g(out_pt) < 0 and g(in_pt) >= 0."""
    a, b = out_pt, in_pt
    while abs(b - a) > tol:
        m = (a + b) / 2
        if g(m) >= 0:
            b = m
        else:
            a = m
    return b


@dataclass(frozen=True, eq=False)
class EllipseRegion(Region):
    """Axis-aligned ellipse ((x-cx)/a)^2 + ((y-cy)/b)^2 <= 1."""

    cx: object
    cy: object
    a: object
    b: object
    kind = "ellipse"
    exact = False

    def chord_intervals(self, alpha, iota, numeric=True, prec=MP):
        with mpmath.workprec(prec):
            cx, cy, a, b = (_mp(v, prec) for v in (self.cx, self.cy, self.a, self.b))
            al, io = _mp(alpha, prec), _mp(iota, prec)
            # substitute y = al x + io and solve A u^2 + B u + C <= 0 in u = x - cx
            k = al * cx + io - cy
            A = 1 / a ** 2 + al ** 2 / b ** 2
            B = 2 * al * k / b ** 2
            C = k ** 2 / b ** 2 - 1
            disc = B * B - 4 * A * C
            if disc <= 0:
                return []
            r = mpmath.sqrt(disc)
            return [(cx + (-B - r) / (2 * A), cx + (-B + r) / (2 * A))]

    def area(self, prec=MP):
        with mpmath.workprec(prec):
            return mpmath.pi * _mp(self.a, prec) * _mp(self.b, prec)

    def inside_unit_square(self) -> bool:
        cx, cy, a, b = (_mp(v) for v in (self.cx, self.cy, self.a, self.b))
        return cx - a >= 0 and cx + a <= 1 and cy - b >= 0 and cy + b <= 1

    def intercept_range(self, alpha):
        with mpmath.workprec(MP):
            al = _mp(alpha)
            cx, cy, a, b = (_mp(v) for v in (self.cx, self.cy, self.a, self.b))
            r = mpmath.sqrt(b ** 2 + (al * a) ** 2)
            c = cy - al * cx
            return c - r, c + r


def region_from_weight(h: WeightFn, rescale=None, frame: str | None = None, alpha=None, kappa=None):
    """Region whose chords encode h.

    frame="graph": the region between y = 1/2 +- c' h(z)/2 drawn over a
    horizontal z axis, with the support centred in [0,1]. Chords in the
    vertical direction have length c' h.

    frame="alpha": chords along slope `alpha`; the line with intercept iota
    carries a chord of time-length c' h(kappa - iota). kappa defaults to
    mid(support) + (1 - alpha)/2, which centres the region at (1/2, 1/2).
    This is the region used by the comb/rotation bridge.

    The frame defaults to "alpha" when a slope is given. Without `rescale`
    the largest dyadic c' that fits is chosen. Piecewise
    linear weights give polygons; C^2 weights give curved regions.
    """
    a, b = h.support
    if frame is None:
        frame = "graph" if alpha is None else "alpha"
    if frame == "graph":
        if h.length > 1:
            raise RegionError("support longer than the unit square; split the scheme first")
        supv = as_quad(h.sup())
        if rescale is not None:
            cp = as_quad(rescale)
        elif supv <= 1:
            cp = QuadNum(1)
        else:
            cp = QuadNum(Fraction(qn_floor((1 << 20) / supv), 1 << 20))
        if cp * supv > 1:
            raise RegionError("rescaled weight is taller than the unit square")
        shift = Fraction(1, 2) - (a + b) / 2
        if isinstance(h, (PiecewiseLinear, Indicator)):
            if isinstance(h, Indicator):
                xs, vs = [h.a, h.b], [QuadNum(h.value)] * 2
            else:
                xs, vs = list(h.xs), list(h.vs)
            top = [(x + shift, Fraction(1, 2) + cp * v / 2) for x, v in zip(xs, vs)]
            bot = [(x + shift, Fraction(1, 2) - cp * v / 2) for x, v in zip(xs, vs)]
            ring = top + bot[::-1]
            dedup = []
            for p in ring:
                p = (as_quad(p[0]), as_quad(p[1]))
                if not dedup or dedup[-1] != p:
                    dedup.append(p)
            if dedup[0] == dedup[-1]:
                dedup.pop()
            return PolygonRegion((tuple(dedup),), meta={"cprime": cp, "frame": "graph"})
        sh, cpm = _mp(shift), _mp(cp)

        def up(x):
            return mpmath.mpf(1) / 2 + cpm * h.eval_mp(x - sh) / 2

        def lo(x):
            return mpmath.mpf(1) / 2 - cpm * h.eval_mp(x - sh) / 2

        d2 = None
        if hasattr(h, "derivative_mp"):
            def d2(x):
                return cpm * h.derivative_mp(x - sh, 2) / 2
        integ = h.integral()
        area = cpm * (_mp(integ) if isinstance(integ, QuadNum) else integ)
        return GraphPairRegion(up, lo, _mp(a) + sh, _mp(b) + sh, upper_d2=d2, area_value=area,
                               meta={"cprime": cp, "frame": "graph", "weight": h})
    if frame != "alpha":
        raise RegionError(f"unknown frame {frame!r}")
    if alpha is None:
        raise RegionError("frame='alpha' needs the slope")
    al = as_quad(alpha)
    if not al > 0:
        raise RegionError("slope must be positive")
    kap = as_quad(kappa) if kappa is not None else (a + b) / 2 + (1 - al) / 2
    lo_i, hi_i = kap - b, kap - a
    if lo_i < -al or hi_i > 1:
        raise RegionError("support longer than the projected unit square; split the scheme first")
    cp = as_quad(rescale) if rescale is not None else _default_cprime(h, kap, al)
    reg = ShearedGraphRegion(h, cp, kap, al)
    if not reg.inside_unit_square():
        raise RegionError("rescaled region leaves the unit square")
    if isinstance(h, (PiecewiseLinear, Indicator)):
        poly = reg.as_polygon()
        poly.meta.update(cprime=cp, kappa=kap, frame="alpha", source=reg)
        return poly
    return reg


# width functions ---------------------------------------------------------
@dataclass(frozen=True, eq=False)
class NumericWeight(WeightFn):
    """Weight given by an mp evaluator on [a, b]; used for curved widths."""

    fn: Callable
    a: object
    b: object
    kind = "numeric"
    exact = False

    @property
    def support(self):
        return (self.a, self.b)

    def __call__(self, z):
        return self.eval_mp(_mp(z))

    def eval_mp(self, z, prec=MP):
        if z < _mp(self.a) or z > _mp(self.b):
            return mpmath.mpf(0)
        return self.fn(z)

    def eval_float(self, z):
        import numpy as np

        return np.array([float(self.eval_mp(mpmath.mpf(float(v)))) for v in np.atleast_1d(z)])

    def integral(self, prec=MP):
        return self.integral_quadrature(prec)

    def sup(self):
        with mpmath.workprec(64):
            a, b = _mp(self.a), _mp(self.b)
            return max(self.fn(a + (b - a) * k / 512) for k in range(513))


def width_function(P: Region, alpha, measure: str = "time") -> WeightFn:
    """Chord length of P along slope alpha, as a function of the intercept.

    measure="time" gives x-extents over the intercept iota, exact and
    piecewise linear for polygons. measure="euclidean" gives true lengths
    over the signed orthogonal offset iota / sqrt(1 + alpha^2).
    """
    if measure not in ("time", "euclidean"):
        raise RegionError("measure must be 'time' or 'euclidean'")
    if isinstance(P, PolygonRegion):
        al = as_quad(alpha)
        for (x0, y0), (x1, y1) in P.edges():
            if y1 - y0 == al * (x1 - x0):
                raise RegionError("polygon has an edge of slope alpha; its width function is discontinuous")
        iotas = sorted({y - al * x for r in P.rings for x, y in r})
        vals = [P.chord_length(al, io) for io in iotas]
        pl = PiecewiseLinear(tuple(iotas), tuple(vals)) if any(vals) else None
        if pl is None:
            raise RegionError("region has empty chords")
        if measure == "time":
            return pl
        with mpmath.workprec(MP):
            s = mpmath.sqrt(1 + _mp(al) ** 2)
            z0, z1 = _mp(iotas[0]) / s, _mp(iotas[-1]) / s
        return NumericWeight(lambda z: s * pl.eval_mp(z * s), z0, z1)
    lo, hi = P.intercept_range(alpha)
    alm = _mp(alpha)
    with mpmath.workprec(MP):
        s = mpmath.sqrt(1 + alm ** 2) if measure == "euclidean" else mpmath.mpf(1)
        z0, z1 = _mp(lo) / s, _mp(hi) / s

    def fn(z):
        ivs = P.chord_intervals(alm, z * s, numeric=True)
        return s * sum((b - a for a, b in ivs), mpmath.mpf(0))

    return NumericWeight(fn, z0, z1)


# curvature ---------------------------------------------------------------
@dataclass(frozen=True)
class GraphCurve:
    """y = f(x) given through f' and f''."""

    d1: Callable
    d2: Callable


@dataclass(frozen=True)
class ParametricCurve:
    """r(t) given through r'(t) and r''(t) (pairs)."""

    d1: Callable
    d2: Callable


@dataclass(frozen=True)
class ArcLengthCurve:
    """r(s) parametrised by arc length, given through r''(s)."""

    d2: Callable


@dataclass(frozen=True)
class EllipseCurve:
    """x = a cos(theta), y = b sin(theta)."""

    a: object
    b: object

    def as_parametric(self) -> ParametricCurve:
        a, b = _mp(self.a), _mp(self.b)
        return ParametricCurve(
            lambda t: (-a * mpmath.sin(t), b * mpmath.cos(t)),
            lambda t: (-a * mpmath.cos(t), -b * mpmath.sin(t)),
        )


def curvature(curve, point, prec: int = MP):
    """Curvature at parameter `point` (x for graphs, t, s or theta otherwise)."""
    with mpmath.workprec(prec):
        p = _mp(point, prec)
        if isinstance(curve, GraphCurve):
            f1, f2 = curve.d1(p), curve.d2(p)
            return abs(f2) / (1 + f1 * f1) ** mpmath.mpf(1.5)
        if isinstance(curve, EllipseCurve):
            a, b = _mp(curve.a, prec), _mp(curve.b, prec)
            return a * b / (a ** 2 * mpmath.sin(p) ** 2 + b ** 2 * mpmath.cos(p) ** 2) ** mpmath.mpf(1.5)
        if isinstance(curve, ParametricCurve):
            (x1, y1), (x2, y2) = curve.d1(p), curve.d2(p)
            speed2 = x1 * x1 + y1 * y1
            if speed2 == 0:
                raise RegionError("curve is not regular at this point")
            return abs(x1 * y2 - y1 * x2) / speed2 ** mpmath.mpf(1.5)
        if isinstance(curve, ArcLengthCurve):
            x2, y2 = curve.d2(p)
            return mpmath.sqrt(x2 * x2 + y2 * y2)
    raise RegionError(f"unsupported curve {type(curve).__name__}")


# hypothesis checks -------------------------------------------------------
@dataclass
class HypothesisReport:
    status: str  # polygon_ok | convex_ok | decomposed_ok | fail
    reason: str = ""
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status != "fail"


def _circle_width(R, z0):
    def f(z, k=0):
        u = z - z0
        w = R * R - u * u
        if k == 0:
            return 2 * mpmath.sqrt(w)
        if k == 1:
            return -2 * u / mpmath.sqrt(w)
        if k == 2:
            return -2 * R * R / w ** mpmath.mpf(1.5)
        if k == 3:
            return -6 * R * R * u / w ** mpmath.mpf(2.5)
        raise ValueError(k)

    return f


def dome_decomposition(h: WeightFn, levels: int = 14, prec: int = 128) -> dict:
    """Certify the convex-difference construction for a C^2 weight.

    f is the width of the circle of radius R = 0.6|W| centred on the window,
    so supp(h) sits inside supp(f) with margin |W|/10 and f'' <= -2/R.
    With c1 = R * sup|h''| we get (c1 f - h)'' <= -2 c1/R + sup|h''| = c2 < 0.
    The bound is checked on a dyadic grid of 2^levels cells; between grid
    points it is transferred with the Lipschitz bound sup|(c1 f - h)'''|.
    """
    if not hasattr(h, "sup_h2"):
        raise WeightError("weight has no certified second-derivative bound")
    with mpmath.workprec(prec):
        a, b = (_mp(v, prec) for v in h.support)
        W = b - a
        z0 = (a + b) / 2
        R = W * 6 / 10
        f = _circle_width(R, z0)
        s2 = _mp(h.sup_h2(), prec) if isinstance(h.sup_h2(), QuadNum) else h.sup_h2()
        s3 = _mp(h.sup_h3(), prec) if isinstance(h.sup_h3(), QuadNum) else h.sup_h3()
        c1 = R * s2
        c2_claim = -2 * c1 / R + s2
        n = 1 << levels
        step = W / n
        worst = mpmath.mpf("-inf")
        min_gap = mpmath.mpf("inf")
        for k in range(n + 1):
            z = a + step * k
            g2 = c1 * f(z, 2) - h.derivative_mp(z, 2, prec)
            worst = max(worst, g2)
            min_gap = min(min_gap, c1 * f(z) - h.eval_mp(z, prec))
        lip = c1 * abs(f(b, 3)) + s3
        certified = worst + lip * step / 2
        return {
            "R": R,
            "c1": c1,
            "c2": c2_claim,
            "grid_max_g2": worst,
            "certified_sup_g2": certified,
            "min_c1f_minus_h": min_gap,
            "ok": bool(certified < 0 and min_gap >= 0),
        }


def _graph_convexity(h: WeightFn, samples: int = 2048, prec: int = 128) -> tuple[bool, str]:
    # the region between +-h/2 is convex with positive curvature iff h'' < 0 inside
    with mpmath.workprec(prec):
        a, b = (_mp(v, prec) for v in h.support)
        for k in range(1, samples):
            z = a + (b - a) * k / samples
            if h.derivative_mp(z, 2, prec) >= 0:
                return False, f"h'' >= 0 at z = {mpmath.nstr(z, 8)}; boundary curvature is not positive"
    return True, ""


def check_brs_hypotheses(P, alpha) -> HypothesisReport:
    """Polygon: no edge of slope alpha. Curved: positive curvature, directly or by decomposition."""
    if isinstance(P, PolygonRegion):
        if not P.inside_unit_square():
            return HypothesisReport("fail", "polygon leaves the unit square")
        al = as_quad(alpha)
        for k, ((x0, y0), (x1, y1)) in enumerate(P.edges()):
            if y1 - y0 == al * (x1 - x0):
                return HypothesisReport("fail", f"edge {k} has slope alpha", {"edge": k})
        return HypothesisReport("polygon_ok")
    if isinstance(P, EllipseRegion):
        if not P.inside_unit_square():
            return HypothesisReport("fail", "ellipse leaves the unit square")
        curve = EllipseCurve(P.a, P.b)
        kmin = min(curvature(curve, 2 * mpmath.pi * k / 64) for k in range(64))
        return HypothesisReport("convex_ok", details={"min_curvature_sampled": kmin})
    if isinstance(P, ShearedGraphRegion) or (isinstance(P, GraphPairRegion) and "weight" in P.meta):
        h = P.h if isinstance(P, ShearedGraphRegion) else P.meta["weight"]
        if isinstance(h, (PiecewiseLinear, Indicator)):
            return check_brs_hypotheses(P.as_polygon(), alpha)
        if not P.inside_unit_square():
            return HypothesisReport("fail", "region leaves the unit square")
        if not hasattr(h, "derivative_mp"):
            return HypothesisReport("fail", "weight has no derivative information")
        ok, why = _graph_convexity(h)
        if ok:
            return HypothesisReport("convex_ok")
        dec = dome_decomposition(h)
        if dec["ok"]:
            return HypothesisReport("decomposed_ok", why + "; handled as a difference of two convex regions", dec)
        return HypothesisReport("fail", why, dec)
    if isinstance(P, GraphPairRegion):
        if P.upper_d2 is None:
            return HypothesisReport("fail", "graph region without second derivatives")
        with mpmath.workprec(128):
            z0, z1 = _mp(P.z0), _mp(P.z1)
            for k in range(1, 2048):
                z = z0 + (z1 - z0) * k / 2048
                if P.upper_d2(z) >= 0:
                    return HypothesisReport("fail", "upper graph is not strictly concave")
        return HypothesisReport("convex_ok")
    return HypothesisReport("fail", f"unsupported region kind {getattr(P, 'kind', type(P).__name__)}")
