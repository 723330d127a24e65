"""One-dimensional cut-and-project schemes over a real quadratic field.

A scheme is a planar lattice (basis columns plus a translate), a linear map
sending a plane point p to (direct, internal) coordinates, and a window in
the internal line. Three axis conventions are supported:

* ``coordinate``: direct = x, internal = y.
* ``orthogonal``: for slope alpha, internal = y - alpha*x (the intercept of
  the line of slope alpha through p) and direct is the x-parameter of the
  orthogonal projection of p onto the line y = alpha*x.
* ``oblique``: internal = y - alpha*x, direct = x + shear*internal. The
  orthogonal case is the shear alpha/(1+alpha^2).

The two non-coordinate maps have determinant 1, so lattice covolume and
window length give the density directly.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .exactnum import FieldMismatchError, QuadNum, QVec, as_quad, format_quad, parse_quad

__all__ = [
    "Window",
    "Scheme",
    "CpsPoint",
    "PointSet",
    "QuadNormalization",
    "SchemeError",
    "CONVENTIONS",
    "AXES",
    "build_scheme",
    "star_map",
    "enumerate_points",
    "count_points",
    "density",
    "split_scheme",
    "scale_scheme",
    "quad_normalize",
    "fibonacci_preset",
    "golden_ratio",
    "scheme_to_dict",
    "scheme_from_dict",
]

CONVENTIONS = ("half_open_right", "closed", "half_open_left")
AXES = ("coordinate", "orthogonal", "oblique")
_FLIP = {"half_open_right": "half_open_left", "half_open_left": "half_open_right", "closed": "closed"}


class SchemeError(ValueError):
    """Invalid scheme data (singular lattice, rational slope, empty window, ...)."""


def golden_ratio() -> QuadNum:
    return QuadNum(Fraction(1, 2), Fraction(1, 2), 5)


@dataclass(frozen=True)
class Window:
    a: QuadNum
    b: QuadNum
    convention: str = "half_open_right"

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise SchemeError(f"unknown boundary convention {self.convention!r}")
        if not self.a < self.b:
            raise SchemeError("window must satisfy a < b")

    @property
    def length(self) -> QuadNum:
        return self.b - self.a

    @property
    def midpoint(self) -> QuadNum:
        return (self.a + self.b) / 2

    def contains(self, x: QuadNum) -> bool:
        lo = (x - self.a).sign()
        hi = (self.b - x).sign()
        if self.convention == "half_open_right":
            return lo >= 0 and hi > 0
        if self.convention == "half_open_left":
            return lo > 0 and hi >= 0
        return lo >= 0 and hi >= 0

    def contains_vec(self, x: QVec) -> np.ndarray:
        lo = (x - self.a).sign()
        hi = (-(x - self.b)).sign()
        if self.convention == "half_open_right":
            return (lo >= 0) & (hi > 0)
        if self.convention == "half_open_left":
            return (lo > 0) & (hi >= 0)
        return (lo >= 0) & (hi >= 0)

    def scaled(self, k: QuadNum) -> "Window":
        """Image under c -> k*c (the convention flips when k < 0)."""
        if k.sign() > 0:
            return Window(self.a * k, self.b * k, self.convention)
        if k.sign() < 0:
            return Window(self.b * k, self.a * k, _FLIP[self.convention])
        raise SchemeError("cannot scale a window by zero")

    def shifted(self, c: QuadNum) -> "Window":
        return Window(self.a + c, self.b + c, self.convention)


@dataclass(frozen=True)
class CpsPoint:
    direct: QuadNum
    internal: QuadNum
    lattice_coords: tuple


@dataclass(frozen=True)
class Scheme:
    d: int
    basis: tuple  # ((b00, b01), (b10, b11)); columns are the generators
    translate: tuple
    slope: QuadNum | None
    window: Window
    axes: str = "coordinate"
    shear: QuadNum | None = None

    # derived quantities -------------------------------------------------
    def axis_map(self) -> tuple:
        """2x2 matrix A with (direct, internal) = A @ point."""
        one, zero = QuadNum(1, 0, self.d), QuadNum(0, 0, self.d)
        if self.axes == "coordinate":
            return ((one, zero), (zero, one))
        al = self.slope
        g = self.shear_value()
        return ((one - g * al, g), (-al, one))

    def shear_value(self) -> QuadNum:
        if self.axes == "orthogonal":
            return self.slope / (1 + self.slope * self.slope)
        if self.axes == "oblique":
            return self.shear
        return QuadNum(0, 0, self.d)

    def effective(self) -> tuple[tuple, tuple]:
        """(E, o): direct/internal of lattice point (m, n) are E @ (m, n) + o."""
        A = self.axis_map()
        B = self.basis
        E = tuple(tuple(A[i][0] * B[0][j] + A[i][1] * B[1][j] for j in range(2)) for i in range(2))
        t = self.translate
        o = tuple(A[i][0] * t[0] + A[i][1] * t[1] for i in range(2))
        return E, o

    def det_basis(self) -> QuadNum:
        B = self.basis
        return B[0][0] * B[1][1] - B[0][1] * B[1][0]

    def is_integer_lattice(self) -> bool:
        B = self.basis
        return B[0][0] == 1 and B[1][1] == 1 and B[0][1] == 0 and B[1][0] == 0

    @property
    def convention(self) -> str:
        return self.window.convention

    def with_window(self, window: Window) -> "Scheme":
        return replace(self, window=window)

    def with_translate(self, translate) -> "Scheme":
        return replace(self, translate=tuple(as_quad(v, self.d) for v in translate))


def _field_of(values) -> int:
    d = 1
    for v in values:
        if v is None:
            continue
        if v.d != 1:
            if d != 1 and d != v.d:
                raise FieldMismatchError("scheme entries live in different quadratic fields")
            d = v.d
    return d


def build_scheme(basis, translate=(0, 0), slope=None, window=None,
                 convention: str = "half_open_right", axes: str | None = None,
                 shear=None) -> Scheme:
    """Validate the data and return a Scheme.

    `basis` is a 2x2 nested sequence whose columns are the generators.
    `window` is a pair (a, b). Omitting `axes` picks ``coordinate`` when no
    slope is given and ``orthogonal`` otherwise.
    """
    if window is None:
        raise SchemeError("a window (a, b) is required")
    if axes is None:
        axes = "coordinate" if slope is None else "orthogonal"
    if axes not in AXES:
        raise SchemeError(f"unknown axes {axes!r}")
    B = [[as_quad(basis[i][j]) for j in range(2)] for i in range(2)]
    t = [as_quad(v) for v in translate]
    al = None if slope is None else as_quad(slope)
    g = None if shear is None else as_quad(shear)
    wa, wb = as_quad(window[0]), as_quad(window[1])
    d = _field_of([*B[0], *B[1], *t, al, g, wa, wb])
    B = tuple(tuple(x.in_field(d) for x in row) for row in B)
    t = tuple(x.in_field(d) for x in t)
    if axes != "coordinate":
        if al is None:
            raise SchemeError(f"axes={axes!r} requires a slope")
        al = al.in_field(d)
        if al.is_rational:
            raise SchemeError("rational slope: the internal projection of the lattice would not be dense")
    elif al is not None:
        al = al.in_field(d)
    if axes == "oblique":
        if g is None:
            raise SchemeError("oblique axes require a shear")
        g = g.in_field(d)
    else:
        g = None
    if not (wa < wb):
        raise SchemeError("empty window: need a < b")
    win = Window(wa.in_field(d), wb.in_field(d), convention)
    s = Scheme(d, B, t, al, win, axes, g)
    if not s.det_basis():
        raise SchemeError("singular lattice basis")
    E, _ = s.effective()
    # projections must be injective on the lattice and the internal image dense
    for row in E:
        if not row[1] or (row[0] / row[1]).is_rational:
            raise SchemeError("degenerate projection: a coordinate ratio of the lattice is rational")
    return s


def star_map(s: Scheme, gamma) -> CpsPoint | None:
    """Project lattice point gamma = (m, n); None if its internal image misses the window."""
    m, n = int(gamma[0]), int(gamma[1])
    E, o = s.effective()
    direct = o[0] + E[0][0] * m + E[0][1] * n
    internal = o[1] + E[1][0] * m + E[1][1] * n
    if not s.window.contains(internal):
        return None
    return CpsPoint(direct, internal, (m, n))


def _inverse2(E):
    det = E[0][0] * E[1][1] - E[0][1] * E[1][0]
    return ((E[1][1] / det, -E[0][1] / det), (-E[1][0] / det, E[0][0] / det))


class PointSet(Sequence):
    """Sorted CPS points held as exact vectors; items materialise as CpsPoint."""

    def __init__(self, direct: QVec, internal: QVec, m: np.ndarray, n: np.ndarray):
        self.direct = direct
        self.internal = internal
        self.m = m
        self.n = n
        self._df = None
        self._if = None

    def __len__(self):
        return len(self.m)

    def __getitem__(self, i):
        if isinstance(i, slice):
            idx = np.arange(len(self))[i]
            return PointSet(self.direct[idx], self.internal[idx], self.m[idx], self.n[idx])
        if i < 0:
            i += len(self)
        return CpsPoint(self.direct[i], self.internal[i], (int(self.m[i]), int(self.n[i])))

    def __iter__(self) -> Iterator[CpsPoint]:
        for i in range(len(self)):
            yield self[i]

    def direct_float(self) -> np.ndarray:
        if self._df is None:
            self._df = self.direct.to_float()
        return self._df

    def internal_float(self) -> np.ndarray:
        if self._if is None:
            self._if = self.internal.to_float()
        return self._if

    def directs(self) -> list[QuadNum]:
        return self.direct.to_list()

    def coords(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in zip(self.m, self.n)]


def _float_bounds(c0, c1, e, lo, hi, ms):
    """n-range from lo <= c0 + m*c1 + n*e <= hi as float arrays."""
    ef = float(e)
    base = float(c0) + ms * float(c1)
    x1 = (float(lo) - base) / ef
    x2 = (float(hi) - base) / ef
    return np.minimum(x1, x2), np.maximum(x1, x2), np.max(np.abs(base)) + abs(float(lo)) + abs(float(hi))


def _candidates(s: Scheme, lo: QuadNum, hi: QuadNum):
    E, o = s.effective()
    W = s.window
    Einv = _inverse2(E)
    # corners of the (direct, internal) box pulled back to lattice coordinates
    m_corner = [Einv[0][0] * (x - o[0]) + Einv[0][1] * (y - o[1]) for x in (lo, hi) for y in (W.a, W.b)]
    m_lo = min(math.floor(c) for c in m_corner)
    m_hi = max(math.floor(c) for c in m_corner) + 1
    ms = np.arange(m_lo, m_hi + 1, dtype=np.int64)
    lows, highs = [], []
    scale = 0.0
    for row, (blo, bhi), off in ((E[0], (lo, hi), o[0]), (E[1], (W.a, W.b), o[1])):
        if row[1]:
            l, h, mag = _float_bounds(off, row[0], row[1], blo, bhi, ms.astype(float))
            lows.append(l)
            highs.append(h)
            scale = max(scale, mag / abs(float(row[1])))
    if scale * 2.0 ** -48 > 0.5:
        raise SchemeError("enumeration range too large for certified float slab bounds")
    n_lo = np.ceil(np.max(lows, axis=0)).astype(np.int64) - 2
    n_hi = np.floor(np.min(highs, axis=0)).astype(np.int64) + 2
    counts = np.maximum(n_hi - n_lo + 1, 0)
    M = np.repeat(ms, counts)
    starts = np.repeat(n_lo, counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    N = starts + offsets
    return E, o, M, N


def _exact_sort(direct: QVec, order: np.ndarray, df: np.ndarray) -> np.ndarray:
    """Repair float ordering where neighbours are too close to trust."""
    order = order.copy()
    sd = df[order]
    gap = np.diff(sd)
    tol = 1e-9 * (1.0 + np.abs(sd[:-1]))
    suspect = np.nonzero(gap <= tol)[0]
    if len(suspect) == 0:
        return order
    # sort each maximal run of suspect neighbours exactly
    runs = []
    start = prev = None
    for i in suspect:
        if start is None:
            start = prev = i
        elif i == prev + 1:
            prev = i
        else:
            runs.append((start, prev + 1))
            start = prev = i
    runs.append((start, prev + 1))
    for a, b in runs:
        seg = list(order[a:b + 1])
        seg.sort(key=functools.cmp_to_key(lambda i, j: (direct[int(i)] - direct[int(j)]).sign()))
        order[a:b + 1] = seg
    return order


def enumerate_points(s: Scheme, lo, hi) -> PointSet:
    """All points of the scheme with direct coordinate in [lo, hi], ascending."""
    lo = as_quad(lo).in_field(s.d)
    hi = as_quad(hi).in_field(s.d)
    if not lo < hi:
        raise SchemeError("need lo < hi")
    E, o, M, N = _candidates(s, lo, hi)
    direct = QVec.affine(o[0], E[0][0], E[0][1], M, N, s.d)
    internal = QVec.affine(o[1], E[1][0], E[1][1], M, N, s.d)
    keep = (direct.compare(lo) >= 0) & (direct.compare(hi) <= 0) & s.window.contains_vec(internal)
    idx = np.nonzero(keep)[0]
    direct, internal, M, N = direct[idx], internal[idx], M[idx], N[idx]
    df = direct.to_float()
    order = _exact_sort(direct, np.argsort(df, kind="stable"), df)
    ps = PointSet(direct[order], internal[order], M[order], N[order])
    ps._df = df[order]
    return ps


def count_points(s: Scheme, lo, hi) -> int:
    return len(enumerate_points(s, lo, hi))


def density(s: Scheme, weight=None, prec: int = 256):
    """Points (or weighted mass) per unit of direct length.

    Unweighted results are exact field elements. A weight contributes its
    integral over the window: exact for piecewise-linear weights, a 256-bit
    value otherwise.
    """
    det = abs(s.det_basis())
    if weight is None:
        return s.window.length / det
    lo, hi = weight.support
    if lo < s.window.a or hi > s.window.b:
        raise SchemeError("weight support must lie inside the window")
    integ = weight.integral(prec=prec)
    if isinstance(integ, QuadNum):
        return integ.in_field(s.d) / det if integ.d in (1, s.d) else integ / det
    from .exactnum import qn_to_mpf

    return integ / qn_to_mpf(det, prec)


def split_scheme(s: Scheme, n: int) -> list[Scheme]:
    """Partition Z^2 into the n^2 cosets (k, l) + nZ^2, one scheme each."""
    if n < 1:
        raise SchemeError("n must be >= 1")
    if not s.is_integer_lattice():
        raise SchemeError("splitting needs a scheme over the integer lattice")
    if n == 1:
        return [s]
    nq = QuadNum(n, 0, s.d)
    zero = QuadNum(0, 0, s.d)
    basis = ((nq, zero), (zero, nq))
    out = []
    for k in range(n):
        for l in range(n):
            t = (s.translate[0] + k, s.translate[1] + l)
            out.append(replace(s, basis=basis, translate=t))
    return out


def scale_scheme(s: Scheme, f) -> Scheme:
    """Image of the scheme under the similarity p -> f*p (f > 0).

    Direct and internal coordinates both scale by f because the axis maps
    are linear and depend only on the slope.
    """
    f = as_quad(f).in_field(s.d)
    if f.sign() <= 0:
        raise SchemeError("scale factor must be positive")
    basis = tuple(tuple(x * f for x in row) for row in s.basis)
    t = tuple(x * f for x in s.translate)
    return replace(s, basis=basis, translate=t, window=s.window.scaled(f))


@dataclass(frozen=True)
class QuadNormalization:
    """Result of rewriting a scheme with basis (1,1),(beta,beta') over Z^2.

    Points correspond via direct' = kd * direct and internal' = ki * internal;
    a weight h on the old window becomes c -> h(c / ki) on the new one.
    """

    scheme: Scheme
    M: tuple
    alpha: QuadNum
    kd: QuadNum
    ki: QuadNum
    beta: QuadNum
    reflected: bool

    def transport_weight(self, h):
        from .weights import compose_linear

        return compose_linear(h, 1 / self.ki)

    def map_direct(self, x: QuadNum) -> QuadNum:
        return self.kd * x


def quad_normalize(s: Scheme) -> QuadNormalization:
    """Rewrite a coordinate-axes scheme with basis columns (1,1), (beta, beta').

    The new lattice is Z^2 with oblique axes of slope alpha = -1/beta'. When
    alpha < 0 the reflection (x, y) -> (-x, y) of Z^2 makes it positive,
    which only reverses the direct line.
    """
    B = s.basis
    if s.axes != "coordinate":
        raise SchemeError("quad_normalize expects coordinate axes")
    if not (B[0][0] == 1 and B[1][0] == 1):
        raise SchemeError("first basis column must be (1, 1)")
    beta, beta_c = B[0][1], B[1][1]
    if beta.is_rational:
        raise SchemeError("beta must be a quadratic irrational")
    if beta_c != beta.conjugate():
        raise SchemeError("second basis column must be (beta, beta')")
    diff = beta - beta_c
    M = ((-beta_c / diff, beta / diff), (QuadNum(1, 0, s.d) / diff, QuadNum(-1, 0, s.d) / diff))
    t = s.translate
    u = (M[0][0] * t[0] + M[0][1] * t[1], M[1][0] * t[0] + M[1][1] * t[1])
    alpha = -1 / beta_c
    kd = -beta_c / diff
    gamma = beta * kd
    ki = 1 / beta_c
    reflected = alpha.sign() < 0
    if reflected:
        alpha, gamma, kd = -alpha, -gamma, -kd
        u = (-u[0], u[1])
    one, zero = QuadNum(1, 0, s.d), QuadNum(0, 0, s.d)
    win = s.window.scaled(ki)
    ns = build_scheme(((one, zero), (zero, one)), u, alpha, (win.a, win.b), win.convention,
                      axes="oblique", shear=gamma)
    return QuadNormalization(ns, M, alpha, kd, ki, beta, reflected)


def fibonacci_preset(kind: str = "full") -> Scheme:
    """Lattice <(1,1), (tau,-1/tau)> with coordinate axes.

    full: window [-1/tau, 1) of length tau. half: [-1/tau, -1/tau + tau/2).
    """
    tau = golden_ratio()
    a = -1 / tau
    if kind == "full":
        b = QuadNum(1, 0, 5)
    elif kind == "half":
        b = a + tau / 2
    else:
        raise SchemeError(f"unknown preset {kind!r}")
    return build_scheme(((1, tau), (1, -1 / tau)), (0, 0), None, (a, b), "half_open_right")


# serialisation ----------------------------------------------------------
def scheme_to_dict(s: Scheme) -> dict:
    f = format_quad
    out = {
        "d": s.d,
        "basis": [[f(x) for x in row] for row in s.basis],
        "translate": [f(x) for x in s.translate],
        "slope": None if s.slope is None else f(s.slope),
        "window": [f(s.window.a), f(s.window.b)],
        "convention": s.window.convention,
        "axes": s.axes,
    }
    if s.axes == "oblique":
        out["shear"] = f(s.shear)
    return out


def scheme_from_dict(data: dict) -> Scheme:
    required = ("basis", "window")
    for k in required:
        if k not in data:
            raise SchemeError(f"missing field {k!r}")
    d = int(data.get("d", 1))

    def q(x):
        if isinstance(x, (int, float)) and not isinstance(x, bool):
            if isinstance(x, float):
                raise SchemeError("floats are not exact; write numbers as strings")
            return QuadNum(x, 0, d)
        return parse_quad(str(x), d if d > 1 else None)

    try:
        basis = [[q(x) for x in row] for row in data["basis"]]
        translate = [q(x) for x in data.get("translate", [0, 0])]
        slope = None if data.get("slope") is None else q(data["slope"])
        window = [q(x) for x in data["window"]]
        shear = None if data.get("shear") is None else q(data["shear"])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SchemeError):
            raise
        raise SchemeError(str(exc)) from exc
    if len(basis) != 2 or any(len(r) != 2 for r in basis) or len(translate) != 2 or len(window) != 2:
        raise SchemeError("basis must be 2x2, translate and window pairs")
    s = build_scheme(basis, translate, slope, window, data.get("convention", "half_open_right"),
                     data.get("axes"), shear)
    if d > 1 and s.d not in (1, d):
        raise SchemeError("declared d does not match the entries")
    return s
