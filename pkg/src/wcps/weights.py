"""Weight functions on the internal line.

Three families are provided: indicators, continuous piecewise-linear
functions (hats and their relatives) and two C^2 bump families (a quartic
dome and a cosine arc) with closed-form derivatives and certified bounds on
|h''|. Every weight is non-negative and vanishes outside its support.

Evaluation comes in three flavours: exact (`__call__` on QuadNum, and
`eval_qvec` for vectors), 256-bit (`eval_mp`) and float64 (`eval_float`).
The cosine arc has no exact evaluator.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

from .exactnum import QuadNum, QVec, as_quad, format_quad, parse_quad, qn_to_mpf

__all__ = [
    "WeightFn",
    "Indicator",
    "PiecewiseLinear",
    "Dome",
    "CosineArc",
    "WeightError",
    "make_hat",
    "make_c2_dome",
    "make_cosine_arc",
    "compose_linear",
    "compose_affine",
    "weight_to_dict",
    "weight_from_dict",
]


class WeightError(ValueError):
    pass


@lru_cache(maxsize=4096)
def _quad_mp(x: QuadNum, prec: int):
    return qn_to_mpf(x, prec)


def _mp(x, prec=256):
    if isinstance(x, QuadNum):
        return _quad_mp(x, prec)
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _bucket(q: QVec, breaks: Sequence[QuadNum]) -> np.ndarray:
    """Index k with breaks[k] <= q < breaks[k+1], decided exactly.

    Points left of breaks[0] get -1, points at or right of breaks[-1] get
    len(breaks) - 1.
    """
    qf = q.to_float()
    bf = np.array([float(b) for b in breaks])
    idx = np.searchsorted(bf, qf, side="right") - 1
    # distance to nearest breakpoint; only close calls need integer work
    near = np.zeros(len(qf), dtype=bool)
    for b in bf:
        near |= np.abs(qf - b) <= 1e-9 * (1 + abs(b))
    for i in np.nonzero(near)[0]:
        x = q[int(i)]
        k = -1
        for j, b in enumerate(breaks):
            if (x - b).sign() >= 0:
                k = j
        idx[i] = k
    return idx


class WeightFn:
    """Base class; subclasses set `kind` and `support` = (a, b)."""

    kind = "abstract"
    exact = True
    continuous_supported = False

    support: tuple

    def __call__(self, z):
        raise NotImplementedError

    def eval_mp(self, z, prec: int = 256):
        raise NotImplementedError

    def eval_float(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def eval_qvec(self, q: QVec) -> QVec:
        raise NotImplementedError

    def integral(self, prec: int = 256):
        raise NotImplementedError

    def integral_quadrature(self, prec: int = 256):
        """Independent 256-bit quadrature of the integral over the support."""
        a, b = (_mp(v, prec) for v in self.support)
        with mpmath.workprec(prec):
            pts = [a] + [_mp(x, prec) for x in self.breakpoints()[1:-1]] + [b]
            return mpmath.quad(lambda z: self.eval_mp(z, prec), pts)

    def breakpoints(self) -> list:
        return list(self.support)

    def sup(self):
        raise NotImplementedError

    @property
    def length(self):
        return self.support[1] - self.support[0]

    def _inside(self, z) -> bool:
        a, b = self.support
        return a <= z <= b


@dataclass(frozen=True, eq=False)
class Indicator(WeightFn):
    """h = value on [a, b], 0 elsewhere."""

    a: QuadNum
    b: QuadNum
    value: Fraction = Fraction(1)
    kind = "indicator"

    def __post_init__(self):
        object.__setattr__(self, "a", as_quad(self.a))
        object.__setattr__(self, "b", as_quad(self.b))
        object.__setattr__(self, "value", Fraction(self.value))
        if not self.a < self.b:
            raise WeightError("indicator support must have a < b")
        if self.value <= 0:
            raise WeightError("weights must be positive on their support")

    @property
    def support(self):
        return (self.a, self.b)

    def __call__(self, z):
        z = as_quad(z)
        return QuadNum(self.value) if self._inside(z) else QuadNum(0)

    def eval_mp(self, z, prec=256):
        a, b = _mp(self.a, prec), _mp(self.b, prec)
        return _mp(self.value, prec) if a <= z <= b else mpmath.mpf(0)

    def eval_float(self, z):
        z = np.asarray(z, dtype=float)
        return np.where((z >= float(self.a)) & (z <= float(self.b)), float(self.value), 0.0)

    def eval_qvec(self, q):
        inside = ((q - self.a).sign() >= 0) & ((-(q - self.b)).sign() >= 0)
        v = Fraction(self.value)
        n = len(q)
        A = np.where(inside, v.numerator, 0).astype(object)
        return QVec(A, np.zeros(n, dtype=object), v.denominator, q.d)

    def integral(self, prec=256):
        return (self.b - self.a) * QuadNum(self.value)

    def sup(self):
        return QuadNum(self.value)


@dataclass(frozen=True, eq=False)
class PiecewiseLinear(WeightFn):
    """Linear interpolation of (x_k, v_k); zero outside [x_0, x_n]."""

    xs: tuple
    vs: tuple
    kind = "piecewise_linear"

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(as_quad(x) for x in self.xs))
        object.__setattr__(self, "vs", tuple(as_quad(v) for v in self.vs))
        if len(self.xs) != len(self.vs) or len(self.xs) < 2:
            raise WeightError("need at least two breakpoints with one value each")
        for x0, x1 in zip(self.xs, self.xs[1:]):
            if not x0 < x1:
                raise WeightError("breakpoints must be strictly increasing")
        if any(v.sign() < 0 for v in self.vs):
            raise WeightError("weights must be non-negative")
        if all(not v for v in self.vs):
            raise WeightError("weight is identically zero")

    @property
    def support(self):
        return (self.xs[0], self.xs[-1])

    @property
    def continuous_supported(self):
        return not self.vs[0] and not self.vs[-1]

    def breakpoints(self):
        return list(self.xs)

    def slopes(self) -> list[QuadNum]:
        return [(v1 - v0) / (x1 - x0) for x0, x1, v0, v1 in zip(self.xs, self.xs[1:], self.vs, self.vs[1:])]

    def __call__(self, z):
        z = as_quad(z)
        if z < self.xs[0] or z > self.xs[-1]:
            return QuadNum(0)
        for k in range(len(self.xs) - 1):
            if z <= self.xs[k + 1]:
                x0, x1, v0, v1 = self.xs[k], self.xs[k + 1], self.vs[k], self.vs[k + 1]
                return v0 + (v1 - v0) * (z - x0) / (x1 - x0)
        return self.vs[-1]

    def eval_mp(self, z, prec=256):
        with mpmath.workprec(prec):
            xs = [_mp(x, prec) for x in self.xs]
            vs = [_mp(v, prec) for v in self.vs]
            if z < xs[0] or z > xs[-1]:
                return mpmath.mpf(0)
            for k in range(len(xs) - 1):
                if z <= xs[k + 1]:
                    return vs[k] + (vs[k + 1] - vs[k]) * (z - xs[k]) / (xs[k + 1] - xs[k])
            return vs[-1]

    def eval_float(self, z):
        z = np.asarray(z, dtype=float)
        xs = np.array([float(x) for x in self.xs])
        vs = np.array([float(v) for v in self.vs])
        out = np.interp(z, xs, vs)
        return np.where((z < xs[0]) | (z > xs[-1]), 0.0, out)

    def eval_qvec(self, q):
        idx = _bucket(q, self.xs)
        n = len(self.xs)
        parts = []
        order = []
        slopes = self.slopes()
        for k in range(n - 1):
            sel = np.nonzero(idx == k)[0]
            if len(sel):
                parts.append((q[sel] - self.xs[k]) * slopes[k] + self.vs[k])
                order.append(sel)
        sel = np.nonzero(idx == n - 1)[0]
        # exactly at the right end the value is v_n; beyond it zero
        if len(sel):
            at_end = q[sel].compare(self.xs[-1]) == 0
            parts.append(QVec.from_quads([self.vs[-1] if e else QuadNum(0) for e in at_end], q.d))
            order.append(sel)
        sel = np.nonzero(idx < 0)[0]
        if len(sel):
            parts.append(QVec.constant(QuadNum(0), len(sel), q.d))
            order.append(sel)
        if not parts:
            return QVec(np.zeros(0, dtype=object), np.zeros(0, dtype=object), 1, q.d)
        allv = QVec.concatenate(parts, q.d)
        perm = np.concatenate(order)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        return allv[inv]

    def integral(self, prec=256):
        total = QuadNum(0)
        for x0, x1, v0, v1 in zip(self.xs, self.xs[1:], self.vs, self.vs[1:]):
            total = total + (x1 - x0) * (v0 + v1) / 2
        return total

    def sup(self):
        return max(self.vs)


@dataclass(frozen=True, eq=False)
class Dome(WeightFn):
    """h(z) = A (1 - u^2)^2 with u the affine map of [a, b] onto [-1, 1].

    h and h' vanish at both ends. With u' = 2/(b-a) one has
    h'' = -4 A u'^2 (1 - 3u^2), so sup|h''| = 8A / ((b-a)/2)^2 at u = +-1.
    """

    a: QuadNum
    b: QuadNum
    amplitude: QuadNum
    kind = "dome"
    continuous_supported = True

    def __post_init__(self):
        if not self.a < self.b:
            raise WeightError("degenerate dome support")
        if not self.amplitude > 0:
            raise WeightError("amplitude must be positive")

    @property
    def support(self):
        return (self.a, self.b)

    def _u(self, z):
        return (2 * z - self.a - self.b) / (self.b - self.a)

    def __call__(self, z):
        z = as_quad(z)
        if z < self.a or z > self.b:
            return QuadNum(0)
        w = 1 - self._u(z) ** 2
        return self.amplitude * w * w

    def eval_mp(self, z, prec=256):
        with mpmath.workprec(prec):
            a, b, A = _mp(self.a, prec), _mp(self.b, prec), _mp(self.amplitude, prec)
            if z < a or z > b:
                return mpmath.mpf(0)
            u = (2 * z - a - b) / (b - a)
            return A * (1 - u * u) ** 2

    def eval_float(self, z):
        z = np.asarray(z, dtype=float)
        a, b, A = float(self.a), float(self.b), float(self.amplitude)
        u = (2 * z - a - b) / (b - a)
        return np.where((z < a) | (z > b), 0.0, A * (1 - u * u) ** 2)

    def eval_qvec(self, q):
        inside = ((q - self.a).sign() >= 0) & ((-(q - self.b)).sign() >= 0)
        u = (q * 2 - (self.a + self.b)) * (1 / (self.b - self.a))
        w = u * u * (-1) + 1
        val = (w * w) * self.amplitude
        zero = QVec.constant(QuadNum(0), len(q), q.d)
        return val.where(inside, zero)

    def derivative(self, z, order: int):
        """Exact h', h'' (or h''') inside the support."""
        u = self._u(as_quad(z))
        up = 2 / (self.b - self.a)
        A = self.amplitude
        if order == 1:
            return -4 * A * u * (1 - u * u) * up
        if order == 2:
            return -4 * A * (1 - 3 * u * u) * up * up
        if order == 3:
            return 24 * A * u * up ** 3
        raise ValueError("order must be 1, 2 or 3")

    def derivative_mp(self, z, order: int, prec=256):
        with mpmath.workprec(prec):
            a, b, A = _mp(self.a, prec), _mp(self.b, prec), _mp(self.amplitude, prec)
            u = (2 * z - a - b) / (b - a)
            up = 2 / (b - a)
            if order == 1:
                return -4 * A * u * (1 - u * u) * up
            if order == 2:
                return -4 * A * (1 - 3 * u * u) * up * up
            if order == 3:
                return 24 * A * u * up ** 3
        raise ValueError("order must be 1, 2 or 3")

    def sup_h1(self) -> QuadNum:
        # |4u(1-u^2)| <= 8/(3 sqrt 3) < 2 on [-1, 1]
        return 2 * self.amplitude * 2 / (self.b - self.a)

    def sup_h2(self) -> QuadNum:
        half = (self.b - self.a) / 2
        return 8 * self.amplitude / (half * half)

    def sup_h3(self) -> QuadNum:
        return 24 * self.amplitude * (2 / (self.b - self.a)) ** 3

    def integral(self, prec=256):
        # int_{-1}^{1} (1-u^2)^2 du = 16/15
        return self.amplitude * (self.b - self.a) / 2 * Fraction(16, 15)

    def sup(self):
        return self.amplitude


@dataclass(frozen=True, eq=False)
class CosineArc(WeightFn):
    """h(z) = A cos^2(pi u / 2), u as for Dome. Numeric only."""

    a: QuadNum
    b: QuadNum
    amplitude: QuadNum
    kind = "cosine_arc"
    exact = False
    continuous_supported = True

    def __post_init__(self):
        if not self.a < self.b:
            raise WeightError("degenerate cosine-arc support")
        if not self.amplitude > 0:
            raise WeightError("amplitude must be positive")

    @property
    def support(self):
        return (self.a, self.b)

    def __call__(self, z):
        raise WeightError("cosine arcs have no exact evaluator")

    def eval_qvec(self, q):
        raise WeightError("cosine arcs have no exact evaluator")

    def eval_mp(self, z, prec=256):
        with mpmath.workprec(prec):
            a, b, A = _mp(self.a, prec), _mp(self.b, prec), _mp(self.amplitude, prec)
            if z < a or z > b:
                return mpmath.mpf(0)
            u = (2 * z - a - b) / (b - a)
            return A * mpmath.cos(mpmath.pi * u / 2) ** 2

    def eval_float(self, z):
        z = np.asarray(z, dtype=float)
        a, b, A = float(self.a), float(self.b), float(self.amplitude)
        u = (2 * z - a - b) / (b - a)
        return np.where((z < a) | (z > b), 0.0, A * np.cos(np.pi * u / 2) ** 2)

    def derivative_mp(self, z, order: int, prec=256):
        # h = A (1 + cos(pi u)) / 2
        with mpmath.workprec(prec):
            a, b, A = _mp(self.a, prec), _mp(self.b, prec), _mp(self.amplitude, prec)
            u = (2 * z - a - b) / (b - a)
            w = mpmath.pi * 2 / (b - a)
            if order == 1:
                return -A / 2 * w * mpmath.sin(mpmath.pi * u)
            if order == 2:
                return -A / 2 * w ** 2 * mpmath.cos(mpmath.pi * u)
            if order == 3:
                return A / 2 * w ** 3 * mpmath.sin(mpmath.pi * u)
        raise ValueError("order must be 1, 2 or 3")

    def sup_h1(self, prec=256):
        with mpmath.workprec(prec):
            w = mpmath.pi * 2 / (_mp(self.b, prec) - _mp(self.a, prec))
            return _mp(self.amplitude, prec) / 2 * w

    def sup_h2(self, prec=256):
        with mpmath.workprec(prec):
            w = mpmath.pi * 2 / (_mp(self.b, prec) - _mp(self.a, prec))
            return _mp(self.amplitude, prec) / 2 * w ** 2

    def sup_h3(self, prec=256):
        with mpmath.workprec(prec):
            w = mpmath.pi * 2 / (_mp(self.b, prec) - _mp(self.a, prec))
            return _mp(self.amplitude, prec) / 2 * w ** 3

    def integral(self, prec=256):
        with mpmath.workprec(prec):
            return _mp(self.amplitude, prec) * (_mp(self.b, prec) - _mp(self.a, prec)) / 2

    def sup(self):
        return self.amplitude


# constructors ------------------------------------------------------------
def make_hat(support, peak_position, peak_value=1) -> PiecewiseLinear:
    a, b = as_quad(support[0]), as_quad(support[1])
    p = as_quad(peak_position)
    v = as_quad(peak_value)
    if not (a < p < b):
        raise WeightError("hat peak must lie strictly inside the support")
    if not v > 0:
        raise WeightError("hat peak value must be positive")
    return PiecewiseLinear((a, p, b), (QuadNum(0), v, QuadNum(0)))


def make_c2_dome(support, amplitude=1) -> Dome:
    return Dome(as_quad(support[0]), as_quad(support[1]), as_quad(amplitude))


def make_cosine_arc(support, amplitude=1) -> CosineArc:
    return CosineArc(as_quad(support[0]), as_quad(support[1]), as_quad(amplitude))


def compose_affine(h: WeightFn, k, c0=0) -> WeightFn:
    """The weight z -> h(k*z + c0) (k != 0)."""
    k = as_quad(k)
    c0 = as_quad(c0)
    if not k:
        raise WeightError("scale must be non-zero")

    def pull(x):
        return (x - c0) / k

    if isinstance(h, Indicator):
        a, b = sorted((pull(h.a), pull(h.b)))
        return Indicator(a, b, h.value)
    if isinstance(h, PiecewiseLinear):
        pts = [(pull(x), v) for x, v in zip(h.xs, h.vs)]
        if k.sign() < 0:
            pts.reverse()
        return PiecewiseLinear(tuple(p[0] for p in pts), tuple(p[1] for p in pts))
    if isinstance(h, (Dome, CosineArc)):
        a, b = sorted((pull(h.a), pull(h.b)))
        return type(h)(a, b, h.amplitude)
    raise WeightError(f"cannot transport weight of kind {h.kind!r}")


def compose_linear(h: WeightFn, k) -> WeightFn:
    """The weight z -> h(k*z)."""
    return compose_affine(h, k, 0)


# serialisation -----------------------------------------------------------
def weight_to_dict(h: WeightFn) -> dict:
    f = format_quad
    if isinstance(h, Indicator):
        return {"kind": "indicator", "support": [f(h.a), f(h.b)], "value": f(QuadNum(h.value))}
    if isinstance(h, PiecewiseLinear):
        return {"kind": "piecewise_linear", "breakpoints": [[f(x), f(v)] for x, v in zip(h.xs, h.vs)]}
    if isinstance(h, (Dome, CosineArc)):
        return {"kind": h.kind, "support": [f(h.a), f(h.b)], "amplitude": f(h.amplitude)}
    raise WeightError(f"unknown weight kind {h.kind!r}")


def weight_from_dict(data: dict, d: int | None = None) -> WeightFn:
    def q(x):
        if isinstance(x, int) and not isinstance(x, bool):
            return QuadNum(x)
        if not isinstance(x, str):
            raise WeightError(f"expected an exact number string, got {x!r}")
        return parse_quad(x, d)

    kind = data.get("kind")
    try:
        if kind == "indicator":
            v = q(data.get("value", "1"))
            if not v.is_rational:
                raise WeightError("indicator value must be rational")
            return Indicator(q(data["support"][0]), q(data["support"][1]), v.a)
        if kind == "piecewise_linear":
            pts = data["breakpoints"]
            return PiecewiseLinear(tuple(q(p[0]) for p in pts), tuple(q(p[1]) for p in pts))
        if kind == "hat":
            return make_hat((q(data["support"][0]), q(data["support"][1])), q(data["peak"][0]), q(data["peak"][1]))
        if kind == "dome":
            return make_c2_dome((q(data["support"][0]), q(data["support"][1])), q(data.get("amplitude", "1")))
        if kind == "cosine_arc":
            return make_cosine_arc((q(data["support"][0]), q(data["support"][1])), q(data.get("amplitude", "1")))
    except (KeyError, IndexError, TypeError) as exc:
        raise WeightError(f"malformed {kind} weight: {exc}") from exc
    raise WeightError(f"unsupported weight kind {kind!r}")
