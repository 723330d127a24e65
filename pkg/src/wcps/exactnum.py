"""Exact arithmetic over Q and real quadratic fields Q(sqrt(d)).

`QuadNum` is the scalar type used for every membership and comparison
decision in the package. `QVec` is a vectorised companion holding many field
elements over one common denominator; it backs point enumeration and comb
realisation, where creating one `QuadNum` per lattice point would be too slow.

Floats only appear through `qn_to_float` / `QuadNum.__float__` and the
`QVec.to_float` helper, which are used for reporting and for prefiltering
sign decisions that are then confirmed with integer arithmetic.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Iterable, Sequence

import mpmath
import numpy as np

Rational = Fraction

__all__ = [
    "Rational",
    "QuadNum",
    "QVec",
    "FieldMismatchError",
    "parse_quad",
    "format_quad",
    "qn_arith",
    "qn_conjugate",
    "qn_sign",
    "qn_floor",
    "qn_to_float",
    "qn_to_mpf",
    "squarefree_decompose",
    "quad_sqrt_of_rational",
]


class FieldMismatchError(ValueError):
    """Raised when two operands live in different quadratic fields."""


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Return (k, d) with n = k**2 * d and d square-free."""
    if n < 0:
        raise ValueError("negative radicand")
    if n == 0:
        return 0, 1
    k, d, p = 1, n, 2
    while p * p <= d:
        while d % (p * p) == 0:
            d //= p * p
            k *= p
        p += 1 if p == 2 else 2
    return k, d


def _is_squarefree(d: int) -> bool:
    return d >= 1 and squarefree_decompose(d)[1] == d


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, _RationalABC)) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, bool):
        return Fraction(int(x))
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _floor_div_surd(p: int, r: int, q: int, d: int) -> int:
    """floor((p + r*sqrt(d)) / q) for integers, q > 0, d square-free."""
    if r == 0 or d == 1:
        return (p + r) // q
    k = math.isqrt(r * r * d)
    # r*sqrt(d) is irrational, so it lies strictly between consecutive integers
    if r > 0:
        return (p + k) // q
    return (p - k - 1) // q


class QuadNum:
    """Element a + b*sqrt(d) of Q(sqrt(d)) with exact rational a, b.

    d = 1 denotes a plain rational that has not been attached to a field;
    such values combine freely with any field. Operands from two different
    fields with d > 1 raise `FieldMismatchError`.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int = 1):
        a = _as_fraction(a)
        b = _as_fraction(b)
        d = int(d)
        if d < 1:
            raise ValueError("d must be a positive square-free integer")
        if d == 1:
            a, b = a + b, Fraction(0)
        elif not _is_squarefree(d):
            raise ValueError(f"d={d} is not square-free")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("QuadNum is immutable")

    def __reduce__(self):
        return (QuadNum, (self.a, self.b, self.d))

    # construction helpers -------------------------------------------------
    @classmethod
    def rational(cls, x, d: int = 1) -> "QuadNum":
        return cls(x, 0, d)

    @classmethod
    def sqrt(cls, d: int) -> "QuadNum":
        k, dd = squarefree_decompose(d)
        if dd == 1:
            return cls(k, 0, 1)
        return cls(0, k, dd)

    def _coerce(self, other) -> "QuadNum":
        if isinstance(other, QuadNum):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QuadNum(other, 0, self.d)
        return NotImplemented

    def _field(self, other: "QuadNum") -> int:
        if self.d == other.d:
            return self.d
        if self.d == 1:
            return other.d
        if other.d == 1:
            return self.d
        raise FieldMismatchError(f"Q(sqrt({self.d})) vs Q(sqrt({other.d}))")

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def in_field(self, d: int) -> "QuadNum":
        """Attach a rational value (or a value already in the field) to Q(sqrt(d))."""
        if self.d == d:
            return self
        if self.b != 0 and self.d != 1:
            raise FieldMismatchError(f"value in Q(sqrt({self.d})) cannot move to Q(sqrt({d}))")
        return QuadNum(self.a, 0, d)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadNum(self.a + other.a, self.b + other.b, self._field(other))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QuadNum(self.a - other.a, self.b - other.b, self._field(other))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d = self._field(other)
        a = self.a * other.a + self.b * other.b * d
        b = self.a * other.b + self.b * other.a
        return QuadNum(a, b, d)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other:
            raise ZeroDivisionError("division by zero in Q(sqrt(d))")
        d = self._field(other)
        n = other.norm()
        num = self * other.conjugate()
        return QuadNum(num.a / n, num.b / n, d)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return QuadNum(1, 0, self.d) / (self ** (-k))
        out = QuadNum(1, 0, self.d)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __neg__(self):
        return QuadNum(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def conjugate(self) -> "QuadNum":
        return QuadNum(self.a, -self.b, self.d)

    # order ----------------------------------------------------------------
    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 d
        lhs = self.a * self.a
        rhs = self.b * self.b * self.d
        return sa if lhs > rhs else sb

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def _cmp(self, other) -> int:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).sign()

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __eq__(self, other):
        if isinstance(other, QuadNum):
            if self.a != other.a or self.b != other.b:
                return False
            return self.b == 0 or self.d == other.d
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    # conversions ----------------------------------------------------------
    def __floor__(self) -> int:
        return qn_floor(self)

    def __ceil__(self) -> int:
        return -qn_floor(-self)

    def __float__(self) -> float:
        return qn_to_float(self)[0]

    def integer_parts(self) -> tuple[int, int, int]:
        """(p, r, q) with value (p + r*sqrt(d)) / q, q > 0."""
        q = self.a.denominator * self.b.denominator // math.gcd(self.a.denominator, self.b.denominator)
        return self.a.numerator * (q // self.a.denominator), self.b.numerator * (q // self.b.denominator), q

    def __str__(self):
        return format_quad(self)

    def __repr__(self):
        return f"QuadNum('{format_quad(self)}', d={self.d})"


def _fmt_frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_quad(x: QuadNum) -> str:
    """Canonical text form "a+b*sqrt(d)"; rationals print as "p/q"."""
    if x.b == 0:
        return _fmt_frac(x.a)
    op = "+" if x.b > 0 else "-"
    return f"{_fmt_frac(x.a)}{op}{_fmt_frac(abs(x.b))}*sqrt({x.d})"


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
    (?:
      (?P<coef>\d+(?:/\d+)?)?\s*\*?\s*sqrt\(\s*(?P<rad>\d+)\s*\)(?:\s*/\s*(?P<div>\d+))?
      |
      (?P<rat>\d+(?:/\d+)?)
    )\s*""",
    re.VERBOSE,
)


def parse_quad(text: str, d: int | None = None) -> QuadNum:
    """Parse "a+b*sqrt(d)" (and sums of such terms) into a QuadNum.

    Rational inputs are attached to Q(sqrt(d)) when `d` is given.
    """
    if not isinstance(text, str):
        raise TypeError("expected a string")
    s = text.strip()
    if not s:
        raise ValueError("empty number")
    pos = 0
    a = Fraction(0)
    b = Fraction(0)
    field = None
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse quadratic number {text!r} at offset {pos}")
        if not first and m.group("sign") is None:
            raise ValueError(f"missing operator in {text!r} at offset {pos}")
        first = False
        sgn = -1 if m.group("sign") == "-" else 1
        if m.group("rat") is not None:
            a += sgn * Fraction(m.group("rat"))
        else:
            coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
            if m.group("div"):
                coef /= int(m.group("div"))
            k, dd = squarefree_decompose(int(m.group("rad")))
            if dd == 1:
                a += sgn * coef * k
            else:
                if field is not None and field != dd:
                    raise FieldMismatchError(f"mixed radicands in {text!r}")
                field = dd
                b += sgn * coef * k
        pos = m.end()
    if field is None:
        return QuadNum(a, 0, d if d is not None else 1)
    if d is not None and d != 1 and d != field:
        raise FieldMismatchError(f"{text!r} is not in Q(sqrt({d}))")
    return QuadNum(a, b, field)


def as_quad(x, d: int | None = None) -> QuadNum:
    """Coerce int / Fraction / str / QuadNum to a QuadNum (attached to d if given)."""
    if isinstance(x, QuadNum):
        return x.in_field(d) if d not in (None, 1) else x
    if isinstance(x, str):
        return parse_quad(x, d)
    return QuadNum(_as_fraction(x), 0, d or 1)


# functional surface ---------------------------------------------------------
def qn_arith(x: QuadNum, y: QuadNum, op: str) -> QuadNum:
    ops = {"add": x.__add__, "sub": x.__sub__, "mul": x.__mul__, "div": x.__truediv__}
    if op not in ops:
        raise ValueError(f"unknown op {op!r}")
    return ops[op](y)


def qn_conjugate(x: QuadNum) -> QuadNum:
    return x.conjugate()


def qn_sign(x: QuadNum) -> int:
    return x.sign()


def qn_floor(x: QuadNum) -> int:
    """Greatest integer n <= x, decided with integer square roots only."""
    p, r, q = x.integer_parts()
    return _floor_div_surd(p, r, q, x.d) if r else p // q


def _floor_scaled(x: QuadNum, k: int) -> int:
    """floor(x * 2**k) for k >= 0 or k < 0."""
    p, r, q = x.integer_parts()
    if k >= 0:
        p <<= k
        r <<= k
    else:
        q <<= -k
    return _floor_div_surd(p, r, q, x.d) if r else p // q


def _scaled_estimate(x: QuadNum, bits: int) -> tuple[int, int, bool]:
    """Return (N, k, exact) with floor(x*2^k) = N and |N| >= 2^(bits+2).

    `exact` is True when x*2^k is an integer (possible only for rationals).
    """
    approx = abs(float(x.a)) + abs(float(x.b)) * math.sqrt(x.d)
    e = math.frexp(approx)[1] if approx not in (0.0, math.inf) else 0
    k = bits + 4 - e
    while True:
        n = _floor_scaled(x, k)
        if abs(n) >= (1 << (bits + 2)) or abs(n + 1) >= (1 << (bits + 2)):
            exact = x.b == 0 and (x.a * (Fraction(2) ** k)).denominator == 1
            return n, k, exact
        k += max(8, bits + 2 - max(abs(n).bit_length(), 1))


def qn_to_float(x: QuadNum, precision_bits: int = 53) -> tuple[float, float]:
    """Correctly rounded float approximation and an absolute error bound.

    For `precision_bits` above 53 the value is returned as an `mpmath.mpf`
    carrying that many bits; the bound is 2**(1-precision_bits)*|x|.
    """
    if precision_bits < 24:
        raise ValueError("precision_bits must be >= 24")
    if not x:
        return (0.0 if precision_bits <= 53 else mpmath.mpf(0)), 0.0
    n, k, exact = _scaled_estimate(x, max(precision_bits, 53))
    # sticky half-unit keeps correct rounding for irrational values
    num = n if exact else 2 * n + 1
    den_shift = k if exact else k + 1
    if precision_bits <= 53:
        if den_shift >= 0:
            val = float(Fraction(num, 1 << den_shift))
        else:
            val = float(num << (-den_shift))
        bound = abs(val) * 2.0 ** (1 - precision_bits)
        if precision_bits < 53:
            val = _round_bits(val, precision_bits)
        return val, bound
    with mpmath.workprec(precision_bits):
        val = mpmath.mpf(num) / mpmath.mpf(2) ** den_shift
    bound = float(abs(val)) * 2.0 ** (1 - precision_bits)
    return val, bound


def _round_bits(v: float, bits: int) -> float:
    m, e = math.frexp(v)
    scale = 1 << bits
    return math.ldexp(round(m * scale) / scale, e)


def qn_to_mpf(x: QuadNum, prec: int = 256):
    """mpmath value of x at `prec` bits (correctly rounded)."""
    if not x:
        return mpmath.mpf(0)
    return qn_to_float(x, max(prec, 54))[0]


def quad_sqrt_of_rational(r) -> QuadNum:
    """sqrt(r) for a non-negative rational r, as an element of Q(sqrt(d))."""
    r = _as_fraction(r)
    if r < 0:
        raise ValueError("negative radicand")
    p, q = r.numerator, r.denominator
    k, d = squarefree_decompose(p * q)
    return QuadNum(0, Fraction(k, q), d) if d != 1 else QuadNum(Fraction(k, q))


# vectorised exact values ---------------------------------------------------
def _obj(arr) -> np.ndarray:
    a = np.asarray(arr)
    if a.dtype == object:
        return a
    return a.astype(object)


class QVec:
    """Array of field elements (A + B*sqrt(d)) / D with one common D.

    A and B are numpy object arrays of Python ints so no operation can
    overflow. Only the operations the enumeration and comb code need are
    provided.
    """

    __slots__ = ("A", "B", "D", "d")

    def __init__(self, A, B, D: int, d: int):
        self.A = _obj(A)
        self.B = _obj(B)
        self.D = int(D)
        self.d = int(d)
        if self.D <= 0:
            raise ValueError("common denominator must be positive")

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, x: QuadNum, size: int, d: int) -> "QVec":
        p, r, q = x.in_field(d).integer_parts() if x.d in (1, d) else x.integer_parts()
        return cls(np.full(size, p, dtype=object), np.full(size, r, dtype=object), q, d)

    @classmethod
    def from_quads(cls, values: Sequence[QuadNum], d: int) -> "QVec":
        vals = [v.in_field(d) if v.d in (1, d) else v for v in values]
        D = 1
        for v in vals:
            D = math.lcm(D, v.a.denominator, v.b.denominator)
        A = np.array([v.a.numerator * (D // v.a.denominator) for v in vals] or [], dtype=object)
        B = np.array([v.b.numerator * (D // v.b.denominator) for v in vals] or [], dtype=object)
        return cls(A, B, D, d)

    @classmethod
    def affine(cls, c0: QuadNum, c1: QuadNum, c2: QuadNum, m, n, d: int) -> "QVec":
        """Values c0 + m*c1 + n*c2 for integer arrays m, n."""
        cs = [c.in_field(d) if c.d in (1, d) else c for c in (c0, c1, c2)]
        D = 1
        for c in cs:
            D = math.lcm(D, c.a.denominator, c.b.denominator)
        ints = [(c.a.numerator * (D // c.a.denominator), c.b.numerator * (D // c.b.denominator)) for c in cs]
        m = _obj(m)
        n = _obj(n)
        A = ints[0][0] + m * ints[1][0] + n * ints[2][0]
        B = ints[0][1] + m * ints[1][1] + n * ints[2][1]
        return cls(A, B, D, d)

    # basics ---------------------------------------------------------------
    def __len__(self):
        return len(self.A)

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            return QuadNum(Fraction(int(self.A[idx]), self.D), Fraction(int(self.B[idx]), self.D), self.d)
        return QVec(self.A[idx], self.B[idx], self.D, self.d)

    def to_list(self) -> list[QuadNum]:
        return [self[i] for i in range(len(self))]

    def _rescaled(self, D: int) -> tuple[np.ndarray, np.ndarray]:
        f = D // self.D
        return self.A * f, self.B * f

    def _align(self, other: "QVec") -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int]:
        if other.d != self.d and 1 not in (self.d, other.d):
            raise FieldMismatchError("QVec fields differ")
        D = math.lcm(self.D, other.D)
        a1, b1 = self._rescaled(D)
        a2, b2 = other._rescaled(D)
        return a1, b1, a2, b2, D

    def _scalar_parts(self, x) -> tuple[int, int, int]:
        x = as_quad(x)
        if x.d not in (1, self.d):
            raise FieldMismatchError("scalar outside the QVec field")
        return x.integer_parts()

    def __add__(self, other):
        if isinstance(other, QVec):
            a1, b1, a2, b2, D = self._align(other)
            return QVec(a1 + a2, b1 + b2, D, self.d)
        p, r, q = self._scalar_parts(other)
        D = math.lcm(self.D, q)
        a1, b1 = self._rescaled(D)
        return QVec(a1 + p * (D // q), b1 + r * (D // q), D, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QVec(-self.A, -self.B, self.D, self.d)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, QVec):
            a1, b1, a2, b2 = self.A, self.B, other.A, other.B
            return QVec(a1 * a2 + b1 * b2 * self.d, a1 * b2 + b1 * a2, self.D * other.D, self.d)
        p, r, q = self._scalar_parts(other)
        return QVec(self.A * p + self.B * r * self.d, self.A * r + self.B * p, self.D * q, self.d)

    __rmul__ = __mul__

    def reduced(self) -> "QVec":
        """Divide out the gcd of all numerators with D (cosmetic, keeps sizes small)."""
        g = self.D
        for v in self.A:
            g = math.gcd(g, int(v))
            if g == 1:
                return self
        for v in self.B:
            g = math.gcd(g, int(v))
            if g == 1:
                return self
        if g <= 1:
            return self
        return QVec(self.A // g, self.B // g, self.D // g, self.d)

    def cumsum(self) -> "QVec":
        return QVec(np.cumsum(self.A), np.cumsum(self.B), self.D, self.d) if len(self) else self

    def where(self, mask: np.ndarray, other: "QVec") -> "QVec":
        a1, b1, a2, b2, D = self._align(other)
        return QVec(np.where(mask, a1, a2), np.where(mask, b1, b2), D, self.d)

    @staticmethod
    def concatenate(parts: Iterable["QVec"], d: int) -> "QVec":
        parts = list(parts)
        if not parts:
            return QVec(np.zeros(0, dtype=object), np.zeros(0, dtype=object), 1, d)
        D = 1
        for p in parts:
            D = math.lcm(D, p.D)
        A = np.concatenate([p._rescaled(D)[0] for p in parts])
        B = np.concatenate([p._rescaled(D)[1] for p in parts])
        return QVec(A, B, D, d)

    # numeric views --------------------------------------------------------
    def to_float(self) -> np.ndarray:
        if len(self) == 0:
            return np.zeros(0)
        D = float(self.D) if self.D < (1 << 1000) else None
        if D is None or any(abs(int(v)) > (1 << 1000) for v in self.A):
            return np.array([float(self[i]) for i in range(len(self))])
        fa = self.A.astype(float)
        fb = self.B.astype(float)
        if self.d == 1:
            return (fa + fb) / D
        sd = math.sqrt(self.d)
        out = (fa + fb * sd) / D
        # opposite signs cancel; use (A + B r) = (A^2 - B^2 d) / (A - B r) there
        bad = np.nonzero((fa * fb < 0) & (np.abs(out) * D < 1e-3 * (np.abs(fa) + np.abs(fb) * sd)))[0]
        if len(bad):
            A, B = self.A[bad], self.B[bad]
            num = (A * A - B * B * self.d).astype(float)
            out[bad] = num / ((fa[bad] - fb[bad] * sd) * D)
        return out

    def to_mpf(self, prec: int = 256) -> list:
        return [qn_to_mpf(self[i], prec) for i in range(len(self))]

    def sign(self) -> np.ndarray:
        """Exact signs (-1, 0, +1); floats decide only where they are provably right."""
        n = len(self)
        out = np.zeros(n, dtype=np.int8)
        if n == 0:
            return out
        try:
            fa = self.A.astype(float)
            fb = self.B.astype(float)
        except OverflowError:
            fa = fb = None
        if fa is not None and np.all(np.isfinite(fa)) and np.all(np.isfinite(fb)):
            sd = math.sqrt(self.d)
            val = fa + fb * sd
            err = (np.abs(fa) + np.abs(fb) * sd) * 1e-12 + 1e-300
            sure = np.abs(val) > err
            out[sure] = np.sign(val[sure]).astype(np.int8)
            todo = np.nonzero(~sure)[0]
        else:
            todo = np.arange(n)
        d = self.d
        for i in todo:
            a = int(self.A[i])
            b = int(self.B[i])
            sa = (a > 0) - (a < 0)
            sb = (b > 0) - (b < 0)
            if sb == 0:
                out[i] = sa
            elif sa == 0 or sa == sb:
                out[i] = sb
            else:
                out[i] = sa if a * a > b * b * d else sb
        return out

    def compare(self, other) -> np.ndarray:
        return (self - other).sign()
