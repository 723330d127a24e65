"""Continued fractions of quadratic irrationals and the summability test.

Expansions are computed on integer surd states (P, Q, D) representing the
complete quotient (P + sqrt(D)) / Q with Q dividing D - P**2, so every step
is exact. a_0 is always reported in the preperiod, hence the golden ratio
prints as "[1;(1)]".
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import mpmath

from .exactnum import QuadNum, as_quad

__all__ = [
    "CFExpansion",
    "ConvergentTable",
    "GLResult",
    "cf_expand",
    "cf_value",
    "cf_convergents",
    "cf_bounded_quotients",
    "gl_condition",
    "gl_majorant",
    "parse_cf",
    "format_cf",
]

GL_PREC = 256
GL_TOL = 1e-9
GL_WINDOW = 50


def _minimal_block(seq: Sequence[int]) -> list[int]:
    n = len(seq)
    for k in range(1, n + 1):
        if n % k == 0 and list(seq[:k]) * (n // k) == list(seq):
            return list(seq[:k])
    return list(seq)


@dataclass(frozen=True)
class CFExpansion:
    """Eventually periodic expansion [pre[0]; pre[1], ..., (period)]."""

    preperiod: tuple
    period: tuple

    def __post_init__(self):
        pre = tuple(int(v) for v in self.preperiod)
        per = tuple(int(v) for v in self.period)
        if not pre:
            raise ValueError("preperiod must contain a_0")
        if not per:
            raise ValueError("rational expansions (empty period) are not supported")
        if any(v < 1 for v in pre[1:]) or any(v < 1 for v in per):
            raise ValueError("partial quotients a_i for i >= 1 must be positive")
        per = tuple(_minimal_block(per))
        # fold trailing preperiod terms into the period (a_0 stays put)
        pre_l = list(pre)
        per_l = list(per)
        while len(pre_l) > 1 and pre_l[-1] == per_l[-1]:
            per_l = [pre_l.pop()] + per_l[:-1]
        object.__setattr__(self, "preperiod", tuple(pre_l))
        object.__setattr__(self, "period", tuple(per_l))

    def quotient(self, i: int) -> int:
        if i < len(self.preperiod):
            return self.preperiod[i]
        return self.period[(i - len(self.preperiod)) % len(self.period)]

    def quotients(self) -> Iterator[int]:
        i = 0
        while True:
            yield self.quotient(i)
            i += 1

    def __str__(self):
        return format_cf(self)


def format_cf(cf: CFExpansion) -> str:
    head = str(cf.preperiod[0])
    body = [str(v) for v in cf.preperiod[1:]]
    body.append("(" + " ".join(str(v) for v in cf.period) + ")")
    sep = ";" if len(body) == 1 else "; "
    return f"[{head}{sep}" + ", ".join(body) + "]"


_CF_RE = re.compile(r"^\s*\[\s*(-?\d+)\s*;\s*(.*?)\s*\]\s*$")


def parse_cf(text: str) -> CFExpansion:
    """Parse "[a0; a1, a2, (b1 b2 ...)]"."""
    m = _CF_RE.match(text)
    if not m:
        raise ValueError(f"malformed continued fraction {text!r}")
    a0 = int(m.group(1))
    rest = m.group(2)
    pm = re.search(r"\(([^()]*)\)\s*$", rest)
    if pm is None:
        raise ValueError("periodic part '( ... )' is required")
    per = [int(v) for v in re.split(r"[\s,]+", pm.group(1).strip()) if v]
    head = rest[: pm.start()].strip().rstrip(",")
    pre = [a0] + [int(v) for v in re.split(r"[\s,]+", head) if v]
    return CFExpansion(tuple(pre), tuple(per))


def _surd_state(x: QuadNum) -> tuple[int, int, int]:
    """(P, Q, D) with x = (P + sqrt(D)) / Q and Q | D - P^2."""
    p, r, q = x.integer_parts()
    if r < 0:
        p, r, q = -p, -r, -q
    D0 = r * r * x.d
    return p * abs(q), q * abs(q), D0 * q * q


def _surd_floor(P: int, Q: int, s: int) -> int:
    # s = isqrt(D); sqrt(D) is irrational
    if Q > 0:
        return (P + s) // Q
    return (P + s + 1) // Q


def cf_expand(x) -> CFExpansion:
    """Exact periodic expansion of a quadratic irrational."""
    x = as_quad(x)
    if x.b == 0:
        raise ValueError("cf_expand needs an irrational input")
    P, Q, D = _surd_state(x)
    s = math.isqrt(D)
    quotients: list[int] = []
    seen: dict[tuple[int, int], int] = {}
    i = 0
    while True:
        if i >= 1:
            key = (P, Q)
            if key in seen:
                j = seen[key]
                return CFExpansion(tuple(quotients[:j]), tuple(quotients[j:]))
            seen[key] = i
        a = _surd_floor(P, Q, s)
        quotients.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
        i += 1


def _purely_periodic_value(period: Sequence[int], d: int | None = None) -> QuadNum:
    # y = [p1; p2, ..., pk, y] solves Qk y^2 + (Qk1 - Pk) y - Pk1 = 0
    p_prev, p = 1, period[0]
    q_prev, q = 0, 1
    for a in period[1:]:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    A, B, C = q, q_prev - p, -p_prev
    disc = B * B - 4 * A * C
    if d is not None and disc % d == 0 and math.isqrt(disc // d) ** 2 == disc // d:
        root = QuadNum(0, math.isqrt(disc // d), d)
    else:
        # no usable field hint: factor the discriminant (slow for long periods)
        root = QuadNum.sqrt(disc)
    return (QuadNum(-B) + root) / QuadNum(2 * A)


def cf_value(cf: CFExpansion, d: int | None = None) -> QuadNum:
    """Exact value of an eventually periodic expansion.

    Passing the field `d` avoids factoring the discriminant.
    """
    val = _purely_periodic_value(cf.period, d)
    for a in reversed(cf.preperiod):
        val = a + 1 / val
    return val


@dataclass
class ConvergentTable:
    rows: list = field(default_factory=list)

    @property
    def q(self) -> list[int]:
        return [r[2] for r in self.rows]

    @property
    def p(self) -> list[int]:
        return [r[1] for r in self.rows]

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


def cf_convergents(cf: CFExpansion, m: int) -> ConvergentTable:
    """Rows (l, p_l, q_l) for l = 0..m, with q_{-1} = 0 and q_0 = 1."""
    if m < 0:
        raise ValueError("m must be >= 0")
    p_prev, q_prev = 1, 0
    p, q = cf.quotient(0), 1
    rows = [(0, p, q)]
    for ell in range(1, m + 1):
        a = cf.quotient(ell)
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        rows.append((ell, p, q))
    return ConvergentTable(rows)


def cf_bounded_quotients(cf: CFExpansion) -> tuple[bool, int]:
    """Periodic expansions always have bounded quotients; report the bound."""
    return True, max(list(cf.preperiod) + list(cf.period))


@dataclass
class GLResult:
    sums: list
    converged: bool
    stable_at: int | None

    def __getitem__(self, i):
        return self.sums[i]

    def __len__(self):
        return len(self.sums)


def gl_condition(cf: CFExpansion, m: int, prec: int = GL_PREC,
                 tol: float = GL_TOL, window: int = GL_WINDOW) -> GLResult:
    """Partial sums S_0..S_m of sum_l a_{l+1}/sqrt(q_l) * (a_1 + ... + a_{l+1}).

    q_l are the convergent denominators of the expansion itself. The sums are
    reported together with a flag telling whether S_j - S_{j-window} < tol was
    reached for some j <= m; the constant bounding them is not thresholded.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    table = cf_convergents(cf, m)
    sums = []
    stable_at = None
    with mpmath.workprec(prec):
        total = mpmath.mpf(0)
        inner = 0
        for ell in range(m + 1):
            a_next = cf.quotient(ell + 1)
            inner += a_next
            total += mpmath.mpf(a_next) / mpmath.sqrt(table.rows[ell][2]) * inner
            sums.append(+total)
            if stable_at is None and ell >= window and sums[ell] - sums[ell - window] < tol:
                stable_at = ell
    return GLResult(sums, stable_at is not None, stable_at)


def gl_majorant(c: int, rigorous: bool = False, prec: int = GL_PREC):
    """Closed-form bound for the partial sums when every a_i <= c.

    The default is the series sum_l c*(l+1)*c / tau^(l/2). Using only
    q_l >= tau^(l-1) one gets an extra factor sqrt(tau); `rigorous=True`
    returns that weaker but provable bound.
    """
    with mpmath.workprec(prec):
        tau = (1 + mpmath.sqrt(5)) / 2
        r = 1 / mpmath.sqrt(tau)
        val = mpmath.mpf(c) ** 2 / (1 - r) ** 2
        if rigorous:
            val *= mpmath.sqrt(tau)
        return +val
