"""Bounded-distance analysis of (weighted) Dirac combs.

F(t) = omega([0, t]) - m t is evaluated at every atom from both sides,
so sup over intervals of |omega([a, b]) - m |b - a|| is read off as the
range of F. Boundedness is judged by explicit finite-scan rules.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .cfrac import cf_expand, gl_condition
from .exactnum import QuadNum, QVec, as_quad, format_quad, qn_floor, qn_to_float, qn_to_mpf
from .regions import check_brs_hypotheses, region_from_weight
from .rotation import delta_t, delta_t_series, kesten_test
from .scheme import (
    Scheme,
    SchemeError,
    density,
    enumerate_points,
    quad_normalize,
    scale_scheme,
    scheme_to_dict,
    split_scheme,
)
from .weights import Indicator, WeightError, WeightFn, compose_linear, weight_to_dict

__all__ = [
    "PLATEAU_FACTOR",
    "GROWTH_STEP",
    "CombMeasure",
    "DefectProfile",
    "Lebesgue",
    "LatticeComb",
    "BrsBridge",
    "realize_comb",
    "defect_profile",
    "bd_compare",
    "pointset_measure_equiv_check",
    "wcps_to_brs",
    "bridge_identity_check",
    "bridge_identity_series",
    "main_theorem_pipeline",
    "linear_combination",
]

PLATEAU_FACTOR = 1.2
GROWTH_STEP = 1.0
SUPPORTED_KINDS = ("indicator", "piecewise_linear", "hat", "dome", "cosine_arc")


# combs -------------------------------------------------------------------
@dataclass
class CombMeasure:
    """Atoms (sorted exact positions) with masses on a working interval [lo, hi]."""

    positions: QVec
    masses: object  # QVec when exact, float ndarray otherwise
    lo: QuadNum
    hi: QuadNum
    density: object = None
    scheme: Scheme | None = None
    weight: WeightFn | None = None

    @property
    def exact(self) -> bool:
        return isinstance(self.masses, QVec)

    def __len__(self):
        return len(self.positions)

    def positions_float(self) -> np.ndarray:
        return self.positions.to_float()

    def masses_float(self) -> np.ndarray:
        return self.masses.to_float() if self.exact else np.asarray(self.masses, dtype=float)

    def atoms(self) -> list:
        ms = self.masses.to_list() if self.exact else list(self.masses)
        return list(zip(self.positions.to_list(), ms))


def realize_comb(s: Scheme, h: WeightFn | None, T, lo=0) -> CombMeasure:
    """omega restricted to [lo, T]: masses h(x*), or 1 without a weight."""
    T, lo = as_quad(T), as_quad(lo)
    if not T > lo:
        raise ValueError("T must exceed the interval start")
    pts = enumerate_points(s, lo, T)
    n = len(pts)
    if h is None:
        masses = QVec(np.ones(n, dtype=object), np.zeros(n, dtype=object), 1, s.d)
    elif h.exact:
        masses = h.eval_qvec(pts.internal)
    else:
        masses = np.asarray(h.eval_float(pts.internal_float()), dtype=float)
    return CombMeasure(pts.direct, masses, lo, T, density(s, h), s, h)


def _comb_for_atoms(s: Scheme, h, n_atoms: int) -> CombMeasure:
    """A comb starting at 0 holding at least n_atoms atoms."""
    dens = float(density(s))
    T = int(n_atoms / dens * 1.02) + 16
    while True:
        c = realize_comb(s, h, T)
        if len(c) >= n_atoms:
            return c
        T = int(T * 1.2) + 16


# defect functions --------------------------------------------------------
@dataclass
class DefectProfile:
    """F = omega([0, t]) - m t just before and just after every atom."""

    m: object
    positions: np.ndarray
    before: object  # QVec or float array
    after: object
    T_end: float
    end_value: float
    table: list = field(default_factory=list)  # dicts: T, max_abs, sup, inf, range
    unit: str = "length"

    @property
    def exact(self) -> bool:
        return isinstance(self.after, QVec)

    def _floats(self):
        if self.exact:
            if getattr(self, "_cache", None) is None:
                self._cache = (self.before.to_float(), self.after.to_float())
            return self._cache
        return self.before, self.after

    def window_stats(self, T) -> dict:
        """max|F|, sup F, inf F and sup - inf over [0, T] (T in length units)."""
        b, a = self._floats()
        k = int(np.searchsorted(self.positions, float(T), side="right"))
        mf = float(self.m)
        tail = (float(a[k - 1]) if k else 0.0) - mf * (float(T) - (self.positions[k - 1] if k else 0.0))
        vals = np.concatenate([[0.0, tail], b[:k], a[:k]])
        sup, inf = float(vals.max()), float(vals.min())
        return {"T": float(T), "max_abs": max(abs(sup), abs(inf)), "sup": sup, "inf": inf,
                "range": sup - inf}

    def stat(self, T, key: str = "max_abs") -> float:
        for row in self.table:
            if row["T"] == float(T):
                return row[key]
        raise KeyError(f"no checkpoint at {T}")

    def plateau(self, T0, T1, key: str = "max_abs", factor: float = PLATEAU_FACTOR) -> bool:
        return self.stat(T1, key) <= factor * self.stat(T0, key)

    def growth(self, T0, T1, key: str = "max_abs", step: float = GROWTH_STEP) -> bool:
        return self.stat(T1, key) >= self.stat(T0, key) + step

    def to_csv(self) -> str:
        b, a = self._floats()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "F_before", "F_after"])
        for t, x, y in zip(self.positions, b, a):
            w.writerow([repr(float(t)), repr(float(x)), repr(float(y))])
        return buf.getvalue()


def _defect_arrays(comb: CombMeasure, m):
    if comb.exact and isinstance(m, QuadNum):
        cum = comb.masses.cumsum()
        mx = comb.positions * m
        after = cum - mx
        before = after - comb.masses
        return before, after
    mf = float(m)
    x = comb.positions_float()
    cum = np.cumsum(comb.masses_float())
    after = cum - mf * x
    return after - comb.masses_float(), after


def defect_profile(comb: CombMeasure, m=None, checkpoints=None, unit: str = "length") -> DefectProfile:
    """Event-driven F with a checkpoint table over growing prefixes [0, T].

    unit="atoms" reads each checkpoint N as the prefix ending at the N-th atom.
    Requires the comb to start at 0.
    """
    if m is None:
        m = comb.density
    if not float(m) > 0:
        raise ValueError("density m must be positive")
    if comb.lo != 0:
        raise ValueError("defect profiles need a comb starting at 0")
    before, after = _defect_arrays(comb, m)
    pos = comb.positions_float()
    mf = float(m)
    last = (float(after[len(after) - 1]) if isinstance(after, np.ndarray) else
            qn_to_float(after[len(after) - 1])[0]) if len(pos) else 0.0
    end_value = float(last - mf * (float(comb.hi) - (pos[-1] if len(pos) else 0.0)))
    prof = DefectProfile(m, pos, before, after, float(comb.hi), end_value, unit=unit)
    for c in checkpoints or []:
        if unit == "atoms":
            n = int(c)
            if n > len(pos) or n < 1:
                raise ValueError(f"comb has {len(pos)} atoms, checkpoint asks for {n}")
            row = prof.window_stats(pos[n - 1])
            row["T"] = float(n)
            row["length"] = float(pos[n - 1])
        else:
            if float(c) > float(comb.hi):
                raise ValueError("checkpoint beyond the working interval")
            row = prof.window_stats(c)
        prof.table.append(row)
    return prof


def F_at(comb: CombMeasure, m, t) -> QuadNum:
    """Exact F(t) = omega([0, t]) - m t for an exact comb."""
    t = as_quad(t)
    pos = comb.positions_float()
    k = int(np.searchsorted(pos, float(t), side="right"))
    while k < len(pos) and comb.positions[k] <= t:
        k += 1
    while k > 0 and comb.positions[k - 1] > t:
        k -= 1
    tot = QuadNum(0)
    if k:
        tot = comb.masses[0:k].cumsum()[k - 1]
    return tot - as_quad(m) * t


# comparisons -------------------------------------------------------------
@dataclass(frozen=True)
class Lebesgue:
    """m times Lebesgue measure."""

    m: object


@dataclass(frozen=True)
class LatticeComb:
    """Atoms of mass `mass` at offset + k * spacing: a periodic measure."""

    spacing: object
    mass: object = 1
    offset: object = 0

    @property
    def density(self):
        return as_quad(self.mass) / as_quad(self.spacing)

    def realize(self, T) -> CombMeasure:
        sp, off = as_quad(self.spacing), as_quad(self.offset)
        k0 = qn_floor((0 - off) / sp)
        k1 = qn_floor((as_quad(T) - off) / sp)
        ks = [k for k in range(k0, k1 + 1) if 0 <= off + k * sp <= as_quad(T)]
        d = sp.d if sp.d != 1 else off.d
        pos = QVec.from_quads([off + k * sp for k in ks], d) if ks else QVec.concatenate([], d)
        ms = QVec.constant(as_quad(self.mass), len(ks), d)
        return CombMeasure(pos, ms, QuadNum(0), as_quad(T), self.density)


def _cumulative(mu, T):
    """(event positions, masses, continuous slope) as floats."""
    if isinstance(mu, Lebesgue):
        return np.zeros(0), np.zeros(0), float(mu.m)
    if isinstance(mu, LatticeComb):
        mu = mu.realize(as_quad(Fraction(T)) if isinstance(T, float) else T)
    if isinstance(mu, CombMeasure):
        x = mu.positions_float()
        keep = x <= float(T)
        return x[keep], mu.masses_float()[keep], 0.0
    raise TypeError(f"unsupported measure {type(mu).__name__}")


def bd_compare(mu, nu, T, interval_samples: int = 10000, seed: int = 0) -> dict:
    """Empirical bound C for |mu([a, b]) - nu([a, b])| over [a, b] in [0, T].

    The exact sup over closed intervals is taken event-wise; random
    intervals are a separate check that must never exceed it.
    """
    x1, w1, s1 = _cumulative(mu, T)
    x2, w2, s2 = _cumulative(nu, T)
    T = float(T)
    xs = np.concatenate([x1, x2, [0.0, T]])
    ws = np.concatenate([w1, -w2, [0.0, 0.0]])
    order = np.argsort(xs, kind="stable")
    xs, ws = xs[order], ws[order]
    ux, inv = np.unique(xs, return_inverse=True)
    jump = np.zeros(len(ux))
    np.add.at(jump, inv, ws)
    slope = s1 - s2
    after = np.cumsum(jump) + slope * ux
    before = after - jump
    # sup over a <= b of D(b) - D(a-) and of D(a-) - D(b)
    run_min = np.minimum.accumulate(before)
    run_max = np.maximum.accumulate(before)
    C = float(max(np.max(after - run_min), np.max(run_max - after), 0.0))
    rng = np.random.default_rng(seed)
    ab = np.sort(rng.uniform(0.0, T, size=(interval_samples, 2)), axis=1)

    def mass(x, w, s, a, b):
        cw = np.concatenate([[0.0], np.cumsum(w)])
        return (cw[np.searchsorted(x, b, side="right")] - cw[np.searchsorted(x, a, side="left")]
                + s * (b - a))

    samp = np.abs(mass(x1, w1, s1, ab[:, 0], ab[:, 1]) - mass(x2, w2, s2, ab[:, 0], ab[:, 1]))
    # the sup sits on closed intervals between events, which uniform draws
    # almost never hit; a second batch snaps both ends to event positions
    ev = rng.integers(0, len(ux), size=(interval_samples, 2))
    ev = np.sort(ev, axis=1)
    ea, eb = ux[ev[:, 0]], ux[ev[:, 1]]
    samp_ev = np.abs(mass(x1, w1, s1, ea, eb) - mass(x2, w2, s2, ea, eb))
    rep = {
        "T": T,
        "C": C,
        "range": float(after.max() - min(before.min(), 0.0)),
        "sampled_max": float(samp.max()) if len(samp) else 0.0,
        "sampled_event_max": float(samp_ev.max()) if len(samp_ev) else 0.0,
        "samples": int(interval_samples),
        "seed": int(seed),
    }
    # periodic measure against its Lebesgue counterpart: C <= m * period
    pair = [mu, nu]
    per = [p for p in pair if isinstance(p, LatticeComb)]
    leb = [p for p in pair if isinstance(p, Lebesgue)]
    if per and leb:
        bound = float(leb[0].m) * float(per[0].spacing)
        rep["periodic_bound"] = bound
        rep["periodic_bound_holds"] = C <= bound * (1 + 1e-12)
    return rep


def pointset_measure_equiv_check(P, Q, T=None) -> dict:
    """Index pairing x_i <-> x'_i of two Delone sets and the comb bound.

    Both sets are sorted and indexed from their first point >= 0. The
    pairing gives sup |x_i - x'_i|; with C' = sup + r the comb defect obeys
    |omega([a, b]) - omega'([a, b])| <= 2 C' / r.
    """
    x = np.sort(np.asarray([float(v) for v in P]))
    y = np.sort(np.asarray([float(v) for v in Q]))
    if T is not None:
        x, y = x[x <= float(T)], y[y <= float(T)]
    x, y = x[x >= 0], y[y >= 0]
    gaps = np.concatenate([np.diff(x), np.diff(y)])
    if len(gaps) == 0 or gaps.min() <= 0:
        raise ValueError("point sets are not Delone (zero gap)")
    r = float(gaps.min())
    n = min(len(x), len(y))
    disp = float(np.max(np.abs(x[:n] - y[:n]))) if n else 0.0
    Cp = disp + r
    # index shift: how many points of Q lie strictly between paired points
    ell = np.searchsorted(y, x[:n], side="left") - np.arange(n)
    ell_bound = disp / r + 1
    end = float(min(x[n - 1], y[n - 1])) if n else 0.0
    cmp = bd_compare(_float_comb(x[x <= end]), _float_comb(y[y <= end]), end, interval_samples=0)
    return {
        "r": r,
        "sup_displacement": disp,
        "C_prime": Cp,
        "max_index_shift": int(np.max(np.abs(ell))) if n else 0,
        "index_shift_bound": ell_bound,
        "index_shift_ok": bool(n == 0 or np.max(np.abs(ell)) <= ell_bound),
        "comb_defect": cmp["C"],
        "lemma_bound": 2 * Cp / r,
        "lemma_bound_ok": cmp["C"] <= 2 * Cp / r,
    }


def _float_comb(x):
    pos = QVec.from_quads([as_quad(Fraction(float(v))) for v in x], 1)
    return CombMeasure(pos, QVec.constant(QuadNum(1), len(x), 1), QuadNum(0),
                       as_quad(Fraction(float(x[-1]) if len(x) else 0)))


# weighted CPS -> rotation bridge ----------------------------------------
@dataclass
class BrsBridge:
    """One Z^2 scheme with weight, and the region/flow that encodes it.

    For integer t:  sum_{x in [phi, phi + t]} h(x*) - t int h = Delta_t / c'.
    """

    scheme: Scheme
    weight: WeightFn
    region: object
    alpha: QuadNum
    start: tuple
    phi: QuadNum
    cprime: QuadNum
    kappa: QuadNum
    n: int = 1
    coset: tuple = (0, 0)
    notes: list = field(default_factory=list)


def _split_factor(W_len, alpha, gamma) -> int:
    n = 1
    while 6 * W_len / (5 * n) >= 1 + alpha or abs(gamma) * W_len / n >= 1:
        n += 1
    return n


def wcps_to_brs(s: Scheme, h: WeightFn | None = None) -> dict:
    """Region(s), slope and starting point(s) encoding the weighted CPS.

    Schemes over other lattices go through quad_normalize first; windows
    too large for the unit square are split into n^2 cosets and rescaled
    by 1/n.
    """
    if h is None:
        h = Indicator(s.window.a, s.window.b)
    norm = None
    if not s.is_integer_lattice():
        norm = quad_normalize(s)
        s2, h2 = norm.scheme, norm.transport_weight(h)
    else:
        if s.slope is None:
            raise SchemeError("a scheme over Z^2 needs a slope")
        s2, h2 = s, h
    al = s2.slope
    gam = s2.shear_value()
    n = _split_factor(s2.window.length, al, gam)
    subs = split_scheme(s2, n)
    bridges = []
    for idx, sub in enumerate(subs):
        sc = scale_scheme(sub, QuadNum(Fraction(1, n), 0, s2.d)) if n > 1 else sub
        hw = compose_linear(h2, n) if n > 1 else h2
        W = sc.window
        mid = W.midpoint
        kappa = mid + (1 - al) / 2
        _, o = sc.effective()
        c_t = o[1]
        delta = Fraction(1, 2) - sc.translate[0] - gam * mid
        x2 = kappa - c_t
        x2 = x2 - qn_floor(x2)
        reg = region_from_weight(hw, alpha=al, kappa=kappa)
        notes = []
        if isinstance(hw, Indicator):
            notes.append("indicator region has edges of the flow slope; its BRS status is "
                         "decided by the window length (Kesten), not by the polygon criterion")
        bridges.append(BrsBridge(sc, hw, reg, al, (QuadNum(0), x2), -delta,
                                 as_quad(reg.meta["cprime"]) if hasattr(reg, "meta") else reg.cprime,
                                 kappa, n, divmod(idx, n), notes))
    return {"bridges": bridges, "alpha": al, "n": n, "normalization": norm}


def bridge_identity_check(b: BrsBridge, t: int, numeric: bool = False, prec: int = 256) -> dict:
    """Evaluate both sides of the comb/flow identity independently."""
    if int(t) != t or t < 0:
        raise ValueError("t must be a non-negative integer")
    t = int(t)
    if t == 0:
        return {"t": 0, "comb_side": 0, "flow_side": 0, "difference": 0, "exact": True}
    pts = enumerate_points(b.scheme, b.phi, b.phi + t)
    h = b.weight
    if not numeric and h.exact and getattr(b.region, "exact", False):
        vals = h.eval_qvec(pts.internal)
        total = vals.cumsum()[len(vals) - 1] if len(vals) else QuadNum(0)
        comb = total - t * h.integral()
        flow = delta_t(b.region, b.alpha, b.start, t) / b.cprime
        diff = comb - flow
        return {"t": t, "comb_side": comb, "flow_side": flow, "difference": diff,
                "exact": True, "ok": diff == 0}
    with mpmath.workprec(prec):
        total = mpmath.fsum(h.eval_mp(v, prec) for v in pts.internal.to_mpf(prec))
        integ = h.integral(prec)
        integ = qn_to_mpf(integ, prec) if isinstance(integ, QuadNum) else mpmath.mpf(integ)
        comb = total - t * integ
        cp = qn_to_mpf(as_quad(b.cprime), prec)
        flow = delta_t(b.region, b.alpha, b.start, t, numeric=True, prec=prec) / cp
        diff = comb - flow
        return {"t": t, "comb_side": comb, "flow_side": flow, "difference": diff,
                "exact": False, "ok": abs(diff) <= mpmath.mpf(10) ** -15}


def bridge_identity_series(b: BrsBridge, t_max: int, numeric: bool = False, prec: int = 256) -> list[dict]:
    """bridge_identity_check for every integer t = 1..t_max.

    The comb side is a running sum over one enumeration, the flow side one
    pass of rotation.delta_t_series; the two stay independent.
    """
    h = b.weight
    if not numeric and not (h.exact and getattr(b.region, "exact", False)):
        raise ValueError("the exact check needs an exact weight and region")
    t_max = int(t_max)
    pts = enumerate_points(b.scheme, b.phi, b.phi + t_max)
    pos = pts.direct
    flows = delta_t_series(b.region, b.alpha, b.start, range(1, t_max + 1), numeric=numeric, prec=prec)
    out = []
    with mpmath.workprec(prec):
        if numeric:
            masses = [h.eval_mp(v, prec) for v in pts.internal.to_mpf(prec)]
            integ = h.integral(prec)
            integ = qn_to_mpf(integ, prec) if isinstance(integ, QuadNum) else mpmath.mpf(integ)
            cp = qn_to_mpf(as_quad(b.cprime), prec)
            total, tol = mpmath.mpf(0), mpmath.mpf(10) ** -15
        else:
            masses = h.eval_qvec(pts.internal).to_list()
            integ, cp, total = h.integral(), b.cprime, QuadNum(0)
        k = 0
        for t in range(1, t_max + 1):
            end = b.phi + t
            while k < len(pos) and pos[k] <= end:
                total = total + masses[k]
                k += 1
            comb = total - t * integ
            flow = flows[t - 1] / cp
            diff = comb - flow
            ok = abs(diff) <= tol if numeric else diff == 0
            out.append({"t": t, "comb_side": comb, "flow_side": flow, "difference": diff,
                        "exact": not numeric, "ok": bool(ok)})
    return out


# pipeline ----------------------------------------------------------------
def _num(x) -> dict:
    if isinstance(x, QuadNum):
        return {"exact": format_quad(x), "float": float(x)}
    return {"exact": None, "float": float(x)}


def main_theorem_pipeline(s: Scheme, h: WeightFn | None = None,
                          atom_checkpoints=(10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5),
                          T0: int = 10 ** 3, gl_terms: int = 200) -> dict:
    """Normalise, split, check hypotheses, then scan the comb defect.

    The verdict is consistent_with_bd when the plateau rule holds from T0
    to the last checkpoint, inconsistent when max|F| grows by at least 1
    from the first to the last checkpoint, inconclusive otherwise.
    """
    if h is not None and h.kind not in SUPPORTED_KINDS:
        raise WeightError(f"unsupported weight kind {h.kind!r}")
    rep = {"scheme": scheme_to_dict(s), "weight": weight_to_dict(h) if h is not None else None}
    brs = wcps_to_brs(s, h)
    al = brs["alpha"]
    rep["alpha"] = _num(al)
    rep["split"] = brs["n"]
    rep["normalized"] = brs["normalization"] is not None
    cf = cf_expand(al)
    gl = gl_condition(cf, gl_terms)
    rep["cfrac"] = str(cf)
    rep["gl_partial_sums"] = [float(v) for v in gl.sums[:11]]
    rep["gl_converged"] = bool(gl.converged)
    hyp = check_brs_hypotheses(brs["bridges"][0].region, al)
    rep["hypotheses"] = {"status": hyp.status, "reason": hyp.reason}
    rep["notes"] = brs["bridges"][0].notes
    if h is None or isinstance(h, Indicator):
        L = brs["bridges"][0].scheme.window.length * brs["n"]
        rep["kesten"] = str(kesten_test(L, al))
    m = density(s, h)
    rep["m"] = _num(m)
    comb = _comb_for_atoms(s, h, max(atom_checkpoints))
    prof = defect_profile(comb, m, atom_checkpoints, unit="atoms")
    rep["checkpoints"] = prof.table
    n_last = float(max(atom_checkpoints))
    # mass per length over the scanned prefix, next to the prescribed m
    n_at = int(n_last)
    rep["fitted_density"] = float(comb.masses_float()[:n_at].sum() / prof.stat(n_last, "length"))
    first = float(min(atom_checkpoints))
    plateau = prof.plateau(T0, n_last)
    growth = prof.growth(first, n_last)
    rep["plateau"] = bool(plateau)
    rep["growth"] = bool(growth)
    if growth:
        verdict = "inconsistent"
    elif plateau:
        verdict = "consistent_with_bd"
    else:
        verdict = "inconclusive"
    rep["verdict"] = verdict
    rep["profile"] = prof
    return rep


def linear_combination(combs) -> tuple[CombMeasure, object]:
    """Merge positive combinations of combs on a shared working interval."""
    combs = list(combs)
    if not combs:
        raise ValueError("nothing to combine")
    lo, hi = combs[0][1].lo, combs[0][1].hi
    for c, w in combs:
        if not as_quad(c) > 0:
            raise ValueError("coefficients must be positive")
        if w.lo != lo or w.hi != hi:
            raise ValueError("combs live on different working intervals")
    dens = sum((as_quad(c) * w.density if isinstance(w.density, QuadNum) else float(c) * float(w.density)
                for c, w in combs), QuadNum(0))
    if all(w.exact for _, w in combs):
        acc: dict = {}
        for c, w in combs:
            ms = w.masses * as_quad(c)
            for p, v in zip(w.positions.to_list(), ms.to_list()):
                acc[p] = acc[p] + v if p in acc else v
        keys = sorted(acc, key=lambda q: (float(q), q))
        d = combs[0][1].positions.d
        pos = QVec.from_quads(keys, d)
        ms = QVec.from_quads([acc[k] for k in keys], d)
        return CombMeasure(pos, ms, lo, hi, dens), dens
    acc = {}
    for c, w in combs:
        for p, v in zip(w.positions.to_list(), w.masses_float() * float(c)):
            acc[p] = acc.get(p, 0.0) + v
    keys = sorted(acc, key=lambda q: (float(q), q))
    pos = QVec.from_quads(keys, combs[0][1].positions.d)
    return CombMeasure(pos, np.array([acc[k] for k in keys]), lo, hi, dens), dens
