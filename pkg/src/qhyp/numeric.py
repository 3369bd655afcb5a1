"""High-precision numeric oracle for series, products, and identities.

Everything here is recomputed directly from the structural data (QHTerm
factor lists, ProductForm factors) with mpmath arithmetic; no code is
shared with the telescoping or proof layers, so numeric agreement is
independent evidence.  Sample points are exact rationals, and factors
that vanish exactly at some index (terminating series, bilateral sums
that unilateralize) are detected by exact rational comparison rather
than trusted to floating point.

Tail bounds come from the geometric ratio test and are heuristic bounds,
not certified interval enclosures.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath

from .algebra import RationalFunc, VAR_K, VAR_N, VAR_Q
from .term import ProductForm, QHTerm, SeriesExpr


class PoleError(ArithmeticError):
    """A denominator factor vanishes at the sampled point."""


class TailError(ArithmeticError):
    """Truncation could not be certified within max_terms."""


class PrecisionConfig:
    __slots__ = ("bits", "tail_eps", "max_terms")

    def __init__(self, bits=256, tail_eps=None, max_terms=10000):
        assert bits >= 64 and max_terms >= 16
        self.bits = bits
        self.tail_eps = tail_eps
        self.max_terms = max_terms

    def eps(self):
        if self.tail_eps is not None:
            return mpmath.mpf(self.tail_eps)
        return mpmath.mpf(10) ** mpmath.mpf(-0.3 * self.bits)

    def workprec(self):
        # guard bits cover rounding drift over max_terms incremental updates
        return mpmath.workprec(self.bits + 64)

    def floor(self):
        return mpmath.mpf(10) ** (-(self.bits // 2))


class EvalResult:
    __slots__ = ("value", "tail_bound", "terms_used")

    def __init__(self, value, tail_bound, terms_used):
        self.value = value
        self.tail_bound = tail_bound
        self.terms_used = terms_used

    def __repr__(self):
        return "EvalResult(%s, tail=%s, terms=%d)" % (
            mpmath.nstr(self.value, 20), mpmath.nstr(self.tail_bound, 3),
            self.terms_used)


def _num(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / mpmath.mpf(x.denominator)
    return mpmath.mpf(x)


def _mono_frac(m, assign):
    v = Fraction(m.coeff)
    for name, e in m.exps.items():
        b = Fraction(assign[name])
        if b == 0 and e < 0:
            raise PoleError("zero base %s raised to negative power" % name)
        v *= b ** e
    return v


def q_power_index(value, q, limit):
    """j with value == q**j exactly, else None.  Exact rational check."""
    if value == 0 or q == 0:
        return None
    if value == 1:
        return 0
    av, aq = abs(value), abs(q)
    if aq == 1:
        return None
    try:
        est = (math.log(av.numerator) - math.log(av.denominator)) / \
              (math.log(aq.numerator) - math.log(aq.denominator))
    except (ValueError, OverflowError):
        return None
    if not abs(est) <= limit:
        return None
    for j in (round(est) - 1, round(est), round(est) + 1):
        if abs(j) <= limit and q ** j == value:
            return j
    return None


# -- one summand family at one exact point -----------------------------------

class _TermEval:
    """Incremental evaluator of t(k) over integer k at an exact point.

    Pochhammer arguments are evaluated to exact rationals up front; each
    argument that is an exact power of q^step yields a hard cutoff (the
    terms vanish identically beyond it) or a pole (the point is rejected).
    """

    def __init__(self, t, assign, cfg):
        self.cfg = cfg
        self.q = Fraction(assign[VAR_Q])
        assert 0 < abs(self.q) < 1, "need 0 < |q| < 1"
        self.bilateral = t.bilateral
        try:
            pre = t.prefactor.eval_frac(assign)
        except ZeroDivisionError as e:
            raise PoleError(str(e))
        self.zero = pre == 0
        self.pochs = [(_mono_frac(a, assign), s, m) for a, s, m in t.pochs]
        self.infs = [(_mono_frac(a, assign), s, m) for a, s, m in t.infs]
        self.geom = _mono_frac(t.geom, assign)
        assert self.geom != 0
        self.quad = t.quad
        self.extra = []
        for mono, v, e in t.extra:
            M = _mono_frac(mono, assign)
            k0 = q_power_index(M, self.q ** -v, cfg.max_terms + 64)
            if k0 is not None and e < 0 and (k0 >= 0 or t.bilateral):
                raise PoleError("extra factor vanishes at k=%d" % k0)
            self.extra.append((M, v, e, k0))
        self.pre = pre
        self._analyze_cutoffs()

    def _analyze_cutoffs(self):
        up_zero, down_zero, up_pole, down_pole = [], [], [], []
        for A, s, m in self.pochs:
            j = q_power_index(A, self.q ** s, self.cfg.max_terms + 64)
            if j is None:
                continue
            if j <= 0:
                # A = q^(-s*i0): (A;q^s)_k = 0 for k >= i0+1
                (up_zero if m > 0 else up_pole).append(-j + 1)
            else:
                # A = q^(s*j): (A;q^s)_k has a pole for k <= -j
                (down_zero if m < 0 else down_pole).append(-j)
        self.up_stop = min(up_zero) if up_zero else None
        self.down_stop = max(down_zero) if down_zero else None
        if up_pole:
            pk = min(up_pole)
            if self.up_stop is None or pk < self.up_stop:
                raise PoleError("Pochhammer denominator vanishes at k=%d" % pk)
        if down_pole and self.bilateral:
            pk = max(down_pole)
            if self.down_stop is None or pk > self.down_stop:
                raise PoleError("Pochhammer denominator vanishes at k=%d" % pk)

    def start(self):
        """Constant part: prefactor times infinite products; sets self.zero."""
        c = _num(self.pre)
        for A, s, m in self.infs:
            r = eval_poch_inf(A, self.q, s, self.cfg)
            if r == 0:
                if m < 0:
                    raise PoleError("infinite product in denominator is 0")
                self.zero = True
                return mpmath.mpf(0)
            c *= r ** m
        return c

    def _extra_at(self, k, qmp):
        f = mpmath.mpf(1)
        for M, v, e, k0 in self.extra:
            if k == k0:
                return mpmath.mpf(0)
            f *= (1 - _num(M) * qmp ** (v * k)) ** e
        return f

    def up_terms(self):
        """Yields (k, t(k)) for k = 0, 1, 2, ... up to any exact cutoff."""
        core = self.start()
        if self.zero:
            return
        qmp = _num(self.q)
        pw = [[_num(A), qmp ** s, m] for A, s, m in self.pochs]
        B = _num(self.geom)
        qd = qmp ** self.quad
        gq = mpmath.mpf(1)
        k = 0
        while True:
            yield k, core * self._extra_at(k, qmp) if self.extra else core
            if self.up_stop is not None and k + 1 >= self.up_stop:
                return
            u = B * gq
            for rec in pw:
                u *= (1 - rec[0]) ** rec[2]
                rec[0] *= rec[1]
            core *= u
            gq *= qd
            k += 1

    def down_terms(self):
        """Yields (k, t(k)) for k = -1, -2, ... up to any exact cutoff."""
        core = self.start()
        if self.zero:
            return
        qmp = _num(self.q)
        pw = [[_num(A) / qmp ** s, qmp ** s, m] for A, s, m in self.pochs]
        B = _num(self.geom)
        qd = qmp ** self.quad
        gq = 1 / qd
        k = 0
        while True:
            if self.down_stop is not None and k - 1 <= self.down_stop:
                return
            u = B * gq
            for rec in pw:
                u *= (1 - rec[0]) ** rec[2]
                rec[0] /= rec[1]
            if u == 0:
                raise PoleError("zero backward ratio at k=%d" % (k - 1))
            core /= u
            gq /= qd
            k -= 1
            yield k, core * self._extra_at(k, qmp) if self.extra else core


def eval_poch_inf(a, q, step, cfg):
    """(a; q^step)_oo by direct product; exact-zero arguments detected."""
    a = Fraction(a)
    qs = Fraction(q) ** step
    assert 0 < abs(qs) < 1
    j = q_power_index(a, qs, cfg.max_terms + 64)
    if j is not None and j <= 0:
        return mpmath.mpf(0)
    eps = cfg.eps()
    x = _num(a)
    qn = _num(qs)
    out = mpmath.mpf(1)
    for _ in range(cfg.max_terms):
        if abs(x) < eps:
            return out
        out *= 1 - x
        x *= qn
    raise TailError("infinite product did not converge")


def _sum_terms(gen, cfg, eps):
    """Accumulate a certified-truncation sum from a term generator."""
    total = mpmath.mpf(0)
    terms = 0
    prev = None
    tiny = 0
    for _, v in gen:
        total += v
        terms += 1
        if terms >= cfg.max_terms:
            raise TailError("no certified tail within max_terms")
        av = abs(v)
        if av == 0:
            continue  # isolated exact zero; says nothing about the tail
        if av <= eps * max(mpmath.mpf(1), abs(total)) and prev is not None:
            rho = av / prev
            tiny += 1
            if tiny >= 2 and rho < mpmath.mpf("0.9"):
                return total, av * rho / (1 - rho), terms
        else:
            tiny = 0
        prev = av
    return total, mpmath.mpf(0), terms  # exact cutoff: tail is identically 0


def eval_series(s, assign, cfg=None):
    """Evaluate a series (SeriesExpr, QHTerm, or list of QHTerm) at a point."""
    cfg = cfg or PrecisionConfig()
    if isinstance(s, SeriesExpr):
        comps = s.components
    elif isinstance(s, QHTerm):
        comps = [s]
    else:
        comps = list(s)
    with cfg.workprec():
        eps = cfg.eps()
        total = mpmath.mpf(0)
        tail = mpmath.mpf(0)
        used = 0
        for t in comps:
            te = _TermEval(t, assign, cfg)
            v, b, n = _sum_terms(te.up_terms(), cfg, eps)
            total += v
            tail += b
            used += n
            if t.bilateral:
                v, b, n = _sum_terms(te.down_terms(), cfg, eps)
                total += v
                tail += b
                used += n
        return EvalResult(total, tail, used)


def eval_product(p, assign, cfg=None):
    """Evaluate a ProductForm at a point."""
    cfg = cfg or PrecisionConfig()
    with cfg.workprec():
        eps = cfg.eps()
        try:
            val = _num(p.scalar.eval_frac(assign))
        except ZeroDivisionError as e:
            raise PoleError(str(e))
        q = Fraction(assign[VAR_Q])
        num_zero = den_zero = False
        terms = 0
        tail = mpmath.mpf(0)
        for arg, s, m in p.factors:
            A = _mono_frac(arg, assign)
            qs = q ** s
            j = q_power_index(A, qs, cfg.max_terms + 64)
            if j is not None and j <= 0:
                if m > 0:
                    num_zero = True
                else:
                    den_zero = True
                continue
            x = _num(A)
            qn = _num(qs)
            f = mpmath.mpf(1)
            for _ in range(cfg.max_terms):
                if abs(x) < eps:
                    break
                f *= 1 - x
                x *= qn
                terms += 1
            else:
                raise TailError("product factor did not converge")
            val *= f ** m
            tail += abs(m) * abs(x) / (1 - abs(qn)) / (1 - abs(x))
        if den_zero:
            if num_zero:
                raise PoleError("indeterminate product: 0 factors on both sides")
            raise PoleError("product denominator factor is exactly 0")
        if num_zero:
            return EvalResult(mpmath.mpf(0), mpmath.mpf(0), terms)
        return EvalResult(val, abs(val) * tail, terms)


def eval_side(side, assign, cfg=None):
    """Dispatch over the things an identity side can be."""
    if isinstance(side, ProductForm):
        return eval_product(side, assign, cfg)
    if isinstance(side, (SeriesExpr, QHTerm, list)):
        return eval_series(side, assign, cfg)
    cfg = cfg or PrecisionConfig()
    with cfg.workprec():
        if isinstance(side, RationalFunc):
            return EvalResult(_num(side.eval_frac(assign)), mpmath.mpf(0), 0)
        return EvalResult(_num(Fraction(side)), mpmath.mpf(0), 0)


def eval_identity_residual(lhs, rhs, pts, cfg=None):
    """Max relative residual of lhs == rhs over sample points.

    Returns (max_residual, rows); each row records the point and residual.
    """
    cfg = cfg or PrecisionConfig()
    rows = []
    worst = mpmath.mpf(0)
    for pt in pts:
        assign = pt.assignment() if isinstance(pt, SamplePoint) else pt
        lv = eval_side(lhs, assign, cfg)
        rv = eval_side(rhs, assign, cfg)
        with cfg.workprec():
            denom = max(abs(lv.value), abs(rv.value), cfg.floor())
            res = abs(lv.value - rv.value) / denom
        worst = max(worst, res)
        rows.append({"point": _point_repr(assign), "lhs": mpmath.nstr(lv.value, 25),
                     "rhs": mpmath.nstr(rv.value, 25),
                     "residual": mpmath.nstr(res, 8),
                     "terms": lv.terms_used + rv.terms_used})
    return worst, rows


def _point_repr(assign):
    return {k: str(v) for k, v in sorted(assign.items())}


# -- boundary limits and domination ------------------------------------------

def boundary_limit_numeric(t, R, direction, assign, cfg=None):
    """Classify lim t(k)*R(q^k) as k -> direction*oo on a doubling ladder.

    Returns ("zero"|"nonzero"|"inconclusive", value or None).  "zero" needs
    magnitudes to fall below tail_eps with a certified decreasing ratio.
    """
    cfg = cfg or PrecisionConfig()
    assert direction in (1, -1)
    with cfg.workprec():
        eps = cfg.eps()
        qmp = _num(Fraction(assign[VAR_Q]))
        te = _TermEval(t, assign, cfg)
        gen = te.up_terms() if direction == 1 else te.down_terms()
        ladder = []
        mark = 8
        exhausted = True
        for k, v in gen:
            if abs(k) < mark:
                continue
            g = v if R is None else v * _rf_mp(R, assign, qmp ** k)
            ladder.append(g)
            mark *= 2
            if mark > min(cfg.max_terms, 4096):
                exhausted = False
                break
            if len(ladder) >= 3 and abs(ladder[-1]) < eps and abs(ladder[-2]) < eps:
                exhausted = False
                break
        if exhausted:
            return "zero", None  # exact cutoff: tail is identically 0
        mags = [abs(g) for g in ladder]
        if mags and mags[-1] < eps:
            if all(b < a or b < eps for a, b in zip(mags, mags[1:])):
                return "zero", None
        if len(ladder) >= 3:
            d1 = abs(ladder[-1] - ladder[-2])
            d2 = abs(ladder[-2] - ladder[-3])
            scale = max(abs(ladder[-1]), mpmath.mpf(1))
            if d1 < eps * scale and d2 < eps * scale and abs(ladder[-1]) > eps:
                return "nonzero", ladder[-1]
        return "inconclusive", None


def _rf_mp(rf, assign, qk):
    env = dict(assign)
    env[VAR_K] = qk
    num = rf.num.eval_frac(env)
    den = rf.den.eval_frac(env)
    return _num(num) / _num(den) if isinstance(num, Fraction) else num / den


def tannery_domination_check(t, w, assign, cfg=None, depth=80):
    """Check a numeric majorant sum_k M_k for t under repeated shifts.

    M_k = max over sampled shift counts N of |t(k)| at Qn = q^(w*N); ok when
    the majorant terminates or certifies by ratio test.
    """
    cfg = cfg or PrecisionConfig()
    q = Fraction(assign[VAR_Q])
    with cfg.workprec():
        rows = []
        for N in (0, 1, 2, 4, 8, 16):
            env = dict(assign)
            env[VAR_N] = q ** (w * N)
            te = _TermEval(t, env, cfg)
            for gen in ((te.up_terms(),) if not t.bilateral
                        else (te.up_terms(), te.down_terms())):
                vals = []
                for k, v in gen:
                    vals.append(abs(v))
                    if len(vals) >= depth:
                        break
                rows.append(vals)
        width = max(len(r) for r in rows)
        M = [max((r[i] for r in rows if len(r) > i), default=mpmath.mpf(0))
             for i in range(width)]
        while M and M[-1] == 0:
            M.pop()
        if len(M) < depth // 2:
            return True  # majorant terminates: finite sum, ok vacuously
        ratios = [M[i + 1] / M[i] for i in range(len(M) - 12, len(M) - 1) if M[i] > 0]
        return bool(ratios) and max(ratios) < mpmath.mpf("0.97")


# -- exact sample points -------------------------------------------------------

class SamplePoint:
    __slots__ = ("q", "params")

    def __init__(self, q, params):
        self.q = Fraction(q)
        assert 0 < abs(self.q) < 1
        self.params = {k: Fraction(v) for k, v in params.items()}

    def assignment(self):
        env = dict(self.params)
        env[VAR_Q] = self.q
        return env

    def __repr__(self):
        inner = ", ".join("%s=%s" % (k, v) for k, v in sorted(self.params.items()))
        return "SamplePoint(q=%s, %s)" % (self.q, inner)


_Q_POOL = [Fraction(1, 10), Fraction(1, 5), Fraction(3, 10), Fraction(1, 3),
           Fraction(2, 5), Fraction(1, 2), Fraction(1, 7), Fraction(2, 7),
           Fraction(1, 4), Fraction(3, 8)]


def sample_points(names, count, seed, constraints=(), relations=(), q=None,
                  max_tries=2000, margin=Fraction(4, 5)):
    """Deterministic exact rational sample points.

    names: free parameters to draw.  relations: ordered (name, RationalFunc)
    pairs computed from earlier values.  constraints: RationalFunc list, each
    meaning |expr| < 1 at the point; points are kept only when |expr| <=
    margin, so that truncated evaluations actually certify their tails.
    q fixes the base instead of drawing it.
    """
    rng = random.Random(seed)
    pts = []
    seen = set()
    tries = 0
    while len(pts) < count:
        tries += 1
        if tries > max_tries:
            raise PoleError("cannot satisfy constraints after %d tries" % max_tries)
        qv = Fraction(q) if q is not None else rng.choice(_Q_POOL)
        params = {}
        for name in names:
            num = rng.choice([1, 2, 3, 4, 5])
            den = rng.choice([3, 5, 7, 9, 11, 13])
            sign = rng.choice([1, 1, 1, -1])
            params[name] = Fraction(sign * num, den)
        env = dict(params)
        env[VAR_Q] = qv
        ok = True
        for name, expr in relations:
            try:
                v = Fraction(expr.eval_frac(env))
            except ZeroDivisionError:
                ok = False
                break
            if v == 0:
                ok = False
                break
            env[name] = v
            params[name] = v
        if not ok:
            continue
        for expr in constraints:
            try:
                if abs(expr.eval_frac(env)) > margin:
                    ok = False
                    break
            except ZeroDivisionError:
                ok = False
                break
        if not ok:
            continue
        key = tuple(sorted(env.items()))
        if key in seen:
            continue
        seen.add(key)
        pts.append(SamplePoint(qv, params))
    return pts
