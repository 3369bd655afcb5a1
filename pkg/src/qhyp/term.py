"""Summand model for basic hypergeometric series and its exact shift calculus.

A QHTerm is one summand family

    t(k) = prefactor * prod (arg; q^step)_k ^ mult
                     * prod (iarg; q^istep)_oo ^ imult
                     * geom^k * q^(quad * k(k-1)/2)
                     * prod (1 - M Qk^v) ^ e

with every arg/iarg/geom/M a Laurent monomial in the parameters, Qn and q.
Qn tracks the simultaneous parameter shift (one shift step substitutes
Qn -> q^w Qn); Qk stands for q^k and appears only in the explicit extra
binomials.  All k- and n-quotients of such a term are rational in
(params, Qn, Qk, q), which is what the telescoping layer consumes.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

from .algebra import (
    Monomial, MultiPoly, RationalFunc, VAR_K, VAR_N, VAR_Q, canonical_vars,
    mono_from_obj, mono_to_obj, rf_from_obj, rf_to_obj,
)

_ONE = Fraction(1)


class ShiftError(ValueError):
    """A parameter shift moved a Pochhammer argument off its q-power lattice."""


def _frac_sqrt(c):
    if c <= 0:
        return None
    rn = isqrt(c.numerator)
    rd = isqrt(c.denominator)
    if rn * rn == c.numerator and rd * rd == c.denominator:
        return Fraction(rn, rd)
    return None


def monomial_sqrt(m):
    """Exact square root of a Laurent monomial, or None."""
    c = _frac_sqrt(m.coeff)
    if c is None:
        return None
    if any(e % 2 for e in m.exps.values()):
        return None
    return Monomial(c, {v: e // 2 for v, e in m.exps.items()})


def q_monomial(j):
    return Monomial(_ONE, {VAR_Q: j})


class QHTerm:
    __slots__ = ("prefactor", "pochs", "infs", "geom", "quad", "extra", "bilateral")

    def __init__(self, prefactor, pochs=(), infs=(), geom=None, quad=0,
                 extra=(), bilateral=False):
        self.prefactor = prefactor
        self.pochs = list(pochs)
        self.infs = list(infs)
        self.geom = geom if geom is not None else Monomial.one()
        self.quad = quad
        self.extra = list(extra)
        self.bilateral = bilateral

    def copy(self):
        return QHTerm(self.prefactor, list(self.pochs), list(self.infs),
                      self.geom, self.quad, list(self.extra), self.bilateral)

    def universe(self):
        names = set(self.prefactor.num.vars) | {VAR_N, VAR_K, VAR_Q}
        for arg, _, _ in self.pochs + self.infs:
            names |= arg.vars()
        for m, _, _ in self.extra:
            names |= m.vars()
        names |= self.geom.vars()
        return canonical_vars(names)

    # -- canonical form ----------------------------------------------------

    def canonical(self):
        t = self.copy()
        t.pochs = _canon_pochs(t.pochs, split=True)
        t.infs = _canon_pochs(t.infs, split=True)
        t.extra = _canon_extra(t.extra)
        return t

    def key(self):
        t = self.canonical()
        return (tuple((a.key(), s, m) for a, s, m in t.pochs),
                tuple((a.key(), s, m) for a, s, m in t.infs),
                t.geom.key(), t.quad,
                tuple((a.key(), v, e) for a, v, e in t.extra),
                t.prefactor.key(), t.bilateral)

    def __eq__(self, other):
        return isinstance(other, QHTerm) and self.key() == other.key()

    # -- builders ----------------------------------------------------------

    def times_rational(self, rf):
        t = self.copy()
        t.prefactor = t.prefactor * rf
        return t

    def times_monomial(self, mono, vars=()):
        return self.times_rational(RationalFunc.from_monomial(mono, vars))

    def times_poch(self, arg, step, mult):
        t = self.copy()
        t.pochs.append((arg, step, mult))
        return t

    def times_inf(self, arg, step, mult):
        t = self.copy()
        t.infs.append((arg, step, mult))
        return t

    def times_extra(self, m, v, e):
        t = self.copy()
        t.extra.append((m, v, e))
        return t

    def times_geom(self, mono):
        t = self.copy()
        t.geom = t.geom * mono
        return t

    def substitute(self, mapping):
        """Monomial images for parameters and/or Qn (never Qk)."""
        assert VAR_K not in mapping
        t = self.copy()
        t.prefactor = t.prefactor.substitute_monomials(mapping)
        t.pochs = [(a.substitute(mapping), s, m) for a, s, m in t.pochs]
        t.infs = [(a.substitute(mapping), s, m) for a, s, m in t.infs]
        t.extra = [(a.substitute(mapping), v, e) for a, v, e in t.extra]
        t.geom = t.geom.substitute(mapping)
        return t

    def tag_shifts(self, names):
        """Multiply each shifted parameter by the shift tracker Qn."""
        qn = Monomial.var(VAR_N)
        return self.substitute({p: Monomial.var(p) * qn for p in names})

    def __repr__(self):
        bits = ["pre=%r" % self.prefactor]
        for a, s, m in self.pochs:
            bits.append("poch(%r;q^%d)^%d" % (a, s, m))
        for a, s, m in self.infs:
            bits.append("pochoo(%r;q^%d)^%d" % (a, s, m))
        if not self.geom.is_one():
            bits.append("geom(%r)" % self.geom)
        if self.quad:
            bits.append("quad(%d)" % self.quad)
        for a, v, e in self.extra:
            bits.append("(1-%r*Qk^%d)^%d" % (a, v, e))
        return "QHTerm[%s]" % ", ".join(bits)


def _canon_pochs(pochs, split):
    out = []
    work = list(pochs)
    while work:
        arg, s, m = work.pop()
        if m == 0:
            continue
        if split and s % 2 == 0:
            r = monomial_sqrt(arg)
            if r is not None:
                work.append((r, s // 2, m))
                work.append((r * Monomial(-1), s // 2, m))
                continue
        out.append((arg, s, m))
    merged = {}
    for arg, s, m in out:
        k = (arg.key(), s)
        if k in merged:
            a0, s0, m0 = merged[k]
            merged[k] = (a0, s0, m0 + m)
        else:
            merged[k] = (arg, s, m)
    return sorted(((a, s, m) for a, s, m in merged.values() if m),
                  key=lambda t: (t[0].key(), t[1]))


def _canon_extra(extra):
    merged = {}
    for mono, v, e in extra:
        if e == 0:
            continue
        k = (mono.key(), v)
        if k in merged:
            m0, v0, e0 = merged[k]
            merged[k] = (m0, v0, e0 + e)
        else:
            merged[k] = (mono, v, e)
    return sorted(((a, v, e) for a, v, e in merged.values() if e),
                  key=lambda t: (t[0].key(), t[1]))


# -- ratio calculus ---------------------------------------------------------

class FactoredRatio:
    """scalar * mono * prod (1 - M Qk^v)^e with M free of Qk, v >= 1.

    mono may carry a Qk power; scalar is k-independent.
    """

    __slots__ = ("scalar", "mono", "binoms")

    def __init__(self, scalar, mono, binoms):
        self.scalar = scalar
        self.mono = mono
        self.binoms = list(binoms)

    def rational(self, vars=()):
        out = RationalFunc.from_monomial(self.mono, vars) * self.scalar
        for m, v, e in self.binoms:
            b = RationalFunc.const(out.num.vars, 1) - \
                RationalFunc.from_monomial(m * Monomial.var(VAR_K) ** v, out.num.vars)
            out = out * b ** e
        return out

    def __repr__(self):
        return "FactoredRatio(%r, %r, %r)" % (self.scalar, self.mono, self.binoms)


def k_ratio_factored(t):
    """t(k+1)/t(k)."""
    uni = t.universe()
    scalar = RationalFunc.const(uni, 1)
    mono = t.geom * Monomial(_ONE, {VAR_K: t.quad}) if t.quad else t.geom
    binoms = [(arg, s, m) for arg, s, m in t.pochs]
    q = q_monomial(1)
    for m, v, e in t.extra:
        binoms.append((m * q ** v, v, e))
        binoms.append((m, v, -e))
    return FactoredRatio(scalar, mono, binoms)


def _poch_shift_binoms(arg, s, m, jq, infinite):
    """Factors of (arg*q^jq; q^s)_* / (arg; q^s)_* (finite: _k, else _oo)."""
    if jq == 0:
        return [], []
    if jq % s:
        raise ShiftError("argument %r leaves its q^%d lattice under shift" % (arg, s))
    r = jq // s
    kdep, kind = [], []
    rng = range(0, r) if r > 0 else range(r, 0)
    sign = 1 if r > 0 else -1
    for i in rng:
        ai = arg * q_monomial(s * i)
        if not infinite:
            kdep.append((ai, s, sign * m))
        kind.append((ai, 0, -sign * m))
    return kdep, kind


def shift_ratio_factored(t, j):
    """t[Qn -> q^j Qn](k) / t(k)."""
    uni = t.universe()
    qn_to = {VAR_N: Monomial.var(VAR_N) * q_monomial(j)}
    scalar = t.prefactor.substitute_monomials(qn_to) / t.prefactor
    mono = Monomial.one()
    binoms = []
    for arg, s, m in t.pochs:
        jq = j * arg.exps.get(VAR_N, 0)
        kdep, kind = _poch_shift_binoms(arg, s, m, jq, infinite=False)
        binoms.extend(kdep)
        for ai, _, e in kind:
            scalar = scalar * _binom_rf(ai, uni) ** e
    for arg, s, m in t.infs:
        jq = j * arg.exps.get(VAR_N, 0)
        _, kind = _poch_shift_binoms(arg, s, m, jq, infinite=True)
        for ai, _, e in kind:
            scalar = scalar * _binom_rf(ai, uni) ** e
    g = j * t.geom.exps.get(VAR_N, 0)
    if g:
        mono = mono * Monomial(_ONE, {VAR_K: g})
    for m, v, e in t.extra:
        jq = j * m.exps.get(VAR_N, 0)
        if jq:
            binoms.append((m * q_monomial(jq), v, e))
            binoms.append((m, v, -e))
    return FactoredRatio(scalar, mono, binoms)


def _binom_rf(mono, vars):
    return RationalFunc.const(vars, 1) - RationalFunc.from_monomial(mono, vars)


# plain (expanded) versions, used by the independent certificate checker

def k_ratio(t):
    return k_ratio_factored(t).rational(t.universe())


def shift_quotient(t, j):
    return shift_ratio_factored(t, j).rational(t.universe())


# -- index negation and symmetrization --------------------------------------

def negate_index(t):
    """t(-k) as a QHTerm; valid for all integer k by the quotient definition."""
    out = t.copy()
    geom = t.geom.inverse()
    if t.quad:
        geom = geom * q_monomial(t.quad)
    quad = t.quad
    pre = t.prefactor
    uni = t.universe()
    pochs = []
    for arg, s, m in t.pochs:
        pochs.append((q_monomial(s) * arg.inverse(), s, -m))
        geom = geom * (Monomial(-1) * q_monomial(s) * arg.inverse()) ** m
        quad += s * m
    extra = []
    for mono, v, e in t.extra:
        extra.append((mono.inverse(), v, e))
        geom = geom * q_monomial(-v) ** e
        pre = pre * RationalFunc.from_monomial((Monomial(-1) * mono) ** e, uni)
    out.pochs = pochs
    out.geom = geom
    out.quad = quad
    out.extra = extra
    out.prefactor = pre
    return out


def symmetrize(t):
    """Rewrite (t(k) + t(-k))/2 as one summand when the two halves agree
    up to a geometric factor q^(j k); returns None if they do not."""
    tm = negate_index(t).canonical()
    tc = t.canonical()
    if not (tc.pochs == tm.pochs and tc.infs == tm.infs and tc.quad == tm.quad
            and tc.extra == tm.extra and tc.prefactor == tm.prefactor):
        return None
    ratio = tm.geom.div(tc.geom)
    j = ratio.q_power()
    if j is None:
        return None
    if j == 0:
        return t.copy()
    base = tc if j > 0 else tm
    j = abs(j)
    out = base.times_extra(Monomial(-1), j, 1)
    out.prefactor = out.prefactor * RationalFunc.const(base.universe(), Fraction(1, 2))
    return out


# -- closed forms and series ------------------------------------------------

class ProductForm:
    """scalar * prod (arg; q^step)_oo ^ exp, each arg a Laurent monomial.

    Stored canonically: perfect-square arguments split, equal (arg, step)
    factors merged, factor list sorted.  Structural equality only; deciding
    whether two differently written products agree is the prover's job.
    """

    __slots__ = ("scalar", "factors")

    def __init__(self, scalar, factors=()):
        self.scalar = scalar
        self.factors = _canon_pochs(factors, split=True)

    @classmethod
    def one(cls, vars=()):
        return cls(RationalFunc.const(canonical_vars(vars), 1))

    def times_inf(self, arg, step, exp):
        return ProductForm(self.scalar, self.factors + [(arg, step, exp)])

    def times_rational(self, rf):
        return ProductForm(self.scalar * rf, self.factors)

    def __mul__(self, other):
        return ProductForm(self.scalar * other.scalar,
                           self.factors + other.factors)

    def inverse(self):
        return ProductForm(self.scalar.inverse(),
                           [(a, s, -m) for a, s, m in self.factors])

    def __truediv__(self, other):
        return self * other.inverse()

    def substitute(self, mapping):
        return ProductForm(self.scalar.substitute_monomials(mapping),
                           [(a.substitute(mapping), s, m)
                            for a, s, m in self.factors])

    def is_scalar(self):
        return not self.factors

    def key(self):
        return (self.scalar.key(),
                tuple((a.key(), s, m) for a, s, m in self.factors))

    def __eq__(self, other):
        return isinstance(other, ProductForm) and self.key() == other.key()

    def to_obj(self):
        return {"scalar": rf_to_obj(self.scalar),
                "factors": [[mono_to_obj(a), s, m] for a, s, m in self.factors]}

    @classmethod
    def from_obj(cls, obj):
        return cls(rf_from_obj(obj["scalar"]),
                   [(mono_from_obj(a), s, m) for a, s, m in obj["factors"]])

    def __repr__(self):
        bits = [] if self.scalar.is_one() else ["%r" % self.scalar]
        for a, s, m in self.factors:
            bits.append("(%r;q^%d)oo^%d" % (a, s, m))
        return " * ".join(bits) if bits else "1"


def theta_product(z, base):
    """Jacobi triple product value of sum_k q^(base*C(k,2)) z^k.

    Equals (q^base, -z, -q^base/z; q^base)_oo for any Laurent monomial z.
    """
    qb = q_monomial(base)
    p = ProductForm.one(z.vars() | {VAR_Q})
    return (p.times_inf(qb, base, 1)
             .times_inf(Monomial(-1) * z, base, 1)
             .times_inf(Monomial(-1) * qb * z.inverse(), base, 1))


class SeriesExpr:
    """A finite sum of summand families, each summed over its k-range.

    Components carry their own scalar coefficients (prefactor and infinite
    Pochhammer factors live inside each QHTerm); they must agree on range.
    """

    __slots__ = ("components",)

    def __init__(self, components):
        self.components = list(components)
        assert len({t.bilateral for t in self.components}) <= 1

    @property
    def bilateral(self):
        return bool(self.components) and self.components[0].bilateral

    def universe(self):
        names = set()
        for t in self.components:
            names |= set(t.universe())
        return canonical_vars(names)

    def times_rational(self, rf):
        return SeriesExpr([t.times_rational(rf) for t in self.components])

    def substitute(self, mapping):
        return SeriesExpr([t.substitute(mapping) for t in self.components])

    def tag_shifts(self, names):
        return SeriesExpr([t.tag_shifts(names) for t in self.components])

    def __repr__(self):
        return "SeriesExpr[%s]" % "; ".join(repr(t) for t in self.components)


# -- limits of rational functions -------------------------------------------

def limit_at(rf, var, to_zero=True):
    """Leading behaviour of rf as var -> 0 (or oo).

    Returns (v, lead): rf ~ lead * var^v when to_zero, rf ~ lead * var^-v
    when not; v > 0 means the limit is 0, v == 0 means it is lead, v < 0
    means it diverges.  lead is free of var.
    """
    if rf.is_zero():
        return (0, rf)
    if var not in rf.num.vars:
        return (0, rf)
    cn = rf.num.collect(var)
    cd = rf.den.collect(var)
    if to_zero:
        dn, dd = min(cn), min(cd)
        v = dn - dd
    else:
        dn, dd = max(cn), max(cd)
        v = dd - dn
    lead = RationalFunc(cn[dn], cd[dd])
    return (v, lead)
