"""Creative telescoping for basic hypergeometric summands under parameter shifts.

Given components t^(c)(n, k) (QHTerms tagged with the shift tracker Qn) and a
shift step w, find polynomials p_0..p_d in Qn and per-component rational
certificates R^(c)(Qn, Qk) with

    sum_i p_i t^(c)(n+i, k) = g^(c)(k+1) - g^(c)(k),   g^(c) = R^(c) t^(c)

simultaneously for every component.  The search runs a parameterized q-Gosper
step: each component's combined quotient is put into the normal form
r = (a/b) c(qx)/c(x) with gcd(a(x), b(q^j x)) = 1 for all j >= 0, the unknown
ansatz s(x) is a Laurent polynomial with exact degree and valuation bounds
from leading/trailing coefficient analysis, and a single linear system over
the exact coefficient field couples all components through the shared p_i.
Everything stays factored until the final coefficient extraction, which keeps
the high-order searches tractable.
"""

from __future__ import annotations

from fractions import Fraction

from .algebra import (
    Monomial, MultiPoly, RationalFunc, VAR_K, VAR_N, VAR_Q, canonical_vars,
    poly_gcd, poly_lcm, poly_to_obj, poly_from_obj, rf_to_obj, rf_from_obj,
)
from .term import (
    k_ratio, k_ratio_factored, q_monomial, shift_quotient, shift_ratio_factored,
)

_ONE = Fraction(1)


class Recurrence:
    """sum_i ps[i](Qn) f(n+i) = inhomog, where n-steps act as Qn -> q^w Qn."""

    __slots__ = ("ps", "w", "inhomog")

    def __init__(self, ps, w, inhomog=None):
        self.ps = list(ps)
        self.w = w
        self.inhomog = inhomog

    @property
    def order(self):
        return len(self.ps) - 1

    def __repr__(self):
        s = "Recurrence(w=%d, %s)" % (self.w, ", ".join(
            "p%d=%r" % (i, p) for i, p in enumerate(self.ps)))
        if self.inhomog is not None:
            s += " = %r" % self.inhomog
        return s


class Certificate:
    """A recurrence plus one telescoping certificate R per component."""

    __slots__ = ("recurrence", "Rs")

    def __init__(self, recurrence, Rs):
        self.recurrence = recurrence
        self.Rs = list(Rs)

    @property
    def ps(self):
        return self.recurrence.ps

    @property
    def w(self):
        return self.recurrence.w

    @property
    def order(self):
        return self.recurrence.order

    def to_obj(self):
        return {
            "w": self.w,
            "order": self.order,
            "ps": [poly_to_obj(p) for p in self.ps],
            "Rs": [rf_to_obj(r) for r in self.Rs],
        }

    @classmethod
    def from_obj(cls, obj):
        ps = [poly_from_obj(p) for p in obj["ps"]]
        Rs = [rf_from_obj(r) for r in obj["Rs"]]
        return cls(Recurrence(ps, obj["w"]), Rs)

    def __repr__(self):
        return "Certificate(%r, Rs=%r)" % (self.recurrence, self.Rs)


def _merge_binoms(binoms):
    merged = {}
    for M, v, e in binoms:
        key = (M.key(), v)
        if key in merged:
            M0, v0, e0 = merged[key]
            merged[key] = (M0, v0, e0 + e)
        else:
            merged[key] = (M, v, e)
    return [(M, v, e) for M, v, e in merged.values() if e]


def _q_power_ratio(m1, m2):
    """j with m1 == m2 * q^j, or None."""
    return m1.div(m2).q_power()


def _rf_q_power(rf):
    if len(rf.num.terms) != 1 or len(rf.den.terms) != 1:
        return None
    (mn, cn), = rf.num.terms.items()
    (md, cd), = rf.den.terms.items()
    if cn != cd:
        return None
    e = None
    for var, en, ed in zip(rf.num.vars, mn, md):
        d = en - ed
        if not d:
            continue
        if var != VAR_Q:
            return None
        e = d
    return e or 0


def _split_x(mono):
    """Split a monomial into (Qk exponent, Qk-free monomial)."""
    kappa = mono.exps.get(VAR_K, 0)
    rest = {v: e for v, e in mono.exps.items() if v != VAR_K}
    return kappa, Monomial(mono.coeff, rest)


class _XPoly:
    """Sparse polynomial in x = Qk with coefficients in the parameter field."""

    __slots__ = ("c",)

    def __init__(self, c=None):
        self.c = dict(c or {})

    @classmethod
    def monomial(cls, d, coeff):
        return cls({d: coeff})

    def mul_binom(self, Mrf, v):
        """Multiply by (1 - Mrf x^v)."""
        out = dict(self.c)
        for d, coeff in self.c.items():
            val = out.get(d + v)
            delta = coeff * Mrf
            out[d + v] = (val - delta) if val is not None else -delta
        return _XPoly({d: c for d, c in out.items() if not c.is_zero()})

    def is_zero(self):
        return not self.c

    def deg(self):
        return max(self.c)

    def val(self):
        return min(self.c)


def _normal_form(binoms, kuni):
    """Gosper normal form of a factored quotient.

    Returns (a_factors, b_factors, c_factors), lists of (Monomial, v) with
    multiplicity, such that prod binoms == (a/b) * c(qx)/c(x) and
    gcd(a(x), b(q^j x)) = 1 for every j >= 0.
    """
    num = []
    den = []
    for M, v, e in _merge_binoms(binoms):
        (num if e > 0 else den).extend([(M, v)] * abs(e))
    cfac = []
    num.sort(key=lambda t: (t[1], t[0].key()))
    den.sort(key=lambda t: (t[1], t[0].key()))
    changed = True
    while changed:
        changed = False
        for i, (Mu, vu) in enumerate(num):
            for jdx, (Mv, vv) in enumerate(den):
                if vu != vv:
                    continue
                p = _q_power_ratio(Mu, Mv)
                if p is None or p % vu:
                    continue
                j = p // vu
                if j < 0:
                    continue
                num.pop(i)
                den.pop(jdx)
                for r in range(j):
                    cfac.append((Mv * q_monomial(r * vu), vu))
                changed = True
                break
            if changed:
                break
    return num, den, cfac


def _expand_factors(factors, x_power, scalar, kuni):
    out = _XPoly.monomial(x_power, scalar)
    for M, v in factors:
        out = out.mul_binom(RationalFunc.from_monomial(M, kuni), v)
    return out


def _component_system(t, w, order, kuni, bump, fixed_ps):
    """Rows of the local Gosper system for one component.

    Returns (srange, rows, bq_xpoly, cden_rf) where rows maps x-power to a
    dict of local columns: ('s', j) for the Laurent ansatz and ('p', i) or
    ('rhs',) for the recurrence side.
    """
    one = RationalFunc.const(kuni, 1)
    sigmas = [shift_ratio_factored(t, w * i) for i in range(order + 1)]
    rfac = k_ratio_factored(t)

    # common denominator of the sigmas, kept factored
    denmult = {}
    for s in sigmas:
        for M, v, e in _merge_binoms(s.binoms):
            if e < 0:
                key = (M.key(), v)
                cur = denmult.get(key)
                if cur is None or -e > cur[2]:
                    denmult[key] = (M, v, -e)
    kappas = [_split_x(s.mono)[0] for s in sigmas]
    X = max(0, -min(kappas))
    den_factors = [(M, v, e) for M, v, e in denmult.values()]

    # nu_i = sigma_i * x^X * prod den factors  (a polynomial in x)
    nus = []
    for s, kappa in zip(sigmas, kappas):
        _, rest = _split_x(s.mono)
        coeff = s.scalar * RationalFunc.from_monomial(rest, kuni)
        nu = _XPoly.monomial(kappa + X, coeff)
        local = {(M.key(), v): e for M, v, e in _merge_binoms(s.binoms)}
        for key, (M, v, e) in denmult.items():
            local[key] = local.get(key, 0) + e
        seen = set()
        for M, v, e in _merge_binoms(s.binoms) + den_factors:
            key = (M.key(), v)
            if key in seen:
                continue
            seen.add(key)
            mult = local.get(key, 0)
            assert mult >= 0
            Mrf = RationalFunc.from_monomial(M, kuni)
            for _ in range(mult):
                nu = nu.mul_binom(Mrf, v)
        nus.append(nu)

    # r_tau = r * den(x)/den(qx); the x^X part contributes only q^-X
    binoms = list(rfac.binoms)
    for M, v, e in den_factors:
        binoms.append((M, v, e))
        binoms.append((M * q_monomial(v), v, -e))
    kappa_r, rest_r = _split_x(rfac.mono)
    scalar = rfac.scalar * RationalFunc.from_monomial(rest_r, kuni)
    if X:
        scalar = scalar * RationalFunc.var(kuni, VAR_Q) ** (-X)

    afac, bfac, cfac = _normal_form(binoms, kuni)
    ax_power = max(kappa_r, 0)
    bx_power = max(-kappa_r, 0)
    a = _expand_factors(afac, ax_power, scalar, kuni)
    b = _expand_factors(bfac, bx_power, one, kuni)
    qrf = RationalFunc.var(kuni, VAR_Q)
    bq = _XPoly({d: c * qrf ** (-d) for d, c in b.c.items()})  # b(x/q)
    cpoly = _expand_factors(cfac, 0, one, kuni)

    # right-hand side polynomials c(x) * nu_i(x)
    rhs = []
    for nu in nus:
        cur = nu
        for M, v in cfac:
            cur = cur.mul_binom(RationalFunc.from_monomial(M, kuni), v)
        rhs.append(cur)

    # degree and valuation bounds for the Laurent ansatz s(x)
    A, alpha = a.deg(), a.val()
    B, beta = bq.deg(), bq.val()
    N = max(r.deg() for r in rhs if not r.is_zero())
    n0 = min(r.val() for r in rhs if not r.is_zero())
    degs = [N - max(A, B)]
    if A == B:
        e = _rf_q_power(bq.c[B] / a.c[A])
        if e is not None:
            degs.append(e)
    vals = [n0 - min(alpha, beta)]
    if alpha == beta:
        e = _rf_q_power(bq.c[beta] / a.c[alpha])
        if e is not None:
            vals.append(e)
    deg = max(degs) + bump
    val = min(vals) - bump

    rows = {}

    def put(power, col, value):
        if value.is_zero():
            return
        row = rows.setdefault(power, {})
        cur = row.get(col)
        nv = value if cur is None else cur + value
        if nv.is_zero():
            row.pop(col, None)
        else:
            row[col] = nv

    for j in range(val, deg + 1):
        qj = qrf ** j
        for m, c in a.c.items():
            put(m + j, ("s", j), c * qj)
        for m, c in bq.c.items():
            put(m + j, ("s", j), -c)
    if fixed_ps is None:
        for i, r in enumerate(rhs):
            for m, c in r.c.items():
                put(m, ("p", i), -c)
    else:
        for i, r in enumerate(rhs):
            pi = fixed_ps[i]
            for m, c in r.c.items():
                put(m, ("rhs",), -c * pi)

    return (val, deg), rows, bq, cfac, den_factors, X


class _Eliminator:
    """Exact reduced row echelon over the rational-function field."""

    def __init__(self, order_idx):
        self.order_idx = order_idx
        self.pivots = {}

    def add(self, row):
        row = dict(row)
        while True:
            hit = [c for c in row if c in self.pivots]
            if not hit:
                break
            c = min(hit, key=self.order_idx.get)
            f = row.pop(c)
            for cc, vv in self.pivots[c].items():
                if cc == c:
                    continue
                cur = row.get(cc)
                nv = (cur - f * vv) if cur is not None else -f * vv
                if nv.is_zero():
                    row.pop(cc, None)
                else:
                    row[cc] = nv
        if not row:
            return
        pc = min(row, key=self.order_idx.get)
        inv = row[pc]
        prow = {c: v / inv for c, v in row.items() if c != pc}
        for opc, orow in self.pivots.items():
            if pc in orow:
                f = orow.pop(pc)
                for cc, vv in prow.items():
                    cur = orow.get(cc)
                    nv = (cur - f * vv) if cur is not None else -f * vv
                    if nv.is_zero():
                        orow.pop(cc, None)
                    else:
                        orow[cc] = nv
        prow[pc] = None  # marker; pivot coefficient is 1
        self.pivots[pc] = prow

    def solution(self, free_col, one):
        sol = {free_col: one}
        for pc, prow in self.pivots.items():
            v = prow.get(free_col)
            sol[pc] = -v if v is not None else None
        return {c: v for c, v in sol.items() if v is not None}


def telescope(components, w, order, fixed_ps=None, max_bump=3):
    """Search a joint certificate of the given order; None if there is none."""
    names = set()
    for t in components:
        names |= set(t.universe())
    names.discard(VAR_K)
    kuni = canonical_vars(names)
    one = RationalFunc.const(kuni, 1)

    fixed = None
    if fixed_ps is not None:
        fixed = [RationalFunc.from_poly(p) if isinstance(p, MultiPoly) else p
                 for p in fixed_ps]

    for bump in range(0, max_bump + 1):
        built = [_component_system(t, w, order, kuni, bump, fixed)
                 for t in components]
        cols = []
        for ci, (srange, _, _, _, _, _) in enumerate(built):
            val, deg = srange
            cols.extend(("s", ci, j) for j in range(deg, val - 1, -1))
        if fixed is None:
            cols.extend(("p", i) for i in range(order + 1))
        else:
            cols.append(("rhs",))
        order_idx = {c: i for i, c in enumerate(cols)}

        elim = _Eliminator(order_idx)
        for ci, (_, rows, _, _, _, _) in enumerate(built):
            for power in sorted(rows, reverse=True):
                row = {}
                for col, v in rows[power].items():
                    if col[0] == "s":
                        row[("s", ci, col[1])] = v
                    else:
                        row[col] = v
                elim.add(row)

        for free in reversed(cols):
            if free in elim.pivots:
                continue
            sol = elim.solution(free, one)
            if fixed is None:
                ps = [sol.get(("p", i)) for i in range(order + 1)]
                if all(p is None for p in ps):
                    continue
                ps = [p if p is not None else RationalFunc.const(kuni, 0)
                      for p in ps]
                return _assemble(built, components, ps, sol, w, order, kuni)
            else:
                lam = sol.get(("rhs",))
                if lam is None:
                    continue
                sol = {c: v / lam for c, v in sol.items()}
                return _assemble(built, components, fixed, sol, w, order, kuni,
                                 normalize=False)
    return None


def _assemble(built, components, ps, sol, w, order, kuni, normalize=True):
    one = RationalFunc.const(kuni, 1)
    if normalize:
        L = MultiPoly.const(kuni, 1)
        for p in ps:
            if not p.is_zero():
                L = poly_lcm(L, p.den)
        scaled = []
        for p in ps:
            pl = RationalFunc.from_poly(L) * p
            assert pl.den.is_const()
            scaled.append(pl.num.scale(1 / pl.den.const_value()))
        g = MultiPoly.zero(kuni)
        for p in scaled:
            g = poly_gcd(g, p)
        if not g.is_zero() and not g.is_const():
            scaled = [p.exact_div(g) for p in scaled]
        i0 = _first_nonzero(scaled)
        cont, _ = scaled[i0].content_primitive()
        scaled = [p.scale(1 / cont) for p in scaled]
        lam = RationalFunc.from_poly(scaled[i0]) / ps[i0]
        ps_out = scaled
    else:
        lam = one
        ps_out = []
        for p in ps:
            if isinstance(p, RationalFunc):
                assert p.den.is_const()
                ps_out.append(p.num.scale(1 / p.den.const_value()))
            else:
                ps_out.append(p)

    Rs = []
    x = RationalFunc.var(canonical_vars((VAR_K,)), VAR_K)
    for ci, (srange, _, bq, cfac, den_factors, X) in enumerate(built):
        val, deg = srange
        s_rf = None
        for j in range(val, deg + 1):
            coeff = sol.get(("s", ci, j))
            if coeff is not None and not coeff.is_zero():
                piece = coeff * x ** j
                s_rf = piece if s_rf is None else s_rf + piece
        if s_rf is None:
            Rs.append(RationalFunc.const(canonical_vars((VAR_K,)), 0))
            continue
        bq_rf = None
        for d, c in bq.c.items():
            piece = c * x ** d
            bq_rf = piece if bq_rf is None else bq_rf + piece
        R = bq_rf * s_rf
        for M, v in cfac:
            R = R / (1 - RationalFunc.from_monomial(M * Monomial.var(VAR_K) ** v))
        for M, v, e in den_factors:
            R = R / (1 - RationalFunc.from_monomial(M * Monomial.var(VAR_K) ** v)) ** e
        if X:
            R = R / x ** X
        R = R * lam
        Rs.append(R)
    return Certificate(Recurrence(ps_out, w), Rs)


def _first_nonzero(ps):
    for i, p in enumerate(ps):
        if not p.is_zero():
            return i
    raise ValueError("all recurrence coefficients vanished")


def find_certificate(components, w, max_order, start_order=1):
    for order in range(start_order, max_order + 1):
        cert = telescope(components, w, order)
        if cert is not None:
            return cert
    return None


def certify_verify(component, w, ps, R):
    """Independent check of one component's telescoping identity.

    Recomputes every quotient with plain rational arithmetic (no factored
    machinery, no solver state) and tests

        sum_i ps[i] t(n+i,k)/t(n,k) == R(Qn, q Qk) t(n,k+1)/t(n,k) - R(Qn, Qk)
    """
    uni = canonical_vars(component.universe())
    lhs = RationalFunc.const(uni, 0)
    for i, p in enumerate(ps):
        pi = RationalFunc.from_poly(p) if isinstance(p, MultiPoly) else p
        lhs = lhs + pi * shift_quotient(component, w * i)
    Rq = R.substitute_monomials({VAR_K: Monomial.var(VAR_K) * q_monomial(1)})
    rhs = Rq * k_ratio(component) - R
    return (lhs - rhs).is_zero()
