"""Proof drivers: recurrence, boundary, product collapse, limit matching.

The pipeline mechanizes the classical two-step proof of a q-series identity:

1. telescope the summand(s) under the declared parameter shifts into an exact
   recurrence  sum_i p_i(Qn) f(n+i) = net boundary term,
2. resolve the boundary (limits of g = R*t at the summation ends) exactly,
3. for a two-term recurrence, iterate it into an infinite product and
   evaluate the remaining limit  lim f  under the shifts,
4. for transformations, derive the same recurrence on both sides, check the
   uniqueness conditions (initial value + coefficient limits), match limits.

Every step is exact rational arithmetic over Q(q, params, Qn); the numeric
module supplies an independent cross-check, never a proof step, except where
a result is explicitly flagged conditional.
"""

from __future__ import annotations

from fractions import Fraction
import math

import mpmath

from .algebra import (
    Monomial, MultiPoly, RationalFunc, VAR_K, VAR_N, VAR_Q, canonical_vars,
)
from .term import (
    ProductForm, QHTerm, SeriesExpr, limit_at, negate_index, q_monomial,
    symmetrize, theta_product,
)
from .telescope import Certificate, Recurrence, certify_verify, telescope
from . import numeric


class ProverError(ValueError):
    pass


class TelescopeError(ProverError):
    pass


class BoundaryError(ProverError):
    pass


class CollapseError(ProverError):
    pass


class LimitError(ProverError):
    pass


class MatchError(ProverError):
    pass


def _rf_mono(rf):
    """RationalFunc -> Laurent Monomial, or None if it is not one."""
    if rf.is_zero() or len(rf.num.terms) != 1 or len(rf.den.terms) != 1:
        return None
    (mn, cn), = rf.num.terms.items()
    (md, cd), = rf.den.terms.items()
    exps = {v: a - b for v, a, b in zip(rf.num.vars, mn, md) if a - b}
    return Monomial(cn / cd, exps)


def _qn_exp(mono):
    return mono.exps.get(VAR_N, 0)


def _vanishing(entry):
    """Monomials pinned to q^-M by the terminating hypothesis; any product
    carrying such a factor (x; q)_oo is identically zero on the hypothesis."""
    out = []
    for rf in entry.terminating:
        m = _rf_mono(rf)
        if m is None:
            raise ProverError("terminating value %r is not a monomial" % rf)
        if any(v in entry.shift for v in m.exps):
            raise ProverError("terminating parameter is among the shifted "
                              "ones; the hypothesis would not survive a step")
        out.append(m)
    return tuple(out)


def _factors_vanish(factors, vanishing):
    return any(arg == v and s == 1 and m > 0
               for arg, s, m in factors for v in vanishing)


def _strip_qn(mono):
    exps = {v: e for v, e in mono.exps.items() if v != VAR_N}
    return Monomial(mono.coeff, exps)


# -- magnitude facts ----------------------------------------------------------

def fact_monomials(constraints):
    """Keep the |expr| < 1 constraints whose expr is a Laurent monomial."""
    facts = []
    for rf in constraints:
        m = _rf_mono(rf)
        if m is not None:
            facts.append(m)
    return facts


def _small_residual(m, w, strict_used):
    c = abs(m.coeff)
    j = m.exps.get(VAR_Q, 0)
    l = m.exps.get(VAR_N, 0)
    if any(v not in (VAR_Q, VAR_N) for v in m.exps):
        return False
    if w * l < 0:  # |Qn^l| = |q|^(w*n*l) <= 1 only when w*l >= 0
        return False
    if j < 0 or c > 1:
        return False
    return strict_used or c < 1 or j >= 1


def known_small(mono, facts, w, max_exp=12, max_depth=8):
    """Decide |mono| < 1 on the region |q| < 1, n >= 0, |B| < 1 for B in facts.

    Searches for mono == prod B_i^(e_i) * c * q^j * Qn^l with e_i, j >= 0,
    w*l >= 0, |c| <= 1, at least one strict factor.  Purely structural; a
    False answer means "not forced", not "false".
    """
    seen = set()

    def rec(m, depth, used):
        if _small_residual(m, w, used):
            return True
        if depth >= max_depth:
            return False
        key = m.key()
        if key in seen:
            return False
        seen.add(key)
        for B in facts:
            m2 = m.div(B)
            if any(abs(e) > max_exp for e in m2.exps.values()):
                continue
            if rec(m2, depth + 1, True):
                return True
        return False

    return rec(mono, 0, False)


# -- comparing infinite products ----------------------------------------------

def _zero_product():
    return ProductForm(RationalFunc.const((), 0))


def product_ratio_scalar(p1, p2):
    """p1/p2 as an exact RationalFunc, or None when the ratio is not rational.

    Factors are expanded onto the lattice (arg; q^L) for L = lcm of the steps;
    within each equivalence class arg ~ arg*q^L the infinite tails must cancel
    and only finitely many binomials 1 - arg*q^(L*i) remain.
    """
    if p2.scalar.is_zero():
        return None
    merged = [(a, s, m) for a, s, m in p1.factors]
    merged += [(a, s, -m) for a, s, m in p2.factors]
    scalar = p1.scalar / p2.scalar
    if not merged:
        return scalar
    L = 1
    for _, s, _ in merged:
        L = L * s // math.gcd(L, s)
    classes = {}
    for arg, s, m in merged:
        for i in range(L // s):
            A = arg * q_monomial(s * i)
            t = A.exps.get(VAR_Q, 0)
            rest = tuple(sorted((v, e) for v, e in A.exps.items() if v != VAR_Q))
            key = (A.coeff, rest, t % L)
            classes.setdefault(key, []).append((t, A, m))
    one = RationalFunc.const((VAR_Q,), 1)
    corr = one
    for members in classes.values():
        if sum(m for _, _, m in members) != 0:
            return None
        t0 = min(t for t, _, _ in members)
        A0 = next(A for t, A, _ in members if t == t0)
        for t, _, m in members:
            c = (t - t0) // L
            for i in range(c):
                b = one - RationalFunc.from_monomial(A0 * q_monomial(L * i))
                if b.is_zero():
                    return None
                corr = corr * b ** (-m)
    return scalar * corr


def product_equal(p1, p2):
    if p1.scalar.is_zero() or p2.scalar.is_zero():
        return p1.scalar.is_zero() and p2.scalar.is_zero()
    r = product_ratio_scalar(p1, p2)
    return r is not None and r.is_one()


def sum_contributions(values):
    """Combine ProductForms by +, merging pairs whose ratio is rational.

    Returns a single ProductForm (zero scalar when everything cancels) or
    None when two or more structurally incompatible products remain.
    """
    work = [v for v in values if not v.scalar.is_zero()]
    merged = True
    while len(work) > 1 and merged:
        merged = False
        for i in range(len(work)):
            for j in range(i + 1, len(work)):
                r = product_ratio_scalar(work[i], work[j])
                if r is None:
                    continue
                s = work[j].scalar * (1 + r)
                rest = [work[x] for x in range(len(work)) if x not in (i, j)]
                if not s.is_zero():
                    rest.append(ProductForm(s, work[j].factors))
                work = rest
                merged = True
                break
            if merged:
                break
    if not work:
        return _zero_product()
    if len(work) == 1:
        return work[0]
    return None


def term_product_ratio(t1, t2):
    """t1/t2 as a ProductForm when the k-dependence agrees exactly."""
    a, b = t1.canonical(), t2.canonical()
    if (a.pochs != b.pochs or a.geom != b.geom or a.quad != b.quad
            or a.extra != b.extra or a.bilateral != b.bilateral):
        return None
    if b.prefactor.is_zero():
        return None
    r = ProductForm(a.prefactor / b.prefactor)
    for arg, s, m in a.infs:
        r = r.times_inf(arg, s, m)
    for arg, s, m in b.infs:
        r = r.times_inf(arg, s, -m)
    return r


# -- termwise limits under the shifts -----------------------------------------

def limit_term(t, to_zero=True):
    """Limit of the summand family t as Qn -> 0 (or Qn -> oo).

    Returns ("zero", None), ("value", ProductForm) when only the k = 0 term
    survives, or ("series", QHTerm) when a Qn-free residual series remains.
    Divergent pieces raise LimitError.  The rewrites are the termwise limits;
    domination of the dropped factors is geometric on the constraint region.
    """
    sigma = 1 if to_zero else -1
    v0, lead = limit_at(t.prefactor, VAR_N, to_zero)
    geom, quad = t.geom, t.quad
    carry = Monomial.one()
    pochs_keep = []
    for arg, s, m in t.pochs:
        p = _qn_exp(arg)
        if p == 0:
            pochs_keep.append((arg, s, m))
        elif p * sigma > 0:
            continue  # arg -> 0, (arg;q^s)_k -> 1
        else:  # arg -> oo: (A;q^s)_k = (-A)^k q^(s*C(k,2)) (q^s/A;q^s)_k
            geom = geom * (Monomial(-1) * arg) ** m
            quad += s * m
    infs_keep = []
    diverging_up = diverging_down = False
    for arg, s, m in t.infs:
        p = _qn_exp(arg)
        if p == 0:
            infs_keep.append((arg, s, m))
        elif p * sigma > 0:
            continue  # (arg;q^s)_oo -> 1
        elif m > 0:
            diverging_up = True
        else:
            diverging_down = True
    extra_keep = []
    for mono, v, e in t.extra:
        p = _qn_exp(mono)
        if p == 0:
            extra_keep.append((mono, v, e))
        elif p * sigma > 0:
            continue  # (1 - mono*Qk^v)^e -> 1
        else:  # mono -> oo: factor ~ (-mono)^e q^(v*e*k)
            carry = carry * (Monomial(-1) * mono) ** e
            geom = geom * q_monomial(v) ** e
    if diverging_up:
        raise LimitError("an infinite-product factor diverges under the shifts")
    if diverging_down:
        return ("zero", None)  # reciprocal of a divergent product
    E1 = _qn_exp(geom)
    X0 = v0 + _qn_exp(carry)
    pre = lead * RationalFunc.from_monomial(_strip_qn(carry))
    if t.bilateral:
        if E1 != 0:
            raise LimitError("bilateral summand has no termwise limit")
        if X0 * sigma > 0:
            return ("zero", None)
        if X0 != 0:
            raise LimitError("bilateral prefactor diverges")
        out = QHTerm(pre, pochs_keep, infs_keep, geom, quad, extra_keep, True)
        return ("series", out.canonical())
    if E1 * sigma > 0:
        # geometric base -> 0: only the k = 0 term survives
        if X0 * sigma > 0:
            return ("zero", None)
        if X0 != 0:
            raise LimitError("prefactor diverges")
        val = ProductForm(pre, infs_keep)
        for mono, v, e in extra_keep:
            b = RationalFunc.const((), 1) - RationalFunc.from_monomial(mono)
            val = val.times_rational(b ** e)
        return ("value", val)
    if E1 != 0:
        raise LimitError("geometric factor diverges under the shifts")
    if X0 * sigma > 0:
        return ("zero", None)
    if X0 != 0:
        raise LimitError("prefactor diverges")
    out = QHTerm(pre, pochs_keep, infs_keep, geom, quad, extra_keep, False)
    return ("series", out.canonical())


def limit_side(components, to_zero=True):
    """(values, residues) of a tagged series side under the shifts."""
    values, residues = [], []
    for t in components:
        kind, payload = limit_term(t, to_zero)
        if kind == "value":
            values.append(payload)
        elif kind == "series":
            residues.append(payload)
    return values, residues


def product_limit(p, shifts, to_zero=True):
    """Limit of a ProductForm when the shifted parameters run to their end."""
    tag = {name: Monomial.var(name) * Monomial.var(VAR_N) for name in shifts}
    pt = p.substitute(tag)
    sigma = 1 if to_zero else -1
    keep = []
    for arg, s, m in pt.factors:
        e = _qn_exp(arg)
        if e == 0:
            keep.append((arg, s, m))
        elif e * sigma > 0:
            continue
        else:
            raise LimitError("product factor diverges under the shifts")
    v, lead = limit_at(pt.scalar, VAR_N, to_zero)
    if v * sigma > 0:
        return _zero_product()
    if v != 0:
        raise LimitError("product scalar diverges under the shifts")
    return ProductForm(lead, keep)


# -- closures: matching residual series against proved identities -------------

def _match_common_ratio(residues, inst, vanishing=()):
    """Match residual terms against instantiated components, one-to-one, all
    sharing a single ProductForm ratio; returns that ratio.  Instantiated
    components killed by a terminating hypothesis may stay unmatched."""
    if len(residues) > len(inst):
        raise LimitError("residual series has %d components, dependency has %d"
                         % (len(residues), len(inst)))
    used = [False] * len(inst)
    ratios = []
    for t in residues:
        for i, s in enumerate(inst):
            if used[i]:
                continue
            r = term_product_ratio(t, s)
            if r is not None:
                used[i] = True
                ratios.append(r)
                break
        else:
            raise LimitError("residual series does not match the dependency")
    for i, s in enumerate(inst):
        if not used[i] and not _factors_vanish(s.infs, vanishing):
            raise LimitError("a dependency component has no residual partner")
    if not ratios:
        raise LimitError("nothing left of the dependency instance")
    for r in ratios[1:]:
        if not product_equal(ratios[0], r):
            raise LimitError("dependency match needs one common prefactor")
    return ratios[0]


def _mono_map(mapping):
    out = {}
    for name, v in mapping.items():
        m = v if isinstance(v, Monomial) else _rf_mono(v)
        if m is None:
            raise ProverError("closure map for %s must be a monomial" % name)
        out[name] = m
    return out


def closure_value(residues, dep, mapping, vanishing=()):
    """Value of residual series that match a proved summation instance."""
    if not isinstance(dep.rhs, ProductForm):
        raise LimitError("closure dependency %s has no product side" % dep.id)
    mono = _mono_map(mapping)
    inst = [c.substitute(mono).canonical() for c in dep.lhs.components]
    ratio = _match_common_ratio(residues, inst, vanishing)
    return ratio * dep.rhs.substitute(mono)


def expand_extras(t):
    """Multiply the (1 - M*Qk^v)^e factors out into plain summands."""
    base = t.copy()
    base.extra = []
    pieces = [base]
    for mono, v, e in t.extra:
        if e < 0:
            raise LimitError("cannot expand a reciprocal quadratic factor")
        new = []
        for p in pieces:
            for j in range(e + 1):
                c = Fraction(math.comb(e, j))
                out = p.times_monomial((Monomial(-1) * mono) ** j)
                out = out.times_rational(RationalFunc.const((), c))
                out = out.times_geom(q_monomial(v) ** j)
                new.append(out)
        pieces = new
    return [p.canonical() for p in pieces]


def _mono_root(m, r):
    """Exact r-th roots of a Laurent monomial (both signs for even r)."""
    if any(e % r for e in m.exps.values()):
        return []
    exps = {v: e // r for v, e in m.exps.items()}
    c = m.coeff
    if c < 0 and r % 2 == 0:
        return []
    sign = -1 if c < 0 else 1
    c = abs(c)
    num = round(c.numerator ** (1 / r))
    den = round(c.denominator ** (1 / r))
    if num ** r != c.numerator or den ** r != c.denominator:
        return []
    root = Fraction(sign * num, den) if r % 2 else Fraction(num, den)
    out = [Monomial(root, exps)]
    if r % 2 == 0:
        out.append(Monomial(-root, exps))
    return out


def _dissect(pieces):
    """Reassemble r residue classes of one theta series into a single theta.

    pieces: list of (coeff RationalFunc, infs, D, Z).  The k = r*j + t split
    of sum q^(D0*C(k,2)) Z0^k has piece t with coefficient q^(D0*C(t,2)) Z0^t,
    quadratic base D0*r^2 and geometric base Z0^r q^(D0*r*((r-1)/2 + t)).
    """
    r = len(pieces)
    D = pieces[0][2]
    if r < 2 or any(p[2] != D for p in pieces) or D % (r * r):
        raise LimitError("theta pieces do not form a dissection")
    if any(p[1] != pieces[0][1] for p in pieces):
        raise LimitError("theta pieces carry unequal product factors")
    D0 = D // (r * r)
    js = []
    for _, _, _, Z in pieces:
        j = Z.div(pieces[0][3]).q_power()
        if j is None:
            raise LimitError("theta pieces are not on one geometric ladder")
        js.append(j)
    order = sorted(range(r), key=lambda i: js[i])
    js = [js[i] - js[order[0]] for i in order]
    if js != [D0 * r * t for t in range(r)]:
        raise LimitError("theta piece spacing does not match a dissection")
    pieces = [pieces[i] for i in order]
    c0, infs, _, Z_0 = pieces[0]
    if c0.is_zero():
        raise LimitError("leading theta piece vanished")
    for Z0 in _mono_root(Z_0 * q_monomial(-D0 * r * (r - 1) // 2), r):
        ok = True
        for t in range(r):
            want = q_monomial(D0 * t * (t - 1) // 2) * Z0 ** t
            if pieces[t][0] / c0 != RationalFunc.from_monomial(want):
                ok = False
                break
        if ok:
            val = ProductForm(c0, infs)
            return val * theta_product(Z0, D0)
    raise LimitError("no exact root completes the theta dissection")


def theta_value(residues):
    """Evaluate bilateral residual series as Jacobi triple products."""
    pieces = []
    for t in residues:
        for p in expand_extras(t):
            p = p.canonical()
            if p.pochs or not p.bilateral or p.quad <= 0:
                raise LimitError("residual series is not a theta series")
            pieces.append((p.prefactor, tuple(p.infs), p.quad, p.geom))
    vals = [ProductForm(c, infs) * theta_product(Z, D)
            for c, infs, D, Z in pieces]
    total = sum_contributions(vals)
    if total is not None:
        return total
    return _dissect(pieces)


def resolve_limit(hint, values, residues, resolver, vanishing=()):
    """Combine limit contributions into one ProductForm, using the hint for
    any residual series (closure against a proved identity, or theta)."""
    kind = hint[0]
    if residues:
        if kind == "closure":
            if resolver is None:
                raise LimitError("closure limit needs a dependency resolver")
            val = closure_value(residues, resolver(hint[1]), hint[2],
                                vanishing)
        elif kind == "theta":
            val = theta_value(residues)
        else:
            raise LimitError("a residual series remains but the limit hint "
                             "is %r" % (kind,))
        values = values + [val]
    total = sum_contributions(values)
    if total is None:
        raise LimitError("limit contributions do not combine")
    if kind == "scalar":
        want = ProductForm(hint[1])
        if not product_equal(total, want):
            raise LimitError("limit value %r differs from the declared %r"
                             % (total, want))
    return total


# -- boundary analysis of the certificate -------------------------------------

def upper_boundary(t, R, facts, w):
    """Classify lim_(k->oo) R(Qk) t(k).

    Returns ("zero", None), ("const", ProductForm), or ("open", Monomial);
    raises BoundaryError when the limit provably diverges.
    """
    if R.is_zero():
        return ("zero", None)
    if t.quad < 0:
        raise BoundaryError("summand grows superexponentially in k")
    vR, leadR = limit_at(R, VAR_K, to_zero=True)
    if t.quad > 0:
        return ("zero", None)
    B = t.geom * q_monomial(vR)
    if known_small(B, facts, w):
        return ("zero", None)
    if B.is_one():
        val = ProductForm(t.prefactor * leadR, list(t.infs))
        for arg, s, m in t.pochs:
            val = val.times_inf(arg, s, m)
        return ("const", val)
    if known_small(B.inverse(), facts, w):
        raise BoundaryError("certificate boundary diverges at k -> oo")
    return ("open", B)


def _lower_value(t, R):
    """g(n, 0) = R(Qk=1) * t(n, 0) for a unilateral summand."""
    try:
        R0 = R.eval_var(VAR_K, 1)
    except ZeroDivisionError:
        raise BoundaryError("certificate has a pole at the lower end")
    val = ProductForm(t.prefactor * R0, list(t.infs))
    for mono, v, e in t.extra:
        b = RationalFunc.const((), 1) - RationalFunc.from_monomial(mono)
        val = val.times_rational(b ** e)
    return val


def _mirror(t, R):
    tm = negate_index(t)
    Rm = R.substitute_monomials({VAR_K: Monomial.var(VAR_K, -1)})
    return tm, Rm


def boundary_net(components, cert, facts, w, terminating=(),
                 numeric_env=None):
    """Net boundary contribution sum_i p_i f(n+i) picks up from g = R*t.

    Unilateral: lim_(k->oo) g - g(n,0); bilateral: lim_(k->oo) - lim_(k->-oo).
    Returns (net ProductForm, flags set).  "open" magnitudes fall back to the
    terminating hypothesis (whose monomials kill any product carrying them as
    an (x; q)_oo factor) or a numeric limit check, with a flag.
    """
    flags = set()
    contributions = []

    def settle(t, R, kind, payload, direction):
        if kind == "zero":
            return None
        if kind == "const":
            if terminating and _factors_vanish(payload.factors, terminating):
                flags.add("terminating")
                return None
            return payload
        if terminating:
            flags.add("terminating")
            return None
        if numeric_env is not None:
            pts, cfg = numeric_env
            for assign in pts:
                verdict, _ = numeric.boundary_limit_numeric(
                    t, R, direction, assign, cfg)
                if verdict != "zero":
                    raise BoundaryError(
                        "boundary magnitude |%r| unresolved" % (payload,))
            flags.add("boundary-numeric")
            return None
        raise BoundaryError("boundary magnitude |%r| unresolved" % (payload,))

    for t, R in zip(components, cert.Rs):
        kind, payload = upper_boundary(t, R, facts, w)
        up = settle(t, R, kind, payload, 1)
        if up is not None:
            contributions.append(up)
        if t.bilateral:
            tm, Rm = _mirror(t, R)
            kind, payload = upper_boundary(tm, Rm, facts, w)
            low = settle(t, R, kind, payload, -1)
            if low is not None:
                contributions.append(low.times_rational(
                    RationalFunc.const((), -1)))
        else:
            g0 = _lower_value(t, R)
            contributions.append(g0.times_rational(RationalFunc.const((), -1)))
    net = sum_contributions(contributions)
    if net is None:
        raise BoundaryError("boundary contributions do not combine")
    return net, flags


def _net_scalar(net):
    """The net boundary as a RationalFunc; None if it is zero."""
    if net.scalar.is_zero():
        return None
    r = product_ratio_scalar(net, ProductForm.one())
    if r is None:
        raise BoundaryError("net boundary term is not a scalar: %r" % (net,))
    return r


# -- collapsing a two-term recurrence into an infinite product ----------------

_PRIME_POOL = [101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157]
_Q_PRIME = 211


def _prime_assign(names):
    params = sorted(n for n in names if n not in (VAR_N, VAR_K, VAR_Q))
    assert len(params) <= len(_PRIME_POOL)
    assign = {name: Fraction(p) for name, p in zip(params, _PRIME_POOL)}
    assign[VAR_Q] = Fraction(_Q_PRIME)
    return assign


def _recon_monomial(val, assign):
    """Rebuild a Laurent monomial from its value at the prime assignment."""
    if val == 0:
        return None
    sign = -1 if val < 0 else 1
    num, den = abs(val.numerator), val.denominator
    exps = {}
    for name, pv in assign.items():
        p = int(pv)
        e = 0
        while num % p == 0:
            num //= p
            e += 1
        while den % p == 0:
            den //= p
            e -= 1
        if e:
            exps[name] = e
    coeff = Fraction(sign * num, den)
    if abs(coeff.numerator) >= _PRIME_POOL[0] or coeff.denominator >= _PRIME_POOL[0]:
        return None
    return Monomial(coeff, exps)


def _strip_lead(xs):
    i = 0
    while i < len(xs) and xs[i] == 0:
        i += 1
    return xs[i:]


def _uni_mod(a, b):
    a = _strip_lead(a[:])
    while len(a) >= len(b):
        f = a[0] / b[0]
        a = [a[i] - f * b[i] if i < len(b) else a[i] for i in range(len(a))]
        a = _strip_lead(a)
    return a


def _uni_gcd(a, b):
    a, b = _strip_lead(a[:]), _strip_lead(b[:])
    while b:
        a, b = b, _uni_mod(a, b)
    return a


def _uni_div(a, b):
    a, b = _strip_lead(a[:]), _strip_lead(b)
    q = []
    while len(a) >= len(b):
        f = a[0] / b[0]
        q.append(f)
        a = [a[i] - f * b[i] if i < len(b) else a[i] for i in range(len(a))]
        assert a[0] == 0
        a = a[1:]
    return q


def _root_candidates(coeffs):
    """Approximate roots of sum coeffs[v] x^v (exact Fraction coeffs).

    Repeated roots stall the iteration, so roots are taken from the exact
    squarefree part; multiplicity is recovered by repeated exact division.
    """
    deg = max(coeffs)
    desc = [coeffs.get(v, Fraction(0)) for v in range(deg, -1, -1)]
    deriv = [(deg - i) * desc[i] for i in range(deg)]
    g = _uni_gcd(desc, deriv)
    if len(g) > 1:
        desc = _uni_div(desc, g)
    poly = [mpmath.mpf(c.numerator) / c.denominator for c in desc]
    try:
        roots = mpmath.polyroots(poly, maxsteps=300, extraprec=400)
    except mpmath.libmp.NoConvergence:
        raise CollapseError("root isolation failed for a recurrence factor")
    return roots


def _binomial_candidate(root, u, assign):
    """Monomial M with (1 - M*Qn^u) vanishing at Qn = root, if recognizable."""
    x = root ** u
    if abs(mpmath.im(x)) > mpmath.mpf(10) ** (-mpmath.mp.dps // 2) * (1 + abs(x)):
        return None
    x = mpmath.re(x)
    if x == 0:
        return None
    exact = Fraction(*mpmath.libmp.to_rational(mpmath.mpf(x)._mpf_))
    val = Fraction(1) / exact.limit_denominator(10 ** 40)
    return _recon_monomial(val, assign)


def factor_qn_binomials(poly, max_u=6):
    """Factor a polynomial as cofactor * Qn^t * prod (alpha_j - beta_j Qn^u_j).

    Returns (t, factors, cofactor) with factors a list of Laurent monomials
    M_j = beta_j/alpha_j paired with u_j; cofactor is the exact Qn-free
    remainder (the alpha_j are absorbed into it).  Raises CollapseError when
    the coefficients do not split into q-shifted binomials.
    """
    uni = poly.vars
    if VAR_N not in uni:
        return 0, [], poly
    coll = poly.collect(VAR_N)
    t = min(coll)
    ni = uni.index(VAR_N)
    shifted = {m[:ni] + (m[ni] - t,) + m[ni + 1:]: c for m, c in poly.terms.items()}
    work = MultiPoly(uni, shifted)
    assign = _prime_assign(uni)
    factors = []
    cofactor = MultiPoly.const(uni, 1)
    with mpmath.workdps(160):
        while True:
            coll = work.collect(VAR_N)
            deg = max(coll)
            if deg == 0:
                cofactor = cofactor * work
                return t, factors, cofactor
            coeffs = {v: p.eval_frac(assign) for v, p in coll.items()}
            found = False
            for root in _root_candidates(coeffs):
                for u in range(1, min(deg, max_u) + 1):
                    M = _binomial_candidate(root, u, assign)
                    if M is None:
                        continue
                    alpha = Monomial(Fraction(M.coeff.denominator),
                                     {v: -e for v, e in M.exps.items() if e < 0})
                    beta = alpha * M
                    cand = (MultiPoly.from_monomial(uni, alpha)
                            - MultiPoly.from_monomial(
                                uni, beta * Monomial.var(VAR_N, u)))
                    quot = work.exact_div(cand)
                    if quot is not None:
                        factors.append((M, u))
                        cofactor = cofactor * MultiPoly.from_monomial(uni, alpha)
                        work = quot
                        found = True
                        break
                if found:
                    break
            if not found:
                raise CollapseError(
                    "recurrence coefficient does not factor into q-binomials")


def collapse_two_term(rec, max_u=6):
    """Iterate p_a f(n+a) = -p_b f(n+b) into the product  prod -p_b/p_a.

    The ratio's Qn-binomials become infinite Pochhammer factors; binomials
    pointing against the shift direction are rewritten through their mirror,
    and the leftover per-step monomial must cancel exactly, else the product
    has no closed value and CollapseError is raised.
    """
    nz = [i for i, p in enumerate(rec.ps) if not p.is_zero()]
    if len(nz) != 2:
        raise CollapseError("recurrence is not two-term (nonzero at %r)" % nz)
    a, b = nz
    d = b - a
    w = rec.w
    ratio = -(RationalFunc.from_poly(rec.ps[b])
              / RationalFunc.from_poly(rec.ps[a]))
    if a:
        ratio = ratio.substitute_monomials(
            {VAR_N: Monomial.var(VAR_N) * q_monomial(w * a)})
    tn, fn, cn = factor_qn_binomials(ratio.num, max_u)
    td, fd, cd = factor_qn_binomials(ratio.den, max_u)
    P = ProductForm.one()
    tau = Monomial.one()
    lam = w * d * (tn - td)
    for factors, sgn in ((fn, 1), (fd, -1)):
        for M, u in factors:
            step = w * d * u
            if step > 0:
                P = P.times_inf(M, step, sgn)
            else:
                P = P.times_inf(M.inverse(), -step, sgn)
                tau = tau * ((Monomial(-1) * M) ** sgn)
                lam += sgn * step
    kappa = RationalFunc.from_poly(cn) / RationalFunc.from_poly(cd)
    km = _rf_mono(kappa)
    if km is None:
        raise CollapseError("per-step ratio leaves a non-monomial factor %r"
                            % (kappa,))
    if not (tau * km).is_one() or lam != 0:
        raise CollapseError("per-step monomial %r * q^(%d n) does not cancel"
                            % (tau * km, lam))
    return P


# -- uniqueness conditions for the recurrence ---------------------------------

def uniqueness_conditions(rec, sample_assigns=()):
    """Checks that one recurrence plus one limit value pin f down uniquely.

    With f(n) = sum_i a_i(Qn) f(n+i), a_i = -p_i/p_0, needs a_i(0) = w_i
    finite with sum w_i = 1, |w_d| + |w_(d-1)+w_d| + ... + |w_2+..+w_d| < 1,
    a_i - w_i vanishing at Qn = 0, and p_0(0) != 0.  The tail inequality is
    exact for constant w_i, else sampled at the given points.
    """
    assert rec.w > 0, "uniqueness analysis expects shifts toward Qn -> 0"
    p0 = RationalFunc.from_poly(rec.ps[0])
    d = rec.order
    out = {"w": [], "sum_ok": False, "tail_ok": False, "tail_exact": True,
           "lipschitz_ok": True, "analytic_ok": False}
    try:
        a0 = p0.eval_var(VAR_N, 0)
    except ZeroDivisionError:
        return out
    out["analytic_ok"] = not a0.is_zero()
    ws = []
    for i in range(1, d + 1):
        ai = -(RationalFunc.from_poly(rec.ps[i]) / p0)
        v, lead = limit_at(ai, VAR_N, to_zero=True)
        if v < 0:
            return out  # coefficient blows up at the base point
        wi = lead if v == 0 else RationalFunc.const((), 0)
        ws.append(wi)
        dv, _ = limit_at(ai - wi, VAR_N, to_zero=True)
        if not (ai - wi).is_zero() and dv < 1:
            out["lipschitz_ok"] = False
    out["w"] = ws
    total = ws[0]
    for wi in ws[1:]:
        total = total + wi
    out["sum_ok"] = (total - 1).is_zero() if not total.is_zero() else False
    tails = []
    for j in range(d, 1, -1):
        s = ws[j - 1]
        for i in range(j, d):
            s = s + ws[i]
        tails.append(s)
    if all(s.is_const() for s in tails):
        out["tail_ok"] = sum(abs(s.const_value()) for s in tails) < 1
    else:
        out["tail_exact"] = False
        if sample_assigns:
            ok = True
            for assign in sample_assigns:
                try:
                    vals = [abs(s.eval_frac(assign)) for s in tails]
                except ZeroDivisionError:
                    ok = False
                    break
                if sum(vals) >= 1:
                    ok = False
                    break
            out["tail_ok"] = ok
    return out


# -- options and results -------------------------------------------------------

class ProveOptions:
    """Knobs for the proof drivers; defaults favour exactness over speed."""

    def __init__(self, max_order=4, samples=3, seed=1, bits=256, tol=None,
                 verify_certificates=True, skip_numeric=False):
        self.max_order = max_order
        self.samples = samples
        self.seed = seed
        self.bits = bits
        self.tol = tol if tol is not None else mpmath.mpf(10) ** -25
        self.verify_certificates = verify_certificates
        self.skip_numeric = skip_numeric

    def config(self):
        return numeric.PrecisionConfig(bits=self.bits)


class ProofResult:
    def __init__(self, identity, status, **kw):
        self.identity = identity
        self.status = status
        self.flags = sorted(kw.pop("flags", ()))
        self.reason = kw.pop("reason", None)
        self.recurrence = kw.pop("recurrence", None)
        self.certificates = kw.pop("certificates", None)
        self.boundary = kw.pop("boundary", None)
        self.uniqueness = kw.pop("uniqueness", None)
        self.limit = kw.pop("limit", None)
        self.product = kw.pop("product", None)
        self.numeric = kw.pop("numeric", None)
        assert not kw, "unknown result fields: %r" % sorted(kw)

    @property
    def proved(self):
        return self.status in ("proved", "proved-conditionally")

    def to_obj(self):
        obj = {"identity-id": self.identity, "status": self.status,
               "flags": list(self.flags)}
        if self.reason is not None:
            obj["reason"] = self.reason
        if self.recurrence is not None:
            rec = self.recurrence
            obj["recurrence"] = {
                "order": rec.order, "w": rec.w,
                "coeffs": [repr(p) for p in rec.ps],
            }
            if rec.inhomog is not None:
                obj["recurrence"]["inhomog"] = repr(rec.inhomog)
        if self.certificates is not None:
            obj["certificates"] = [c.to_obj() for c in self.certificates]
        if self.boundary is not None:
            obj["boundary"] = self.boundary
        if self.uniqueness is not None:
            u = dict(self.uniqueness)
            u["w"] = [repr(x) for x in u["w"]]
            obj["uniqueness"] = u
        if self.limit is not None:
            obj["limit"] = {k: repr(v) for k, v in self.limit.items()}
        if self.product is not None:
            obj["product"] = repr(self.product)
        if self.numeric is not None:
            obj["numeric"] = self.numeric
        return obj

    def __repr__(self):
        return "ProofResult(%s: %s%s)" % (
            self.identity, self.status,
            " [%s]" % ", ".join(self.flags) if self.flags else "")


# -- sampling -----------------------------------------------------------------

def _mono_value(mono, assign):
    v = Fraction(mono.coeff)
    for name, e in mono.exps.items():
        v *= Fraction(assign[name]) ** e
    return v


def _repair_constraints(assign, entry, pinned, margin=Fraction(4, 5)):
    """Rescale free parameters until every |constraint| < margin again (the
    terminating pinning can push a constraint past 1).  Exact arithmetic;
    returns False when no free linear parameter is available."""
    for _ in range(4):
        bad = None
        for rf in entry.constraints:
            mono = _rf_mono(rf)
            if mono is None:
                continue
            val = abs(_mono_value(mono, assign))
            if val >= margin:
                bad = (mono, val)
                break
        if bad is None:
            return True
        mono, val = bad
        name = next((v for v, e in mono.exps.items()
                     if v not in pinned and v != VAR_Q and abs(e) == 1), None)
        if name is None:
            return False
        scale = margin / (2 * val)
        if mono.exps[name] < 0:
            scale = 1 / scale
        assign[name] = Fraction(assign[name]) * scale
    return False


def entry_points(entry, count, seed, q=None):
    """Exact sample points honouring the entry's constraints; terminating
    parameters are pinned to q^-M so that terminating identities are sampled
    where they hold."""
    names = entry.free_params()
    pts = numeric.sample_points(names, count, seed,
                                constraints=entry.constraints, q=q)
    if not entry.terminating:
        return [p.assignment() for p in pts]
    out = []
    depth = 2
    for p in pts:
        assign = p.assignment()
        ok = True
        pinned = set()
        for rf in entry.terminating:
            mono = _rf_mono(rf)
            if mono is None:
                ok = False
                break
            name = next((v for v, e in mono.exps.items()
                         if v != VAR_Q and abs(e) == 1), None)
            if name is None:
                ok = False
                break
            e = mono.exps[name]
            rest = Monomial(mono.coeff,
                            {v: x for v, x in mono.exps.items() if v != name})
            target = Fraction(assign[VAR_Q]) ** -depth
            rv = Fraction(rest.coeff)
            for v, x in rest.exps.items():
                rv *= Fraction(assign[v]) ** x
            assign[name] = (target / rv) ** e
            pinned.update(v for v in mono.exps if v != VAR_Q)
            depth += 1
        if not ok or not _repair_constraints(assign, entry, pinned):
            continue
        out.append(assign)
    return out


def _numeric_check(lhs, rhs, assigns, cfg, tol):
    worst, rows = numeric.eval_identity_residual(lhs, rhs, assigns, cfg)
    report = {"points": rows, "max-rel-error": mpmath.nstr(worst, 8)}
    return worst <= tol, report


# -- derivation: telescope + boundary at increasing order ----------------------

def derive(components, w, facts, max_order, terminating=(),
           numeric_env=None, fixed_ps=None, start_order=1):
    """First certificate whose boundary resolves; returns (cert, net, flags).

    net is None for a homogeneous recurrence, else the scalar RationalFunc
    with  sum_i p_i f(n+i) = net.
    """
    last = "no telescoping certificate up to order %d" % max_order
    for order in range(start_order, max_order + 1):
        cert = telescope(components, w, order, fixed_ps=fixed_ps)
        if cert is None:
            continue
        try:
            net, flags = boundary_net(components, cert, facts, w,
                                      terminating, numeric_env)
            net_rf = _net_scalar(net)
        except BoundaryError as e:
            last = str(e)
            continue
        if net_rf is not None:
            cert.recurrence.inhomog = net_rf
        return cert, net_rf, flags
    raise TelescopeError(last)


def _tag(entry_side, shifts):
    comps = entry_side.components if isinstance(entry_side, SeriesExpr) \
        else [entry_side]
    return [t.tag_shifts(shifts) for t in comps]


def _verify_certs(components, cert):
    for t, R in zip(components, cert.Rs):
        ps = cert.ps
        assert certify_verify(t, cert.w, ps, R), \
            "certificate failed independent verification"


# -- proof drivers ------------------------------------------------------------

def _result_numeric(entry, opts, flags):
    if opts.skip_numeric or opts.samples <= 0:
        return True, None
    assigns = entry_points(entry, opts.samples, opts.seed)
    if not assigns:
        flags.add("no-sample-points")
        return True, None
    return _numeric_check(entry.lhs, entry.rhs, assigns, opts.config(),
                          opts.tol)


def _status(flags):
    conditional = {"numeric-only", "boundary-numeric", "tail-sampled"}
    return "proved-conditionally" if flags & conditional else "proved"


def prove_summation(entry, resolver=None, opts=None):
    opts = opts or ProveOptions()
    flags = set()
    comps = _tag(entry.lhs, entry.shift)
    w = entry.step
    facts = fact_monomials(entry.constraints)
    max_order = entry.max_order or opts.max_order
    env = _boundary_env(entry, opts)
    cert, net, bflags = derive(comps, w, facts, max_order,
                               terminating=_vanishing(entry),
                               numeric_env=env)
    flags |= bflags
    if net is not None:
        raise BoundaryError("summation recurrence is inhomogeneous: %r" % net)
    if opts.verify_certificates:
        _verify_certs(comps, cert)
    P = collapse_two_term(cert.recurrence)
    values, residues = limit_side(comps, to_zero=(w > 0))
    C = resolve_limit(entry.limit_lhs, values, residues, resolver,
                      _vanishing(entry))
    final = P * C
    if not product_equal(final, entry.rhs):
        diag = product_ratio_scalar(final, entry.rhs)
        raise MatchError("collapsed product differs from the stated value"
                         + ("" if diag is None else " by %r" % diag))
    ok, report = _result_numeric(entry, opts, flags)
    if not ok:
        raise MatchError("numeric cross-check failed: %s"
                         % report["max-rel-error"])
    return ProofResult(
        entry.id, _status(flags), flags=flags, recurrence=cert.recurrence,
        certificates=[cert], boundary={"net": "0"},
        limit={"value": C}, product=P, numeric=report)


def _boundary_env(entry, opts):
    if opts.skip_numeric:
        return None
    try:
        assigns = entry_points(entry, 2, opts.seed)
    except numeric.PoleError:
        return None
    env = []
    for assign in assigns[:2]:
        for n0 in (0, 1, 2):
            e = dict(assign)
            e[VAR_N] = Fraction(e[VAR_Q]) ** (entry.step * n0)
            env.append(e)
    return (env, opts.config()) if env else None


def _resolve_side_limit(hint, comps, w, resolver, vanishing=()):
    values, residues = limit_side(comps, to_zero=(w > 0))
    return resolve_limit(hint, values, residues, resolver, vanishing)


def _transform_limits(entry, lhsC, rhsC, w, resolver):
    """Check lim lhs == lim rhs under the shifts; returns a description."""
    rhint, lhint = entry.limit_rhs, entry.limit_lhs
    vans = _vanishing(entry)
    dep = None
    if rhint[0] == "closure" and resolver is not None:
        dep = resolver(rhint[1])
    if dep is not None and isinstance(dep.rhs, SeriesExpr):
        # both limits are series instances of a proved transformation
        mono = _mono_map(rhint[2])
        lv, lr = limit_side(lhsC, to_zero=(w > 0))
        rv, rr = limit_side(rhsC, to_zero=(w > 0))
        instL = [c.substitute(mono).canonical() for c in dep.lhs.components]
        instR = [c.substitute(mono).canonical() for c in dep.rhs.components]
        r1 = _match_common_ratio(lr, instL, vans)
        r2 = _match_common_ratio(rr, instR, vans)
        if not product_equal(r1, r2):
            raise LimitError("limit series scale by unequal prefactors")
        neg = [v.times_rational(RationalFunc.const((), -1)) for v in rv]
        rest = sum_contributions(lv + neg)
        if rest is None or not rest.scalar.is_zero():
            raise LimitError("scalar limit contributions do not cancel")
        return {"via": dep.id, "ratio": r1}
    CL = _resolve_side_limit(lhint, lhsC, w, resolver, vans)
    CR = _resolve_side_limit(rhint, rhsC, w, resolver, vans)
    if not product_equal(CL, CR):
        raise LimitError("side limits differ: %r vs %r" % (CL, CR))
    return {"lhs": CL, "rhs": CR}


def prove_transformation(entry, resolver=None, opts=None):
    opts = opts or ProveOptions()
    flags = set()
    w = entry.step
    facts = fact_monomials(entry.constraints)
    lhsC = _tag(entry.lhs, entry.shift)
    rhsC = _tag(entry.rhs, entry.shift)
    max_order = entry.max_order or opts.max_order
    env = _boundary_env(entry, opts)
    terminating = _vanishing(entry)
    last = None
    cert_L = cert_R = net_L = net_R = None
    for order in range(1, max_order + 1):
        try:
            cert_L, net_L, fl = derive(lhsC, w, facts, max_order,
                                       terminating=terminating,
                                       numeric_env=env, start_order=order)
        except TelescopeError as e:
            raise TelescopeError("left side: %s" % e)
        order = cert_L.order
        cert_R = telescope(rhsC, w, order, fixed_ps=cert_L.ps)
        if cert_R is None:
            last = "right side admits no matching certificate at order %d" \
                % order
            continue
        try:
            netP, fr = boundary_net(rhsC, cert_R, facts, w, terminating, env)
            net_R = _net_scalar(netP)
        except BoundaryError as e:
            last = "right side: %s" % e
            continue
        flags |= fl | fr
        break
    else:
        raise TelescopeError(last or "no shared recurrence found")
    if (net_L is None) != (net_R is None) or \
            (net_L is not None and not (net_L - net_R).is_zero()):
        raise BoundaryError("boundary terms differ: %r vs %r"
                            % (net_L, net_R))
    if opts.verify_certificates:
        _verify_certs(lhsC, cert_L)
        _verify_certs(rhsC, cert_R)
    assigns = None
    if not opts.skip_numeric:
        assigns = entry_points(entry, max(opts.samples, 3), opts.seed)
    uniq = uniqueness_conditions(cert_L.recurrence, assigns or ())
    if not (uniq["analytic_ok"] and uniq["sum_ok"] and uniq["lipschitz_ok"]):
        raise ProverError("recurrence does not satisfy the uniqueness "
                          "conditions: %r" % uniq)
    if not uniq["tail_ok"]:
        raise ProverError("coefficient tail bound fails: %r" % uniq)
    if not uniq["tail_exact"]:
        flags.add("tail-sampled")
    limits = _transform_limits(entry, lhsC, rhsC, w, resolver)
    ok, report = _result_numeric(entry, opts, flags)
    if not ok:
        raise MatchError("numeric cross-check failed: %s"
                         % report["max-rel-error"])
    flags |= set(entry.flags)
    return ProofResult(
        entry.id, _status(flags), flags=flags, recurrence=cert_L.recurrence,
        certificates=[cert_L, cert_R],
        boundary={"net": repr(net_L) if net_L is not None else "0"},
        uniqueness=uniq, limit=limits, numeric=report)


def prove_difference_zero(entry, resolver=None, opts=None):
    """Both sides satisfy one inhomogeneous first-order recurrence; their
    difference d obeys the homogeneous part, has limit 0 under the shifts,
    and the coefficient ratio contracts, so d vanishes identically."""
    opts = opts or ProveOptions()
    flags = set(entry.flags)
    w = entry.step
    facts = fact_monomials(entry.constraints)
    lhsC = _tag(entry.lhs, entry.shift)
    rhsC = _tag(entry.rhs, entry.shift)
    max_order = entry.max_order or opts.max_order
    env = _boundary_env(entry, opts)
    cert_L, net_L, fl = derive(lhsC, w, facts, max_order, numeric_env=env)
    cert_R = telescope(rhsC, w, cert_L.order, fixed_ps=cert_L.ps)
    if cert_R is None:
        raise TelescopeError("right side admits no matching certificate")
    netP, fr = boundary_net(rhsC, cert_R, facts, w, numeric_env=env)
    net_R = _net_scalar(netP)
    flags |= fl | fr
    if net_L is None or net_R is None or not (net_L - net_R).is_zero():
        raise BoundaryError("sides have unequal inhomogeneous terms: %r vs %r"
                            % (net_L, net_R))
    if opts.verify_certificates:
        _verify_certs(lhsC, cert_L)
        _verify_certs(rhsC, cert_R)
    CL = _resolve_side_limit(entry.limit_lhs, lhsC, w, resolver,
                             _vanishing(entry))
    CR = _resolve_side_limit(entry.limit_rhs, rhsC, w, resolver,
                             _vanishing(entry))
    if not product_equal(CL, CR):
        raise LimitError("side limits differ: %r vs %r" % (CL, CR))
    d = cert_L.order
    ratio = -(RationalFunc.from_poly(cert_L.ps[d])
              / RationalFunc.from_poly(cert_L.ps[0]))
    v, lead = limit_at(ratio, VAR_N, to_zero=(w > 0))
    contracts = v > 0
    if not contracts:
        if v < 0:
            raise ProverError("difference recurrence does not contract")
        m = _rf_mono(lead)
        if m is None or not known_small(m, facts, w):
            raise ProverError("contraction ratio %r is not forced below 1"
                              % lead)
    ok, report = _result_numeric(entry, opts, flags)
    if not ok:
        raise MatchError("numeric cross-check failed: %s"
                         % report["max-rel-error"])
    return ProofResult(
        entry.id, _status(flags), flags=flags, recurrence=cert_L.recurrence,
        certificates=[cert_L, cert_R], boundary={"net": repr(net_L)},
        limit={"lhs": CL, "rhs": CR}, numeric=report)


# -- scripted proofs -----------------------------------------------------------

def _unilateralize(components):
    """Drop k < 0 from a bilateral sum killed by a 1/(q^j; q^s)_k factor."""
    out = []
    for t in components:
        if not t.bilateral:
            out.append(t)
            continue
        kills = False
        for arg, s, m in t.pochs:
            j = arg.q_power()
            if m < 0 and j is not None and j >= 1 and j % s == 0:
                kills = True
        if not kills:
            raise ProverError("series stays bilateral after specialization")
        u = t.copy()
        u.bilateral = False
        out.append(u.canonical())
    return out


class _ScriptState:
    def __init__(self, entry):
        self.entry = entry
        self.comps = None      # tagged working components
        self.shifts = list(entry.shift)
        self.cert = None
        self.P = None          # collapse product
        self.C = None          # limit constant
        self.final = None      # full ProductForm for the lhs
        self.flags = set(entry.flags)
        self.status = None
        self.numeric = None
        self.limit = {}


def _ensure_derived(st, opts, resolver):
    if st.cert is not None:
        return
    entry = st.entry
    if st.comps is None:
        st.comps = _tag(entry.lhs, st.shifts)
    facts = fact_monomials(entry.constraints)
    env = _boundary_env(entry, opts)
    cert, net, bflags = derive(st.comps, entry.step, facts,
                               entry.max_order or opts.max_order,
                               terminating=_vanishing(entry),
                               numeric_env=env)
    if net is not None:
        raise BoundaryError("unexpected inhomogeneous recurrence: %r" % net)
    if opts.verify_certificates:
        _verify_certs(st.comps, cert)
    st.flags |= bflags
    st.cert = cert
    st.P = collapse_two_term(cert.recurrence)


def _step_fail_direct(st, args, opts, resolver):
    entry = st.entry
    comps = _tag(entry.lhs, st.shifts)
    facts = fact_monomials(entry.constraints)
    try:
        derive(comps, entry.step, facts, entry.max_order or opts.max_order)
    except ProverError:
        st.flags.add("direct-failed")
        return
    raise ProverError("direct derivation unexpectedly succeeded")


def _step_symmetrize(st, args, opts, resolver):
    comps = _tag(st.entry.lhs, st.shifts)
    out = []
    for t in comps:
        s = symmetrize(t)
        if s is None:
            raise ProverError("summand is not symmetric under k -> -k")
        out.append(s)
    st.comps = out
    st.flags.add("symmetrized")


def _spec_value(st, comps, shifts, hint, opts, resolver):
    """Value of a specialized series: re-derive under the remaining shifts,
    or close the (unilateralized) sum directly when none remain."""
    entry = st.entry
    facts = fact_monomials(entry.constraints)
    if shifts:
        tagged = [t.tag_shifts(shifts) for t in comps]
        env = _boundary_env(entry, opts)
        cert, net, bflags = derive(tagged, entry.step, facts,
                                   entry.max_order or opts.max_order,
                                   numeric_env=env)
        if net is not None:
            raise BoundaryError("specialized recurrence is inhomogeneous")
        if opts.verify_certificates:
            _verify_certs(tagged, cert)
        st.flags |= bflags
        P = collapse_two_term(cert.recurrence)
        values, residues = limit_side(tagged, to_zero=(entry.step > 0))
        C = resolve_limit(hint, values, residues, resolver)
        return P * C
    plain = _unilateralize(comps)
    values, residues = [], [t.canonical() for t in plain]
    return resolve_limit(hint, values, residues, resolver)


def _step_specialize(st, args, opts, resolver):
    """Pin one shifted parameter; the collapse constant is the specialized
    series value divided by the specialized product."""
    entry = st.entry
    _ensure_derived(st, opts, resolver)
    names = [k for k in args if k not in ("via", "map", "limit")]
    if len(names) != 1:
        raise ProverError("specialize needs exactly one parameter binding")
    name = names[0]
    mono = _rf_mono(args[name])
    if mono is None:
        raise ProverError("specialized value must be a monomial")
    if name not in st.shifts:
        raise ProverError("%s is not a shifted parameter" % name)
    if "via" in args:
        hint = ("closure", args["via"], args.get("map", {}))
    elif args.get("limit") == "theta":
        hint = ("theta",)
    else:
        hint = ("auto",)
    remaining = [s for s in st.shifts if s != name]
    spec = [t.substitute({name: mono}).canonical()
            for t in st.entry.lhs.components]
    num = _spec_value(st, spec, remaining, hint, opts, resolver)
    den = product_limit(st.P.substitute({name: mono}), (),
                        to_zero=(entry.step > 0))
    r = product_ratio_scalar(num, den)
    if r is None:
        C = num / den
    else:
        C = ProductForm(r)
    st.C = C
    st.limit["specialized"] = num


def _step_semi_finite(st, args, opts, resolver):
    """Realize the sum as the limit of shifted truncations: insert an
    auxiliary 1/(q*aux; q)_k, collapse in aux, and close the aux = 1 case."""
    entry = st.entry
    m = _rf_mono(args["aux"])
    assert m is not None and m.coeff == 1 and len(m.exps) == 1, \
        "semi_finite needs a bare auxiliary parameter name"
    aux = next(iter(m.exps))
    hint = ("closure", args["via"], args.get("map", {}))
    facts = fact_monomials(entry.constraints)
    work = [t.times_poch(Monomial(1, {VAR_Q: 1, aux: 1}), 1, -1)
            for t in entry.lhs.components]
    tagged = [t.tag_shifts([aux]) for t in work]
    env = _boundary_env(entry, opts)
    cert, net, bflags = derive(tagged, 1, facts, entry.max_order or
                               opts.max_order, numeric_env=env)
    if net is not None:
        raise BoundaryError("truncation recurrence is inhomogeneous")
    if opts.verify_certificates:
        _verify_certs(tagged, cert)
    st.flags |= bflags
    st.cert = cert
    P = collapse_two_term(cert.recurrence)
    # consistency: the truncations converge back to the original sum
    values, residues = limit_side(tagged, to_zero=True)
    if values or len(residues) != len(entry.lhs.components):
        raise LimitError("truncations do not converge to the original sum")
    r = _match_common_ratio(residues, [c.canonical()
                                       for c in entry.lhs.components])
    if not product_equal(r, ProductForm.one()):
        raise LimitError("truncations converge to a rescaled sum")
    # close the base case aux = 1 and divide out the product
    base = [t.substitute({aux: Monomial.one()}).canonical() for t in work]
    plain = _unilateralize(base)
    f0 = resolve_limit(hint, [], [t.canonical() for t in plain], resolver)
    P1 = P.substitute({aux: Monomial.one()})
    rr = product_ratio_scalar(f0, P1)
    st.final = ProductForm(rr) if rr is not None else f0 / P1
    st.P = P
    st.limit["base"] = f0


def _step_numeric_only(st, args, opts, resolver):
    """No structural proof: certify the identity numerically and say so."""
    entry = st.entry
    assigns = entry_points(entry, max(opts.samples, 4), opts.seed)
    ok, report = _numeric_check(entry.lhs, entry.rhs, assigns, opts.config(),
                                opts.tol)
    if not ok:
        raise MatchError("numeric check failed: %s" % report["max-rel-error"])
    st.numeric = report
    st.flags.add("numeric-only")
    st.status = "proved-conditionally"
    st.final = entry.rhs  # accepted on numeric evidence only


_SCRIPT_STEPS = {
    "fail_direct": _step_fail_direct,
    "symmetrize": _step_symmetrize,
    "specialize": _step_specialize,
    "semi_finite": _step_semi_finite,
    "numeric_only": _step_numeric_only,
}


def run_script(entry, resolver=None, opts=None):
    opts = opts or ProveOptions()
    st = _ScriptState(entry)
    for name, args in entry.script:
        step = _SCRIPT_STEPS.get(name)
        if step is None:
            raise ProverError("unknown proof step %r" % name)
        step(st, args, opts, resolver)
    if st.status is None:
        if st.final is None:
            _ensure_derived(st, opts, resolver)
            if st.C is None:
                values, residues = limit_side(st.comps,
                                              to_zero=(entry.step > 0))
                st.C = resolve_limit(entry.limit_lhs, values, residues,
                                     resolver, _vanishing(entry))
            st.final = st.P * st.C
        if not product_equal(st.final, entry.rhs):
            diag = product_ratio_scalar(st.final, entry.rhs)
            raise MatchError("scripted value differs from the stated one"
                             + ("" if diag is None else " by %r" % diag))
        ok, st.numeric = _result_numeric(entry, opts, st.flags)
        if not ok:
            raise MatchError("numeric cross-check failed: %s"
                             % st.numeric["max-rel-error"])
        st.status = _status(st.flags)
    return ProofResult(
        entry.id, st.status, flags=st.flags, recurrence=st.cert.recurrence
        if st.cert else None, certificates=[st.cert] if st.cert else None,
        limit=st.limit or None, product=st.P, numeric=st.numeric)


_DRIVERS = {
    "summation": prove_summation,
    "two-term-summation": prove_summation,
    "bilateral": prove_summation,
    "transformation": prove_transformation,
    "three-term-transformation": prove_transformation,
    "difference-zero": prove_difference_zero,
    "script": run_script,
}


def prove(entry, resolver=None, opts=None):
    """Prove one identity; failures come back as a failed ProofResult."""
    driver = run_script if entry.script else _DRIVERS[entry.kind]
    try:
        return driver(entry, resolver, opts)
    except ProverError as e:
        return ProofResult(entry.id, "failed", reason=str(e))
