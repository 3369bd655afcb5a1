"""Exact multivariate polynomial and rational function arithmetic.

Every object carries an explicit variable universe kept in canonical order:
ordinary parameters alphabetically, then the shift trackers Qn and Qk, then
q last.  q is reserved and always sorts last so serialized forms are stable
across the package.
"""

from __future__ import annotations

import heapq
import random
from fractions import Fraction
from math import gcd as int_gcd, isqrt, lcm as int_lcm

from gmpy2 import gcd as _big_gcd, isqrt as _big_isqrt, mpz as _big

VAR_N = "Qn"
VAR_K = "Qk"
VAR_Q = "q"

_RANK = {VAR_N: 1, VAR_K: 2, VAR_Q: 3}

_ZERO = Fraction(0)
_ONE = Fraction(1)


def var_sort_key(name):
    return (_RANK.get(name, 0), name)


def canonical_vars(names):
    """Deduplicate and sort variable names into the canonical universe order."""
    return tuple(sorted(set(names), key=var_sort_key))


class Monomial:
    """A Laurent monomial coeff * prod(v^e) with nonzero rational coefficient."""

    __slots__ = ("coeff", "exps")

    def __init__(self, coeff, exps=()):
        coeff = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
        if coeff == 0:
            raise ValueError("monomial coefficient must be nonzero")
        self.coeff = coeff
        self.exps = {v: e for v, e in dict(exps).items() if e}

    @classmethod
    def one(cls):
        return cls(_ONE)

    @classmethod
    def var(cls, name, exp=1):
        return cls(_ONE, {name: exp})

    def key(self):
        return (self.coeff, tuple(sorted(self.exps.items())))

    def __eq__(self, other):
        return isinstance(other, Monomial) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __mul__(self, other):
        exps = dict(self.exps)
        for v, e in other.exps.items():
            exps[v] = exps.get(v, 0) + e
        return Monomial(self.coeff * other.coeff, exps)

    def inverse(self):
        return Monomial(1 / self.coeff, {v: -e for v, e in self.exps.items()})

    def div(self, other):
        return self * other.inverse()

    def __pow__(self, n):
        if n == 0:
            return Monomial.one()
        return Monomial(self.coeff ** n, {v: e * n for v, e in self.exps.items()})

    def is_one(self):
        return self.coeff == 1 and not self.exps

    def vars(self):
        return set(self.exps)

    def substitute(self, mapping):
        """Replace variables by monomial images; unmapped variables stay."""
        out = Monomial(self.coeff)
        for v, e in self.exps.items():
            img = mapping.get(v)
            out = out * (img ** e if img is not None else Monomial(_ONE, {v: e}))
        return out

    def q_power(self):
        """If self == q^j exactly, return j, else None."""
        if self.coeff != 1:
            return None
        rest = [v for v in self.exps if v != VAR_Q]
        if rest:
            return None
        return self.exps.get(VAR_Q, 0)

    def __repr__(self):
        parts = [] if self.coeff == 1 and self.exps else [str(self.coeff)]
        for v, e in sorted(self.exps.items(), key=lambda t: var_sort_key(t[0])):
            parts.append(v if e == 1 else "%s^%d" % (v, e))
        return "*".join(parts) if parts else "1"


class MultiPoly:
    """Polynomial over Q with an explicit ordered variable universe."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars, terms):
        self.vars = tuple(vars)
        self.terms = {m: c for m, c in terms.items() if c}

    @classmethod
    def zero(cls, vars):
        return cls(vars, {})

    @classmethod
    def const(cls, vars, c):
        c = c if isinstance(c, Fraction) else Fraction(c)
        return cls(vars, {(0,) * len(vars): c} if c else {})

    @classmethod
    def var(cls, vars, name):
        i = tuple(vars).index(name)
        m = tuple(1 if j == i else 0 for j in range(len(vars)))
        return cls(vars, {m: _ONE})

    @classmethod
    def from_monomial(cls, vars, mono):
        vars = tuple(vars)
        m = [0] * len(vars)
        for v, e in mono.exps.items():
            if e < 0:
                raise ValueError("negative exponent in polynomial monomial")
            m[vars.index(v)] = e
        return cls(vars, {tuple(m): mono.coeff})

    def lift(self, newvars):
        newvars = tuple(newvars)
        if newvars == self.vars:
            return self
        pos = [newvars.index(v) for v in self.vars]
        n = len(newvars)
        out = {}
        for m, c in self.terms.items():
            mm = [0] * n
            for p, e in zip(pos, m):
                mm[p] = e
            out[tuple(mm)] = c
        return MultiPoly(newvars, out)

    def used_vars(self):
        used = [False] * len(self.vars)
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    used[i] = True
        return tuple(v for v, u in zip(self.vars, used) if u)

    def restrict(self):
        """Shrink the universe to the variables that actually appear."""
        keep = self.used_vars()
        if keep == self.vars:
            return self
        idx = [self.vars.index(v) for v in keep]
        return MultiPoly(keep, {tuple(m[i] for i in idx): c for m, c in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def is_const(self):
        return all(all(e == 0 for e in m) for m in self.terms)

    def const_value(self):
        z = (0,) * len(self.vars)
        return self.terms.get(z, _ZERO)

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        a, b = _align(self, other)
        return a.terms == b.terms

    def __hash__(self):
        p = self.restrict()
        return hash((p.vars, frozenset(p.terms.items())))

    def __neg__(self):
        return MultiPoly(self.vars, {m: -c for m, c in self.terms.items()})

    def __add__(self, other):
        a, b = _align(self, other)
        out = dict(a.terms)
        for m, c in b.terms.items():
            v = out.get(m, _ZERO) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return MultiPoly(a.vars, out)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        a, b = _align(self, other)
        out = {}
        for m1, c1 in a.terms.items():
            for m2, c2 in b.terms.items():
                m = tuple(x + y for x, y in zip(m1, m2))
                v = out.get(m, _ZERO) + c1 * c2
                if v:
                    out[m] = v
                else:
                    out.pop(m, None)
        return MultiPoly(a.vars, out)

    __rmul__ = __mul__

    def scale(self, c):
        c = c if isinstance(c, Fraction) else Fraction(c)
        if not c:
            return MultiPoly.zero(self.vars)
        return MultiPoly(self.vars, {m: x * c for m, x in self.terms.items()})

    def __pow__(self, n):
        assert n >= 0
        out = MultiPoly.const(self.vars, 1)
        for _ in range(n):
            out = out * self
        return out

    def degree(self, name):
        if name not in self.vars or self.is_zero():
            return 0
        i = self.vars.index(name)
        return max(m[i] for m in self.terms)

    def collect(self, name):
        """Map degree-in-name -> coefficient polynomial (name stripped to exponent 0)."""
        i = self.vars.index(name)
        out = {}
        for m, c in self.terms.items():
            d = m[i]
            mm = m[:i] + (0,) + m[i + 1:]
            bucket = out.setdefault(d, {})
            bucket[mm] = bucket.get(mm, _ZERO) + c
        return {d: MultiPoly(self.vars, t) for d, t in out.items() if any(t.values())}

    def coeff_of(self, name, d):
        return self.collect(name).get(d, MultiPoly.zero(self.vars))

    def lead_key(self):
        return max(self.terms)

    def lead_coeff(self):
        return self.terms[max(self.terms)]

    def eval_frac(self, assign):
        total = _ZERO
        for m, c in self.terms.items():
            v = c
            for name, e in zip(self.vars, m):
                if e:
                    v *= assign[name] ** e
            total += v
        return total

    def eval_var(self, name, value):
        """Substitute one variable by an exact rational value; universe unchanged."""
        value = value if isinstance(value, Fraction) else Fraction(value)
        i = self.vars.index(name)
        out = {}
        for m, c in self.terms.items():
            mm = m[:i] + (0,) + m[i + 1:]
            v = out.get(mm, _ZERO) + c * value ** m[i]
            if v:
                out[mm] = v
            else:
                out.pop(mm, None)
        return MultiPoly(self.vars, out)

    def substitute_monomials(self, mapping):
        """Replace variables by Laurent monomial images; returns a RationalFunc."""
        allvars = set(self.vars)
        for img in mapping.values():
            allvars |= img.vars()
        uni = canonical_vars(allvars)
        num = {}
        shift = {}
        for m, c in self.terms.items():
            mono = Monomial(c)
            for name, e in zip(self.vars, m):
                if not e:
                    continue
                img = mapping.get(name)
                mono = mono * (img ** e if img is not None else Monomial(_ONE, {name: e}))
            key = tuple(mono.exps.get(v, 0) for v in uni)
            num[key] = num.get(key, _ZERO) + mono.coeff
        num = {m: c for m, c in num.items() if c}
        if not num:
            return RationalFunc(MultiPoly.zero(uni), MultiPoly.const(uni, 1))
        mins = [min(m[i] for m in num) for i in range(len(uni))]
        clear = tuple(-min(0, mn) for mn in mins)
        num = {tuple(e + s for e, s in zip(m, clear)): c for m, c in num.items()}
        den = {clear: _ONE}
        return RationalFunc(MultiPoly(uni, num), MultiPoly(uni, den))

    def content_primitive(self):
        """Return (content, primitive) with self == content * primitive.

        The primitive part has coprime integer coefficients and a positive
        leading coefficient in the lexicographic monomial order; the zero
        polynomial returns (0, 0).
        """
        if not self.terms:
            return _ZERO, self
        num = 0
        den = 1
        for c in self.terms.values():
            num = int_gcd(num, c.numerator)
            den = int_lcm(den, c.denominator)
        content = Fraction(num, den)
        if self.terms[max(self.terms)] < 0:
            content = -content
        prim = MultiPoly(self.vars, {m: c / content for m, c in self.terms.items()})
        return content, prim

    def exact_div(self, g):
        """Exact polynomial division; returns None when g does not divide self."""
        f, g = _align(self, g)
        if g.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if f.is_zero():
            return f
        gl = max(g.terms)
        glc = g.terms[gl]
        gitems = list(g.terms.items())
        q = {}
        rem = dict(f.terms)
        # as in _int_exact_div: a lazy max-heap replaces rescanning max(rem)
        heap = [tuple(-e for e in m) for m in rem]
        heapq.heapify(heap)
        while heap:
            fl = tuple(-e for e in heapq.heappop(heap))
            if fl not in rem:
                continue
            m = tuple(a - b for a, b in zip(fl, gl))
            if any(e < 0 for e in m):
                return None
            c = rem[fl] / glc
            q[m] = q.get(m, _ZERO) + c
            for gm, gc in gitems:
                key = tuple(a + b for a, b in zip(m, gm))
                old = rem.get(key)
                v = (_ZERO if old is None else old) - c * gc
                if v:
                    rem[key] = v
                    if old is None:
                        heapq.heappush(heap, tuple(-e for e in key))
                else:
                    rem.pop(key, None)
        return MultiPoly(f.vars, q)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, reverse=True):
            c = self.terms[m]
            names = [v if e == 1 else "%s^%d" % (v, e)
                     for v, e in zip(self.vars, m) if e]
            if not names:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(names))
            elif c == -1:
                parts.append("-" + "*".join(names))
            else:
                parts.append(str(c) + "*" + "*".join(names))
        s = " + ".join(parts).replace("+ -", "- ")
        return s


def _align(a, b):
    if a.vars == b.vars:
        return a, b
    uni = canonical_vars(a.vars + b.vars)
    return a.lift(uni), b.lift(uni)


# ---------------------------------------------------------------------------
# gcd: heuristic integer-evaluation gcd with a subresultant PRS fallback.

class _HeuFail(Exception):
    pass


def _int_maxabs(terms):
    return max(abs(c) for c in terms.values())


def _int_eval_last(terms, xi):
    out = {}
    cache = {0: 1, 1: xi}
    for m, c in terms.items():
        e = m[-1]
        p = cache.get(e)
        if p is None:
            p = xi ** e
            cache[e] = p
        key = m[:-1]
        v = out.get(key, 0) + c * p
        if v:
            out[key] = v
        else:
            out.pop(key, None)
    return out


def _int_primitive(terms):
    g = _big(0)
    for c in terms.values():
        g = _big_gcd(g, c)
        if g == 1:
            break
    if g > 1:
        terms = {m: c // g for m, c in terms.items()}
    if terms[max(terms)] < 0:
        terms = {m: -c for m, c in terms.items()}
    return terms


def _int_exact_div(f, g):
    if not f:
        return {}
    gl = max(g)
    glc = g[gl]
    gitems = list(g.items())
    q = {}
    rem = dict(f)
    # quotient steps only introduce monomials below the current leading one,
    # so a lazy max-heap tracks max(rem) without rescanning the dict
    heap = [tuple(-e for e in m) for m in rem]
    heapq.heapify(heap)
    while heap:
        fl = tuple(-e for e in heapq.heappop(heap))
        if fl not in rem:
            continue
        m = tuple(a - b for a, b in zip(fl, gl))
        if any(e < 0 for e in m):
            return None
        c, r = divmod(rem[fl], glc)
        if r:
            return None
        q[m] = q.get(m, 0) + c
        for gm, gc in gitems:
            key = tuple(a + b for a, b in zip(m, gm))
            old = rem.get(key)
            v = (old or 0) - c * gc
            if v:
                rem[key] = v
                if old is None:
                    heapq.heappush(heap, tuple(-e for e in key))
            else:
                rem.pop(key, None)
    return q if not rem else None


def _int_content(terms):
    g = _big(0)
    for c in terms.values():
        g = _big_gcd(g, c)
        if g == 1:
            break
    return g


def _int_gcdheu(F, G, nvars, depth=0):
    # common integer content is pulled out at entry and multiplied back at
    # exit: for evaluated images it encodes structure of outer variables and
    # must survive intact through the reconstruction at the level above.
    if depth > 12:
        raise _HeuFail
    ground = _big_gcd(_int_content(F), _int_content(G))
    if ground > 1:
        F = {m: c // ground for m, c in F.items()}
        G = {m: c // ground for m, c in G.items()}
    if nvars == 0:
        return {(): ground * _big_gcd(F[()], G[()])}
    fn = _int_maxabs(F)
    gn = _int_maxabs(G)
    B = 2 * min(fn, gn) + 29
    flc = abs(F[max(F)])
    glc = abs(G[max(G)])
    xi = max(min(B, 99 * _big_isqrt(B)), 2 * min(fn // flc, gn // glc) + 4)
    bound = min(max(m[-1] for m in F), max(m[-1] for m in G))
    for _ in range(6):
        if xi.bit_length() * (bound + 1) > 1000000:
            raise _HeuFail
        Fe = _int_eval_last(F, xi)
        Ge = _int_eval_last(G, xi)
        if Fe and Ge:
            try:
                gamma = _int_gcdheu(Fe, Ge, nvars - 1, depth + 1)
            except _HeuFail:
                gamma = None
            if gamma is not None:
                g = _heu_reconstruct(gamma, xi, bound)
                if g:
                    g = _int_primitive(g)
                    if _int_exact_div(F, g) is not None and \
                       _int_exact_div(G, g) is not None:
                        if ground > 1:
                            g = {m: c * ground for m, c in g.items()}
                        return g
        xi = 73794 * xi * _big_isqrt(_big_isqrt(xi)) // 27011
    raise _HeuFail


def _heu_reconstruct(gamma, xi, bound):
    g = {}
    i = 0
    half = xi // 2
    while gamma:
        if i > bound:
            return None
        digit = {}
        nxt = {}
        for m, c in gamma.items():
            r = c % xi
            if r > half:
                r -= xi
            if r:
                digit[m] = r
            v = (c - r) // xi
            if v:
                nxt[m] = v
        for m, c in digit.items():
            g[m + (i,)] = c
        gamma = nxt
        i += 1
    return g


# With many variables the nested-evaluation heuristic blows up: the images it
# needs grow like xi^(d1*...*dn).  Most gcds met during elimination involve
# only a couple of variables, so a cheap modular probe first finds the set of
# variables the gcd can contain at all, and the gcd is then computed with the
# remaining variables evaluated away.  Every candidate is verified by exact
# division, so the randomness never affects correctness.

_PROBE_P = (1 << 61) - 1
_probe_rand = random.Random(0x9E3779B9)


def _uni_image(terms, i, pts):
    """Univariate image in variable i, the others evaluated at pts, mod p."""
    p = _PROBE_P
    pows = [{} for _ in pts]
    out = {}
    for m, c in terms.items():
        w = int(c) % p
        for j, e in enumerate(m):
            if j == i or not e:
                continue
            v = pows[j].get(e)
            if v is None:
                v = pows[j][e] = pow(pts[j], e, p)
            w = w * v % p
        k = m[i]
        out[k] = (out.get(k, 0) + w) % p
    return {k: v for k, v in out.items() if v}


def _uni_gcd_degree(U, V):
    """Degree of gcd of two nonzero univariate polynomials over the probe field."""
    p = _PROBE_P

    def dense(d):
        out = [0] * (max(d) + 1)
        for k, v in d.items():
            out[k] = v
        return out

    a, b = dense(U), dense(V)
    while b:
        inv = pow(b[-1], p - 2, p)
        while len(a) >= len(b):
            f = a[-1] * inv % p
            off = len(a) - len(b)
            for i in range(len(b)):
                a[off + i] = (a[off + i] - f * b[i]) % p
            while a and not a[-1]:
                a.pop()
            if not a:
                break
        a, b = b, a
    return len(a) - 1


def _gcd_var_profile(F, G, nv):
    """Per-variable degree bounds on gcd(F, G) from univariate images.

    A zero entry certifies (up to the probe's vanishing-leading-coefficient
    chance) that the variable does not occur in the gcd at all.
    """
    prof = []
    for i in range(nv):
        dF = max(m[i] for m in F)
        dG = max(m[i] for m in G)
        if dF == 0 or dG == 0:
            prof.append(0)
            continue
        best = None
        good = 0
        for _ in range(5):
            pts = [_probe_rand.randrange(2, _PROBE_P - 1) for _ in range(nv)]
            U = _uni_image(F, i, pts)
            V = _uni_image(G, i, pts)
            if not U or not V or max(U) != dF or max(V) != dG:
                continue  # the image lost its leading term; fresh points
            d = _uni_gcd_degree(U, V)
            best = d if best is None else min(best, d)
            good += 1
            if best == 0 or good == 2:
                break
        prof.append(dF if best is None else best)
    return prof


def _gcd_shrunken(F, G, keep, nv):
    """gcd(F, G) when only the `keep` variables can occur in it.

    The other variables are evaluated at random integers; the gcd of the
    shrunken polynomials equals the true gcd times a spurious factor that a
    final exact-division check rejects.  None means bad luck or heuristic
    failure; the caller falls back.
    """
    kidx = sorted(keep)
    for _ in range(4):
        theta = {j: _probe_rand.randrange(3, 64)
                 for j in range(nv) if j not in keep}

        def shrink(terms):
            out = {}
            for m, c in terms.items():
                w = c
                for j, r in theta.items():
                    if m[j]:
                        w = w * _big(r) ** m[j]
                key = tuple(m[j] for j in kidx)
                v = out.get(key, 0) + w
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
            return out

        F1, G1 = shrink(F), shrink(G)
        if not F1 or not G1:
            continue
        try:
            H1 = _int_primitive(_int_gcdheu(F1, G1, len(kidx)))
        except _HeuFail:
            continue
        lift = {}
        for m, c in H1.items():
            full = [0] * nv
            for pos, j in enumerate(kidx):
                full[j] = m[pos]
            lift[tuple(full)] = c
        if _int_exact_div(F, lift) is not None and \
           _int_exact_div(G, lift) is not None:
            return lift
    return None


def _strip_mono(terms, nv):
    """Split off the monomial content; returns (stripped terms, min exps)."""
    mins = [min(m[i] for m in terms) for i in range(nv)]
    if not any(mins):
        return terms, mins
    out = {tuple(e - mn for e, mn in zip(m, mins)): c for m, c in terms.items()}
    return out, mins


def _prem(A, B, cvars):
    """Pseudo-remainder of univariate (dict deg->MultiPoly) polys in the main var."""
    dA = max(A)
    dB = max(B)
    lB = B[dB]
    R = dict(A)
    steps = dA - dB + 1
    done = 0
    while R:
        dR = max(R)
        if dR < dB:
            break
        lR = R[dR]
        newR = {}
        for d, c in R.items():
            if d == dR:
                continue
            newR[d] = c * lB
        for d, c in B.items():
            if d == dB:
                continue
            key = d + dR - dB
            v = newR.get(key, MultiPoly.zero(cvars)) - lR * c
            if not v.is_zero():
                newR[key] = v
            else:
                newR.pop(key, None)
        R = {d: c for d, c in newR.items() if not c.is_zero()}
        done += 1
    for _ in range(steps - done):
        R = {d: c * lB for d, c in R.items()}
    return R


def _uni_content(U, cvars):
    c = MultiPoly.zero(cvars)
    for coeff in U.values():
        c = poly_gcd(c, coeff)
        if c.is_const() and not c.is_zero():
            break
    return c


def _uni_primitive(U, cvars):
    c = _uni_content(U, cvars)
    if c.is_const():
        cc, _ = c.content_primitive()
        return {d: p.scale(1 / cc) for d, p in U.items()} if cc != 1 else U
    return {d: p.exact_div(c) for d, p in U.items()}


def _prs_gcd(f, g):
    """Subresultant PRS gcd for nonzero, nonconstant Fraction polys (shared universe)."""
    shared = [v for v in f.vars if v in f.used_vars() and v in g.used_vars()]
    if not shared:
        return MultiPoly.const(f.vars, 1)
    x = shared[0]
    cvars = f.vars
    A = f.collect(x)
    B = g.collect(x)
    if max(A) < max(B):
        A, B = B, A
    contA = _uni_content(A, cvars)
    contB = _uni_content(B, cvars)
    cont = poly_gcd(contA, contB)
    A = {d: p.exact_div(contA) for d, p in A.items()}
    B = {d: p.exact_div(contB) for d, p in B.items()}
    gg = MultiPoly.const(cvars, 1)
    hh = MultiPoly.const(cvars, 1)
    while True:
        delta = max(A) - max(B)
        R = _prem(A, B, cvars)
        if not R:
            break
        if max(R) == 0:
            B = {0: MultiPoly.const(cvars, 1)}
            break
        divisor = gg * hh ** delta
        A = B
        B = {d: c.exact_div(divisor) for d, c in R.items()}
        gg = A[max(A)]
        if delta == 0:
            pass
        elif delta == 1:
            hh = gg
        else:
            hh = (gg ** delta).exact_div(hh ** (delta - 1))
    prim = _uni_primitive(B, cvars)
    result = MultiPoly.zero(cvars)
    xpoly = MultiPoly.var(cvars, x)
    for d, c in prim.items():
        result = result + c * xpoly ** d
    _, result = result.content_primitive()
    return cont * result


def poly_gcd(f, g):
    """Primitive, sign-normalized gcd of two polynomials."""
    f0, g0 = _align(f, g)
    if f0.is_zero() and g0.is_zero():
        return f0
    if f0.is_zero():
        _, p = g0.content_primitive()
        return p
    if g0.is_zero():
        _, p = f0.content_primitive()
        return p
    if f0.is_const() or g0.is_const():
        return MultiPoly.const(f0.vars, 1)
    uni = f0.vars
    small = canonical_vars(f0.used_vars() + g0.used_vars())
    fr = f0.restrict().lift(small)
    gr = g0.restrict().lift(small)
    _, F = fr.content_primitive()
    _, G = gr.content_primitive()
    if F.terms == G.terms:
        return F.lift(uni)
    nv = len(small)
    Fi = {m: _big(c.numerator) for m, c in F.terms.items()}
    Gi = {m: _big(c.numerator) for m, c in G.terms.items()}
    Fi, fmin = _strip_mono(Fi, nv)
    Gi, gmin = _strip_mono(Gi, nv)
    shared = tuple(min(x, y) for x, y in zip(fmin, gmin))
    Hi = None
    if nv >= 6:
        prof = _gcd_var_profile(Fi, Gi, nv)
        keep = frozenset(i for i, d in enumerate(prof) if d)
        if not keep:
            Hi = {(0,) * nv: _big(1)}
        elif len(keep) < nv:
            Hi = _gcd_shrunken(Fi, Gi, keep, nv)
    if Hi is None:
        try:
            Hi = _int_gcdheu(Fi, Gi, nv)
        except _HeuFail:
            h = _prs_gcd(F, G)
            _, h = h.content_primitive()
            return h.lift(uni)
    if any(shared):
        Hi = {tuple(e + s for e, s in zip(m, shared)): c for m, c in Hi.items()}
    h = MultiPoly(small, {m: Fraction(int(c)) for m, c in Hi.items()})
    return h.lift(uni)


def poly_lcm(f, g):
    if f.is_zero() or g.is_zero():
        return MultiPoly.zero(f.vars)
    h = poly_gcd(f, g)
    return (f * g).exact_div(h)


class RationalFunc:
    """Reduced rational function; denominator monic in the lex leading term."""

    __slots__ = ("num", "den")

    def __init__(self, num, den, reduce=True):
        num, den = _align(num, den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if reduce:
            num, den = _reduce_pair(num, den)
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, p):
        return cls(p, MultiPoly.const(p.vars, 1), reduce=False)

    @classmethod
    def const(cls, vars, c):
        vars = tuple(vars)
        return cls(MultiPoly.const(vars, c), MultiPoly.const(vars, 1), reduce=False)

    @classmethod
    def var(cls, vars, name):
        return cls(MultiPoly.var(vars, name), MultiPoly.const(vars, 1), reduce=False)

    @classmethod
    def from_monomial(cls, mono, vars=()):
        uni = canonical_vars(tuple(vars) + tuple(mono.exps))
        nume = {v: e for v, e in mono.exps.items() if e > 0}
        dene = {v: -e for v, e in mono.exps.items() if e < 0}
        num = MultiPoly.from_monomial(uni, Monomial(mono.coeff, nume))
        den = MultiPoly.from_monomial(uni, Monomial(_ONE, dene))
        return cls(num, den, reduce=False)

    def is_zero(self):
        return self.num.is_zero()

    def is_one(self):
        return self.num == self.den

    def is_const(self):
        return self.num.is_const() and self.den.is_const()

    def const_value(self):
        return self.num.const_value() / self.den.const_value()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RationalFunc.const(self.num.vars, other)
        if not isinstance(other, RationalFunc):
            return NotImplemented
        return (self.num * other.den) == (other.num * self.den)

    def __hash__(self):
        n = self.num.restrict()
        d = self.den.restrict()
        return hash((frozenset(n.terms.items()), frozenset(d.terms.items())))

    def __neg__(self):
        return RationalFunc(-self.num, self.den, reduce=False)

    def __add__(self, other):
        other = _coerce(other, self)
        g = poly_gcd(self.den, other.den)
        da = self.den.exact_div(g)
        db = other.den.exact_div(g)
        num = self.num * db + other.num * da
        return RationalFunc(num, da * other.den)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other, self))

    def __rsub__(self, other):
        return _coerce(other, self) - self

    def __mul__(self, other):
        other = _coerce(other, self)
        g1 = poly_gcd(self.num, other.den)
        g2 = poly_gcd(other.num, self.den)
        num = self.num.exact_div(g1) * other.num.exact_div(g2)
        den = self.den.exact_div(g2) * other.den.exact_div(g1)
        return RationalFunc(num, den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other, self)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other, self) / self

    def inverse(self):
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return RationalFunc(self.den, self.num)

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = RationalFunc.const(self.num.vars, 1)
        for _ in range(n):
            out = out * self
        return out

    def substitute_monomials(self, mapping):
        n = self.num.substitute_monomials(mapping)
        d = self.den.substitute_monomials(mapping)
        return n / d

    def eval_frac(self, assign):
        d = self.den.eval_frac(assign)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at sample point")
        return self.num.eval_frac(assign) / d

    def eval_var(self, name, value):
        num = self.num.eval_var(name, value)
        den = self.den.eval_var(name, value)
        return RationalFunc(num, den)

    def key(self):
        n = self.num.restrict()
        d = self.den.restrict()
        return (n.vars, tuple(sorted(n.terms.items())),
                d.vars, tuple(sorted(d.terms.items())))

    def __repr__(self):
        if self.den.is_const() and self.den.const_value() == 1:
            return repr(self.num)
        return "(%s)/(%s)" % (self.num, self.den)


def mono_to_obj(m):
    return [str(m.coeff), {v: e for v, e in sorted(m.exps.items())}]


def mono_from_obj(obj):
    return Monomial(Fraction(obj[0]), {v: int(e) for v, e in obj[1].items()})


def poly_to_obj(p):
    p = p.restrict()
    return {"vars": list(p.vars),
            "terms": [[list(m), str(c)] for m, c in sorted(p.terms.items())]}


def poly_from_obj(obj):
    vars = tuple(obj["vars"])
    return MultiPoly(vars, {tuple(m): Fraction(c) for m, c in obj["terms"]})


def rf_to_obj(rf):
    return {"num": poly_to_obj(rf.num), "den": poly_to_obj(rf.den)}


def rf_from_obj(obj):
    return RationalFunc(poly_from_obj(obj["num"]), poly_from_obj(obj["den"]),
                        reduce=False)


def _coerce(x, like):
    if isinstance(x, RationalFunc):
        return x
    if isinstance(x, MultiPoly):
        return RationalFunc.from_poly(x)
    if isinstance(x, (int, Fraction)):
        return RationalFunc.const(like.num.vars, x)
    raise TypeError(type(x))


def _reduce_pair(num, den):
    if num.is_zero():
        return num, MultiPoly.const(num.vars, 1)
    g = poly_gcd(num, den)
    while not g.is_const():
        num = num.exact_div(g)
        den = den.exact_div(g)
        g = poly_gcd(num, den)
    lc = den.lead_coeff()
    if lc != 1:
        num = num.scale(1 / lc)
        den = den.scale(1 / lc)
    return num, den
