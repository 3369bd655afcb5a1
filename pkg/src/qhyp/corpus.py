"""The identity corpus: file format, parser, printer, dependency order.

An entry looks like

    identity "q-gauss" {
      kind = summation
      section = "2.1"
      params = [a, b, c]
      shift = [c]
      lhs = phi(2, 1; [a, b]; [c]; q, c/(a*b))
      rhs = poch_inf(c/a; q) * poch_inf(c/b; q)
          / (poch_inf(c; q) * poch_inf(c/(a*b); q))
      constraints = ["|c/(a*b)| < 1"]
    }

Sides are either series (phi/psi shorthand, or explicit sum(...)/bsum(...)
factor products, possibly added) or closed forms (products of poch_inf and
rational factors).  Parameter relations (e.g. f = a*b*c*q/e) are substituted
away at load time so the engine works over free parameters only; the declared
text is preserved for display.

Explicit summand factors: poch(x; q^s)^m for (x;q^s)_k^m, poch_inf(x; q^s)^m,
pow(x, k) for x^k, qbinom2(d) for q^(d*C(k,2)), binom(x; v)^m for
(1 - x*q^(v*k))^m, and rational prefactors.
"""

from __future__ import annotations

import os
import re
from fractions import Fraction

from .algebra import Monomial, RationalFunc, VAR_K, VAR_N, VAR_Q, canonical_vars
from .term import ProductForm, QHTerm, SeriesExpr

RESERVED = {VAR_Q, VAR_N, VAR_K}
KINDS = ("summation", "two-term-summation", "bilateral", "transformation",
         "three-term-transformation", "difference-zero", "script")


class ParseError(ValueError):
    def __init__(self, msg, line, col, expected=()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        extra = " (expected %s)" % ", ".join(expected) if expected else ""
        super().__init__("line %d:%d: %s%s" % (line, col, msg, extra))


class CorpusError(ValueError):
    pass


# -- tokenizer ----------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<name>[A-Za-z][A-Za-z0-9_-]*)
  | (?P<int>[0-9]+)
  | (?P<string>"[^"\n]*")
  | (?P<punct><=|[][}{();,=^*/+\-|<])
""", re.VERBOSE)


def tokenize(text):
    toks = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError("unexpected character %r" % text[pos], line, col)
        kind = m.lastgroup
        val = m.group()
        if kind == "nl":
            line += 1
            col = 1
        else:
            if kind not in ("ws", "comment"):
                toks.append((kind, val, line, col))
            col += len(val)
        pos = m.end()
    toks.append(("eof", "", line, col))
    return toks


class _Tokens:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        if t[0] != "eof":
            self.i += 1
        return t

    def expect(self, val):
        kind, v, line, col = self.peek()
        if v != val and kind != val:
            raise ParseError("got %r" % (v or kind), line, col, (val,))
        return self.next()

    def at(self, val):
        kind, v, _, _ = self.peek()
        return v == val or kind == val

    def error(self, msg, expected=()):
        _, v, line, col = self.peek()
        raise ParseError("%s at %r" % (msg, v), line, col, expected)


# -- expression parsing -------------------------------------------------------

class _ExprParser:
    """Rational expressions over the declared parameters, q, and n."""

    def __init__(self, ts, uni):
        self.ts = ts
        self.uni = uni

    def one(self):
        return RationalFunc.const(self.uni, 1)

    def parse(self):
        out = self.term()
        while self.ts.at("+") or self.ts.at("-"):
            op = self.ts.next()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self):
        out = self.unary()
        while self.ts.at("*") or self.ts.at("/"):
            op = self.ts.next()[1]
            rhs = self.unary()
            out = out * rhs if op == "*" else out / rhs
        return out

    def unary(self):
        if self.ts.at("-"):
            self.ts.next()
            return -self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.ts.at("^"):
            self.ts.next()
            neg = False
            if self.ts.at("-"):
                self.ts.next()
                neg = True
            kind, val, line, col = self.ts.next()
            if kind != "int":
                raise ParseError("exponent must be an integer", line, col, ("int",))
            e = -int(val) if neg else int(val)
            return base ** e
        return base

    def atom(self):
        kind, val, line, col = self.ts.peek()
        if kind == "int":
            self.ts.next()
            return RationalFunc.const(self.uni, Fraction(int(val)))
        if kind == "name":
            self.ts.next()
            if val not in self.uni:
                raise ParseError("unknown symbol %r" % val, line, col)
            return RationalFunc.var(self.uni, val)
        if val == "(":
            self.ts.next()
            out = self.parse()
            self.ts.expect(")")
            return out
        raise ParseError("expected expression, got %r" % (val or kind),
                         line, col, ("name", "int", "("))


def rf_monomial(rf):
    """The Monomial a reduced RationalFunc equals, or None."""
    if len(rf.num.terms) != 1 or len(rf.den.terms) != 1:
        return None
    (nm, nc), = rf.num.terms.items()
    (dm, dc), = rf.den.terms.items()
    exps = {}
    for v, e_num, e_den in zip(rf.num.vars, nm, dm):
        if e_num - e_den:
            exps[v] = e_num - e_den
    return Monomial(Fraction(nc, dc) if dc != 1 else nc / dc, exps)


def expect_monomial(rf, ts, what):
    m = rf_monomial(rf)
    if m is None:
        ts.error("%s must reduce to a monomial" % what)
    return m


# -- side parsing -------------------------------------------------------------

_SERIES_HEADS = ("phi", "psi", "sum", "bsum")


def _merge_term(t, g, sign):
    out = t.times_rational(g.prefactor if sign > 0 else g.prefactor.inverse())
    for a, s, m in g.pochs:
        out = out.times_poch(a, s, sign * m)
    for a, s, m in g.infs:
        out = out.times_inf(a, s, sign * m)
    for a, v, e in g.extra:
        out = out.times_extra(a, v, sign * e)
    out = out.times_geom(g.geom ** sign)
    out.quad += sign * g.quad
    return out


class _SideParser:
    def __init__(self, ts, uni):
        self.ts = ts
        self.uni = uni
        self.ep = _ExprParser(ts, uni)

    def parse_side(self):
        comps = [self.component()]
        while self.ts.at("+"):
            self.ts.next()
            comps.append(self.component())
        if all(isinstance(c, ProductForm) for c in comps):
            if len(comps) == 1:
                return comps[0]
            self.ts.error("a closed-form side must be a single product")
        if not all(isinstance(c, QHTerm) for c in comps):
            self.ts.error("cannot mix series and closed-form components")
        return SeriesExpr(comps)

    def component(self):
        """A product of factors containing at most one series head."""
        series = None
        coeff = ProductForm.one(self.uni)
        invert = False
        while True:
            item = self.factor(invert)
            if isinstance(item, QHTerm):
                if series is not None or invert:
                    self.ts.error("only one series per component")
                series = item
            else:
                coeff = coeff * item
            if self.ts.at("*"):
                self.ts.next()
                invert = False
            elif self.ts.at("/"):
                self.ts.next()
                invert = True
            else:
                break
        if series is None:
            return coeff
        out = series.times_rational(coeff.scalar)
        for a, s, m in coeff.factors:
            out = out.times_inf(a, s, m)
        return out

    def factor(self, invert):
        kind, val, line, col = self.ts.peek()
        if val == "(":
            save = self.ts.i
            try:
                rf = self.ep.power()
            except ParseError:
                self.ts.i = save
                self.ts.expect("(")
                group = self.component()
                self.ts.expect(")")
                if isinstance(group, QHTerm):
                    if invert:
                        self.ts.error("cannot divide by a series")
                    return group
                return group.inverse() if invert else group
            return ProductForm.one(self.uni).times_rational(
                rf.inverse() if invert else rf)
        if kind == "name" and val in _SERIES_HEADS:
            return self.series(val)
        if kind == "name" and val == "poch_inf":
            self.ts.next()
            self.ts.expect("(")
            arg = expect_monomial(self.ep.parse(), self.ts, "poch_inf argument")
            self.ts.expect(";")
            step = self.qstep()
            self.ts.expect(")")
            e = self.opt_exp()
            if invert:
                e = -e
            return ProductForm.one(self.uni).times_inf(arg, step, e)
        rf = self.ep.power()  # no +/- at factor level
        if invert:
            rf = rf.inverse()
        return ProductForm.one(self.uni).times_rational(rf)

    def qstep(self):
        tok = self.ts.expect("name")
        if tok[1] != VAR_Q:
            raise ParseError("Pochhammer base must be a power of q",
                             tok[2], tok[3], ("q",))
        if self.ts.at("^"):
            self.ts.next()
            s = int(self.ts.expect("int")[1])
        else:
            s = 1
        if s < 1:
            self.ts.error("Pochhammer step must be positive")
        return s

    def opt_exp(self):
        if not self.ts.at("^"):
            return 1
        self.ts.next()
        neg = False
        if self.ts.at("-"):
            self.ts.next()
            neg = True
        e = int(self.ts.expect("int")[1])
        return -e if neg else e

    def series(self, head):
        self.ts.next()
        self.ts.expect("(")
        if head in ("phi", "psi"):
            t = self.phi_psi(head)
        else:
            t = self.summand(bilateral=(head == "bsum"))
        self.ts.expect(")")
        return t

    def phi_psi(self, head):
        r = int(self.ts.expect("int")[1])
        self.ts.expect(",")
        s = int(self.ts.expect("int")[1])
        self.ts.expect(";")
        nums = self.mono_list()
        self.ts.expect(";")
        dens = self.mono_list()
        self.ts.expect(";")
        tok = self.ts.expect("name")
        if tok[1] != VAR_Q:
            raise ParseError("series base must be q", tok[2], tok[3], ("q",))
        self.ts.expect(",")
        z = expect_monomial(self.ep.parse(), self.ts, "series argument")
        if len(nums) != r or len(dens) != s:
            self.ts.error("phi/psi arity does not match its parameter lists")
        t = QHTerm(RationalFunc.const(self.uni, 1), bilateral=(head == "psi"))
        for a in nums:
            if a is not None:
                t = t.times_poch(a, 1, 1)
        for b in dens:
            if b is not None:
                t = t.times_poch(b, 1, -1)
        if head == "phi":
            t = t.times_poch(Monomial.var(VAR_Q), 1, -1)
            e = 1 + s - r
        else:
            e = s - r
        t = t.times_geom(z)
        if e:
            t = t.times_geom(Monomial(Fraction(-1) ** e))
            t.quad += e
        return t

    def mono_list(self):
        self.ts.expect("[")
        out = []
        if not self.ts.at("]"):
            out.append(self.mono_or_zero())
            while self.ts.at(","):
                self.ts.next()
                out.append(self.mono_or_zero())
        self.ts.expect("]")
        return out

    def mono_or_zero(self):
        # a literal 0 contributes no Pochhammer factor ((0;q)_k = 1) but
        # still counts toward the series arity
        rf = self.ep.parse()
        if rf.is_zero():
            return None
        return expect_monomial(rf, self.ts, "series parameter")

    def summand(self, bilateral):
        t = QHTerm(RationalFunc.const(self.uni, 1), bilateral=bilateral)
        invert = False
        while True:
            t = self.summand_factor(t, invert)
            if self.ts.at("*"):
                self.ts.next()
                invert = False
            elif self.ts.at("/"):
                self.ts.next()
                invert = True
            else:
                return t

    def summand_factor(self, t, invert):
        sign = -1 if invert else 1
        kind, val, line, col = self.ts.peek()
        if val == "(":
            save = self.ts.i
            try:
                rf = self.ep.power()
            except ParseError:
                self.ts.i = save
                self.ts.expect("(")
                group = self.summand(bilateral=False)
                self.ts.expect(")")
                return _merge_term(t, group, sign)
            return t.times_rational(rf.inverse() if invert else rf)
        if kind == "name" and val == "poch":
            self.ts.next()
            self.ts.expect("(")
            arg = expect_monomial(self.ep.parse(), self.ts, "poch argument")
            self.ts.expect(";")
            step = self.qstep()
            self.ts.expect(")")
            return t.times_poch(arg, step, sign * self.opt_exp())
        if kind == "name" and val == "poch_inf":
            self.ts.next()
            self.ts.expect("(")
            arg = expect_monomial(self.ep.parse(), self.ts, "poch_inf argument")
            self.ts.expect(";")
            step = self.qstep()
            self.ts.expect(")")
            return t.times_inf(arg, step, sign * self.opt_exp())
        if kind == "name" and val == "pow":
            self.ts.next()
            self.ts.expect("(")
            base = expect_monomial(self.ep.parse(), self.ts, "pow base")
            if self.ts.at(","):
                self.ts.next()
                tok = self.ts.expect("name")
                if tok[1] != "k":
                    raise ParseError("pow exponent must be k", tok[2], tok[3], ("k",))
            self.ts.expect(")")
            return t.times_geom(base ** sign)
        if kind == "name" and val == "qbinom2":
            self.ts.next()
            self.ts.expect("(")
            neg = False
            if self.ts.at("-"):
                self.ts.next()
                neg = True
            d = int(self.ts.expect("int")[1])
            self.ts.expect(")")
            t = t.copy()
            t.quad += sign * (-d if neg else d)
            return t
        if kind == "name" and val == "binom":
            self.ts.next()
            self.ts.expect("(")
            arg = expect_monomial(self.ep.parse(), self.ts, "binom argument")
            v = 1
            if self.ts.at(";"):
                self.ts.next()
                v = int(self.ts.expect("int")[1])
            self.ts.expect(")")
            return t.times_extra(arg, v, sign * self.opt_exp())
        rf = self.ep.power()
        return t.times_rational(rf.inverse() if invert else rf)


# -- identities ---------------------------------------------------------------

class Identity:
    def __init__(self, id, kind, section, params, shift, step, lhs, rhs,
                 constraints=(), constraint_text=(), relations=(), depends=(),
                 terminating=(), limit_lhs=("auto",), limit_rhs=("auto",),
                 script=(), flags=(), max_order=2):
        self.id = id
        self.kind = kind
        self.section = section
        self.params = list(params)
        self.shift = list(shift)
        self.step = step
        self.lhs = lhs
        self.rhs = rhs
        self.constraints = list(constraints)
        self.constraint_text = list(constraint_text)
        self.relations = list(relations)  # (name, Monomial) pairs, substituted
        self.depends = list(depends)
        self.terminating = list(terminating)
        self.limit_lhs = limit_lhs
        self.limit_rhs = limit_rhs
        self.script = list(script)
        self.flags = list(flags)
        self.max_order = max_order

    @property
    def bilateral(self):
        return isinstance(self.lhs, SeriesExpr) and self.lhs.bilateral

    def free_params(self):
        bound = {name for name, _ in self.relations}
        return [p for p in self.params if p not in bound]

    def __repr__(self):
        return "Identity(%s, %s)" % (self.id, self.kind)


class Corpus:
    def __init__(self, entries):
        self.entries = list(entries)
        self.by_id = {}
        for e in self.entries:
            if e.id in self.by_id:
                raise CorpusError("duplicate identity id %r" % e.id)
            self.by_id[e.id] = e
        for e in self.entries:
            for d in e.depends:
                if d not in self.by_id:
                    raise CorpusError("%s depends on unknown id %r" % (e.id, d))
        self._check_acyclic()

    def _check_acyclic(self):
        state = {}

        def visit(eid, chain):
            if state.get(eid) == 2:
                return
            if state.get(eid) == 1:
                raise CorpusError("dependency cycle: %s" % " -> ".join(chain + [eid]))
            state[eid] = 1
            for d in self.by_id[eid].depends:
                visit(d, chain + [eid])
            state[eid] = 2

        for e in self.entries:
            visit(e.id, [])

    def proof_order(self, ids=None):
        """Requested ids plus dependencies, dependencies first."""
        want = list(ids) if ids is not None else [e.id for e in self.entries]
        for eid in want:
            if eid not in self.by_id:
                raise CorpusError("unknown identity id %r" % eid)
        out, seen = [], set()

        def visit(eid):
            if eid in seen:
                return
            seen.add(eid)
            for d in self.by_id[eid].depends:
                visit(d)
            out.append(eid)

        for eid in want:
            visit(eid)
        return out


# -- entry parsing ------------------------------------------------------------

def _parse_value_list(ts, item):
    ts.expect("[")
    out = []
    if not ts.at("]"):
        out.append(item())
        while ts.at(","):
            ts.next()
            out.append(item())
    ts.expect("]")
    return out


def _parse_limit(ts, uni):
    kind, val, line, col = ts.peek()
    if val in ("auto", "theta"):
        ts.next()
        return (val,)
    if val == "one":
        ts.next()
        return ("scalar", RationalFunc.const(uni, 1))
    if val == "closure":
        ts.next()
        ts.expect("(")
        target = ts.expect("string")[1].strip('"')
        mapping = {}
        while ts.at(";"):
            ts.next()
            name = ts.expect("name")[1]
            ts.expect("=")
            mapping[name] = expect_monomial(_ExprParser(ts, uni).parse(), ts,
                                            "closure substitution")
        ts.expect(")")
        return ("closure", target, mapping)
    rf = _ExprParser(ts, uni).parse()
    return ("scalar", rf)


def _parse_script_step(ts, uni):
    name = ts.expect("name")[1]
    args = {}
    if ts.at("("):
        ts.next()
        while not ts.at(")"):
            key = ts.expect("name")[1]
            ts.expect("=")
            if ts.at("string"):
                args[key] = ts.next()[1].strip('"')
            elif ts.at("{"):
                ts.next()
                mapping = {}
                while not ts.at("}"):
                    mk = ts.expect("name")[1]
                    ts.expect("=")
                    mapping[mk] = expect_monomial(
                        _ExprParser(ts, uni).parse(), ts, "script substitution")
                    if ts.at(","):
                        ts.next()
                ts.expect("}")
                args[key] = mapping
            else:
                args[key] = _ExprParser(ts, uni).parse()
            if ts.at(";"):
                ts.next()
        ts.expect(")")
    return (name, args)


def _parse_constraint(ts, uni):
    """|expr| < 1, parsed from its own token stream."""
    tok = ts.expect("string")
    text = tok[1].strip('"')
    m = re.fullmatch(r"\s*\|([^|]+)\|\s*<\s*1\s*", text)
    if m is None:
        raise ParseError("constraint must look like \"|expr| < 1\"",
                         tok[2], tok[3])
    sub = _Tokens(tokenize(m.group(1)))
    rf = _ExprParser(sub, uni).parse()
    if not sub.at("eof"):
        sub.error("trailing input in constraint")
    return rf, text.strip()


def parse_corpus(text):
    ts = _Tokens(tokenize(text))
    entries = []
    while not ts.at("eof"):
        entries.append(_parse_identity(ts))
    return Corpus(entries)


def _parse_identity(ts):
    ts.expect("identity")
    id_tok = ts.expect("string")
    eid = id_tok[1].strip('"')
    ts.expect("{")
    fields = {}
    order = []
    # params must be read before expressions; collect raw spans first is
    # avoided by requiring params/shift/relations before lhs/rhs in the file
    uni = None
    while not ts.at("}"):
        key = ts.expect("name")[1]
        ts.expect("=")
        if key == "params":
            names = _parse_value_list(ts, lambda: ts.expect("name")[1])
            for n in names:
                if n in RESERVED:
                    ts.error("parameter name %r is reserved" % n)
            if len(set(names)) != len(names):
                ts.error("duplicate parameter")
            fields["params"] = names
            uni = canonical_vars(list(names) + [VAR_N, VAR_Q])
        elif key in ("kind", "section"):
            if ts.at("string"):
                fields[key] = ts.next()[1].strip('"')
            else:
                fields[key] = ts.expect("name")[1]
        elif key in ("shift", "depends", "terminating", "flags"):
            if key == "depends" or key == "flags":
                fields[key] = _parse_value_list(
                    ts, lambda: ts.expect("string")[1].strip('"')
                    if ts.at("string") else ts.expect("name")[1])
            elif key == "terminating":
                if uni is None:
                    ts.error("params must be declared before terminating")
                fields[key] = _parse_value_list(
                    ts, lambda: _ExprParser(ts, uni).parse())
            else:
                fields[key] = _parse_value_list(ts, lambda: ts.expect("name")[1])
        elif key in ("step", "max_order"):
            neg = False
            if ts.at("-"):
                ts.next()
                neg = True
            v = int(ts.expect("int")[1])
            fields[key] = -v if neg else v
        elif key in ("lhs", "rhs"):
            if uni is None:
                ts.error("params must be declared before %s" % key)
            fields[key] = _SideParser(ts, uni).parse_side()
        elif key == "relations":
            if uni is None:
                ts.error("params must be declared before relations")
            def rel():
                name = ts.expect("name")[1]
                ts.expect("=")
                return (name, expect_monomial(_ExprParser(ts, uni).parse(),
                                              ts, "relation"))
            fields["relations"] = _parse_value_list(ts, rel)
        elif key == "constraints":
            if uni is None:
                ts.error("params must be declared before constraints")
            fields["constraints"] = _parse_value_list(
                ts, lambda: _parse_constraint(ts, uni))
        elif key in ("limit_lhs", "limit_rhs"):
            fields[key] = _parse_limit(ts, uni)
        elif key == "script":
            fields[key] = _parse_value_list(ts, lambda: _parse_script_step(ts, uni))
        else:
            ts.error("unknown field %r" % key)
        order.append(key)
    ts.expect("}")
    return _build_identity(eid, fields, ts)


def _build_identity(eid, fields, ts):
    for req in ("kind", "section", "params", "lhs", "rhs"):
        if req not in fields:
            raise CorpusError("identity %r missing field %r" % (eid, req))
    if fields["kind"] not in KINDS:
        raise CorpusError("identity %r has unknown kind %r" % (eid, fields["kind"]))
    params = fields["params"]
    shift = fields.get("shift", [])
    relations = fields.get("relations", [])
    bound = {n for n, _ in relations}
    for p in shift:
        if p not in params:
            raise CorpusError("identity %r shifts undeclared parameter %r"
                              % (eid, p))
        if p in bound:
            raise CorpusError("identity %r shifts bound parameter %r" % (eid, p))
    constraints = fields.get("constraints", [])
    terminating = fields.get("terminating", [])
    lhs, rhs = fields["lhs"], fields["rhs"]
    # substitute relations: bound parameters become monomials in free ones
    if relations:
        mapping = {}
        for name, mono in relations:
            if any(v in mapping for v in mono.vars()):
                raise CorpusError("identity %r has chained relations" % eid)
            mapping[name] = mono
        lhs = lhs.substitute(mapping)
        rhs = rhs.substitute(mapping)
        constraints = [(rf.substitute_monomials(mapping), text)
                       for rf, text in constraints]
        terminating = [rf.substitute_monomials(mapping) for rf in terminating]
    return Identity(
        eid, fields["kind"], fields["section"], params, shift,
        fields.get("step", 1), lhs, rhs,
        constraints=[rf for rf, _ in constraints],
        constraint_text=[text for _, text in constraints],
        relations=relations,
        depends=fields.get("depends", []),
        terminating=terminating,
        limit_lhs=fields.get("limit_lhs", ("auto",)),
        limit_rhs=fields.get("limit_rhs", ("auto",)),
        script=fields.get("script", []),
        flags=fields.get("flags", []),
        max_order=fields.get("max_order", 2),
    )


# -- printing -----------------------------------------------------------------

def _mono_text(m):
    num, den = [], []
    if m.coeff != 1 or not m.exps:
        c = Fraction(m.coeff)
        if c.denominator == 1:
            num.append(str(c.numerator))
        else:
            num.append(str(c.numerator))
            den.append(str(c.denominator))
    for v, e in sorted(m.exps.items()):
        side = num if e > 0 else den
        ae = abs(e)
        side.append(v if ae == 1 else "%s^%d" % (v, ae))
    out = "*".join(num) if num else "1"
    if den:
        out += "/" + "/".join(den)
    return out


def _poly_text(p):
    p = p.restrict()
    if p.is_zero():
        return "0"
    bits = []
    for exps, c in sorted(p.terms.items(), reverse=True):
        m = Monomial(c, {v: e for v, e in zip(p.vars, exps) if e})
        txt = _mono_text(m)
        if bits and not txt.startswith("-"):
            bits.append("+")
        bits.append(txt)
    return " ".join(bits).replace("+ -", "- ")


def _rf_text(rf):
    num = _poly_text(rf.num)
    den = _poly_text(rf.den)
    if den == "1":
        return num if "+" not in num and "- " not in num else "(%s)" % num
    if "+" in num or "- " in num or "*" in num:
        num = "(%s)" % num
    if "+" in den or "- " in den or "*" in den or "/" in den:
        den = "(%s)" % den
    return "%s/%s" % (num, den)


def _qstep_text(s):
    return VAR_Q if s == 1 else "%s^%d" % (VAR_Q, s)


def _exp_text(e):
    return "" if e == 1 else "^%d" % e if e > 0 else "^-%d" % -e


def print_term(t):
    bits = []
    if not t.prefactor.is_one():
        bits.append("(%s)" % _rf_text(t.prefactor))
    for a, s, m in t.pochs:
        bits.append("poch(%s; %s)%s" % (_mono_text(a), _qstep_text(s), _exp_text(m)))
    for a, s, m in t.infs:
        bits.append("poch_inf(%s; %s)%s" % (_mono_text(a), _qstep_text(s),
                                            _exp_text(m)))
    if not t.geom.is_one():
        bits.append("pow(%s, k)" % _mono_text(t.geom))
    if t.quad:
        bits.append("qbinom2(%d)" % t.quad)
    for a, v, e in t.extra:
        arg = _mono_text(a) if v == 1 else "%s; %d" % (_mono_text(a), v)
        bits.append("binom(%s)%s" % (arg, _exp_text(e)))
    head = "bsum" if t.bilateral else "sum"
    return "%s(%s)" % (head, " * ".join(bits) if bits else "1")


def print_product(p):
    bits = []
    if not p.scalar.is_one():
        bits.append("(%s)" % _rf_text(p.scalar))
    for a, s, m in p.factors:
        bits.append("poch_inf(%s; %s)%s" % (_mono_text(a), _qstep_text(s),
                                            _exp_text(m)))
    return " * ".join(bits) if bits else "1"


def print_side(side):
    if isinstance(side, ProductForm):
        return print_product(side)
    return " + ".join(print_term(t) for t in side.components)


def _limit_text(lim):
    if lim[0] in ("auto", "theta"):
        return lim[0]
    if lim[0] == "scalar":
        return _rf_text(lim[1])
    _, target, mapping = lim
    subs = "".join("; %s = %s" % (k, _mono_text(v))
                   for k, v in sorted(mapping.items()))
    return 'closure("%s"%s)' % (target, subs)


def _step_text(step):
    name, args = step
    if not args:
        return name
    bits = []
    for k, v in args.items():
        if isinstance(v, str):
            bits.append('%s = "%s"' % (k, v))
        elif isinstance(v, dict):
            inner = ", ".join("%s = %s" % (mk, _mono_text(mv))
                              for mk, mv in sorted(v.items()))
            bits.append("%s = {%s}" % (k, inner))
        else:
            bits.append("%s = %s" % (k, _rf_text(v)))
    return "%s(%s)" % (name, "; ".join(bits))


def print_identity(e):
    lines = ['identity "%s" {' % e.id]
    lines.append("  kind = %s" % e.kind)
    lines.append('  section = "%s"' % e.section)
    # relations were substituted away at load; print free parameters only
    lines.append("  params = [%s]" % ", ".join(e.free_params()))
    if e.shift:
        lines.append("  shift = [%s]" % ", ".join(e.shift))
    if e.step != 1:
        lines.append("  step = %d" % e.step)
    lines.append("  lhs = %s" % print_side(e.lhs))
    lines.append("  rhs = %s" % print_side(e.rhs))
    if e.constraint_text:
        lines.append("  constraints = [%s]" %
                     ", ".join('"%s"' % c for c in e.constraint_text))
    if e.depends:
        lines.append("  depends = [%s]" % ", ".join('"%s"' % d for d in e.depends))
    if e.terminating:
        lines.append("  terminating = [%s]" % ", ".join(_rf_text(rf)
                                                        for rf in e.terminating))
    if e.limit_lhs != ("auto",):
        lines.append("  limit_lhs = %s" % _limit_text(e.limit_lhs))
    if e.limit_rhs != ("auto",):
        lines.append("  limit_rhs = %s" % _limit_text(e.limit_rhs))
    if e.script:
        lines.append("  script = [%s]" % ", ".join(_step_text(s) for s in e.script))
    if e.flags:
        lines.append("  flags = [%s]" % ", ".join(e.flags))
    if e.max_order != 2:
        lines.append("  max_order = %d" % e.max_order)
    lines.append("}")
    return "\n".join(lines)


def print_corpus(c):
    return "\n\n".join(print_identity(e) for e in c.entries) + "\n"


# -- loading ------------------------------------------------------------------

def corpus_dir():
    env = os.environ.get("QHYP_CORPUS_DIR")
    if env:
        return env
    return os.path.join(os.path.dirname(__file__), "corpus_data")


def load_corpus(path=None):
    path = path or corpus_dir()
    texts = []
    for name in sorted(os.listdir(path)):
        if name.endswith(".qhy"):
            with open(os.path.join(path, name), "r", encoding="utf-8") as fh:
                texts.append(fh.read())
    if not texts:
        raise CorpusError("no .qhy files in %s" % path)
    return parse_corpus("\n".join(texts))
