"""Telescoping certificates checked by exact evaluation of both sides."""

import random
from fractions import Fraction

from qhyp.algebra import Monomial, MultiPoly, RationalFunc, canonical_vars
from qhyp.term import QHTerm
from qhyp.telescope import Certificate, certify_verify, find_certificate, telescope

from oracles import eval_rf_at_k, eval_term


def mk(pochs, geom, uni, quad=0, extra=(), pre=None, bilateral=False):
    uni = canonical_vars(uni)
    if pre is None:
        pre = RationalFunc.const(uni, 1)
    return QHTerm(pre, pochs, [], geom, quad, extra, bilateral)


def qbinomial_term():
    t = mk([(Monomial(1, {"a": 1}), 1, 1), (Monomial(1, {"q": 1}), 1, -1)],
           Monomial(1, {"z": 1}), ["a", "z", "Qn", "Qk", "q"])
    return t.tag_shifts(["z"])


def one_psi_one_term():
    t = mk([(Monomial(1, {"a": 1}), 1, 1), (Monomial(1, {"b": 1}), 1, -1)],
           Monomial(1, {"z": 1}), ["a", "b", "z", "Qn", "Qk", "q"], bilateral=True)
    return t.tag_shifts(["b"])


def check_telescoping_numeric(t, cert, assign, ks):
    """sum_i p_i t(n+i, k) == g(k+1) - g(k) with g = R t, at exact points."""
    w = cert.w
    q = assign["q"]
    for k in ks:
        lhs = Fraction(0)
        for i, p in enumerate(cert.ps):
            shifted = dict(assign)
            shifted["Qn"] = assign["Qn"] * q ** (w * i)
            lhs += p.eval_frac(assign) * eval_term(t, shifted, k)
        g1 = eval_rf_at_k(cert.Rs[0], assign, k + 1) * eval_term(t, assign, k + 1)
        g0 = eval_rf_at_k(cert.Rs[0], assign, k) * eval_term(t, assign, k)
        assert lhs == g1 - g0


def test_qbinomial_certificate_fixture():
    t = qbinomial_term()
    cert = telescope([t], w=1, order=1)
    assert cert is not None
    U = canonical_vars(["a", "z", "Qn", "q"])
    z = MultiPoly.var(U, "z")
    qn = MultiPoly.var(U, "Qn")
    a = MultiPoly.var(U, "a")
    one = MultiPoly.const(U, 1)
    # projective comparison against the known certificate
    assert (z * qn - one) * cert.ps[1] == (one - a * z * qn) * cert.ps[0]
    x = RationalFunc.var(canonical_vars(["Qk"]), "Qk")
    assert cert.Rs[0] * (z * qn - one) == (1 - x) * cert.ps[0]
    assert certify_verify(t, 1, cert.ps, cert.Rs[0])
    assign = {"a": Fraction(3, 7), "z": Fraction(2, 5), "Qn": Fraction(5, 6),
              "q": Fraction(1, 4)}
    check_telescoping_numeric(t, cert, assign, range(0, 6))


def test_one_psi_one_certificate_fixture():
    t = one_psi_one_term()
    cert = telescope([t], w=1, order=1)
    assert cert is not None
    U = canonical_vars(["a", "b", "z", "Qn", "q"])
    a, b, z, qn = (MultiPoly.var(U, v) for v in ("a", "b", "z", "Qn"))
    one = MultiPoly.const(U, 1)
    p0f = (a * z - b * qn) * (one - b * qn)
    p1f = z * (b * qn - a)
    assert p0f * cert.ps[1] == p1f * cert.ps[0]
    assert certify_verify(t, 1, cert.ps, cert.Rs[0])
    assign = {"a": Fraction(3, 7), "b": Fraction(2, 3), "z": Fraction(2, 5),
              "Qn": Fraction(5, 6), "q": Fraction(1, 4)}
    check_telescoping_numeric(t, cert, assign, range(-4, 5))


def test_very_well_poised_order_one():
    uni = ["a", "b", "c", "d", "Qn", "Qk", "q"]
    U = canonical_vars(uni)
    one = RationalFunc.const(U, 1)
    t = mk([(Monomial(1, {"a": 1}), 1, 1), (Monomial(1, {"b": 1}), 1, 1),
            (Monomial(1, {"c": 1}), 1, 1), (Monomial(1, {"d": 1}), 1, 1),
            (Monomial(1, {"q": 1}), 1, -1),
            (Monomial(1, {"a": 1, "q": 1, "b": -1}), 1, -1),
            (Monomial(1, {"a": 1, "q": 1, "c": -1}), 1, -1),
            (Monomial(1, {"a": 1, "q": 1, "d": -1}), 1, -1)],
           Monomial(1, {"a": 1, "q": 1, "b": -1, "c": -1, "d": -1}),
           uni, extra=[(Monomial(1, {"a": 1}), 2, 1)],
           pre=one / (one - RationalFunc.var(U, "a")))
    t = t.tag_shifts(["a"])
    cert = telescope([t], w=1, order=1)
    assert cert is not None
    assert certify_verify(t, 1, cert.ps, cert.Rs[0])
    assign = {"a": Fraction(2, 3), "b": Fraction(3, 5), "c": Fraction(5, 7),
              "d": Fraction(7, 11), "Qn": Fraction(1, 2), "q": Fraction(1, 5)}
    check_telescoping_numeric(t, cert, assign, range(0, 5))


def test_shift_step_two():
    # Lebesgue-type summand needs the doubled shift: no order-1 certificate
    # at w=1, a clean one at w=2.
    t = mk([(Monomial(1, {"x": 1}), 1, 1), (Monomial(1, {"q": 1}), 1, -1)],
           Monomial(1, {"q": 1}), ["x", "Qn", "Qk", "q"], quad=1)
    t = t.tag_shifts(["x"])
    assert telescope([t], w=1, order=1) is None
    cert = telescope([t], w=2, order=1)
    assert cert is not None
    assert certify_verify(t, 2, cert.ps, cert.Rs[0])
    assign = {"x": Fraction(2, 7), "Qn": Fraction(3, 4), "q": Fraction(1, 3)}
    check_telescoping_numeric(t, cert, assign, range(0, 6))


def test_downward_shift():
    # same 1psi1 summand, but stepping b -> b/q
    t = one_psi_one_term()
    cert = telescope([t], w=-1, order=1)
    assert cert is not None
    assert certify_verify(t, -1, cert.ps, cert.Rs[0])
    assign = {"a": Fraction(3, 7), "b": Fraction(2, 3), "z": Fraction(2, 5),
              "Qn": Fraction(5, 6), "q": Fraction(1, 4)}
    check_telescoping_numeric(t, cert, assign, range(-3, 4))


def test_joint_two_components():
    # two unrelated q-binomial summands share no order-1 recurrence but do
    # share an order-2 one; both certificates must verify with the same ps
    t1 = qbinomial_term()
    t2 = mk([(Monomial(1, {"b": 1}), 1, 1), (Monomial(1, {"q": 1}), 1, -1)],
            Monomial(1, {"z": 1}), ["b", "z", "Qn", "Qk", "q"]).tag_shifts(["z"])
    assert telescope([t1, t2], w=1, order=1) is None
    cert = telescope([t1, t2], w=1, order=2)
    assert cert is not None
    assert certify_verify(t1, 1, cert.ps, cert.Rs[0])
    assert certify_verify(t2, 1, cert.ps, cert.Rs[1])
    for t, R in ((t1, cert.Rs[0]), (t2, cert.Rs[1])):
        assign = {"a": Fraction(3, 7), "b": Fraction(2, 3), "z": Fraction(2, 5),
                  "Qn": Fraction(5, 6), "q": Fraction(1, 4)}
        check_telescoping_numeric(t, Certificate(cert.recurrence, [R]), assign,
                                  range(0, 5))


def test_fixed_ps_cross_certify():
    t = qbinomial_term()
    cert = telescope([t], w=1, order=1)
    again = telescope([t], w=1, order=1, fixed_ps=cert.ps)
    assert again is not None
    assert again.Rs[0] == cert.Rs[0]
    # and with scaled ps the certificate scales along
    scaled = [p.scale(Fraction(3)) for p in cert.ps]
    again = telescope([t], w=1, order=1, fixed_ps=scaled)
    assert again.Rs[0] == cert.Rs[0] * Fraction(3)


def test_corrupted_certificate_rejected():
    t = qbinomial_term()
    cert = telescope([t], w=1, order=1)
    bad_ps = list(cert.ps)
    bad_ps[0] = bad_ps[0] + MultiPoly.const(bad_ps[0].vars, 1)
    assert not certify_verify(t, 1, bad_ps, cert.Rs[0])
    bad_R = cert.Rs[0] * RationalFunc.var(canonical_vars(["Qk"]), "Qk")
    assert not certify_verify(t, 1, cert.ps, bad_R)


def test_gosper_soundness_random():
    # random rational g-certificates R over random summands: the difference
    # g(k+1) - g(k) = t * (R(qQk) r(Qk) - R(Qk)) defines a valid telescoped
    # pair, so certify_verify must accept it with ps reconstructed trivially
    rng = random.Random(3)
    U = canonical_vars(["a", "z", "Qn", "Qk", "q"])
    for _ in range(20):
        t = mk([(Monomial(1, {"a": 1}), 1, 1), (Monomial(1, {"q": 1}), 1, -1)],
               Monomial(rng.choice([1, -1]), {"z": 1, "Qn": 1}),
               ["a", "z", "Qn", "Qk", "q"], quad=rng.choice([0, 1]))
        num = MultiPoly.zero(U)
        for d in range(rng.randint(1, 2) + 1):
            c = rng.randint(-3, 3)
            if c:
                num = num + MultiPoly.var(U, "Qk") ** d * MultiPoly.const(U, c)
        if num.is_zero():
            continue
        R = RationalFunc(num, MultiPoly.const(U, 1))
        from qhyp.term import k_ratio, q_monomial
        Rq = R.substitute_monomials({"Qk": Monomial.var("Qk") * q_monomial(1)})
        rho = Rq * k_ratio(t) - R
        # ps = [rho] works when rho is Qk-free; here it rarely is, so instead
        # verify the identity the checker implements, then corrupt it
        assert certify_verify(t, 1, [RationalFunc.const(U, 0)], R) == rho.is_zero()


def test_find_certificate_order_scan():
    t1 = qbinomial_term()
    t2 = mk([(Monomial(1, {"b": 1}), 1, 1), (Monomial(1, {"q": 1}), 1, -1)],
            Monomial(1, {"z": 1}), ["b", "z", "Qn", "Qk", "q"]).tag_shifts(["z"])
    cert = find_certificate([t1, t2], w=1, max_order=3)
    assert cert is not None and cert.order == 2


def test_certificate_serialization_roundtrip():
    t = one_psi_one_term()
    cert = telescope([t], w=1, order=1)
    obj = cert.to_obj()
    back = Certificate.from_obj(obj)
    assert back.w == cert.w and back.order == cert.order
    assert all(p1 == p2 for p1, p2 in zip(back.ps, cert.ps))
    assert all(r1 == r2 for r1, r2 in zip(back.Rs, cert.Rs))
    import json
    assert json.loads(json.dumps(obj)) == obj
