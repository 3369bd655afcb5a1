"""Oracle tests: mpmath cross-checks, exact partial sums, planted errors."""

import random
from fractions import Fraction

import mpmath
import pytest

from qhyp.algebra import Monomial, RationalFunc, canonical_vars
from qhyp.numeric import (
    PoleError, PrecisionConfig, SamplePoint, boundary_limit_numeric,
    eval_identity_residual, eval_poch_inf, eval_product, eval_series,
    q_power_index, sample_points, tannery_domination_check,
)
from qhyp.term import ProductForm, QHTerm, SeriesExpr, negate_index, theta_product

from oracles import eval_term

CFG = PrecisionConfig(bits=256)


def rf1(uni):
    return RationalFunc.const(canonical_vars(uni), 1)


def mono(coeff=1, **exps):
    return Monomial(Fraction(coeff), exps)


def one_phi_zero(uni=("a", "z", "q")):
    return QHTerm(rf1(uni), [(mono(a=1), 1, 1), (mono(q=1), 1, -1)],
                  geom=mono(z=1))


def test_q_power_index():
    q = Fraction(1, 3)
    assert q_power_index(Fraction(1, 27), q, 100) == 3
    assert q_power_index(Fraction(9), q, 100) == -2
    assert q_power_index(Fraction(1), q, 100) == 0
    assert q_power_index(Fraction(2, 7), q, 100) is None
    assert q_power_index(Fraction(1, 2 ** 200), Fraction(1, 2), 100) is None
    assert q_power_index(Fraction(1, 2 ** 200), Fraction(1, 2), 300) == 200


def test_one_phi_zero_matches_product():
    # q-binomial theorem as a pure numeric statement, both sides this module
    t = one_phi_zero()
    rhs = ProductForm.one(("a", "z", "q")) \
        .times_inf(mono(a=1, z=1), 1, 1).times_inf(mono(z=1), 1, -1)
    cfg = PrecisionConfig(bits=512)
    assign = {"a": Fraction(1, 4), "z": Fraction(1, 3), "q": Fraction(1, 2)}
    L = eval_series(t, assign, cfg)
    R = eval_product(rhs, assign, cfg)
    assert abs(L.value - R.value) < mpmath.mpf(10) ** -40
    assert abs(L.value - R.value) < L.tail_bound + R.tail_bound + mpmath.mpf(10) ** -140


def test_empty_series_and_product():
    assert eval_series(SeriesExpr([]), {"q": Fraction(1, 2)}, CFG).value == 0
    assert eval_product(ProductForm.one(("q",)), {"q": Fraction(1, 2)}, CFG).value == 1


def test_poch_inf_against_mpmath():
    with CFG.workprec():
        v = eval_poch_inf(Fraction(1, 2), Fraction(1, 2), 1, CFG)
        ref = mpmath.qp(mpmath.mpf(1) / 2)
        assert abs(v - ref) < mpmath.mpf(10) ** -70
        v2 = eval_poch_inf(Fraction(1, 3), Fraction(1, 4), 2, CFG)
        ref2 = mpmath.qp(mpmath.mpf(1) / 3, mpmath.mpf(1) / 16)
        assert abs(v2 - ref2) < mpmath.mpf(10) ** -70


def test_product_exact_zero_factor():
    p = ProductForm.one(("z", "q")).times_inf(mono(z=1), 1, 1)
    r = eval_product(p, {"z": Fraction(1), "q": Fraction(1, 2)}, CFG)
    assert r.value == 0 and r.tail_bound == 0
    # and in the denominator it is a pole, not a zero
    with pytest.raises(PoleError):
        eval_product(p.inverse(), {"z": Fraction(1), "q": Fraction(1, 2)}, CFG)


def test_bilateral_theta_vanishes_at_minus_one():
    # sum over Z of q^C(k,2) z^k at z=-1: the triple product has factor (1;q)oo
    t = QHTerm(rf1(("z", "q")), [], geom=mono(z=1), quad=1, bilateral=True)
    r = eval_series(t, {"z": Fraction(-1), "q": Fraction(1, 3)}, CFG)
    assert abs(r.value) < mpmath.mpf(10) ** -40


def test_bilateral_theta_matches_triple_product():
    t = QHTerm(rf1(("z", "q")), [], geom=mono(z=1), quad=1, bilateral=True)
    pf = theta_product(mono(z=1), 1)
    for z, q in ((Fraction(2, 3), Fraction(1, 3)), (Fraction(-3, 5), Fraction(1, 4)),
                 (Fraction(5, 2), Fraction(1, 5))):
        assign = {"z": z, "q": q}
        L = eval_series(t, assign, CFG)
        R = eval_product(pf, assign, CFG)
        assert abs(L.value - R.value) < mpmath.mpf(10) ** -60


def test_terminating_series_exact_cutoff():
    # numerator (q^-3;q)_k kills every term past k=3; no float fuzz allowed
    t = QHTerm(rf1(("z", "q")), [(mono(1, q=-3), 1, 1), (mono(q=1), 1, -1)],
               geom=mono(z=1))
    assign = {"z": Fraction(2, 5), "q": Fraction(1, 2)}
    r = eval_series(t, assign, CFG)
    assert r.terms_used == 4 and r.tail_bound == 0
    exact = sum(eval_term(t, assign, k) for k in range(4))
    with CFG.workprec():
        ref = mpmath.mpf(exact.numerator) / exact.denominator
        assert abs(r.value - ref) < mpmath.mpf(10) ** -70


def test_terminating_denominator_is_pole():
    t = QHTerm(rf1(("z", "q")), [(mono(1, q=-3), 1, -1)], geom=mono(z=1))
    with pytest.raises(PoleError):
        eval_series(t, {"z": Fraction(1, 5), "q": Fraction(1, 2)}, CFG)


def test_bilateral_unilateralizes_at_b_equals_q():
    # 1psi1 summand with b=q: (q;q)_k denominator kills all k<0 exactly
    uni = ("a", "b", "z", "q")
    tb = QHTerm(rf1(uni), [(mono(a=1), 1, 1), (mono(b=1), 1, -1)],
                geom=mono(z=1), bilateral=True)
    tu = QHTerm(rf1(uni), [(mono(a=1), 1, 1), (mono(q=1), 1, -1)],
                geom=mono(z=1))
    assign = {"a": Fraction(1, 3), "b": Fraction(1, 2), "z": Fraction(1, 5),
              "q": Fraction(1, 2)}
    assign["b"] = assign["q"]
    vb = eval_series(tb, assign, CFG)
    vu = eval_series(tu, assign, CFG)
    assert abs(vb.value - vu.value) < mpmath.mpf(10) ** -70


def test_negate_index_preserves_bilateral_sum():
    uni = ("a", "b", "z", "q")
    t = QHTerm(rf1(uni), [(mono(a=1), 1, 1), (mono(b=1), 1, -1)],
               geom=mono(z=1), bilateral=True)
    assign = {"a": Fraction(1, 3), "b": Fraction(1, 2), "z": Fraction(1, 5),
              "q": Fraction(1, 2)}
    v1 = eval_series(t, assign, CFG)
    v2 = eval_series(negate_index(t), assign, CFG)
    assert abs(v1.value - v2.value) < mpmath.mpf(10) ** -70


def test_partial_sums_match_exact_rational_reference():
    rng = random.Random(11)
    uni = ("a", "z", "q")
    for _ in range(8):
        t = QHTerm(rf1(uni),
                   [(mono(a=1), 1, rng.choice([1, -1])), (mono(q=1), 1, -1)],
                   geom=mono(rng.choice([1, -1]), z=1),
                   quad=rng.choice([0, 1]))
        assign = {"a": Fraction(rng.randint(1, 5), 7),
                  "z": Fraction(rng.randint(1, 2), 5),
                  "q": Fraction(1, rng.choice([2, 3, 5]))}
        r = eval_series(t, assign, CFG)
        exact = sum(eval_term(t, assign, k) for k in range(120))
        with CFG.workprec():
            ref = mpmath.mpf(exact.numerator) / exact.denominator
            # 120 exact terms leave a tail below .4^120 ~ 1e-48
            assert abs(r.value - ref) < mpmath.mpf(10) ** -40


def test_precision_doubling_within_tail_bound():
    t = one_phi_zero()
    rhs = ProductForm.one(("a", "z", "q")) \
        .times_inf(mono(a=1, z=1), 1, 1).times_inf(mono(z=1), 1, -1)
    assign = {"a": Fraction(2, 7), "z": Fraction(3, 8), "q": Fraction(2, 5)}
    for obj, ev in ((t, eval_series), (rhs, eval_product)):
        lo = ev(obj, assign, PrecisionConfig(bits=128))
        hi = ev(obj, assign, PrecisionConfig(bits=256))
        with mpmath.workprec(320):
            assert abs(lo.value - hi.value) <= lo.tail_bound + mpmath.mpf(10) ** -30


def test_residual_detects_planted_error():
    t = one_phi_zero()
    good = ProductForm.one(("a", "z", "q")) \
        .times_inf(mono(a=1, z=1), 1, 1).times_inf(mono(z=1), 1, -1)
    q = Fraction(1, 2)
    bad = good.times_rational(RationalFunc.const(canonical_vars(("q",)), 1 + q))
    pts = [SamplePoint(q, {"a": Fraction(1, 4), "z": Fraction(1, 3)})]
    res_good, _ = eval_identity_residual(t, good, pts, CFG)
    res_bad, rows = eval_identity_residual(t, bad, pts, CFG)
    assert res_good < mpmath.mpf(10) ** -70
    assert mpmath.mpf(1) / 4 < res_bad < mpmath.mpf(1)
    assert rows[0]["point"]["q"] == "1/2"


def test_boundary_limit_classification():
    uni = ("a", "z", "q")
    assign = {"a": Fraction(1, 3), "z": Fraction(1, 5), "q": Fraction(1, 2)}
    # (1-Qk) * q-binomial summand -> 0
    kuni = canonical_vars(["Qk"])
    R = RationalFunc.const(kuni, 1) - RationalFunc.var(kuni, "Qk")
    assert boundary_limit_numeric(one_phi_zero(), R, 1, assign, CFG)[0] == "zero"
    # (a;q)_k/(q;q)_k -> (a;q)oo/(q;q)oo, a nonzero constant
    t = QHTerm(rf1(uni), [(mono(a=1), 1, 1), (mono(q=1), 1, -1)])
    verdict, val = boundary_limit_numeric(t, None, 1, assign, CFG)
    pf = ProductForm.one(uni).times_inf(mono(a=1), 1, 1).times_inf(mono(q=1), 1, -1)
    ref = eval_product(pf, assign, CFG)
    assert verdict == "nonzero"
    assert abs(val - ref.value) < mpmath.mpf(10) ** -50
    # growing term -> inconclusive
    t2 = QHTerm(rf1(uni), [], geom=mono(2))
    assert boundary_limit_numeric(t2, None, 1, assign, CFG)[0] == "inconclusive"
    # bilateral downward: 1psi1-type summand dies at k -> -oo when |b/az| < 1
    tb = QHTerm(rf1(("a", "b", "z", "q")),
                [(mono(a=1), 1, 1), (mono(b=1), 1, -1)],
                geom=mono(z=1), bilateral=True)
    a2 = {"a": Fraction(2, 3), "b": Fraction(1, 7), "z": Fraction(1, 2),
          "q": Fraction(1, 3)}
    assert boundary_limit_numeric(tb, None, -1, a2, CFG)[0] == "zero"


def test_tannery_domination():
    t = one_phi_zero().tag_shifts(["z"])
    assign = {"a": Fraction(1, 3), "z": Fraction(1, 5), "q": Fraction(1, 2),
              "Qn": Fraction(1)}
    assert tannery_domination_check(t, 1, assign, CFG)
    bad = dict(assign, z=Fraction(3, 2))
    assert not tannery_domination_check(t, 1, bad, CFG)
    # terminating majorant is vacuously fine
    tt = QHTerm(rf1(("z", "q")), [(mono(1, q=-2), 1, 1), (mono(q=1), 1, -1)],
                geom=mono(z=1)).tag_shifts(["z"])
    assert tannery_domination_check(tt, 1, dict(assign, z=Fraction(2, 5)), CFG)


def test_rogers_ramanujan_oracle():
    # sum q^(k^2)/(q;q)_k == 1/((q;q^5)oo (q^4;q^5)oo) at q=1/10, and the
    # second identity with numerator q^(k^2+k); the acceptance-level check
    t1 = QHTerm(rf1(("q",)), [(mono(q=1), 1, -1)], geom=mono(q=1), quad=2)
    t2 = QHTerm(rf1(("q",)), [(mono(q=1), 1, -1)], geom=mono(q=2), quad=2)
    p1 = ProductForm.one(("q",)) \
        .times_inf(mono(q=1), 5, -1).times_inf(mono(q=4), 5, -1)
    p2 = ProductForm.one(("q",)) \
        .times_inf(mono(q=2), 5, -1).times_inf(mono(q=3), 5, -1)
    pts = [SamplePoint(Fraction(1, 10), {})]
    for t, p in ((t1, p1), (t2, p2)):
        res, _ = eval_identity_residual(t, p, pts, CFG)
        assert res < mpmath.mpf(10) ** -40


def test_sample_points_deterministic_and_constrained():
    zc = RationalFunc.var(canonical_vars(["z"]), "z")
    rel = [("c", RationalFunc.var(canonical_vars(["a", "b", "q"]), "a")
            * RationalFunc.var(canonical_vars(["a", "b", "q"]), "b")
            * RationalFunc.var(canonical_vars(["a", "b", "q"]), "q"))]
    p1 = sample_points(["a", "b", "z"], 6, seed=5, constraints=[zc], relations=rel)
    p2 = sample_points(["a", "b", "z"], 6, seed=5, constraints=[zc], relations=rel)
    assert [repr(x) for x in p1] == [repr(x) for x in p2]
    for pt in p1:
        assert abs(pt.params["z"]) < 1
        assert pt.params["c"] == pt.params["a"] * pt.params["b"] * pt.q
        assert all(v != 0 for v in pt.params.values())
    # distinct points
    assert len({repr(x) for x in p1}) == 6


def test_sample_points_unsatisfiable_errors():
    # |a| < 1 and |1/a| < 1 cannot both hold
    a = RationalFunc.var(canonical_vars(["a"]), "a")
    with pytest.raises(PoleError):
        sample_points(["a"], 2, seed=1, constraints=[a, a.inverse()],
                      max_tries=200)
