import math
from fractions import Fraction

import mpmath
import pytest

from repzeta import arith, repcount as rc, zeta
from repzeta.errors import (
    ConvergenceDomainError,
    InsufficientDataError,
    ParameterError,
    PoleError,
)


def test_term_stream_trivial():
    st = zeta.term_stream(rc.trivial(), 9)
    assert [(r.p, r.j, r.n) for r in st] == [
        (2, 1, 1),
        (3, 1, 1),
        (2, 2, 1),
        (5, 1, 1),
        (7, 1, 1),
        (2, 3, 1),
        (3, 2, 1),
    ]
    assert all(r.count == 1 and r.weight == 1 for r in st)


def test_term_stream_matrix_algebra():
    # strictly below 16 only the base-field term is present; at 16 the j = 2
    # term p^(nj) = 16 enters as well
    assert zeta.term_stream(rc.matrix_algebra(2, 2, 1), 15) == [
        zeta.TermRecord(2, 1, 2, 1, 3)
    ]
    assert zeta.term_stream(rc.matrix_algebra(2, 2, 1), 16) == [
        zeta.TermRecord(2, 1, 2, 1, 3),
        zeta.TermRecord(2, 2, 2, 1, 5),
    ]


def test_term_stream_lamplighter_aggregates():
    st = [r for r in zeta.term_stream(rc.lamplighter(2), 27) if r.p == 3]
    assert (3, 1, 1, 4, 1) in [tuple(r) for r in st]
    assert (3, 1, 2, 2, 4) in [tuple(r) for r in st]
    assert (3, 2, 1, 16, 1) in [tuple(r) for r in st]
    assert (3, 1, 3, 4, 13) in [tuple(r) for r in st]
    assert (3, 3, 1, 52, 1) in [tuple(r) for r in st]
    # degree-m aggregates: sum over nj = m of (m/j) count weight = (2p)^m - 2^m
    u = zeta.local_log_coeffs(rc.lamplighter(2), 3, 3)
    assert u == [(6) ** m - 2**m for m in (1, 2, 3)]


def test_log_zeta_riemann_anchor():
    res = zeta.log_zeta_truncated(rc.trivial(), 2.0, 10**6, 0.0)
    target = math.log(math.pi**2 / 6)
    assert abs(res.value - target) <= 1e-6 + res.tail_bound
    assert not res.diverging


def test_log_zeta_zhat_closed_form():
    res = zeta.log_zeta_truncated(rc.zhat(), 3.0, 10**5, 1.0)
    target = float(mpmath.log(mpmath.zeta(2) / mpmath.zeta(3)))
    assert abs(res.value - target) <= res.tail_bound
    assert res.tail_bound < 1e-3


def test_log_zeta_monotonicity():
    v1 = zeta.log_zeta_truncated(rc.zhat(), 3.0, 10**3).value
    v2 = zeta.log_zeta_truncated(rc.zhat(), 3.0, 10**4).value
    v3 = zeta.log_zeta_truncated(rc.zhat(), 3.5, 10**4).value
    assert v1 <= v2
    assert v3 < v2


def test_log_zeta_divergence_paths():
    with pytest.raises(ConvergenceDomainError):
        zeta.log_zeta_truncated(rc.zhat(), 1.5, 10**4)
    res = zeta.log_zeta_truncated(rc.zhat(), 1.5, 10**5, allow_divergent=True)
    assert res.diverging
    assert res.tail_bound == math.inf
    # partial sums grow without bound below the abscissa
    r1 = zeta.log_zeta_truncated(rc.zhat(), 1.5, 10**4, allow_divergent=True)
    assert res.value > r1.value


def test_local_log_coeffs_examples():
    assert zeta.local_log_coeffs(rc.lamplighter(2), 3, 4) == [4, 32, 208, 1280]
    assert zeta.local_log_coeffs(rc.zhat(), 2, 3) == [1, 3, 7]
    assert zeta.local_log_coeffs(rc.trivial(), 5, 3) == [1, 1, 1]


def test_local_log_additivity_for_ring_products():
    a, b = rc.zhat(), rc.lamplighter(2)
    prod = rc.ring_product(a, b)
    for p in (2, 3, 5):
        ua = zeta.local_log_coeffs(a, p, 12)
        ub = zeta.local_log_coeffs(b, p, 12)
        up = zeta.local_log_coeffs(prod, p, 12)
        assert up == [x + y for x, y in zip(ua, ub)]


def test_zhat_power_closed_form_matches_counters():
    for r in (1, 2, 3):
        pre = zeta.preset("zhat_pow", r=r)
        spec = rc.zhat_power(r)
        for p in (2, 3, 5, 7, 11, 13):
            assert zeta.counter_local_factor(spec, p, 10) == zeta.closed_form_local_factor(
                pre.expr, p, 10
            )


def test_cp_preset_matches_counters_at_good_primes():
    for p0 in (2, 3, 5):
        pre = zeta.preset("cp", p=p0)
        spec = rc.cyclic(p0)
        for p in (2, 3, 5, 7, 11, 13):
            if p in pre.excluded_primes:
                continue
            assert zeta.counter_local_factor(spec, p, 8) == zeta.closed_form_local_factor(
                pre.expr, p, 8
            ), (p0, p)


def test_va_presets_match_counters_at_good_primes():
    for name, spec in (
        ("zwrc2", rc.virtually_abelian(preset="zwrc2")),
        ("dinf", rc.virtually_abelian(preset="dinf")),
        ("bs1m1", rc.virtually_abelian(preset="bs1m1")),
    ):
        pre = zeta.preset(name)
        for p in (3, 5, 7, 11):
            assert zeta.counter_local_factor(spec, p, 10) == zeta.closed_form_local_factor(
                pre.expr, p, 10
            ), (name, p)
        # the excluded prime genuinely differs
        assert zeta.counter_local_factor(spec, 2, 8) != zeta.closed_form_local_factor(
            pre.expr, 2, 8
        )


def test_lamplighter_presets_match_counters_everywhere():
    for a in (2, 3):
        pre = zeta.preset(f"lamplighter{a}")
        spec = rc.lamplighter(a)
        for p in (2, 3, 5, 7, 11, 13):
            assert zeta.counter_local_factor(spec, p, 10) == zeta.closed_form_local_factor(
                pre.expr, p, 10
            ), (a, p)


def test_detect_rational_examples():
    res = zeta.detect_rational_local_factor([4, 32, 208, 1280, 7744, 46592, 279808, 1679360])
    assert res.status == "integral"
    assert res.alphas == (6,) and res.betas == (2,)
    res2 = zeta.detect_rational_local_factor([1, 3, 7, 15, 31, 63])
    assert res2.alphas == (2,) and res2.betas == (1,)
    res3 = zeta.detect_rational_local_factor([1] * 8)
    assert res3.alphas == (1,) and res3.betas == ()


def test_detect_round_trip_identity():
    # exp of the counter log-series equals the series of the detected factor
    for spec, p in [
        (rc.lamplighter(2), 3),
        (rc.lamplighter(2), 5),
        (rc.zhat(), 2),
        (rc.zhat_power(2), 3),
        (rc.virtually_abelian(preset="zwrc2"), 5),
        (rc.virtually_abelian(preset="dinf"), 3),
    ]:
        u = zeta.local_log_coeffs(spec, p, 12)
        det = zeta.detect_rational_local_factor(u)
        assert det.status in ("integral", "non_integral_roots")
        assert det.reproduces(u)
        series = zeta.series_exp([Fraction(x, m + 1) for m, x in enumerate(u)], 12)
        direct = zeta.counter_local_factor(spec, p, 12)
        assert series == direct


def test_detect_insufficient_data():
    with pytest.raises(InsufficientDataError):
        zeta.detect_rational_local_factor([1, 2])


def test_detect_failure_reports_hankel_ranks():
    eta = zeta.preset("eta_zwrc2")
    u = zeta.expr_local_u(eta.expr, 3, 12)
    det = zeta.detect_rational_local_factor(u, 6)
    assert det.status == "no_recurrence"
    assert "hankel_ranks" in det.diagnostics


def test_eval_closed_form_zeta2():
    val = zeta.eval_closed_form(zeta.ZetaAtom(0), 2.0, 10**6)
    assert val == pytest.approx(math.pi**2 / 6, abs=1e-6)


def test_eval_sharp_definition_unrolled():
    e = zeta.Sharp(2, zeta.ZetaAtom(0))
    for s in (1.3, 2.0, 2.7):
        direct = zeta.eval_closed_form(e, s, 10**4)
        prod = zeta.eval_closed_form(zeta.ZetaAtom(0), 2 * s, 10**4) * zeta.eval_closed_form(
            zeta.ZetaAtom(0), 2 * s - 1, 10**4
        )
        assert direct == pytest.approx(prod, rel=1e-10)


def test_sharp_never_changes_value():
    import numpy as np

    rng = np.random.Generator(np.random.Philox(17))
    child = zeta.ZetaAtom(0)
    for n in (2, 3):
        e = zeta.Sharp(n, child)
        for _ in range(20):
            s = float(rng.uniform(1.2, 3.0))
            direct = zeta.eval_closed_form(e, s, 2000)
            prod = 1.0
            for i in range(n):
                prod *= zeta.eval_closed_form(child, n * s - i, 2000)
            assert direct == pytest.approx(prod, rel=1e-10)


def test_dedekind_local_data():
    gauss = zeta.DedekindAtom(4, ())
    assert gauss.local_data(5) == (1, 2)
    assert gauss.local_data(3) == (2, 1)
    assert gauss.local_data(2) is None
    # quadratic field inside the 5th cyclotomic: subgroup generated by -1
    quad = zeta.DedekindAtom(5, (4,))
    assert quad.local_data(11) == (1, 2)  # 11 = 1 mod 5
    assert quad.local_data(2) == (2, 1)  # 2 has order 4 mod 5, order 2 in the quotient


def test_eval_pole_proximity():
    with pytest.raises(PoleError):
        zeta.eval_closed_form(zeta.ZetaAtom(0), 1.0, 100)
    with pytest.raises(PoleError):
        zeta.eval_closed_form(zeta.ZetaAtom(1), 2.0, 100)


def test_rational_factor_validation():
    with pytest.raises(ParameterError):
        zeta.RationalFactor(2, 1, 1, 1)  # needs a > b
    with pytest.raises(ParameterError):
        zeta.RationalFactor(1, 2, 0, 1)
    fac = zeta.RationalFactor(2, 1, 0, 1)
    assert zeta.eval_closed_form(fac, 2.0, 10) == pytest.approx(0.75)
    # base mismatch contributes a constant series 1
    assert zeta.closed_form_local_factor(fac, 3, 5) == [Fraction(1)] + [Fraction(0)] * 5


def test_power_half_integer_guard():
    with pytest.raises(ParameterError):
        zeta.Power(zeta.ZetaAtom(0), Fraction(1, 2))
    ok = zeta.Power(zeta.ZetaAtom(0), Fraction(1, 2), allow_half=True)
    assert ok.exponent == Fraction(1, 2)


def test_expr_parse_round_trip():
    exprs = [
        "(product (zeta 1) (power (zeta 0) -1))",
        "(sharp 3 (zeta 0))",
        "(ratfac 2 1 0 1)",
        "(dedekind 4 (h))",
        "(dedekind 8 (h 3 5))",
        "(lamp 2)",
        "(zeta 2 3)",
        "(power (zeta 3 2) 1/2)",
    ]
    for text in exprs:
        e = zeta.parse_expr(text)
        assert zeta.format_expr(e) == text
        assert zeta.parse_expr(zeta.format_expr(e)) == e
    for preset_name in ("s4", "zwrc2", "dinf", "zwrc3", "bs1m1", "lamplighter2", "eta_zwrc2"):
        pre = zeta.preset(preset_name)
        assert zeta.parse_expr(zeta.format_expr(pre.expr)) == pre.expr


def test_parse_errors():
    with pytest.raises(ParameterError):
        zeta.parse_expr("(zeta )")
    with pytest.raises(ParameterError):
        zeta.parse_expr("(unknown 1)")
    with pytest.raises(ParameterError):
        zeta.parse_expr("(zeta 1) trailing")


def test_matrix_algebra_zeta_rational():
    # M_1(F_q): zeta(s) = (1 - q^{-s})^{-1}
    assert zeta.matrix_algebra_zeta_rational(1, 5, 1, 2) == Fraction(25, 24)
    assert 1 / zeta.matrix_algebra_zeta_rational(2, 3, 1, 1) == Fraction(16, 27)


def test_estimate_abscissa_small():
    est = zeta.estimate_abscissa(rc.zhat(), 10**5)
    assert est.value == pytest.approx(2.0, abs=0.15)
    assert est.samples >= 8
    with pytest.raises(InsufficientDataError):
        zeta.estimate_abscissa(rc.trivial(), 10, samples=4)
    with pytest.raises(ParameterError):
        zeta.estimate_abscissa(rc.zhat(), 100, window=(0.9, 0.5))


def test_audit_default_table_clean():
    entries, relations = zeta.default_audit_table()
    assert zeta.abscissa_bound_audit(entries, relations) == []


def test_audit_flags_violations():
    entries = {
        "a": zeta.AuditEntry("a", 3.0),
        "b": zeta.AuditEntry("b", 1.0),
    }
    bad = zeta.abscissa_bound_audit(entries, [{"kind": "quotient", "sub": "a", "sup": "b"}])
    assert len(bad) == 1 and bad[0].slack < 0
    ok = zeta.abscissa_bound_audit(entries, [{"kind": "quotient", "sub": "b", "sup": "a"}])
    assert ok == []
    fin = zeta.abscissa_bound_audit(
        {"c": zeta.AuditEntry("c", 1.02, tol=0.05)}, [{"kind": "finite", "G": "c"}]
    )
    assert fin == []


def test_free_pro_p_ratio_slack_shrinks():
    s2 = zeta.free_pro_p_ratio_slack(3, 2, 3)
    s5 = zeta.free_pro_p_ratio_slack(3, 5, 3)
    s20 = zeta.free_pro_p_ratio_slack(3, 20, 3)
    assert s2 > s5 > s20 > 0
    assert s20 < 0.15
