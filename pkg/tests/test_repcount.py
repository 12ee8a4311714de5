import math
from fractions import Fraction
from itertools import product

import pytest

from repzeta import arith, repcount as rc, wedderburn as wd
from repzeta.errors import (
    CapabilityError,
    CapExceededError,
    ParameterError,
    UnsupportedSpecError,
)

EXACT_FAMILIES = [
    rc.trivial(),
    rc.zhat(),
    rc.zhat_power(2),
    rc.zhat_power(3),
    rc.zp_power(3, 2),
    rc.zp_power(2, 1),
    rc.cyclic(2),
    rc.cyclic(6),
    rc.finite_abelian((2, 4)),
    rc.matrix_algebra(2, 2, 1),
    rc.matrix_algebra(2, 2, 2),
    rc.lamplighter(2),
    rc.lamplighter(3),
    rc.virtually_abelian(preset="zwrc2"),
    rc.virtually_abelian(preset="dinf"),
    rc.virtually_abelian(preset="bs1m1"),
    rc.virtually_abelian(preset="zwrc3"),
    rc.sl2_product(1),
    rc.group_product(rc.zhat(), rc.cyclic(2)),
    rc.ring_product(rc.zhat(), rc.matrix_algebra(2, 3, 1)),
]


def test_basic_counts():
    assert rc.count_abs_irr(rc.zhat(), (2, 3, 1)).value == 7
    assert rc.count_abs_irr(rc.matrix_algebra(2, 2, 2), (2, 4, 2)).value == 2
    assert rc.count_abs_irr(rc.matrix_algebra(2, 2, 2), (2, 3, 2)).value == 0  # k must divide j
    assert rc.count_abs_irr(rc.lamplighter(2), (3, 1, 1)).value == 4
    assert rc.count_abs_irr(rc.virtually_abelian(preset="zwrc2"), (5, 1, 2)).value == 16
    assert rc.count_abs_irr(rc.zp_power(3, 2), (2, 2, 1)).value == 9
    assert rc.count_abs_irr(rc.trivial(), (7, 1, 2)).value == 0
    assert rc.count_abs_irr(rc.trivial(), (7, 1, 1)).value == 1


def test_lamplighter_stream_counts():
    # q = 3 data: (q-1) F(n)/n with F(1), F(2), F(3) = 2, 2, 6
    lam = rc.lamplighter(2)
    assert rc.count_abs_irr(lam, (3, 1, 1)).value == 4
    assert rc.count_abs_irr(lam, (3, 1, 2)).value == 2
    assert rc.count_abs_irr(lam, (3, 1, 3)).value == 4
    assert rc.count_abs_irr(lam, (3, 2, 1)).value == 16
    assert rc.count_abs_irr(lam, (3, 3, 1)).value == 52
    # even q: one-dimensional only
    assert rc.count_abs_irr(lam, (2, 2, 1)).value == 3
    assert rc.count_abs_irr(lam, (2, 2, 2)).value == 0


def test_zwrc2_counts():
    zw = rc.virtually_abelian(preset="zwrc2")
    assert rc.count_abs_irr(zw, (7, 1, 1)).value == 12  # 2 (q - 1)
    assert rc.count_abs_irr(zw, (2, 1, 1)).value == 1  # q - 1 for even q
    assert rc.count_abs_irr(zw, (5, 1, 2)).value == 16  # q^2 - 2q + 1
    assert rc.count_abs_irr(zw, (5, 1, 3)).value == 0


def test_convolve_product():
    # two rank-one factors give (q-1)^2 at dimension 1
    assert rc.convolve_product(rc.zhat(), rc.zhat(), (3, 1, 1)).value == 4
    # convolution identity
    for n in (1, 2, 3, 4):
        a = rc.count_abs_irr(rc.lamplighter(2), (3, 1, n)).value
        assert rc.convolve_product(rc.trivial(), rc.lamplighter(2), (3, 1, n)).value == a
    # both matrix-algebra factors forced to dimension 2 at n = 4
    ma = rc.matrix_algebra(2, 2, 1)
    got = rc.convolve_product(ma, ma, (2, 1, 4)).value
    brute = sum(
        rc.count_abs_irr(ma, (2, 1, d)).value * rc.count_abs_irr(ma, (2, 1, 4 // d)).value
        for d in (1, 2, 4)
    )
    assert got == brute == 1


def test_dirichlet_convolution_commutes_and_associates():
    specs = [rc.zhat(), rc.cyclic(6), rc.matrix_algebra(2, 2, 1), rc.lamplighter(2)]
    queries = [(2, 1, n) for n in (1, 2, 4, 6)] + [(3, 2, n) for n in (1, 2, 6)]
    for a, b, c in [(0, 1, 2), (1, 2, 3), (0, 2, 3)]:
        A, B, C = specs[a], specs[b], specs[c]
        for qr in queries:
            assert rc.convolve_product(A, B, qr).value == rc.convolve_product(B, A, qr).value
            lhs = rc.convolve_product(rc.group_product(A, B), C, qr).value
            rhs = rc.convolve_product(A, rc.group_product(B, C), qr).value
            assert lhs == rhs


def brute_force_period_count(n):
    count = 0
    for v in product((1, -1), repeat=n):
        shifts = {v[i:] + v[:i] for i in range(n)}
        if len(shifts) == n:
            count += 1
    return count


def test_periodic_orbit_count_small():
    assert rc.periodic_orbit_count(2, 1) == 2
    assert rc.periodic_orbit_count(2, 3) == 6
    assert rc.periodic_orbit_count(2, 4) == 12
    assert sum(rc.periodic_orbit_count(2, d) for d in (1, 2, 4)) == 16


def test_periodic_orbit_count_brute_force():
    for n in range(1, 17):
        assert rc.periodic_orbit_count(2, n) == brute_force_period_count(n)


def test_periodic_orbit_count_inversion():
    for n in range(1, 25):
        assert sum(rc.periodic_orbit_count(2, d) for d in arith.divisors(n)) == 2**n
        assert sum(rc.periodic_orbit_count(3, d) for d in arith.divisors(n)) == 3**n


def test_lamplighter_oracle_matches_closed_form():
    for q in (3, 5, 7, 9, 11, 13, 25, 27, 49):
        for n in range(1, 13):
            oracle = rc.lamplighter_orbit_oracle(2, q, n)
            closed = rc.count_abs_irr(rc.lamplighter(2), arith.is_prime_power(q)[:2] + (n,))
            assert oracle == closed.value, (q, n)


def test_lamplighter3_oracle_examples():
    assert rc.lamplighter_orbit_oracle(3, 7, 1) == 18  # (q-1) gcd-free orbit count
    assert rc.lamplighter_orbit_oracle(3, 2, 2) == 1
    for q in (2, 4, 5, 7, 8, 13):
        pp = arith.is_prime_power(q)
        for n in range(1, 11):
            oracle = rc.lamplighter_orbit_oracle(3, q, n)
            closed = rc.count_abs_irr(rc.lamplighter(3), (pp.p, pp.j, n))
            assert oracle == closed.value, (q, n)


def test_lamplighter_oracle_cap():
    with pytest.raises(CapExceededError):
        rc.lamplighter_orbit_oracle(3, 7, 25)


def test_va_oracle_matches_closed_forms():
    for preset in ("zwrc2", "dinf", "bs1m1"):
        spec = rc.virtually_abelian(preset=preset)
        for q in (3, 5, 7, 9, 11, 13):
            pp = arith.is_prime_power(q)
            for n in (1, 2):
                oracle = rc.virtually_abelian_orbit_oracle(spec, q, n)
                closed = rc.count_abs_irr(spec, (pp.p, pp.j, n)).value
                assert oracle == closed, (preset, q, n)


def test_va_oracle_examples():
    assert rc.virtually_abelian_orbit_oracle(rc.virtually_abelian(preset="zwrc2"), 5, 2) == 16
    assert rc.virtually_abelian_orbit_oracle(rc.virtually_abelian(preset="zwrc2"), 7, 1) == 12
    assert rc.virtually_abelian_orbit_oracle(rc.virtually_abelian(preset="dinf"), 5, 1) == 4


def test_va_oracle_rank_cap():
    with pytest.raises(CapExceededError):
        rc.virtually_abelian_orbit_oracle(rc.virtually_abelian(preset="zwrc3"), 5, 3)


def test_va_generic_spec_via_oracle():
    # explicit action matrices equal the preset closed form
    spec = rc.virtually_abelian(rank=2, action=[[[0, 1], [1, 0]]])
    for q in (3, 5, 9):
        pp = arith.is_prime_power(q)
        for n in (1, 2):
            want = rc.count_abs_irr(rc.virtually_abelian(preset="zwrc2"), (pp.p, pp.j, n)).value
            assert rc.count_abs_irr(spec, (pp.p, pp.j, n)).value == want


def brute_va_class_count(mats, q, e_list, n):
    """Elementwise enumeration of Frobenius-stable free character orbits."""
    from math import lcm

    E = 1
    for e in e_list:
        E = lcm(E, e)
    N = q**E - 1
    d = len(mats[0])

    def act(M, c):
        return tuple(sum(M[i][j] * c[j] for j in range(d)) % N for i in range(d))

    seen = set()
    count = 0
    for c in product(range(N), repeat=d):
        if c in seen:
            continue
        orb = {c}
        frontier = [c]
        while frontier:
            x = frontier.pop()
            for M in mats:
                y = act(M, x)
                if y not in orb:
                    orb.add(y)
                    frontier.append(y)
        seen |= orb
        if len(orb) != n:
            continue
        if tuple((q * ci) % N for ci in c) in orb:
            count += 1
    return count


def test_zwrc3_closed_form_against_enumeration():
    shift = ((0, 1, 0), (0, 0, 1), (1, 0, 0))
    shift2 = ((0, 0, 1), (1, 0, 0), (0, 1, 0))
    ident = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    spec = rc.virtually_abelian(preset="zwrc3")
    for q in (2, 4, 5):
        pp = arith.is_prime_power(q)
        brute = brute_va_class_count([ident, shift, shift2], q, [1, 3], 3)
        assert rc.count_abs_irr(spec, (pp.p, pp.j, 3)).value == brute == q * q * (q - 1)
    # dimension 1 is the abelianization count
    for q in (2, 4, 5, 7, 13):
        pp = arith.is_prime_power(q)
        assert rc.count_abs_irr(spec, (pp.p, pp.j, 1)).value == (q - 1) * math.gcd(3, q - 1)


def test_sl2_product_counts():
    spec = rc.sl2_product(1)
    # characteristic stream: floor(q) copies, one representation per dimension
    assert rc.count_abs_irr(spec, (5, 1, 1)).value == 1
    assert rc.count_abs_irr(spec, (5, 1, 2)).value == 5  # choose the copy carrying dim 2
    assert rc.count_abs_irr(spec, (5, 2, 2)).value == 5  # independent of j
    assert rc.count_abs_irr(spec, (5, 1, 4)).value == 5 + math.comb(5, 2)  # 4 = 4 or 2*2
    assert rc.count_abs_irr(spec, (5, 1, 7)).value == 0  # 7 > q
    assert rc.count_abs_irr(spec, (2, 1, 2)).value == 0  # no copies at p = 2
    assert rc.count_abs_irr(spec, (3, 1, 1)).value == 1
    # envelope mode is tagged
    env = rc.sl2_product_upper_envelope(spec, rc.CountQuery(5, 1, 2))
    assert env.exactness == "upper_bound" and env.value >= 5


def test_free_pro_p_bounds():
    spec = rc.free_pro_p(3, 2)
    assert rc.count_abs_irr(spec, (7, 1, 1)) == (9, "exact")  # w_3(6)^2
    assert rc.count_abs_irr(spec, (7, 1, 2)).value == 0  # not a 3-power
    assert rc.count_abs_irr(spec, (2, 1, 3)).value == 0  # 3 does not divide q-1
    res = rc.count_abs_irr(spec, (7, 1, 3), mode="bound")
    assert res.exactness == "upper_bound"
    assert res.value == arith.p_part(3, 6) ** (3 * 1 + 1) * 3  # w^{n(r-1)+1} p^{(n-1)/(p-1)(r-1)}
    with pytest.raises(CapabilityError):
        rc.count_abs_irr(spec, (7, 1, 3))


def test_finite_group_dispatch():
    s4 = rc.finite_group(name="s4", override=wd.builtin_s4_override())
    assert rc.count_abs_irr(s4, (5, 1, 2)).value == 1
    assert rc.count_abs_irr(s4, (5, 1, 3)).value == 2
    assert rc.count_abs_irr(s4, (2, 1, 1)).value == 1  # override data
    assert rc.count_abs_irr(s4, (3, 1, 1)).value == 2
    s4_bare = rc.finite_group(name="s4")
    with pytest.raises(CapabilityError):
        rc.count_abs_irr(s4_bare, (2, 1, 1))


def test_count_irr_examples():
    assert rc.count_irr(rc.zhat(), (2, 1, 1)).value == 1
    assert rc.count_irr(rc.zhat(), (2, 1, 2)).value == 1  # (3 - 1)/2 Frobenius orbits
    assert rc.count_irr(rc.trivial(), (5, 2, 1)).value == 1


def test_count_irr_dominates_abs_irr():
    queries = [(p, j, n) for p in (2, 3, 5) for j in (1, 2) for n in range(1, 9) if p**j <= 32]
    for spec in EXACT_FAMILIES:
        for qr in queries:
            irr = rc.count_irr(spec, qr).value
            abs_irr = rc.count_abs_irr(spec, qr).value
            assert irr >= abs_irr, (spec.family, qr)


def test_uberg_envelope():
    # counts <= 2 q^(c n) with the documented family constant
    for spec in EXACT_FAMILIES:
        c = rc.default_uberg_c(spec)
        for p, j in ((2, 1), (2, 2), (3, 1), (5, 1), (7, 1), (2, 5), (3, 3), (61, 1)):
            q = p**j
            if q > 64:
                continue
            for n in range(1, 9):
                cnt = rc.count_abs_irr(spec, (p, j, n)).value
                assert cnt <= 2 * q ** (c * n) + 1e-9, (spec.family, p, j, n, cnt)


def test_spec_serialization_round_trip():
    for spec in EXACT_FAMILIES + [rc.free_pro_p(2, 3), rc.finite_group(name="s3")]:
        text = rc.to_json(spec)
        again = rc.from_json(text)
        assert again == spec
        assert rc.to_json(again) == text


def test_spec_serialization_rejects_garbage():
    with pytest.raises(ParameterError):
        rc.from_json("{not json")
    with pytest.raises(ParameterError):
        rc.from_json('{"family": "no_such_family", "params": {}}')
