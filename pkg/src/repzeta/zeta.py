"""Euler-product assembly and analysis of representation zeta functions.

The defining series is, over primes p, extension degrees j and dimensions n,

    log zeta(s) = sum r*(p, j, n) / j * p^(-s n j) * (p^(jn) - 1)/(p^j - 1),

with r* the absolutely irreducible counts from ``repcount``.  This module
turns counter output into term streams, truncated values with certified
tail bounds, exact local log coefficients u_m, detected rational local
factors, closed-form expression evaluations and abscissa estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
import sympy

from . import arith, repcount
from .errors import (
    CapabilityError,
    ConvergenceDomainError,
    InsufficientDataError,
    ParameterError,
    PoleError,
)

_MOD = "zeta"

# counts of every documented family satisfy r*(q, n) <= KAPPA * q^(c n)
_KAPPA = 2.0


class TermRecord(NamedTuple):
    p: int
    j: int
    n: int
    count: int
    weight: int  # (p^(jn) - 1)/(p^j - 1), the point count of P^(n-1)(F_{p^j})


def _iter_terms(spec: repcount.GroupSpec, X: int):
    """Yield (p, j, n, count, weight) for all p^(nj) <= X, unsorted."""
    if X < 2:
        raise ParameterError(_MOD, "bad-argument", f"X must be >= 2, got {X}")
    count_fn = repcount.exact_count_function(spec)
    for p, j, q in arith.sieve_prime_powers(X):
        key = q
        n = 1
        while key <= X:
            c = count_fn(p, j, n, q)
            if c:
                yield p, j, n, c, (q**n - 1) // (q - 1)
            n += 1
            key *= q


def term_stream(spec: repcount.GroupSpec, X: int) -> list[TermRecord]:
    """All nonzero terms with p^(nj) <= X, sorted by p^(nj) then (p, j, n)."""
    recs = [TermRecord(*t) for t in _iter_terms(spec, X)]
    recs.sort(key=lambda r: (r.p ** (r.n * r.j), r.p, r.j, r.n))
    return recs


class LogZetaResult(NamedTuple):
    value: float
    tail_bound: float
    diverging: bool


@lru_cache(maxsize=8)
def _prime_power_harmonic(X: int) -> float:
    """sum over prime powers q <= X of 1/q (enters the refined tail bound)."""
    return float(sum(1.0 / r.q for r in arith.sieve_prime_powers(X)))


def tail_bound(s: float, X: int, uberg_c: float) -> float:
    """Certified bound on the discarded tail, from counts <= KAPPA q^(cn).

    Coarse integral comparison KAPPA X^(c+2-s)/(s-c-2) for s > c+2; the
    refinement 2 KAPPA X^(-t) (M(X) + 1/t) / (1 - 2^(-t)) with t = s-c-1 and
    M(X) the prime-power harmonic sum is valid on all of s > c+1.
    """
    t = s - uberg_c - 1.0
    if t <= 0:
        return math.inf
    refined = 2.0 * _KAPPA * X ** (-t) * (_prime_power_harmonic(X) + 1.0 / t) / (1.0 - 2.0**-t)
    if s > uberg_c + 2.0:
        coarse = _KAPPA * X ** (uberg_c + 2.0 - s) / (s - uberg_c - 2.0)
        return min(refined, coarse)
    return refined


def log_zeta_truncated(
    spec: repcount.GroupSpec,
    s: float,
    X: int,
    uberg_c: Optional[float] = None,
    allow_divergent: bool = False,
) -> LogZetaResult:
    """Truncated log zeta value with a tail bound.

    Outside the certified region (s <= uberg_c + 1) the call raises unless
    ``allow_divergent`` is set, in which case the partial sum is returned
    with an infinite tail bound and a growth-monitor divergence flag.
    """
    if uberg_c is None:
        uberg_c = repcount.default_uberg_c(spec)
    certified = s > uberg_c + 1.0
    if not certified and not allow_divergent:
        raise ConvergenceDomainError(
            _MOD,
            "divergence-region",
            f"s={s} is not above uberg_c + 1 = {uberg_c + 1}; no tail bound exists",
        )
    terms = []
    head = []  # terms with key <= X^0.9, for the growth monitor
    cut = X**0.9
    logs = math.log
    for p, j, n, c, w in _iter_terms(spec, X):
        val = math.exp(logs(c) + logs(w) - s * n * j * logs(p) - logs(j))
        terms.append(val)
        if p ** (n * j) <= cut:
            head.append(val)
    value = math.fsum(terms)
    head_value = math.fsum(head)
    diverging = value > 0 and (value - head_value) > 0.02 * value and not certified
    return LogZetaResult(value, tail_bound(s, X, uberg_c), diverging)


def local_log_coeffs(spec: repcount.GroupSpec, p: int, D: int) -> list[int]:
    """u_m = m * [p^(-sm)] log zeta_p = sum_{nj=m} (m/j) count weight, exact."""
    if not arith.is_prime(p):
        raise ParameterError(_MOD, "not-prime", f"p={p} is not prime")
    if D < 1:
        raise ParameterError(_MOD, "bad-argument", f"D must be >= 1, got {D}")
    out = [0] * (D + 1)
    for j in range(1, D + 1):
        q = p**j
        for n in range(1, D // j + 1):
            c = repcount.count_abs_irr(spec, repcount.CountQuery(p, j, n)).value
            if c:
                m = n * j
                out[m] += (m // j) * c * ((q**n - 1) // (q - 1))
    return out[1:]


# --------------------------------------------------------------------------
# rational local factors (linear recurrence detection)


@dataclass(frozen=True)
class RationalLocalFactor:
    """Z(T) = numerator/denominator with integer coefficients; when every
    inverse root is an integer, alphas/betas list them with multiplicity and
    u_m = sum alpha^m - sum beta^m."""

    alphas: tuple = ()
    betas: tuple = ()
    numerator: tuple = (1,)
    denominator: tuple = (1,)
    status: str = "integral"  # "integral" | "non_integral_roots" | "no_recurrence"
    order: int = 0
    char_poly: tuple = ()  # monic, descending-degree integer coefficients
    diagnostics: dict = field(default_factory=dict)

    def reproduces(self, u) -> bool:
        got = power_sum_sequence(self.numerator, self.denominator, len(u))
        return list(got) == list(u)


def _berlekamp_massey(seq):
    """Minimal LFSR over Q: returns c with s_m = sum c_i s_{m-i}."""
    s = [Fraction(x) for x in seq]
    C, B = [Fraction(1)], [Fraction(1)]
    L, m, b = 0, 1, Fraction(1)
    for i in range(len(s)):
        d = s[i]
        for k in range(1, L + 1):
            d += C[k] * s[i - k]
        if d == 0:
            m += 1
        elif 2 * L <= i:
            T = C[:]
            coef = d / b
            C = C + [Fraction(0)] * (len(B) + m - len(C))
            for k, bk in enumerate(B):
                C[k + m] -= coef * bk
            L, B, b, m = i + 1 - L, T, d, 1
        else:
            coef = d / b
            C = C + [Fraction(0)] * (len(B) + m - len(C))
            for k, bk in enumerate(B):
                C[k + m] -= coef * bk
            m += 1
    return [-c for c in C[1 : L + 1]], L


def _hankel_ranks(u, kmax):
    ranks = []
    for k in range(1, kmax + 1):
        if 2 * k - 1 > len(u):
            break
        rows = [[Fraction(u[i + j]) for j in range(k)] for i in range(len(u) - k + 1)]
        r = 0
        for c in range(k):
            piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            for i in range(len(rows)):
                if i != r and rows[i][c] != 0:
                    f = rows[i][c] / rows[r][c]
                    rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
            r += 1
        ranks.append(r)
    return ranks


def _inverse_root_power_sums(poly, length):
    """Power sums of the inverse roots of poly(T) with poly(0) = 1: if
    poly = prod (1 - rho T) then log poly = -sum (sum rho^m) T^m / m."""
    lg = _poly_log_series(poly, length)
    return [-(m + 1) * lg[m] for m in range(length)]


def _factor_power_sums(fac_coeffs, length):
    """Power sums of the roots of a monic integer polynomial given by
    descending coefficients [1, a_{d-1}, ..., a_0]: the same list read as
    ascending T-coefficients is T^deg f(1/T) = prod(1 - root T)."""
    lead = fac_coeffs[0]
    poly = [Fraction(c, lead) for c in fac_coeffs]
    return _inverse_root_power_sums(poly, length)


def power_sum_sequence(numerator, denominator, length):
    """u_m of Z = N/D with N = prod(1 - beta T), D = prod(1 - alpha T):
    u_m = sum alpha^m - sum beta^m."""
    pd = _inverse_root_power_sums(list(denominator), length)
    pn = _inverse_root_power_sums(list(numerator), length)
    seq = [pd[i] - pn[i] for i in range(length)]
    for x in seq:
        if Fraction(x).denominator != 1:
            raise ParameterError(_MOD, "bad-factor", "non-integer power sums")
    return [int(x) for x in seq]


def detect_rational_local_factor(u, max_order: Optional[int] = None) -> RationalLocalFactor:
    """Recover a rational function Z(T) whose log-derivative reproduces u.

    The series Z = exp(sum u_m T^m / m) of a rational local factor
    prod(1 - beta T)/prod(1 - alpha T) satisfies a linear recurrence whose
    characteristic polynomial is the denominator; the minimal order is found
    by exact Pade reconstruction with increasing order.  When numerator and
    denominator split into linear integer factors the inverse roots populate
    alphas/betas (u_m = sum alpha^m - sum beta^m); irreducible non-linear
    factors yield the flagged non-integral outcome, still carrying the
    reconstructed fraction; no fit within the order cap returns the
    Hankel-rank diagnosis of the series.
    """
    u = [Fraction(x) for x in u]
    if max_order is None:
        max_order = (len(u) - 2) // 2
    if len(u) < 4:
        raise InsufficientDataError(
            _MOD, "sequence-too-short", f"need at least 4 values, got {len(u)}"
        )
    D = len(u)
    # an order-m fit is only certifiable when at least two coefficients
    # beyond the 2m used by the Pade system corroborate it
    certifiable = min(max_order, (D - 2) // 2)
    z = series_exp([ui / (i + 1) for i, ui in enumerate(u)], D)
    fit = None
    for m in range(0, certifiable + 1):
        den = _pade_denominator(z, m)
        if den is None:
            continue
        num = _series_poly_product(z, den, m)
        if _rational_matches_series(num, den, z):
            fit = (num, den, m)
            break
    if fit is None:
        return RationalLocalFactor(
            status="no_recurrence",
            order=certifiable + 1,
            diagnostics={
                "hankel_ranks": _hankel_ranks(
                    [int(x) if x.denominator == 1 else x for x in z[1:]], certifiable + 2
                ),
                "certifiable_order": certifiable,
            },
        )
    num, den, order = fit
    num, den = _cancel_common(num, den)
    order = max(len(num), len(den)) - 1
    if any(c.denominator != 1 for c in num + den):
        return RationalLocalFactor(
            status="non_integral_roots",
            order=order,
            numerator=tuple(num),
            denominator=tuple(den),
            diagnostics={"reason": "non-integer fraction coefficients"},
        )
    num_i = tuple(int(c) for c in num)
    den_i = tuple(int(c) for c in den)
    alphas = _integer_inverse_roots(den_i)
    betas = _integer_inverse_roots(num_i)
    status = "integral" if alphas is not None and betas is not None else "non_integral_roots"
    res = RationalLocalFactor(
        alphas=tuple(sorted(alphas)) if status == "integral" else (),
        betas=tuple(sorted(betas)) if status == "integral" else (),
        numerator=num_i,
        denominator=den_i,
        status=status,
        order=order,
        char_poly=tuple(reversed(den_i)),
    )
    if not res.reproduces([int(x) for x in u]):
        return RationalLocalFactor(
            status="no_recurrence",
            order=order,
            diagnostics={"reason": "reconstruction mismatch"},
        )
    return res


def _pade_denominator(z, m):
    """D(T) = 1 + d_1 T + ... + d_m T^m with (Z D) a polynomial of degree
    <= m, solved from the first m defect equations; None when singular."""
    if m == 0:
        return [Fraction(1)] if all(c == 0 for c in z[1:]) else None
    rows = []
    rhs = []
    for k in range(m + 1, min(2 * m, len(z) - 1) + 1):
        rows.append([z[k - i] if k - i >= 0 else Fraction(0) for i in range(1, m + 1)])
        rhs.append(-z[k])
    if len(rows) < m:
        return None
    sol = _solve_exact(rows, rhs, m)
    if sol is None:
        return None
    return [Fraction(1)] + sol


def _solve_exact(rows, rhs, nvars):
    """Exact solve of a (possibly overdetermined) rational linear system."""
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for c in range(nvars):
        piv = next((i for i in range(r, len(aug)) if aug[i][c] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        scale = aug[r][c]
        aug[r] = [x / scale for x in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
    # inconsistent rows
    for i in range(r, len(aug)):
        if aug[i][-1] != 0:
            return None
    sol = [Fraction(0)] * nvars
    for i, c in enumerate(piv_cols):
        sol[c] = aug[i][-1]
    return sol


def _series_poly_product(z, den, deg):
    out = []
    for k in range(deg + 1):
        acc = Fraction(0)
        for i, d in enumerate(den):
            if 0 <= k - i < len(z):
                acc += d * z[k - i]
        out.append(acc)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _rational_matches_series(num, den, z):
    """Does num/den expand to the given series through its last term?"""
    cur = []
    for k in range(len(z)):
        acc = num[k] if k < len(num) else Fraction(0)
        for i in range(1, min(k, len(den) - 1) + 1):
            acc -= den[i] * cur[k - i]
        cur.append(acc / den[0])
        if cur[k] != z[k]:
            return False
    return True


def _cancel_common(num, den):
    T = sympy.Symbol("T")
    pn = sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in num])), T)
    pd = sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in den])), T)
    g = sympy.gcd(pn, pd)
    if g.degree() > 0:
        pn = sympy.div(pn, g)[0]
        pd = sympy.div(pd, g)[0]
    ncoef = [Fraction(str(c)) for c in reversed(pn.all_coeffs())]
    dcoef = [Fraction(str(c)) for c in reversed(pd.all_coeffs())]
    # renormalize so constant terms are 1
    if ncoef and ncoef[0] != 0:
        scale = ncoef[0]
        ncoef = [c / scale for c in ncoef]
        dcoef = [c / scale for c in dcoef]
    return ncoef, dcoef


def _integer_inverse_roots(poly):
    """Multiset of integer r with poly = prod (1 - r T), or None."""
    T = sympy.Symbol("T")
    p = sympy.Poly(list(reversed(poly)), T)
    if p.degree() == 0:
        return []
    roots = []
    _, fac_list = p.factor_list()
    for fac, mult in fac_list:
        fp = sympy.Poly(fac, T)
        if fp.degree() != 1:
            return None
        a, b = fp.all_coeffs()  # a T + b
        root = sympy.Rational(-a, b)
        if root.q != 1:
            return None
        roots.extend([int(root)] * mult)
    return roots


# --------------------------------------------------------------------------
# closed-form expression trees


@dataclass(frozen=True)
class ZetaAtom:
    """zeta(scale * s - shift), the Riemann factor with an affine argument."""

    shift: int
    scale: int = 1

    def __post_init__(self):
        if self.scale < 1:
            raise ParameterError(_MOD, "bad-expression", "zeta scale must be >= 1")


@dataclass(frozen=True)
class DedekindAtom:
    """Dedekind zeta of the abelian field fixed by the subgroup of
    (Z/conductor)^x generated by ``subgroup``; ramified primes are skipped
    (a finite-factor equivalence)."""

    conductor: int
    subgroup: tuple = ()

    def __post_init__(self):
        m = self.conductor
        if m < 2:
            raise ParameterError(_MOD, "bad-expression", "conductor must be >= 2")
        for g in self.subgroup:
            if math.gcd(g, m) != 1:
                raise ParameterError(_MOD, "bad-expression", f"{g} is not a unit mod {m}")

    def local_data(self, p: int):
        """(f, g): residue degree of p (its order in (Z/m)^x modulo the
        subgroup) and the number of primes above it; None when p | m."""
        m = self.conductor
        if m % p == 0:
            return None
        H = _subgroup_closure(self.conductor, self.subgroup)
        deg = _unit_group_order(m) // len(H)
        f = _coset_order(m, H, p)
        return f, deg // f


def _unit_group_order(m):
    return sum(1 for a in range(1, m) if math.gcd(a, m) == 1)


@lru_cache(maxsize=None)
def _subgroup_closure(m, gens):
    H = {1}
    frontier = [1]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x * g % m
                if y not in H:
                    H.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(H)


def _coset_order(m, H, p):
    f = 1
    x = p % m
    while x not in H:
        x = x * p % m
        f += 1
    return f


@dataclass(frozen=True)
class RationalFactor:
    """(1 - M^(b - a s))^eps with M >= 2, a > b >= 0, eps = +-1."""

    base: int
    a: int
    b: int
    eps: int

    def __post_init__(self):
        if self.base < 2 or self.a <= self.b or self.b < 0 or self.eps not in (1, -1):
            raise ParameterError(_MOD, "bad-expression", "rational factor out of range")


@dataclass(frozen=True)
class Sharp:
    """f^(#n)(s) = prod_{i=0}^{n-1} f(n s - i)."""

    n: int
    child: object

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(_MOD, "bad-expression", "sharp order must be >= 1")


@dataclass(frozen=True)
class Power:
    child: object
    exponent: Fraction
    allow_half: bool = False

    def __post_init__(self):
        e = Fraction(self.exponent)
        object.__setattr__(self, "exponent", e)
        if e.denominator not in (1, 2) or (e.denominator == 2 and not self.allow_half):
            raise ParameterError(
                _MOD, "bad-expression", "half-integer exponents only in designated presets"
            )


@dataclass(frozen=True)
class Product:
    children: tuple


@dataclass(frozen=True)
class LamplighterAtom:
    """Exact Euler product of the base-2 or base-3 lamplighter: local factors
    are rational in T = p^(-s) with p-dependent coefficients, split by the
    congruence class of p mod the base."""

    base: int

    def __post_init__(self):
        if self.base not in (2, 3):
            raise ParameterError(_MOD, "bad-expression", "lamplighter base must be 2 or 3")

    def local_polys(self, p: int):
        """(numerator, denominator) integer polynomials in T."""
        a = self.base
        if p == a:
            return [1, -1], [1, -p]
        if a == 2 or p % 3 == 1:
            return [1, -a], [1, -a * p]
        # base 3 at p = 2 mod 3
        num = _poly_mul_int([1, 0, -3], [1, p])  # (1 - 3T^2)(1 + pT)
        den = _poly_mul_int([1, 0, -3 * p * p], [1, 1])  # (1 - 3p^2 T^2)(1 + T)
        return num, den


def _poly_mul_int(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, av in enumerate(a):
        for j, bv in enumerate(b):
            out[i + j] += av * bv
    return out


# ---- numeric evaluation


POLE_EPS = 1e-9


def expr_poles(e) -> set:
    """Real poles / zeros-of-inverted-factors contributed by the atoms."""
    if isinstance(e, ZetaAtom):
        return {Fraction(e.shift + 1, e.scale)}
    if isinstance(e, DedekindAtom):
        return {Fraction(1)}
    if isinstance(e, RationalFactor):
        return {Fraction(e.b, e.a)} if e.eps == -1 else set()
    if isinstance(e, Sharp):
        return {Fraction(pole + i, e.n) for pole in expr_poles(e.child) for i in range(e.n)}
    if isinstance(e, Power):
        return expr_poles(e.child)
    if isinstance(e, Product):
        out = set()
        for c in e.children:
            out |= expr_poles(c)
        return out
    if isinstance(e, LamplighterAtom):
        return {Fraction(2)}  # rightmost denominator zero (at p -> infinity it accumulates at 2)
    raise ParameterError(_MOD, "bad-expression", f"unknown node {type(e).__name__}")


def eval_closed_form(e, s: float, X: int, pole_eps: float = POLE_EPS) -> float:
    """Evaluate by truncated Euler products over primes <= X."""
    for pole in expr_poles(e):
        if abs(s - float(pole)) < max(pole_eps, 1e-12):
            raise PoleError(_MOD, "pole-proximity", f"s={s} is within eps of a pole at {pole}")
    return _eval(e, s, X)


def _eval(e, s, X):
    if isinstance(e, ZetaAtom):
        arg = e.scale * s - e.shift
        acc = 0.0
        for p in arith.primes_up_to(X):
            acc -= math.log1p(-float(p) ** (-arg))
        return math.exp(acc)
    if isinstance(e, DedekindAtom):
        acc = 0.0
        for p in arith.primes_up_to(X):
            data = e.local_data(int(p))
            if data is None:
                continue
            f, g = data
            acc -= g * math.log1p(-float(p) ** (-f * s))
        return math.exp(acc)
    if isinstance(e, RationalFactor):
        return (1.0 - float(e.base) ** (e.b - e.a * s)) ** e.eps
    if isinstance(e, Sharp):
        out = 1.0
        for i in range(e.n):
            out *= _eval(e.child, e.n * s - i, X)
        return out
    if isinstance(e, Power):
        return _eval(e.child, s, X) ** float(e.exponent)
    if isinstance(e, Product):
        out = 1.0
        for c in e.children:
            out *= _eval(c, s, X)
        return out
    if isinstance(e, LamplighterAtom):
        acc = 0.0
        for p in arith.primes_up_to(X):
            num, den = e.local_polys(int(p))
            T = float(p) ** (-s)
            nv = sum(c * T**i for i, c in enumerate(num))
            dv = sum(c * T**i for i, c in enumerate(den))
            if abs(dv) < 1e-300:
                raise PoleError(_MOD, "pole-proximity", f"local denominator vanishes at p={p}")
            acc += math.log(abs(nv)) - math.log(abs(dv))
        return math.exp(acc)
    raise ParameterError(_MOD, "bad-expression", f"unknown node {type(e).__name__}")


# ---- exact local series


def closed_form_local_log(e, p: int, D: int) -> list[Fraction]:
    """Coefficients of T..T^D in log of the local factor at p (exact)."""
    out = [Fraction(0)] * (D + 1)

    def log_one_minus(coef, power, eps, weight):
        # weight * eps * log(1 - coef * T^power)
        k = 1
        while power * k <= D:
            out[power * k] -= Fraction(eps) * Fraction(coef) ** k / k * weight
            k += 1

    def walk(e, mult):
        if isinstance(e, ZetaAtom):
            # local factor (1 - p^shift T^scale)^(-1)
            log_one_minus(p**e.shift, e.scale, -1, mult)
            return
        if isinstance(e, DedekindAtom):
            data = e.local_data(p)
            if data is None:
                return
            f, g = data
            log_one_minus(1, f, -g, mult)
            return
        if isinstance(e, RationalFactor):
            # contributes only when the base is a power of p
            b, kk = e.base, 0
            while b % p == 0:
                b //= p
                kk += 1
            if b != 1 or kk == 0:
                return
            log_one_minus(p ** (e.b * kk), e.a * kk, e.eps, mult)
            return
        if isinstance(e, Sharp):
            inner = closed_form_local_log(e.child, p, D)  # in the child's T
            for m in range(1, D // e.n + 1):
                geo = sum(p ** (i * m) for i in range(e.n))
                out[e.n * m] += mult * inner[m - 1] * geo
            return
        if isinstance(e, Power):
            walk(e.child, mult * Fraction(e.exponent))
            return
        if isinstance(e, Product):
            for c in e.children:
                walk(c, mult)
            return
        if isinstance(e, LamplighterAtom):
            num, den = e.local_polys(p)
            for poly, sign in ((num, 1), (den, -1)):
                roots_log = _poly_log_series(poly, D)
                for m in range(1, D + 1):
                    out[m] += mult * sign * roots_log[m - 1]
            return
        raise ParameterError(_MOD, "bad-expression", f"unknown node {type(e).__name__}")

    walk(e, Fraction(1))
    return out[1:]


def _poly_log_series(poly, D):
    """Coefficients of T..T^D of log(poly(T)) for poly with poly(0) = 1,
    from (log poly)' poly = poly': m l_m = m c_m - sum_{k<m} k l_k c_{m-k}."""
    c = [Fraction(x) for x in poly]
    assert c[0] == 1
    d = len(c) - 1
    lm = []
    for m in range(1, D + 1):
        acc = m * c[m] if m <= d else Fraction(0)
        for k in range(1, m):
            if m - k <= d:
                acc -= k * lm[k - 1] * c[m - k]
        lm.append(acc / m)
    return lm


def expr_local_u(e, p: int, D: int) -> list[int]:
    """Integer u_m sequence of a closed form's local factor."""
    lg = closed_form_local_log(e, p, D)
    out = []
    for m, c in enumerate(lg, start=1):
        v = c * m
        if v.denominator != 1:
            raise ParameterError(_MOD, "bad-expression", f"non-integral u_{m} = {v}")
        out.append(int(v))
    return out


def closed_form_local_factor(e, p: int, D: int) -> list[Fraction]:
    """Exact rational series of the local factor at p up to degree D."""
    lg = [Fraction(0)] + closed_form_local_log(e, p, D)
    out = [Fraction(1)] + [Fraction(0)] * D
    for m in range(1, D + 1):
        acc = Fraction(0)
        for k in range(1, m + 1):
            acc += k * lg[k] * out[m - k]
        out[m] = acc / m
    return out


def series_exp(log_coeffs: list[Fraction], D: int) -> list[Fraction]:
    """exp of a power series given by coefficients of T..T^D (constant 0)."""
    lg = [Fraction(0)] + list(log_coeffs[:D])
    out = [Fraction(1)] + [Fraction(0)] * D
    for m in range(1, D + 1):
        acc = Fraction(0)
        for k in range(1, m + 1):
            acc += k * lg[k] * out[m - k]
        out[m] = acc / m
    return out


def counter_local_factor(spec, p: int, D: int) -> list[Fraction]:
    """Exact local-factor series assembled from counter output."""
    u = local_log_coeffs(spec, p, D)
    return series_exp([Fraction(ui, i + 1) for i, ui in enumerate(u)], D)


def matrix_algebra_zeta_rational(n: int, p: int, k: int, s: int) -> Fraction:
    """Exact value prod_{i<n} (1 - p^(k i - s k n))^(-1) at an integer s."""
    if n < 1 or k < 1 or s < 1 or not arith.is_prime(p):
        raise ParameterError(_MOD, "bad-argument", "need n, k, s >= 1 and p prime")
    val = Fraction(1)
    top = p ** (s * k * n)
    for i in range(n):
        val *= Fraction(top, top - p ** (k * i))
    return val


# --------------------------------------------------------------------------
# s-expression serialization


def format_expr(e) -> str:
    if isinstance(e, ZetaAtom):
        return f"(zeta {e.shift})" if e.scale == 1 else f"(zeta {e.shift} {e.scale})"
    if isinstance(e, DedekindAtom):
        inner = " ".join(str(g) for g in e.subgroup)
        return f"(dedekind {e.conductor} (h{(' ' + inner) if inner else ''}))"
    if isinstance(e, RationalFactor):
        return f"(ratfac {e.base} {e.a} {e.b} {e.eps})"
    if isinstance(e, Sharp):
        return f"(sharp {e.n} {format_expr(e.child)})"
    if isinstance(e, Power):
        exp = e.exponent
        txt = str(exp.numerator) if exp.denominator == 1 else f"{exp.numerator}/{exp.denominator}"
        return f"(power {format_expr(e.child)} {txt})"
    if isinstance(e, Product):
        return "(product " + " ".join(format_expr(c) for c in e.children) + ")"
    if isinstance(e, LamplighterAtom):
        return f"(lamp {e.base})"
    raise ParameterError(_MOD, "bad-expression", f"unknown node {type(e).__name__}")


def parse_expr(text: str):
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def parse():
        nonlocal pos
        if tokens[pos] != "(":
            raise ParameterError(_MOD, "parse-error", f"expected '(' at token {pos}")
        pos += 1
        head = tokens[pos]
        pos += 1
        if head == "zeta":
            args = _ints(2)
            return ZetaAtom(args[0], args[1] if len(args) > 1 else 1)
        if head == "ratfac":
            a = _ints(4)
            return RationalFactor(a[0], a[1], a[2], a[3])
        if head == "sharp":
            n = int(tokens[pos]); pos_inc()
            child = parse()
            expect_close()
            return Sharp(n, child)
        if head == "power":
            child = parse()
            txt = tokens[pos]; pos_inc()
            exp = Fraction(txt)
            expect_close()
            return Power(child, exp, allow_half=(exp.denominator == 2))
        if head == "product":
            children = []
            while tokens[pos] != ")":
                children.append(parse())
            pos_inc()
            return Product(tuple(children))
        if head == "dedekind":
            m = int(tokens[pos]); pos_inc()
            if tokens[pos] != "(":
                raise ParameterError(_MOD, "parse-error", "expected subgroup list")
            pos_inc()
            if tokens[pos] != "h":
                raise ParameterError(_MOD, "parse-error", "expected 'h' marker")
            pos_inc()
            gens = []
            while tokens[pos] != ")":
                gens.append(int(tokens[pos])); pos_inc()
            pos_inc()
            expect_close()
            return DedekindAtom(m, tuple(gens))
        if head == "lamp":
            a = int(tokens[pos]); pos_inc()
            expect_close()
            return LamplighterAtom(a)
        raise ParameterError(_MOD, "parse-error", f"unknown form '{head}'")

    def pos_inc():
        nonlocal pos
        pos += 1

    def expect_close():
        nonlocal pos
        if tokens[pos] != ")":
            raise ParameterError(_MOD, "parse-error", f"expected ')' at token {pos}")
        pos += 1

    def _ints(maxn):
        nonlocal pos
        out = []
        while tokens[pos] != ")" and len(out) < maxn:
            out.append(int(tokens[pos]))
            pos += 1
        expect_close()
        return out

    try:
        expr = parse()
    except (IndexError, ValueError) as exc:
        raise ParameterError(_MOD, "parse-error", f"bad expression text: {exc}") from exc
    if pos != len(tokens):
        raise ParameterError(_MOD, "parse-error", "trailing tokens")
    return expr


# --------------------------------------------------------------------------
# preset closed forms


@dataclass(frozen=True)
class Preset:
    name: str
    expr: object
    excluded_primes: tuple = ()
    rational_local_factors: bool = True
    pole_order_at_one: Optional[int] = None
    abscissa: Optional[float] = None


def _z(shift, scale=1):
    return ZetaAtom(shift, scale)


def preset(name: str, **params) -> Preset:
    """Named closed forms.  Equality tests against counters must exclude the
    listed primes (finitely many dropped rational factors)."""
    if name == "cp":
        p = params["p"]
        if not arith.is_prime(p):
            raise ParameterError(_MOD, "bad-parameter", f"p={p} is not prime")
        expr = Product((
            _z(0),
            DedekindAtom(p, ()) if p > 2 else _z(0),
            RationalFactor(p, 1, 0, 1),
        ))
        return Preset(name, expr, excluded_primes=(p,), abscissa=1.0)
    if name == "zhat_pow":
        r = params["r"]
        children = []
        for i in range(r + 1):
            exp = (-1) ** (r - i) * math.comb(r, i)
            children.append(Power(_z(i), Fraction(exp)))
        return Preset(name, Product(tuple(children)), abscissa=r + 1.0)
    if name == "s4":
        expr = Product((
            Power(_z(0), Fraction(2)),
            Sharp(2, _z(0)),
            Power(Sharp(3, _z(0)), Fraction(2)),
            RationalFactor(2, 1, 0, 1),
            RationalFactor(3, 2, 0, 1),
            RationalFactor(3, 2, 1, 1),
            RationalFactor(3, 3, 0, 1),
            RationalFactor(3, 3, 1, 1),
            RationalFactor(3, 3, 2, 1),
        ))
        return Preset(name, expr, pole_order_at_one=5, abscissa=1.0)
    if name == "sn_shape":
        degrees = tuple(params["degrees"])
        expr = Product(tuple(Sharp(d, _z(0)) for d in degrees))
        return Preset(name, expr, excluded_primes=tuple(int(p) for p in params.get("exclude", ())))
    if name == "zwrc2":
        expr = Product((
            Power(_z(1), Fraction(2)),
            Power(_z(0), Fraction(-2)),
            _z(0, 2),
            _z(3, 2),
            Power(_z(1, 2), Fraction(-1)),
            Power(_z(2, 2), Fraction(-1)),
        ))
        return Preset(name, expr, excluded_primes=(2,), abscissa=2.0)
    if name == "dinf":
        expr = Product((
            Power(_z(0), Fraction(4)),
            _z(2, 2),
            Power(_z(1, 2), Fraction(-1)),
            Power(_z(0, 2), Fraction(-2)),
        ))
        return Preset(name, expr, excluded_primes=(2,), abscissa=1.5)
    if name == "zwrc3":
        expr = Product((
            Power(_z(1), Fraction(3)),
            Power(_z(0), Fraction(-3)),
            _z(3, 3),
            _z(2, 3),
            Power(_z(0, 3), Fraction(-1)),
        ))
        return Preset(name, expr, excluded_primes=(2, 3), abscissa=2.0)
    if name == "bs1m1":
        expr = Product((
            Power(_z(1), Fraction(2)),
            Power(_z(0), Fraction(-2)),
            Power(_z(0, 2), Fraction(2)),
            _z(3, 2),
            Power(_z(1, 2), Fraction(-1)),
            Power(_z(2, 2), Fraction(-2)),
        ))
        return Preset(name, expr, excluded_primes=(2,), abscissa=2.0)
    if name == "lamplighter2":
        return Preset(name, LamplighterAtom(2), abscissa=2.0)
    if name == "lamplighter3":
        return Preset(name, LamplighterAtom(3), abscissa=2.0)
    if name == "eta_zwrc2":
        expr = Product((
            Power(_z(1), Fraction(2)),
            Power(_z(0), Fraction(-2)),
            _z(0, 2),
            Power(_z(2, 2), Fraction(-1)),
            Power(_z(3, 2), Fraction(1, 2), allow_half=True),
            Power(_z(1, 2), Fraction(-1, 2), allow_half=True),
        ))
        return Preset(name, expr, excluded_primes=(2,), rational_local_factors=False)
    raise ParameterError(_MOD, "unknown-preset", f"unknown preset '{name}'")


PRESET_NAMES = (
    "cp",
    "zhat_pow",
    "s4",
    "sn_shape",
    "zwrc2",
    "dinf",
    "zwrc3",
    "bs1m1",
    "lamplighter2",
    "lamplighter3",
    "eta_zwrc2",
)


# --------------------------------------------------------------------------
# abscissa estimation


@dataclass(frozen=True)
class AbscissaEstimate:
    value: float
    window: tuple
    residual: float
    samples: int


def estimate_abscissa(
    spec: repcount.GroupSpec,
    X: int,
    window: tuple = (0.5, 1.0),
    samples: int = 32,
) -> AbscissaEstimate:
    """Least-squares slope of log S(x) against log x over a geometric grid
    in [X^lo, X^hi], where S(x) = sum_{p^(nj) <= x} (count/j) weight.

    The fit includes a log log x nuisance term: positive Dirichlet series
    with partial sums ~ x^a / log x would otherwise bias the slope low by
    about 1/log X at desk scale.
    """
    lo, hi = window
    if not (0 < lo < hi <= 1):
        raise ParameterError(_MOD, "bad-window", f"window must satisfy 0 < lo < hi <= 1")
    keys = []
    vals = []
    for p, j, n, c, w in _iter_terms(spec, X):
        keys.append(p ** (n * j))
        vals.append(c * w / j)
    if not keys:
        raise InsufficientDataError(_MOD, "insufficient-data", "no terms below X")
    keys = np.asarray(keys, dtype=np.float64)
    vals = np.asarray(vals, dtype=np.float64)
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    csum = np.cumsum(vals[order])
    xs = np.exp(np.linspace(lo * math.log(X), hi * math.log(X), samples))
    idx = np.searchsorted(keys, xs, side="right") - 1
    good = idx >= 0
    xs, idx = xs[good], idx[good]
    svals = csum[idx]
    good = svals > 0
    xs, svals = xs[good], svals[good]
    if len(xs) < 8:
        raise InsufficientDataError(_MOD, "insufficient-data", f"only {len(xs)} usable samples")
    lx = np.log(xs)
    ly = np.log(svals)
    design = np.column_stack([lx, np.ones_like(lx), np.log(lx)])
    coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coef - ly) ** 2)))
    return AbscissaEstimate(float(coef[0]), (float(xs[0]), float(xs[-1])), resid, len(xs))


# --------------------------------------------------------------------------
# abscissa inequality audit


@dataclass(frozen=True)
class AuditEntry:
    label: str
    value: float
    tol: float = 0.0


@dataclass(frozen=True)
class Violation:
    relation: str
    detail: str
    slack: float


def abscissa_bound_audit(entries: dict, relations: list) -> list[Violation]:
    """Check declared abscissa inequalities; returns violations (empty = pass).

    Relation kinds (args refer to entry labels):
      quotient(sub, sup)           a(G/N) <= a(G)
      open_subgroup(G, H, index)   a(G) <= a(H) + 1 - 1/i  and  a(H) <= i a(G)
      product(GH, G, H)            a(G x H) <= a(G) + a(H)
      finite_factor(GF, G)         a(G x F) = a(G), F finite
      split_extension(G, K, Q)     a(G) <= a(K) + a(Q) + 1
      finite(G)                    a(G) = 1
      subgroup_ratio(G, H, index)  a(H)/a(G) <= index
    """
    out = []

    def val(label):
        e = entries[label]
        return e.value, e.tol

    for rel in relations:
        kind = rel["kind"]
        if kind == "quotient":
            (a, ta), (b, tb) = val(rel["sub"]), val(rel["sup"])
            slack = b + tb - (a - ta)
            if slack < 0:
                out.append(Violation(kind, f"a({rel['sub']}) <= a({rel['sup']})", slack))
        elif kind == "open_subgroup":
            (g, tg), (h, th) = val(rel["G"]), val(rel["H"])
            i = rel["index"]
            slack1 = (h + th) + 1 - 1.0 / i - (g - tg)
            if slack1 < 0:
                out.append(Violation(kind, f"a({rel['G']}) <= a({rel['H']}) + 1 - 1/{i}", slack1))
            slack2 = i * (g + tg) - (h - th)
            if slack2 < 0:
                out.append(Violation(kind, f"a({rel['H']}) <= {i} a({rel['G']})", slack2))
        elif kind == "product":
            (gh, tgh), (g, tg), (h, th) = val(rel["GH"]), val(rel["G"]), val(rel["H"])
            slack = (g + tg) + (h + th) - (gh - tgh)
            if slack < 0:
                out.append(Violation(kind, f"a({rel['GH']}) <= a({rel['G']}) + a({rel['H']})", slack))
        elif kind == "finite_factor":
            (gf, tgf), (g, tg) = val(rel["GF"]), val(rel["G"])
            slack = (tg + tgf) - abs(gf - g)
            if slack < 0:
                out.append(Violation(kind, f"a({rel['GF']}) = a({rel['G']})", slack))
        elif kind == "split_extension":
            (g, tg), (k, tk), (q, tq) = val(rel["G"]), val(rel["K"]), val(rel["Q"])
            slack = (k + tk) + (q + tq) + 1 - (g - tg)
            if slack < 0:
                out.append(
                    Violation(kind, f"a({rel['G']}) <= a({rel['K']}) + a({rel['Q']}) + 1", slack)
                )
        elif kind == "finite":
            g, tg = val(rel["G"])
            slack = tg - abs(g - 1.0)
            if slack < 0:
                out.append(Violation(kind, f"a({rel['G']}) = 1", slack))
        elif kind == "subgroup_ratio":
            (g, tg), (h, th) = val(rel["G"]), val(rel["H"])
            i = rel["index"]
            slack = i - (h - th) / (g + tg)
            if slack < 0:
                out.append(Violation(kind, f"a({rel['H']})/a({rel['G']}) <= {i}", slack))
        else:
            raise ParameterError(_MOD, "bad-relation", f"unknown relation kind '{kind}'")
    return out


def default_audit_table():
    """The stock audit: abelian towers, a finite group, the lamplighter and
    free pro-3 closed-form abscissae at small ranks."""
    kp3 = arith.kprime_profile(3, 2).certified
    entries = {
        "trivial": AuditEntry("trivial", 1.0),
        "c2": AuditEntry("c2", 1.0),
        "zhat": AuditEntry("zhat", 2.0),
        "zhat2": AuditEntry("zhat2", 3.0),
        "zhat3": AuditEntry("zhat3", 4.0),
        "zp": AuditEntry("zp", 1.0),
        "lamplighter2": AuditEntry("lamplighter2", 2.0),
        "zwrc2": AuditEntry("zwrc2", 2.0),
        "dinf": AuditEntry("dinf", 1.5),
        "c2xzhat": AuditEntry("c2xzhat", 2.0),
    }
    for r in (2, 3, 4, 5, 13, 20, 58):
        entries[f"fp3_r{r}"] = AuditEntry(f"fp3_r{r}", (r - 1) / kp3 + 1.0)
    relations = [
        {"kind": "finite", "G": "c2"},
        {"kind": "quotient", "sub": "trivial", "sup": "zhat"},
        {"kind": "quotient", "sub": "zhat", "sup": "zhat2"},
        {"kind": "quotient", "sub": "zhat2", "sup": "zhat3"},
        {"kind": "quotient", "sub": "zp", "sup": "zhat"},
        {"kind": "quotient", "sub": "zhat", "sup": "lamplighter2"},
        {"kind": "quotient", "sub": "zhat", "sup": "zwrc2"},
        {"kind": "product", "GH": "zhat2", "G": "zhat", "H": "zhat"},
        {"kind": "product", "GH": "zhat3", "G": "zhat2", "H": "zhat"},
        {"kind": "finite_factor", "GF": "c2xzhat", "G": "zhat"},
        {"kind": "split_extension", "G": "zwrc2", "K": "zhat2", "Q": "c2"},
        {"kind": "split_extension", "G": "dinf", "K": "zhat", "Q": "c2"},
        {"kind": "split_extension", "G": "lamplighter2", "K": "trivial", "Q": "zhat"},
        {"kind": "open_subgroup", "G": "fp3_r2", "H": "fp3_r4", "index": 3},
        {"kind": "open_subgroup", "G": "fp3_r5", "H": "fp3_r13", "index": 3},
        {"kind": "open_subgroup", "G": "fp3_r20", "H": "fp3_r58", "index": 3},
        {"kind": "subgroup_ratio", "G": "fp3_r2", "H": "fp3_r4", "index": 3},
        {"kind": "subgroup_ratio", "G": "fp3_r5", "H": "fp3_r13", "index": 3},
        {"kind": "subgroup_ratio", "G": "fp3_r20", "H": "fp3_r58", "index": 3},
    ]
    return entries, relations


def free_pro_p_ratio_slack(p: int, r: int, index: int) -> float:
    """index - a(H)/a(G) for the index-i open subgroup of the rank-r free
    pro-p group (H free of rank i(r-1)+1); tends to 0 as r grows."""
    prof = arith.kprime_profile(p, 2)
    kp = prof.certified if prof.certified is not None else prof.infimum
    a_g = (r - 1) / kp + 1.0
    a_h = (index * (r - 1)) / kp + 1.0
    return index - a_h / a_g
