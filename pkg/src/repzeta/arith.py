"""Prime-power enumeration, multiplicative number theory and named constants.

Everything here is exact integer arithmetic until the single final float
conversion inside the constant evaluators.  Factorials are never replaced by
Stirling approximations; logs of big integers go through ``math.log`` which
handles arbitrary precision input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    CeilingExceededError,
    EmptyRangeError,
    NotAUnitError,
    ParameterError,
)

_MOD = "arith"

# Witnesses proving primality for every n < 3_317_044_064_679_887_385_961_981.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
_MR_EXTRA_BASES = (43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)


def is_prime(n: int) -> bool:
    """Miller-Rabin, deterministic below ~3.3e24, fixed extra bases above."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases = _MR_BASES if n < _MR_DETERMINISTIC_LIMIT else _MR_BASES + _MR_EXTRA_BASES
    for a in bases:
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class PrimePower(NamedTuple):
    p: int
    j: int
    q: int


@lru_cache(maxsize=8)
def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n, ascending (cached numpy sieve)."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve).astype(np.int64)


def sieve_prime_powers(limit: int) -> list[PrimePower]:
    """All prime powers p^j <= limit, sorted by value.

    Deterministic; ties are impossible since a prime power has a unique
    (p, j) presentation.
    """
    if limit < 2:
        raise EmptyRangeError(_MOD, "empty-range", f"limit must be >= 2, got {limit}")
    out = []
    for p in primes_up_to(limit):
        p = int(p)
        q, j = p, 1
        while q <= limit:
            out.append(PrimePower(p, j, q))
            q *= p
            j += 1
    out.sort(key=lambda r: r.q)
    return out


def p_part(p: int, m: int) -> int:
    """The largest power of p dividing m; by convention p_part(p, 0) = 0."""
    if not is_prime(p):
        raise ParameterError(_MOD, "not-prime", f"p={p} is not prime")
    if m < 0:
        m = -m
    if m == 0:
        return 0
    w = 1
    while m % p == 0:
        m //= p
        w *= p
    return w


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization (desk scale)."""
    if n < 1:
        raise ParameterError(_MOD, "bad-argument", f"n must be >= 1, got {n}")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def moebius(n: int) -> int:
    if n < 1:
        raise ParameterError(_MOD, "bad-argument", f"n must be >= 1, got {n}")
    if n == 1:
        return 1
    mu = 1
    for _, e in factorize(n).items():
        if e > 1:
            return 0
        mu = -mu
    return mu


def divisors(n: int) -> list[int]:
    ds = [1]
    for p, e in factorize(n).items():
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


def multiplicative_order(a: int, m: int) -> int:
    """Least e >= 1 with a^e = 1 mod m."""
    if m < 2:
        raise ParameterError(_MOD, "bad-argument", f"modulus must be >= 2, got {m}")
    a %= m
    if math.gcd(a, m) != 1:
        raise NotAUnitError(_MOD, "not-a-unit", f"{a} is not a unit mod {m}")
    e, x = 1, a
    while x != 1:
        x = x * a % m
        e += 1
    return e


def integer_nth_root(x: int, k: int) -> int:
    """floor(x ** (1/k)) for integers x >= 0, k >= 1."""
    if x < 0 or k < 1:
        raise ParameterError(_MOD, "bad-argument", "need x >= 0, k >= 1")
    if x < 2 or k == 1:
        return x
    r = int(round(x ** (1.0 / k)))
    while r > 1 and r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def is_prime_power(n: int) -> Optional[PrimePower]:
    """(p, j, q) if n = p^j, else None."""
    if n < 2:
        return None
    if is_prime(n):
        return PrimePower(n, 1, n)
    for j in range(2, n.bit_length() + 1):
        r = integer_nth_root(n, j)
        if r < 2:
            break
        if r**j == n and is_prime(r):
            return PrimePower(r, j, n)
    return None


def least_prime_power_congruent(
    d: int, sign: int, ceiling: Optional[int] = None, primes_only: bool = False
) -> PrimePower:
    """Smallest prime power q = sign (mod d), exhaustive ascending search.

    The default ceiling d**6 sits safely above the best known Linnik-type
    exponent; hitting it raises instead of looping forever.
    """
    if d < 2:
        raise ParameterError(_MOD, "bad-argument", f"d must be >= 2, got {d}")
    if sign not in (1, -1):
        raise ParameterError(_MOD, "bad-argument", f"sign must be +1 or -1, got {sign}")
    if ceiling is None:
        ceiling = d**6
    q = d + sign
    if q < 2:
        q += d
    while q <= ceiling:
        if primes_only:
            if is_prime(q):
                return PrimePower(q, 1, q)
        else:
            pp = is_prime_power(q)
            if pp is not None:
                return pp
        q += d
    raise CeilingExceededError(
        _MOD,
        "ceiling-exceeded",
        f"no prime power = {sign:+d} mod {d} found below ceiling {ceiling}",
        ceiling,
    )


class ProfileRow(NamedTuple):
    k: int
    ppmin: int
    value: float
    running_inf: float


@dataclass(frozen=True)
class GrowthProfile:
    """Finite prefix of an infimum-type growth constant.

    ``certified`` is set only when a closed form pins the limit (Mersenne
    case); otherwise the running infimum is just an upper bound and no
    single number is asserted for the limit.
    """

    p: int
    kind: str  # "kprime" or "k"
    rows: tuple[ProfileRow, ...]
    infimum: float
    certified: Optional[float] = None


def _profile(p: int, k_max: int, kind: str, ceiling, primes_only) -> GrowthProfile:
    if not is_prime(p):
        raise ParameterError(_MOD, "not-prime", f"p={p} is not prime")
    if k_max < 1:
        raise ParameterError(_MOD, "bad-argument", f"k_max must be >= 1, got {k_max}")
    rows = []
    inf = math.inf
    logp = math.log(p)
    for k in range(1, k_max + 1):
        m = least_prime_power_congruent(p**k, +1, ceiling=ceiling, primes_only=primes_only)
        if kind == "kprime":
            den = (k + 1.0) * logp if p == 2 else (k + 1.0 / (p - 1)) * logp
        else:
            den = k * logp
        val = math.log(m.q) / den
        inf = min(inf, val)
        rows.append(ProfileRow(k, m.q, val, inf))
    certified = None
    if kind == "kprime" and p > 2 and is_prime_power(p + 1) is not None and (p + 1) & p == 0:
        # p Mersenne: the infimum is attained at k = 1
        certified = (p - 1) * math.log(p + 1) / (p * logp)
    return GrowthProfile(p, kind, tuple(rows), inf, certified)


def kprime_profile(p: int, k_max: int, ceiling=None, primes_only=False) -> GrowthProfile:
    """f_p(k) = log ppmin(p^k) / ((k + 1/(p-1)) log p) rows with running inf.

    For p = 2 the denominator is (k+1) log 2.  Only a profile is returned:
    a liminf/inf over all k cannot be certified from a finite prefix.
    """
    return _profile(p, k_max, "kprime", ceiling, primes_only)


def k_profile(p: int, k_max: int, ceiling=None, primes_only=False) -> GrowthProfile:
    """Same as kprime_profile but with denominator k log p (liminf flavor)."""
    return _profile(p, k_max, "k", ceiling, primes_only)


class SylowOrder(NamedTuple):
    value: int
    exact: bool


def sylow_gl_order(p: int, n: int, q: int) -> SylowOrder:
    """Order of a Sylow p-subgroup of GL(n, q), gcd(p, q) = 1.

    Exact closed forms: p odd with p | q-1 and n a p-power, and p = 2 with
    n a 2-power (split by q mod 4).  Outside those cases the returned value
    is the p-part of |GL(n, q)| and is flagged non-exact (callers treat it
    as an upper bound).
    """
    if not is_prime(p):
        raise ParameterError(_MOD, "not-prime", f"p={p} is not prime")
    if n < 1:
        raise ParameterError(_MOD, "bad-argument", f"n must be >= 1, got {n}")
    pp = is_prime_power(q)
    if pp is None:
        raise ParameterError(_MOD, "bad-argument", f"q={q} is not a prime power")
    if pp.p == p:
        raise ParameterError(_MOD, "same-characteristic", f"p={p} divides q={q}")

    def _is_pow(m: int, b: int) -> bool:
        while m % b == 0:
            m //= b
        return m == 1

    if p == 2:
        if n == 1:
            return SylowOrder(p_part(2, q - 1), True)
        if _is_pow(n, 2):
            if q % 4 == 1:
                return SylowOrder(2 ** (n - 1) * p_part(2, q - 1) ** n, True)
            return SylowOrder(2 ** (n + n // 2 - 1) * p_part(2, q + 1) ** (n // 2), True)
    elif (q - 1) % p == 0 and _is_pow(n, p):
        return SylowOrder(p_part(p, q - 1) ** n * p ** ((n - 1) // (p - 1)), True)
    order_p_part = 1
    for i in range(1, n + 1):
        order_p_part *= p_part(p, q**i - 1)
    return SylowOrder(order_p_part, False)


def image_count_upper_bound(group_order: int, r: int, q: int) -> int:
    """Bound group_order**(r-1) * q on r-generated representation classes
    with image inside a fixed subgroup of GL over F_q."""
    if group_order < 1 or r < 1 or q < 1:
        raise ParameterError(_MOD, "bad-argument", "all arguments must be >= 1")
    return group_order ** (r - 1) * q


# --------------------------------------------------------------------------
# named constants


@dataclass(frozen=True)
class ConstantRequest:
    id: str
    params: dict = field(default_factory=dict)


_CONSTANT_PARAMS = {
    "c_nil": (),
    "c_sol": (),
    "K_minus": (),
    "K_prime_profile": ("p", "k_max"),
    "K_profile": ("p", "k_max"),
    "alt_formation": ("c0", "r"),
    "sigma_formation_rho": ("c0", "p", "k"),
    "g_alpha": ("alpha",),
    "sl2pf_cf": ("f",),
    "general_lower_bound": ("s_order", "n0", "q", "r"),
    "wreath_lower_bound": ("s_order", "t_order", "d", "n0", "q", "r"),
    "image_count_bound": ("group_order", "r", "q"),
    "sylow_gl_order": ("p", "n", "q"),
}


def _require(params: dict, names, cid: str):
    for name in names:
        if name not in params:
            raise ParameterError(_MOD, "missing-parameter", f"{cid}: missing parameter '{name}'")


def c_nil() -> float:
    return 5 * math.log(2) / (2 * math.log(3))


def c_sol() -> float:
    return 2.0 / 3.0 + c_nil()


def k_minus() -> float:
    return 2 * math.log(3) / (5 * math.log(2))


def alt_formation_abscissa(c0: int, r: int) -> float:
    """c0 log2(c0!) / ((c0 - delta)(c0 - 1)) * (r-1) + 1, delta = 1 odd / 2 even."""
    if c0 < 3 or r < 1:
        raise ParameterError(_MOD, "bad-parameter", f"need c0 >= 3, r >= 1 (got {c0}, {r})")
    delta = 1 if c0 % 2 else 2
    log2_fact = math.log(math.factorial(c0)) / math.log(2)
    return c0 * log2_fact / ((c0 - delta) * (c0 - 1)) * (r - 1) + 1.0


def sigma_formation_rho(c0: int, p: int, k: int, r: Optional[int] = None) -> float:
    """rho(p^k) = ((c0-1) log(k prod_{i<=c0}(1 - p^{-ik})) + log(c0!)) /
    (c0 (c0-1) log(p^k)); with r given, the abscissa (c0 + rho)(r-1) + 1."""
    if c0 < 2 or k < 1 or not is_prime(p):
        raise ParameterError(_MOD, "bad-parameter", f"bad (c0, p, k) = ({c0}, {p}, {k})")
    prod = Fraction(1)
    qk = p**k
    for i in range(1, c0 + 1):
        prod *= 1 - Fraction(1, qk**i)
    inner = k * prod  # exact rational, one final log
    rho = ((c0 - 1) * math.log(inner) + math.log(math.factorial(c0))) / (
        c0 * (c0 - 1) * k * math.log(p)
    )
    if r is None:
        return rho
    return (c0 + rho) * (r - 1) + 1.0


def g_alpha_abscissa(alpha) -> float:
    a = float(Fraction(alpha))
    if a < 0:
        raise ParameterError(_MOD, "bad-parameter", f"alpha must be >= 0, got {alpha}")
    return a / 2.0 + 1.0


def sl2_frobenius_extension_abscissa(f: int) -> float:
    """3/2 - (f-1)/(4f) for a prime twist order f >= 5."""
    if f < 5 or not is_prime(f):
        raise ParameterError(_MOD, "bad-parameter", f"f must be a prime >= 5, got {f}")
    return 1.5 - (f - 1) / (4.0 * f)


def general_lower_bound(s_order: int, n0: int, q: int, r: int) -> float:
    """log|S| / (n0 log q) * (r-1) + 1 for an absolutely irreducible
    S <= GL(n0, q)."""
    if min(s_order, n0, q, r) < 1 or q < 2:
        raise ParameterError(_MOD, "bad-parameter", "arguments out of range")
    return math.log(s_order) / (n0 * math.log(q)) * (r - 1) + 1.0


def wreath_lower_bound(s_order: int, t_order: int, d: int, n0: int, q: int, r: int) -> float:
    """log(|S|^(d-1) |T|) / ((d-1) n0 log q) * (r-1) + 1 with a transitive
    degree-d permutation group T on top."""
    if d < 2 or min(s_order, t_order, n0, r) < 1 or q < 2:
        raise ParameterError(_MOD, "bad-parameter", "arguments out of range")
    return (math.log(s_order) * (d - 1) + math.log(t_order)) / (
        (d - 1) * n0 * math.log(q)
    ) * (r - 1) + 1.0


def named_constant(req: ConstantRequest):
    """Evaluate a named constant; profiles are returned as GrowthProfile."""
    cid = req.id
    if cid not in _CONSTANT_PARAMS:
        raise ParameterError(_MOD, "unknown-constant", f"unknown constant id '{cid}'")
    params = dict(req.params)
    _require(params, _CONSTANT_PARAMS[cid], cid)
    if cid == "c_nil":
        return c_nil()
    if cid == "c_sol":
        return c_sol()
    if cid == "K_minus":
        return k_minus()
    if cid == "K_prime_profile":
        return kprime_profile(params["p"], params["k_max"], params.get("ceiling"))
    if cid == "K_profile":
        return k_profile(params["p"], params["k_max"], params.get("ceiling"))
    if cid == "alt_formation":
        return alt_formation_abscissa(params["c0"], params["r"])
    if cid == "sigma_formation_rho":
        return sigma_formation_rho(params["c0"], params["p"], params["k"], params.get("r"))
    if cid == "g_alpha":
        return g_alpha_abscissa(params["alpha"])
    if cid == "sl2pf_cf":
        return sl2_frobenius_extension_abscissa(params["f"])
    if cid == "general_lower_bound":
        return general_lower_bound(params["s_order"], params["n0"], params["q"], params["r"])
    if cid == "wreath_lower_bound":
        return wreath_lower_bound(
            params["s_order"], params["t_order"], params["d"], params["n0"], params["q"], params["r"]
        )
    if cid == "image_count_bound":
        return image_count_upper_bound(params["group_order"], params["r"], params["q"])
    if cid == "sylow_gl_order":
        return sylow_gl_order(params["p"], params["n"], params["q"]).value
    raise AssertionError("unreachable")
