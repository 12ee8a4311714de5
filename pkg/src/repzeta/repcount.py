"""Exact counts of absolutely irreducible representations over finite fields.

``count_abs_irr`` dispatches on a GroupSpec family and returns the number of
n-dimensional absolutely irreducible representations over F_{p^j}, exact
whenever a closed count exists.  Brute-force oracles (shift-orbit
enumeration for the lamplighters, character-orbit counting for virtually
abelian groups) back the closed forms, and ``count_irr`` aggregates
Frobenius orbits into plain irreducible counts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Optional

from . import arith, wedderburn
from .errors import (
    CapabilityError,
    CapExceededError,
    InternalConsistencyError,
    ParameterError,
    UnsupportedSpecError,
)

_MOD = "repcount"

LAMPLIGHTER_ENUM_CAP = 1 << 21  # a**n states for the enumeration oracle
VA_RANK_CAP = 2
VA_POINT_GROUP_CAP = 6

FAMILIES = (
    "trivial",
    "zhat",
    "zhat_power",
    "zp_power",
    "cyclic",
    "finite_abelian",
    "matrix_algebra",
    "ring_product",
    "group_product",
    "lamplighter",
    "virtually_abelian",
    "sl2_product",
    "finite_group",
    "free_pro_p",
)


class CountQuery(NamedTuple):
    p: int
    j: int
    n: int


class CountResult(NamedTuple):
    value: int
    exactness: str  # "exact" | "lower_bound" | "upper_bound"


@dataclass(frozen=True)
class GroupSpec:
    family: str
    params: tuple = ()  # sorted (key, value) pairs; values hashable

    def param(self, key, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default

    def __str__(self):
        return to_json(self)


def _spec(family: str, **params) -> GroupSpec:
    return GroupSpec(family, tuple(sorted(params.items())))


# ---- constructors


def trivial() -> GroupSpec:
    return _spec("trivial")


def zhat() -> GroupSpec:
    return _spec("zhat")


def zhat_power(r: int) -> GroupSpec:
    if r < 1:
        raise ParameterError(_MOD, "bad-parameter", f"r must be >= 1, got {r}")
    return _spec("zhat_power", r=r)


free_abelian_pro = zhat_power  # alias


def zp_power(p: int, r: int) -> GroupSpec:
    if not arith.is_prime(p) or r < 1:
        raise ParameterError(_MOD, "bad-parameter", f"bad (p, r) = ({p}, {r})")
    return _spec("zp_power", p=p, r=r)


def cyclic(m: int) -> GroupSpec:
    if m < 1:
        raise ParameterError(_MOD, "bad-parameter", f"m must be >= 1, got {m}")
    return _spec("cyclic", m=m)


def finite_abelian(orders) -> GroupSpec:
    orders = tuple(int(m) for m in orders)
    if not orders or any(m < 1 for m in orders):
        raise ParameterError(_MOD, "bad-parameter", "orders must be positive")
    return _spec("finite_abelian", orders=orders)


def matrix_algebra(n: int, p: int, k: int) -> GroupSpec:
    if n < 1 or k < 1 or not arith.is_prime(p):
        raise ParameterError(_MOD, "bad-parameter", f"bad (n, p, k) = ({n}, {p}, {k})")
    return _spec("matrix_algebra", n=n, p=p, k=k)


def ring_product(*specs: GroupSpec) -> GroupSpec:
    if not specs:
        raise ParameterError(_MOD, "bad-parameter", "need at least one factor")
    return _spec("ring_product", factors=tuple(specs))


def group_product(a: GroupSpec, b: GroupSpec) -> GroupSpec:
    return _spec("group_product", left=a, right=b)


def lamplighter(a: int) -> GroupSpec:
    if a not in (2, 3):
        raise ParameterError(_MOD, "bad-parameter", f"lamplighter base must be 2 or 3, got {a}")
    return _spec("lamplighter", a=a)


VA_PRESETS = ("zwrc2", "zwrc3", "dinf", "bs1m1")


def virtually_abelian(
    preset: Optional[str] = None,
    rank: Optional[int] = None,
    action=None,
    nonsplit_lift: Optional[tuple] = None,
) -> GroupSpec:
    """Z^rank x| P given by integer action matrices, or a named preset.

    ``nonsplit_lift`` marks a non-split C2 extension: the square of the
    lifted involution equals the given lattice vector.
    """
    if preset is not None:
        if preset not in VA_PRESETS:
            raise ParameterError(_MOD, "bad-parameter", f"unknown preset '{preset}'")
        return _spec("virtually_abelian", preset=preset)
    if rank is None or action is None:
        raise ParameterError(_MOD, "bad-parameter", "need preset or (rank, action)")
    action = tuple(tuple(tuple(int(x) for x in row) for row in m) for m in action)
    extra = {"nonsplit_lift": tuple(int(x) for x in nonsplit_lift)} if nonsplit_lift else {}
    return _spec("virtually_abelian", rank=int(rank), action=action, **extra)


def sl2_product(alpha) -> GroupSpec:
    alpha = Fraction(alpha)
    if alpha < 0:
        raise ParameterError(_MOD, "bad-parameter", f"alpha must be >= 0, got {alpha}")
    return _spec("sl2_product", alpha=alpha)


def finite_group(
    degree: Optional[int] = None,
    generators=None,
    name: Optional[str] = None,
    override: Optional["wedderburn.RamifiedOverride"] = None,
) -> GroupSpec:
    if name is not None and generators is None:
        degree, generators = wedderburn.named_group(name)
    if degree is None or generators is None:
        raise ParameterError(_MOD, "bad-parameter", "need a named group or explicit generators")
    gens = tuple(tuple(int(x) for x in g) for g in generators)
    params = {"degree": int(degree), "generators": gens}
    if name:
        params["name"] = name
    if override is not None:
        params["override"] = override
    return _spec("finite_group", **params)


def free_pro_p(p: int, r: int) -> GroupSpec:
    if not arith.is_prime(p) or r < 1:
        raise ParameterError(_MOD, "bad-parameter", f"bad (p, r) = ({p}, {r})")
    return _spec("free_pro_p", p=p, r=r)


# --------------------------------------------------------------------------
# shift-orbit counting for the lamplighters


def periodic_orbit_count(a: int, n: int) -> int:
    """F_a(n) = sum_{d|n} a^d mu(n/d): sequences in (Z/a)^Z of exact period n."""
    if a < 2 or n < 1:
        raise ParameterError(_MOD, "bad-parameter", f"bad (a, n) = ({a}, {n})")
    return sum(a**d * arith.moebius(n // d) for d in arith.divisors(n))


def _negation_stable_period_count(n: int) -> int:
    """Exact-period-n sequences over Z/3 whose shift orbit is stable under
    negation.  Zero for odd n > 1; for n = 2^a u (u odd) the count is
    sum_{t|u} mu(u/t) 3^{2^{a-1} t} minus 1 when u = 1 (the zero sequence)."""
    if n == 1:
        return 1
    if n % 2:
        return 0
    a = (n & -n).bit_length() - 1
    u = n >> a
    s = sum(arith.moebius(u // t) * 3 ** (2 ** (a - 1) * t) for t in arith.divisors(u))
    return s - (1 if u == 1 else 0)


def lamplighter_orbit_oracle(a: int, q: int, n: int) -> int:
    """Brute-force count of dimension-n absolutely irreducible classes of the
    base-a lamplighter over F_q: shift orbits of exact-period-n sequences in
    (Z/a)^n stable under v -> q*v, times (q-1) central characters."""
    if a not in (2, 3):
        raise ParameterError(_MOD, "bad-parameter", f"base must be 2 or 3, got {a}")
    if arith.is_prime_power(q) is None:
        raise ParameterError(_MOD, "bad-parameter", f"q={q} is not a prime power")
    if a**n > LAMPLIGHTER_ENUM_CAP:
        raise CapExceededError(_MOD, "enum-cap", f"{a}^{n} exceeds the enumeration cap")
    if q % a == 0:
        # base group dies in its own characteristic: only the cyclic quotient
        return (q - 1) if n == 1 else 0
    seen = set()
    orbits = 0
    for code in range(a**n):
        v = []
        x = code
        for _ in range(n):
            v.append(x % a)
            x //= a
        v = tuple(v)
        if v in seen:
            continue
        shifts = {v[i:] + v[:i] for i in range(n)}
        if len(shifts) != n or shifts & seen:
            seen |= shifts
            continue
        seen |= shifts
        qv = tuple((q * x) % a for x in v)
        if qv in shifts:
            orbits += 1
    return (q - 1) * orbits


def _lamplighter_count(a: int, q: int, n: int) -> int:
    """Closed-form lamplighter counts (validated against the oracle)."""
    if q % a == 0:
        return (q - 1) if n == 1 else 0
    if a == 2:
        return (q - 1) * periodic_orbit_count(2, n) // n
    if q % 3 == 1:
        return (q - 1) * periodic_orbit_count(3, n) // n
    h = _negation_stable_period_count(n)
    return (q - 1) * h // n if h else 0


# --------------------------------------------------------------------------
# virtually abelian counting (character orbits, Smith-form solution counts)


def _smith_diagonal(rows):
    """Elementary divisors (including zeros) of an integer matrix."""
    m = [list(r) for r in rows]
    if not m:
        return []
    nr, nc = len(m), len(m[0])
    diag = []
    r = c = 0
    while r < nr and c < nc:
        piv = None
        best = None
        for i in range(r, nr):
            for jj in range(c, nc):
                v = abs(m[i][jj])
                if v and (best is None or v < best):
                    best, piv = v, (i, jj)
        if piv is None:
            break
        i0, j0 = piv
        m[r], m[i0] = m[i0], m[r]
        for row in m:
            row[c], row[j0] = row[j0], row[c]
        while True:
            done = True
            for i in range(r + 1, nr):
                if m[i][c]:
                    f = m[i][c] // m[r][c]
                    for jj in range(c, nc):
                        m[i][jj] -= f * m[r][jj]
                    if m[i][c]:
                        m[r], m[i] = m[i], m[r]
                        done = False
            for jj in range(c + 1, nc):
                if m[r][jj]:
                    f = m[r][jj] // m[r][c]
                    for i in range(r, nr):
                        m[i][jj] -= f * m[i][c]
                    if m[r][jj]:
                        for i in range(nr):
                            m[i][c], m[i][jj] = m[i][jj], m[i][c]
                        done = False
            if done:
                break
        diag.append(abs(m[r][c]))
        r += 1
        c += 1
    return diag + [0] * (min(nr, nc) - len(diag))


def _solution_count(rows, d: int, char_p: int) -> int:
    """Number of characters Z^d -> closure(F_p)* killed by every row of the
    integer constraint matrix.  Infinite kernels are rejected (the Frobenius
    row always makes the system full rank in our uses)."""
    diag = _smith_diagonal(rows)
    nonzero = [x for x in diag if x]
    if len(nonzero) < d:
        raise InternalConsistencyError(_MOD, "infinite-kernel", "constraint system not full rank")
    count = 1
    for x in nonzero:
        while x % char_p == 0:
            x //= char_p
        count *= x
    return count


def _matmul(a, b):
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n)
    )


def _group_closure(mats, cap):
    ident = tuple(tuple(1 if i == j else 0 for j in range(len(mats[0]))) for i in range(len(mats[0])))
    elems = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in mats:
                y = _matmul(x, g)
                if y not in elems:
                    if len(elems) >= cap:
                        raise CapExceededError(_MOD, "cap-exceeded", "point group too large")
                    elems.add(y)
                    nxt.append(y)
        frontier = nxt
    return sorted(elems)


def _va_data(spec: GroupSpec):
    preset = spec.param("preset")
    if preset == "zwrc2":
        return 2, [((0, 1), (1, 0))], None
    if preset == "zwrc3":
        return 3, [((0, 1, 0), (0, 0, 1), (1, 0, 0))], None
    if preset == "dinf":
        return 1, [((-1,),)], None
    if preset == "bs1m1":
        return 2, [((-1, 0), (0, 1))], (0, 1)
    rank = spec.param("rank")
    return rank, list(spec.param("action")), spec.param("nonsplit_lift")


def virtually_abelian_orbit_oracle(spec: GroupSpec, q: int, n: int) -> int:
    """Count dimension-n absolutely irreducible classes over F_q of a
    virtually abelian spec by Frobenius-stable character-orbit counting.

    Characters of Z^d with values in the algebraic closure are vectors of
    prime-to-p torsion; a class is F_q-rational iff the q-power Frobenius
    maps its point-group orbit to itself.  Orbit counts are Burnside sums
    of Smith-form solution counts of integer congruence systems, so no
    field elements are enumerated and degree-12 local data stays cheap.
    Orbits with stabilizer H get one twist per F_q-rational character of H
    (split case) or per rational lift value (the designated non-split
    preset); other non-split stabilizer situations are refused.
    """
    pp = arith.is_prime_power(q)
    if pp is None:
        raise ParameterError(_MOD, "bad-parameter", f"q={q} is not a prime power")
    if spec.family != "virtually_abelian":
        raise ParameterError(_MOD, "bad-parameter", "spec is not virtually abelian")
    if n < 1:
        raise ParameterError(_MOD, "bad-parameter", "n must be >= 1")
    d, action, nonsplit_lift = _va_data(spec)
    if d > VA_RANK_CAP:
        raise CapExceededError(_MOD, "rank-cap", f"abelian rank {d} exceeds cap {VA_RANK_CAP}")
    char_p = pp.p
    group = _group_closure(action, VA_POINT_GROUP_CAP)
    order = len(group)
    ident = tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d))
    abelian = all(_matmul(g, h) == _matmul(h, g) for g in group for h in group)
    if not abelian:
        raise UnsupportedSpecError(
            _MOD, "extension-obstruction", "non-abelian point groups are not supported"
        )
    subgroups = _subgroups_of(group, ident)

    def transpose(m):
        return tuple(tuple(m[j][i] for j in range(d)) for i in range(d))

    def stab_ge_count(h_sub, sigma):
        # characters with stabilizer containing h_sub and Frobenius twist
        # sigma: rows (M_h^T - I) for h in h_sub, plus (q I - M_sigma^T)
        rows = []
        for h in h_sub:
            ht = transpose(h)
            for i in range(d):
                row = [ht[i][jj] - (1 if i == jj else 0) for jj in range(d)]
                if any(row):
                    rows.append(row)
        st = transpose(sigma)
        for i in range(d):
            rows.append([q * (1 if i == jj else 0) - st[i][jj] for jj in range(d)])
        return _solution_count(rows, d, char_p)

    def exact_stab_count(h_sub, sigma, memo):
        # inclusion-exclusion down the subgroup lattice above h_sub
        key = frozenset(h_sub)
        if key in memo:
            return memo[key]
        val = stab_ge_count(h_sub, sigma)
        for k_sub in subgroups:
            if set(k_sub) > set(h_sub):
                val -= exact_stab_count(k_sub, sigma, memo)
        memo[key] = val
        return val

    total = 0
    for h_sub in subgroups:
        if order // len(h_sub) != n:
            continue
        fixed_orbits = 0
        for sigma in group:
            fixed_orbits += exact_stab_count(h_sub, sigma, {})
        if fixed_orbits % order != 0:
            raise InternalConsistencyError(_MOD, "orbit-count", "Burnside sum not divisible")
        fixed_orbits //= order
        if len(h_sub) == 1:
            total += fixed_orbits
        elif nonsplit_lift is None:
            total += fixed_orbits * _hom_count_to_units(h_sub, q)
        else:
            total += _nonsplit_stable_count(h_sub, nonsplit_lift, d, q, transpose)
    return total


def _subgroups_of(group, ident):
    import itertools

    found = {}
    for r_ in range(len(group) + 1):
        for gens in itertools.combinations(group, r_):
            sub = tuple(_group_closure(list(gens) or [ident], VA_POINT_GROUP_CAP))
            found.setdefault(sub, list(sub))
    return list(found.values())


def _nonsplit_stable_count(h_sub, lift_square, d, q, transpose):
    """Rational classes over a stabilized character in the non-split C2
    preset: the lift t satisfies t^2 = b in the lattice, so extensions are
    pairs (chi invariant and Frobenius-fixed, w in F_q^*) with w^2 = chi(b).
    Summing over the value chi(b) = w^2 reparametrizes the b-coordinate by
    w, leaving gcd(2, q-1) choices on the inverted coordinate."""
    if len(h_sub) != 2 or d != 2:
        raise UnsupportedSpecError(
            _MOD, "extension-obstruction", "non-split stabilizer case not supported"
        )
    sigma = next(h for h in h_sub if any(h[i][i] != 1 for i in range(d)))
    st = transpose(sigma)
    b_fixed = all(
        sum(st[i][jj] * lift_square[jj] for jj in range(d)) == lift_square[i] for i in range(d)
    )
    if not b_fixed:
        raise UnsupportedSpecError(_MOD, "extension-obstruction", "unsupported non-split lift")
    return math.gcd(2, q - 1) * (q - 1)


def _is_cyclic(sub) -> bool:
    n = len(sub)
    for g in sub:
        x = g
        order = 1
        ident = tuple(tuple(1 if i == j else 0 for j in range(len(g))) for i in range(len(g)))
        while x != ident:
            x = _matmul(x, g)
            order += 1
        if order == n:
            return True
    return n == 1


def _hom_count_to_units(sub, q: int) -> int:
    """|Hom(H, F_q^*)| for a small abelian H given as matrices."""
    n = len(sub)
    if n == 1:
        return 1
    if _is_cyclic(sub):
        return math.gcd(n, q - 1)
    if n == 4:  # Klein four group
        return math.gcd(2, q - 1) ** 2
    raise UnsupportedSpecError(_MOD, "extension-obstruction", "unsupported stabilizer shape")


def _va_count(spec: GroupSpec, q: int, n: int) -> int:
    """Closed-form counts for the named presets; oracle for generic specs."""
    preset = spec.param("preset")
    g2 = math.gcd(2, q - 1)
    if preset == "zwrc2":
        if n == 1:
            return (q - 1) * g2
        if n == 2:
            return (q - 1) ** 2
        return 0
    if preset == "dinf":
        if n == 1:
            return g2 * g2
        if n == 2:
            return q - g2
        return 0
    if preset == "bs1m1":
        if n == 1:
            return (q - 1) * g2
        if n == 2:
            return (q - 1) * (q - g2)
        return 0
    if preset == "zwrc3":
        # derived by the same orbit analysis (validated by enumeration);
        # the point group is C3 acting by the cyclic shift on Z^3
        if n == 1:
            return (q - 1) * math.gcd(3, q - 1)
        if n == 3:
            return q * q * (q - 1)
        return 0
    return virtually_abelian_orbit_oracle(spec, q, n)


# --------------------------------------------------------------------------
# product of special linear groups with polynomial multiplicities


@lru_cache(maxsize=None)
def _ordered_factorizations(n: int, k: int, cap: int) -> int:
    """Ordered k-tuples of integers in [2, cap] with product n."""
    if k == 0:
        return 1 if n == 1 else 0
    total = 0
    for dd in arith.divisors(n):
        if 2 <= dd <= cap:
            total += _ordered_factorizations(n // dd, k - 1, cap)
    return total


def _sl2_copies(alpha: Fraction, p: int) -> int:
    """floor(p^alpha), exact for rational alpha."""
    num, den = alpha.numerator, alpha.denominator
    return arith.integer_nth_root(p**num, den)


def _sl2_char_stream_count(alpha: Fraction, p: int, n: int) -> int:
    """Characteristic-p count: tensor products over the floor(p^alpha) copies
    in characteristic p, one representation per dimension 1..p per copy,
    identical over every F_{p^j}.  Copies exist only at primes p > 3."""
    if n == 1:
        return 1
    if p <= 3:
        return 0
    copies = _sl2_copies(alpha, p)
    omega = sum(arith.factorize(n).values())
    total = 0
    for k in range(1, omega + 1):
        ways = _ordered_factorizations(n, k, p)
        if ways:
            total += math.comb(copies, k) * ways
    return total


def sl2_product_upper_envelope(spec: GroupSpec, query: CountQuery) -> CountResult:
    """Crude cross-characteristic envelope: the exact characteristic stream
    plus, for every other prime 3 < r <= 2n+1, copy count floor(r^alpha)
    tensor slots with at most 4r+10 nontrivial representations each and a
    dimension floor of (r-1)/2."""
    alpha = spec.param("alpha")
    p, j, n = query
    exact = _sl2_char_stream_count(alpha, p, n)
    if n == 1:
        return CountResult(1, "exact")
    bound = exact
    log2n = max(1, n.bit_length())
    for r in arith.primes_up_to(2 * n + 1):
        r = int(r)
        if r <= 3 or r == p or (r - 1) // 2 > n:
            continue
        per = (2 * n + 1) ** (float(alpha) + 1) * (8 * n + 14)
        bound += int(math.ceil(per**log2n))
    return CountResult(bound, "upper_bound")


# --------------------------------------------------------------------------
# free pro-p bounds


def _free_pro_p_bound(p0: int, r: int, q: int, n: int) -> CountResult:
    """Sylow-subgroup image bounds; dimensions must be p-powers and (for
    n > 1) p-th roots of unity must exist."""
    if n == 1:
        return CountResult(arith.p_part(p0, q - 1) ** r, "exact")
    m = n
    while m % p0 == 0:
        m //= p0
    if m != 1:
        return CountResult(0, "exact")
    if p0 == 2:
        if q % 2 == 0:
            return CountResult(0, "exact")
        if q % 4 == 1:
            val = 2 ** ((n - 1) * (r - 1)) * arith.p_part(2, q - 1) ** (n * (r - 1) + 1)
        else:
            val = 2 ** ((n + n // 2 - 1) * (r - 1) + 1) * arith.p_part(2, q + 1) ** ((n // 2) * (r - 1))
        return CountResult(val, "upper_bound")
    if (q - 1) % p0 != 0:
        return CountResult(0, "exact")
    val = arith.p_part(p0, q - 1) ** (n * (r - 1) + 1) * p0 ** (((n - 1) // (p0 - 1)) * (r - 1))
    return CountResult(val, "upper_bound")


# --------------------------------------------------------------------------
# the dispatcher


def count_abs_irr(spec: GroupSpec, query, mode: str = "exact") -> CountResult:
    """Number of n-dimensional absolutely irreducible representations over
    F_{p^j}.  ``mode='bound'`` permits tagged non-exact answers for the
    bounds-only families."""
    if not isinstance(query, CountQuery):
        query = CountQuery(*query)
    p, j, n = query
    if not arith.is_prime(p) or j < 1 or n < 1:
        raise ParameterError(_MOD, "bad-query", f"bad query {query}")
    fam = spec.family
    q = p**j

    if fam == "trivial":
        return CountResult(1 if n == 1 else 0, "exact")
    if fam == "zhat":
        return CountResult(q - 1 if n == 1 else 0, "exact")
    if fam == "zhat_power":
        return CountResult((q - 1) ** spec.param("r") if n == 1 else 0, "exact")
    if fam == "zp_power":
        if n != 1:
            return CountResult(0, "exact")
        return CountResult(arith.p_part(spec.param("p"), q - 1) ** spec.param("r"), "exact")
    if fam == "cyclic":
        return CountResult(math.gcd(spec.param("m"), q - 1) if n == 1 else 0, "exact")
    if fam == "finite_abelian":
        if n != 1:
            return CountResult(0, "exact")
        val = 1
        for m in spec.param("orders"):
            val *= math.gcd(m, q - 1)
        return CountResult(val, "exact")
    if fam == "matrix_algebra":
        ok = p == spec.param("p") and n == spec.param("n") and j % spec.param("k") == 0
        return CountResult(spec.param("k") if ok else 0, "exact")
    if fam == "ring_product":
        val = 0
        for f in spec.param("factors"):
            val += count_abs_irr(f, query, mode).value
        return CountResult(val, "exact")
    if fam == "group_product":
        return convolve_product(spec.param("left"), spec.param("right"), query)
    if fam == "lamplighter":
        return CountResult(_lamplighter_count(spec.param("a"), q, n), "exact")
    if fam == "virtually_abelian":
        return CountResult(_va_count(spec, q, n), "exact")
    if fam == "sl2_product":
        return CountResult(_sl2_char_stream_count(spec.param("alpha"), p, n), "exact")
    if fam == "finite_group":
        return _finite_group_count(spec, query)
    if fam == "free_pro_p":
        res = _free_pro_p_bound(spec.param("p"), spec.param("r"), q, n)
        if res.exactness != "exact" and mode != "bound":
            raise CapabilityError(
                _MOD,
                "bounds-only",
                "family 'free_pro_p' only supports mode='bound' beyond dimension 1",
            )
        return res
    raise CapabilityError(_MOD, "unknown-family", f"family '{fam}' is not countable")


def _finite_group_count(spec: GroupSpec, query: CountQuery) -> CountResult:
    p, j, n = query
    pres = _presentation_for(spec)
    if pres.order % p == 0:
        override = spec.param("override")
        if override is None:
            raise CapabilityError(
                _MOD,
                "modular-data-missing",
                f"family 'finite_group': p={p} divides |G|={pres.order} and no override is loaded",
            )
        return CountResult(override.lookup(p, j, n), "exact")
    dec = _decomposition_for(spec, p)
    return CountResult(wedderburn.counts_from_decomposition(dec, j, n), "exact")


@lru_cache(maxsize=None)
def _presentation_cached(degree, generators):
    return wedderburn.FiniteGroupPresentation(degree, generators)


def _presentation_for(spec: GroupSpec):
    return _presentation_cached(spec.param("degree"), spec.param("generators"))


@lru_cache(maxsize=None)
def _decomposition_cached(degree, generators, p):
    return wedderburn.decompose_group_algebra(_presentation_cached(degree, generators), p)


def _decomposition_for(spec: GroupSpec, p: int):
    return _decomposition_cached(spec.param("degree"), spec.param("generators"), p)


def convolve_product(spec_a: GroupSpec, spec_b: GroupSpec, query) -> CountResult:
    """Dirichlet convolution over the dimension: counts of a direct product
    of groups."""
    if not isinstance(query, CountQuery):
        query = CountQuery(*query)
    p, j, n = query
    total = 0
    for d in arith.divisors(n):
        ca = count_abs_irr(spec_a, CountQuery(p, j, d)).value
        if ca:
            total += ca * count_abs_irr(spec_b, CountQuery(p, j, n // d)).value
    return CountResult(total, "exact")


def count_irr(spec: GroupSpec, query) -> CountResult:
    """Irreducible (not necessarily absolutely irreducible) representation
    count: Frobenius orbits of size e of new-at-level-e absolutely
    irreducible classes fuse into single irreducibles of dimension n = e*d."""
    if not isinstance(query, CountQuery):
        query = CountQuery(*query)
    p, j, n = query
    total = 0
    for e in arith.divisors(n):
        d = n // e
        m_star = new_at_level(spec, p, j, e, d)
        if m_star % e != 0:
            raise InternalConsistencyError(
                _MOD, "orbit-size", f"new-at-level count {m_star} not divisible by orbit size {e}"
            )
        total += m_star // e
    return CountResult(total, "exact")


def new_at_level(spec: GroupSpec, p: int, j: int, e: int, d: int) -> int:
    """Absolutely irreducible d-dimensional classes over F_{p^{je}} whose
    minimal field over F_{p^j} is exactly F_{p^{je}}."""
    m_star = 0
    for f in arith.divisors(e):
        m_star += arith.moebius(e // f) * count_abs_irr(spec, CountQuery(p, j * f, d)).value
    if m_star < 0:
        raise InternalConsistencyError(
            _MOD, "negative-new-count", f"negative new-at-level count for {spec.family} at ({p},{j},{e},{d})"
        )
    return m_star


def exact_count_function(spec: GroupSpec):
    """Family-specialized closure f(p, j, n, q) -> int for hot loops."""

    fam = spec.family
    if fam == "trivial":
        return lambda p, j, n, q: 1 if n == 1 else 0
    if fam == "zhat":
        return lambda p, j, n, q: q - 1 if n == 1 else 0
    if fam == "zhat_power":
        r = spec.param("r")
        return lambda p, j, n, q: (q - 1) ** r if n == 1 else 0
    if fam == "zp_power":
        p0, r = spec.param("p"), spec.param("r")
        return lambda p, j, n, q: arith.p_part(p0, q - 1) ** r if n == 1 else 0
    if fam == "cyclic":
        m = spec.param("m")
        return lambda p, j, n, q: math.gcd(m, q - 1) if n == 1 else 0
    if fam == "lamplighter":
        a = spec.param("a")
        return lambda p, j, n, q: _lamplighter_count(a, q, n)
    if fam == "virtually_abelian" and spec.param("preset") is not None:
        return lambda p, j, n, q: _va_count(spec, q, n)
    if fam == "sl2_product":
        alpha = spec.param("alpha")
        return lambda p, j, n, q: _sl2_char_stream_count(alpha, p, n)
    return lambda p, j, n, q: count_abs_irr(spec, CountQuery(p, j, n)).value


# documented per-family growth constants c with counts <= 2 * q^(c*n);
# used as default tail-bound inputs for truncated evaluation
DEFAULT_UBERG_C = {
    "trivial": 0.0,
    "zhat": 1.0,
    "matrix_algebra": 0.0,
    "lamplighter": 2.0,
    "virtually_abelian": 2.0,
}


def default_uberg_c(spec: GroupSpec) -> float:
    fam = spec.family
    if fam in ("zhat_power", "zp_power", "free_pro_p"):
        return float(spec.param("r"))
    if fam == "cyclic":
        # counts bounded by the constant m: m <= 2 * q^c at every q >= 2
        return max(0.0, math.log2(spec.param("m")) - 1.0)
    if fam == "finite_abelian":
        bound = 1
        for m in spec.param("orders"):
            bound *= m
        return max(0.0, math.log2(bound) - 1.0)
    if fam == "finite_group":
        return max(0.0, math.log2(_presentation_for(spec).order) - 1.0)
    if fam == "sl2_product":
        return float(spec.param("alpha")) + 1.0
    if fam == "ring_product":
        return max(default_uberg_c(f) for f in spec.param("factors"))
    if fam == "group_product":
        return default_uberg_c(spec.param("left")) + default_uberg_c(spec.param("right")) + 1.0
    c = DEFAULT_UBERG_C.get(fam)
    if c is None:
        raise CapabilityError(_MOD, "no-growth-constant", f"no documented constant for '{fam}'")
    return c


KNOWN_ABSCISSA = {
    "trivial": 1.0,
    "zhat": 2.0,
    "cyclic": 1.0,
    "finite_abelian": 1.0,
    "finite_group": 1.0,
}


def known_abscissa(spec: GroupSpec) -> float:
    """Documented abscissa of convergence (used as a precondition guard)."""
    fam = spec.family
    if fam in KNOWN_ABSCISSA:
        return KNOWN_ABSCISSA[fam]
    if fam == "zhat_power":
        return spec.param("r") + 1.0
    if fam == "zp_power":
        return float(spec.param("r"))  # safe upper guard; exact value needs K(p)
    if fam == "matrix_algebra":
        n = spec.param("n")
        return (n - 1) / n
    if fam == "lamplighter":
        return 2.0
    if fam == "virtually_abelian":
        preset = spec.param("preset")
        return {"zwrc2": 2.0, "zwrc3": 2.0, "dinf": 1.5, "bs1m1": 2.0}.get(preset, 2.0)
    if fam == "sl2_product":
        return float(spec.param("alpha")) / 2.0 + 1.0
    if fam == "ring_product":
        return max(known_abscissa(f) for f in spec.param("factors"))
    if fam == "group_product":
        return known_abscissa(spec.param("left")) + known_abscissa(spec.param("right"))
    raise CapabilityError(_MOD, "no-known-abscissa", f"no documented abscissa for '{fam}'")


# --------------------------------------------------------------------------
# JSON serialization (round-trip stable)


def to_json(spec: GroupSpec) -> str:
    return json.dumps(_to_obj(spec), sort_keys=True)


def _to_obj(spec: GroupSpec):
    params = {}
    for k, v in spec.params:
        if isinstance(v, GroupSpec):
            params[k] = _to_obj(v)
        elif isinstance(v, tuple) and v and isinstance(v[0], GroupSpec):
            params[k] = [_to_obj(x) for x in v]
        elif isinstance(v, Fraction):
            params[k] = str(v) if v.denominator != 1 else v.numerator
        elif isinstance(v, tuple):
            params[k] = _tuples_to_lists(v)
        elif isinstance(v, wedderburn.RamifiedOverride):
            params[k] = v.to_obj()
        else:
            params[k] = v
    return {"family": spec.family, "params": params}


def _tuples_to_lists(v):
    if isinstance(v, tuple):
        return [_tuples_to_lists(x) for x in v]
    return v


def _lists_to_tuples(v):
    if isinstance(v, list):
        return tuple(_lists_to_tuples(x) for x in v)
    return v


def from_json(text: str) -> GroupSpec:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(_MOD, "parse-error", f"bad spec JSON: {exc}") from exc
    return _from_obj(obj)


def _from_obj(obj) -> GroupSpec:
    if not isinstance(obj, dict) or "family" not in obj:
        raise ParameterError(_MOD, "parse-error", "spec object needs a 'family' key")
    fam = obj["family"]
    if fam not in FAMILIES:
        raise ParameterError(_MOD, "unknown-family", f"unknown family '{fam}'")
    params = dict(obj.get("params", {}))
    if fam == "ring_product":
        params["factors"] = tuple(_from_obj(x) for x in params["factors"])
    if fam == "group_product":
        params["left"] = _from_obj(params["left"])
        params["right"] = _from_obj(params["right"])
    if fam == "sl2_product":
        params["alpha"] = Fraction(params["alpha"])
    if fam == "finite_group":
        params["generators"] = _lists_to_tuples(params["generators"])
        if "override" in params and params["override"] is not None:
            params["override"] = wedderburn.RamifiedOverride.from_obj(params["override"])
    if fam == "virtually_abelian":
        for key in ("action", "nonsplit_lift"):
            if key in params and params[key] is not None:
                params[key] = _lists_to_tuples(params[key])
    if fam == "finite_abelian":
        params["orders"] = tuple(params["orders"])
    return _spec(fam, **params)
