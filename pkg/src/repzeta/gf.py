"""Arithmetic in F_{p^j} and dense linear algebra over finite fields.

Elements of F_{p^j} are encoded as integers in [0, p^j): the base-p digits
of the integer are the coefficients of the residue polynomial.  The modulus
is the lexicographically smallest monic irreducible of its degree, so the
same (p, j) always produces the same field.  Fields up to 2^16 elements get
discrete log/exp tables for O(1) multiplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import arith
from .errors import ParameterError

_MOD = "gf"
_TABLE_CAP = 1 << 16


# --------------------------------------------------------------------------
# polynomials over F_p (coefficient lists of ints mod p, index = degree)


def _ptrim(f):
    while f and f[-1] == 0:
        f.pop()
    return f


def _padd(f, g, p):
    n = max(len(f), len(g))
    out = [0] * n
    for i, c in enumerate(f):
        out[i] = c
    for i, c in enumerate(g):
        out[i] = (out[i] + c) % p
    return _ptrim(out)


def _pmul(f, g, p):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return _ptrim(out)


def _pmod(f, m, p):
    f = list(f)
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(f) - 1 >= dm and f:
        c = f[-1] * inv_lead % p
        shift = len(f) - 1 - dm
        for i, b in enumerate(m):
            f[shift + i] = (f[shift + i] - c * b) % p
        _ptrim(f)
    return f


def _pgcd(f, g, p):
    f, g = list(f), list(g)
    while g:
        f, g = g, _pmod(f, g, p)
    if f:
        inv = pow(f[-1], p - 2, p)
        f = [c * inv % p for c in f]
    return f


def _ppowmod(f, e, m, p):
    result = [1]
    base = _pmod(f, m, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), m, p)
        base = _pmod(_pmul(base, base, p), m, p)
        e >>= 1
    return result


def _is_irreducible(f, p) -> bool:
    """Monic f of degree j is irreducible iff it shares no root with any
    subfield: gcd(f, x^{p^i} - x) = 1 for all 1 <= i <= j//2."""
    j = len(f) - 1
    if j == 1:
        return True
    x = [0, 1]
    xq = x
    for _ in range(j // 2):
        xq = _ppowmod(xq, p, f, p)
        g = _pgcd(f, _padd(xq, [0, p - 1], p), p)
        if len(g) - 1 > 0:
            return False
    return True


# --------------------------------------------------------------------------
# field descriptors


@dataclass(frozen=True)
class FieldDesc:
    """Immutable description of F_{p^j}; shareable across threads."""

    p: int
    j: int
    modulus: tuple  # monic, ascending coefficients, length j+1
    _exp: Optional[list] = field(default=None, compare=False, repr=False)
    _log: Optional[list] = field(default=None, compare=False, repr=False)

    @property
    def q(self) -> int:
        return self.p**self.j

    # ---- encoding helpers

    def _vec(self, a: int):
        p, out = self.p, []
        for _ in range(self.j):
            out.append(a % p)
            a //= p
        return out

    def _int(self, v) -> int:
        out = 0
        for c in reversed(v):
            out = out * self.p + c
        return out

    # ---- arithmetic on encoded elements

    def add(self, a: int, b: int) -> int:
        if self.j == 1:
            return (a + b) % self.p
        va, vb = self._vec(a), self._vec(b)
        return self._int([(x + y) % self.p for x, y in zip(va, vb)])

    def sub(self, a: int, b: int) -> int:
        if self.j == 1:
            return (a - b) % self.p
        va, vb = self._vec(a), self._vec(b)
        return self._int([(x - y) % self.p for x, y in zip(va, vb)])

    def neg(self, a: int) -> int:
        return self.sub(0, a)

    def mul(self, a: int, b: int) -> int:
        if self.j == 1:
            return a * b % self.p
        if a == 0 or b == 0:
            return 0
        self._ensure_tables()
        if self._exp is not None:
            return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]
        prod = _pmul(self._vec(a), self._vec(b), self.p)
        prod = _pmod(prod, list(self.modulus), self.p)
        prod += [0] * (self.j - len(prod))
        return self._int(prod)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in finite field")
        if self.j == 1:
            return pow(a, self.p - 2, self.p)
        self._ensure_tables()
        if self._exp is not None:
            return self._exp[(-self._log[a]) % (self.q - 1)]
        return self.pow(a, self.q - 2)

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e > 0 else 1
        e %= self.q - 1
        result = 1
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def frobenius(self, a: int) -> int:
        return self.pow(a, self.p)

    def elements(self):
        return range(self.q)

    def _ensure_tables(self):
        if self.j == 1 or self.q > _TABLE_CAP or self._exp is not None:
            return
        # find a generator of the multiplicative group, then tabulate
        q = self.q
        fac = arith.factorize(q - 1)
        mod = list(self.modulus)

        def raw_mul(a, b):
            prod = _pmul(self._vec(a), self._vec(b), self.p)
            prod = _pmod(prod, mod, self.p)
            prod += [0] * (self.j - len(prod))
            return self._int(prod)

        def raw_pow(a, e):
            r, base = 1, a
            while e:
                if e & 1:
                    r = raw_mul(r, base)
                base = raw_mul(base, base)
                e >>= 1
            return r

        g = None
        for cand in range(2, q):
            if all(raw_pow(cand, (q - 1) // r) != 1 for r in fac):
                g = cand
                break
        exp = [0] * (q - 1)
        log = [0] * q
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = raw_mul(x, g)
        object.__setattr__(self, "_exp", exp)
        object.__setattr__(self, "_log", log)


def make_field(p: int, j: int) -> FieldDesc:
    """F_{p^j} with the lexicographically smallest monic irreducible modulus.

    For j = 1 the modulus is x itself (prime-field marker).
    """
    if not arith.is_prime(p):
        raise ParameterError(_MOD, "not-prime", f"p={p} is not prime")
    if j < 1:
        raise ParameterError(_MOD, "bad-argument", f"j must be >= 1, got {j}")
    if j == 1:
        return FieldDesc(p, 1, (0, 1))
    for v in range(p**j):
        digits = []
        x = v
        for _ in range(j):
            digits.append(x % p)
            x //= p
        f = digits + [1]
        if _is_irreducible(f, p):
            return FieldDesc(p, j, tuple(f))
    raise AssertionError("no irreducible polynomial found")


_FIELD_CACHE: dict[tuple, FieldDesc] = {}


def field_for(q: int) -> FieldDesc:
    """The canonical field with q elements (q a prime power)."""
    pp = arith.is_prime_power(q)
    if pp is None:
        raise ParameterError(_MOD, "bad-argument", f"q={q} is not a prime power")
    key = (pp.p, pp.j)
    if key not in _FIELD_CACHE:
        _FIELD_CACHE[key] = make_field(pp.p, pp.j)
    return _FIELD_CACHE[key]


def subfield_contained(k: int, j: int) -> bool:
    """F_{p^k} embeds in F_{p^j} iff k | j."""
    if k < 1 or j < 1:
        raise ParameterError(_MOD, "bad-argument", "degrees must be >= 1")
    return j % k == 0


# --------------------------------------------------------------------------
# matrices


@dataclass
class GFMatrix:
    field: FieldDesc
    rows: int
    cols: int
    entries: list  # row-major encoded elements

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ParameterError(_MOD, "bad-dimensions", "dimensions must be positive")
        if len(self.entries) != self.rows * self.cols:
            raise ParameterError(_MOD, "bad-dimensions", "entry count mismatch")
        self.entries = [int(x) for x in self.entries]
        if any(x < 0 or x >= self.field.q for x in self.entries):
            raise ParameterError(_MOD, "bad-entry", "entries must be residues in [0, q)")

    def at(self, i, j):
        return self.entries[i * self.cols + j]

    def transpose(self) -> "GFMatrix":
        e = [self.at(i, j) for j in range(self.cols) for i in range(self.rows)]
        return GFMatrix(self.field, self.cols, self.rows, e)


def rank(m: GFMatrix) -> int:
    """Rank by Gaussian elimination; the input matrix is not modified."""
    F = m.field
    a = [list(m.entries[i * m.cols : (i + 1) * m.cols]) for i in range(m.rows)]
    r = 0
    for c in range(m.cols):
        piv = None
        for i in range(r, m.rows):
            if a[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = F.inv(a[r][c])
        a[r] = [F.mul(inv, x) for x in a[r]]
        for i in range(m.rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(a[i], a[r])]
        r += 1
        if r == m.rows:
            break
    return r


def random_matrix(field: FieldDesc, rows: int, cols: int, rng) -> GFMatrix:
    """Uniform i.i.d. entries from an explicitly threaded numpy Generator."""
    if rows < 1 or cols < 1:
        raise ParameterError(_MOD, "bad-dimensions", "dimensions must be positive")
    entries = rng.integers(0, field.q, size=rows * cols).tolist()
    return GFMatrix(field, rows, cols, entries)


def rank_mod_p(a: np.ndarray, p: int) -> int:
    """Rank of an integer matrix over F_p (vectorized elimination)."""
    a = np.asarray(a, dtype=np.int64) % p
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = a[r] * inv % p
        other = np.flatnonzero(a[:, c])
        other = other[other != r]
        if other.size:
            a[other] = (a[other] - np.outer(a[other, c], a[r])) % p
        r += 1
        if r == rows:
            break
    return r


# --------------------------------------------------------------------------
# polynomials over an arbitrary FieldDesc (used by the group-algebra split)


def poly_trim(f):
    while f and f[-1] == 0:
        f.pop()
    return f


def poly_add(F: FieldDesc, f, g):
    n = max(len(f), len(g))
    out = [0] * n
    for i, c in enumerate(f):
        out[i] = c
    for i, c in enumerate(g):
        out[i] = F.add(out[i], c)
    return poly_trim(out)


def poly_scale(F: FieldDesc, f, c):
    return poly_trim([F.mul(c, x) for x in f])


def poly_mul(F: FieldDesc, f, g):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = F.add(out[i + j], F.mul(a, b))
    return poly_trim(out)


def poly_divmod(F: FieldDesc, f, g):
    f = list(f)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    dg = len(g) - 1
    inv_lead = F.inv(g[-1])
    quot = [0] * max(0, len(f) - dg)
    while len(f) - 1 >= dg and f:
        c = F.mul(f[-1], inv_lead)
        shift = len(f) - 1 - dg
        quot[shift] = c
        for i, b in enumerate(g):
            f[shift + i] = F.sub(f[shift + i], F.mul(c, b))
        poly_trim(f)
    return poly_trim(quot), f


def poly_mod(F, f, g):
    return poly_divmod(F, f, g)[1]


def poly_monic(F: FieldDesc, f):
    if not f:
        return f
    return poly_scale(F, f, F.inv(f[-1]))


def poly_gcd(F: FieldDesc, f, g):
    f, g = list(f), list(g)
    while g:
        f, g = g, poly_mod(F, f, g)
    return poly_monic(F, f)


def poly_powmod(F: FieldDesc, f, e, m):
    result = [1]
    base = poly_mod(F, f, m)
    while e:
        if e & 1:
            result = poly_mod(F, poly_mul(F, result, base), m)
        base = poly_mod(F, poly_mul(F, base, base), m)
        e >>= 1
    return result


def poly_deriv(F: FieldDesc, f):
    out = []
    for i in range(1, len(f)):
        c = f[i]
        s = 0
        for _ in range(i % F.p):
            s = F.add(s, c)
        out.append(s)
    return poly_trim(out)


def _edf(F: FieldDesc, f, d, seed):
    """Equal-degree splitting: f squarefree, all factors of degree d."""
    if len(f) - 1 == d:
        return [f]
    q = F.q
    state = seed
    for _ in range(200):
        state = (state * 6364136223846793005 + 1442695040888963407) % (1 << 63)
        h = [(state >> (7 * i)) % q for i in range(len(f) - 1)]
        h = poly_trim(h)
        if len(h) < 1:
            continue
        if q % 2 == 1:
            g = poly_powmod(F, h, (q**d - 1) // 2, f)
            g = poly_add(F, g, [F.neg(1)])
        else:
            # trace map for characteristic 2
            g = [0]
            t = poly_mod(F, h, f)
            for _ in range(d * F.j):
                g = poly_add(F, g, t)
                t = poly_powmod(F, t, 2, f)
        g = poly_gcd(F, f, g)
        if 0 < len(g) - 1 < len(f) - 1:
            quot, rem = poly_divmod(F, f, g)
            assert not rem
            return _edf(F, g, d, state) + _edf(F, quot, d, state + 1)
    raise AssertionError("equal-degree splitting failed to progress")


def factor_poly(F: FieldDesc, f, seed: int = 1):
    """Irreducible monic factors of a monic polynomial over F (with
    multiplicities collapsed to the squarefree part; sufficient for minimal
    polynomials of semisimple elements, which are squarefree)."""
    f = poly_monic(F, list(f))
    sf = poly_gcd(F, f, poly_deriv(F, f)) if len(f) > 2 else [1]
    if len(sf) > 1:
        f, _ = poly_divmod(F, f, sf)
    factors = []
    x = [0, 1]
    xq = x
    d = 0
    while len(f) - 1 > 0:
        d += 1
        if 2 * d > len(f) - 1:
            factors.append(f)
            break
        xq = poly_powmod(F, xq, F.q, f)
        g = poly_gcd(F, f, poly_add(F, xq, [0, F.neg(1)]))
        if len(g) - 1 > 0:
            factors.extend(_edf(F, g, d, seed + d))
            f, _ = poly_divmod(F, f, g)
            xq = poly_mod(F, xq, f) if len(f) > 1 else xq
    factors.sort(key=lambda fac: (len(fac), fac))
    return factors
