"""Wedderburn decomposition of F_q[G] for small finite groups.

At a prime not dividing |G| the group algebra is semisimple; its center is
spanned by conjugacy class sums, and splitting the center into fields via
minimal-polynomial factorization yields the primitive central idempotents.
The component data (matrix size n_i, residue degree k_i) is everything the
representation counters need, since Schur indices over finite fields are
trivial.  Primes dividing |G| are handled by user-supplied or built-in
count overrides, never by modular-representation computation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import arith, gf
from .errors import (
    CapExceededError,
    InternalConsistencyError,
    ModularCaseError,
    ParameterError,
    ValidationError,
)

_MOD = "wedderburn"

GROUP_ORDER_CAP = 200


class FiniteGroupPresentation:
    """Permutation group on {0..degree-1}; order enumerated eagerly (capped)."""

    def __init__(self, degree: int, generators, cap: int = GROUP_ORDER_CAP):
        if degree < 1:
            raise ParameterError(_MOD, "bad-degree", f"degree must be >= 1, got {degree}")
        gens = [tuple(int(x) for x in g) for g in generators]
        for g in gens:
            if sorted(g) != list(range(degree)):
                raise ParameterError(_MOD, "not-a-permutation", f"{g} is not a permutation")
        self.degree = degree
        self.generators = tuple(gens)
        ident = tuple(range(degree))
        elems = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = tuple(x[g[i]] for i in range(degree))
                    if y not in elems:
                        if len(elems) >= cap:
                            raise CapExceededError(
                                _MOD, "cap-exceeded", f"group order exceeds cap {cap}"
                            )
                        elems.add(y)
                        nxt.append(y)
            frontier = nxt
        self.elements = sorted(elems)
        self.order = len(self.elements)
        self.index = {g: i for i, g in enumerate(self.elements)}
        self.identity = ident

    def mult(self, a, b):
        return tuple(a[b[i]] for i in range(self.degree))

    def inverse(self, a):
        inv = [0] * self.degree
        for i, x in enumerate(a):
            inv[x] = i
        return tuple(inv)

    def conjugacy_classes(self):
        seen = set()
        classes = []
        for g in self.elements:
            if g in seen:
                continue
            cls = set()
            for h in self.elements:
                cls.add(self.mult(self.mult(h, g), self.inverse(h)))
            seen |= cls
            classes.append(sorted(cls))
        classes.sort(key=lambda c: (len(c), c))
        return classes


class Component(NamedTuple):
    n: int  # matrix size
    k: int  # residue degree over the base field


@dataclass(frozen=True)
class SemisimpleDecomposition:
    q: int
    components: tuple  # sorted Components

    def __post_init__(self):
        total = sum(n * n * k for n, k in self.components)
        if any(n < 1 or k < 1 for n, k in self.components):
            raise InternalConsistencyError(_MOD, "bad-component", "component out of range")
        object.__setattr__(self, "_dim", total)

    @property
    def dimension(self) -> int:
        return self._dim


def counts_from_decomposition(dec: SemisimpleDecomposition, j: int, n: int) -> int:
    """Absolutely simple modules of dimension n over the degree-j extension:
    each component M_{n_i}(F_{q^{k_i}}) contributes k_i iff n_i = n, k_i | j."""
    if j < 1 or n < 1:
        raise ParameterError(_MOD, "bad-argument", "j and n must be >= 1")
    return sum(k for ni, k in dec.components if ni == n and j % k == 0)


def decompose_group_algebra(G: FiniteGroupPresentation, q: int) -> SemisimpleDecomposition:
    """Wedderburn data of F_q[G] for gcd(q, |G|) = 1.

    Class sums span the center; repeatedly factoring minimal polynomials of
    class sums splits the center into its field components.  For each
    primitive central idempotent e, k = dim of the field block and
    n = sqrt(dim(e F_q[G]) / k).
    """
    pp = arith.is_prime_power(q)
    if pp is None:
        raise ParameterError(_MOD, "bad-argument", f"q={q} is not a prime power")
    if math.gcd(q, G.order) != 1:
        raise ModularCaseError(
            _MOD,
            "modular-case",
            f"gcd(q, |G|) != 1 for q={q}, |G|={G.order}; supply a RamifiedOverride instead",
        )
    F = gf.make_field(pp.p, pp.j)
    classes = G.conjugacy_classes()
    t = len(classes)
    class_of = {}
    for ci, cls in enumerate(classes):
        for g in cls:
            class_of[g] = ci

    # structure constants of the class-sum basis: z_C z_D = sum_E c_{CDE} z_E
    raw = [[[0] * t for _ in range(t)] for _ in range(t)]
    for x in G.elements:
        cx = class_of[x]
        for y in G.elements:
            raw[cx][class_of[y]][class_of[G.mult(x, y)]] += 1
    # integer structure constants act through the prime subfield
    struct = [
        [[(raw[a][b][c] // len(classes[c])) % pp.p for c in range(t)] for b in range(t)]
        for a in range(t)
    ]

    def center_mul(u, v):
        out = [0] * t
        for a, ua in enumerate(u):
            if ua == 0:
                continue
            for b, vb in enumerate(v):
                if vb == 0:
                    continue
                coef = F.mul(ua, vb)
                row = struct[a][b]
                for c in range(t):
                    if row[c]:
                        out[c] = F.add(out[c], F.mul(coef, row[c] % pp.p))
        return out

    id_class = class_of[G.identity]
    one = [0] * t
    one[id_class] = 1

    def min_poly_in_block(x, e):
        """Monic minimal polynomial of x over F_q inside the block with unit e."""
        vecs = [list(e)]
        cur = list(e)
        while True:
            cur = center_mul(cur, x)
            coeffs = _solve_dependence(F, vecs, cur)
            if coeffs is not None:
                # x^d = sum c_i x^i, so the minimal polynomial is x^d - sum c_i x^i
                return [F.neg(c) for c in coeffs] + [1]
            vecs.append(list(cur))

    def poly_of_center(coeffs, x, e):
        acc = [F.mul(coeffs[0], c) for c in e]
        powx = list(e)
        for c in coeffs[1:]:
            powx = center_mul(powx, x)
            if c:
                acc = [F.add(a, F.mul(c, b)) for a, b in zip(acc, powx)]
        return acc

    idempotents = [one]
    for ci in range(t):
        z = [0] * t
        z[ci] = 1
        new_idems = []
        for e in idempotents:
            x = center_mul(e, z)
            mp = min_poly_in_block(x, e)
            factors = gf.factor_poly(F, mp, seed=27 + ci)
            if len(factors) == 1:
                new_idems.append(e)
                continue
            for fac in factors:
                cof, rem = gf.poly_divmod(F, mp, fac)
                if rem:
                    raise InternalConsistencyError(_MOD, "factor", "non-dividing factor")
                inv = _poly_inverse_mod(F, cof, fac)
                g = gf.poly_mod(F, gf.poly_mul(F, cof, inv), mp)
                new_idems.append(poly_of_center(g, x, e))
        idempotents = new_idems

    # each idempotent now spans a field block; read off (n_i, k_i)
    components = []
    inv_index = [G.index[G.inverse(g)] for g in G.elements]
    for e in idempotents:
        # k = dimension of the block e * center
        block_vecs = []
        for ci in range(t):
            z = [0] * t
            z[ci] = 1
            block_vecs.append(center_mul(e, z))
        k = _span_rank(F, block_vecs)
        # expand e to group coordinates, dim of the two-sided ideal e F_q[G]
        v = [e[class_of[g]] for g in G.elements]
        if pp.j == 1:
            mat = np.empty((G.order, G.order), dtype=np.int64)
            for hi in range(G.order):
                h = G.elements[hi]
                for gi in range(G.order):
                    mat[hi, gi] = v[G.index[G.mult(h, G.elements[inv_index[gi]])]]
            dim = gf.rank_mod_p(mat, pp.p)
        else:
            entries = []
            for hi in range(G.order):
                h = G.elements[hi]
                for gi in range(G.order):
                    entries.append(v[G.index[G.mult(h, G.elements[inv_index[gi]])]])
            dim = gf.rank(gf.GFMatrix(F, G.order, G.order, entries))
        n2 = dim // k
        n = math.isqrt(n2)
        if n * n != n2 or n2 * k != dim:
            raise InternalConsistencyError(_MOD, "component-shape", "block dimension not n^2 k")
        components.append(Component(n, k))
    components.sort()
    dec = SemisimpleDecomposition(q, tuple(components))
    if dec.dimension != G.order:
        raise InternalConsistencyError(
            _MOD, "dimension-identity", f"sum n_i^2 k_i = {dec.dimension} != |G| = {G.order}"
        )
    return dec


def _solve_dependence(F, vecs, target):
    """Coefficients c with target = sum c_i vecs[i], or None (all over F)."""
    t = len(target)
    rows = [list(v) + [0] * len(vecs) for v in vecs]
    for i, row in enumerate(rows):
        row[t + i] = 1
    aug = [list(target) + [0] * len(vecs)]
    # eliminate: bring vecs to row echelon, tracking combinations
    mat = [r[:] for r in rows]
    pivots = []
    r = 0
    for c in range(t):
        piv = None
        for i in range(r, len(mat)):
            if mat[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = F.inv(mat[r][c])
        mat[r] = [F.mul(inv, x) for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    # reduce the target against the echelon rows
    tgt = aug[0]
    for i, c in enumerate(pivots):
        if tgt[c] != 0:
            f = tgt[c]
            tgt = [F.sub(x, F.mul(f, y)) for x, y in zip(tgt, mat[i])]
    if any(tgt[:t]):
        return None
    coeffs = [F.neg(x) for x in tgt[t:]]
    return coeffs


def _span_rank(F, vecs):
    mat = [list(v) for v in vecs]
    t = len(mat[0])
    r = 0
    for c in range(t):
        piv = None
        for i in range(r, len(mat)):
            if mat[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = F.inv(mat[r][c])
        mat[r] = [F.mul(inv, x) for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(mat[i], mat[r])]
        r += 1
    return r


def _poly_inverse_mod(F, a, m):
    """Inverse of a modulo m over F (extended Euclid)."""
    r0, r1 = list(m), gf.poly_mod(F, a, m)
    s0, s1 = [], [1]
    while r1:
        qt, rem = gf.poly_divmod(F, r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, _poly_sub(F, s0, gf.poly_mul(F, qt, s1))
    if len(r0) != 1:
        raise InternalConsistencyError(_MOD, "not-invertible", "polynomial not invertible")
    inv_lead = F.inv(r0[0])
    return gf.poly_scale(F, s0, inv_lead)


def _poly_sub(F, a, b):
    return gf.poly_add(F, a, gf.poly_scale(F, b, F.neg(1)))


# --------------------------------------------------------------------------
# ramified-prime overrides


class RamifiedOverride:
    """Exact counts keyed by (p, j, n) for primes dividing the group order."""

    def __init__(self, group_id: str, entries: dict, sources: Optional[dict] = None):
        for (p, j, n), count in entries.items():
            if count < 0:
                raise ValidationError(_MOD, "negative-count", f"negative count at {(p, j, n)}")
            if p < 2 or j < 1 or n < 1:
                raise ValidationError(_MOD, "bad-key", f"malformed key {(p, j, n)}")
        self.group_id = group_id
        self.entries = dict(entries)
        self.sources = dict(sources or {})

    def lookup(self, p: int, j: int, n: int) -> int:
        key = (p, j, n)
        if key in self.entries:
            return self.entries[key]
        # untabulated dimensions at a tabulated (p, j) are zero
        if any(kp == p and kj == j for (kp, kj, _) in self.entries):
            return 0
        raise ValidationError(
            _MOD, "override-miss", f"override '{self.group_id}' has no data at (p={p}, j={j})"
        )

    def to_obj(self):
        return {
            "group": self.group_id,
            "entries": [
                {"p": p, "j": j, "n": n, "count": c, "source": self.sources.get((p, j, n), "")}
                for (p, j, n), c in sorted(self.entries.items())
            ],
        }

    @classmethod
    def from_obj(cls, obj):
        if not isinstance(obj, dict) or "entries" not in obj:
            raise ValidationError(_MOD, "schema", "override must be an object with 'entries'")
        entries, sources = {}, {}
        for e in obj["entries"]:
            try:
                key = (int(e["p"]), int(e["j"]), int(e["n"]))
                count = int(e["count"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(_MOD, "schema", f"malformed entry {e!r}") from exc
            entries[key] = count
            if e.get("source"):
                sources[key] = e["source"]
        return cls(obj.get("group", ""), entries, sources)

    def __eq__(self, other):
        return isinstance(other, RamifiedOverride) and self.entries == other.entries

    def __hash__(self):
        return hash((self.group_id, tuple(sorted(self.entries.items()))))


def load_ramified_override(path) -> RamifiedOverride:
    """Parse an override file: {"group": id, "entries": [{p,j,n,count,source}]}."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        obj = json.loads(text) if text.strip() else {"group": "", "entries": []}
    except json.JSONDecodeError as exc:
        raise ValidationError(
            _MOD, "parse-error", f"line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return RamifiedOverride.from_obj(obj)


def builtin_s4_override(j_max: int = 16) -> RamifiedOverride:
    """Counts for Sym(4) at p = 2 and p = 3 implied by its published closed
    form: p = 2 carries {1: 1, 2: 1, 3: 2} and p = 3 carries {1: 2, 3: 1}
    at every extension degree."""
    entries, sources = {}, {}
    src = "closed-form local factor"
    for j in range(1, j_max + 1):
        for n, c in ((1, 1), (2, 1), (3, 2)):
            entries[(2, j, n)] = c
            sources[(2, j, n)] = src
        for n, c in ((1, 2), (3, 1)):
            entries[(3, j, n)] = c
            sources[(3, j, n)] = src
    return RamifiedOverride("s4", entries, sources)


# --------------------------------------------------------------------------
# a few named permutation groups


def named_group(name: str):
    """(degree, generators) for a handful of stock groups."""
    name = name.lower()
    if name == "trivial":
        return 1, ((0,),)
    if name.startswith("c") and name[1:].isdigit():
        m = int(name[1:])
        if m < 1:
            raise ParameterError(_MOD, "bad-group", f"bad cyclic order {m}")
        if m == 1:
            return 1, ((0,),)
        return m, (tuple((i + 1) % m for i in range(m)),)
    if name == "v4":
        return 4, ((1, 0, 3, 2), (2, 3, 0, 1))
    if name == "s3":
        return 3, ((1, 0, 2), (1, 2, 0))
    if name == "s4":
        return 4, ((1, 0, 2, 3), (1, 2, 3, 0))
    if name == "a4":
        return 4, ((1, 2, 0, 3), (0, 2, 3, 1))
    if name == "d4":
        return 4, ((1, 2, 3, 0), (1, 0, 3, 2))
    raise ParameterError(_MOD, "bad-group", f"unknown group name '{name}'")
