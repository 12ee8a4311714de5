"""Generation probabilities of finite semisimple rings and the reciprocal
identity against the zeta value.

An l-tuple generates a product of matrix algebras iff in every component the
n x (n l) horizontal concatenation of the tuple's component matrices has
full rank n, so the exact probability is a product of rank-defect factors
prod_{i<n}(1 - p^(ki)/p^(lkn)).  Monte Carlo uses a counter-based RNG with
one derived stream per component, making trial outcomes independent of
chunking and thread count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from . import arith, gf, repcount, zeta
from .errors import ConvergenceDomainError, InternalConsistencyError, ParameterError

_MOD = "probgen"

DEFAULT_SEED = 2718281828


class RingComponent(NamedTuple):
    n: int
    p: int
    k: int
    mult: int = 1


@dataclass(frozen=True)
class SemisimpleRingSpec:
    components: tuple  # RingComponents

    def __post_init__(self):
        for c in self.components:
            if c.n < 1 or c.k < 1 or c.mult < 1 or not arith.is_prime(c.p):
                raise ParameterError(_MOD, "bad-component", f"bad component {c}")


def matrix_ring(n: int, p: int, k: int = 1) -> SemisimpleRingSpec:
    return SemisimpleRingSpec((RingComponent(n, p, k),))


def product_ring(*factors: SemisimpleRingSpec) -> SemisimpleRingSpec:
    comps = []
    for f in factors:
        comps.extend(f.components)
    return SemisimpleRingSpec(tuple(comps))


def truncated_group_ring(spec: repcount.GroupSpec, X: int) -> SemisimpleRingSpec:
    """Semisimple quotient of the completed group ring, truncated to simple
    components M_n(F_{p^j}) with p^(nj) <= X.  A Frobenius orbit of j
    absolutely irreducible classes new at level j is one component, so the
    multiplicity at (p, j, n) is the new-at-level count divided by j."""
    comps = []
    for rec in zeta.term_stream(spec, X):
        m_star = repcount.new_at_level(spec, rec.p, 1, rec.j, rec.n)
        if m_star == 0:
            continue
        if m_star % rec.j != 0:
            raise InternalConsistencyError(
                _MOD, "orbit-size", f"new-at-level count not divisible by {rec.j}"
            )
        comps.append(RingComponent(rec.n, rec.p, rec.j, m_star // rec.j))
    return SemisimpleRingSpec(tuple(comps))


def exact_generation_probability(ring: SemisimpleRingSpec, ell: int) -> Fraction:
    """prod over components of prod_{i<n} (1 - p^(ki)/p^(l k n)), exact.

    Numerator and denominator are accumulated as plain integers and reduced
    once at the end; per-step Fraction normalization is quadratic-ish in the
    number of components and dominates for desk-scale truncated rings."""
    if ell < 1:
        raise ParameterError(_MOD, "bad-argument", f"ell must be >= 1, got {ell}")
    num = den = 1
    for n, p, k, mult in ring.components:
        top = p ** (ell * k * n)
        fn = fd = 1
        for i in range(n):
            fn *= top - p ** (k * i)
            fd *= top
        num *= fn**mult
        den *= fd**mult
    return Fraction(num, den)


class MCResult(NamedTuple):
    estimate: float
    stderr: float
    successes: int
    trials: int


def _component_stream(seed: int, index: int):
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


def _batched_full_rank_mod_p(mats: np.ndarray, p: int) -> np.ndarray:
    """Boolean mask of batch elements whose n x m matrix has rank n mod p
    (Gaussian elimination vectorized across the batch)."""
    a = mats % p
    B, n, m = a.shape
    row = np.zeros(B, dtype=np.int64)
    inv_table = np.array([0] + [pow(i, p - 2, p) for i in range(1, p)], dtype=np.int64)
    rows_arange = np.arange(n)
    for c in range(m):
        live = row < n
        if not live.any():
            break
        col = a[:, :, c]
        nz = (col != 0) & (rows_arange[None, :] >= row[:, None]) & live[:, None]
        has = nz.any(axis=1)
        idx = np.flatnonzero(live & has)
        if idx.size == 0:
            continue
        piv = nz[idx].argmax(axis=1)
        r = row[idx]
        # swap pivot rows into position r
        need = piv != r
        sidx, spiv, srow = idx[need], piv[need], r[need]
        if sidx.size:
            tmp = a[sidx, srow, :].copy()
            a[sidx, srow, :] = a[sidx, spiv, :]
            a[sidx, spiv, :] = tmp
        # normalize pivot rows and eliminate the column below and above
        pivrow = a[idx, r, :] * inv_table[a[idx, r, c]][:, None] % p
        a[idx, r, :] = pivrow
        colv = a[idx, :, c].copy()
        colv[np.arange(idx.size), r] = 0
        a[idx] = (a[idx] - colv[:, :, None] * pivrow[:, None, :]) % p
        row[idx] += 1
    return row >= n


def _mc_component(n: int, p: int, k: int, ell: int, trials: int, rng) -> np.ndarray:
    """Success mask: the n x (n ell) concatenation over F_{p^k} has rank n."""
    if k == 1:
        mask = np.ones(trials, dtype=bool)
        chunk = max(1, min(trials, 1 << 18))
        start = 0
        while start < trials:
            b = min(chunk, trials - start)
            mats = rng.integers(0, p, size=(b, n, n * ell), dtype=np.int64)
            mask[start : start + b] = _batched_full_rank_mod_p(mats, p)
            start += b
        return mask
    F = gf.make_field(p, k)
    mask = np.empty(trials, dtype=bool)
    for t in range(trials):
        m = gf.random_matrix(F, n, n * ell, rng)
        mask[t] = gf.rank(m) == n
    return mask


def mc_generation_probability(
    ring: SemisimpleRingSpec, ell: int, trials: int, seed: int = DEFAULT_SEED
) -> MCResult:
    """Empirical generation frequency with binomial standard error;
    deterministic for a given seed (per-component derived streams)."""
    if trials < 1:
        raise ParameterError(_MOD, "bad-argument", f"trials must be >= 1, got {trials}")
    success = np.ones(trials, dtype=bool)
    for idx, (n, p, k, mult) in enumerate(ring.components):
        rng = _component_stream(seed, idx)
        for _ in range(mult):
            success &= _mc_component(n, p, k, ell, trials, rng)
            if not success.any():
                break
    s = int(success.sum())
    est = s / trials
    return MCResult(est, math.sqrt(est * (1.0 - est) / trials), s, trials)


@dataclass(frozen=True)
class GenerationReport:
    spec: str
    ell: int
    X: int
    exact: Optional[Fraction]
    mc_estimate: float
    mc_stderr: float
    trials: int
    seed: int
    zeta_reciprocal: float
    zeta_interval: tuple
    consistent: bool

    def to_obj(self):
        return {
            "spec": self.spec,
            "ell": self.ell,
            "X": self.X,
            "exact": {"num": self.exact.numerator, "den": self.exact.denominator}
            if self.exact is not None
            else None,
            "exact_float": float(self.exact) if self.exact is not None else None,
            "mc_estimate": self.mc_estimate,
            "mc_stderr": self.mc_stderr,
            "trials": self.trials,
            "seed": self.seed,
            "zeta_reciprocal": self.zeta_reciprocal,
            "zeta_interval": list(self.zeta_interval),
            "consistent": self.consistent,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True)

    def csv_row(self):
        return {
            "spec": self.spec,
            "ell": self.ell,
            "X": self.X,
            "exact": float(self.exact) if self.exact is not None else "",
            "mc_estimate": self.mc_estimate,
            "mc_stderr": self.mc_stderr,
            "trials": self.trials,
            "seed": self.seed,
            "zeta_reciprocal": self.zeta_reciprocal,
            "zeta_lo": self.zeta_interval[0],
            "zeta_hi": self.zeta_interval[1],
            "consistent": self.consistent,
        }


def verify_reciprocal_identity(
    spec: repcount.GroupSpec,
    ell: int,
    X: int,
    trials: int = 10_000,
    seed: int = DEFAULT_SEED,
) -> GenerationReport:
    """Exact truncated generation probability, a Monte Carlo estimate and the
    truncated reciprocal zeta value, with their consistency verdict.

    The evaluation point must lie strictly above the family's documented
    abscissa; inside the divergence region the identity has no meaning."""
    abscissa = repcount.known_abscissa(spec)
    if ell <= abscissa:
        raise ConvergenceDomainError(
            _MOD, "divergence-region", f"ell={ell} is not above the abscissa {abscissa}"
        )
    ring = truncated_group_ring(spec, X)
    exact = exact_generation_probability(ring, ell)
    mc = mc_generation_probability(ring, ell, trials, seed)
    if spec.family == "matrix_algebra":
        # a single matrix algebra: the zeta value is an exact rational and
        # the identity holds without truncation
        val = zeta.matrix_algebra_zeta_rational(
            spec.param("n"), spec.param("p"), spec.param("k"), ell
        )
        recip = float(1 / val)
        interval = (recip, recip)
        tail = 0.0
    else:
        lz = zeta.log_zeta_truncated(spec, float(ell), X)
        recip = math.exp(-lz.value)
        interval = (math.exp(-(lz.value + lz.tail_bound)), math.exp(-(lz.value - lz.tail_bound)))
        tail = lz.tail_bound
    exact_f = float(exact)
    mc_ok = abs(mc.estimate - exact_f) <= 4.0 * max(mc.stderr, 1e-12)
    # the truncated ring keeps components up to X while the zeta truncation
    # cuts term keys at X; both converge to the same limit and must agree
    # within the tail allowance plus a matching truncation allowance
    zeta_ok = exact_f <= interval[1] + 0.01 and recip <= exact_f + tail + 0.01
    return GenerationReport(
        spec=repcount.to_json(spec),
        ell=ell,
        X=X,
        exact=exact,
        mc_estimate=mc.estimate,
        mc_stderr=mc.stderr,
        trials=trials,
        seed=seed,
        zeta_reciprocal=recip,
        zeta_interval=interval,
        consistent=bool(mc_ok and zeta_ok),
    )
