"""Convolution-operator matrices, exact traces, and spectra.

A set A is encoded as |A| x |A| matrices  T(x,y) = g(x-y) 1_A(x) 1_A(y)
(difference form, needs even g) or  g(x+y) 1_A(x) 1_A(y)  (sum form),
and as the rectangular 0/1 matrix K over A x (A-A) whose (x,z) entry
tests x+z in A.  Exact integer traces of matrix powers and the extreme
eigenvalues of these matrices encode the higher-energy inequalities;
every inequality here is *also* certified via exact integer arithmetic,
the floating spectrum (cyclic Jacobi rotations) is for inspection and
the closed-form examples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .config import DEFAULT_BUDGET, DEFAULT_EIG_TOL, MAX_SPECTRUM_DIM
from .errors import (
    BudgetExceededError,
    ConvergenceError,
    DomainError,
    InvalidSetError,
    ParameterError,
    SymmetryError,
)
from .groups import GSet, diffset, is_prime, translate_intersect
from .convolution import (
    CountFn,
    conv_cost_estimate,
    convolve,
    indicator,
    moment,
    repr_fn,
)
from .energies import energy, t_k


@dataclass(frozen=True)
class SymMat:
    """Symmetric integer matrix indexed by the sorted elements of a set."""

    index_set: GSet
    entries: np.ndarray

    def __post_init__(self):
        n = len(self.index_set)
        if self.entries.shape != (n, n):
            raise InvalidSetError("entry matrix must be |A| x |A|")
        if not np.array_equal(self.entries, self.entries.T):
            raise SymmetryError("matrix is not symmetric")

    @property
    def dim(self) -> int:
        return len(self.index_set)

    def entry_sum(self) -> int:
        return int(self.entries.astype(object).sum()) if self.dim else 0

    def trace(self) -> int:
        return int(self.entries.astype(object).trace()) if self.dim else 0

    def to_lists(self) -> list[list[int]]:
        return [[int(v) for v in row] for row in self.entries]


@dataclass(frozen=True)
class RectMat:
    """0/1 matrix over A x (A-A); entry(x, z) = [x + z in A]."""

    rows: GSet
    cols: GSet
    entries: np.ndarray

    def column_sums(self) -> list[int]:
        return [int(s) for s in self.entries.sum(axis=0)]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by descending absolute value, with the
    relative off-diagonal residual left by the rotation sweeps."""

    eigenvalues: tuple[float, ...]
    residual: float


def build_t_matrix(a: GSet, g: CountFn, variant: str) -> SymMat:
    """T(x,y) = g(x-y) 1_A 1_A  or  g(x+y) 1_A 1_A.

    The difference variant demands an even weight (g(-z) = g(z)); an
    odd weight would break symmetry and is rejected.
    """
    if g.ctx != a.ctx:
        raise DomainError("weight function must share the set's context")
    if variant not in ("difference", "sum"):
        raise ParameterError(f"variant must be 'difference' or 'sum', got {variant!r}")
    if variant == "difference":
        for z, v in g.items():
            if g.value(a.ctx.neg(z)) != v:
                raise SymmetryError(f"difference weight is not even at z = {z}")
    red = a.ctx.reduce
    els = a.elements
    n = len(els)
    rows = []
    if variant == "difference":
        for x in els:
            rows.append([g.value(red(x - y)) for y in els])
    else:
        for x in els:
            rows.append([g.value(red(x + y)) for y in els])
    entries = np.array(rows, dtype=np.int64) if n else np.zeros((0, 0), dtype=np.int64)
    return SymMat(a, entries)


def build_k_rect(a: GSet) -> RectMat:
    """The A x (A-A) membership matrix; column z sums to r_{A-A}(z)."""
    if not len(a):
        raise DomainError("rectangular operator needs a nonempty set")
    d = diffset(a, a)
    base = a.as_set()
    red = a.ctx.reduce
    rows = [[1 if red(x + z) in base else 0 for z in d.elements] for x in a.elements]
    return RectMat(a, d, np.array(rows, dtype=np.int64))


def factorization_check(a: GSet, budget: int = DEFAULT_BUDGET) -> bool:
    """Exact equality of T_A^{r_{A-A}} with K K^T."""
    if not len(a):
        return True
    d_size = max(len(diffset(a, a)), 1)
    est = len(a) ** 2 * d_size
    if est > budget:
        raise BudgetExceededError(est, budget, "operator factorization")
    t = build_t_matrix(a, repr_fn(a, a, "-"), "difference")
    k = build_k_rect(a)
    return bool(np.array_equal(t.entries, k.entries @ k.entries.T))


def _matrix_bound(entries: np.ndarray, k: int) -> int:
    n = entries.shape[0]
    if n == 0:
        return 0
    maxabs = max(int(abs(v)) for v in entries.ravel().tolist())
    return (n * maxabs) ** k * n


_CRT_PRIMES: list[int] = []


def _crt_primes() -> list[int]:
    # ~20-bit primes: squares times a 512-term accumulation stay in int64
    if not _CRT_PRIMES:
        cand = (1 << 20) - 1
        while len(_CRT_PRIMES) < 16:
            if is_prime(cand):
                _CRT_PRIMES.append(cand)
            cand -= 2
    return _CRT_PRIMES


def _pow_trace_mod(entries: np.ndarray, k: int, p: int) -> int:
    m = np.array([[int(v) % p for v in row] for row in entries.tolist()], dtype=np.int64)
    result = None
    base = m
    e = k
    while e:
        if e & 1:
            result = base.copy() if result is None else (result @ base) % p
        e >>= 1
        if e:
            base = (base @ base) % p
    return int(result.trace() % p)


def trace_power(m: SymMat, k: int) -> int:
    """Exact integer trace of M^k by matrix powering.

    Within int64 headroom the powering is direct; beyond it the trace
    is reconstructed from residues modulo enough 20-bit primes.
    """
    if k < 1:
        raise ParameterError(f"power must be >= 1, got {k}")
    if m.dim == 0:
        return 0
    bound = _matrix_bound(m.entries, k)
    if bound < (1 << 62):
        result = None
        base = m.entries.astype(np.int64)
        e = k
        while e:
            if e & 1:
                result = base.copy() if result is None else result @ base
            e >>= 1
            if e:
                base = base @ base
        return int(result.trace())
    primes = []
    prod = 1
    for p in _crt_primes():
        primes.append(p)
        prod *= p
        if prod > 2 * bound + 1:
            break
    else:
        raise ParameterError("matrix power exceeds CRT capacity")
    total = 0
    for p in primes:
        q = prod // p
        total += q * pow(q, -1, p) * _pow_trace_mod(m.entries, k, p)
    total %= prod
    if total > prod // 2:
        total -= prod
    return total


def rayleigh_uniform(m: SymMat) -> Fraction:
    """Rayleigh quotient of the normalized all-ones vector: sum/dim."""
    if m.dim == 0:
        raise DomainError("empty matrix has no Rayleigh quotient")
    return Fraction(m.entry_sum(), m.dim)


def _offdiag_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def _jacobi_sweeps(a: np.ndarray, tol: float, max_sweeps: int = 60) -> tuple[np.ndarray, float]:
    n = a.shape[0]
    frob = float(np.linalg.norm(a))
    if frob == 0.0 or n == 1:
        return np.diag(a).copy(), 0.0
    target = tol * frob
    for _ in range(max_sweeps):
        off = _offdiag_norm(a)
        if off <= target:
            return np.diag(a).copy(), off / frob
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
    off = _offdiag_norm(a)
    if off > target:
        raise ConvergenceError(off / frob, max_sweeps)
    return np.diag(a).copy(), off / frob


def spectrum_of(m: SymMat, tol: float = DEFAULT_EIG_TOL) -> Spectrum:
    """Eigenvalues via cyclic Jacobi rotation sweeps.

    The returned spectrum satisfies sum(mu) = trace within
    dim * tol * scale; non-convergence raises with the residual.
    """
    if m.dim > MAX_SPECTRUM_DIM:
        raise ParameterError(f"dimension {m.dim} exceeds spectrum cap {MAX_SPECTRUM_DIM}")
    if m.dim == 0:
        return Spectrum((), 0.0)
    work = m.entries.astype(np.float64).copy()
    diag, residual = _jacobi_sweeps(work, tol)
    eigs = sorted((float(v) for v in diag), key=lambda v: (-abs(v), v))
    scale = max(float(np.linalg.norm(m.entries.astype(np.float64))), 1.0)
    if abs(sum(eigs) - m.trace()) > m.dim * max(tol, 1e-12) * scale * 10:
        raise AssertionError("spectrum sum drifted from the exact trace")
    return Spectrum(tuple(eigs), residual)


@dataclass(frozen=True)
class PidentityResult:
    mass: int
    lhs: int
    rhs: int
    passed: bool
    trace_matrix: int
    trace_combinatorial: int | None


def pidentity_check(a: GSet, p: GSet, k: int, budget: int = DEFAULT_BUDGET) -> PidentityResult:
    """Largest-eigenvalue trace bound for the sum-form 0/1 operator.

    Verifies (sum_{z in P} r_{A+A}(z))^{2k} <= |A|^{2k} trace(M^{2k})
    with M the 0/1 matrix testing x+y in P, and cross-checks the trace
    against the literal closed-walk count when the 2k-fold loop fits
    the budget.
    """
    if k not in (1, 2):
        raise ParameterError(f"pidentity supports k in {{1, 2}}, got {k}")
    plus = repr_fn(a, a, "+")
    sumset_support = plus.support_set().as_set()
    if not p.as_set() <= sumset_support:
        raise DomainError("P must sit inside A+A")
    mass = sum(plus.value(z) for z in p.elements)
    m = build_t_matrix(a, indicator(p) if len(p) else CountFn(a.ctx, ()), "sum")
    tr = trace_power(m, 2 * k) if m.dim else 0
    lhs = mass ** (2 * k)
    rhs = len(a) ** (2 * k) * tr
    comb = None
    # the literal walk costs ~250ns per tuple; weight it accordingly
    steps = 250 * len(a) ** (2 * k)
    if steps <= budget:
        comb = _closed_walk_count(a, p, 2 * k)
        if comb != tr:
            raise AssertionError(f"trace {tr} != closed-walk count {comb}")
    return PidentityResult(mass, lhs, rhs, lhs <= rhs, tr, comb)


def _closed_walk_count(a: GSet, p: GSet, length: int) -> int:
    """Literal sum over A^length of the cyclic membership product."""
    pset = p.as_set()
    red = a.ctx.reduce
    els = a.elements
    if length == 2:
        return sum(1 for x in els for y in els if red(x + y) in pset)
    total = 0
    for x1 in els:
        for x2 in els:
            if red(x1 + x2) not in pset:
                continue
            for x3 in els:
                if red(x2 + x3) not in pset:
                    continue
                for x4 in els:
                    if red(x3 + x4) in pset and red(x4 + x1) in pset:
                        total += 1
    return total


@dataclass(frozen=True)
class EigenLemmaResult:
    lhs: int
    rhs: int
    passed: bool


def eigen_lemma_check(a: GSet, b: GSet, p: GSet, k: int, budget: int = DEFAULT_BUDGET) -> EigenLemmaResult:
    """Fourth-moment eigenvalue lemma for a pair of sets.

    (sum_{x in P} r_{A-B}(x))^{4k}
        <= |A|^{2k} |B|^{2k} T_k(P) sum_x r_{A-A}(x)^k r_{B-B}(x)^k.
    """
    if k not in (2, 4):
        raise ParameterError(f"eigen lemma supports k in {{2, 4}}, got {k}")
    if len(p):
        ind_p = indicator(p)
        est = (k // 2 + 1) * conv_cost_estimate(ind_p, ind_p)
        if est > budget:
            raise BudgetExceededError(est, budget, "moment count of P")
    rab = repr_fn(a, b, "-")
    if not p.as_set() <= rab.support_set().as_set():
        raise DomainError("P must sit inside A-B")
    mass = sum(rab.value(x) for x in p.elements)
    lhs = mass ** (4 * k)
    raa = repr_fn(a, a, "-")
    rbb = repr_fn(b, b, "-")
    small, big = (raa, rbb) if len(raa) <= len(rbb) else (rbb, raa)
    cross = sum(v**k * big.value(x) ** k for x, v in small.items())
    rhs = len(a) ** (2 * k) * len(b) ** (2 * k) * t_k(p, k) * cross
    return EigenLemmaResult(lhs, rhs, lhs <= rhs)


@dataclass(frozen=True)
class SpectralLemmaResult:
    lhs: int
    rhs: int
    passed: bool
    energy_p_direct: int | None
    energy_p_conv: int


def spectral_energy_lemma_check(
    a: GSet, p: GSet, sign: str, budget: int = DEFAULT_BUDGET
) -> SpectralLemmaResult:
    """Spectral energy bound (sum_{x in P} r(x))^8 <= |A|^8 E_4(A) E(P),
    with the quadruple-sum identity for E(P) recomputed by set
    intersections as an independent route."""
    r = repr_fn(a, a, sign)
    if not p.as_set() <= r.support_set().as_set():
        raise DomainError("P must sit inside the chosen sumset/difference set")
    ind_p = indicator(p) if len(p) else None
    est = conv_cost_estimate(ind_p, ind_p) if ind_p else 0
    if est > budget:
        raise BudgetExceededError(est, budget, "popular-set energy")
    mass = sum(r.value(x) for x in p.elements)
    e4 = energy(a, a, 4)
    ep = moment(convolve(ind_p, ind_p, kind="diff"), 2) if ind_p else 0
    lhs = mass**8
    rhs = len(a) ** 8 * e4 * ep
    direct = None
    if len(p):
        # the direct route shifts |P|-bit masks |P| times, then pops
        # one intersection per difference
        steps = len(p) * (len(p) + 2 * max(1, p.span() // 64))
        if steps <= budget:
            dpp = diffset(p, p)
            direct = sum(len(translate_intersect(p, beta)) ** 2 for beta in dpp.elements)
            if direct != ep:
                raise AssertionError(f"quadruple-sum identity broke: {direct} != {ep}")
    return SpectralLemmaResult(lhs, rhs, lhs <= rhs, direct, ep)
