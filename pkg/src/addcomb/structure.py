"""Fourth-moment structure measure, dyadic level sets, popular sets.

The flexible fourth-moment density of A is the supremum over nonempty
finite B of  E_4(A,B) / (|A| |B|^3).  The supremum ranges over an
infinite family, so the artifact computes certified *lower bounds*: an
exhaustive search over subsets of a small universe (exact within that
universe) and a heuristic candidate-family search.  Estimates always
carry their witness B and the exact rational ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .config import DEFAULT_BUDGET
from .errors import BudgetExceededError, DomainError, ParameterError
from .groups import GSet, negate, translate, union
from .convolution import conv_cost_estimate, indicator, repr_fn, moment
from .energies import energy


def ceil_three_halves(n: int) -> int:
    """ceil(n^(3/2)) without floating point."""
    cube = n * n * n
    s = math.isqrt(cube)
    return s if s * s == cube else s + 1


def d4_ratio(a: GSet, b: GSet) -> Fraction:
    """E_4(A,B) / (|A| |B|^3) as an exact rational; B must be nonempty."""
    if not len(b):
        raise DomainError("d4 ratio needs a nonempty B")
    if not len(a):
        raise DomainError("d4 ratio needs a nonempty A")
    return Fraction(energy(a, b, 4), len(a) * len(b) ** 3)


@dataclass(frozen=True)
class D4Estimate:
    """Certified lower bound for the fourth-moment density of A."""

    lower_bound: Fraction
    witness: GSet
    method: str
    exact: bool

    def __post_init__(self):
        if self.lower_bound < 0:
            raise AssertionError("d4 estimate must be nonnegative")


def _validate_estimate(a: GSet, est: D4Estimate) -> D4Estimate:
    # every pointwise ratio obeys ratio <= |A|; the >= 1 side needs A
    # itself among the candidates, which both search entry points ensure
    n = len(a)
    if est.lower_bound > n:
        raise AssertionError(f"d4 ratio {est.lower_bound} exceeds |A| = {n}")
    expect = d4_ratio(a, est.witness)
    if expect != est.lower_bound:
        raise AssertionError("witness ratio does not reproduce the bound")
    return est


def d4_exact_small(a: GSet, universe: GSet, budget: int = DEFAULT_BUDGET) -> D4Estimate:
    """Exhaustive maximum of the ratio over nonempty B in the universe.

    Subsets are walked in Gray-code order, updating the difference
    counts and the running fourth moment by one element per step, so
    the whole walk costs 2^|U| * |A| elementary updates.  Only subsets
    with |B| <= ceil(|A|^(3/2)) compete (larger B never attains the
    supremum).  Ties prefer the lexicographically smallest witness.
    """
    k = len(universe)
    if k > 20:
        raise ParameterError(f"universe of {k} elements is too large (max 20)")
    if k == 0 or not len(a):
        raise DomainError("exhaustive search needs nonempty A and universe")
    est_steps = (1 << k) * len(a)
    if est_steps > budget:
        raise BudgetExceededError(est_steps, budget, "d4 exhaustive search")
    cap = ceil_three_halves(len(a))
    red = a.ctx.reduce
    univ = universe.elements
    counts: dict[int, int] = {}
    s4 = 0
    size = 0
    member = [False] * k
    na = len(a)
    best: Fraction | None = None
    best_mask = 0
    mask = 0
    for step in range(1, 1 << k):
        j = (step & -step).bit_length() - 1
        b = univ[j]
        if member[j]:
            member[j] = False
            mask ^= 1 << j
            size -= 1
            for x in a.elements:
                d = red(x - b)
                v = counts[d]
                counts[d] = v - 1
                s4 += (v - 1) ** 4 - v**4
        else:
            member[j] = True
            mask |= 1 << j
            size += 1
            for x in a.elements:
                d = red(x - b)
                v = counts.get(d, 0)
                counts[d] = v + 1
                s4 += (v + 1) ** 4 - v**4
        if 0 < size <= cap:
            ratio = Fraction(s4, na * size**3)
            if best is None or ratio > best:
                best, best_mask = ratio, mask
            elif ratio == best:
                cand = tuple(univ[i] for i in range(k) if mask >> i & 1)
                incumbent = tuple(univ[i] for i in range(k) if best_mask >> i & 1)
                if cand < incumbent:
                    best_mask = mask
    if best is None:
        raise DomainError(f"no admissible subset of size <= {cap}")
    witness = GSet.from_elements(a.ctx, (univ[i] for i in range(k) if best_mask >> i & 1))
    return _validate_estimate(a, D4Estimate(best, witness, "exact-small", True))


def default_candidates(a: GSet, popular_translates: int = 3) -> list[GSet]:
    """Stock candidate family for the heuristic search.

    A itself, -A, A joined with a few popular translates, the minimal
    progression covering A (when not absurdly long), and the dyadic
    level supports of the difference counts.
    """
    cands = [a, negate(a)]
    r = repr_fn(a, a, "-")
    nonzero = [(x, v) for x, v in r.items() if x != 0]
    nonzero.sort(key=lambda t: (-t[1], t[0]))
    for x, _ in nonzero[:popular_translates]:
        cands.append(union(a, translate(a, x)))
    cap = ceil_three_halves(len(a))
    if not a.ctx.is_residues and len(a) >= 2:
        g = 0
        lo = a.min()
        for e in a.elements[1:]:
            g = math.gcd(g, e - lo)
        length = (a.max() - lo) // g + 1
        if length <= cap:
            cands.append(GSet.from_elements(a.ctx, range(lo, a.max() + 1, g)))
    elif a.ctx.is_residues and a.ctx.modulus <= cap:
        cands.append(GSet.from_elements(a.ctx, range(a.ctx.modulus)))
    for level in dyadic_decompose(a, a, "-").levels:
        cands.append(level.d_tau)
    return cands


def d4_family_search(
    a: GSet,
    families: list[GSet] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> D4Estimate:
    """Best ratio over a candidate list; a lower bound, never certified.

    A itself is always evaluated, so the result dominates E_4(A)/|A|^4
    (and in particular is >= 1).  Ties prefer the lexicographically
    smallest witness; candidates past the step budget are dropped.
    """
    if not len(a):
        raise DomainError("family search needs nonempty A")
    cands = list(families) if families else []
    cands.extend(default_candidates(a))
    seen = set()
    ordered = []
    for c in cands:
        if len(c) and c.elements not in seen:
            seen.add(c.elements)
            ordered.append(c)
    best: Fraction | None = None
    witness: GSet | None = None
    ind_a = indicator(a)
    spent = 0
    for b in ordered:
        spent += conv_cost_estimate(ind_a, indicator(b))
        if spent > budget and witness is not None:
            break
        ratio = d4_ratio(a, b)
        if best is None or ratio > best or (ratio == best and b.elements < witness.elements):
            best, witness = ratio, b
    return _validate_estimate(a, D4Estimate(best, witness, "family-search", False))


@dataclass(frozen=True)
class DyadicLevel:
    """One cumulative level set {x : r(x) >= tau}, tau a power of two."""

    tau: int
    d_tau: GSet
    sign: str
    size_a: int
    size_b: int

    def __post_init__(self):
        if self.tau < 1 or self.tau & (self.tau - 1):
            raise AssertionError("tau must be a power of two")
        if len(self.d_tau) * self.tau > self.size_a * self.size_b:
            raise AssertionError("level mass exceeds |A||B|")
        if len(self.d_tau) and self.tau > min(self.size_a, self.size_b):
            raise AssertionError("tau exceeds min(|A|, |B|) on a nonempty level")


@dataclass(frozen=True)
class DyadicDecomposition:
    levels: tuple[DyadicLevel, ...]
    argmax_index: int
    e4: int
    sum_bound: int
    argmax_bound: int

    @property
    def argmax_level(self) -> DyadicLevel:
        return self.levels[self.argmax_index]


def dyadic_decompose(a: GSet, b: GSet, sign: str) -> DyadicDecomposition:
    """Cumulative dyadic levels of r_{A±B} plus the pigeonhole bounds.

    Levels run tau = 1, 2, 4, ... while nonempty.  The decomposition
    certifies, in exact integers,

        E_4(A,B) <= sum over levels of |D_tau| (2 tau)^4

    and, for the level maximizing |D_tau| tau^4,

        E_4(A,B) <= |D_tau| (2 tau)^4 * (ceil(log2 min(|A|,|B|)) + 1).
    """
    r = repr_fn(a, b, sign)
    e4 = moment(r, 4)
    pairs = list(r.items())
    levels = []
    tau = 1
    maxv = r.max_value()
    while tau <= maxv:
        elems = tuple(x for x, v in pairs if v >= tau)
        levels.append(
            DyadicLevel(tau, GSet(a.ctx, elems), sign, len(a), len(b))
        )
        tau <<= 1
    if not levels:
        levels.append(DyadicLevel(1, GSet(a.ctx, ()), sign, len(a), len(b)))
    score = [len(lv.d_tau) * lv.tau**4 for lv in levels]
    arg = max(range(len(levels)), key=lambda i: (score[i], -i))
    sum_bound = sum(len(lv.d_tau) * (2 * lv.tau) ** 4 for lv in levels)
    min_side = min(len(a), len(b))
    log_factor = (min_side - 1).bit_length() + 1 if min_side else 1
    argmax_bound = score[arg] * 16 * log_factor
    if e4 > sum_bound:
        raise AssertionError("dyadic sum bound violated")
    if e4 > argmax_bound:
        raise AssertionError("dyadic argmax bound violated")
    return DyadicDecomposition(tuple(levels), arg, e4, sum_bound, argmax_bound)


@dataclass(frozen=True)
class PopularSet:
    """Elements whose count clears c * |A|^2 / |A±A|, with their mass."""

    p: GSet
    threshold: Fraction
    sign: str
    mass: int


def popular_set(a: GSet, sign: str, c: Fraction = Fraction(1, 2)) -> PopularSet:
    """P = {x : r(x) >= c |A|^2 / |A±A|}; its mass is >= (1-c) |A|^2."""
    if not len(a):
        raise DomainError("popular set needs nonempty A")
    r = repr_fn(a, a, sign)
    supp = len(r)
    thr = Fraction(c.numerator * len(a) ** 2, c.denominator * supp)
    keep = [(x, v) for x, v in r.items() if v * thr.denominator >= thr.numerator]
    mass = sum(v for _, v in keep)
    ps = PopularSet(GSet(a.ctx, tuple(x for x, _ in keep)), thr, sign, mass)
    if mass * c.denominator < (c.denominator - c.numerator) * len(a) ** 2:
        raise AssertionError("popularity mass bound violated")
    return ps
