"""Point-line incidences over F_p for Cartesian-product point sets.

Points are A x B; lines are y = s x + t plus verticals x = c.  The
fast counter walks each line across the abscissa set and tests the
ordinate against a membership table (O(|L| |A|)); a literal triple
loop is kept as the oracle.  On top of that sits the verification
chain that feeds a dyadic level of the difference counts into the
incidence bound: the level set against the product set, with the
|A||B| lines u = r (x + b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .config import DEFAULT_BUDGET, SZ_CALIBRATION_C
from .errors import (
    BudgetExceededError,
    DomainError,
    FieldRequiredError,
    InvalidSetError,
    ParameterError,
)
from .groups import GSet, GroupCtx, prodset, strip_zero
from .convolution import repr_fn
from .structure import dyadic_decompose

_VECTOR_P_LIMIT = 1 << 20  # membership tables and int64 products stay safe


@dataclass(frozen=True)
class Line:
    """y = slope*x + intercept, or the vertical x = intercept (slope None)."""

    slope: int | None
    intercept: int


@dataclass(frozen=True)
class LineSet:
    ctx: GroupCtx
    lines: tuple[Line, ...]

    def __post_init__(self):
        if not (self.ctx.is_residues and self.ctx.prime):
            raise FieldRequiredError("line sets live over a prime field")
        if len({(l.slope, l.intercept) for l in self.lines}) != len(self.lines):
            raise InvalidSetError("duplicate lines in a LineSet")

    def __len__(self) -> int:
        return len(self.lines)

    @classmethod
    def from_pairs(
        cls,
        ctx: GroupCtx,
        pairs: list[tuple[int, int]],
        verticals: list[int] = (),
    ) -> "LineSet":
        p = ctx.modulus
        seen = set()
        lines = []
        for s, t in pairs:
            key = (s % p, t % p)
            if key not in seen:
                seen.add(key)
                lines.append(Line(key[0], key[1]))
        for c in verticals:
            key = (None, c % p)
            if key not in seen:
                seen.add(key)
                lines.append(Line(None, key[1]))
        return cls(ctx, tuple(lines))


def _require_field(a: GSet, b: GSet, lines: LineSet) -> int:
    if a.ctx != b.ctx or a.ctx != lines.ctx:
        raise DomainError("points and lines must share one context")
    if not (a.ctx.is_residues and a.ctx.prime):
        raise FieldRequiredError("incidence counting needs a prime field")
    return a.ctx.modulus


def count_incidences(a: GSet, b: GSet, lines: LineSet) -> int:
    """Exact #{(point, line) : point on line} for points A x B."""
    p = _require_field(a, b, lines)
    if not len(a) or not len(b) or not len(lines):
        return 0
    if p <= _VECTOR_P_LIMIT:
        table = np.zeros(p, dtype=bool)
        table[list(b.elements)] = True
        xs = np.array(a.elements, dtype=np.int64)
        total = 0
        for ln in lines.lines:
            if ln.slope is None:
                if ln.intercept in a.as_set():
                    total += len(b)
            else:
                total += int(table[(ln.slope * xs + ln.intercept) % p].sum())
        return total
    bset = b.as_set()
    aset = a.as_set()
    total = 0
    for ln in lines.lines:
        if ln.slope is None:
            if ln.intercept in aset:
                total += len(b)
        else:
            total += sum(1 for x in a.elements if (ln.slope * x + ln.intercept) % p in bset)
    return total


def count_incidences_oracle(a: GSet, b: GSet, lines: LineSet, budget: int = 10**7) -> int:
    """Literal triple loop over points and lines."""
    p = _require_field(a, b, lines)
    est = len(a) * len(b) * len(lines)
    if est > budget:
        raise BudgetExceededError(est, budget, "incidence oracle")
    total = 0
    for ln in lines.lines:
        for x in a.elements:
            for y in b.elements:
                if ln.slope is None:
                    if x == ln.intercept:
                        total += 1
                elif (ln.slope * x + ln.intercept) % p == y:
                    total += 1
    return total


def sz_terms(na: int, nb: int, nl: int, p: int) -> tuple[float, float, float, float]:
    """The four terms of the Cartesian-product incidence bound."""
    return (
        na**0.75 * nb**0.5 * nl**0.75,
        float(nl),
        float(na * nb),
        na * nb * nl / p,
    )


def sz_bound(na: int, nb: int, nl: int, p: int, c: float = 1.0) -> float:
    return c * math.fsum(sz_terms(na, nb, nl, p))


_TERM_NAMES = ("main", "lines", "points", "p-term")


@dataclass(frozen=True)
class IncidenceInstance:
    """One counted configuration with its bound evaluation."""

    p: int
    size_a: int
    size_b: int
    size_l: int
    count: int
    terms: tuple[float, float, float, float]
    constant: float

    @property
    def bound(self) -> float:
        return self.constant * math.fsum(self.terms)

    @property
    def dominant_term(self) -> str:
        return _TERM_NAMES[max(range(4), key=lambda i: self.terms[i])]

    @property
    def ratio(self) -> float:
        return self.count / math.fsum(self.terms) if self.count else 0.0


def make_instance(a: GSet, b: GSet, lines: LineSet, constant: float = SZ_CALIBRATION_C) -> IncidenceInstance:
    cnt = count_incidences(a, b, lines)
    return IncidenceInstance(
        a.ctx.modulus, len(a), len(b), len(lines), cnt,
        sz_terms(len(a), len(b), len(lines), a.ctx.modulus), constant,
    )


@dataclass(frozen=True)
class ChainResult:
    """Verification chain for the incidence route to the energy bound."""

    p: int
    zero_stripped: bool
    size_a: int
    size_b: int
    tau: int
    level_size: int
    aa_size: int
    mass_on_level: int          # sum of r_{A-B} over the level set
    tuple_lines: int            # (r, b) pairs, counted with multiplicity
    distinct_lines: int
    tuple_incidences: int       # solutions of x = u/r - b over the level x AA
    dedup_incidences: int
    solution_step_ok: bool      # |A| * mass <= tuple incidences
    level_step_ok: bool         # |A| |D_tau| tau <= |A| * mass
    terms: tuple[float, float, float, float]
    sz_ok: bool
    enough_ratio: Fraction
    aa_small_case: bool         # |AA| <= |A|^(3/2)

    @property
    def dominant_term(self) -> str:
        return _TERM_NAMES[max(range(4), key=lambda i: self.terms[i])]

    @property
    def all_exact_steps_ok(self) -> bool:
        return self.solution_step_ok and self.level_step_ok


def energyreduction_chain(
    a: GSet,
    b: GSet,
    budget: int = DEFAULT_BUDGET,
    constant: float = SZ_CALIBRATION_C,
) -> ChainResult:
    """Run the dyadic level of r_{A-B} against the product-set line family.

    0 is stripped from A first (the slopes 1/r need r != 0).  For the
    level (tau, D_tau) maximizing |D_tau| tau^4 the chain certifies, in
    exact integers,

        #{(x,u,r,b) in D_tau x AA x A x B : x = u/r - b}
            >= |A| * #{(x,a,b) in D_tau x A x B : x = a - b}
            >= |A| |D_tau| tau,

    then counts incidences of D_tau x AA against the deduplicated
    lines and reports the four bound terms plus the target ratio.
    """
    if a.ctx != b.ctx:
        raise DomainError("chain needs one shared context")
    ctx = a.ctx
    if not (ctx.is_residues and ctx.prime):
        raise FieldRequiredError("the chain lives over a prime field")
    p = ctx.modulus
    if p > _VECTOR_P_LIMIT:
        raise ParameterError(f"chain supports p <= {_VECTOR_P_LIMIT}")
    a0, stripped = strip_zero(a)
    if not len(a0) or not len(b):
        raise DomainError("chain needs nonempty A \\ {0} and B")
    r_fn = repr_fn(a0, b, "-")
    level = dyadic_decompose(a0, b, "-").argmax_level
    tau, d_tau = level.tau, level.d_tau
    aa = prodset(a0, a0)
    est = len(a0) * len(b) * max(len(d_tau), 1)
    if est > budget:
        raise BudgetExceededError(est, budget, "incidence chain tuple count")
    mass = sum(r_fn.value(x) for x in d_tau.elements)

    aa_table = np.zeros(p, dtype=bool)
    aa_table[list(aa.elements)] = True
    xs = np.array(d_tau.elements, dtype=np.int64)
    bs = np.array(b.elements, dtype=np.int64)
    tuple_count = 0
    seen_lines = set()
    for r in a0.elements:
        vals = (r * (xs[None, :] + bs[:, None])) % p
        tuple_count += int(aa_table[vals].sum())
        for t in ((r * bs) % p).tolist():
            seen_lines.add((r, t))
    lines = LineSet(ctx, tuple(Line(s, t) for s, t in sorted(seen_lines)))
    dedup_count = count_incidences(d_tau, aa, lines)

    terms = sz_terms(len(d_tau), len(aa), len(lines), p)
    ok1 = len(a0) * mass <= tuple_count
    ok2 = len(a0) * len(d_tau) * tau <= len(a0) * mass
    sz_ok = dedup_count <= constant * math.fsum(terms)
    enough = Fraction(len(d_tau) * tau**4 * len(a0), len(b) ** 3) / Fraction(
        len(aa) ** 2, 1
    )
    return ChainResult(
        p=p,
        zero_stripped=stripped,
        size_a=len(a0),
        size_b=len(b),
        tau=tau,
        level_size=len(d_tau),
        aa_size=len(aa),
        mass_on_level=mass,
        tuple_lines=len(a0) * len(b),
        distinct_lines=len(lines),
        tuple_incidences=tuple_count,
        dedup_incidences=dedup_count,
        solution_step_ok=ok1,
        level_step_ok=ok2,
        terms=terms,
        sz_ok=sz_ok,
        enough_ratio=enough,
        aa_small_case=len(aa) ** 2 <= len(a0) ** 3,
    )
