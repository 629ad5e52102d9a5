"""Higher-order additive energies and the identities relating them.

The k-th order energy of (A, B) is the k-th moment of the difference
count r_{A-B}.  Besides the plain functionals this module carries the
exact combinatorial identities used throughout: the collinear-quadruple
expansion of the fourth energy, its reduction to pairwise energies of
translate intersections, and the cross-energy identity.  Each identity
is computed by two independent routes and returned as an (lhs, rhs)
pair; equality is a theorem, so any mismatch is an implementation bug.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_BUDGET
from .errors import BudgetExceededError, InvalidSetError, ParameterError
from .groups import GSet, diffset, translate_intersect
from .convolution import moment, repr_fn, indicator, self_convolve_pow2


@dataclass(frozen=True)
class EnergyRecord:
    """One computed energy value with its trivial-bound check built in."""

    name: str
    value: int
    operands: tuple[str, ...]
    k: int


def energy(a: GSet, b: GSet | None = None, k: int = 2) -> int:
    """E_k(A, B) = sum_x r_{A-B}(x)^k, exact."""
    if k < 1:
        raise ParameterError(f"energy order must be >= 1, got {k}")
    if b is None:
        b = a
    return moment(repr_fn(a, b, "-"), k)


def energy_record(a: GSet, b: GSet | None = None, k: int = 2, name: str = "") -> EnergyRecord:
    """Compute an energy and assert the trivial bounds it must satisfy."""
    same = b is None or a == b
    val = energy(a, b, k)
    n = len(a)
    if same and n:
        # |A|^k <= E_k(A) <= |A|^(k+1) for every order
        if not (n**k <= val <= n ** (k + 1)):
            raise AssertionError(f"E_{k} bounds violated: {n**k} <= {val} <= {n**(k+1)}")
    if k == 1 and b is not None:
        if val != n * len(b):
            raise AssertionError("first moment must equal |A||B|")
    ops = (f"|A|={n}",) if same else (f"|A|={n}", f"|B|={len(b)}")
    return EnergyRecord(name or f"E{k}", val, ops, k)


def t_k(p: GSet, k: int) -> int:
    """Number of 2k-tuples with equal k-fold sums; k in {1, 2, 4, 8}."""
    if k not in (1, 2, 4, 8):
        raise ParameterError(f"t_k supports k in {{1,2,4,8}}, got {k}")
    if not len(p):
        return 0
    return moment(self_convolve_pow2(indicator(p), k), 2)


def _membership_matrix(a: GSet, d_elems: tuple[int, ...]) -> np.ndarray:
    """R[i, j] = 1 iff a_j - d_i stays in A (the translate intersection table)."""
    base = a.as_set()
    red = a.ctx.reduce
    rows = []
    for d in d_elems:
        rows.append([1 if red(x - d) in base else 0 for x in a.elements])
    return np.array(rows, dtype=np.int64)


def quad_identity(a: GSet, budget: int = DEFAULT_BUDGET) -> tuple[int, int]:
    """Fourth energy vs the collinear-quadruple triple sum.

    lhs is the fourth moment of r_{A-A}; rhs enumerates (x, y, z) over
    the difference set and squares |A ∩ (A+x) ∩ (A+y) ∩ (A+z)|,
    evaluated from the membership table without any convolution.
    """
    if not len(a):
        return (0, 0)
    d = diffset(a, a)
    est = len(d) ** 3 * len(a)
    if est > budget:
        raise BudgetExceededError(est, budget, f"quad oracle on |A-A|={len(d)}")
    lhs = energy(a, a, 4)
    r = _membership_matrix(a, d.elements)
    rhs = 0
    for i in range(r.shape[0]):
        c = (r * r[i]) @ r.T
        rhs += int(np.sum(c * c))
    return lhs, rhs


def _quad_rhs_literal(a: GSet) -> int:
    """Tiny direct triple loop; oracle for the vectorized oracle."""
    d = diffset(a, a)
    base = a.as_set()
    red = a.ctx.reduce
    total = 0
    for x in d.elements:
        ax = [e for e in a.elements if red(e - x) in base]
        for y in d.elements:
            axy = [e for e in ax if red(e - y) in base]
            for z in d.elements:
                c = sum(1 for e in axy if red(e - z) in base)
                total += c * c
    return total


def _pair_energy(xs: tuple[int, ...], ws: tuple[int, ...], red) -> int:
    """E(X, W) via the definitional second moment of the difference counts."""
    if len(xs) == 1 or len(ws) == 1:
        return len(xs) * len(ws)  # all differences distinct against a singleton
    counts = Counter(red(x - w) for x in xs for w in ws)
    return sum(v * v for v in counts.values())


def lem1_identity(a: GSet, budget: int = DEFAULT_BUDGET) -> tuple[int, int]:
    """E_4(A) vs  sum over (x, w) in (A-A)^2 of E(A_x, A_w)."""
    if not len(a):
        return (0, 0)
    d = diffset(a, a)
    red = a.ctx.reduce
    pre = len(d) * (len(a) + max(1, a.span() // 64))
    if pre > budget:
        raise BudgetExceededError(pre, budget, f"lem1 translate table on |A-A|={len(d)}")
    parts = [translate_intersect(a, x).elements for x in d.elements]
    sizes = [len(p) for p in parts]
    multi_mass = sum(s for s in sizes if s > 1)
    # pair loop is Python dict work; weight it like the other oracles
    est = 50 * (multi_mass * multi_mass + 4 * len(d) ** 2)
    if est > budget:
        raise BudgetExceededError(est, budget, f"lem1 oracle on |A-A|={len(d)}")
    lhs = energy(a, a, 4)
    singles = sum(s == 1 for s in sizes)
    size_sum = sum(sizes)
    # pairs with a singleton side contribute |other| each; do them in bulk
    rhs = 2 * singles * size_sum - singles * singles
    multi = [p for p in parts if len(p) > 1]
    for i, xs in enumerate(multi):
        rhs += _pair_energy(xs, xs, red)
        for ws in multi[i + 1 :]:
            rhs += 2 * _pair_energy(xs, ws, red)
    return lhs, rhs


def cross_energy_identity(a: GSet, d: GSet) -> tuple[int, int]:
    """E(A, D) vs  sum_x r_{A-A}(x) r_{D-D}(x)."""
    lhs = energy(a, d, 2)
    ra = repr_fn(a, a, "-")
    rd = repr_fn(d, d, "-")
    small, big = (ra, rd) if len(ra) <= len(rd) else (rd, ra)
    rhs = sum(v * big.value(x) for x, v in small.items())
    return lhs, rhs
