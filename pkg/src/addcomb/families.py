"""Deterministic, seeded generators for the instance families.

Every family is reproducible from (spec, seed) alone: the RNG is a
versioned PCG64 stream spawned per purpose, so adding a family never
perturbs the draws of an existing one.  Generated sets are checked
against their defining property where that is cheap.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .config import RNG_VERSION
from .errors import FieldRequiredError, ParameterError
from .groups import GSet, GroupCtx, diffset, prodset

FAMILY_NAMES = (
    "ap",
    "geometric",
    "mult_subgroup",
    "sidon_greedy",
    "random_interval",
    "ap_plus_generic",
)

GENERIC_ELEMENT_CAP = 1 << 60


@dataclass(frozen=True)
class FamilySpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILY_NAMES:
            raise ParameterError(f"unknown family {self.family!r}")

    def describe(self) -> str:
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.family}({inner})"


def rng_for(seed: int, purpose: str) -> np.random.Generator:
    """Versioned per-purpose PCG64 stream."""
    key = zlib.crc32(purpose.encode("utf-8"))
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(RNG_VERSION, key))
    return np.random.Generator(np.random.PCG64(ss))


def primitive_root(p: int) -> int:
    n = p - 1
    factors = []
    d, m = 2, n
    while d * d <= m:
        if m % d == 0:
            factors.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        factors.append(m)
    g = 2
    while True:
        if all(pow(g, n // q, p) != 1 for q in factors):
            return g
        g += 1


def _gen_ap(ctx: GroupCtx, start: int, step: int, n: int) -> GSet:
    if n < 1:
        raise ParameterError(f"progression length must be >= 1, got {n}")
    if step == 0:
        raise ParameterError("progression step must be nonzero")
    return GSet.from_elements(ctx, (start + k * step for k in range(n)))


def _gen_geometric(ctx: GroupCtx, first: int, ratio: int, n: int) -> GSet:
    if n < 1:
        raise ParameterError(f"progression length must be >= 1, got {n}")
    if ctx.is_residues:
        if ratio % ctx.modulus in (0,):
            raise ParameterError("geometric ratio must be a unit")
    elif abs(ratio) < 2:
        raise ParameterError("integer geometric progressions need |ratio| >= 2")
    out = []
    cur = first
    for _ in range(n):
        out.append(cur)
        cur = cur * ratio
    return GSet.from_elements(ctx, out)


def _gen_mult_subgroup(ctx: GroupCtx, order: int) -> GSet:
    if not (ctx.is_residues and ctx.prime):
        raise FieldRequiredError("multiplicative subgroups need a prime modulus")
    p = ctx.modulus
    if order < 1 or (p - 1) % order:
        raise ParameterError(f"order {order} does not divide {p - 1}")
    g = primitive_root(p)
    h = pow(g, (p - 1) // order, p)
    elems = set()
    x = 1
    for _ in range(order):
        elems.add(x)
        x = x * h % p
    out = GSet.from_elements(ctx, elems)
    if len(out) != order or prodset(out, out) != out:
        raise AssertionError("subgroup generation produced a non-subgroup")
    return out


def _sidon_greedy_elements(n: int) -> list[int]:
    """Greedy B_2 sequence from 0: forbid s + s' - s'' at every step."""
    elems: list[int] = []
    forb = np.zeros(1024, dtype=bool)

    def ensure(size: int) -> None:
        nonlocal forb
        if size > forb.size:
            grown = np.zeros(max(size, 2 * forb.size), dtype=bool)
            grown[: forb.size] = forb
            forb = grown

    def admit(x: int) -> None:
        elems.append(x)
        s = np.array(elems, dtype=np.int64)
        fresh = (x + s[:, None] - s[None, :]).ravel()
        stale = (s[:, None] + s[None, :] - x).ravel()
        vals = np.concatenate([fresh, stale])
        vals = vals[vals >= 0]
        if vals.size:
            ensure(int(vals.max()) + 1)
            forb[vals] = True

    admit(0)
    while len(elems) < n:
        t = elems[-1] + 1
        while True:
            ensure(t + 1)
            if not forb[t]:
                break
            t += 1
        admit(t)
    return elems


def _gen_sidon(ctx: GroupCtx, n: int) -> GSet:
    if n < 1:
        raise ParameterError(f"Sidon size must be >= 1, got {n}")
    if ctx.is_residues:
        raise ParameterError("greedy Sidon sets are generated over the integers")
    out = GSet.from_elements(ctx, _sidon_greedy_elements(n))
    if not is_sidon(out):
        raise AssertionError("greedy construction lost the Sidon property")
    return out


def _gen_random_interval(ctx: GroupCtx, n: int, prob: float, seed: int) -> GSet:
    if not (0.0 < prob <= 1.0):
        raise ParameterError(f"keep probability must be in (0, 1], got {prob}")
    if n < 1:
        raise ParameterError(f"interval length must be >= 1, got {n}")
    rng = rng_for(seed, f"random_interval:{n}")
    keep = rng.random(n) < prob
    return GSet.from_elements(ctx, (i + 1 for i in range(n) if keep[i]))


def _gen_ap_plus_generic(ctx: GroupCtx, n: int, m: int | None, seed: int) -> GSet:
    if n < 1:
        raise ParameterError(f"progression block length must be >= 1, got {n}")
    if m is None:
        m = round(n ** 1.25)  # block sizes tied by n^5 ~ m^4
    hi = min(n**16 if n > 1 else 2, GENERIC_ELEMENT_CAP)
    if hi <= n + 1:
        raise ParameterError("no room for the generic block above the progression")
    rng = rng_for(seed, f"ap_plus_generic:{n}")
    generic: set[int] = set()
    while len(generic) < m:
        draw = int(rng.integers(n + 1, hi))
        generic.add(draw)
    return GSet.from_elements(ctx, list(range(1, n + 1)) + sorted(generic))


def generate(spec: FamilySpec, ctx: GroupCtx | None = None) -> GSet:
    """Build the set a family spec describes.

    ``ctx`` defaults to the integers; families that require a field
    (mult_subgroup, and usually geometric) must be handed a prime
    residue context.
    """
    if ctx is None:
        ctx = GroupCtx.integers()
    p = dict(spec.params)
    fam = spec.family
    if fam == "ap":
        return _gen_ap(ctx, p.get("start", 0), p.get("step", 1), p["n"])
    if fam == "geometric":
        return _gen_geometric(ctx, p.get("first", p.get("ratio", 2)), p.get("ratio", 2), p["n"])
    if fam == "mult_subgroup":
        return _gen_mult_subgroup(ctx, p["order"])
    if fam == "sidon_greedy":
        return _gen_sidon(ctx, p["n"])
    if fam == "random_interval":
        return _gen_random_interval(ctx, p["n"], p.get("prob", 0.5), spec.seed)
    if fam == "ap_plus_generic":
        return _gen_ap_plus_generic(ctx, p["n"], p.get("m"), spec.seed)
    raise ParameterError(f"unknown family {fam!r}")


def is_sidon(a: GSet) -> bool:
    """All pairwise differences distinct: |A - A| = |A|^2 - |A| + 1."""
    n = len(a)
    return len(diffset(a, a)) == n * n - n + 1


def random_subset(ctx: GroupCtx, size: int, lo: int, hi: int, seed: int, purpose: str = "subset") -> GSet:
    """Uniform random subset of [lo, hi) of the given size (test corpus helper)."""
    if hi - lo < size:
        raise ParameterError("range too small for requested size")
    rng = rng_for(seed, f"{purpose}:{lo}:{hi}")
    draws = rng.choice(hi - lo, size=size, replace=False)
    return GSet.from_elements(ctx, (lo + int(d) for d in draws))
