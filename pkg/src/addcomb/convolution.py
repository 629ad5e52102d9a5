"""Exact representation functions and convolutions.

A ``CountFn`` is a finitely supported function from group elements to
positive integers (difference/sum counts, indicators, iterated
convolutions).  Everything in this module is integer-exact: the fast
path runs a number-theoretic transform over enough 31-bit primes to
reconstruct the true values by CRT, and a naive quadratic path is
always available as an oracle.  No floating point is used anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .config import FAST_CONV_SPAN_LIMIT, VALUE_BOUND_LIMIT
from .errors import (
    ContextMismatchError,
    InvalidSetError,
    OverflowLimitError,
    ParameterError,
)
from .groups import GSet, GroupCtx, ctx_from_json, ctx_to_json

# NTT-friendly primes p = c * 2^s + 1 (all below 2^31, so products of
# two reduced residues stay inside int64).  ``s`` caps the transform
# length at 2^s.
_NTT_PRIMES: tuple[tuple[int, int], ...] = (
    (2013265921, 27),   # 15 * 2^27 + 1
    (1811939329, 26),   # 27 * 2^26 + 1
    (469762049, 26),    # 7 * 2^26 + 1
    (2113929217, 25),   # 63 * 2^25 + 1
    (167772161, 25),    # 5 * 2^25 + 1
    (754974721, 24),    # 45 * 2^24 + 1
    (2130706433, 24),   # 127 * 2^24 + 1
    (998244353, 23),    # 119 * 2^23 + 1
)

# Naive cost (|supp f| * |supp g|) below which the dict path wins.
_NTT_CROSSOVER = 1 << 14


def _primitive_root(p: int) -> int:
    """Smallest primitive root mod p (p prime, p - 1 factored by trial division)."""
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


_ROOT_CACHE: dict[int, int] = {}
_TWIDDLE_CACHE: dict[tuple[int, int, bool], np.ndarray] = {}
_TWIDDLE_BUDGET = 1 << 22  # total cached elements


def _powers(base: int, count: int, p: int) -> np.ndarray:
    """Vector of base^j mod p for j in [0, count)."""
    out = np.ones(count, dtype=np.int64)
    j = np.arange(count, dtype=np.int64)
    b = base % p
    bit = 1
    while bit < count:
        sel = (j & bit) != 0
        out[sel] = out[sel] * b % p
        b = b * b % p
        bit <<= 1
    return out


def _stage_roots(p: int, n: int, inverse: bool) -> np.ndarray:
    key = (p, n, inverse)
    cached = _TWIDDLE_CACHE.get(key)
    if cached is not None:
        return cached
    g = _ROOT_CACHE.get(p)
    if g is None:
        g = _primitive_root(p)
        _ROOT_CACHE[p] = g
    w = pow(g, (p - 1) // n, p)
    if inverse:
        w = pow(w, p - 2, p)
    roots = _powers(w, max(n // 2, 1), p)
    if sum(a.size for a in _TWIDDLE_CACHE.values()) + roots.size <= _TWIDDLE_BUDGET:
        _TWIDDLE_CACHE[key] = roots
    return roots


def _ntt_forward(a: np.ndarray, p: int) -> None:
    """In-place Gentleman-Sande NTT: natural order in, bit-reversed out."""
    n = a.size
    roots = _stage_roots(p, n, inverse=False)
    size = n
    while size >= 2:
        half = size >> 1
        ws = roots[:: n // size][:half]
        blocks = a.reshape(-1, size)
        u = blocks[:, :half].copy()
        v = blocks[:, half:]
        blocks[:, :half] = (u + v) % p
        blocks[:, half:] = (u - v) % p * ws % p
        size = half


def _ntt_inverse(a: np.ndarray, p: int) -> None:
    """In-place Cooley-Tukey inverse NTT: bit-reversed in, natural out."""
    n = a.size
    roots = _stage_roots(p, n, inverse=True)
    size = 2
    while size <= n:
        half = size >> 1
        ws = roots[:: n // size][:half]
        blocks = a.reshape(-1, size)
        t = blocks[:, half:] * ws % p
        u = blocks[:, :half].copy()
        blocks[:, :half] = (u + t) % p
        blocks[:, half:] = (u - t) % p
        size <<= 1
    n_inv = pow(n, p - 2, p)
    a *= n_inv
    a %= p


def _primes_for(length: int, bound: int) -> list[int]:
    """Primes whose product exceeds ``bound`` and whose NTT covers ``length``."""
    need_s = max(1, (length - 1).bit_length())
    usable = [p for p, s in _NTT_PRIMES if s >= need_s]
    chosen, prod = [], 1
    for p in usable:
        chosen.append(p)
        prod *= p
        if prod > bound:
            return chosen
    raise OverflowLimitError(
        f"convolution bound {bound} exceeds CRT capacity for length {length}"
    )


def _dense_linear_convolve(fa: list[int], ga: list[int], bound: int) -> list[int]:
    """Exact linear convolution of dense integer lists via multi-prime NTT."""
    out_len = len(fa) + len(ga) - 1
    n = 1 << (out_len - 1).bit_length()
    primes = _primes_for(n, bound)
    small = bound < (1 << 62)
    if small:
        base_f = np.array(fa, dtype=np.int64)
        base_g = np.array(ga, dtype=np.int64)
    residues = []
    for p in primes:
        if small:
            af = np.zeros(n, dtype=np.int64)
            ag = np.zeros(n, dtype=np.int64)
            af[: len(fa)] = base_f % p
            ag[: len(ga)] = base_g % p
        else:
            af = np.zeros(n, dtype=np.int64)
            ag = np.zeros(n, dtype=np.int64)
            af[: len(fa)] = [v % p for v in fa]
            ag[: len(ga)] = [v % p for v in ga]
        _ntt_forward(af, p)
        _ntt_forward(ag, p)
        af = af * ag % p
        _ntt_inverse(af, p)
        residues.append(af[:out_len])
    if len(primes) == 1:
        return residues[0].tolist()
    # CRT: x = sum r_i * c_i mod M with c_i = (M/p_i) * (M/p_i)^-1 mod p_i
    modulus = 1
    for p in primes:
        modulus *= p
    coeffs = []
    for p in primes:
        q = modulus // p
        coeffs.append(q * pow(q, -1, p))
    lists = [r.tolist() for r in residues]
    out = []
    for idx in range(out_len):
        x = 0
        for c, lst in zip(coeffs, lists):
            x += c * lst[idx]
        out.append(x % modulus)
    return out


@dataclass(frozen=True)
class CountFn:
    """Finite-support function to positive integers, canonically sorted."""

    ctx: GroupCtx
    support: tuple[tuple[int, int], ...]
    _lookup: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        prev = None
        for x, v in self.support:
            if prev is not None and x <= prev:
                raise InvalidSetError("support must be strictly increasing in x")
            if v <= 0:
                raise InvalidSetError(f"support value at {x} must be positive, got {v}")
            if self.ctx.is_residues and not (0 <= x < self.ctx.modulus):
                raise InvalidSetError(f"support point {x} outside [0, m)")
            prev = x
        object.__setattr__(self, "_lookup", dict(self.support))

    @classmethod
    def from_mapping(cls, ctx: GroupCtx, values: Mapping[int, int] | Iterable[tuple[int, int]]) -> "CountFn":
        acc: dict[int, int] = {}
        items = values.items() if isinstance(values, Mapping) else values
        for x, v in items:
            if v:
                key = ctx.reduce(int(x))
                acc[key] = acc.get(key, 0) + int(v)
        cleaned = {x: v for x, v in acc.items() if v != 0}
        return cls(ctx, tuple(sorted(cleaned.items())))

    def value(self, x: int) -> int:
        return self._lookup.get(self.ctx.reduce(x), 0)

    def mass(self) -> int:
        return sum(v for _, v in self.support)

    def max_value(self) -> int:
        return max((v for _, v in self.support), default=0)

    def support_set(self) -> GSet:
        return GSet(self.ctx, tuple(x for x, _ in self.support))

    def items(self):
        return iter(self.support)

    def __len__(self) -> int:
        return len(self.support)

    def reflect(self) -> "CountFn":
        """x -> f(-x)."""
        return CountFn.from_mapping(self.ctx, ((self.ctx.neg(x), v) for x, v in self.support))


def indicator(a: GSet) -> CountFn:
    return CountFn(a.ctx, tuple((x, 1) for x in a.elements))


def delta(ctx: GroupCtx, x: int = 0) -> CountFn:
    return CountFn(ctx, ((ctx.reduce(x), 1),))


def _convolve_naive(f: CountFn, g: CountFn) -> CountFn:
    ctx = f.ctx
    out: dict[int, int] = {}
    if ctx.is_residues:
        m = ctx.modulus
        for x, fv in f.support:
            for y, gv in g.support:
                k = (x + y) % m
                out[k] = out.get(k, 0) + fv * gv
    else:
        for x, fv in f.support:
            for y, gv in g.support:
                k = x + y
                out[k] = out.get(k, 0) + fv * gv
    return CountFn(ctx, tuple(sorted(out.items())))


def _dense_eligible(f: CountFn, g: CountFn) -> bool:
    ctx = f.ctx
    if not f.support or not g.support:
        return False
    if ctx.is_residues:
        return ctx.modulus <= FAST_CONV_SPAN_LIMIT
    span_f = f.support[-1][0] - f.support[0][0] + 1
    span_g = g.support[-1][0] - g.support[0][0] + 1
    return span_f <= FAST_CONV_SPAN_LIMIT and span_g <= FAST_CONV_SPAN_LIMIT


def _convolve_ntt(f: CountFn, g: CountFn, bound: int) -> CountFn:
    ctx = f.ctx
    if ctx.is_residues:
        m = ctx.modulus
        fa = [0] * m
        for x, v in f.support:
            fa[x] = v
        ga = [0] * m
        for x, v in g.support:
            ga[x] = v
        lin = _dense_linear_convolve(fa, ga, bound)
        folded = lin[:m] + [0] * (m - min(m, len(lin)))
        for i in range(m, len(lin)):
            folded[i - m] += lin[i]
        return CountFn(ctx, tuple((i, v) for i, v in enumerate(folded) if v))
    off_f = f.support[0][0]
    off_g = g.support[0][0]
    fa = [0] * (f.support[-1][0] - off_f + 1)
    for x, v in f.support:
        fa[x - off_f] = v
    ga = [0] * (g.support[-1][0] - off_g + 1)
    for x, v in g.support:
        ga[x - off_g] = v
    lin = _dense_linear_convolve(fa, ga, bound)
    off = off_f + off_g
    return CountFn(ctx, tuple((off + i, v) for i, v in enumerate(lin) if v))


def convolve(f: CountFn, g: CountFn, kind: str = "sum", method: str = "auto") -> CountFn:
    """Exact convolution of two count functions.

    ``kind="sum"`` is (f*g)(x) = sum_y f(y) g(x-y); ``kind="diff"`` is
    the correlation (f∘g)(x) = sum_y f(y) g(x+y), computed by reflecting
    f.  ``method`` picks the evaluation path: "naive" is the quadratic
    oracle, "ntt" forces the dense transform, "auto" chooses by cost.
    """
    if f.ctx != g.ctx:
        raise ContextMismatchError("convolution operands share one context")
    if kind == "diff":
        return convolve(f.reflect(), g, kind="sum", method=method)
    if kind != "sum":
        raise ParameterError(f"unknown convolution kind {kind!r}")
    bound = min(f.mass() * g.max_value(), g.mass() * f.max_value())
    if bound > VALUE_BOUND_LIMIT:
        raise OverflowLimitError(
            f"certified convolution bound {bound} exceeds the 128-bit guarantee"
        )
    if method == "naive":
        return _convolve_naive(f, g)
    if method == "ntt":
        if not _dense_eligible(f, g):
            raise ParameterError("dense transform path unavailable for these supports")
        return _convolve_ntt(f, g, bound)
    if method != "auto":
        raise ParameterError(f"unknown convolution method {method!r}")
    if (
        _dense_eligible(f, g)
        and len(f) * len(g) > _NTT_CROSSOVER
        and _ntt_cost(f, g) < 50 * len(f) * len(g)
    ):
        return _convolve_ntt(f, g, bound)
    return _convolve_naive(f, g)


def _ntt_cost(f: CountFn, g: CountFn) -> int:
    if f.ctx.is_residues:
        out_len = 2 * f.ctx.modulus - 1
    else:
        span_f = f.support[-1][0] - f.support[0][0] + 1
        span_g = g.support[-1][0] - g.support[0][0] + 1
        out_len = span_f + span_g - 1
    n = 1 << (out_len - 1).bit_length()
    return 6 * n * max(n.bit_length(), 1)


def conv_cost_estimate(f: CountFn, g: CountFn) -> int:
    """Rough elementary-step estimate for budget gating.

    Python dict work is weighted 50x against vectorized transform work
    so that the default budget corresponds to seconds, not minutes.
    """
    if not f.support or not g.support:
        return 0
    naive = 50 * len(f) * len(g)
    if _dense_eligible(f, g):
        return min(naive, _ntt_cost(f, g))
    return naive


def repr_fn(a: GSet, b: GSet, sign: str, method: str = "auto") -> CountFn:
    """Representation counts r_{A+B} (sign "+") or r_{A-B} (sign "-").

    r_{A-B}(x) counts pairs (a, b) with x = a - b, i.e. the correlation
    of the indicator of B against the indicator of A.
    """
    if a.ctx != b.ctx:
        raise ContextMismatchError("representation function needs one shared context")
    if sign == "+":
        return convolve(indicator(a), indicator(b), kind="sum", method=method)
    if sign == "-":
        return convolve(indicator(b), indicator(a), kind="diff", method=method)
    raise ParameterError(f"sign must be '+' or '-', got {sign!r}")


def moment(f: CountFn, k: int) -> int:
    """Exact k-th moment  sum_x f(x)^k  (k >= 1)."""
    if k < 1:
        raise ParameterError(f"moment order must be >= 1, got {k}")
    return sum(v**k for _, v in f.support)


def self_convolve_pow2(f: CountFn, k: int, method: str = "auto") -> CountFn:
    """k-fold sum-convolution of f with itself, k a power of two."""
    if k < 1 or k & (k - 1):
        raise ParameterError(f"k must be a power of two, got {k}")
    out = f
    while k > 1:
        out = convolve(out, out, kind="sum", method=method)
        k >>= 1
    return out


# --- JSON ------------------------------------------------------------------


def countfn_to_json(f: CountFn) -> dict:
    return {"ctx": ctx_to_json(f.ctx), "values": [[x, v] for x, v in f.support]}


def countfn_from_json(obj: dict) -> CountFn:
    if not isinstance(obj, dict) or "values" not in obj:
        raise InvalidSetError("count function document needs 'ctx' and 'values'")
    ctx = ctx_from_json(obj.get("ctx", {}))
    vals = obj["values"]
    if not isinstance(vals, list):
        raise InvalidSetError("'values' must be a list of [x, v] pairs")
    pairs = []
    for i, item in enumerate(vals):
        if not (isinstance(item, list) and len(item) == 2):
            raise InvalidSetError(f"entry {i} is not an [x, v] pair")
        pairs.append((int(item[0]), int(item[1])))
    return CountFn.from_mapping(ctx, pairs)


def dump_countfn(f: CountFn, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(countfn_to_json(f), fh)
        fh.write("\n")
