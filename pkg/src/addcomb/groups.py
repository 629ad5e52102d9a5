"""Ambient group contexts and canonical finite sets.

Supported groups are the integers and the residues mod m (m >= 2, with
a primality flag that gates field-only operations such as ratio sets).
A ``GSet`` is an immutable, duplicate-free, canonically sorted subset
of its context.  All set arithmetic is exact and pure.

Sets whose span fits in :data:`addcomb.config.BITSET_SPAN_LIMIT`
additionally carry a dense bitmap (a Python big integer), and the
sumset/difference machinery uses shift-or bitmap arithmetic on that
path; the element-pair path is always available and the two are
required to agree bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .config import BITSET_SPAN_LIMIT
from .errors import (
    ContextMismatchError,
    DomainError,
    FieldRequiredError,
    InvalidContextError,
    InvalidSetError,
)

KIND_INTEGERS = "integers"
KIND_RESIDUES = "residues"

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n below 3.3e24."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class GroupCtx:
    """Ambient group descriptor: integers, or residues mod ``modulus``."""

    kind: str
    modulus: int | None = None
    prime: bool = False

    def __post_init__(self):
        if self.kind == KIND_INTEGERS:
            if self.modulus is not None:
                raise InvalidContextError("integer context takes no modulus")
        elif self.kind == KIND_RESIDUES:
            if self.modulus is None or self.modulus < 2:
                raise InvalidContextError(f"modulus must be >= 2, got {self.modulus}")
            object.__setattr__(self, "prime", is_prime(self.modulus))
        else:
            raise InvalidContextError(f"unknown group kind {self.kind!r}")

    @classmethod
    def integers(cls) -> "GroupCtx":
        return cls(KIND_INTEGERS)

    @classmethod
    def residues(cls, modulus: int) -> "GroupCtx":
        return cls(KIND_RESIDUES, modulus)

    @property
    def is_residues(self) -> bool:
        return self.kind == KIND_RESIDUES

    def reduce(self, x: int) -> int:
        """Canonical representative of x (in [0, m) for residues)."""
        return x % self.modulus if self.is_residues else x

    def neg(self, x: int) -> int:
        return (-x) % self.modulus if self.is_residues else -x

    def describe(self) -> str:
        if self.is_residues:
            tag = "prime" if self.prime else "composite"
            return f"Z/{self.modulus}Z ({tag})"
        return "Z"


def make_ctx(kind: str, modulus: int | None = None) -> GroupCtx:
    """Build a context; primality of a residue modulus is computed here."""
    return GroupCtx(kind, modulus)


def _check_same_ctx(a: "GSet", b: "GSet") -> None:
    if a.ctx != b.ctx:
        raise ContextMismatchError(f"contexts differ: {a.ctx.describe()} vs {b.ctx.describe()}")


@dataclass(frozen=True)
class GSet:
    """Canonical finite subset of a group context.

    ``elements`` is strictly increasing with every element reduced into
    canonical range.  A dense bitmap (int mask anchored at ``_offset``)
    is attached when the span allows; it is an implementation detail
    and never part of equality.
    """

    ctx: GroupCtx
    elements: tuple[int, ...]
    _mask: int | None = field(default=None, repr=False, compare=False)
    _offset: int = field(default=0, repr=False, compare=False)

    def __post_init__(self):
        elems = self.elements
        for i in range(1, len(elems)):
            if elems[i - 1] >= elems[i]:
                raise InvalidSetError("elements must be strictly increasing")
        if self.ctx.is_residues and elems:
            if elems[0] < 0 or elems[-1] >= self.ctx.modulus:
                raise InvalidSetError("residue elements must lie in [0, m)")
        if self._mask is None:
            mask, offset = _build_mask(self.ctx, elems)
            object.__setattr__(self, "_mask", mask)
            object.__setattr__(self, "_offset", offset)

    @classmethod
    def from_elements(cls, ctx: GroupCtx, elements: Iterable[int]) -> "GSet":
        canon = sorted({ctx.reduce(int(x)) for x in elements})
        return cls(ctx, tuple(canon))

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return self.ctx.reduce(x) in self.as_set()

    def __iter__(self):
        return iter(self.elements)

    def as_set(self) -> frozenset:
        return frozenset(self.elements)

    @property
    def has_mask(self) -> bool:
        return self._mask is not None

    def span(self) -> int:
        """Number of positions in the bounding window (m for residues)."""
        if self.ctx.is_residues:
            return self.ctx.modulus
        if not self.elements:
            return 0
        return self.elements[-1] - self.elements[0] + 1

    def bitmask_at(self, anchor: int = 0) -> int | None:
        """Dense bitmap with bit (e - anchor) set per element.

        Residues masks are anchored at 0 regardless of ``anchor``;
        integer masks require anchor <= min(A).  None when the span
        exceeds the bitmap limit.
        """
        if self._mask is None:
            return None
        if self.ctx.is_residues or not self.elements:
            return self._mask
        if anchor > self._offset:
            raise InvalidSetError("anchor must not exceed the smallest element")
        return self._mask << (self._offset - anchor)

    def min(self) -> int:
        return self.elements[0]

    def max(self) -> int:
        return self.elements[-1]


def _build_mask(ctx: GroupCtx, elems: Sequence[int]) -> tuple[int | None, int]:
    if ctx.is_residues:
        if ctx.modulus > BITSET_SPAN_LIMIT:
            return None, 0
        mask = 0
        for x in elems:
            mask |= 1 << x
        return mask, 0
    if not elems:
        return 0, 0
    lo, hi = elems[0], elems[-1]
    if hi - lo + 1 > BITSET_SPAN_LIMIT:
        return None, 0
    mask = 0
    for x in elems:
        mask |= 1 << (x - lo)
    return mask, lo


def _mask_to_elements(mask: int, offset: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1 + offset)
        mask ^= low
    return out


def empty(ctx: GroupCtx) -> GSet:
    return GSet(ctx, ())


def singleton(ctx: GroupCtx, x: int) -> GSet:
    return GSet.from_elements(ctx, (x,))


def union(a: GSet, b: GSet) -> GSet:
    _check_same_ctx(a, b)
    return GSet.from_elements(a.ctx, a.elements + b.elements)


def negate(a: GSet) -> GSet:
    return GSet.from_elements(a.ctx, (a.ctx.neg(x) for x in a.elements))


def translate(a: GSet, x: int) -> GSet:
    return GSet.from_elements(a.ctx, (e + x for e in a.elements))


def _sumset_pairs(a: GSet, b: GSet) -> GSet:
    ctx = a.ctx
    if ctx.is_residues:
        m = ctx.modulus
        out = {(x + y) % m for x in a.elements for y in b.elements}
    else:
        out = {x + y for x in a.elements for y in b.elements}
    return GSet(ctx, tuple(sorted(out)))


def _sumset_bitmap(a: GSet, b: GSet) -> GSet | None:
    """Shift-or sumset; returns None when the bitmap path is unavailable."""
    if not a.has_mask or not b.has_mask:
        return None
    if not a.elements or not b.elements:
        return empty(a.ctx)
    ctx = a.ctx
    if ctx.is_residues:
        m = ctx.modulus
        small, big = (a, b) if len(a) <= len(b) else (b, a)
        full = (1 << m) - 1
        acc = 0
        bm = big._mask
        for s in small.elements:
            rot = ((bm << s) | (bm >> (m - s))) & full if s else bm
            acc |= rot
        return GSet(ctx, tuple(_mask_to_elements(acc, 0)))
    lo = a.min() + b.min()
    hi = a.max() + b.max()
    if hi - lo + 1 > BITSET_SPAN_LIMIT:
        return None
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    acc = 0
    bm = big._mask
    for s in small.elements:
        acc |= bm << (s - small._offset)
    return GSet(ctx, tuple(_mask_to_elements(acc, lo)))


def sumset(a: GSet, b: GSet, use_bitmap: bool | None = None) -> GSet:
    """A + B = {x + y : x in A, y in B}, exact and canonical.

    ``use_bitmap`` forces one evaluation path (for the equivalence
    property tests); the default picks the bitmap when available.
    """
    _check_same_ctx(a, b)
    if use_bitmap is False:
        return _sumset_pairs(a, b)
    fast = _sumset_bitmap(a, b)
    if fast is None:
        if use_bitmap is True:
            raise InvalidSetError("bitmap path unavailable for this span")
        return _sumset_pairs(a, b)
    return fast


def diffset(a: GSet, b: GSet, use_bitmap: bool | None = None) -> GSet:
    """A - B, implemented as A + (-B)."""
    _check_same_ctx(a, b)
    return sumset(a, negate(b), use_bitmap=use_bitmap)


def prodset(a: GSet, b: GSet) -> GSet:
    """AB = {xy : x in A, y in B}."""
    _check_same_ctx(a, b)
    ctx = a.ctx
    if ctx.is_residues:
        m = ctx.modulus
        out = {(x * y) % m for x in a.elements for y in b.elements}
    else:
        out = {x * y for x in a.elements for y in b.elements}
    return GSet(ctx, tuple(sorted(out)))


def ratioset(a: GSet, b: GSet) -> GSet:
    """A/B over a prime residue field; zero divisors are rejected."""
    _check_same_ctx(a, b)
    ctx = a.ctx
    if not (ctx.is_residues and ctx.prime):
        raise FieldRequiredError("ratio sets need a prime residue context")
    if 0 in b.as_set():
        raise DomainError("0 in divisor set")
    m = ctx.modulus
    inv = {y: pow(y, -1, m) for y in b.elements}
    out = {(x * inv[y]) % m for x in a.elements for y in b.elements}
    return GSet(ctx, tuple(sorted(out)))


def translate_intersect(a: GSet, x: int) -> GSet:
    """A_x = A  ∩ (A + x); its size equals the difference count of A at x."""
    x = a.ctx.reduce(x)
    if a.has_mask and a.elements:
        if a.ctx.is_residues:
            m = a.ctx.modulus
            full = (1 << m) - 1
            shifted = ((a._mask << x) | (a._mask >> (m - x))) & full if x else a._mask
            mask = a._mask & shifted
            return GSet(a.ctx, tuple(_mask_to_elements(mask, 0)))
        # translate by x moves the anchored window; intersect in place
        if x >= 0:
            mask = a._mask & (a._mask << x)
        else:
            mask = a._mask & (a._mask >> (-x))
        return GSet(a.ctx, tuple(_mask_to_elements(mask, a._offset)))
    base = a.as_set()
    kept = [e for e in a.elements if a.ctx.reduce(e - x) in base]
    return GSet(a.ctx, tuple(kept))


def strip_zero(a: GSet) -> tuple[GSet, bool]:
    """Remove 0 if present; the flag records whether anything was stripped."""
    if 0 in a.as_set():
        return GSet(a.ctx, tuple(e for e in a.elements if e != 0)), True
    return a, False


# --- JSON set format ------------------------------------------------------
#
# {"group": {"kind": "residues", "modulus": 101} | {"kind": "integers"},
#  "elements": [ ... ]}


def ctx_to_json(ctx: GroupCtx) -> dict:
    if ctx.is_residues:
        return {"kind": KIND_RESIDUES, "modulus": ctx.modulus}
    return {"kind": KIND_INTEGERS}


def ctx_from_json(obj: dict) -> GroupCtx:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvalidSetError("group descriptor must be an object with a 'kind'")
    kind = obj["kind"]
    if kind == KIND_RESIDUES:
        return GroupCtx.residues(int(obj["modulus"]))
    if kind == KIND_INTEGERS:
        return GroupCtx.integers()
    raise InvalidSetError(f"unknown group kind {kind!r}")


def set_to_json(a: GSet) -> dict:
    return {"group": ctx_to_json(a.ctx), "elements": list(a.elements)}


def set_from_json(obj: dict) -> GSet:
    """Strict reader: canonicalizes order but rejects out-of-range entries."""
    if not isinstance(obj, dict):
        raise InvalidSetError("set document must be a JSON object")
    ctx = ctx_from_json(obj.get("group", {}))
    elems = obj.get("elements")
    if not isinstance(elems, list):
        raise InvalidSetError("'elements' must be a list")
    for i, x in enumerate(elems):
        if isinstance(x, bool) or not isinstance(x, int):
            raise InvalidSetError(f"element at position {i} is not an integer: {x!r}")
        if ctx.is_residues and not (0 <= x < ctx.modulus):
            raise InvalidSetError(
                f"element at position {i} out of range [0, {ctx.modulus}): {x}"
            )
    return GSet.from_elements(ctx, elems)


def load_set(path: str) -> GSet:
    with open(path, "r", encoding="utf-8") as fh:
        return set_from_json(json.load(fh))


def dump_set(a: GSet, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(set_to_json(a), fh)
        fh.write("\n")
