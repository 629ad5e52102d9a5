"""Verification reports and exponent sweeps.

``verify_all`` runs every identity and explicit-constant inequality on
one instance and returns a typed report: equality rows and inequality
rows carry pass/fail, rows for claims with unspecified constants carry
only an empirical ratio (the report type forbids pass/fail there), and
rows whose work estimate exceeds the step budget are marked skipped
rather than dropped.

``sweep`` walks set families and records exact sizes, energies, the
fourth-moment density lower bound, and the sum-product exponent per
instance.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .config import DEFAULT_BUDGET, SCHEMA_VERSION
from .errors import AddcombError, BudgetExceededError, ParameterError
from .groups import GSet, GroupCtx, diffset, prodset, sumset, translate_intersect
from .convolution import (
    CountFn,
    conv_cost_estimate,
    convolve,
    indicator,
    moment,
    repr_fn,
)
from .energies import cross_energy_identity, lem1_identity, quad_identity
from .structure import (
    DyadicDecomposition,
    PopularSet,
    d4_family_search,
    dyadic_decompose,
    popular_set,
)
from .operators import (
    eigen_lemma_check,
    factorization_check,
    pidentity_check,
    spectral_energy_lemma_check,
)
from .families import FamilySpec, generate

REL_EQ = "eq"
REL_LE = "le"
REL_RATIO = "ratio"

# Weight of one Python-level set/dict operation relative to one
# vectorized word operation, used by the work estimators.
_PY_OP_WEIGHT = 50


@dataclass(frozen=True)
class CheckRow:
    """One verification row; the constructor enforces the soundness
    discipline (ratio rows never carry pass/fail, decided rows must)."""

    name: str
    relation: str
    lhs: object = None
    rhs: object = None
    passed: bool | None = None
    skipped: bool = False
    empirical_ratio: float | None = None
    notes: str = ""

    def __post_init__(self):
        if self.relation not in (REL_EQ, REL_LE, REL_RATIO):
            raise ParameterError(f"unknown relation {self.relation!r}")
        if self.relation == REL_RATIO:
            if self.passed is not None:
                raise ParameterError("ratio rows must not carry pass/fail")
        elif not self.skipped and self.passed is None:
            raise ParameterError(f"row {self.name} must be decided or skipped")


def _eq_row(name: str, lhs: int, rhs: int, notes: str = "") -> CheckRow:
    ok = lhs == rhs
    ratio = 1.0 if ok else (lhs / rhs if rhs else math.inf)
    return CheckRow(name, REL_EQ, lhs, rhs, ok, False, ratio, notes)


def _le_row(name: str, lhs: int, rhs: int, notes: str = "") -> CheckRow:
    ratio = (lhs / rhs) if rhs else (0.0 if lhs == 0 else math.inf)
    return CheckRow(name, REL_LE, lhs, rhs, lhs <= rhs, False, ratio, notes)


def _ratio_row(name: str, value: float, notes: str = "") -> CheckRow:
    return CheckRow(name, REL_RATIO, None, None, None, False, value, notes)


def _skip_row(name: str, relation: str, err: BudgetExceededError) -> CheckRow:
    return CheckRow(
        name, relation, None, None, None, True, None,
        f"skipped: estimate {err.estimate} over budget {err.budget}",
    )


@dataclass(frozen=True)
class VerificationReport:
    instance_id: str
    rows: tuple[CheckRow, ...]

    @property
    def failed(self) -> tuple[CheckRow, ...]:
        return tuple(r for r in self.rows if r.passed is False)

    @property
    def skipped(self) -> tuple[CheckRow, ...]:
        return tuple(r for r in self.rows if r.skipped)

    @property
    def all_passed(self) -> bool:
        return not self.failed

    def row(self, name: str) -> CheckRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


@dataclass
class VerifyOptions:
    budget: int = DEFAULT_BUDGET
    popular_c: Fraction = Fraction(1, 2)
    with_ratio_rows: bool = True


def _pow_ratio(log_value: float) -> float:
    # report huge monomial ratios without float overflow
    if log_value > 700.0:
        return math.inf
    if log_value < -700.0:
        return 0.0
    return math.exp(log_value)


# --- popular-pair machinery (lemma-energy-S4 and Katz-Koester) -------------


def _sh(mask: int, k: int) -> int:
    return mask << k if k >= 0 else mask >> (-k)


def _pair_rows_bitmask_z(a: GSet, p_elems: Sequence[int], parts: dict) -> tuple[int, int, bool]:
    lo_a, hi_a = a.min(), a.max()
    lo_d = lo_a - hi_a
    d = diffset(a, a)
    d_mask = d.bitmask_at(lo_d)
    masks = {x: parts[x].bitmask_at(lo_a) for x in p_elems}
    sizes = {x: len(parts[x]) for x in p_elems}
    sum_minus = 0
    sum_plus = 0
    kk_ok = True
    for i, x in enumerate(p_elems):
        for w in p_elems[i:]:
            xx, ww = (x, w) if sizes[w] <= sizes[x] else (w, x)
            big = masks[xx]
            dmask = 0
            pmask = 0
            for b in parts[ww].elements:
                dmask |= big << (hi_a - b)
                pmask |= big << (b - lo_a)
            weight = 1 if x == w else 2
            sum_minus += weight * dmask.bit_count()
            sum_plus += weight * pmask.bit_count()
            if kk_ok:
                rhs = (
                    d_mask
                    & _sh(d_mask, xx)
                    & _sh(d_mask, -ww)
                    & _sh(d_mask, xx - ww)
                )
                if dmask & ~rhs:
                    kk_ok = False
    return sum_minus, sum_plus, kk_ok


def _pair_rows_bitmask_mod(a: GSet, p_elems: Sequence[int], parts: dict) -> tuple[int, int, bool]:
    m = a.ctx.modulus
    full = (1 << m) - 1

    def rot(mask: int, s: int) -> int:
        s %= m
        return ((mask << s) | (mask >> (m - s))) & full if s else mask

    d_mask = diffset(a, a).bitmask_at()
    masks = {x: parts[x].bitmask_at() for x in p_elems}
    sizes = {x: len(parts[x]) for x in p_elems}
    sum_minus = 0
    sum_plus = 0
    kk_ok = True
    for i, x in enumerate(p_elems):
        for w in p_elems[i:]:
            xx, ww = (x, w) if sizes[w] <= sizes[x] else (w, x)
            big = masks[xx]
            dmask = 0
            pmask = 0
            for b in parts[ww].elements:
                dmask |= rot(big, -b)
                pmask |= rot(big, b)
            weight = 1 if x == w else 2
            sum_minus += weight * dmask.bit_count()
            sum_plus += weight * pmask.bit_count()
            if kk_ok:
                rhs = d_mask & rot(d_mask, xx) & rot(d_mask, -ww) & rot(d_mask, xx - ww)
                if dmask & ~rhs:
                    kk_ok = False
    return sum_minus, sum_plus, kk_ok


def _pair_rows_sets(a: GSet, p_elems: Sequence[int], parts: dict) -> tuple[int, int, bool]:
    red = a.ctx.reduce
    d_set = diffset(a, a).as_set()
    sum_minus = 0
    sum_plus = 0
    kk_ok = True
    for i, x in enumerate(p_elems):
        ax = parts[x].elements
        for w in p_elems[i:]:
            aw = parts[w].elements
            dset = {red(u - v) for u in ax for v in aw}
            pset = {red(u + v) for u in ax for v in aw}
            weight = 1 if x == w else 2
            sum_minus += weight * len(dset)
            sum_plus += weight * len(pset)
            if kk_ok:
                for e in dset:
                    if (
                        e not in d_set
                        or red(e - x) not in d_set
                        or red(e + w) not in d_set
                        or red(e - x + w) not in d_set
                    ):
                        kk_ok = False
                        break
    return sum_minus, sum_plus, kk_ok


def _s4_and_kk_rows(a: GSet, pop_minus: PopularSet, e4: int, budget: int) -> list[CheckRow]:
    """Popular-difference rows: the translate-energy inequality for both
    signs and the literal four-way intersection inclusion."""
    p_elems = pop_minus.p.elements
    pre = len(p_elems) * (len(a) + max(1, a.span() // 64))
    if pre > budget:
        err = BudgetExceededError(pre, budget, "popular translate table")
        return [
            _skip_row("lemma-energy-s4-minus", REL_LE, err),
            _skip_row("lemma-energy-s4-plus", REL_LE, err),
            _skip_row("katz-koester", REL_LE, err),
        ]
    parts = {x: translate_intersect(a, x) for x in p_elems}
    mass = sum(len(parts[x]) for x in p_elems)
    if mass != pop_minus.mass:
        raise AssertionError("translate sizes disagree with the popularity mass")
    pairs = len(p_elems) * (len(p_elems) + 1) // 2
    have_masks = a.bitmask_at(a.min() if len(a) else 0) is not None if len(a) else False
    span_words = max(1, (2 * a.span()) // 64 + 1) if len(a) else 1
    est_mask = pairs * (len(a) + 8) * span_words // 4 if have_masks else None
    est_sets = _PY_OP_WEIGHT * (mass * mass + pairs * 4)
    est = min(v for v in (est_mask, est_sets) if v is not None)
    if est > budget:
        err = BudgetExceededError(est, budget, "popular-pair rows")
        return [
            _skip_row("lemma-energy-s4-minus", REL_LE, err),
            _skip_row("lemma-energy-s4-plus", REL_LE, err),
            _skip_row("katz-koester", REL_LE, err),
        ]
    if est_mask is not None and est_mask <= est_sets:
        runner = _pair_rows_bitmask_mod if a.ctx.is_residues else _pair_rows_bitmask_z
        sum_minus, sum_plus, kk_ok = runner(a, p_elems, parts)
    else:
        sum_minus, sum_plus, kk_ok = _pair_rows_sets(a, p_elems, parts)
    lhs = mass**4
    return [
        _le_row("lemma-energy-s4-minus", lhs, e4 * sum_minus),
        _le_row("lemma-energy-s4-plus", lhs, e4 * sum_plus),
        CheckRow(
            "katz-koester", REL_LE, int(not kk_ok), 0, kk_ok, False,
            None, "A_x - A_w inside the four-way intersection of A-A",
        ),
    ]


# --- the per-instance pipeline ---------------------------------------------


def verify_all(a: GSet, instance_id: str = "instance", options: VerifyOptions | None = None) -> VerificationReport:
    """Run the whole identity/inequality battery on one set."""
    opts = options or VerifyOptions()
    budget = opts.budget
    rows: list[CheckRow] = []
    n = len(a)
    if n == 0:
        return VerificationReport(
            instance_id,
            (CheckRow("empty", REL_EQ, None, None, None, True, None, "empty set: nothing to verify"),),
        )

    splus = sumset(a, a)
    sminus = diffset(a, a)
    r_minus = repr_fn(a, a, "-")
    r_plus = repr_fn(a, a, "+")
    e2 = moment(r_minus, 2)
    e4 = moment(r_minus, 4)

    rows.append(_le_row("cs", n**4, e2 * len(splus)))
    rows.append(_le_row("e4-plus", n**8, e4 * len(splus) ** 3))
    rows.append(_le_row("e4-minus", n**8, e4 * len(sminus) ** 3))
    rows.append(_le_row("holder", e2**3, e4 * n**4))

    try:
        lhs, rhs = quad_identity(a, budget)
        rows.append(_eq_row("quad", lhs, rhs))
    except BudgetExceededError as err:
        rows.append(_skip_row("quad", REL_EQ, err))
    try:
        lhs, rhs = lem1_identity(a, budget)
        rows.append(_eq_row("lem1", lhs, rhs))
    except BudgetExceededError as err:
        rows.append(_skip_row("lem1", REL_EQ, err))

    lhs, rhs = cross_energy_identity(a, sminus)
    rows.append(_eq_row("cross-energy", lhs, rhs, "D = A-A"))

    pop_minus = popular_set(a, "-", opts.popular_c)
    pop_plus = popular_set(a, "+", opts.popular_c)
    rows.append(_le_row("popularity-mass-minus", n**2, 2 * pop_minus.mass))
    rows.append(_le_row("popularity-mass-plus", n**2, 2 * pop_plus.mass))

    rows.extend(_s4_and_kk_rows(a, pop_minus, e4, budget))

    # E(A-A) backs both the set version and the pair-lemma reduction
    ind_d = indicator(sminus)
    ed_est = conv_cost_estimate(ind_d, ind_d)
    if ed_est <= budget:
        e_d = moment(convolve(ind_d, ind_d, kind="diff"), 2)
        rows.append(_le_row("first", n**8, e4 * e_d, "P = A-A"))
        best = d4_family_search(a, budget=budget)
        num, den = best.lower_bound.numerator, best.lower_bound.denominator
        rows.append(
            _le_row(
                "setversion",
                n**8 * den,
                16 * num * n**4 * e_d,
                f"witness |B|={len(best.witness)}; explicit popularity constant 2^4",
            )
        )
        d4_lb = best.lower_bound
    else:
        err = BudgetExceededError(ed_est, budget, "E(A-A)")
        rows.append(_skip_row("first", REL_LE, err))
        rows.append(_skip_row("setversion", REL_LE, err))
        d4_lb = d4_family_search(a, budget=budget).lower_bound

    # dyadic decomposition rows (level invariants plus pigeonhole bounds)
    dec = dyadic_decompose(a, a, "-")
    mass_ok = all(len(lv.d_tau) * lv.tau <= n * n for lv in dec.levels)
    cap_ok = all(not len(lv.d_tau) or lv.tau <= n for lv in dec.levels)
    rows.append(CheckRow("dtau-mass", REL_LE, int(not mass_ok), 0, mass_ok, False, None,
                         "|D_tau| tau <= |A||B| on every level"))
    rows.append(CheckRow("tau-cap", REL_LE, int(not cap_ok), 0, cap_ok, False, None,
                         "tau <= min(|A|,|B|) on nonempty levels"))
    rows.append(_le_row("dyadic-sum-bound", dec.e4, dec.sum_bound))
    rows.append(_le_row("dyadic-argmax-bound", dec.e4, dec.argmax_bound,
                        f"argmax tau = {dec.argmax_level.tau}, explicit log factor"))

    try:
        fact_ok = factorization_check(a, budget)
        rows.append(CheckRow("factorization", REL_EQ, int(not fact_ok), 0, fact_ok,
                             False, 1.0, "T = K K^T entrywise"))
    except BudgetExceededError as err:
        rows.append(_skip_row("factorization", REL_EQ, err))

    for k in (1, 2):
        try:
            res = pidentity_check(a, pop_plus.p, k, budget)
            rows.append(_le_row(f"pidentity-k{k}", res.lhs, res.rhs, "P popular in A+A"))
            if k == 2:
                if res.trace_combinatorial is not None:
                    rows.append(_eq_row("trace4-combinatorial", res.trace_matrix,
                                        res.trace_combinatorial))
                else:
                    rows.append(
                        CheckRow("trace4-combinatorial", REL_EQ, None, None, None, True,
                                 None, "skipped: quartic walk estimate over budget"))
        except BudgetExceededError as err:
            rows.append(_skip_row(f"pidentity-k{k}", REL_LE, err))

    try:
        el = eigen_lemma_check(a, a, pop_minus.p, 2, budget)
        rows.append(_le_row("eigen-lemma-k2", el.lhs, el.rhs, "B = A, P popular in A-A"))
    except BudgetExceededError as err:
        rows.append(_skip_row("eigen-lemma-k2", REL_LE, err))

    for sign, pop in (("-", pop_minus), ("+", pop_plus)):
        tag = "minus" if sign == "-" else "plus"
        try:
            sl = spectral_energy_lemma_check(a, pop.p, sign, budget)
            rows.append(_le_row(f"lemma-energy-s6-{tag}", sl.lhs, sl.rhs, "P popular"))
            if sign == "-":
                if sl.energy_p_direct is not None:
                    rows.append(_eq_row("energy-p-identity", sl.energy_p_direct,
                                        sl.energy_p_conv))
                else:
                    rows.append(CheckRow("energy-p-identity", REL_EQ, None, None, None,
                                         True, None, "skipped: quadruple sum over budget"))
        except BudgetExceededError as err:
            rows.append(_skip_row(f"lemma-energy-s6-{tag}", REL_LE, err))

    rows.extend(_main2_pipeline_rows(a, pop_plus, budget))

    if opts.with_ratio_rows:
        rows.extend(_ratio_rows(a, splus, sminus, d4_lb))
    return VerificationReport(instance_id, tuple(rows))


def _main2_pipeline_rows(a: GSet, pop_plus: PopularSet, budget: int) -> list[CheckRow]:
    """Exact steps of the small-energy/large-sumset pipeline: the popular
    convolution comparison, the dyadic split of r_{A+P}, and the Holder
    step, all with explicit constants."""
    rows: list[CheckRow] = []
    n = len(a)
    p_set = pop_plus.p
    ind_a = indicator(a)
    ind_p = indicator(p_set)
    r_plus = repr_fn(a, a, "+")
    est = conv_cost_estimate(ind_p, ind_p) + 2 * conv_cost_estimate(r_plus, ind_p)
    if est > budget:
        err = BudgetExceededError(est, budget, "main2 pipeline convolutions")
        return [
            _skip_row("inter2", REL_LE, err),
            _skip_row("dyadic-t", REL_LE, err),
            _skip_row("holder-t", REL_LE, err),
        ]
    e_p = moment(convolve(ind_p, ind_p, kind="diff"), 2)
    r3 = convolve(r_plus, ind_p, kind="sum")
    s_target = moment(r3, 2)
    # popularity constant 1/2 clears to the explicit factor 4
    rows.append(
        _le_row("inter2", e_p * n**4, 4 * len(sumset(a, a)) ** 2 * s_target,
                "E(P) |A|^4 <= 4 |A+A|^2 sum r_{A+A+P}^2")
    )
    r_ap = convolve(ind_a, ind_p, kind="sum")
    maxv = r_ap.max_value()
    bands: dict[int, list[int]] = {}
    delta = 1
    while delta <= maxv:
        bands[delta] = [x for x, v in r_ap.items() if delta <= v < 2 * delta]
        delta <<= 1
    bands = {d: xs for d, xs in bands.items() if xs}
    level_count = len(bands)
    band_rows = []
    band_est = sum(
        conv_cost_estimate(ind_a, indicator(GSet.from_elements(a.ctx, xs)))
        for xs in bands.values()
    )
    if band_est > budget:
        err = BudgetExceededError(band_est, budget, "dyadic bands of r_{A+P}")
        rows.append(_skip_row("dyadic-t", REL_LE, err))
        rows.append(_skip_row("holder-t", REL_LE, err))
        return rows
    best = None
    for delta, xs in bands.items():
        t_set = GSet.from_elements(a.ctx, xs)
        r_at = convolve(ind_a, indicator(t_set), kind="sum")
        s_j = moment(r_at, 2)
        key = (2 * delta) ** 2 * s_j
        if best is None or key > best[0]:
            best = (key, delta, t_set, r_at, s_j)
    if best is None:
        rows.append(CheckRow("dyadic-t", REL_LE, None, None, None, True, None,
                             "empty r_{A+P}: nothing to decompose"))
        return rows
    _, delta, t_set, r_at, s_j = best
    rows.append(
        _le_row("dyadic-t", s_target, level_count**2 * (2 * delta) ** 2 * s_j,
                f"Delta = {delta}, |T| = {len(t_set)}, explicit log^2 factor {level_count}^2")
    )
    rows.append(_le_row("t-mass", len(t_set) * delta, n * len(p_set)))
    rows.append(_le_row("t-fourth", len(t_set) * delta**4, moment(r_ap, 4)))
    rows.append(
        _le_row("holder-t", s_j**3, moment(r_at, 4) * (n * len(t_set)) ** 2,
                "cubed Holder on r_{A+T}")
    )
    return rows


def _ratio_rows(a: GSet, splus: GSet, sminus: GSet, d4_lb: Fraction) -> list[CheckRow]:
    """Empirical-ratio rows for every claim whose constant the source
    leaves implicit; these never carry pass/fail."""
    rows = []
    n = len(a)
    if n < 2:
        return rows
    lb = float(d4_lb)
    log_n = math.log(n)
    rows.append(_ratio_row(
        "ratio-cs4-plus", _pow_ratio(3 * math.log(len(splus)) + math.log(lb) - 4 * log_n),
        "|A+A|^3 d4_lb / |A|^4"))
    rows.append(_ratio_row(
        "ratio-cs4-minus", _pow_ratio(3 * math.log(len(sminus)) + math.log(lb) - 4 * log_n),
        "|A-A|^3 d4_lb / |A|^4"))
    rows.append(_ratio_row(
        "ratio-prop-diff",
        _pow_ratio(math.log(len(sminus)) + (4 / 11) * math.log(lb) - (15 / 11) * log_n),
        "|A-A| d4_lb^(4/11) / |A|^(15/11)"))
    for tag, s in (("plus", splus), ("minus", sminus)):
        rows.append(_ratio_row(
            f"ratio-main2-{tag}",
            _pow_ratio(math.log(len(s)) + (13 / 35) * math.log(lb) - (48 / 35) * log_n),
            f"|A{tag[0]}A| d4_lb^(13/35) / |A|^(48/35)"))
    if a.ctx.is_residues and a.ctx.prime:
        aa = prodset(a, a)
        rows.append(_ratio_row(
            "ratio-rrs", (len(splus) + len(aa)) / n ** (6 / 5),
            "(|A+A| + |AA|) / |A|^(6/5)"))
        for tag, s in (("plus", splus), ("minus", sminus)):
            rows.append(_ratio_row(
                f"ratio-main-{tag}",
                _pow_ratio(35 * math.log(len(s)) + 26 * math.log(len(aa)) - 74 * log_n),
                "|A+-A|^35 |AA|^26 / |A|^74"))
        in_range = "in-theorem-range" if n**5 <= a.ctx.modulus**3 else "out-of-range"
        rows.append(_ratio_row(
            "ratio-energyreduction",
            _pow_ratio(math.log(lb) + 2 * log_n - 2 * math.log(len(aa))),
            f"d4_lb |A|^2 / |AA|^2 ({in_range})"))
    return rows


def verify_batch(
    instances: Sequence[tuple[str, GSet]],
    options: VerifyOptions | None = None,
    jobs: int = 1,
) -> list[VerificationReport]:
    """Verify many instances; results come back in input order no matter
    the degree of parallelism."""
    if jobs <= 1:
        return [verify_all(g, iid, options) for iid, g in instances]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(verify_all, g, iid, options) for iid, g in instances]
        return [f.result() for f in futures]


# --- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    family: str
    params: str
    seed: int
    p: int | None
    size: int
    sum_size: int
    diff_size: int
    prod_size: int
    e2: int
    e4: int
    d4_lb: Fraction
    exponent: float | None
    in_range: bool | None
    ratios: dict = field(compare=False)

    def __post_init__(self):
        if self.exponent is not None and self.exponent < 1.0:
            raise AssertionError("sum-product exponent fell below 1")


def _sweep_one(spec: FamilySpec, ctx: GroupCtx) -> SweepRow:
    a = generate(spec, ctx)
    n = len(a)
    splus = sumset(a, a)
    sminus = diffset(a, a)
    aa = prodset(a, a)
    r = repr_fn(a, a, "-")
    e2 = moment(r, 2)
    e4 = moment(r, 4)
    d4 = d4_family_search(a).lower_bound
    exponent = None
    if n >= 2:
        exponent = math.log(len(splus) + len(aa)) / math.log(n)
    in_range = None
    if ctx.is_residues and ctx.prime:
        in_range = n**5 <= ctx.modulus**3
    lb = float(d4)
    ratios = {}
    if n >= 2:
        log_n = math.log(n)
        ratios = {
            "rrs": (len(splus) + len(aa)) / n ** (6 / 5),
            "main_plus": _pow_ratio(35 * math.log(len(splus)) + 26 * math.log(len(aa)) - 74 * log_n),
            "main_minus": _pow_ratio(35 * math.log(len(sminus)) + 26 * math.log(len(aa)) - 74 * log_n),
            "main2_plus": _pow_ratio(math.log(len(splus)) + (13 / 35) * math.log(lb) - (48 / 35) * log_n),
            "main2_minus": _pow_ratio(math.log(len(sminus)) + (13 / 35) * math.log(lb) - (48 / 35) * log_n),
            "prop_diff": _pow_ratio(math.log(len(sminus)) + (4 / 11) * math.log(lb) - (15 / 11) * log_n),
            "energyreduction": _pow_ratio(math.log(lb) + 2 * log_n - 2 * math.log(len(aa))),
        }
    return SweepRow(
        family=spec.family,
        params=spec.describe(),
        seed=spec.seed,
        p=ctx.modulus if ctx.is_residues else None,
        size=n,
        sum_size=len(splus),
        diff_size=len(sminus),
        prod_size=len(aa),
        e2=e2,
        e4=e4,
        d4_lb=d4,
        exponent=exponent,
        in_range=in_range,
        ratios=ratios,
    )


def _divisors(n: int) -> list[int]:
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def sweep(
    families: Sequence[str],
    sizes: Sequence[int],
    primes: Sequence[int] = (),
    seed: int = 0,
    jobs: int = 1,
) -> list[SweepRow]:
    """Deterministic family sweep.

    Field families (mult_subgroup, ap, geometric) run once per given
    prime; mult_subgroup orders are the divisors of p-1 drawn from the
    size grid.  Integer families (sidon_greedy, random_interval,
    ap_plus_generic) ignore the primes.  Sets of size < 2 are dropped
    (no exponent is defined there).
    """
    tasks: list[tuple[FamilySpec, GroupCtx]] = []
    ctx_z = GroupCtx.integers()
    for fam in families:
        if fam == "mult_subgroup":
            for p in primes:
                ctx = GroupCtx.residues(p)
                for order in _divisors(p - 1):
                    if order in sizes and order >= 2:
                        tasks.append((FamilySpec(fam, {"order": order}, seed), ctx))
        elif fam in ("ap", "geometric"):
            for p in primes:
                ctx = GroupCtx.residues(p)
                for n in sizes:
                    if 2 <= n < p:
                        params = {"n": n} if fam == "geometric" else {"start": 1, "step": 1, "n": n}
                        tasks.append((FamilySpec(fam, params, seed), ctx))
            if not primes and fam == "ap":
                for n in sizes:
                    if n >= 2:
                        tasks.append((FamilySpec(fam, {"start": 1, "step": 1, "n": n}, seed), ctx_z))
        elif fam in ("sidon_greedy",):
            for n in sizes:
                if n >= 2:
                    tasks.append((FamilySpec(fam, {"n": n}, seed), ctx_z))
        elif fam == "random_interval":
            for n in sizes:
                if n >= 4:
                    tasks.append((FamilySpec(fam, {"n": 2 * n, "prob": 0.5}, seed), ctx_z))
        elif fam == "ap_plus_generic":
            for n in sizes:
                if n >= 2:
                    tasks.append((FamilySpec(fam, {"n": n}, seed), ctx_z))
        else:
            raise ParameterError(f"unknown sweep family {fam!r}")
    if jobs <= 1:
        return [_sweep_one(spec, ctx) for spec, ctx in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_sweep_one, spec, ctx) for spec, ctx in tasks]
        return [f.result() for f in futures]


# --- CSV ---------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return repr(v)
    return str(v)


REPORT_COLUMNS = (
    "schema_version", "instance_id", "check", "relation",
    "lhs", "rhs", "passed", "skipped", "empirical_ratio", "notes",
)


def write_report_csv(reports: Iterable[VerificationReport], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for rep in reports:
            for r in rep.rows:
                w.writerow([
                    SCHEMA_VERSION, rep.instance_id, r.name, r.relation,
                    _fmt(r.lhs), _fmt(r.rhs), _fmt(r.passed), _fmt(r.skipped),
                    _fmt(r.empirical_ratio), r.notes,
                ])


_SWEEP_RATIO_KEYS = (
    "rrs", "main_plus", "main_minus", "main2_plus", "main2_minus",
    "prop_diff", "energyreduction",
)

SWEEP_COLUMNS = (
    "schema_version", "family", "params", "seed", "p", "size",
    "sum_size", "diff_size", "prod_size", "e2", "e4", "d4_lb",
    "exponent", "in_range",
) + tuple(f"ratio_{k}" for k in _SWEEP_RATIO_KEYS)


def write_sweep_csv(rows: Iterable[SweepRow], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([
                SCHEMA_VERSION, r.family, r.params, r.seed, _fmt(r.p), r.size,
                r.sum_size, r.diff_size, r.prod_size, r.e2, r.e4, _fmt(r.d4_lb),
                _fmt(r.exponent), _fmt(r.in_range),
            ] + [_fmt(r.ratios.get(k)) for k in _SWEEP_RATIO_KEYS])
