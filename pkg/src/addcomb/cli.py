"""Command-line front end: gen | energy | d4 | spectrum | incidence | verify | sweep.

Artifacts are JSON (sets, d4 witnesses, matrices) and versioned CSV;
``--plot`` renders a figure next to the delimited output.  Exit codes:
0 success, 1 a pass/fail check failed, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from .config import DEFAULT_BUDGET, DEFAULT_EIG_TOL, MIN_BUDGET, SCHEMA_VERSION
from .errors import AddcombError
from .groups import (
    GSet,
    GroupCtx,
    dump_set,
    load_set,
    set_to_json,
)
from .convolution import repr_fn
from .energies import energy
from .structure import d4_exact_small, d4_family_search, popular_set
from .operators import build_t_matrix, spectrum_of
from .incidence import (
    LineSet,
    count_incidences,
    count_incidences_oracle,
    energyreduction_chain,
    make_instance,
)
from .families import FAMILY_NAMES, FamilySpec, generate
from .harness import (
    VerifyOptions,
    sweep,
    verify_all,
    write_report_csv,
    write_sweep_csv,
)


@dataclass
class RunConfig:
    """Validated run parameters shared by the subcommands."""

    subcommand: str
    budget: int
    seed: int = 0
    jobs: int = 1
    tolerance: float = DEFAULT_EIG_TOL
    out: str | None = None
    oracle: bool = False

    def __post_init__(self):
        if self.budget < MIN_BUDGET:
            raise AddcombError(f"budget must be at least {MIN_BUDGET}, got {self.budget}")
        if self.jobs < 1:
            raise AddcombError(f"jobs must be >= 1, got {self.jobs}")


def _default_budget() -> int:
    env = os.environ.get("ADDCOMB_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise AddcombError(f"ADDCOMB_BUDGET must be an integer, got {env!r}")
    return DEFAULT_BUDGET


def _parse_prob(text: str) -> float:
    if "/" in text:
        frac = Fraction(text)
        return frac.numerator / frac.denominator
    return float(text)


def _family_params(args) -> dict:
    params = {}
    for key in ("n", "start", "step", "first", "ratio", "order", "m"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if getattr(args, "prob", None) is not None:
        params["prob"] = _parse_prob(args.prob)
    return params


def _generate_from_args(args) -> GSet:
    ctx = GroupCtx.residues(args.p) if getattr(args, "p", None) else GroupCtx.integers()
    spec = FamilySpec(args.family, _family_params(args), args.seed)
    return generate(spec, ctx)


def _emit_json(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _add_family_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=FAMILY_NAMES, help="instance family to generate")
    p.add_argument("--n", type=int, help="block length / set size parameter")
    p.add_argument("--start", type=int, help="progression start")
    p.add_argument("--step", type=int, help="progression step")
    p.add_argument("--first", type=int, help="geometric first term")
    p.add_argument("--ratio", type=int, help="geometric ratio")
    p.add_argument("--order", type=int, help="multiplicative subgroup order")
    p.add_argument("--m", type=int, help="generic block size override")
    p.add_argument("--prob", help="keep probability (float or a/b)")
    p.add_argument("--p", type=int, help="residue modulus (omit for the integers)")
    p.add_argument("--seed", type=int, default=0, help="generator seed")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="addcomb", description=__doc__)
    top.add_argument("--budget", type=int, default=None,
                     help=f"step budget for heavy checks (default {DEFAULT_BUDGET}, env ADDCOMB_BUDGET)")
    sub = top.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a family instance as a JSON set")
    _add_family_flags(g)
    g.add_argument("--out", help="output path (default stdout)")

    e = sub.add_parser("energy", help="exact additive energies of a set (pair)")
    e.add_argument("--input", required=True, help="set JSON path")
    e.add_argument("--b", help="optional second set JSON path")
    e.add_argument("--k", default="2,4", help="comma list of energy orders")
    e.add_argument("--out", help="CSV output path")

    d = sub.add_parser("d4", help="fourth-moment density lower bound with witness")
    d.add_argument("--input", required=True, help="set JSON path")
    d.add_argument("--exact-universe", help="exhaustive search over this set JSON (<= 20 elements)")
    d.add_argument("--out", help="JSON output path (default stdout)")

    s = sub.add_parser("spectrum", help="eigenvalues of a convolution operator matrix")
    s.add_argument("--input", required=True, help="set JSON path")
    s.add_argument("--matrix", choices=("difference", "sum-popular"), default="difference",
                   help="difference: weight r_{A-A}; sum-popular: 0/1 weight of the popular sumset part")
    s.add_argument("--tolerance", type=float, default=DEFAULT_EIG_TOL)
    s.add_argument("--out", help="CSV output path for the eigenvalues")
    s.add_argument("--matrix-json", help="dense matrix export path")
    s.add_argument("--plot", help="PNG chart path")

    i = sub.add_parser("incidence", help="exact point-line incidence counts over F_p")
    i.add_argument("--p", type=int, required=True, help="prime modulus")
    i.add_argument("--set-a", required=True, help="abscissa set JSON path")
    i.add_argument("--set-b", required=True, help="ordinate set JSON path")
    i.add_argument("--lines-from", choices=("pairs", "file"), default="pairs",
                   help="pairs: lines y = s x + t over A x B; file: JSON line list")
    i.add_argument("--lines-file", help="JSON path for --lines-from file")
    i.add_argument("--oracle", action="store_true",
                   help="cross-check the fast count against the triple loop")
    i.add_argument("--chain", action="store_true",
                   help="run the dyadic-level incidence chain for (A, B) instead")
    i.add_argument("--out", help="CSV output path")

    v = sub.add_parser("verify", help="run the full identity/inequality report")
    v.add_argument("--input", help="set JSON path")
    _add_family_flags(v)
    v.add_argument("--out", help="report CSV path")
    v.add_argument("--jobs", type=int, default=1)

    w = sub.add_parser("sweep", help="family sweep with exponents and ratio columns")
    w.add_argument("--family", action="append", required=True, choices=tuple(FAMILY_NAMES),
                   help="repeatable")
    w.add_argument("--sizes", default="4,8,16,32,64", help="comma list of sizes/orders")
    w.add_argument("--p", help="comma list of primes for field families")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--out", default="sweep.csv", help="CSV output path")
    w.add_argument("--plot", help="PNG chart path rendered next to the CSV")
    return top


def _cmd_gen(args, cfg: RunConfig) -> int:
    if not args.family:
        raise AddcombError("gen needs --family")
    a = _generate_from_args(args)
    _emit_json(set_to_json(a), args.out)
    return 0


def _cmd_energy(args, cfg: RunConfig) -> int:
    a = load_set(args.input)
    b = load_set(args.b) if args.b else None
    orders = [int(k) for k in args.k.split(",") if k]
    name = os.path.splitext(os.path.basename(args.input))[0]
    rows = []
    for k in orders:
        val = energy(a, b, k)
        rows.append((name, f"E{k}" + ("" if b is None else "_cross"), k, val))
        print(f"E_{k}{'(A,B)' if b is not None else '(A)'} = {val}")
    if args.out:
        import csv

        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(("schema_version", "instance_id", "name", "k", "value"))
            for r in rows:
                wr.writerow((SCHEMA_VERSION,) + r)
    return 0


def _cmd_d4(args, cfg: RunConfig) -> int:
    a = load_set(args.input)
    if args.exact_universe:
        est = d4_exact_small(a, load_set(args.exact_universe), cfg.budget)
    else:
        est = d4_family_search(a, budget=cfg.budget)
    lb = est.lower_bound
    _emit_json(
        {
            "ratio": f"{lb.numerator}/{lb.denominator}",
            "ratio_float": float(lb),
            "witness": set_to_json(est.witness),
            "exact": est.exact,
            "method": est.method,
        },
        args.out,
    )
    return 0


def _cmd_spectrum(args, cfg: RunConfig) -> int:
    a = load_set(args.input)
    if args.matrix == "difference":
        mat = build_t_matrix(a, repr_fn(a, a, "-"), "difference")
        title = "difference operator, weight r_{A-A}"
    else:
        pop = popular_set(a, "+")
        from .convolution import indicator

        mat = build_t_matrix(a, indicator(pop.p), "sum")
        title = "sum operator, popular-part indicator weight"
    spec = spectrum_of(mat, args.tolerance)
    for mu in spec.eigenvalues:
        print(repr(mu))
    print(f"# residual {spec.residual!r}", file=sys.stderr)
    if args.out:
        import csv

        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(("schema_version", "rank", "eigenvalue"))
            for idx, mu in enumerate(spec.eigenvalues, 1):
                wr.writerow((SCHEMA_VERSION, idx, repr(mu)))
    if args.matrix_json:
        _emit_json({"index_set": set_to_json(mat.index_set), "entries": mat.to_lists()},
                   args.matrix_json)
    if args.plot:
        from .plotting import save_spectrum_plot

        save_spectrum_plot(spec.eigenvalues, args.plot, title)
    return 0


def _load_lines(args, ctx: GroupCtx, a: GSet, b: GSet) -> LineSet:
    if args.lines_from == "pairs":
        pairs = [(s, t) for s in a.elements for t in b.elements]
        return LineSet.from_pairs(ctx, pairs)
    if not args.lines_file:
        raise AddcombError("--lines-from file needs --lines-file")
    with open(args.lines_file, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    pairs, verts = [], []
    for item in doc:
        if "vertical" in item:
            verts.append(int(item["vertical"]))
        else:
            pairs.append((int(item["slope"]), int(item["intercept"])))
    return LineSet.from_pairs(ctx, pairs, verts)


def _cmd_incidence(args, cfg: RunConfig) -> int:
    a = load_set(args.set_a)
    b = load_set(args.set_b)
    ctx = a.ctx
    if not (ctx.is_residues and ctx.modulus == args.p) or b.ctx != ctx:
        raise AddcombError(f"both sets must live in residues mod {args.p}")
    import csv

    if args.chain:
        chain = energyreduction_chain(a, b, cfg.budget)
        ok = chain.all_exact_steps_ok and chain.sz_ok
        print(
            f"p={chain.p} tau={chain.tau} |D_tau|={chain.level_size} |AA|={chain.aa_size} "
            f"tuple_incidences={chain.tuple_incidences} dedup={chain.dedup_incidences} "
            f"dominant={chain.dominant_term} steps_ok={chain.all_exact_steps_ok} sz_ok={chain.sz_ok}"
        )
        if args.out:
            with open(args.out, "w", newline="", encoding="utf-8") as fh:
                wr = csv.writer(fh, lineterminator="\n")
                wr.writerow((
                    "schema_version", "p", "size_a", "size_b", "zero_stripped", "tau",
                    "level_size", "aa_size", "mass_on_level", "tuple_lines", "distinct_lines",
                    "tuple_incidences", "dedup_incidences", "solution_step_ok", "level_step_ok",
                    "sz_main", "sz_lines", "sz_points", "sz_pterm", "dominant_term",
                    "sz_ok", "enough_ratio", "aa_small_case",
                ))
                wr.writerow((
                    SCHEMA_VERSION, chain.p, chain.size_a, chain.size_b,
                    str(chain.zero_stripped).lower(), chain.tau, chain.level_size,
                    chain.aa_size, chain.mass_on_level, chain.tuple_lines,
                    chain.distinct_lines, chain.tuple_incidences, chain.dedup_incidences,
                    str(chain.solution_step_ok).lower(), str(chain.level_step_ok).lower(),
                    *(repr(t) for t in chain.terms), chain.dominant_term,
                    str(chain.sz_ok).lower(), repr(float(chain.enough_ratio)),
                    str(chain.aa_small_case).lower(),
                ))
        return 0 if ok else 1
    lines = _load_lines(args, ctx, a, b)
    inst = make_instance(a, b, lines)
    if args.oracle:
        oracle = count_incidences_oracle(a, b, lines, cfg.budget)
        if oracle != inst.count:
            print(f"oracle mismatch: fast {inst.count} vs triple loop {oracle}", file=sys.stderr)
            return 1
    print(f"count={inst.count} bound={inst.bound!r} dominant={inst.dominant_term}")
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(("schema_version", "p", "size_a", "size_b", "size_l", "count",
                         "sz_main", "sz_lines", "sz_points", "sz_pterm", "dominant_term"))
            wr.writerow((SCHEMA_VERSION, inst.p, inst.size_a, inst.size_b, inst.size_l,
                         inst.count, *(repr(t) for t in inst.terms), inst.dominant_term))
    return 0


def _cmd_verify(args, cfg: RunConfig) -> int:
    if bool(args.input) == bool(args.family):
        raise AddcombError("verify needs exactly one input source: --input or --family")
    if args.input:
        a = load_set(args.input)
        iid = os.path.splitext(os.path.basename(args.input))[0]
    else:
        a = _generate_from_args(args)
        iid = FamilySpec(args.family, _family_params(args), args.seed).describe()
    rep = verify_all(a, iid, VerifyOptions(budget=cfg.budget))
    for row in rep.skipped:
        print(f"skipped: {row.name} ({row.notes})", file=sys.stderr)
    for row in rep.failed:
        print(f"FAILED: {row.name}: {row.lhs} vs {row.rhs}", file=sys.stderr)
    if args.out:
        write_report_csv([rep], args.out)
    decided = sum(1 for r in rep.rows if r.passed is not None)
    print(f"{iid}: {decided} checks decided, {len(rep.failed)} failed, "
          f"{len(rep.skipped)} skipped")
    return 0 if rep.all_passed else 1


def _cmd_sweep(args, cfg: RunConfig) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    primes = [int(p) for p in args.p.split(",")] if args.p else []
    rows = sweep(args.family, sizes, primes, seed=args.seed, jobs=args.jobs)
    write_sweep_csv(rows, args.out)
    print(f"wrote {len(rows)} sweep rows to {args.out}")
    if args.plot:
        from .plotting import save_sweep_plot

        save_sweep_plot(rows, args.plot)
        print(f"wrote chart to {args.plot}")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "energy": _cmd_energy,
    "d4": _cmd_d4,
    "spectrum": _cmd_spectrum,
    "incidence": _cmd_incidence,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        cfg = RunConfig(
            subcommand=args.cmd,
            budget=args.budget if args.budget is not None else _default_budget(),
            seed=getattr(args, "seed", 0),
            jobs=getattr(args, "jobs", 1),
            tolerance=getattr(args, "tolerance", DEFAULT_EIG_TOL),
            out=getattr(args, "out", None),
            oracle=getattr(args, "oracle", False),
        )
        return _COMMANDS[args.cmd](args, cfg)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except json.JSONDecodeError as exc:
        print(f"I/O error: malformed JSON: {exc}", file=sys.stderr)
        return 3
    except AddcombError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
