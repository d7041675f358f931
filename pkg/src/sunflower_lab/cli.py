"""Command-line experiment harness.

Exit codes: 0 success, 1 search came back negative, 2 bad input, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .core import InputError, ResourceBudgetError, SetSystem, is_non_trivial
from .evaluation import monte_carlo_satisfaction, satisfaction_probability
from .families import (
    BlockFamilySpec,
    IntersectingBlockSpec,
    block_family,
    complete_uniform_family,
    family_from_spec,
    intersecting_block_family,
    is_alpha_large,
    random_family,
    random_family_without_disjoint,
    random_intersecting_family,
    subspace_family,
    subspace_regularity_check,
    subspace_spec_from_dict,
    zero_free_vector,
)
from .process import analyze_star, build_star, intersecting_unions, run_extraction
from .regular import WeightedFamily, certify_family, format_rational, max_regularity, parse_rational
from .sunflower import (
    erdos_rado_extract,
    find_disjoint,
    find_sunflower_exact,
    is_intersecting,
    regularity_guided_extract,
    sunflower_from_approx,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class _Negative(Exception):
    """Carries a payload that should still be printed before exiting with 1."""

    def __init__(self, payload: dict):
        super().__init__("negative")
        self.payload = payload


def derived_seed(seed: int, index: int) -> int:
    digest = hashlib.sha256(f"{seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _read_json(source: str):
    """A path to a JSON file, or an inline JSON document."""
    text = source
    if not source.lstrip().startswith(("{", "[")):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {source}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {source}: {exc}") from None


def _load_family(source: str) -> SetSystem:
    return SetSystem.from_dict(_read_json(source))


def _require_non_trivial(F: SetSystem) -> None:
    if not is_non_trivial(F):
        raise InputError("family is trivial (empty or contains the empty set)")


# -- subcommands -----------------------------------------------------------

def cmd_generate(args) -> dict:
    spec = _read_json(args.spec)
    if not isinstance(spec, dict):
        raise InputError("family spec must be a JSON object")
    return family_from_spec(spec).to_dict()


def cmd_certify(args) -> dict:
    F = _load_family(args.family)
    _require_non_trivial(F)
    if args.max:
        interval = max_regularity(F, args.tol, args.budget_pivots)
        return {"mode": "max", "tol": format_rational(parse_rational(args.tol)), "interval": interval.to_dict()}
    if args.kappa is None:
        raise InputError("certify needs --kappa or --max")
    return certify_family(F, args.kappa, args.budget_pivots).to_dict()


def cmd_satprob(args) -> dict:
    F = _load_family(args.family)
    p = parse_rational(args.p)
    out = {"p": format_rational(p)}
    if args.mc:
        est = monte_carlo_satisfaction(F, p, args.mc, args.seed)
        out["monte_carlo"] = {"estimate": est.estimate, "stderr": est.stderr,
                              "trials": est.trials, "hits": est.hits, "seed": args.seed}
    else:
        prob = satisfaction_probability(F, p)
        out.update(probability=format_rational(prob), probability_float=float(prob))
    return out


def cmd_sunflower(args) -> dict:
    F = _load_family(args.family)
    method = args.method
    if method == "er":
        report = erdos_rado_extract(F, args.r)
        out = {"method": method, **report.to_dict()}
        found = report.found
    elif method == "reg":
        if args.kappa is None:
            raise InputError("--method reg needs --kappa")
        report = regularity_guided_extract(F, args.r, args.kappa)
        out = {"method": method, **report.to_dict()}
        found = report.found
    elif method == "color":
        cert = sunflower_from_approx(F, args.r, seed=args.seed)
        found = cert is not None
        out = {"method": method, "outcome": "found" if found else "not_found"}
        if found:
            out["certificate"] = cert.to_dict()
    else:
        cert = find_sunflower_exact(F, args.r)
        found = cert is not None
        out = {"method": method, "outcome": "found" if found else "none"}
        if found:
            out["certificate"] = cert.to_dict()
    if not found:
        raise _Negative(out)
    return out


def cmd_disjoint(args) -> dict:
    F = _load_family(args.family)
    hit = find_disjoint(F, args.r, args.mode)
    out = {"r": args.r, "mode": args.mode, "indices": hit}
    if hit is None:
        raise _Negative(out)
    return out


def cmd_process(args) -> dict:
    F = _load_family(args.family)
    if args.dist:
        D = WeightedFamily.from_dict(_read_json(args.dist))
        if D.family != F:
            raise InputError("distribution sets differ from the family")
    else:
        D = WeightedFamily.uniform(F)
    trace = run_extraction(F, D, args.r)
    if args.csv:
        Path(args.csv).write_text(trace.to_csv())
    out = {"trace": trace.to_dict(), "star": None, "unions_intersect": intersecting_unions(trace)}
    if trace.iterations:
        star = build_star(trace)
        out["star"] = star.to_dict()
        if args.beta is not None:
            out["analysis"] = analyze_star(star, D, trace, args.beta).to_dict()
    return out


def cmd_subspace(args) -> dict:
    spec = subspace_spec_from_dict(_read_json(args.spec))
    alpha = parse_rational(args.alpha)
    large = is_alpha_large(spec, alpha)
    reg = subspace_regularity_check(spec, alpha)
    vec = zero_free_vector(spec)
    return {
        "p": spec.p, "n": spec.n, "k": spec.k,
        "alpha": format_rational(alpha),
        "family_size": len(subspace_family(spec)),
        "alpha_large": large.holds,
        "largeness_witness": list(large.witness) if large.witness is not None else None,
        "regular": reg.holds,
        "regularity_witness": list(reg.witness) if reg.witness is not None else None,
        "zero_free_vector": list(vec) if vec is not None else None,
    }


# -- sweeps ----------------------------------------------------------------

@dataclass
class ExperimentRecord:
    """One sweep row: reproducible from (what, w, r, seeds, tol)."""

    experiment_id: str
    params: dict
    seed: int
    corpus_size: int
    best_lower: Fraction | None
    best_source: str | None
    upper_cap: Fraction | None
    members: list = field(default_factory=list)
    seconds: float = 0.0

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "experiment_id": self.experiment_id,
            "params": self.params,
            "seed": self.seed,
            "corpus_size": self.corpus_size,
            "best_lower_kappa": format_rational(self.best_lower) if self.best_lower is not None else None,
            "best_source": self.best_source,
            "upper_cap": format_rational(self.upper_cap) if self.upper_cap is not None else None,
            "members": self.members,
        }
        if timing:
            d["seconds"] = round(self.seconds, 3)
        return d


def _sweep_corpus(what: str, w: int, r: int, seeds: list[int]) -> list[tuple[str, SetSystem, list[Fraction]]]:
    """(name, family, exact kappa values to certify directly) before filtering."""
    items: list[tuple[str, SetSystem, list[Fraction]]] = []
    if what == "beta":
        items.append((f"complete_uniform(w={w},n={2 * w - 1})", complete_uniform_family(w, 2 * w - 1),
                      [Fraction(2 * w - 1, w)]))
        for t in range(2, (w + 1) // 2 + 1):
            items.append((f"intersecting_block(w={w},t={t})", intersecting_block_family(IntersectingBlockSpec(w, t)), []))
        for s in seeds:
            items.append((f"random_intersecting(seed={s})",
                          random_intersecting_family(2 * w, w, 3 * w, derived_seed(s, w), min_size=2), []))
    elif what == "gamma":
        for kappa in range(1, 4):
            if kappa**w <= 256:
                items.append((f"block(w={w},kappa={kappa})", block_family(BlockFamilySpec(w, kappa)), [Fraction(kappa)]))
        for s in seeds:
            items.append((f"random(seed={s})", random_family(2 * w, w, 2 * w, derived_seed(s, w)), []))
    elif what == "alpha":
        for s in seeds:
            items.append((f"no_{r}_disjoint(seed={s})",
                          random_family_without_disjoint(2 * w, w, 3 * w, r, derived_seed(s, w)), []))
    else:
        raise InputError(f"unknown sweep {what!r}")
    return items


def _qualifies(what: str, F: SetSystem, r: int) -> bool:
    if len(F) == 0 or not is_non_trivial(F):
        return False
    if what == "beta":
        return is_intersecting(F)
    if what == "gamma":
        return satisfaction_probability(F, Fraction(1, 2)) <= Fraction(1, 2)
    return find_disjoint(F, r) is None


def _sweep_one(job: tuple) -> ExperimentRecord:
    what, w, r, seeds, tol, budget = job
    start = time.perf_counter()
    best, source, members = None, None, []
    corpus = [item for item in _sweep_corpus(what, w, r, seeds) if _qualifies(what, item[1], r)]
    for name, F, exact_points in corpus:
        lower = max_regularity(F, tol, budget).lo
        for kappa in exact_points:
            if kappa > lower and certify_family(F, kappa, budget).regular:
                lower = kappa
        entry = {"name": name, "size": len(F), "lower_kappa": format_rational(lower)}
        if what == "gamma":
            entry["satisfaction_half"] = format_rational(satisfaction_probability(F, Fraction(1, 2)))
        members.append(entry)
        if best is None or lower > best:
            best, source = lower, name
    cap = {"beta": Fraction(w), "alpha": Fraction((r - 1) * w), "gamma": None}[what]
    return ExperimentRecord(
        experiment_id=f"{what}-w{w}-r{r}",
        params={"what": what, "w": w, "r": r, "tol": format_rational(tol), "seeds": list(seeds)},
        seed=seeds[0] if seeds else 0,
        corpus_size=len(corpus),
        best_lower=best,
        best_source=source,
        upper_cap=cap,
        members=members,
        seconds=time.perf_counter() - start,
    )


def run_sweep(what: str, ws: list[int], r: int, seeds: list[int], tol, budget=None, threads: int = 1) -> list[ExperimentRecord]:
    tol = parse_rational(tol)
    jobs = [(what, w, r, seeds, tol, budget) for w in ws]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_sweep_one, jobs))  # map keeps job order
    return [_sweep_one(j) for j in jobs]


SWEEP_COLUMNS = ["w", "r", "corpus_size", "best_lower_kappa", "best_lower_kappa_float",
                 "upper_cap", "upper_cap_float", "seconds"]


def sweep_csv(records: list[ExperimentRecord], timing: bool = False) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(SWEEP_COLUMNS)
    for rec in records:
        lo, cap = rec.best_lower, rec.upper_cap
        out.writerow([
            rec.params["w"], rec.params["r"], rec.corpus_size,
            format_rational(lo) if lo is not None else "",
            f"{float(lo):.9g}" if lo is not None else "",
            format_rational(cap) if cap is not None else "",
            f"{float(cap):.9g}" if cap is not None else "",
            f"{rec.seconds:.3f}" if timing else "",
        ])
    return buf.getvalue()


def _parse_range(text: str) -> list[int]:
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise InputError(f"bad range {text!r}; use a..b or a,b,c") from None


def cmd_sweep(args) -> str:
    ws = _parse_range(args.w_range)
    if not ws or min(ws) < 1:
        raise InputError("widths must be positive")
    if args.r < 2:
        raise InputError("r must be at least 2")
    seeds = _parse_range(args.seeds)
    records = run_sweep(args.what, ws, args.r, seeds, args.tol, args.budget_pivots, args.threads)
    if args.json:
        Path(args.json).write_text(dumps([rec.to_dict(args.timing) for rec in records]))
    return sweep_csv(records, args.timing)


# -- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sunflower-lab", description="Regularity and sunflower experiments on small set systems.")
    ap.add_argument("--seed", type=int, default=0, help="base seed for randomised steps")
    ap.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    ap.add_argument("--budget-pivots", type=int, default=None, help="abort any LP exceeding this many pivots")
    ap.add_argument("--out", default=None, help="write output here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build a family from a JSON spec")
    p.add_argument("spec", help="spec file or inline JSON")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("certify", help="certify kappa-regularity or bracket the best kappa")
    p.add_argument("family")
    p.add_argument("--kappa")
    p.add_argument("--max", action="store_true")
    p.add_argument("--tol", default="1/1000")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("satprob", help="p-biased satisfaction probability")
    p.add_argument("family")
    p.add_argument("--p", required=True)
    p.add_argument("--mc", type=int, default=0, help="Monte Carlo trials instead of the exact value")
    p.set_defaults(func=cmd_satprob)

    p = sub.add_parser("sunflower", help="search for an r-sunflower")
    p.add_argument("family")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--method", choices=["er", "reg", "color", "exact"], default="exact")
    p.add_argument("--kappa")
    p.set_defaults(func=cmd_sunflower)

    p = sub.add_parser("disjoint", help="search for r pairwise disjoint sets")
    p.add_argument("family")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--mode", choices=["exact", "greedy"], default="exact")
    p.set_defaults(func=cmd_disjoint)

    p = sub.add_parser("process", help="run the disjoint-tuple peeling process")
    p.add_argument("family")
    p.add_argument("dist", nargs="?", help="weighted family JSON; uniform if omitted")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--beta")
    p.add_argument("--csv", help="also write the per-iteration CSV here")
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("subspace", help="largeness, zero-free vector and regularity of a subspace family")
    p.add_argument("spec")
    p.add_argument("--alpha", required=True)
    p.set_defaults(func=cmd_subspace)

    p = sub.add_parser("sweep", help="bracket regularity suprema over generated corpora")
    p.add_argument("--what", choices=["beta", "gamma", "alpha"], required=True)
    p.add_argument("--w-range", default="2..4")
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--seeds", default="0..4")
    p.add_argument("--tol", default="1/100")
    p.add_argument("--timing", action="store_true", help="fill the seconds column (breaks byte-identity)")
    p.add_argument("--json", help="also write full experiment records here")
    p.set_defaults(func=cmd_sweep)
    return ap


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except _Negative as neg:
        _emit(dumps(neg.payload), args.out)
        return EXIT_NEGATIVE
    except (InputError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceBudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    _emit(result if isinstance(result, str) else dumps(result), args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
