"""``fairmatch`` command line.

Exit status: 0 success, 1 verification failure, 2 bad input or arguments,
3 out of memory.
Randomised commands take ``--seed``; without it the seed comes from system
entropy and is echoed on stderr so a run can be repeated.
"""

from __future__ import annotations

import argparse
import logging
import random
import resource
import sys
import time
from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path

from .baselines import SizeLimitError, probabilistic_serial, rp_probabilities
from .decomposition import DecompositionFormatError, format_decomposition, parse_decomposition
from .distribution import (DistributionFormatError, coverage, format_coverage, parse_distribution,
                           sample_product, serialize_distribution)
from .graph import BipartiteGraph, GraphFormatError, erdos_renyi, load_edge_list
from .metrics import DEFAULT_P, DEFAULT_T, format_metrics, metrics_report
from .oracle import OracleSizeError, brute_force_blocks
from .pipeline import FairSolution, solve, verify_against_graph

log = logging.getLogger("fairmatch")

MECHANISMS = ("mf", "ps", "rp-exhaustive", "rp-mc:T")


class InputError(Exception):
    """Bad arguments or unreadable input; exit status 2."""


def _read_graph(path: str) -> BipartiteGraph:
    try:
        with open(path) as fh:
            return load_edge_list(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except GraphFormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def _rng(seed: int | None) -> random.Random:
    if seed is None:
        seed = random.SystemRandom().randrange(2**63)
        print(f"seed {seed}", file=sys.stderr)
    return random.Random(seed)


def _parse_mechanism(name: str) -> tuple[str, int]:
    if name in ("mf", "ps", "rp-exhaustive"):
        return name, 0
    if name.startswith("rp-mc:"):
        try:
            runs = int(name[6:])
        except ValueError:
            runs = 0
        if runs > 0:
            return "rp-mc", runs
    raise InputError(f"unknown mechanism {name!r}; choose from {', '.join(MECHANISMS)}")


def mechanism_profile(sol: FairSolution, name: str, rng: random.Random | None = None) -> dict[int, Fraction]:
    """Profile of one mechanism over the users of the reduced instance, in original ids."""
    kind, runs = _parse_mechanism(name)
    work = sol.working_graph
    if kind == "mf":
        local = sol.local.probability
    elif kind == "ps":
        local = probabilistic_serial(work).profile
    elif kind == "rp-exhaustive":
        try:
            local = rp_probabilities(work, "exhaustive")
        except SizeLimitError as exc:
            raise InputError(str(exc)) from None
    else:
        local = rp_probabilities(work, "monte_carlo", runs, rng if rng is not None else random.Random())
    return {int(sol.left_map[u]): q for u, q in local.items()}


def _all_users(sol: FairSolution, prof: dict[int, Fraction]) -> dict[int, Fraction]:
    full = dict.fromkeys(range(sol.graph.n_left), Fraction(0))
    full.update(prof)
    return full


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad {what} list {text!r}") from None


# --- commands ---------------------------------------------------------------

def cmd_decompose(args) -> tuple[int, str]:
    return 0, format_decomposition(solve(_read_graph(args.graph)).decomposition)


def cmd_probabilities(args) -> tuple[int, str]:
    sol = solve(_read_graph(args.graph))
    rng = _rng(args.seed) if args.mechanism.startswith("rp-mc") else None
    return 0, format_coverage(_all_users(sol, mechanism_profile(sol, args.mechanism, rng)))


def cmd_distribution(args) -> tuple[int, str]:
    return 0, serialize_distribution(solve(_read_graph(args.graph)).distribution)


def cmd_sample(args) -> tuple[int, str]:
    if args.n < 0:
        raise InputError("-n must be non-negative")
    sol = solve(_read_graph(args.graph))
    rng = _rng(args.seed)
    blocks = sol.block_distributions
    lines = []
    for i in range(args.n):
        lines.append(f"matching {i + 1}\n")
        lines.extend(f"{u + 1} {v + 1}\n" for u, v in sample_product(blocks, rng).pairs())
    return 0, "".join(lines)


def cmd_compare(args) -> tuple[int, str]:
    sol = solve(_read_graph(args.graph))
    names = [m.strip() for m in args.mechanisms.split(",") if m.strip()] if args.mechanisms else None
    if names is None:
        small = sol.working_graph.n_left <= 10
        names = ["mf", "ps", "rp-exhaustive" if small else "rp-mc:1000"]
    ps = _floats(args.p, "p")
    ts = _floats(args.t, "t")
    rng = _rng(args.seed) if any(n.startswith("rp-mc") for n in names) else None
    if sol.working_graph.n_left == 0:
        raise InputError("graph has no matchable user")
    reports = {}
    for name in names:
        prof = mechanism_profile(sol, name, rng)
        kind, runs = _parse_mechanism(name)
        floor = Fraction(1, runs) if kind == "rp-mc" else None
        try:
            reports[name] = metrics_report(prof, ps, ts, floor)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    return 0, format_metrics(reports)


def cmd_verify(args) -> tuple[int, str]:
    graph = _read_graph(args.graph)
    try:
        text = Path(args.claim).read_text()
    except OSError as exc:
        raise InputError(f"{args.claim}: {exc.strerror}") from None
    first = next((ln.split()[0] for ln in text.splitlines() if ln.strip() and not ln.startswith("%")), "")
    problems: list[str] = []
    sol = solve(graph)
    if first == "blocks":
        try:
            claim = parse_decomposition(text)
        except (DecompositionFormatError, ValueError) as exc:
            raise InputError(f"{args.claim}: {exc}") from None
        problems += [str(f) for f in verify_against_graph(graph, claim).findings]
        expected = claim
    elif first == "entry":
        try:
            dist = parse_distribution(text)
        except DistributionFormatError as exc:
            raise InputError(f"{args.claim}: {exc}") from None
        rho = sol.reduction.rho
        for i, (_, m) in enumerate(dist.entries, start=1):
            if not m.is_valid_in(graph):
                problems.append(f"entry {i}: not a matching of the graph")
            elif len(m) != rho:
                problems.append(f"entry {i}: size {len(m)} but maximum matchings have size {rho}")
        cov = coverage(dist, range(graph.n_left))
        for u, q in sol.probabilities.items():
            if cov.get(u, Fraction(0)) != q:
                problems.append(f"user {u + 1}: coverage {cov.get(u, 0)} but fair probability is {q}")
        expected = None
    else:
        raise InputError(f"{args.claim}: expected a decomposition ('blocks') or distribution ('entry') file")
    if args.oracle:
        try:
            ref = brute_force_blocks(sol.working_graph).relabel(sol.left_map, sol.right_map)
        except OracleSizeError as exc:
            raise InputError(str(exc)) from None
        if ref.probability != sol.decomposition.probability:
            problems.append("solver and brute force disagree on the decomposition")
        if expected is not None and set(expected.blocks) != set(ref.blocks):
            problems.append("claimed blocks differ from the brute-force blocks")
    for p in problems:
        print(p, file=sys.stderr)
    return (1 if problems else 0), ("ok\n" if not problems else "failed\n")


def _peak_rss_mb() -> float:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024


def cmd_bench(args) -> tuple[int, str]:
    try:
        n_left, n_right, m = (int(x) for x in args.synthetic.split(","))
    except ValueError:
        raise InputError("--synthetic expects nL,nR,m") from None
    seed = args.seed if args.seed is not None else 0
    rows = []
    t0 = time.perf_counter()
    try:
        graph = erdos_renyi(n_left, n_right, m, seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    rows.append(("generate", time.perf_counter() - t0))
    t0 = time.perf_counter()
    sol = solve(graph)
    blocks = len(sol.local.blocks)
    rows.append(("decompose", time.perf_counter() - t0))
    if not args.skip_distribution:
        t0 = time.perf_counter()
        support = len(sol.distribution)
        rows.append(("distribution", time.perf_counter() - t0))
    out = [f"{name}\t{secs:.3f}\n" for name, secs in rows]
    out.append(f"total\t{sum(s for n, s in rows if n != 'generate'):.3f}\n")
    out.append(f"blocks\t{blocks}\n")
    if not args.skip_distribution:
        out.append(f"support\t{support}\n")
    out.append(f"peak_rss_mb\t{_peak_rss_mb():.1f}\n")
    return 0, "".join(out)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write results here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")
    ap = argparse.ArgumentParser(prog="fairmatch", description="Maxmin-fair bipartite matching.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common], help="fair decomposition of an edge list")
    p.add_argument("graph")
    p.set_defaults(run=cmd_decompose)

    p = sub.add_parser("probabilities", parents=[common], help="satisfaction probability of each user (TSV)")
    p.add_argument("graph")
    p.add_argument("--mechanism", default="mf", help="mf, ps, rp-exhaustive or rp-mc:T (default mf)")
    p.add_argument("--seed", type=int)
    p.set_defaults(run=cmd_probabilities)

    p = sub.add_parser("distribution", parents=[common], help="explicit maxmin-fair distribution over matchings")
    p.add_argument("graph")
    p.set_defaults(run=cmd_distribution)

    p = sub.add_parser("sample", parents=[common], help="draw matchings from the fair distribution")
    p.add_argument("graph")
    p.add_argument("--seed", type=int)
    p.add_argument("-n", type=int, default=1)
    p.set_defaults(run=cmd_sample)

    p = sub.add_parser("compare", parents=[common], help="welfare and inequality metrics per mechanism (TSV)")
    p.add_argument("graph")
    p.add_argument("--mechanisms", help="comma list (default mf,ps,rp-exhaustive or rp-mc:1000)")
    p.add_argument("--p", default=",".join(map(str, DEFAULT_P)), help="power-mean exponents")
    p.add_argument("--t", default=",".join(map(str, DEFAULT_T)), help="bottom-t percentages")
    p.add_argument("--seed", type=int)
    p.set_defaults(run=cmd_compare)

    p = sub.add_parser("verify", parents=[common], help="check a decomposition or distribution file")
    p.add_argument("graph")
    p.add_argument("claim")
    p.add_argument("--oracle", action="store_true", help="also compare with brute force (|L| <= 15)")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("bench", parents=[common], help="time the pipeline on a random graph")
    p.add_argument("--synthetic", required=True, metavar="nL,nR,m")
    p.add_argument("--seed", type=int, help="generator seed (default 0)")
    p.add_argument("--skip-distribution", action="store_true")
    p.set_defaults(run=cmd_bench)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        status, text = args.run(args)
    except InputError as exc:
        print(f"fairmatch: {exc}", file=sys.stderr)
        return 2
    except MemoryError:
        print("fairmatch: out of memory", file=sys.stderr)
        return 3
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
