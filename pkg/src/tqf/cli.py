"""Command line entry point.

Exit codes: 0 success / verified, 1 mathematically negative outcome,
2 operational error (bad input, memory budget, I/O), 3 form not anisotropic
at exactly one prime.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .core import MEMORY_BUDGET_ENV, Form, MemoryBudgetError, is_prime
from .gaps import (
    ALPHA_CAP,
    AnisotropyError,
    alpha_of,
    alpha_survey,
    gap_report,
    write_gaps_csv,
    write_scan_csv,
    write_survey_csv,
    scan_family,
)
from .local import anisotropic_places, companion_form
from .search import CheckpointError, SearchConfigError, search_range
from .sieve import sieve_progression

log = logging.getLogger("tqf")

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR, EXIT_NOT_SINGLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def show(form: Form) -> str:
    return f"⟨{form.a},{form.b},{form.c}⟩"


def positive_int(text: str) -> int:
    try:
        value = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def family_arg(text: str) -> int:
    parts = text.replace(" ", "").split(",")
    if len(parts) != 3 or parts[0] != "1" or parts[2] != "p" or parts[1] not in ("1", "2", "3"):
        raise argparse.ArgumentTypeError("family must be 1,1,p or 1,2,p or 1,3,p")
    return int(parts[1])


def _writable(path: Path | None) -> None:
    if path is None:
        return
    parent = path.resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise UsageError(f"output directory {parent} is not writable")


@contextlib.contextmanager
def _output(path: Path | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


@contextlib.contextmanager
def _pool(workers: int):
    if workers <= 1:
        yield map
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            yield ex.map


def cmd_companion(args) -> int:
    if not is_prime(args.p):
        print(f"error: {args.p} is not prime", file=sys.stderr)
        return EXIT_ERROR
    res = companion_form(args.p)
    places = ",".join(map(str, sorted(anisotropic_places(res.form))))
    print(f"p={res.p} q={res.q} form={show(res.form)}")
    print(f"{show(res.form)} anisotropic exactly at {{{places}}}")
    return EXIT_OK


def cmd_gaps(args) -> int:
    form = Form(args.a, args.b, args.c)
    places = sorted(anisotropic_places(form))
    if len(places) != 1:
        print(f"error: {show(form)} is anisotropic at {places}, need exactly one prime", file=sys.stderr)
        return EXIT_NOT_SINGLE
    _writable(args.csv)
    rep = gap_report(form, places[0], args.bound)
    with _output(args.csv) as fh:
        write_gaps_csv(rep, fh)
    print(f"{rep.gap_count} gaps, alpha={rep.alpha:.6g}")
    print(
        f"RESULT form={form.a},{form.b},{form.c} p={rep.p} bound={rep.bound} gaps={rep.gap_count} "
        f"alpha={rep.alpha:.6g} log=natural spinor_safe={int(rep.spinor_safe_flag)}"
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    form = Form(args.a, args.b, args.c)
    if args.l < 1 or args.k < 1:
        raise UsageError("--k and --l must be positive")
    gaps = sieve_progression(form, args.k, args.l, args.bound)
    print(f"{len(gaps)} elements of S_{{{args.k},{args.l}}} up to {args.bound} not represented by {show(form)}")
    for n in gaps[:100]:
        print(n)
    print(f"RESULT form={form.a},{form.b},{form.c} k={args.k} l={args.l} bound={args.bound} gaps={len(gaps)}")
    return EXIT_OK if not gaps else EXIT_NEGATIVE


def cmd_search(args) -> int:
    if args.pmin > args.pmax:
        raise UsageError("--pmin must not exceed --pmax")
    _writable(args.checkpoint)
    survivors = []
    pairs = 0

    def progress(rep):
        tag = "resumed" if rep.resumed else "done"
        log.info("p=%d l=%d %s: %d survivor(s), %d refuted", rep.p, rep.l, tag, len(rep.survivors), rep.refuted_count)

    with _pool(args.workers) as map_fn:
        for rep in search_range(args.pmin, args.pmax, args.bound, args.checkpoint, map_fn, progress):
            pairs += 1
            survivors.extend((rep.p, rep.l, f) for f in rep.survivors)
    for p, l, f in survivors:
        print(f"candidate p={p} l={l} form={show(f)} (no gap up to {args.bound})")
    print(f"{len(survivors)} survivors")
    print(f"RESULT pairs={pairs} survivors={len(survivors)} bound={args.bound}")
    return EXIT_OK


def cmd_scan(args) -> int:
    _writable(args.csv)
    with _pool(args.workers) as map_fn:
        res = scan_family(args.family, args.pmin, args.pmax, args.multiplier, map_fn)
    with _output(args.csv) as fh:
        write_scan_csv(res.rows, fh)
    admissible = sorted({r.p for r in res.rows})
    if res.skipped:
        log.info("skipped (not anisotropic exactly at p): %s", res.skipped)
    print(f"{len(admissible)} admissible primes")
    for p, l in res.candidates():
        print(f"candidate p={p} l={l} (m=0 up to {args.multiplier}*p)")
    low = sum(1 for r in res.rows if r.m <= 1)
    print(
        f"RESULT rows={len(res.rows)} admissible={len(admissible)} skipped={len(res.skipped)} "
        f"candidates={len(res.candidates())} m_le_1={low}"
    )
    return EXIT_OK


def cmd_alpha(args) -> int:
    _writable(args.csv)
    with _pool(args.workers) as map_fn:
        rows = alpha_survey(args.pmax, args.disc_mult, args.gap_mult, args.pmin, map_fn)
    with _output(args.csv) as fh:
        write_survey_csv(rows, fh)
    below = sum(1 for r in rows if alpha_of(r.gap_count, r.p) <= 1)
    capped = sum(1 for r in rows if r.alpha > ALPHA_CAP)
    print(
        f"RESULT forms={len(rows)} total_gaps={sum(r.gap_count for r in rows)} "
        f"alpha_le_1={below} alpha_gt_{ALPHA_CAP:g}={capped} log=natural"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tqf", description="Diagonal ternary quadratic forms: local analysis, sieves, universality search.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--memory-budget", type=positive_int, help=f"bytes per sieve (default 1 GiB, env {MEMORY_BUDGET_ENV})")
    parser.add_argument("-q", "--quiet", action="store_true", help="no progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("companion", help="form <1,q,p> anisotropic exactly at p")
    p.add_argument("p", type=positive_int)
    p.set_defaults(func=cmd_companion)

    p = sub.add_parser("gaps", help="gap set of a form anisotropic at a single prime")
    for name in "abc":
        p.add_argument(name, type=positive_int)
    p.add_argument("--bound", type=positive_int, required=True)
    p.add_argument("--csv", type=Path)
    p.set_defaults(func=cmd_gaps)

    p = sub.add_parser("verify", help="check a form against S_{k,l} up to a bound")
    for name in "abc":
        p.add_argument(name, type=positive_int)
    p.add_argument("--k", type=positive_int, required=True)
    p.add_argument("--l", type=positive_int, required=True)
    p.add_argument("--bound", type=positive_int, required=True)
    p.set_defaults(func=cmd_verify)

    default_workers = os.cpu_count() or 1

    p = sub.add_parser("search", help="pruned search for (p,l)-universal candidates")
    p.add_argument("--pmin", type=positive_int, required=True)
    p.add_argument("--pmax", type=positive_int, required=True)
    p.add_argument("--bound", type=positive_int, default=10**6)
    p.add_argument("--checkpoint", type=Path)
    p.add_argument("--workers", type=positive_int, default=default_workers)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("scan", help="per-class gap histogram for <1,q,p>")
    p.add_argument("--family", type=family_arg, required=True)
    p.add_argument("--pmin", type=positive_int, required=True)
    p.add_argument("--pmax", type=positive_int, required=True)
    p.add_argument("--multiplier", type=positive_int, default=120000)
    p.add_argument("--csv", type=Path)
    p.add_argument("--workers", type=positive_int, default=default_workers)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("alpha", help="alpha survey over admissible forms")
    p.add_argument("--pmin", type=positive_int, default=31)
    p.add_argument("--pmax", type=positive_int, required=True)
    p.add_argument("--disc-mult", type=positive_int, default=30)
    p.add_argument("--gap-mult", type=positive_int, default=120000)
    p.add_argument("--csv", type=Path)
    p.add_argument("--workers", type=positive_int, default=default_workers)
    p.set_defaults(func=cmd_alpha)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
    )
    if args.memory_budget:
        os.environ[MEMORY_BUDGET_ENV] = str(args.memory_budget)
    try:
        return args.func(args)
    except (UsageError, MemoryBudgetError, SearchConfigError, CheckpointError, AnisotropyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
