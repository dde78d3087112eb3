"""Pruned exhaustive search for (p, l)-universal diagonal ternary candidates.

If some <a,b,c> is (p, l)-universal with l < p, then one exists that also
satisfies all of the following:

* a, b, c squarefree, a <= b <= c
* a <= l, and a <= l/2 when l is not squarefree
* <a,b> represents l
* p | b or p | c
* b <= e(<a>) and c <= e(<a,b>), where e(F) is the least element of S_{p,l} that F misses

``admissible_triples`` enumerates exactly those forms, and ``search_pair``
certifies each one against S_{p,l} up to a finite bound. Forms passing that
check are only *candidates*: a finite check never proves universality.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from .core import Form, NumberTables, build_tables, is_prime
from .sieve import binary_represents, first_gap, first_unrepresented

log = logging.getLogger(__name__)

E_SEARCH_CAP = 10**8
DEFAULT_SWEEP_BOUND = 10**6
DEFAULT_DEEP_BOUND = 10**9


class SearchConfigError(RuntimeError):
    """An e-value was not found below the configured cap."""


class CheckpointError(RuntimeError):
    pass


@dataclass
class CandidateReport:
    p: int
    l: int  # noqa: E741
    certify_bound: int
    survivors: list[Form] = field(default_factory=list)
    refuted: list[tuple[Form, int]] = field(default_factory=list)
    refuted_count: int = 0
    resumed: bool = False

    @property
    def triples_examined(self) -> int:
        return len(self.survivors) + self.refuted_count

    def record(self) -> dict:
        return _record(self.p, self.l, "done", [f.coefficients for f in self.survivors], self.refuted_count, self.certify_bound)


def _tables_for(p: int) -> NumberTables:
    return build_tables(max(1000, 20 * p))


def admissible_triples(
    p: int,
    l: int,  # noqa: E741
    tables: NumberTables | None = None,
    e_cap: int = E_SEARCH_CAP,
) -> Iterator[Form]:
    """Forms surviving every pruning rule, in lexicographic (a, b, c) order."""
    if not 1 <= l < p:
        raise ValueError(f"need 1 <= l < p, got p={p}, l={l}")
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    tables = tables or _tables_for(p)
    sf = tables.is_squarefree
    a_max = l if sf(l) else l // 2

    for a in range(1, a_max + 1):
        if not sf(a):
            continue
        e_a = first_unrepresented((a,), p, l, e_cap)
        if e_a is None:
            raise SearchConfigError(f"e(<{a}>) for S_{{{p},{l}}} exceeds {e_cap}")
        for b in range(a, e_a + 1):
            if not sf(b) or not binary_represents(a, b, l):
                continue
            e_ab = first_unrepresented((a, b), p, l, e_cap)
            if e_ab is None:
                raise SearchConfigError(f"e(<{a},{b}>) for S_{{{p},{l}}} exceeds {e_cap}")
            if b % p == 0:
                cs = range(b, e_ab + 1)
            else:
                cs = range(-(-b // p) * p, e_ab + 1, p)
            for c in cs:
                if sf(c):
                    yield Form(a, b, c)


def search_pair(
    p: int,
    l: int,  # noqa: E741
    certify_bound: int = DEFAULT_SWEEP_BOUND,
    tables: NumberTables | None = None,
) -> CandidateReport:
    """Certify every admissible form against S_{p,l} up to ``certify_bound``.

    The first (smallest) gap refutes a form; forms with none survive.
    """
    report = CandidateReport(p, l, certify_bound)
    for form in admissible_triples(p, l, tables):
        gap = first_gap(form, p, l, certify_bound)
        if gap is None:
            report.survivors.append(form)
        else:
            report.refuted.append((form, gap))
    report.refuted_count = len(report.refuted)
    return report


def _record(p, l, status, survivors, refuted_count, bound) -> dict:  # noqa: E741
    return {
        "p": p,
        "l": l,
        "status": status,
        "survivors": [list(s) for s in survivors],
        "refuted_count": refuted_count,
        "bound": bound,
    }


def _encode(rec: dict) -> bytes:
    return (json.dumps(rec) + "\n").encode("utf-8")


class Checkpoint:
    """Append-only JSON-lines log of finished (p, l) pairs.

    Before a pair's result is awaited a ``pending`` record is written, after
    it a ``done`` record. Recovery drops a torn trailing line and replays the
    rest; a trailing ``pending`` is not written twice, so an interrupted and
    resumed sweep leaves the same bytes as an uninterrupted one.
    """

    def __init__(self, path: str | Path, bound: int):
        self.path = Path(path)
        self.bound = bound
        self.done: dict[tuple[int, int], dict] = {}
        self.trailing_pending: tuple[int, int] | None = None
        self._recover()

    def _recover(self) -> None:
        if not self.path.exists():
            return
        raw = self.path.read_bytes()
        cut = raw.rfind(b"\n") + 1
        if cut != len(raw):
            log.warning("dropping torn trailing record in %s", self.path)
            with open(self.path, "r+b") as fh:
                fh.truncate(cut)
        last = None
        for lineno, line in enumerate(raw[:cut].splitlines(), 1):
            try:
                rec = json.loads(line)
                key = (int(rec["p"]), int(rec["l"]))
                status = rec["status"]
            except (ValueError, KeyError, TypeError) as exc:
                raise CheckpointError(f"{self.path}:{lineno}: bad record") from exc
            if rec["bound"] != self.bound:
                raise CheckpointError(
                    f"{self.path} was written with bound {rec['bound']}, not {self.bound}"
                )
            if status == "done":
                self.done[key] = rec
            elif status != "pending":
                raise CheckpointError(f"{self.path}:{lineno}: unknown status {status!r}")
            last = (key, status)
        if last is not None and last[1] == "pending" and last[0] not in self.done:
            self.trailing_pending = last[0]

    def _append(self, rec: dict) -> None:
        with open(self.path, "ab") as fh:
            fh.write(_encode(rec))
            fh.flush()
            os.fsync(fh.fileno())

    def mark_pending(self, p: int, l: int) -> None:  # noqa: E741
        if self.trailing_pending == (p, l):
            self.trailing_pending = None
            return
        self._append(_record(p, l, "pending", [], 0, self.bound))

    def mark_done(self, report: CandidateReport) -> None:
        rec = report.record()
        self._append(rec)
        self.done[(report.p, report.l)] = rec


def _pair_task(args) -> CandidateReport:
    p, l, bound = args  # noqa: E741
    return search_pair(p, l, bound)


def sweep_pairs(p_min: int, p_max: int) -> list[tuple[int, int]]:
    """All (p, l) in work order: ascending p, then ascending l."""
    return [(p, l) for p in range(max(p_min, 2), p_max + 1) if is_prime(p) for l in range(1, p)]


def search_range(
    p_min: int,
    p_max: int,
    certify_bound: int = DEFAULT_SWEEP_BOUND,
    checkpoint: str | Path | None = None,
    map_fn: Callable = map,
    progress: Callable[[CandidateReport], None] | None = None,
) -> Iterator[CandidateReport]:
    """Reports for every prime p in [p_min, p_max] and every 1 <= l < p, in work order.

    With a ``checkpoint`` path, pairs already recorded there are replayed
    instead of recomputed (yielded with ``resumed=True`` and no refutation
    witnesses). ``map_fn`` must preserve order, as ``map`` and
    ``Executor.map`` do.
    """
    if p_min > p_max:
        raise ValueError(f"p_min={p_min} > p_max={p_max}")
    pairs = sweep_pairs(p_min, p_max)
    ckpt = Checkpoint(checkpoint, certify_bound) if checkpoint is not None else None
    done = ckpt.done if ckpt else {}
    todo = [(p, l, certify_bound) for p, l in pairs if (p, l) not in done]
    results = iter(map_fn(_pair_task, todo))

    for p, l in pairs:
        if (p, l) in done:
            rec = done[(p, l)]
            report = CandidateReport(
                p, l, certify_bound,
                survivors=[Form(*s) for s in rec["survivors"]],
                refuted_count=rec["refuted_count"],
                resumed=True,
            )
        else:
            if ckpt:
                ckpt.mark_pending(p, l)
            report = next(results)
            if (report.p, report.l) != (p, l):
                raise RuntimeError("map_fn returned results out of order")
            if ckpt:
                ckpt.mark_done(report)
        if progress:
            progress(report)
        yield report


__all__ = [
    "CandidateReport",
    "Checkpoint",
    "CheckpointError",
    "SearchConfigError",
    "admissible_triples",
    "search_pair",
    "search_range",
    "sweep_pairs",
]
