"""Gap sets X_{Q,p}, the alpha statistic, and the family and survey scans.

X_{Q,p} is the set of n not divisible by p that Q fails to represent, for a
form anisotropic exactly at p. Everything here works with the finite part
X_{Q,p} cut off at a bound N, a lower estimate of the full set.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, TextIO

import numpy as np

from .core import Form, build_tables, is_prime
from .local import anisotropic_places, spinor_safe
from .sieve import unrepresented_upto

FAMILIES = {1: "1,1,p", 2: "1,2,p", 3: "1,3,p"}
ALPHA_CAP = 100.0
DEFAULT_GAP_MULTIPLIER = 120000


class AnisotropyError(ValueError):
    """The form is not anisotropic at exactly the requested prime."""


@dataclass(frozen=True, eq=False)
class GapReport:
    form: Form
    p: int
    bound: int
    gaps: np.ndarray
    class_counts: np.ndarray  # index l - 1 holds #(gaps in S_{p,l}), l = 1..p-1
    alpha: float
    spinor_safe_flag: bool

    @property
    def gap_count(self) -> int:
        return int(self.gaps.size)

    def count(self, l: int) -> int:  # noqa: E741
        return int(self.class_counts[l - 1])

    def gap_free_classes(self) -> list[int]:
        return [l for l in range(1, self.p) if self.class_counts[l - 1] == 0]


@dataclass(frozen=True)
class HistogramRow:
    family: str
    p: int
    l: int  # noqa: E741
    bound: int
    m: int


@dataclass(frozen=True)
class SurveyRow:
    form: Form
    p: int
    bound: int
    gap_count: int
    alpha: float
    spinor_safe: bool

    @property
    def truncated(self) -> bool:
        return self.alpha > ALPHA_CAP


@dataclass
class ScanResult:
    rows: list[HistogramRow] = field(default_factory=list)
    skipped: list[int] = field(default_factory=list)

    def candidates(self) -> list[tuple[int, int]]:
        """(p, l) pairs with no gap up to the scan bound."""
        return [(r.p, r.l) for r in self.rows if r.m == 0]


def alpha_of(gap_count: int, p: int) -> float:
    return gap_count / (p * math.log(p))


def gap_report(form: Form, p: int, N: int) -> GapReport:
    places = anisotropic_places(form)
    if places != {p}:
        raise AnisotropyError(f"{form} is anisotropic at {sorted(places)}, not exactly at {p}")
    missed = unrepresented_upto(form, N, start=1)
    gaps = missed[missed % p != 0]
    counts = np.bincount(gaps % p, minlength=p)[1:]
    return GapReport(
        form=form,
        p=p,
        bound=N,
        gaps=gaps,
        class_counts=counts,
        alpha=alpha_of(gaps.size, p),
        spinor_safe_flag=spinor_safe(form),
    )


def expected_universal_count(p: int, alpha: float) -> tuple[float, float]:
    """Heuristic chance that a form with this alpha misses no class, and the expected number of such l.

    Assumes gaps are spread evenly over the p - 1 nonzero classes, which the
    data does not actually bear out; use as an indication only.
    """
    if p < 3:
        raise ValueError(f"need p >= 3, got {p}")
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    prob = (1 - 1 / (p - 1)) ** (alpha * p * math.log(p))
    return prob, (p - 1) * prob


def _family_report(args) -> tuple[int, np.ndarray | None]:
    q, p, bound = args
    form = Form(1, q, p)
    if anisotropic_places(form) != {p}:
        return p, None
    return p, gap_report(form, p, bound).class_counts


def scan_family(
    q: int,
    p_min: int,
    p_max: int,
    multiplier: int = DEFAULT_GAP_MULTIPLIER,
    map_fn: Callable = map,
) -> ScanResult:
    """Per-class gap counts m for <1,q,p> over the primes p in [p_min, p_max], bound multiplier*p.

    Primes where <1,q,p> is not anisotropic exactly at p are listed in ``skipped``.
    """
    if q not in FAMILIES:
        raise ValueError(f"family must be one of {sorted(FAMILIES)}, got {q}")
    if multiplier < 1:
        raise ValueError("multiplier must be positive")
    primes = [p for p in range(max(p_min, 2), p_max + 1) if is_prime(p)]
    out = ScanResult()
    jobs = [(q, p, multiplier * p) for p in primes]
    for p, counts in map_fn(_family_report, jobs):
        if counts is None:
            out.skipped.append(p)
            continue
        out.rows.extend(
            HistogramRow(FAMILIES[q], p, l, multiplier * p, int(counts[l - 1])) for l in range(1, p)
        )
    return out


def survey_forms(p: int, disc_multiplier: int) -> list[Form]:
    """Squarefree sorted <a,b,c> with p | abc < disc_multiplier * p, anisotropic exactly at p."""
    limit = disc_multiplier * p
    tables = build_tables(max(limit, 2))
    sf = tables.squarefree
    out = []
    a = 1
    while a * a * a < limit:
        if sf[a]:
            b = a
            while a * b * b < limit:
                if sf[b]:
                    for c in range(b, (limit - 1) // (a * b) + 1):
                        if sf[c] and (a * b * c) % p == 0:
                            form = Form(a, b, c)
                            if anisotropic_places(form) == {p}:
                                out.append(form)
                b += 1
        a += 1
    return out


def in_small_family(form: Form, p: int) -> bool:
    """Is the form one of <1,1,p>, <1,2,p>, <1,3,p> (as a multiset)?"""
    return any(form == Form(1, q, p) for q in FAMILIES)


def _survey_job(args) -> SurveyRow:
    form, p, bound = args
    rep = gap_report(form, p, bound)
    return SurveyRow(form, p, bound, rep.gap_count, rep.alpha, rep.spinor_safe_flag)


def alpha_survey(
    p_max: int,
    disc_multiplier: int = 30,
    gap_bound_multiplier: int = DEFAULT_GAP_MULTIPLIER,
    p_min: int = 31,
    map_fn: Callable = map,
) -> list[SurveyRow]:
    """Alpha lower estimates for every admissible form with p_min <= p <= p_max and abc < disc_multiplier*p.

    The default p_min = 31 matches the range 30 < p the scatter data was taken on.
    """
    jobs = []
    for p in range(max(p_min, 2), p_max + 1):
        if is_prime(p):
            jobs.extend((form, p, gap_bound_multiplier * p) for form in survey_forms(p, disc_multiplier))
    return list(map_fn(_survey_job, jobs))


def format_alpha(alpha: float) -> str:
    return f">{ALPHA_CAP:g}" if alpha > ALPHA_CAP else f"{alpha:.6g}"


SURVEY_COLUMNS = ["a", "b", "c", "p", "bound", "gap_count", "alpha", "spinor_safe"]
SCAN_COLUMNS = ["family", "p", "l", "bound", "m"]


def write_survey_csv(rows: Iterable[SurveyRow], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SURVEY_COLUMNS)
    for r in rows:
        w.writerow([r.form.a, r.form.b, r.form.c, r.p, r.bound, r.gap_count, format_alpha(r.alpha), int(r.spinor_safe)])


def write_scan_csv(rows: Iterable[HistogramRow], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SCAN_COLUMNS)
    for r in rows:
        w.writerow([r.family, r.p, r.l, r.bound, r.m])


def write_gaps_csv(report: GapReport, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "l"])
    for n in report.gaps.tolist():
        w.writerow([n, n % report.p])


def read_csv(fh: TextIO) -> list[dict[str, str]]:
    return list(csv.DictReader(fh))


__all__ = [
    "ALPHA_CAP",
    "AnisotropyError",
    "GapReport",
    "HistogramRow",
    "ScanResult",
    "SurveyRow",
    "alpha_of",
    "alpha_survey",
    "expected_universal_count",
    "gap_report",
    "in_small_family",
    "scan_family",
    "survey_forms",
]
