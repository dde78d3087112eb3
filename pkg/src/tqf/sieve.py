"""Enumeration of the integers represented by a diagonal ternary form.

The engine splits Q = <a,b,c> into a binary part ax^2 + by^2, materialised
as a bitmap, and a sweep over z. A candidate n is represented iff
n - cz^2 lies in the binary bitmap for some z >= 0. Candidates are kept in a
dense boolean array until most have been knocked out, after which the
survivors are tracked as an index array so the long tail of z values costs
almost nothing.

Working modulo k: a target n = r0 + k*j only ever meets binary values in
the classes (r0 - c z^2) mod k. When k | c that is the single class r0 and
only that class of the binary bitmap is built.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from math import isqrt
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import MAX_BOUND, Form, MemoryBudgetError, check_budget, memory_budget

DEFAULT_BLOCK_SIZE = 1 << 26
MAGIC = b"TQF1"
DUMP_VERSION = 1

# switch from the dense candidate array to an index list below this fraction
_COMPACT_FRACTION = 1 / 32


@dataclass(frozen=True)
class BlockPlan:
    block_size: int = DEFAULT_BLOCK_SIZE
    memory_budget: int | None = None

    def __post_init__(self):
        if self.block_size < 64 or self.block_size % 64:
            raise ValueError(f"block_size must be a positive multiple of 64, got {self.block_size}")

    def validate(self, form: Form) -> None:
        if self.block_size < 2 * form.c:
            raise ValueError(f"block_size {self.block_size} < 2*{form.c} for {form}")

    def blocks(self, lo: int, hi: int) -> list[tuple[int, int]]:
        """Split [lo, hi) into consecutive windows."""
        return [(s, min(s + self.block_size, hi)) for s in range(lo, hi, self.block_size)]


@dataclass(frozen=True, eq=False)
class RepBitmap:
    """Represented-set membership for 0..bound (inclusive)."""

    form: Form
    bound: int
    bits: np.ndarray  # bool, length bound + 1

    def __contains__(self, n: int) -> bool:
        return 0 <= n <= self.bound and bool(self.bits[n])

    def unrepresented(self) -> np.ndarray:
        return np.flatnonzero(~self.bits)

    def __eq__(self, other):
        if not isinstance(other, RepBitmap):
            return NotImplemented
        return (
            self.form == other.form
            and self.bound == other.bound
            and np.array_equal(self.bits, other.bits)
        )

    def dump(self, path: str | Path) -> None:
        """Write the 16-byte header then little-endian 64-bit words, bit i of word w = 64w + i."""
        packed = np.packbits(self.bits, bitorder="little")
        pad = (-len(packed)) % 8
        words = np.concatenate([packed, np.zeros(pad, np.uint8)])
        with open(path, "wb") as fh:
            fh.write(MAGIC + struct.pack("<IQ", DUMP_VERSION, self.bound))
            fh.write(words.tobytes())

    @classmethod
    def load(cls, path: str | Path, form: Form) -> "RepBitmap":
        raw = Path(path).read_bytes()
        if raw[:4] != MAGIC:
            raise ValueError(f"{path}: not a TQF1 bitmap")
        version, bound = struct.unpack("<IQ", raw[4:16])
        if version != DUMP_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        words = np.frombuffer(raw[16:], dtype="<u8")
        bits = np.unpackbits(words.view(np.uint8), bitorder="little")[: bound + 1]
        return cls(form, bound, bits.astype(bool))


def _split(form: Form, k: int) -> tuple[int, int, int]:
    """Pick (a, b, c): binary coefficients a, b and the z coefficient c.

    The z coefficient is one divisible by k when there is one, so that only
    a single residue class of the binary part is needed; otherwise the
    largest coefficient, which keeps the z sweep short.
    """
    coeffs = list(form.coefficients)
    if k > 1:
        divisible = [x for x in coeffs if x % k == 0]
        if divisible:
            cz = max(divisible)
            coeffs.remove(cz)
            return coeffs[0], coeffs[1], cz
    return coeffs[0], coeffs[1], coeffs[2]


def _binary_class(a: int, b: int, k: int, r: int, length: int) -> np.ndarray:
    """Bitmap V with V[i] set iff r + k*i = ax^2 + by^2 for some x, y >= 0 (i < length)."""
    out = np.zeros(length, dtype=bool)
    if length <= 0:
        return out
    top = r + k * (length - 1)
    if k == 1:
        roots = {0: [0]}
    else:
        roots: dict[int, list[int]] = {}
        for y0 in range(k):
            roots.setdefault(b * y0 * y0 % k, []).append(y0)
    for x in range(isqrt(top // a) + 1):
        base = a * x * x
        ymax = isqrt((top - base) // b)
        for y0 in roots.get((r - base) % k, ()):
            if y0 > ymax:
                continue
            ys = np.arange(y0, ymax + 1, k, dtype=np.int64)
            out[(base + b * ys * ys - r) // k] = True
    return out


def _binary_full(a: int, b: int, top: int) -> np.ndarray:
    return _binary_class(a, b, 1, 0, top + 1)


def _scan(form: Form, k: int, r0: int, j_lo: int, j_hi: int, budget: int | None = None) -> np.ndarray:
    """Indices j in [j_lo, j_hi) with r0 + k*j not represented by ``form``."""
    if j_hi <= j_lo:
        return np.zeros(0, dtype=np.int64)
    n_hi = r0 + k * (j_hi - 1)
    if n_hi > MAX_BOUND:
        raise MemoryBudgetError(f"bound {n_hi} exceeds 2^52")
    a, b, c = _split(form, k)
    single = c % k == 0
    span = j_hi - j_lo
    binary_bytes = j_hi if single else n_hi + 1
    check_budget(binary_bytes + span + 8 * int(span * _COMPACT_FRACTION) + 1, f"sieve of {form} to {n_hi}", budget)

    if single:
        only = _binary_class(a, b, k, r0, j_hi)

        def view(r):
            return only
    else:
        full = _binary_full(a, b, n_hi)

        def view(r):
            return full[r::k]

    unrep = np.ones(span, dtype=bool)
    idx = None
    z = 0
    while True:
        s = c * z * z
        if s > n_hi:
            break
        r = (r0 - s) % k
        d = (s + r - r0) // k  # target j meets binary index j - d in class r
        if d >= j_hi:
            break
        V = view(r)
        if idx is None:
            j0 = max(j_lo, d)
            seg = unrep[j0 - j_lo :]
            np.greater(seg, V[j0 - d : j_hi - d], out=seg)
            if z % 4 == 3:
                left = int(np.count_nonzero(unrep))
                if left <= span * _COMPACT_FRACTION:
                    idx = np.flatnonzero(unrep) + j_lo
        else:
            if idx.size == 0 or d > idx[-1]:
                break
            pos = int(np.searchsorted(idx, d))
            tail = idx[pos:]
            hit = V[tail - d]
            if hit.any():
                idx = np.concatenate([idx[:pos], tail[~hit]])
        z += 1
    if idx is None:
        idx = np.flatnonzero(unrep) + j_lo
    return idx.astype(np.int64, copy=False)


def _check_bound(N: int) -> None:
    if N < 0:
        raise ValueError(f"bound must be nonnegative, got {N}")
    if N > MAX_BOUND:
        raise MemoryBudgetError(f"bound {N} exceeds 2^52")


def sieve_all(
    form: Form,
    N: int,
    plan: BlockPlan | None = None,
    map_fn: Callable = map,
) -> RepBitmap:
    """Exact represented-set bitmap on [0, N].

    With a ``plan`` the range is cut into independent blocks (dispatched via
    ``map_fn``, e.g. an executor's ``map``); the result is identical to the
    monolithic sieve.
    """
    _check_bound(N)
    budget = plan.memory_budget if plan is not None else None
    check_budget(N + 1, f"bitmap of {form} to {N}", budget)
    bits = np.ones(N + 1, dtype=bool)
    if plan is None:
        bits[_scan(form, 1, 0, 0, N + 1)] = False
    else:
        plan.validate(form)
        blocks = plan.blocks(0, N + 1)
        jobs = [(form, 1, 0, lo, hi, budget) for lo, hi in blocks]
        for gaps in map_fn(_scan_job, jobs):
            bits[gaps] = False
    return RepBitmap(form, N, bits)


def unrepresented_upto(form: Form, N: int, start: int = 0) -> np.ndarray:
    """Ascending array of the integers in [start, N] that ``form`` misses."""
    _check_bound(N)
    return _scan(form, 1, 0, start, N + 1)


def _scan_job(args) -> np.ndarray:
    return _scan(*args)


def sieve_progression(
    form: Form,
    k: int,
    l: int,  # noqa: E741
    N: int,
    plan: BlockPlan | None = None,
    map_fn: Callable = map,
) -> list[int]:
    """Elements of S_{k,l} in [0, N] that ``form`` does not represent, ascending."""
    if k < 1 or l < 1:
        raise ValueError(f"need k >= 1 and l >= 1, got k={k}, l={l}")
    _check_bound(N)
    if N < l:
        return []
    r0 = l % k
    j_lo = (l - r0) // k
    j_hi = (N - r0) // k + 1
    budget = plan.memory_budget if plan is not None else None
    if plan is None:
        js = _scan(form, k, r0, j_lo, j_hi)
    else:
        plan.validate(form)
        jobs = [(form, k, r0, lo, hi, budget) for lo, hi in plan.blocks(j_lo, j_hi)]
        parts = list(map_fn(_scan_job, jobs))
        js = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    return (r0 + k * js).tolist()


def first_gap(form: Form, k: int, l: int, N: int, start: int | None = None) -> int | None:  # noqa: E741
    """Smallest element of S_{k,l} up to N not represented, or None.

    Sieves growing prefixes, so a small gap is found without paying for the
    whole range.
    """
    bound = start if start is not None else max(4096, l + 64 * k)
    while True:
        bound = min(bound, N)
        gaps = sieve_progression(form, k, l, bound)
        if gaps:
            return gaps[0]
        if bound >= N:
            return None
        bound *= 8


def represents(form: Form, n: int) -> tuple[int, int, int] | None:
    """A witness (x, y, z) of nonnegative ints with Q(x,y,z) = n, or None.

    Plain double loop plus a perfect-square test; deliberately independent of
    the sieve engine.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    a, b, c = form.coefficients
    for x in range(isqrt(n // a) + 1):
        rx = n - a * x * x
        for y in range(isqrt(rx // b) + 1):
            ry = rx - b * y * y
            if ry % c == 0:
                z = isqrt(ry // c)
                if c * z * z == ry:
                    return (x, y, z)
    return None


def _subform_represents(coeffs: Sequence[int], n: int) -> bool:
    if len(coeffs) == 1:
        (a,) = coeffs
        if n % a:
            return False
        r = isqrt(n // a)
        return r * r == n // a
    a, b = coeffs
    for x in range(isqrt(n // a) + 1):
        rest = n - a * x * x
        if rest % b == 0:
            y = isqrt(rest // b)
            if y * y == rest // b:
                return True
    return False


def binary_represents(a: int, b: int, n: int) -> bool:
    """Does ax^2 + by^2 = n have a solution? Direct two-variable enumeration."""
    return _subform_represents((a, b), n)


def first_unrepresented(coeffs: Sequence[int], k: int, l: int, n_max: int) -> int | None:  # noqa: E741
    """e-value of a rank 1 or 2 diagonal form on S_{k,l}: the least element it misses.

    Returns None when every element up to ``n_max`` is represented.
    """
    coeffs = tuple(sorted(int(x) for x in coeffs))
    if len(coeffs) not in (1, 2) or coeffs[0] < 1:
        raise ValueError(f"need one or two positive coefficients, got {coeffs}")
    if k < 2 or not 1 <= l < k:
        raise ValueError(f"need k >= 2 and 1 <= l < k, got k={k}, l={l}")
    j_lo = 0
    bound = l + 64 * k
    while True:
        bound = min(bound, n_max)
        j_hi = (bound - l) // k + 1
        if j_hi > j_lo:
            if len(coeffs) == 1:
                (a,) = coeffs
                n = l + k * np.arange(j_lo, j_hi, dtype=np.int64)
                q = n // a
                r = np.sqrt(q).astype(np.int64)
                r += (r + 1) * (r + 1) <= q
                r -= r * r > q
                ok = (n % a == 0) & (r * r == q)
            else:
                ok = _binary_class(coeffs[0], coeffs[1], k, l, j_hi)[j_lo:]
            miss = np.flatnonzero(~ok)
            if miss.size:
                return l + k * (j_lo + int(miss[0]))
            j_lo = j_hi
        if bound >= n_max:
            return None
        bound *= 8


def unrepresented_in(form: Form, values: Iterable[int]) -> list[int]:
    """Filter ``values`` down to those ``represents`` rejects."""
    return [n for n in values if represents(form, n) is None]


__all__ = [
    "BlockPlan",
    "DEFAULT_BLOCK_SIZE",
    "RepBitmap",
    "binary_represents",
    "first_gap",
    "first_unrepresented",
    "memory_budget",
    "represents",
    "sieve_all",
    "sieve_progression",
    "unrepresented_upto",
]
