"""Forms, progressions and the small number-theoretic helpers everything else uses."""

from __future__ import annotations

import os
from dataclasses import dataclass
from math import isqrt as _isqrt

import numpy as np

DEFAULT_MEMORY_BUDGET = 1 << 30
MEMORY_BUDGET_ENV = "TQF_MEMORY_BUDGET"
# squares of every sieved value must fit in an unsigned 64-bit word
MAX_BOUND = 1 << 52


class MemoryBudgetError(RuntimeError):
    """A computation would need more memory than the configured budget allows."""


def memory_budget() -> int:
    """Bytes available to a single sieve or table; overridable via ``TQF_MEMORY_BUDGET``."""
    raw = os.environ.get(MEMORY_BUDGET_ENV)
    if raw is None:
        return DEFAULT_MEMORY_BUDGET
    try:
        value = int(float(raw))
    except ValueError:
        raise ValueError(f"{MEMORY_BUDGET_ENV} must be a byte count, got {raw!r}") from None
    if value <= 0:
        raise ValueError(f"{MEMORY_BUDGET_ENV} must be positive")
    return value


def check_budget(nbytes: int, what: str, budget: int | None = None) -> None:
    limit = memory_budget() if budget is None else budget
    if nbytes > limit:
        raise MemoryBudgetError(
            f"{what} needs ~{nbytes / 2**20:.1f} MiB, budget is {limit / 2**20:.1f} MiB"
        )


def isqrt(n: int) -> int:
    """Exact floor square root."""
    return _isqrt(n)


def is_square(n: int) -> bool:
    if n < 0:
        return False
    r = _isqrt(n)
    return r * r == n


@dataclass(frozen=True, order=True)
class Form:
    """Diagonal positive ternary form ax^2 + by^2 + cz^2.

    The constructor sorts, so ``Form(3, 1, 2) == Form(1, 2, 3)``.
    """

    a: int
    b: int
    c: int

    def __post_init__(self):
        coeffs = sorted(int(x) for x in (self.a, self.b, self.c))
        if coeffs[0] <= 0:
            raise ValueError(f"coefficients must be positive, got {(self.a, self.b, self.c)}")
        for name, value in zip("abc", coeffs):
            object.__setattr__(self, name, value)

    @property
    def coefficients(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)

    @property
    def discriminant(self) -> int:
        return self.a * self.b * self.c

    def __call__(self, x: int, y: int, z: int) -> int:
        return self.a * x * x + self.b * y * y + self.c * z * z

    def scaled(self, d: int) -> "Form":
        return Form(d * self.a, d * self.b, d * self.c)

    def __str__(self) -> str:
        return f"<{self.a},{self.b},{self.c}>"


def make_form(a: int, b: int, c: int) -> Form:
    return Form(a, b, c)


def discriminant(form: Form) -> int:
    return form.a * form.b * form.c


@dataclass(frozen=True)
class Progression:
    """The arithmetic progression S_{k,l} = {k*x + l : x >= 0}."""

    k: int
    l: int  # noqa: E741 - matches the usual notation

    def __post_init__(self):
        if self.k < 1 or self.l < 1:
            raise ValueError(f"need k >= 1 and l >= 1, got k={self.k}, l={self.l}")

    def __contains__(self, n: int) -> bool:
        return n >= self.l and (n - self.l) % self.k == 0

    def upto(self, bound: int) -> range:
        return range(self.l, bound + 1, self.k)


def is_prime(n: int) -> bool:
    """Trial division; only used on the small moduli this package deals with."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    if n % 3 == 0:
        return n == 3
    f = 5
    r = _isqrt(n)
    while f <= r:
        if n % f == 0 or n % (f + 2) == 0:
            return False
        f += 6
    return True


def smallest_prime_factor(n: int) -> int:
    if n < 2:
        raise ValueError(f"{n} has no prime factor")
    for f in (2, 3):
        if n % f == 0:
            return f
    f = 5
    while f * f <= n:
        if n % f == 0:
            return f
        if n % (f + 2) == 0:
            return f + 2
        f += 6
    return n


def squarefree_part(n: int) -> int:
    """n divided by its largest square divisor (trial division)."""
    if n < 1:
        raise ValueError(f"squarefree part needs n >= 1, got {n}")
    out = 1
    f = 2
    while f * f <= n:
        e = 0
        while n % f == 0:
            n //= f
            e += 1
        if e & 1:
            out *= f
        f += 1 if f == 2 else 2
    return out * n


def is_squarefree(n: int) -> bool:
    if n < 1:
        raise ValueError(f"is_squarefree needs n >= 1, got {n}")
    f = 2
    while f * f <= n:
        if n % f == 0:
            n //= f
            if n % f == 0:
                return False
        f += 1 if f == 2 else 2
    return True


def normalize_squarefree(form: Form) -> Form:
    """Replace each coefficient by its squarefree part.

    <a d^2, b, c> represents a subset of what <a, b, c> represents, so the
    result is (k, l)-universal whenever the input is.
    """
    return make_form(*(squarefree_part(x) for x in form.coefficients))


@dataclass(frozen=True, eq=False)
class NumberTables:
    """Sieved prime and squarefree flags for 0..bound."""

    bound: int
    prime: np.ndarray
    squarefree: np.ndarray

    def is_prime(self, n: int) -> bool:
        if n <= self.bound:
            return bool(self.prime[n])
        return is_prime(n)

    def is_squarefree(self, n: int) -> bool:
        if n <= self.bound:
            return bool(self.squarefree[n])
        return is_squarefree(n)

    def primes(self, lo: int = 2, hi: int | None = None) -> list[int]:
        hi = self.bound if hi is None else min(hi, self.bound)
        if hi < lo:
            return []
        return (np.flatnonzero(self.prime[lo : hi + 1]) + lo).tolist()


def build_tables(bound: int, budget: int | None = None) -> NumberTables:
    if bound < 2:
        raise ValueError(f"table bound must be at least 2, got {bound}")
    if bound > MAX_BOUND:
        raise MemoryBudgetError(f"table bound {bound} exceeds 2^52")
    check_budget(2 * (bound + 1), f"number tables up to {bound}", budget)

    prime = np.ones(bound + 1, dtype=bool)
    prime[:2] = False
    prime[4::2] = False
    for p in range(3, _isqrt(bound) + 1, 2):
        if prime[p]:
            prime[p * p :: 2 * p] = False

    squarefree = np.ones(bound + 1, dtype=bool)
    squarefree[0] = False
    for p in np.flatnonzero(prime[: _isqrt(bound) + 1]).tolist():
        squarefree[p * p :: p * p] = False

    prime.setflags(write=False)
    squarefree.setflags(write=False)
    return NumberTables(bound, prime, squarefree)
