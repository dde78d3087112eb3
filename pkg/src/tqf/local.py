"""Place-by-place analysis of diagonal ternary forms.

Finite places are plain prime ints and the real place is ``INF``
(``math.inf``). A form <a,b,c> is isotropic at v exactly when the Hilbert
symbol (-ab, -ac)_v is +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import gcd

from .core import Form, is_prime, is_squarefree, smallest_prime_factor

INF = math.inf


def _check_place(v) -> None:
    if v == INF:
        return
    if not isinstance(v, int) or not is_prime(v):
        raise ValueError(f"place must be a prime or INF, got {v!r}")


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def legendre_symbol(a: int, p: int) -> int:
    """(a/p) for an odd prime p via Euler's criterion."""
    if p < 3 or p % 2 == 0 or not is_prime(p):
        raise ValueError(f"legendre_symbol needs an odd prime, got {p}")
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def hilbert_symbol(a: int, b: int, v) -> int:
    """(a, b)_v for nonzero integers a, b; +1 iff z^2 = ax^2 + by^2 has a nontrivial solution in Q_v."""
    if a == 0 or b == 0:
        raise ValueError("hilbert_symbol needs nonzero arguments")
    _check_place(v)
    if v == INF:
        return -1 if (a < 0 and b < 0) else 1

    p = v
    alpha, beta = valuation(a, p), valuation(b, p)
    u, w = a // p**alpha, b // p**beta
    if p == 2:
        eps_u, eps_w = ((u - 1) // 2) & 1, ((w - 1) // 2) & 1
        om_u, om_w = ((u * u - 1) // 8) & 1, ((w * w - 1) // 8) & 1
        e = eps_u * eps_w + alpha * om_w + beta * om_u
        return -1 if e & 1 else 1

    sign = -1 if (alpha * beta * ((p - 1) // 2)) & 1 else 1
    if beta & 1:
        sign *= legendre_symbol(u, p)
    if alpha & 1:
        sign *= legendre_symbol(w, p)
    return sign


def is_anisotropic(form: Form, v) -> bool:
    _check_place(v)
    if v == INF:
        return True
    a, b, c = form.coefficients
    return hilbert_symbol(-a * b, -a * c, v) == -1


def _prime_divisors(n: int) -> list[int]:
    out = []
    while n > 1:
        p = smallest_prime_factor(n)
        out.append(p)
        while n % p == 0:
            n //= p
    return out


def anisotropic_places(form: Form) -> frozenset[int]:
    """Finite places where the form is anisotropic; only primes dividing 2abc can qualify."""
    candidates = _prime_divisors(2 * form.discriminant)
    return frozenset(p for p in candidates if is_anisotropic(form, p))


@dataclass(frozen=True)
class CompanionResult:
    p: int
    q: int
    form: Form


def _companion_q(p: int) -> int:
    if p == 2 or p % 8 == 3:
        return 1
    if p % 8 in (5, 7):
        return 2
    q = 3
    while True:
        if is_prime(q) and legendre_symbol(q, p) == -1:
            return q
        q += 4


def companion_form(p: int) -> CompanionResult:
    """<1,q,p> anisotropic exactly at p (and the real place).

    p = 2 uses <1,1,2>, p = 3 mod 8 uses <1,1,p>, p = 5, 7 mod 8 use <1,2,p>,
    and p = 1 mod 8 takes the smallest prime q = 3 mod 4 that is a
    non-residue mod p.
    """
    if not is_prime(p):
        raise ValueError(f"companion_form needs a prime, got {p}")
    q = _companion_q(p)
    form = Form(1, q, p)
    places = anisotropic_places(form)
    if places != {p}:
        raise AssertionError(f"{form} is anisotropic at {sorted(places)}, expected exactly {{{p}}}")
    return CompanionResult(p, q, form)


def almost_universal_witness(k: int, l: int) -> tuple[int, Form]:  # noqa: E741
    """Return (d, Q0) such that d*Q0 is almost (k, l)-universal.

    d = gcd(k, l) and Q0 is the companion form of the smallest prime dividing k/d.
    """
    if k < 1 or l < 1:
        raise ValueError("k and l must be positive")
    if l % k == 0:
        raise ValueError(f"k={k} divides l={l}; no almost-universal witness is claimed")
    d = gcd(k, l)
    p = smallest_prime_factor(k // d)
    return d, companion_form(p).form


def binary_residue_coverage(a: int, b: int, p: int) -> bool:
    """Does ax^2 + by^2 hit every nonzero class mod p?"""
    if p < 3 or not is_prime(p):
        raise ValueError(f"binary_residue_coverage needs an odd prime, got {p}")
    if (a * b) % p == 0:
        raise ValueError(f"p={p} divides a*b={a * b}")
    squares = {x * x % p for x in range(p)}
    hit = {(a * s + b * t) % p for s in squares for t in squares}
    return hit.issuperset(range(1, p))


def spinor_safe(form: Form) -> bool:
    """Squarefree determinant: the sufficient condition that rules out spinor exceptions."""
    return is_squarefree(form.discriminant)
