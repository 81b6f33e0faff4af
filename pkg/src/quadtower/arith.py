"""Exact integer arithmetic: Kronecker symbols, prime discriminants, squares.

Everything in this module is integer-exact; no floating point is used.
Factoring is plain trial division with an explicit bound, which is all the
desk-scale discriminants handled here require.
"""

from __future__ import annotations

import math

__all__ = [
    "BoundExceededError",
    "NotFundamentalError",
    "is_prime",
    "factorize",
    "is_square",
    "kronecker",
    "squarefree_kernel",
    "is_fundamental_discriminant",
    "radicand",
    "discriminant_of",
    "is_prime_discriminant",
    "factor_discriminant",
    "is_sum_of_two_squares",
    "two_square_decomposition",
]

DEFAULT_FACTOR_BOUND = 10**6


class BoundExceededError(RuntimeError):
    """A search loop or factoring pass hit its configured bound."""


class NotFundamentalError(ValueError):
    """The integer is not the discriminant of a quadratic field."""


# Deterministic witness set for Miller-Rabin, valid for all n < 3.3 * 10^24,
# comfortably past 64 bits.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic primality test (Miller-Rabin, exact through 64 bits)."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int, bound: int = DEFAULT_FACTOR_BOUND) -> dict[int, int]:
    """Factor |n| by trial division up to `bound`; returns {prime: exponent}.

    After the trial pass the remaining cofactor must be 1 or prime.  A
    composite cofactor means every missing prime exceeds `bound`, so we
    refuse to guess and raise BoundExceededError.
    """
    if n == 0:
        raise ValueError("cannot factor 0")
    n = abs(n)
    out: dict[int, int] = {}
    for p in _trial_primes(bound):
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n > 1:
        if n <= bound * bound or is_prime(n):
            # cofactor below bound^2 has no two factors > bound, so prime
            out[n] = out.get(n, 0) + 1
        else:
            raise BoundExceededError(
                f"cofactor {n} is composite with all prime factors > {bound}"
            )
    return out


def _trial_primes(bound: int):
    yield 2
    yield 3
    p = 5
    step = 2
    while p <= bound:
        yield p
        p += step
        step = 6 - step


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n), defined for all integers, in {-1, 0, 1}."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    if a % 2 == 0 and n % 2 == 0:
        return 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    # strip twos from n; (a/2) = 0, +1, -1 for a even, a = ±1, a = ±3 mod 8
    while n % 2 == 0:
        n //= 2
        if a % 8 in (3, 5):
            result = -result
    a %= n
    # standard Jacobi loop with quadratic reciprocity
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def squarefree_kernel(n: int, bound: int = DEFAULT_FACTOR_BOUND) -> int:
    """Largest squarefree divisor pattern: product of primes with odd exponent.

    The sign of n is preserved, e.g. squarefree_kernel(-12) == -3.
    """
    if n == 0:
        raise ValueError("squarefree kernel of 0 is undefined")
    kern = 1
    for p, e in factorize(n, bound).items():
        if e % 2 == 1:
            kern *= p
    return kern if n > 0 else -kern


def is_fundamental_discriminant(d: int, bound: int = DEFAULT_FACTOR_BOUND) -> bool:
    """True when d is the discriminant of a quadratic field (so d != 1)."""
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return _is_squarefree(d, bound)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _is_squarefree(m, bound)
    return False


def _is_squarefree(n: int, bound: int) -> bool:
    return all(e == 1 for e in factorize(n, bound).values())


def radicand(d: int) -> int:
    """Squarefree m with Q(sqrt(d)) = Q(sqrt(m)) for a fundamental d."""
    return d if d % 4 == 1 else d // 4


def discriminant_of(m: int) -> int:
    """Field discriminant of Q(sqrt(m)) for squarefree m != 0, 1."""
    return m if m % 4 == 1 else 4 * m


def is_prime_discriminant(d: int) -> bool:
    """True for -4, 8, -8 and (-1)^((p-1)/2) * p with p an odd prime."""
    if d in (-4, 8, -8):
        return True
    if d % 4 != 1 or abs(d) == 1:
        return False
    p = abs(d)
    if not is_prime(p):
        return False
    # the sign must make d = p for p = 1 mod 4 and d = -p for p = 3 mod 4
    return d == (p if p % 4 == 1 else -p)


def factor_discriminant(
    d: int, bound: int = DEFAULT_FACTOR_BOUND
) -> tuple[int, ...]:
    """Split a fundamental discriminant into prime discriminants.

    The factorization d = d_1 * ... * d_t into prime discriminants is unique;
    factors are returned sorted by increasing |d_i|.  Raises
    NotFundamentalError when d is not a quadratic field discriminant.
    """
    if not is_fundamental_discriminant(d, bound):
        raise NotFundamentalError(f"{d} is not a fundamental discriminant")
    parts = []
    for p in factorize(d, bound):
        if p == 2:
            continue
        parts.append(p if p % 4 == 1 else -p)
    rest = d
    for q in parts:
        rest //= q
    if rest != 1:
        if rest not in (-4, 8, -8):
            raise NotFundamentalError(f"{d} has invalid even part {rest}")
        parts.append(rest)
    parts.sort(key=abs)
    prod = 1
    for q in parts:
        prod *= q
    assert prod == d, f"prime discriminant product mismatch for {d}"
    return tuple(parts)


def is_sum_of_two_squares(n: int, bound: int = DEFAULT_FACTOR_BOUND) -> bool:
    """n = x^2 + y^2 solvable iff no prime = 3 mod 4 divides n to an odd power."""
    if n < 0:
        return False
    if n == 0:
        return True
    return all(
        p % 4 != 3 or e % 2 == 0 for p, e in factorize(n, bound).items()
    )


def two_square_decomposition(p: int) -> tuple[int, int]:
    """Write a prime p = 2 or p = 1 mod 4 as s^2 + t^2 with t odd.

    Returns (s, t) with s, t > 0 and t odd (for p = 2 this is (1, 1)).
    Uses a square root of -1 mod p followed by Cornacchia descent.
    """
    if p == 2:
        return (1, 1)
    if p % 4 != 1 or not is_prime(p):
        raise ValueError(f"{p} is not 2 or a prime = 1 mod 4")
    # find z with z^2 = -1 mod p from any quadratic non-residue
    z = 0
    for a in range(2, p):
        if kronecker(a, p) == -1:
            z = pow(a, (p - 1) // 4, p)
            break
    assert z * z % p == p - 1
    a, b = p, z
    while b * b > p:
        a, b = b, a % b
    s = b
    t = math.isqrt(p - s * s)
    assert s * s + t * t == p
    if s % 2 == 1:
        s, t = t, s
    return (s, t)
