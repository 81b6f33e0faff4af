"""Binary quadratic forms, class groups, and genus theory.

Forms (a, b, c) of fundamental discriminant d = b^2 - 4ac are reduced either
in the definite sense (d < 0) or onto cycles of reduced forms under the rho
operator (d > 0).  For d > 0 the form class group is the *narrow* class
group; the ordinary class group is its quotient by the class of the negated
principal form.  Group structure is read off a relation matrix via integer
Smith normal form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .arith import (
    BoundExceededError,
    factor_discriminant,
    factorize,
    is_fundamental_discriminant,
    kronecker,
)

__all__ = [
    "BQForm",
    "FormClassGroup",
    "GenusCharacter",
    "reduce_form",
    "compose",
    "principal_form",
    "class_group",
    "two_class_number",
    "two_sylow",
    "genus_characters",
    "genus_character_matrix",
    "genus_positivity",
    "c4_splittings",
    "smith_normal_form",
]

DEFAULT_CLASS_BOUND = 10**7


@dataclass(frozen=True, order=True)
class BQForm:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def content(self) -> int:
        return math.gcd(math.gcd(self.a, self.b), self.c)

    def inverse(self) -> "BQForm":
        return BQForm(self.a, -self.b, self.c)

    def __str__(self) -> str:
        return f"({self.a}, {self.b}, {self.c})"


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    # returns (g, x, y) with a*x + b*y = g >= 0
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def _solve_linmod(a: int, b: int, m: int) -> tuple[int, int]:
    # solve a*x = b (mod m); return (x0, step) parametrizing all solutions
    g, d, _ = _xgcd(a, m)
    if b % g != 0:
        raise ValueError(f"no solution to {a} x = {b} mod {m}")
    return (b // g) * d % m, m // g


def principal_form(d: int) -> BQForm:
    """Identity class representative of discriminant d."""
    if d < 0:
        k = d % 2
        return BQForm(1, k, (k * k - d) // 4)
    s = math.isqrt(d)
    b0 = s if (s - d) % 2 == 0 else s - 1
    return BQForm(1, b0, (b0 * b0 - d) // 4)


def is_reduced(f: BQForm) -> bool:
    d = f.disc
    a, b, c = f.a, f.b, f.c
    if d < 0:
        if a <= 0:
            return False
        if not (abs(b) <= a <= c):
            return False
        return b >= 0 or (abs(b) < a and a < c)
    # indefinite: 0 < b < sqrt(d) and sqrt(d) - b < 2|a| < sqrt(d) + b
    if b <= 0 or b * b >= d:
        return False
    t = 2 * abs(a)
    if (t + b) ** 2 <= d:
        return False
    return t <= b or (t - b) ** 2 < d


def _rho(f: BQForm) -> BQForm:
    # one step along the reduction orbit / cycle of an indefinite form
    d = f.disc
    c = f.c
    cc = abs(c)
    r = (-f.b) % (2 * cc)
    s = math.isqrt(d)
    if cc > s:
        if r > cc:
            r -= 2 * cc
    else:
        # shift r into (sqrt(d) - 2|c|, sqrt(d)]
        r += 2 * cc * ((s - r) // (2 * cc))
    return BQForm(c, r, (r * r - d) // (4 * c))


def reduce_form(f: BQForm) -> BQForm:
    """Reduce f; for d > 0 the result is some form on the equivalence cycle."""
    d = f.disc
    if d >= 0:
        if d == 0 or math.isqrt(d) ** 2 == d:
            raise ValueError(f"degenerate discriminant {d}")
        g = f
        size = abs(f.a) + abs(f.b) + abs(f.c)
        for _ in range(8 * size.bit_length() + 64):
            if is_reduced(g):
                return g
            g = _rho(g)
        raise BoundExceededError(f"reduction of {f} did not terminate")
    # definite case: classical normalize-and-swap loop, keep a > 0
    a, b, c = f.a, f.b, f.c
    if a < 0:
        raise ValueError("definite forms must be positive")
    while True:
        if a > c:
            a, b, c = c, -b, a
            continue
        if b > a or b <= -a:
            r = (a - b) // (2 * a)
            b2 = b + 2 * r * a
            c = a * r * r + b * r + c
            b = b2
            continue
        break
    if a == c and b < 0:
        b = -b
    return BQForm(a, b, c)


def cycle_of(f: BQForm) -> tuple[BQForm, ...]:
    """The full rho-cycle through a reduced indefinite form."""
    assert f.disc > 0 and is_reduced(f)
    out = [f]
    g = _rho(f)
    while g != f:
        out.append(g)
        g = _rho(g)
    return tuple(out)


def compose(f1: BQForm, f2: BQForm) -> BQForm:
    """Gauss composition of primitive forms of the same discriminant (raw)."""
    if f1.disc != f2.disc:
        raise ValueError("forms must share a discriminant")
    a1, b1, c1 = f1.a, f1.b, f1.c
    a2, b2, c2 = f2.a, f2.b, f2.c
    g = (b1 + b2) // 2
    h = -(b1 - b2) // 2
    w = math.gcd(math.gcd(a1, a2), g)
    s = a1 // w
    t = a2 // w
    u = g // w
    mu, nu = _solve_linmod(t * u, h * u + s * c1, s * t)
    lam = _solve_linmod(t * nu, h - t * mu, s)[0]
    k = mu + nu * lam
    ell = (k * t - h) // s
    m = (t * u * k - h * u - c1 * s) // (s * t)
    a3 = s * t
    b3 = w * u - (k * t + ell * s)
    c3 = k * ell - w * m
    out = BQForm(a3, b3, c3)
    assert out.disc == f1.disc
    return out


def _reduced_forms(d: int) -> list[BQForm]:
    # all reduced forms of fundamental discriminant d
    out = []
    if d < 0:
        for a in range(1, math.isqrt(-d // 3) + 1):
            for b in range(d % 2, a + 1, 2):
                num = b * b - d
                if num % (4 * a):
                    continue
                c = num // (4 * a)
                if c < a:
                    continue
                out.append(BQForm(a, b, c))
                if 0 < b < a < c:
                    out.append(BQForm(a, -b, c))
        return out
    s = math.isqrt(d)
    for b in range(2 - (d % 2), s + 1, 2):
        m = (d - b * b) // 4
        for a in _divisors(m):
            if (2 * a + b) ** 2 > d and (2 * a <= b or (2 * a - b) ** 2 < d):
                out.append(BQForm(a, b, -(m // a)))
                out.append(BQForm(-a, b, m // a))
    return out


def _divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).items():
        divs = [q * p**k for q in divs for k in range(e + 1)]
    return sorted(divs)


class FormClassGroup:
    """Finite abelian form class group with explicit structure.

    For d > 0 the form classes make up the narrow class group; with
    narrow=False the quotient by the negated principal class is returned.
    elementary_divisors is the divisor chain d_1 | d_2 | ... (trivial group:
    empty list).
    """

    def __init__(self, d: int, narrow: bool, h: int,
                 elementary_divisors: list[int],
                 class_representatives: list[BQForm],
                 _mul=None, _identity=None):
        self.discriminant = d
        self.narrow = narrow
        self.h = h
        self.elementary_divisors = elementary_divisors
        self.class_representatives = class_representatives
        self._mul = _mul
        self._identity = _identity

    def __repr__(self) -> str:
        kind = "narrow" if self.narrow else "ordinary"
        return (f"FormClassGroup(d={self.discriminant}, {kind}, h={self.h}, "
                f"type={self.elementary_divisors})")

    def multiply(self, x: BQForm, y: BQForm) -> BQForm:
        return self._mul(x, y)

    @property
    def identity(self) -> BQForm:
        return self._identity


def class_group(d: int, narrow: bool = True,
                bound: int = DEFAULT_CLASS_BOUND) -> FormClassGroup:
    """Class group of the fundamental discriminant d by form enumeration."""
    if abs(d) > bound:
        raise BoundExceededError(f"|{d}| exceeds class group bound {bound}")
    if not is_fundamental_discriminant(d):
        raise ValueError(f"{d} is not a fundamental discriminant")

    if d < 0:
        reps = sorted(_reduced_forms(d))
        canon = reduce_form

        def mul(x, y):
            return reduce_form(compose(x, y))

        ident = reduce_form(principal_form(d))
    else:
        forms = _reduced_forms(d)
        cycle_index: dict[BQForm, BQForm] = {}
        reps = []
        for f in forms:
            if f in cycle_index:
                continue
            cyc = cycle_of(f)
            # canonical rep: smallest form with positive leading coefficient
            rep = min(g for g in cyc if g.a > 0)
            reps.append(rep)
            for g in cyc:
                cycle_index[g] = rep
        reps.sort()

        def canon(f):
            g = reduce_form(f)
            return cycle_index[g]

        def mul(x, y):
            return canon(compose(x, y))

        ident = canon(principal_form(d))

    if d > 0 and not narrow:
        # quotient by the class of the totally negative principal form
        s = math.isqrt(d)
        b0 = s if (s - d) % 2 == 0 else s - 1
        neg = canon(BQForm(-1, b0, (d - b0 * b0) // 4))
        if neg == ident:
            pass  # norm -1 unit: narrow and ordinary agree
        else:
            orbit = {x: min(x, mul(x, neg)) for x in reps}
            reps = sorted(set(orbit.values()))
            inner_mul = mul

            def mul(x, y):
                return orbit[inner_mul(x, y)]

            ident = orbit[ident]

    h = len(reps)
    divisors = _abelian_structure(reps, mul, ident)
    return FormClassGroup(d, narrow if d > 0 else False, h, divisors, reps,
                          _mul=mul, _identity=ident)


def _abelian_structure(elements, mul, ident) -> list[int]:
    """Divisor chain of a finite abelian group given by a multiplication map."""
    h = len(elements)
    if h == 1:
        return []
    # greedy generating set with discrete logs built during closure
    gens: list = []
    logs: dict = {ident: ()}
    for x in elements:
        if x in logs:
            continue
        gens.append(x)
        k = len(gens)
        logs = {e: v + (0,) for e, v in logs.items()}
        frontier = dict(logs)
        while True:
            new = {}
            for e, v in frontier.items():
                ex = mul(e, x)
                if ex not in logs and ex not in new:
                    w = list(v)
                    w[k - 1] += 1
                    new[ex] = tuple(w)
            if not new:
                break
            logs.update(new)
            frontier = new
    k = len(gens)
    rows = set()
    for e, v in logs.items():
        for i, g in enumerate(gens):
            w = logs[mul(e, g)]
            row = list(v)
            row[i] += 1
            rows.add(tuple(a - b for a, b in zip(row, w)))
    rows.discard(tuple([0] * k))
    diag = smith_normal_form([list(r) for r in rows], k)
    assert all(diag), "relation lattice of a finite group has full rank"
    divisors = [x for x in diag if x > 1]
    prod = 1
    for x in divisors:
        prod *= x
    assert prod == h, f"structure {divisors} does not match order {h}"
    return divisors


def smith_normal_form(rows: list[list[int]], width: int) -> list[int]:
    """Diagonal of the Smith normal form of an integer matrix.

    Returns `width` integers d_1 | d_2 | ... | d_width (zeros for missing
    rank).  Destroys its input.
    """
    mat = [r[:] for r in rows if any(r)]
    n = width
    diag = []
    while mat and n:
        # move a nonzero pivot of minimal absolute value to (0, 0)
        while True:
            pi, pj = min(
                ((i, j) for i, row in enumerate(mat) for j in range(n)
                 if row[j] != 0),
                key=lambda t: abs(mat[t[0]][t[1]]),
            )
            mat[0], mat[pi] = mat[pi], mat[0]
            for row in mat:
                row[0], row[pj] = row[pj], row[0]
            p = mat[0][0]
            dirty = False
            for row in mat[1:]:
                if row[0] % p:
                    q = row[0] // p
                    for j in range(n):
                        row[j] -= q * mat[0][j]
                    dirty = True
            for j in range(1, n):
                if mat[0][j] % p:
                    q = mat[0][j] // p
                    for row in mat:
                        row[j] -= q * row[0]
                    dirty = True
            if not dirty:
                break
        p = abs(mat[0][0])
        for row in mat[1:]:
            if row[0]:
                q = row[0] // mat[0][0]
                for j in range(n):
                    row[j] -= q * mat[0][j]
        for j in range(1, n):
            if mat[0][j]:
                q = mat[0][j] // mat[0][0]
                for row in mat:
                    row[j] -= q * row[0]
        diag.append(p)
        mat = [row[1:] for row in mat[1:] if any(row[1:])]
        n -= 1
    diag.extend([0] * n)
    # enforce the divisibility chain, zeros last
    changed = True
    while changed:
        changed = False
        for i in range(len(diag) - 1):
            a, b = diag[i], diag[i + 1]
            if a and b and b % a:
                g = math.gcd(a, b)
                diag[i], diag[i + 1] = g, a * b // g
                changed = True
            elif a == 0 and b != 0:
                diag[i], diag[i + 1] = b, 0
                changed = True
    return diag


def two_sylow(cg: FormClassGroup) -> list[int]:
    """2-part of each elementary divisor, smallest first (trivial: [])."""
    out = []
    for m in cg.elementary_divisors:
        t = 1
        while m % 2 == 0:
            t *= 2
            m //= 2
        if t > 1:
            out.append(t)
    return sorted(out)


def two_class_number(d: int, narrow: bool = False,
                     bound: int = DEFAULT_CLASS_BOUND) -> int:
    """Order of the 2-Sylow subgroup of the class group of discriminant d."""
    h = class_group(d, narrow=narrow, bound=bound).h
    t = 1
    while h % 2 == 0:
        t *= 2
        h //= 2
    return t


@dataclass(frozen=True)
class GenusCharacter:
    """Genus character n -> kronecker(d_i, n) for a prime discriminant d_i."""

    prime_discriminant: int
    parent: int

    def __call__(self, n: int) -> int:
        v = kronecker(self.prime_discriminant, n)
        if v == 0:
            raise ValueError(
                f"{n} is not coprime to {self.prime_discriminant}; use the "
                "character matrix for factor primes"
            )
        return v


def genus_characters(d: int) -> list[GenusCharacter]:
    return [GenusCharacter(q, d) for q in factor_discriminant(d)]


def _factor_prime(q: int) -> int:
    return 2 if q % 2 == 0 else abs(q)


def genus_character_matrix(d: int) -> list[list[int]]:
    """Matrix chi_i(p_j) over the prime discriminant factors of d.

    Rows are indexed by characters chi_i, columns by the primes p_j of the
    factors; the diagonal entry chi_i(p_i) is evaluated through the
    complementary factor d/d_i, as usual for p_i dividing d_i.
    """
    qs = factor_discriminant(d)
    n = len(qs)
    mat = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                v = 1
                for l in range(n):
                    if l != i:
                        v *= kronecker(qs[l], _factor_prime(qs[i]))
                mat[i][j] = v
            else:
                mat[i][j] = kronecker(qs[i], _factor_prime(qs[j]))
    return mat


def genus_positivity(d: int, delta: int) -> bool:
    """True when every genus character of d takes value +1 on delta.

    delta must be a product of distinct factor primes of d (as the square
    root decompositions of units produce); character values at a factor
    prime use the complementary convention.
    """
    qs = factor_discriminant(d)
    mat = genus_character_matrix(d)
    rest = abs(delta)
    support = []
    for j, q in enumerate(qs):
        p = _factor_prime(q)
        if rest % p == 0:
            support.append(j)
            rest //= p
    if rest != 1:
        raise ValueError(f"{delta} is not a product of factor primes of {d}")
    for i in range(len(qs)):
        v = 1
        for j in support:
            v *= mat[i][j]
        if v != 1:
            return False
    return True


@dataclass(frozen=True)
class C4Splitting:
    """A factorization d = delta1 * delta2 with all cross symbols +1."""

    delta1: int
    delta2: int


def c4_splittings(d: int) -> list[C4Splitting]:
    """All splittings d = delta1*delta2 into coprime discriminant parts with
    (delta1/p) = +1 for every prime p | delta2 and conversely.

    delta1 is the part containing the prime discriminant of least absolute
    value.  Nonempty output forces 4 | h2+(d) (a cyclic quartic unramified
    extension exists).
    """
    qs = factor_discriminant(d)
    n = len(qs)
    out = []
    for mask in range(1, 2 ** (n - 1)):
        # factor qs[0] always goes to delta1: each unordered split once
        part1 = [qs[0]]
        part2 = []
        for i in range(1, n):
            (part1 if (mask >> (i - 1)) & 1 == 0 else part2).append(qs[i])
        d1 = math.prod(part1)
        d2 = math.prod(part2)
        ok = all(kronecker(d1, _factor_prime(q)) == 1 for q in part2) and all(
            kronecker(d2, _factor_prime(q)) == 1 for q in part1
        )
        if ok:
            out.append(C4Splitting(d1, d2))
    return out
