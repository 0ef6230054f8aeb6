"""Small finite commutative rings with exact element tables.

Finite fields GF(p^n) and unramified extensions of Z/p^N, both presented as
coefficient tuples modulo a fixed irreducible polynomial.  The defining
polynomial for each (p, n) is the lexicographically least monic irreducible,
so element tables are reproducible across runs; the unramified extension uses
the same polynomial with its integer 0..p-1 coefficients.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product as iproduct


@lru_cache(maxsize=None)
def irreducible_polynomial(p, n):
    """Lexicographically least monic irreducible of degree n over F_p.

    Returned as an ascending coefficient tuple of length n + 1 (monic).
    """
    if n == 1:
        return (0, 1)

    def poly_mulmod(a, b, f):
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] = (out[i + j] + x * y) % p
        # reduce mod f (monic, degree n)
        for i in range(len(out) - 1, n - 1, -1):
            c = out[i]
            if c:
                out[i] = 0
                for j in range(n):
                    out[i - n + j] = (out[i - n + j] - c * f[j]) % p
        return tuple(out[:n] + [0] * (n - len(out)) if len(out) < n else out[:n])

    def is_irreducible(f):
        # x^(p^d) = x mod f has gcd checks; smallest: test that f has no roots
        # and no factor of degree <= n // 2 by trial division
        for r in range(p):
            v = 0
            for c in reversed(f):
                v = (v * r + c) % p
            if v == 0:
                return False
        # trial division by monic polynomials of degree 2..n//2
        for d in range(2, n // 2 + 1):
            for tail in iproduct(range(p), repeat=d):
                g = tuple(tail) + (1,)
                if _poly_divides(g, f, p):
                    return False
        return True

    for tail in iproduct(range(p), repeat=n):
        f = tuple(tail) + (1,)
        if is_irreducible(f):
            return f
    raise ValueError(f"no irreducible polynomial of degree {n} over F_{p}")


def _poly_divides(g, f, p):
    """Whether monic g divides f over F_p."""
    rem = list(f)
    dg = len(g) - 1
    for i in range(len(rem) - 1, dg - 1, -1):
        c = rem[i]
        if c:
            for j in range(dg + 1):
                rem[i - dg + j] = (rem[i - dg + j] - c * g[j]) % p
    return all(x == 0 for x in rem)


class QuotientPolyRing:
    """(Z/m)[x] / f(x) with f monic of degree n; elements are coefficient tuples."""

    def __init__(self, p, modulus, n):
        self.p = p
        self.modulus = modulus
        self.n = n
        self.poly = irreducible_polynomial(p, n)

    def zero(self):
        return (0,) * self.n

    def one(self):
        return ((1,) + (0,) * (self.n - 1)) if self.n else ()

    def gen(self):
        if self.n == 1:
            # x is a root of a linear polynomial: -constant term
            return ((-self.poly[0]) % self.modulus,)
        return (0, 1) + (0,) * (self.n - 2)

    def from_int(self, c):
        return ((c % self.modulus,) + (0,) * (self.n - 1)) if self.n else ()

    def add(self, a, b):
        return tuple((x + y) % self.modulus for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.modulus for x, y in zip(a, b))

    def neg(self, a):
        return tuple((-x) % self.modulus for x in a)

    def scale(self, c, a):
        return tuple((c * x) % self.modulus for x in a)

    def mul(self, a, b):
        n, m = self.n, self.modulus
        out = [0] * (2 * n - 1) if n else []
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[i + j] = (out[i + j] + x * y) % m
        for i in range(len(out) - 1, n - 1, -1):
            c = out[i]
            if c:
                out[i] = 0
                for j in range(n):
                    out[i - n + j] = (out[i - n + j] - c * self.poly[j]) % m
        return tuple(out[:n])

    def power(self, a, e):
        out = self.one()
        base = a
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    def is_unit(self, a):
        try:
            self.inverse(a)
            return True
        except ZeroDivisionError:
            return False

    def evaluate(self, coeffs, a):
        """Evaluate an integer polynomial (ascending coeffs) at a ring element."""
        out = self.zero()
        for c in reversed(coeffs):
            out = self.add(self.mul(out, a), self.from_int(c))
        return out

    def elements(self):
        for tup in iproduct(range(self.modulus), repeat=self.n):
            yield tuple(tup)

    def inverse(self, a):
        """Inverse by solving a linear system over Z/m (small n)."""
        from . import _intlinalg as la

        n, m = self.n, self.modulus
        cols = []
        for i in range(n):
            basis = tuple(1 if j == i else 0 for j in range(n))
            cols.append(self.mul(a, basis))
        rows = [[cols[j][i] for j in range(n)] + [m if k == i else 0 for k in range(n)] for i in range(n)]
        target = list(self.one())
        sol = la.solve([r for r in rows], target, 2 * n)
        if sol is None:
            raise ZeroDivisionError(f"{a} is not a unit")
        return tuple(x % m for x in sol[:n])


class GaloisField(QuotientPolyRing):
    """GF(p^n) as F_p[x]/f with the deterministic defining polynomial."""

    def __init__(self, p, n):
        super().__init__(p, p, n)

    def frobenius(self, a):
        return self.power(a, self.p)

    def size(self):
        return self.p**self.n


class UnramifiedExtension(QuotientPolyRing):
    """Unramified degree-n extension of Z/p^N: (Z/p^N)[x]/f, Hensel-lifted Frobenius."""

    def __init__(self, p, precision, n):
        super().__init__(p, p**precision, n)
        self.precision = precision
        self._frob_gen = self._lift_frobenius_root()

    def _lift_frobenius_root(self):
        """The root r of f with r = x^p mod p; Frobenius sends x to r."""
        f_coeffs = list(self.poly)
        fprime = [(i * c) % self.modulus for i, c in enumerate(f_coeffs)][1:]
        r = self.power(self.gen(), self.p)
        for _ in range(self.precision + 1):
            val = self.evaluate(f_coeffs, r)
            if all(x == 0 for x in val):
                break
            deriv = self.evaluate(fprime, r)
            r = self.sub(r, self.mul(val, self.inverse(deriv)))
        assert all(x == 0 for x in self.evaluate(f_coeffs, r)), "Hensel lift failed"
        return r

    def frobenius(self, a):
        out = self.zero()
        power = self.one()
        for c in a:
            if c:
                out = self.add(out, self.scale(c, power))
            power = self.mul(power, self._frob_gen)
        return out

    def frobenius_matrix(self, modulus=None):
        """Additive matrix of Frobenius on the power basis, optionally re-reduced."""
        m = modulus or self.modulus
        cols = []
        for i in range(self.n):
            basis = tuple(1 if j == i else 0 for j in range(self.n))
            cols.append(self.frobenius(basis))
        return [[cols[j][i] % m for j in range(self.n)] for i in range(self.n)]
