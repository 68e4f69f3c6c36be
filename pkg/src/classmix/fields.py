"""Arithmetic in GF(p^k) with integer-encoded elements.

An element is encoded as an integer in [0, q): the base-p digits are the
polynomial coefficients, least significant digit = constant term.  The modulus
is a monic irreducible polynomial stored as little-endian coefficients of
length k + 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import NoIrreducibleFound, NonPrimeCharacteristic, UnsupportedParameters

MAX_FIELD_SIZE = 2**20

# Deterministic Miller-Rabin witnesses, valid for all n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
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


@dataclass(frozen=True)
class FieldSpec:
    """Description of GF(p^k): characteristic, degree, and modulus polynomial."""

    p: int
    k: int
    modulus: tuple[int, ...]  # little-endian, length k+1, monic

    @property
    def q(self) -> int:
        return self.p**self.k


# -- polynomial helpers over GF(p), little-endian coefficient tuples ---------


def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mulmod(a: list[int], b: list[int], mod: list[int], p: int) -> list[int]:
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            prod[i + j] = (prod[i + j] + ai * bj) % p
    return _poly_rem(prod, mod, p)


def _poly_rem(a: list[int], mod: list[int], p: int) -> list[int]:
    a = list(a)
    d = len(mod) - 1
    inv_lead = pow(mod[-1], p - 2, p)
    while len(a) > d:
        coef = a[-1] * inv_lead % p
        if coef:
            shift = len(a) - 1 - d
            for i, mi in enumerate(mod):
                a[shift + i] = (a[shift + i] - coef * mi) % p
        a.pop()
    return _poly_trim(a)


def _poly_powmod(base: list[int], e: int, mod: list[int], p: int) -> list[int]:
    result = [1]
    acc = _poly_rem(list(base), mod, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, acc, mod, p)
        acc = _poly_mulmod(acc, acc, mod, p)
        e >>= 1
    return result


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _poly_trim(list(a)), _poly_trim(list(b))
    while b:
        a, b = b, _poly_rem(a, b, p)
    return a


def is_irreducible(coeffs: tuple[int, ...] | list[int], p: int) -> bool:
    """Irreducibility over GF(p).

    Degree <= 3 reduces to a root check; in general we use the Frobenius
    criterion: x^(p^k) = x mod f, and gcd(x^(p^(k/r)) - x, f) = 1 for every
    prime r dividing k.
    """
    f = _poly_trim(list(coeffs))
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    if k <= 3:
        return all(_poly_eval(f, x, p) != 0 for x in range(p))
    x = [0, 1]
    xq = _poly_powmod(x, p**k, f, p)
    diff = _poly_trim([(a - b) % p for a, b in _zip_pad(xq, x)])
    if diff:
        return False
    for r in _prime_factors(k):
        xe = _poly_powmod(x, p ** (k // r), f, p)
        diff = _poly_trim([(a - b) % p for a, b in _zip_pad(xe, x)])
        g = _poly_gcd(f, diff, p)
        if len(g) - 1 > 0:
            return False
    return True


def _poly_eval(f: list[int], x: int, p: int) -> int:
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % p
    return acc


def _zip_pad(a: list[int], b: list[int]):
    n = max(len(a), len(b))
    return zip(a + [0] * (n - len(a)), b + [0] * (n - len(b)))


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def ff_make(p: int, k: int) -> FieldSpec:
    """Build the field spec for GF(p^k) with a deterministic modulus.

    The modulus is the first irreducible monic polynomial x^k + c_{k-1}x^{k-1}
    + ... + c_0 in ascending order of the integer encoding of (c_0, ..., c_{k-1})
    base p.  Reproducible by construction.
    """
    if k < 1:
        raise UnsupportedParameters(f"extension degree must be >= 1, got {k}")
    if not is_prime(p):
        raise NonPrimeCharacteristic(f"characteristic {p} is not prime")
    if p**k > MAX_FIELD_SIZE:
        raise UnsupportedParameters(f"field size {p}^{k} exceeds {MAX_FIELD_SIZE}")
    for m in range(p**k):
        coeffs = _digits(m, p, k) + [1]
        if is_irreducible(coeffs, p):
            return FieldSpec(p=p, k=k, modulus=tuple(coeffs))
    raise NoIrreducibleFound(f"no irreducible monic polynomial of degree {k} over GF({p})")


def _digits(m: int, p: int, k: int) -> list[int]:
    out = []
    for _ in range(k):
        out.append(m % p)
        m //= p
    return out


_TABLE_LIMIT = 512


class Field:
    """Concrete arithmetic for a FieldSpec; elements are ints in [0, q).

    For q <= 512 full multiplication/addition tables are precomputed, which is
    the regime every group engine under the enumeration cap lives in.
    """

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        self.p = spec.p
        self.k = spec.k
        self.q = spec.q
        self._mod_list = list(spec.modulus)
        if self.q <= _TABLE_LIMIT:
            self._add = [[self._add_raw(a, b) for b in range(self.q)] for a in range(self.q)]
            self._mul = [[self._mul_raw(a, b) for b in range(self.q)] for a in range(self.q)]
            self._neg = [self._neg_raw(a) for a in range(self.q)]
            self._inv = self._build_inverses()
        else:
            self._add = self._mul = self._neg = self._inv = None

    # raw (table-free) arithmetic -------------------------------------------

    def _decode(self, a: int) -> list[int]:
        return _digits(a, self.p, self.k)

    def _encode(self, coeffs: list[int]) -> int:
        acc = 0
        for c in reversed(coeffs):
            acc = acc * self.p + c
        return acc

    def _add_raw(self, a: int, b: int) -> int:
        da, db = self._decode(a), self._decode(b)
        return self._encode([(x + y) % self.p for x, y in zip(da, db)])

    def _neg_raw(self, a: int) -> int:
        return self._encode([(-x) % self.p for x in self._decode(a)])

    def _mul_raw(self, a: int, b: int) -> int:
        if self.k == 1:
            return a * b % self.p
        prod = _poly_mulmod(_poly_trim(self._decode(a)), _poly_trim(self._decode(b)), self._mod_list, self.p)
        prod += [0] * (self.k - len(prod))
        return self._encode(prod)

    def _build_inverses(self) -> list[int | None]:
        inv: list[int | None] = [None] * self.q
        for a in range(1, self.q):
            if inv[a] is not None:
                continue
            b = self._pow_raw(a, self.q - 2)
            inv[a] = b
            inv[b] = a
        return inv

    def _pow_raw(self, a: int, e: int) -> int:
        result = 1
        acc = a
        while e:
            if e & 1:
                result = self._mul_raw(result, acc)
            acc = self._mul_raw(acc, acc)
            e >>= 1
        return result

    # public ops -------------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self._add is not None:
            return self._add[a][b]
        return self._add_raw(a, b)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def neg(self, a: int) -> int:
        if self._neg is not None:
            return self._neg[a]
        return self._neg_raw(a)

    def mul(self, a: int, b: int) -> int:
        if self._mul is not None:
            return self._mul[a][b]
        return self._mul_raw(a, b)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in a finite field")
        if self._inv is not None:
            value = self._inv[a]
            assert value is not None
            return value
        return self._pow_raw(a, self.q - 2)

    @property
    def one(self) -> int:
        return 1

    @property
    def zero(self) -> int:
        return 0

    def generator_candidates(self) -> list[int]:
        """Elements whose powers of x span the field additively: x itself.

        Returned as the encodings of x^0 .. x^(k-1); used by the matrix group
        builders to seed transvections for every basis direction.
        """
        return [self.p**i for i in range(self.k)]


@lru_cache(maxsize=None)
def field(p: int, k: int) -> Field:
    return Field(ff_make(p, k))


def field_for_size(q: int) -> Field:
    """Field of size q; raises UnsupportedParameters when q is not a prime power."""
    if q < 2:
        raise UnsupportedParameters(f"field size must be >= 2, got {q}")
    for p in range(2, q + 1):
        if q % p == 0:
            if not is_prime(p):
                break
            k = 0
            m = q
            while m % p == 0:
                m //= p
                k += 1
            if m != 1:
                break
            return field(p, k)
    raise UnsupportedParameters(f"{q} is not a prime power")
