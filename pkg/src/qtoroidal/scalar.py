"""Exact rational functions in u = q^(1/2), v = d^(1/2) and the level c.

A :class:`Scalar` is a reduced fraction of two integer polynomials in
``(u, v, c)``.  Laurent monomials are absorbed into the denominator, so every
value has exactly one stored form and equality is structural.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

import flint

VARS = ("u", "v", "c")
CTX = flint.fmpz_mpoly_ctx.get(VARS, "lex")
_U, _V, _C = CTX.gens()
_ONE = CTX.from_dict({(0, 0, 0): 1})
_ZERO = CTX.from_dict({})

Number = Union[int, Fraction]


def _laurent_to_fraction(terms: Mapping[tuple, int]):
    """Split a Laurent polynomial dict into (poly numerator, monomial denominator)."""
    if not terms:
        return _ZERO, _ONE
    low = [min(e[k] for e in terms) for k in range(3)]
    shift = tuple(-x if x < 0 else 0 for x in low)
    num = CTX.from_dict({tuple(e[k] + shift[k] for k in range(3)): co for e, co in terms.items()})
    den = CTX.from_dict({shift: 1})
    return num, den


class Scalar:
    """Element of Q(u, v, c) held as a reduced fraction num/den."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None, _reduced: bool = False):
        if den is None:
            den = _ONE
        if not _reduced:
            if den.is_zero():
                raise ZeroDivisionError("zero denominator")
            if num.is_zero():
                num, den = _ZERO, _ONE
            elif not den.is_one():
                g = num.gcd(den)
                if not g.is_one():
                    num = num / g
                    den = den / g
                if den.leading_coefficient() < 0:
                    num, den = -num, -den
        self.num = num
        self.den = den
        self._hash = None

    # constructors -----------------------------------------------------
    @classmethod
    def from_number(cls, x: Number) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        x = Fraction(x)
        return cls(CTX.from_dict({(0, 0, 0): x.numerator}), CTX.from_dict({(0, 0, 0): x.denominator}),
                   _reduced=True)

    @classmethod
    def laurent(cls, terms: Mapping[tuple, Number]) -> "Scalar":
        """Build from {(eu, ev, ec): coefficient} with possibly negative exponents."""
        den_int = 1
        for co in terms.values():
            den_int = den_int * Fraction(co).denominator // _gcd(den_int, Fraction(co).denominator)
        ints = {e: int(Fraction(co) * den_int) for e, co in terms.items() if co != 0}
        num, den = _laurent_to_fraction(ints)
        if den_int != 1:
            den = den * den_int
        return cls(num, den)

    @classmethod
    def monomial(cls, eu: int = 0, ev: int = 0, ec: int = 0, coeff: Number = 1) -> "Scalar":
        return cls.laurent({(eu, ev, ec): coeff})

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.den.is_one() and other.den.is_one():
            return Scalar(self.num + other.num, _ONE, _reduced=True)
        if self.den == other.den:
            return Scalar(self.num + other.num, self.den)
        return Scalar(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self.den.is_one() and other.den.is_one():
            return Scalar(self.num * other.num, _ONE, _reduced=True)
        return Scalar(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return Scalar(self.den, self.num)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return Scalar(self.num ** k, self.den ** k, _reduced=True)

    # comparison -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return False
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((tuple(self.num.to_dict().items()), tuple(self.den.to_dict().items())))
        return self._hash

    # utilities --------------------------------------------------------
    def evaluate(self, u: Number, v: Number, c: Number = 1) -> Fraction:
        """Value at a rational point; raises ZeroDivisionError on a pole."""
        return _eval_poly(self.num, u, v, c) / _eval_poly(self.den, u, v, c)

    def substitute(self, images: Mapping[str, "Scalar"]) -> "Scalar":
        """Replace variables by Scalars (missing variables stay fixed)."""
        gens = [images.get(name, Scalar(g, _ONE, _reduced=True)) for name, g in zip(VARS, CTX.gens())]
        return _eval_with(self.num, gens) / _eval_with(self.den, gens)

    def canonical_str(self) -> str:
        if self.den.is_one():
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self) -> str:
        return f"Scalar({self.canonical_str()})"

    __str__ = canonical_str


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _coerce(x):
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Fraction)):
        return Scalar.from_number(x)
    return NotImplemented


def _eval_poly(p, u, v, c) -> Fraction:
    total = Fraction(0)
    pt = (Fraction(u), Fraction(v), Fraction(c))
    for (a, b, e), co in p.terms():
        total += int(co) * pt[0] ** int(a) * pt[1] ** int(b) * pt[2] ** int(e)
    return total


def _eval_with(p, gens) -> Scalar:
    total = ZERO
    for exps, co in p.terms():
        term = Scalar.from_number(int(co))
        for g, e in zip(gens, exps):
            if e:
                term = term * g ** int(e)
        total = total + term
    return total


ZERO = Scalar(_ZERO, _ONE, _reduced=True)
ONE = Scalar(_ONE, _ONE, _reduced=True)


def scalar(x) -> Scalar:
    """Coerce an int, Fraction or Scalar to a Scalar."""
    out = _coerce(x)
    if out is NotImplemented:
        raise TypeError(f"cannot coerce {type(x).__name__} to Scalar")
    return out


@lru_cache(maxsize=None)
def q_pow(k: int) -> Scalar:
    return Scalar.monomial(eu=2 * k)


@lru_cache(maxsize=None)
def d_pow(k: int) -> Scalar:
    return Scalar.monomial(ev=2 * k)


@lru_cache(maxsize=None)
def d_half(k: int) -> Scalar:
    """d^(k/2)."""
    return Scalar.monomial(ev=k)


@lru_cache(maxsize=None)
def c_pow(k: int) -> Scalar:
    return Scalar.monomial(ec=k)


Q = q_pow(1)
D = d_pow(1)
C = c_pow(1)
Q1 = D / Q
Q2 = Q * Q
Q3 = (D * Q).inverse()


@lru_cache(maxsize=None)
def qint(k: int) -> Scalar:
    """[k] = (q^k - q^-k)/(q - q^-1), built as the Laurent sum q^(k-1) + q^(k-3) + ... ."""
    if k < 0:
        return -qint(-k)
    return Scalar.laurent({(2 * (k - 1 - 2 * j), 0, 0): 1 for j in range(k)})


def scalar_eq(a: Scalar, b: Scalar, fast: bool = True, trials: int = 2, seed: int = 0) -> bool:
    """Equality of rational functions.

    The optional fast path evaluates both sides at random rational points; a
    mismatch there is conclusive, agreement falls through to the exact test.
    """
    a, b = scalar(a), scalar(b)
    if fast:
        rng = random.Random(seed)
        for _ in range(trials):
            pt = tuple(Fraction(rng.randint(2, 97), rng.randint(1, 13)) for _ in range(3))
            try:
                if a.evaluate(*pt) != b.evaluate(*pt):
                    return False
            except ZeroDivisionError:
                continue
    return a == b


def scalar_sum(items: Iterable[Scalar]) -> Scalar:
    total = ZERO
    for x in items:
        total = total + x
    return total
