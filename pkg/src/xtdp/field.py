"""Scalar arithmetic in the prime field F_p."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import FieldTooSmall, NotPrime, ZeroInverse

# Bases 2..37 make Miller-Rabin deterministic well past 2**64.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

DEFAULT_PRIME = 251
DEFAULT_DIM = 8


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, s, t)`` with ``s*a + t*b == g == gcd(a, b)``."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return a, s0, t0


@dataclass(frozen=True)
class FieldParams:
    p: int = DEFAULT_PRIME

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 3 or not is_prime(self.p):
            raise NotPrime(f"{self.p!r} is not a prime >= 3")

    def check_dim(self, dim: int) -> None:
        """Require ``p >= dim + 2`` so that ``dim`` distinct nonzero residues exist."""
        if self.p - 1 < dim:
            raise FieldTooSmall(
                f"p={self.p} has only {self.p - 1} nonzero residues, need {dim} distinct"
            )

    @property
    def entry_bits(self) -> int:
        return self.p.bit_length()

    @property
    def entry_width(self) -> int:
        """Bytes per entry on the wire."""
        return (self.entry_bits + 7) // 8

    def element(self, value: int) -> FieldElement:
        return FieldElement(value % self.p, self)

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroInverse("0 has no multiplicative inverse")
        _, s, _ = egcd(a, self.p)
        return s % self.p


@dataclass(frozen=True)
class FieldElement:
    value: int
    params: FieldParams

    def __post_init__(self):
        if not 0 <= self.value < self.params.p:
            raise ValueError(f"{self.value} is not a canonical residue mod {self.params.p}")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.params != self.params:
                raise ValueError("field mismatch")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        return self.params.element(self.value + b)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        return self.params.element(self.value - b)

    def __rsub__(self, other):
        b = self._coerce(other)
        return self.params.element(b - self.value)

    def __mul__(self, other):
        b = self._coerce(other)
        return self.params.element(self.value * b)

    __rmul__ = __mul__

    def __neg__(self):
        return self.params.element(-self.value)

    def __truediv__(self, other):
        b = self._coerce(other)
        return self * self.params.inv(b)

    def inverse(self) -> FieldElement:
        return FieldElement(self.params.inv(self.value), self.params)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.value == other.value and self.params == other.params
        if isinstance(other, int):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.params.p))

    def __int__(self):
        return self.value

    __index__ = __int__

    def __repr__(self):
        return f"{self.value} (mod {self.params.p})"


Scalar = Union[int, FieldElement]


def _val(x: Scalar, params: FieldParams) -> int:
    if isinstance(x, FieldElement):
        return x.value
    return int(x) % params.p


def f_add(a: Scalar, b: Scalar, params: FieldParams) -> FieldElement:
    return params.element(_val(a, params) + _val(b, params))


def f_sub(a: Scalar, b: Scalar, params: FieldParams) -> FieldElement:
    return params.element(_val(a, params) - _val(b, params))


def f_mul(a: Scalar, b: Scalar, params: FieldParams) -> FieldElement:
    return params.element(_val(a, params) * _val(b, params))


def f_inv(a: Scalar, params: FieldParams) -> FieldElement:
    return FieldElement(params.inv(_val(a, params)), params)
