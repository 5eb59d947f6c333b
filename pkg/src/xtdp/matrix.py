"""Square matrices over F_p: the monoid M_d and the group GL(d, F_p).

Entries live in a read-only numpy array of canonical residues.  ``int64`` is
used whenever ``dim * (p-1)**2`` fits, which covers every 16-bit prime up to
``dim = 64``; larger configurations fall back to Python integers.
"""
from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DimMismatch, Singular
from .field import FieldElement, FieldParams


def _dtype_for(dim: int, p: int):
    return np.int64 if dim * (p - 1) ** 2 < 2**62 else object


class SquareMatrix:
    """An immutable ``dim x dim`` matrix with canonical entries mod ``p``."""

    __slots__ = ("_a", "params", "__dict__")

    def __init__(self, entries, params: FieldParams):
        arr = np.array(entries, dtype=object)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise DimMismatch(f"expected a non-empty square grid, got shape {arr.shape}")
        arr = np.array([[int(x) % params.p for x in row] for row in arr],
                       dtype=_dtype_for(arr.shape[0], params.p))
        arr.setflags(write=False)
        self._a = arr
        self.params = params

    @classmethod
    def _wrap(cls, arr: np.ndarray, params: FieldParams) -> SquareMatrix:
        # arr must already hold canonical residues
        m = cls.__new__(cls)
        arr.setflags(write=False)
        m._a = arr
        m.params = params
        return m

    @property
    def dim(self) -> int:
        return self._a.shape[0]

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the entries."""
        return self._a

    @property
    def p(self) -> int:
        return self.params.p

    def __getitem__(self, ij) -> int:
        return int(self._a[ij])

    def rows(self) -> list[list[int]]:
        return [[int(x) for x in row] for row in self._a]

    def entries(self) -> list[int]:
        """Row-major flat list of entries."""
        return [int(x) for x in self._a.flat]

    def _check(self, other: SquareMatrix) -> None:
        if not isinstance(other, SquareMatrix):
            raise TypeError(f"expected SquareMatrix, got {type(other).__name__}")
        if other.dim != self.dim:
            raise DimMismatch(f"dimension {self.dim} vs {other.dim}")
        if other.params != self.params:
            raise DimMismatch(f"field F_{self.p} vs F_{other.p}")

    def __matmul__(self, other: SquareMatrix) -> SquareMatrix:
        self._check(other)
        return SquareMatrix._wrap((self._a @ other._a) % self.p, self.params)

    def __add__(self, other: SquareMatrix) -> SquareMatrix:
        self._check(other)
        return SquareMatrix._wrap((self._a + other._a) % self.p, self.params)

    def __sub__(self, other: SquareMatrix) -> SquareMatrix:
        self._check(other)
        return SquareMatrix._wrap((self._a - other._a) % self.p, self.params)

    def scale(self, c: int) -> SquareMatrix:
        return SquareMatrix._wrap((self._a * (int(c) % self.p)) % self.p, self.params)

    def __eq__(self, other):
        if not isinstance(other, SquareMatrix):
            return NotImplemented
        return (self.params == other.params and self.dim == other.dim
                and bool(np.array_equal(self._a, other._a)))

    def __hash__(self):
        return hash((self.p, self.dim, tuple(self.entries())))

    def __repr__(self):
        return f"SquareMatrix({self.rows()}, p={self.p})"

    def is_identity(self) -> bool:
        return self == identity(self.dim, self.params)

    def is_diagonal(self) -> bool:
        return bool(np.count_nonzero(self._a - np.diag(np.diag(self._a))) == 0)

    def trace(self) -> int:
        return int(np.trace(self._a)) % self.p

    def det(self) -> int:
        return m_det(self)

    @cached_property
    def inverse(self) -> SquareMatrix:
        return m_inv(self)

    def is_invertible(self) -> bool:
        return self.det() != 0

    def power(self, n: int) -> SquareMatrix:
        if n < 0:
            return self.inverse.power(-n)
        result, base = identity(self.dim, self.params), self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result


def identity(dim: int, params: FieldParams) -> SquareMatrix:
    return SquareMatrix._wrap(np.eye(dim, dtype=_dtype_for(dim, params.p)), params)


def zeros(dim: int, params: FieldParams) -> SquareMatrix:
    return SquareMatrix._wrap(np.zeros((dim, dim), dtype=_dtype_for(dim, params.p)), params)


def diag(values: Sequence[int] | Iterable[int], params: FieldParams) -> SquareMatrix:
    vals = [int(v) % params.p for v in values]
    arr = np.zeros((len(vals), len(vals)), dtype=_dtype_for(len(vals), params.p))
    for i, v in enumerate(vals):
        arr[i, i] = v
    return SquareMatrix._wrap(arr, params)


def m_mul(a: SquareMatrix, b: SquareMatrix) -> SquareMatrix:
    return a @ b


def m_add(a: SquareMatrix, b: SquareMatrix) -> SquareMatrix:
    return a + b


def m_inv(a: SquareMatrix) -> SquareMatrix:
    """Gauss-Jordan inversion, pivoting on the first nonzero entry of each column."""
    n, p = a.dim, a.p
    aug = np.concatenate([a.array, np.eye(n, dtype=a.array.dtype)], axis=1)
    for col in range(n):
        nz = np.flatnonzero(aug[col:, col])
        if nz.size == 0:
            raise Singular(f"no pivot in column {col}")
        piv = col + int(nz[0])
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        aug[col] = (aug[col] * a.params.inv(int(aug[col, col]))) % p
        factors = aug[:, col].copy()
        factors[col] = 0
        aug = (aug - np.outer(factors, aug[col])) % p
    return SquareMatrix._wrap(np.ascontiguousarray(aug[:, n:]), a.params)


def m_det(a: SquareMatrix) -> FieldElement:
    n, p = a.dim, a.p
    work = a.array.copy()
    det = 1
    for col in range(n):
        nz = np.flatnonzero(work[col:, col])
        if nz.size == 0:
            return FieldElement(0, a.params)
        piv = col + int(nz[0])
        if piv != col:
            work[[col, piv]] = work[[piv, col]]
            det = -det
        pivot = int(work[col, col])
        det = det * pivot % p
        inv = a.params.inv(pivot)
        below = (work[col + 1:, col] * inv) % p
        work[col + 1:] = (work[col + 1:] - np.outer(below, work[col])) % p
    return FieldElement(det % p, a.params)


def conjugate(x: SquareMatrix, m: SquareMatrix) -> SquareMatrix:
    """``x^{-1} m x``."""
    return x.inverse @ m @ x


def commutator(a: SquareMatrix, b: SquareMatrix) -> SquareMatrix:
    """``[a, b] = a^{-1} b^{-1} a b``."""
    return a.inverse @ b.inverse @ a @ b


def m_charpoly(a: SquareMatrix) -> list[int]:
    """Coefficients of ``det(tI - a)``, leading coefficient first.

    Faddeev-LeVerrier; requires ``p > dim`` so that ``1..dim`` are invertible.
    """
    n, params = a.dim, a.params
    if params.p <= n:
        raise ValueError("charpoly via Faddeev-LeVerrier needs p > dim")
    coeffs = [1]
    eye = identity(n, params)
    m = zeros(n, params)
    c = 1
    for k in range(1, n + 1):
        m = a @ m + eye.scale(c)
        c = (-(a @ m).trace() * params.inv(k)) % params.p
        coeffs.append(c)
    return coeffs


class MatrixRng:
    """Seedable source of uniform residues, matrices and invertible matrices.

    Backed by numpy's PCG64; ``Generator.integers`` rejects out-of-range
    words, so residues are exactly uniform.  The pair ``(seed, stream)`` keys
    the stream: ``spawn(i)`` yields an independent child for trial ``i``.
    """

    def __init__(self, seed: int = 0, stream: tuple[int, ...] = ()):
        self.seed = int(seed) & (2**64 - 1)
        self.stream = tuple(stream)
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([self.seed, *self.stream]))
        )
        self.draws = 0
        self.rejections = 0

    def spawn(self, index: int) -> MatrixRng:
        return MatrixRng(self.seed, (*self.stream, int(index)))

    def residues(self, n: int, params: FieldParams, low: int = 0) -> list[int]:
        return [int(x) for x in self._gen.integers(low, params.p, size=n)]

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        return int(self._gen.integers(0, n))

    def bit(self) -> int:
        return self.below(2)

    def random_matrix(self, dim: int, params: FieldParams) -> SquareMatrix:
        arr = self._gen.integers(0, params.p, size=(dim, dim)).astype(_dtype_for(dim, params.p))
        return SquareMatrix._wrap(arr, params)

    def random_invertible(self, dim: int, params: FieldParams) -> SquareMatrix:
        while True:
            self.draws += 1
            m = self.random_matrix(dim, params)
            if m.det() != 0:
                return m
            self.rejections += 1


def random_invertible(rng: MatrixRng, dim: int, params: FieldParams) -> SquareMatrix:
    """Uniform element of GL(dim, F_p) by rejection of singular draws."""
    return rng.random_invertible(dim, params)
