"""Commuting subgroups built from public eigenbases.

Every private element is ``E^{-1} diag(lambda) E`` for one of six public
bases ``E``; two elements sharing a basis commute exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .errors import DimMismatch, FieldTooSmall
from .field import FieldParams
from .matrix import MatrixRng, SquareMatrix, commutator, diag

BASIS_LABELS = ("O", "P", "Q", "R", "S", "T")


@dataclass(frozen=True)
class EigenvalueVector:
    """``dim`` pairwise distinct nonzero residues."""

    values: tuple[int, ...]
    params: FieldParams

    def __post_init__(self):
        p = self.params.p
        if any(not 0 < v < p for v in self.values):
            raise ValueError(f"eigenvalues must be nonzero canonical residues: {self.values}")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"eigenvalues must be pairwise distinct: {self.values}")

    def __len__(self):
        return len(self.values)

    def inverse(self) -> EigenvalueVector:
        return EigenvalueVector(tuple(self.params.inv(v) for v in self.values), self.params)


@dataclass(frozen=True)
class EigenBasis:
    label: str
    matrix: SquareMatrix

    def __post_init__(self):
        if not self.matrix.is_invertible():
            raise ValueError(f"basis {self.label} is singular")

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @cached_property
    def inverse(self) -> SquareMatrix:
        return self.matrix.inverse


def sample_eigenvalues(rng: MatrixRng, dim: int, params: FieldParams) -> EigenvalueVector:
    """Uniform ordered draw of ``dim`` distinct values from ``1..p-1`` (partial Fisher-Yates)."""
    if params.p - 1 < dim:
        raise FieldTooSmall(f"p={params.p} cannot supply {dim} distinct nonzero eigenvalues")
    pool = list(range(1, params.p))
    n = len(pool)
    for i in range(dim):
        j = i + rng.below(n - i)
        pool[i], pool[j] = pool[j], pool[i]
    return EigenvalueVector(tuple(pool[:dim]), params)


def conjugated_diag(basis: EigenBasis, eig: EigenvalueVector | Sequence[int]) -> SquareMatrix:
    """``basis^{-1} . diag(eig) . basis``.

    Accepts a raw sequence as well so callers can build degenerate elements
    (repeated eigenvalues) on purpose.
    """
    values = eig.values if isinstance(eig, EigenvalueVector) else tuple(eig)
    if len(values) != basis.dim:
        raise DimMismatch(f"{len(values)} eigenvalues for a {basis.dim}-dimensional basis")
    return basis.inverse @ diag(values, basis.matrix.params) @ basis.matrix


# (label, basis, initiator attribute, responder attribute)
COMMUTING_PAIRS = (
    ("[a1,y0]", "O", "a1", "y0"),
    ("[a2,y1]", "P", "a2", "y1"),
    ("[a3,y2]", "Q", "a3", "y2"),
    ("[b1,x1]", "R", "x1", "b1"),
    ("[b2,x2]", "S", "x2", "b2"),
    ("[b3,x3]", "T", "x3", "b3"),
)


def verify_commutation_pairs(setup, alice_priv, bob_priv) -> list[tuple[str, bool]]:
    """Evaluate the six cross-party commutators and report which equal I."""
    out = []
    for label, _basis, a_attr, b_attr in COMMUTING_PAIRS:
        a = getattr(alice_priv, a_attr)
        b = getattr(bob_priv, b_attr)
        if a.dim != setup.dim or b.dim != setup.dim:
            raise DimMismatch("private key dimension does not match setup")
        first, second = (a, b) if label.startswith("[a") else (b, a)
        out.append((label, commutator(first, second).is_identity()))
    return out
