"""Two-factor decomposition of public pieces over the public commutant algebras.

A legacy outer piece such as ``u = a1 x1`` with ``a1 = O^-1 D_a O`` and
``x1 = R^-1 D_x R`` satisfies ``O u R^-1 = D_a (O R^-1) D_x``.  Writing
``M = O R^-1`` and ``N = O u R^-1`` this is the entrywise system
``d_a[i] M[i,j] d_x[j] = N[i,j]``: ``2d`` unknowns tied by ``d^2`` equations
that propagate along the nonzero pattern of ``M``.  XTDP pieces carry a free
outer factor and fail the consistency check.

This is the simplest solver exploiting the public eigenbases, not a full
algebraic span attack.  It recovers factor pairs only and makes no claim
about recovering session keys.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .commutant import EigenBasis
from .errors import DimMismatch, Inconsistent, Singular
from .matrix import SquareMatrix, diag
from .protocol import Mode, PublicSetup, PublicTriple, Role


@dataclass(frozen=True)
class DecompositionInstance:
    target: SquareMatrix
    left_basis: EigenBasis
    right_basis: EigenBasis

    def __post_init__(self):
        d = self.target.dim
        if self.left_basis.dim != d or self.right_basis.dim != d:
            raise DimMismatch("bases and target dimensions differ")


@dataclass(frozen=True)
class Decomposition:
    """Diagonals of the left and right factors, gauge-fixed."""

    left: tuple[int, ...]
    right: tuple[int, ...]
    components: int

    def factors(self, inst: DecompositionInstance) -> tuple[SquareMatrix, SquareMatrix]:
        params = inst.target.params
        lb, rb = inst.left_basis, inst.right_basis
        return (lb.inverse @ diag(self.left, params) @ lb.matrix,
                rb.inverse @ diag(self.right, params) @ rb.matrix)

    def reassemble(self, inst: DecompositionInstance) -> SquareMatrix:
        f, g = self.factors(inst)
        return f @ g


def rank1_decompose(inst: DecompositionInstance) -> Decomposition:
    """Split ``inst.target`` as (element of alg(left)) * (element of alg(right)).

    Within each connected component of the bipartite support graph of ``M``
    the solution is unique up to ``d_a -> s d_a, d_x -> d_x / s``; the
    smallest-index ``d_x`` of every component is fixed to 1.

    Raises ``Inconsistent`` if the zero patterns of ``M`` and ``N`` differ or
    any equation fails after propagation.
    """
    target = inst.target
    if not target.is_invertible():
        raise Singular("decomposition target must be invertible")
    params, p, n = target.params, target.p, target.dim
    L, R = inst.left_basis, inst.right_basis
    M = (L.matrix @ R.inverse).array
    N = (L.matrix @ target @ R.inverse).array

    support = M != 0
    if not np.array_equal(support, N != 0):
        raise Inconsistent("zero patterns of M and N differ")

    d_a = [0] * n
    d_x = [0] * n
    components = 0
    for anchor in range(n):
        if d_x[anchor]:
            continue
        components += 1
        d_x[anchor] = 1
        queue = deque([("col", anchor)])
        while queue:
            side, k = queue.popleft()
            if side == "col":
                for i in np.flatnonzero(support[:, k]):
                    if not d_a[i]:
                        d_a[i] = int(N[i, k]) * params.inv(int(M[i, k]) * d_x[k]) % p
                        queue.append(("row", int(i)))
            else:
                for j in np.flatnonzero(support[k, :]):
                    if not d_x[j]:
                        d_x[j] = int(N[k, j]) * params.inv(int(M[k, j]) * d_a[k]) % p
                        queue.append(("col", int(j)))

    # An invertible M has no empty row, so every d_a was reached.
    a = np.array(d_a, dtype=object)
    x = np.array(d_x, dtype=object)
    predicted = (np.outer(a, x) * M.astype(object)) % p
    if not np.array_equal(predicted, N.astype(object)):
        bad = int(np.count_nonzero(predicted != N.astype(object)))
        raise Inconsistent(f"{bad} of {n * n} equations violated after propagation")
    return Decomposition(tuple(d_a), tuple(d_x), components)


# Bases of the two unknowns in each legacy outer piece, by owner role:
# initiator u = a1 x1 over (O, R), w = x2^-1 a3 over (S, Q);
# responder p = b1 y1 over (R, P), r = y2^-1 b3 over (Q, T).
OUTER_PIECE_BASES = {
    Role.INITIATOR: {"first": ("O", "R"), "third": ("S", "Q")},
    Role.RESPONDER: {"first": ("R", "P"), "third": ("Q", "T")},
}
PIECE_NAMES = {
    Role.INITIATOR: {"first": "u", "second": "v", "third": "w"},
    Role.RESPONDER: {"first": "p", "second": "q", "third": "r"},
}


@dataclass
class PieceResult:
    name: str
    bases: tuple[str, str]
    factor_count: int
    success: bool
    reassembles: bool = False
    decomposition: Decomposition | None = None
    reason: str = ""


@dataclass
class AttackReport:
    mode: Mode
    role: Role
    pieces: list[PieceResult] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    @property
    def successes(self) -> int:
        return sum(1 for r in self.pieces if r.success and r.reassembles)

    def summary(self) -> dict[str, str]:
        out = {
            "mode": self.mode.value,
            "role": self.role.value,
            "pieces_attacked": str(len(self.pieces)),
            "pieces_decomposed": str(self.successes),
            "pieces_skipped": ",".join(self.skipped),
            "claim": "factor_recovery_only",
        }
        for r in self.pieces:
            out[f"piece.{r.name}"] = "decomposed" if r.success and r.reassembles else "inconsistent"
        return out

    def to_text(self) -> str:
        lines = [f"two-factor decomposition attack on {self.mode.value} public key ({self.role.value})",
                 "scope: rank-1 solver over public eigenbases; not a full algebraic span attack"]
        for r in self.pieces:
            head = f"  {r.name} ({r.factor_count} factors) over ({r.bases[0]}, {r.bases[1]}): "
            if r.success:
                lines.append(head + f"decomposed, reassembly {'exact' if r.reassembles else 'FAILED'}")
                lines.append(f"    left diagonal  = {list(r.decomposition.left)}")
                lines.append(f"    right diagonal = {list(r.decomposition.right)}")
            else:
                lines.append(head + f"inconsistent ({r.reason})")
        for name in self.skipped:
            lines.append(f"  {name}: three-factor middle piece, not attacked")
        lines.append("  factor recovery only; session-key recovery is not claimed")
        lines.extend(f"{k}={v}" for k, v in self.summary().items())
        return "\n".join(lines)


def tdp_piece_attack_demo(setup: PublicSetup, pub: PublicTriple) -> AttackReport:
    """Attack both outer pieces of a public triple as two-factor instances.

    For legacy triples an ``Inconsistent`` result means the instance was
    malformed and is re-raised; for XTDP triples it is the expected outcome.
    """
    report = AttackReport(pub.mode, pub.role)
    names = PIECE_NAMES[pub.role]
    counts = dict(zip(("first", "second", "third"), pub.factor_counts))
    for slot in ("first", "third"):
        lb, rb = OUTER_PIECE_BASES[pub.role][slot]
        inst = DecompositionInstance(getattr(pub, slot), setup.basis(lb), setup.basis(rb))
        res = PieceResult(names[slot], (lb, rb), counts[slot], success=False)
        try:
            dec = rank1_decompose(inst)
        except Inconsistent as exc:
            if pub.mode is Mode.LEGACY:
                raise
            res.reason = str(exc)
        else:
            res.success = True
            res.decomposition = dec
            res.reassembles = dec.reassemble(inst) == inst.target
        report.pieces.append(res)
    report.skipped.append(names["second"])
    return report
