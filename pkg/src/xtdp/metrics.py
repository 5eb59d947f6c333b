"""Key-space cardinality and storage figures for the diagonal private keys."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .field import FieldParams


@dataclass(frozen=True)
class KeyspaceReport:
    dim: int
    p: int
    per_matrix_choices: int
    matrices: int
    total_cardinality: int
    classical_bits: float
    quantum_bits: float
    storage_bits_per_matrix: int
    distinct_sampling_count: int

    def scientific(self, digits: int = 3) -> str:
        return scientific(self.total_cardinality, digits)

    def lines(self) -> list[str]:
        return [
            f"dim={self.dim}",
            f"prime={self.p}",
            f"matrices={self.matrices}",
            f"per_matrix_choices={self.p - 2}^{self.dim}",
            f"total_cardinality={self.scientific()}",
            f"total_cardinality_exact={self.total_cardinality}",
            f"classical_bits={self.classical_bits:.1f}",
            f"classical_level=2^{self.classical_bits:.1f}",
            f"quantum_bits={self.quantum_bits:.1f}",
            f"storage_bits_per_matrix={self.storage_bits_per_matrix}",
            # (p-2) per slot reproduces the published figure; the sampler
            # actually draws distinct nonzero values, counted here.
            f"distinct_sampling_bits={_log2(self.distinct_sampling_count) * self.matrices:.1f}",
        ]


def _log2(n: int) -> float:
    if n <= 0:
        raise ValueError("log2 of a non-positive integer")
    # exact for big integers: shift to a float-sized mantissa first
    shift = max(n.bit_length() - 64, 0)
    return math.log2(n >> shift) + shift


def scientific(n: int, digits: int = 3) -> str:
    """Round a big integer to ``digits`` significant figures, e.g. ``4.77e76``."""
    if n == 0:
        return "0"
    s = str(n)
    exp = len(s) - 1
    lead = int(s[:digits + 1]) if len(s) > digits else int(s) * 10 ** (digits + 1 - len(s))
    mant = (lead + 5) // 10
    if mant >= 10**digits:
        mant //= 10
        exp += 1
    m = str(mant)
    return f"{m[0]}.{m[1:]}e{exp}" if digits > 1 else f"{m}e{exp}"


def storage_report(dim: int, params: FieldParams) -> int:
    """Bits to store one ``dim x dim`` matrix at ``ceil(log2 p)`` bits per entry."""
    return dim * dim * params.p.bit_length()


def keyspace_report(dim: int, params: FieldParams, matrices: int) -> KeyspaceReport:
    """Brute-force search space over ``matrices`` private diagonals of size ``dim``.

    Uses ``p - 2`` independent choices per eigenvalue slot, the counting
    behind the published ``249^32`` figure for ``d=8, p=251``.
    """
    if matrices < 1:
        raise ValueError("matrices must be >= 1")
    per = (params.p - 2) ** dim
    total = per ** matrices
    bits = matrices * dim * math.log2(params.p - 2)
    distinct = math.perm(params.p - 1, dim)
    return KeyspaceReport(dim, params.p, per, matrices, total, bits, bits / 2,
                          storage_report(dim, params), distinct)
