import math

import pytest

from xtdp.field import FieldParams
from xtdp.metrics import keyspace_report, scientific, storage_report


def power_by_squaring(base, exp):
    result = 1
    while exp:
        if exp & 1:
            result *= base
        base *= base
        exp >>= 1
    return result


def test_p8_cardinality():
    r = keyspace_report(8, FieldParams(251), 4)
    assert r.total_cardinality == power_by_squaring(249, 32)
    assert r.per_matrix_choices == power_by_squaring(249, 8)
    assert math.floor(math.log10(r.total_cardinality)) == 76
    assert r.scientific() == "4.77e76"
    assert 254.6 <= r.classical_bits <= 254.8
    assert math.isclose(r.quantum_bits, r.classical_bits / 2)
    assert r.storage_bits_per_matrix == 512


def test_p16_level():
    r = keyspace_report(16, FieldParams(251), 4)
    assert 509 <= r.classical_bits <= 510.5
    assert 254.5 <= r.quantum_bits <= 255.25
    assert r.storage_bits_per_matrix == 2048


def test_degenerate():
    r = keyspace_report(1, FieldParams(3), 1)
    assert r.total_cardinality == 1 and r.classical_bits == 0


@pytest.mark.parametrize("dim,p,m", [(8, 251, 4), (3, 7, 2), (16, 65521, 6)])
def test_log2_consistency(dim, p, m):
    r = keyspace_report(dim, FieldParams(p), m)
    assert abs(r.classical_bits - m * dim * math.log2(p - 2)) < 1e-9


def test_distinct_count_footnote():
    r = keyspace_report(8, FieldParams(251), 4)
    assert r.distinct_sampling_count == math.prod(range(243, 251))
    assert any(line.startswith("distinct_sampling_bits=") for line in r.lines())


def test_storage():
    P = FieldParams(251)
    assert storage_report(8, P) == 512
    assert storage_report(16, P) == 2048
    assert storage_report(1, P) == 8
    assert storage_report(2, FieldParams(7)) == 12


def test_scientific_rounding():
    assert scientific(4767) == "4.77e3"
    assert scientific(9996) == "1.00e4"
    assert scientific(5) == "5.00e0"


def test_rejects_zero_matrices():
    with pytest.raises(ValueError):
        keyspace_report(8, FieldParams(251), 0)
