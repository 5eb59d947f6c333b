"""Sanity checks on the reference arithmetic itself."""
import oracle


def test_bruteforce_and_adjugate_agree():
    p = 7
    a = [[1, 2], [3, 4]]
    assert oracle.inv_bruteforce(a, p) == oracle.inv_adjugate(a, p)
    assert oracle.mul(a, oracle.inv_adjugate(a, p), p) == oracle.eye(2)


def test_det_leibniz():
    assert oracle.det([[1, 2], [3, 4]], 7) == (4 - 6) % 7
    assert oracle.det(oracle.eye(3), 5) == 1
