import pytest

from qtoroidal.contractions import (ContractionError, Primitive, contraction, current_poles, expand_contraction,
                                    verify_all_contractions, verify_contraction, verify_vacuum_products)
from qtoroidal.rootdata import build_root_datum
from qtoroidal.scalar import ONE, Q, Q1, ZERO, d_half, d_pow, q_pow, qint

G = lambda s, i: Primitive("G", s, i)
Cf = lambda s, k: Primitive("C", s, k)


@pytest.mark.parametrize("m,n", [(2, 1), (1, 2), (2, 3)])
def test_every_pair_matches_at_order_8(m, n):
    checks = verify_all_contractions(build_root_datum(m, n), R=8)
    bad = [c.to_dict() for c in checks if not c.ok]
    assert not bad
    assert {c.equation for c in checks} >= {"gii", "gij", "giim", "gijm", "cc1", "cc2"} - ({"cc1"} if n == 1 else set())


def test_opposite_signs_on_even_node():
    rd = build_root_datum(2, 1)
    form = contraction(G(1, 1), G(-1, 1), rd)
    assert form.sign == 1 and form.const == ONE
    assert sorted(e for _, e in form.factors) == [-1, -1]
    assert {r.canonical_str() for r, _ in form.factors} == {Q.canonical_str(), Q.inverse().canonical_str()}


def test_adjacent_nodes_same_sign():
    rd = build_root_datum(2, 1)
    form = contraction(G(1, 0), G(1, 1), rd)
    assert form.sign == rd.epsilon(0, 1)
    assert form.factors == ((d_pow(1) * q_pow(-1), -1),)
    # A = M = -1, so the displayed d^{A M / 2} is d^{1/2}; the zero-mode computation agrees
    assert form.const == d_half(1)
    assert verify_contraction(G(1, 0), G(1, 1), rd).ok


def test_fermion_pair():
    rd = build_root_datum(2, 1)
    form = contraction(Cf(1, 2), Cf(-1, 2), rd)
    assert form.factors == ((ONE, -1),)
    series = expand_contraction(form, 4)
    assert series == [ONE] * 5


def test_distinct_fermions_are_trivial():
    rd = build_root_datum(2, 3)
    for r_sign in (1, -1):
        check = verify_contraction(Cf(1, 3), Cf(r_sign, 4), rd, R=6)
        assert check.ok
        assert all(e == 0 for _, e in contraction(Cf(1, 3), Cf(r_sign, 4), rd).factors)


def test_same_sign_even_node_taylor_oracle():
    # log((1 - t)(1 - q^-2 t)) has coefficient -(1 + q^-2r)/r at t^r
    rd = build_root_datum(2, 1)
    form = contraction(G(1, 1), G(1, 1), rd)
    for r in range(1, 4):
        assert form.log_coefficient(r) == -(ONE + q_pow(-2 * r)) / r


def test_pole_of_e0_e1_sits_at_q1():
    rd = build_root_datum(2, 1)
    poles = current_poles("E", 0, "E", 1, rd)
    assert [loc for loc, order in poles if order > 0] == [Q1]


def test_mixed_pair_rejected():
    with pytest.raises(ContractionError):
        contraction(G(1, 1), Cf(1, 2), build_root_datum(2, 1))


def test_expansion_matches_binomial_series():
    rd = build_root_datum(2, 1)
    form = contraction(G(1, 1), G(-1, 1), rd)
    # 1/((1 - q t)(1 - q^-1 t)) = sum [k+1] t^k
    series = expand_contraction(form, 5)
    assert series == [qint(k + 1) for k in range(6)]
    assert ZERO not in series


@pytest.mark.parametrize("m,n", [(2, 1), (1, 2)])
def test_vacuum_products(m, n):
    checks = verify_vacuum_products(build_root_datum(m, n), K=4)
    assert checks and all(c.ok for c in checks), [c.to_dict() for c in checks if not c.ok]
