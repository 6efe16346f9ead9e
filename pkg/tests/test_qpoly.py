import itertools
import json
from collections import Counter
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from combtelescope.errors import ContractError
from combtelescope.partition import enumerate_even_exact
from combtelescope.qpoly import (BiPoly, eval_a_one, gaussian_binomial, pochhammer_inv_series,
                                 summand, theta_series)


def P(terms, trunc=None):
    return BiPoly(terms, trunc)


def q_only(coeffs, trunc=None):
    return BiPoly.from_q_coeffs(coeffs, trunc)


def box_oracle(rows, cols):
    """q-weight counts of partitions in a rows x cols box, by brute force."""
    counts = Counter()
    for t in itertools.product(range(cols + 1), repeat=rows):
        if all(t[i] >= t[i + 1] for i in range(len(t) - 1)):
            counts[sum(t)] += 1
    return q_only([counts[w] for w in range(rows * cols + 1)])


# -- add / mul --------------------------------------------------------------

def test_add_inverse():
    p = P({(0, 0): 1, (1, 2): 1})
    assert p + P({(1, 2): -1}) == BiPoly.one()


def test_add_identity():
    p = P({(0, 0): 3, (2, 5): -1})
    assert p + BiPoly.zero() == p


def test_add_truncates():
    s = q_only([0, 1, 1], 2) + q_only([0, 0, 1, 1])
    assert s == q_only([0, 1, 2])
    assert s.trunc == 2


def test_mul_telescoping_product():
    assert q_only([1, -1], 2) * q_only([1, 1, 1], 2) == BiPoly.one()


def test_mul_identity_and_square():
    p = P({(0, 0): 1, (1, 1): 1})
    assert p * BiPoly.one() == p
    assert p * p == P({(0, 0): 1, (1, 1): 2, (2, 2): 1})


def test_mismatched_truncation_rejected():
    with pytest.raises(ContractError):
        BiPoly.one(3) + BiPoly.one(4)
    with pytest.raises(ContractError):
        BiPoly.one(3) * BiPoly.one(4)


def test_zero_coefficients_not_stored():
    p = P({(0, 1): 2}) - P({(0, 1): 2})
    assert p.is_zero() and len(p) == 0


monomials = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 8)),
                            st.integers(-5, 5), max_size=6)


@given(monomials, monomials, monomials, st.one_of(st.none(), st.integers(0, 10)))
@settings(max_examples=60, deadline=None)
def test_ring_laws(x, y, z, trunc):
    a, b, c = P(x, trunc), P(y, trunc), P(z, trunc)
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert all(c != 0 for c in (a * b).terms.values())
    if trunc is not None:
        assert (a * b).q_degree() <= trunc


# -- gaussian binomial ------------------------------------------------------

@pytest.mark.parametrize("m, j, expected", [
    (2, 1, [1, 1]),
    (4, 2, [1, 1, 2, 1, 1]),
    (3, 0, [1]),
])
def test_gaussian_examples(m, j, expected):
    assert gaussian_binomial(m, j) == q_only(expected)
    assert gaussian_binomial(m, j) == box_oracle(j, m - j)


@pytest.mark.parametrize("m, j", [(2, -1), (2, 3), (0, 1)])
def test_gaussian_out_of_range(m, j):
    assert gaussian_binomial(m, j).is_zero()


def test_gaussian_matches_box_enumeration():
    for m in range(9):
        for j in range(m + 1):
            assert gaussian_binomial(m, j) == box_oracle(j, m - j), (m, j)


def test_gaussian_truncated():
    assert gaussian_binomial(4, 2, 2) == q_only([1, 1, 2])


def test_gaussian_structure():
    for m in range(13):
        for j in range(m + 1):
            g = gaussian_binomial(m, j)
            assert g == gaussian_binomial(m, m - j)
            assert g.q_degree() == j * (m - j)
            assert all(c > 0 for c in g.q_coeffs())
            assert sum(g.q_coeffs()) == comb(m, j)
            if 1 <= j <= m - 1:
                pascal = gaussian_binomial(m - 1, j - 1) + gaussian_binomial(m - 1, j).shift(q_exp=j)
                assert g == pascal


# -- pochhammer -------------------------------------------------------------

def test_pochhammer_examples():
    assert pochhammer_inv_series(0, 10) == BiPoly.one()
    assert pochhammer_inv_series(1, 6) == P({(0, 0): 1, (1, 2): 1, (2, 4): 1, (3, 6): 1})
    assert pochhammer_inv_series(2, 4) == P({(0, 0): 1, (1, 2): 1, (1, 4): 1, (2, 4): 1})


def test_pochhammer_times_product_is_one():
    for m in range(9):
        trunc = 30
        prod = BiPoly.one(trunc)
        for i in range(1, m + 1):
            prod = prod * P({(0, 0): 1, (1, 2 * i): -1}, trunc)
        assert pochhammer_inv_series(m, trunc) * prod == BiPoly.one(trunc)


def brute_even_parts(length, m, w):
    return sum(1 for c in itertools.combinations_with_replacement(range(2, 2 * m + 1, 2), length)
               if sum(c) == w)


def test_pochhammer_counts_even_partitions():
    for m in range(1, 6):
        series = pochhammer_inv_series(m, 30)
        for w in range(31):
            for length in range(w // 2 + 1):
                assert series.coeff(length, w) == brute_even_parts(length, m, w), (m, w, length)


def test_pochhammer_matches_partition_module():
    for m in range(6):
        trunc = 24
        acc = BiPoly.zero(trunc)
        for length in range(trunc // 2 + 1):
            for mu in enumerate_even_exact(length, 2 * m, trunc):
                acc += BiPoly.monomial(length, mu.size, 1, trunc)
        assert acc == pochhammer_inv_series(m, trunc)


def test_pochhammer_needs_truncation():
    with pytest.raises(ContractError):
        pochhammer_inv_series(2, None)


# -- theta / summand / specialisation ---------------------------------------

def test_theta_series():
    assert theta_series(1, 10) == P({(1, 1): -1, (2, 4): 1, (3, 9): -1})
    assert theta_series(0, 10) == P({(0, 0): 1, (1, 1): -1, (2, 4): 1, (3, 9): -1})
    assert theta_series(1, 0).is_zero()


def test_summand_examples():
    assert summand("P", 0, 0, 10).is_zero()
    assert summand("Q", 0, 0, 10) == BiPoly.one()
    assert summand("P", 1, 1, 5) == P({(1, 1): -1, (2, 3): -1, (3, 5): -1})


def test_summand_outside_binomial_range_vanishes():
    assert summand("P", 2, 2, 20).is_zero()
    assert summand("Q", 3, 2, 20).is_zero()


def test_eval_a_one():
    assert eval_a_one(P({(0, 0): 1, (1, 1): -1, (2, 4): 1})) == q_only([1, -1, 0, 0, 1])
    assert eval_a_one(P({(1, 2): 1, (2, 2): 1})) == q_only([0, 0, 2])
    assert eval_a_one(theta_series(1, 9)) == P({(0, 1): -1, (0, 4): 1, (0, 9): -1})


# -- serialization ----------------------------------------------------------

def test_canonical_records_and_round_trips():
    p = P({(2, 4): 1, (0, 4): 3, (1, 1): -1})
    assert p.records() == [(1, 1, -1), (0, 4, 3), (2, 4, 1)]
    assert json.loads(p.to_json()) == [[1, 1, -1], [0, 4, 3], [2, 4, 1]]
    assert p.to_csv().splitlines()[0] == "a_exp,q_exp,coeff"
    assert BiPoly.from_json(p.to_json()) == p
    assert BiPoly.from_csv(p.to_csv()) == p


def test_str():
    assert str(theta_series(0, 10)) == "1 - a*q + a^2*q^4 - a^3*q^9"
    assert str(BiPoly.zero()) == "0"
