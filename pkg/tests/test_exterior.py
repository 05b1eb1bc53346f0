import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistorforms.exterior import (
    AlternatingForm,
    basis,
    basis_form,
    contract,
    contract_matrix,
    covector,
    hodge_matrix,
    hodge_star,
    inner,
    popcount,
    random_form,
    volume_form,
    wedge,
    wedge_matrix,
)


def e(n, *idx):
    # 1-based indices, as forms are usually written by hand
    return basis_form(n, *[i - 1 for i in idx])


def test_basis_sizes_and_popcount():
    for n in range(0, 7):
        for p in range(n + 1):
            b = basis(n, p)
            assert len(b) == comb(n, p)
            assert all(popcount(x) == p and x < 2**n for x in b)


def antiderivation_rhs(x, a, b):
    # x⌟(function) is the zero function, so that term drops out entirely
    out = (-1) ** a.degree * wedge(a, contract(x, b)) if b.degree else None
    if a.degree:
        first = wedge(contract(x, a), b)
        out = first if out is None else out + first
    return out if out is not None else AlternatingForm.zero(a.dim, 0)


def test_wedge_examples():
    n = 4
    assert wedge(e(n, 1), e(n, 2)) == e(n, 1, 2)
    assert wedge(e(n, 2), e(n, 1)) == -e(n, 1, 2)
    assert wedge(e(n, 1, 2), e(n, 1, 3)).norm() == 0.0


def test_contract_examples():
    n = 3
    x1 = covector(n, [1, 0, 0])
    x3 = covector(n, [0, 0, 1])
    assert contract(x1, e(n, 1, 2)) == e(n, 2)
    assert contract(x3, e(n, 1, 2)).norm() == 0.0
    # contraction of a function is the zero form, not an error
    z = contract(x1, AlternatingForm.scalar(n, 2.0))
    assert z.degree == 0 and z.norm() == 0.0


def test_inner_examples():
    assert inner(e(4, 1, 2), e(4, 1, 2)) == 1.0
    assert inner(e(4, 1, 2), e(4, 1, 3)) == 0.0
    for m in range(1, 5):
        n = 2 * m
        omega = sum((e(n, 2 * k + 1, 2 * k + 2) for k in range(1, m)), e(n, 1, 2))
        assert inner(omega, omega) == pytest.approx(m)


def test_hodge_examples():
    assert hodge_star(e(2, 1)) == e(2, 2)
    assert hodge_star(e(2, 2)) == -e(2, 1)
    for n in (1, 3, 5):
        assert hodge_star(AlternatingForm.scalar(n, 1.0)) == volume_form(n)
    omega = e(4, 1, 2) + e(4, 3, 4)
    assert hodge_star(omega).allclose(omega)


@pytest.mark.parametrize("n", range(1, 9))
def test_wedge_contract_adjoint_exhaustive(n):
    # <x∧a, b> = <a, x⌟b> on every basis pair is exactly W^T = C
    for p in range(n):
        for i in range(n):
            np.testing.assert_array_equal(contract_matrix(n, p + 1, i), wedge_matrix(n, p, i).T)


@pytest.mark.parametrize("n", range(1, 7))
def test_antiderivation_exhaustive(n):
    forms = [basis_form(n, *I) for p in range(n + 1) for I in itertools.combinations(range(n), p)]
    xs = [covector(n, np.eye(n)[i]) for i in range(n)]
    for a, b in itertools.product(forms, forms):
        if a.degree + b.degree > n:
            continue
        ab = wedge(a, b)
        for x in xs:
            assert contract(x, ab) == antiderivation_rhs(x, a, b)


@pytest.mark.parametrize("n", range(1, 9))
def test_double_hodge_sign(n):
    for p in range(n + 1):
        twice = hodge_matrix(n, n - p) @ hodge_matrix(n, p)
        np.testing.assert_allclose(twice, (-1) ** (p * (n - p)) * np.eye(comb(n, p)), atol=1e-15)


@st.composite
def form_pairs(draw, max_dim=8):
    n = draw(st.integers(1, max_dim))
    p = draw(st.integers(0, n))
    q = draw(st.integers(0, n - p))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return random_form(n, p, rng), random_form(n, q, rng), rng.standard_normal(n)


@settings(max_examples=80, deadline=None)
@given(form_pairs())
def test_antiderivation_random(pair):
    a, b, xv = pair
    x = covector(a.dim, xv)
    lhs = contract(x, wedge(a, b))
    rhs = antiderivation_rhs(x, a, b)
    assert lhs.allclose(rhs, atol=1e-10 * (1 + a.norm() * b.norm() * np.linalg.norm(xv)))


@settings(max_examples=60, deadline=None)
@given(form_pairs())
def test_graded_commutativity(pair):
    a, b, _ = pair
    assert wedge(a, b).allclose((-1) ** (a.degree * b.degree) * wedge(b, a), atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(form_pairs())
def test_star_is_isometry(pair):
    a, _, _ = pair
    assert hodge_star(a).norm() == pytest.approx(a.norm(), rel=1e-12, abs=1e-14)
    assert hodge_star(a).degree == a.dim - a.degree


def test_storage_degree_is_enforced():
    with pytest.raises(ValueError):
        AlternatingForm(3, 4)
    a = AlternatingForm.from_terms(4, {0b0011: 2.0, 0b0101: -1.0})
    assert a.degree == 2
    assert a.terms() == {0b0011: 2.0, 0b0101: -1.0}
    with pytest.raises(ValueError):
        AlternatingForm.from_terms(4, {0b0011: 1.0, 0b0111: 1.0})


def test_mismatched_dimensions_rejected():
    with pytest.raises(ValueError):
        e(3, 1) + e(4, 1)
