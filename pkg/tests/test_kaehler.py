from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistorforms.exterior import AlternatingForm, basis_form, random_form, volume_form, wedge
from twistorforms.kaehler import (
    KaehlerFrame,
    admissible_types,
    commutator_Lambda_Ls,
    j_extension,
    lambda_l_eigencheck,
    lambda_l_eigenvalue,
    lambda_power_coefficient,
    lefschetz_decompose,
    lefschetz_L,
    lefschetz_Lambda,
    type_project,
)


def e(n, *idx):
    return basis_form(n, *[i - 1 for i in idx])


def one(n):
    return AlternatingForm.scalar(n, 1.0)


def test_frame_structure():
    for m in range(1, 6):
        f = KaehlerFrame(m)
        np.testing.assert_array_equal(f.J @ f.J, -np.eye(f.n))
        assert f.omega.norm() ** 2 == pytest.approx(m)
        # ω(X, Y) = <JX, Y> on basis vectors
        for a in range(f.n):
            for b in range(f.n):
                wab = f.omega.coeffs @ wedge(
                    AlternatingForm(f.n, 1, np.eye(f.n)[a]), AlternatingForm(f.n, 1, np.eye(f.n)[b])).coeffs
                assert wab == pytest.approx(f.J[:, a] @ np.eye(f.n)[b])
    with pytest.raises(ValueError):
        KaehlerFrame(0)


def test_lefschetz_examples():
    f = KaehlerFrame(2)
    assert lefschetz_L(f, one(4)) == f.omega
    assert lefschetz_L(f, e(4, 1)) == wedge(f.omega, e(4, 1))
    assert lefschetz_L(f, f.omega) == 2 * e(4, 1, 2, 3, 4)
    assert lefschetz_Lambda(f, f.omega).coeffs[0] == pytest.approx(2)
    assert lefschetz_Lambda(f, e(4, 1, 2) - e(4, 3, 4)).norm() == 0.0
    assert lefschetz_Lambda(f, one(4)).norm() == 0.0
    for m in (1, 3, 5):
        g = KaehlerFrame(m)
        assert lefschetz_Lambda(g, g.omega).coeffs[0] == pytest.approx(m)


def test_j_extension_examples():
    f = KaehlerFrame(2)
    assert j_extension(f, f.omega).norm() == 0.0
    assert j_extension(f, e(4, 1)) == e(4, 2)


def test_j_squared_spectrum_on_two_forms():
    f = KaehlerFrame(2)
    J2 = f.J_matrix(2) @ f.J_matrix(2)
    ev = np.sort(np.linalg.eigvalsh(0.5 * (J2 + J2.T)))
    np.testing.assert_allclose(ev, [-4, -4, 0, 0, 0, 0], atol=1e-12)
    # e1∧e3 splits into a (1,1) part and a (2,0)+(0,2) part
    a = e(4, 1, 3)
    parts = [type_project(f, a, s) for s in admissible_types(f, 2)]
    assert parts[0].norm() > 0.1 and parts[1].norm() > 0.1
    J2a = j_extension(f, j_extension(f, parts[1]))
    assert J2a.allclose(-4 * parts[1])


def test_type_projection_examples():
    f = KaehlerFrame(3)
    assert type_project(f, f.omega, 0).allclose(f.omega)
    assert type_project(f, f.omega, 2).norm() < 1e-12
    # inadmissible type gives zero
    assert type_project(f, f.omega, 1).norm() == 0.0
    rng = np.random.default_rng(4)
    a = random_form(6, 3, rng)
    total = sum((type_project(f, a, s) for s in admissible_types(f, 3)), AlternatingForm.zero(6, 3))
    assert (total - a).norm() < 1e-12


def test_decompose_examples():
    f = KaehlerFrame(2)
    dec = lefschetz_decompose(f, f.omega)
    assert dec.components[0].norm() < 1e-14
    assert dec.components[1].coeffs[0] == pytest.approx(1.0)
    dec = lefschetz_decompose(f, e(4, 1, 2))
    assert dec.components[0].allclose((e(4, 1, 2) - e(4, 3, 4)) / 2)
    assert dec.components[1].coeffs[0] == pytest.approx(0.5)
    g = KaehlerFrame(4)
    a = random_form(8, 4, np.random.default_rng(0))
    assert (lefschetz_decompose(g, a).reassemble(g) - a).norm() < 1e-12


def test_decompose_rejects_degree_above_m():
    f = KaehlerFrame(2)
    with pytest.raises(ValueError):
        lefschetz_decompose(f, e(4, 1, 2, 3))


def test_commutator_examples():
    f = KaehlerFrame(3)
    assert commutator_Lambda_Ls(f, one(6), 1).coeffs[0] == pytest.approx(3)
    LL = lefschetz_L(f, lefschetz_L(f, one(6)))
    assert lefschetz_Lambda(f, LL).allclose(4 * f.omega)
    assert lambda_power_coefficient(3, 0, 1, 2) == 4
    g = KaehlerFrame(2)
    prim = e(4, 1, 3) - e(4, 2, 4)
    assert lefschetz_Lambda(g, prim).norm() == 0.0
    assert commutator_Lambda_Ls(g, prim, 1).norm() < 1e-14


def test_eigenvalue_examples():
    assert lambda_l_eigenvalue(3, 2, 0) == 1
    assert lambda_l_eigenvalue(3, 2, 1) == 4
    f = KaehlerFrame(3)
    levels = lambda_l_eigencheck(f, f.omega)
    assert [(x.level, x.eigenvalue) for x in levels] == [(1, 4)]
    for m in range(1, 6):
        for p in range(m + 1):
            evs = [lambda_l_eigenvalue(m, p, i) for i in range(p // 2 + 1)]
            assert len(set(evs)) == len(evs)


@pytest.mark.parametrize("m", range(1, 6))
def test_lambda_L_commutator_is_scalar(m):
    f = KaehlerFrame(m)
    for p in range(f.n + 1):
        lam_l = f.Lambda_matrix(p + 2) @ f.L_matrix(p) if p + 2 <= f.n else 0
        l_lam = f.L_matrix(p - 2) @ f.Lambda_matrix(p) if p >= 2 else 0
        np.testing.assert_allclose(lam_l - l_lam, (m - p) * np.eye(comb(f.n, p)), atol=1e-12)


@pytest.mark.parametrize("m", range(1, 5))
def test_vanishing_commutators(m):
    f = KaehlerFrame(m)
    for p in range(f.n + 1):
        Jp = f.J_matrix(p)
        if p > 1:
            np.testing.assert_allclose(f.Lambda_matrix(p) @ Jp, f.J_matrix(p - 2) @ f.Lambda_matrix(p), atol=1e-12)
        np.testing.assert_allclose(f.star_matrix(p) @ Jp, f.J_matrix(f.n - p) @ f.star_matrix(p), atol=1e-12)


@pytest.mark.parametrize("m", range(1, 5))
def test_lambda_is_conjugate_of_L(m):
    # Λ = *^{-1} L * holds with no extra sign under this orientation
    f = KaehlerFrame(m)
    for p in range(2, f.n + 1):
        star_inv = np.linalg.inv(f.star_matrix(p - 2))
        conj = star_inv @ f.L_matrix(f.n - p) @ f.star_matrix(p)
        np.testing.assert_allclose(conj, f.Lambda_matrix(p), atol=1e-12)


@st.composite
def kaehler_forms(draw, max_m=5):
    m = draw(st.integers(1, max_m))
    p = draw(st.integers(0, m))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    return KaehlerFrame(m), random_form(2 * m, p, rng)


@settings(max_examples=100, deadline=None)
@given(kaehler_forms())
def test_decompose_roundtrip(case):
    f, a = case
    dec = lefschetz_decompose(f, a)
    assert (dec.reassemble(f) - a).norm() < 1e-12 * max(1.0, a.norm())
    for i, ui in enumerate(dec.components):
        assert ui.degree == a.degree - 2 * i
        if ui.degree >= 2:
            assert lefschetz_Lambda(f, ui).norm() < 1e-12 * max(1.0, a.norm())


@settings(max_examples=60, deadline=None)
@given(kaehler_forms())
def test_eigencheck_passes_on_random_forms(case):
    f, a = case
    for lvl in lambda_l_eigencheck(f, a):
        assert lvl.residual < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_two_form_is_j_invariant_iff_type_11(m, seed):
    f = KaehlerFrame(m)
    a = random_form(2 * m, 2, np.random.default_rng(seed))
    a11 = type_project(f, a, 0)
    assert j_extension(f, a11).norm() < 1e-12
    # on the (2,0)+(0,2) part J has norm exactly 2
    if m > 1:
        rest = a - a11
        assert j_extension(f, rest).norm() == pytest.approx(2 * rest.norm(), rel=1e-10)


def test_volume_form_is_top_power():
    for m in range(1, 5):
        f = KaehlerFrame(m)
        top = one(2 * m)
        for _ in range(m):
            top = lefschetz_L(f, top)
        fact = np.prod(np.arange(1, m + 1))
        assert top.allclose(fact * volume_form(2 * m))
