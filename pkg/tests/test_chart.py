"""Chart geometry and finite-difference calculus on Fubini–Study and flat charts."""
import numpy as np
import pytest

from twistorforms.chart import (
    FormField,
    SamplePlan,
    conformal_rescale,
    covariant_jet,
    covariant_jets,
    fd_partials,
    flat_torus,
    frame_riemann,
    fs_christoffel_from_metric,
    fubini_study,
    numeric_operator,
    pointwise_operator,
)
from twistorforms.chart.cpn import (
    affine_fit,
    build_phi_hat,
    eigenfunction_residuals,
    generalized_trace,
    killing_field_check,
    laplace_eigenfunction,
    polynomial_field,
    trig_rational_field,
)
from twistorforms.curvature import (
    cpm_curvature,
    cpm_riemann_tensor,
    killing_form_residual,
    middim_characterization_residual,
)
from twistorforms.exterior import AlternatingForm
from twistorforms.twistor import delta_from_jet, twistor_residual


@pytest.fixture(scope="module")
def cp2():
    return fubini_study(2)


@pytest.fixture(scope="module")
def plan8():
    return SamplePlan.sobol(4, count=8, seed=11)


def coordinate(n, k):
    return FormField(n, 0, lambda X: X[..., k:k + 1], f"x{k}")


def as_one_form(G, F):
    # the 1-form d^c F = J dF, i.e. the metric dual of J grad F up to sign
    return numeric_operator(G, F, "dc")


# ---------------------------------------------------------------- geometry

@pytest.mark.parametrize("m", [1, 2, 3])
def test_metric_is_identity_at_origin(m):
    G = fubini_study(m)
    np.testing.assert_allclose(G.metric(np.zeros(2 * m)), np.eye(2 * m), atol=1e-15)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_metric_is_hermitian(m):
    G = fubini_study(m)
    X = SamplePlan.sobol(2 * m, count=20, seed=1).points
    g, J = G.metric(X), G.jfield(X)
    np.testing.assert_allclose(np.einsum("...ca,...cd,...db->...ab", J, g, J), g, atol=1e-10)
    P = G.frame(X)
    np.testing.assert_allclose(np.einsum("...ai,...ab,...bj->...ij", P, g, P),
                               np.broadcast_to(np.eye(2 * m), g.shape), atol=1e-12)


@pytest.mark.parametrize("m", [1, 2])
def test_christoffels_match_metric_derivatives(m):
    G = fubini_study(m)
    X = SamplePlan.sobol(2 * m, count=6, seed=2).points
    np.testing.assert_allclose(G.christoffel(X), fs_christoffel_from_metric(G, X), atol=1e-9)


@pytest.mark.parametrize("m", [1, 2])
def test_fd_curvature_matches_closed_form(m):
    G = fubini_study(m)
    for x in SamplePlan.sobol(2 * m, count=4, seed=3).points:
        np.testing.assert_allclose(frame_riemann(G, x), cpm_riemann_tensor(m), atol=1e-4)


def test_sphere_gauss_curvature_is_four():
    G = fubini_study(1)
    R = frame_riemann(G, np.array([0.4, -0.9]))
    assert R[0, 1, 1, 0] == pytest.approx(4.0, abs=1e-6)


def test_omega_is_parallel(cp2, plan8):
    for j in covariant_jets(cp2, cp2.omega_field(), plan8):
        assert np.abs(j.grad).max() < 1e-8
        np.testing.assert_allclose(j.value, [1, 0, 0, 0, 0, 1], atol=1e-12)


def test_complex_structure_is_parallel(cp2, plan8):
    # ∇J = 0 shows up as J commuting with the covariant derivative of any field
    F = trig_rational_field(4, 1, seed=3)
    JF = pointwise_operator(cp2, F, "J")
    jets = covariant_jets(cp2, F, plan8)
    jjets = covariant_jets(cp2, JF, plan8)
    J = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], float)
    for a, b in zip(jets, jjets):
        np.testing.assert_allclose(b.grad, a.grad @ J.T, atol=1e-8)


def test_flat_jets():
    G = flat_torus(2)
    plan = SamplePlan.sobol(4, count=5, seed=4)
    const = FormField.constant(AlternatingForm(4, 2, np.arange(6.0)))
    for j in covariant_jets(G, const, plan, with_hess=True):
        assert np.abs(j.grad).max() < 1e-14 and np.abs(j.hess).max() < 1e-14
    for j in covariant_jets(G, coordinate(4, 2), plan):
        np.testing.assert_allclose(j.grad[:, 0], [0, 0, 1, 0], atol=1e-10)


def test_function_jet_matches_fd_differential():
    G = fubini_study(1)
    f = laplace_eigenfunction(G)
    x = np.array([0.3, 0.5])
    j = covariant_jet(G, f, x)
    # one frame vector is ∂_x / |∂_x|; the metric at x is conformal to the identity
    scale = np.sqrt(G.metric(x)[0, 0])
    fd = fd_partials(f.evaluate, x, 1e-4, 4)[:, 0]
    np.testing.assert_allclose(j.grad[:, 0] * scale, fd, rtol=1e-6, atol=1e-9)


def test_conformal_zero_weight_is_identity(cp2, plan8):
    zero = FormField(4, 0, lambda X: np.zeros(X.shape[:-1] + (1,)), "0")
    H = conformal_rescale(cp2, zero)
    X = plan8.points
    np.testing.assert_array_equal(H.metric(X), cp2.metric(X))
    np.testing.assert_array_equal(H.christoffel(X), cp2.christoffel(X))
    with pytest.raises(ValueError):
        conformal_rescale(cp2, cp2.omega_field())


# ---------------------------------------------------------------- plans

def test_plan_validation_and_determinism(monkeypatch):
    a = SamplePlan.sobol(4, count=10, seed=5)
    b = SamplePlan.sobol(4, count=10, seed=5)
    np.testing.assert_array_equal(a.points, b.points)
    assert np.all(np.linalg.norm(a.points, axis=1) <= 1.5)
    assert not np.array_equal(a.points, SamplePlan.sobol(4, count=10, seed=6).points)
    with pytest.raises(ValueError):
        SamplePlan(np.zeros((1, 4)), h=1.0)
    with pytest.raises(ValueError):
        SamplePlan(np.zeros((1, 4)), order=3)
    with pytest.raises(ValueError):
        SamplePlan(np.full((1, 4), 2.0))
    monkeypatch.setenv("TWISTOR_SEED", "5")
    np.testing.assert_array_equal(SamplePlan.sobol(4, count=10).points, a.points)


@pytest.mark.parametrize("order", [2, 4])
def test_fd_convergence_order(order):
    fn = lambda X: np.sin(X @ np.array([1.0, 0.7]))[..., None] * np.exp(X[..., :1])  # noqa: E731
    x = np.array([0.3, -0.4])
    exact = np.array([np.cos(x @ [1, 0.7]) + np.sin(x @ [1, 0.7]), 0.7 * np.cos(x @ [1, 0.7])]) * np.exp(x[0])
    errs = [np.abs(fd_partials(fn, x, h, order)[:, 0] - exact).max() for h in (4e-2, 2e-2)]
    assert errs[0] / errs[1] >= 2 ** (order - 0.5)


# ---------------------------------------------------------------- operators

def test_d_squared_vanishes(cp2, plan8):
    F = trig_rational_field(4, 1, seed=6)
    dd = numeric_operator(cp2, numeric_operator(cp2, F, "d", h=1e-2), "d", h=1e-2)
    assert np.abs(dd.evaluate(plan8.points)).max() < 1e-6


def test_dc_of_function_is_j_of_df(cp2, plan8):
    f = laplace_eigenfunction(cp2)
    dc = numeric_operator(cp2, f, "dc").evaluate(plan8.points)
    Jdf = pointwise_operator(cp2, numeric_operator(cp2, f, "d"), "J").evaluate(plan8.points)
    np.testing.assert_allclose(dc, Jdf, atol=1e-8)


def test_codifferential_of_omega(cp2, plan8):
    assert np.abs(numeric_operator(cp2, cp2.omega_field(), "delta").evaluate(plan8.points)).max() < 1e-8


def test_operator_errors(cp2):
    with pytest.raises(ValueError):
        numeric_operator(cp2, laplace_eigenfunction(cp2), "delta")
    with pytest.raises(ValueError):
        numeric_operator(cp2, cp2.omega_field(), "curl")
    with pytest.raises(ValueError):
        pointwise_operator(cp2, laplace_eigenfunction(cp2), "Lambda")


# ---------------------------------------------------------------- eigenfunctions and Killing fields

def test_sphere_eigenfunction():
    G = fubini_study(1)
    f = laplace_eigenfunction(G, np.diag([1.0, -1.0]))
    x = np.array([0.6, -0.2])
    r2 = x @ x
    assert f(x).coeffs[0] == pytest.approx((1 - r2) / (1 + r2))
    plan = SamplePlan.sobol(2, count=10, seed=7)
    assert max(eigenfunction_residuals(G, f, plan)) < 1e-5


def test_random_hermitian_eigenfunction(cp2, plan8):
    rng = np.random.default_rng(8)
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    A = A + A.conj().T
    A -= np.trace(A) / 3 * np.eye(3)
    assert max(eigenfunction_residuals(cp2, laplace_eigenfunction(cp2, A), plan8)) < 1e-4


def test_eigenfunction_input_validation(cp2):
    with pytest.raises(ValueError):
        laplace_eigenfunction(cp2, np.diag([1.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        laplace_eigenfunction(cp2, np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]], dtype=complex))
    with pytest.raises(ValueError):
        laplace_eigenfunction(cp2, np.eye(2))
    zero = laplace_eigenfunction(cp2, np.zeros((3, 3)))
    assert np.all(zero.evaluate(np.ones((3, 4)) * 0.1) == 0)


def test_killing_fields(cp2, plan8):
    f = laplace_eigenfunction(cp2)
    K = as_one_form(cp2, f)
    assert killing_field_check(cp2, K, plan8) < 1e-4
    grad = numeric_operator(cp2, f, "d")
    assert killing_field_check(cp2, grad, plan8) > 0.5
    G = flat_torus(2)
    const = FormField.constant(AlternatingForm(4, 1, np.ones(4)))
    assert killing_field_check(G, const, plan8) == 0.0


def test_killing_one_form_is_coclosed_and_satisfies_criterion():
    G = fubini_study(1)
    K = as_one_form(G, laplace_eigenfunction(G))
    plan = SamplePlan.sobol(2, count=6, seed=9)
    R = cpm_curvature(1)
    for j in covariant_jets(G, K, plan, with_hess=True):
        assert np.abs(delta_from_jet(j)).max() < 1e-8 * max(1.0, np.abs(j.grad).max())
        assert killing_form_residual(R, j) < 1e-3


# ---------------------------------------------------------------- phi hat and its trace

def test_phi_hat_jets(cp2, plan8):
    phi = build_phi_hat(cp2, laplace_eigenfunction(cp2))
    jets = covariant_jets(cp2, phi, plan8, with_hess=True)
    assert max(twistor_residual(j) for j in jets) < 1e-5
    R = cpm_curvature(2)
    assert max(middim_characterization_residual(R, j, 2) for j in jets) < 1e-3
    detuned = min(middim_characterization_residual(R, j, 2, coefficient=2.0) for j in jets)
    assert detuned > 0.05


def test_trace_of_parallel_form_is_zero(cp2):
    plan = SamplePlan.sobol(4, count=6, seed=10)
    tr = generalized_trace(cp2, cp2.omega_field(), plan)
    # δ^c ω is FD noise at the first-derivative tier
    assert np.abs(tr.evaluate(plan.points)).max() < 1e-8


def test_trace_is_path_independent_and_affine_in_f(cp2):
    plan = SamplePlan.sobol(4, count=6, seed=12)
    f = laplace_eigenfunction(cp2)
    phi = build_phi_hat(cp2, f)
    radial = generalized_trace(cp2, phi, plan).evaluate(plan.points)
    axes = generalized_trace(cp2, phi, plan, path="axes").evaluate(plan.points)
    np.testing.assert_allclose(radial, axes, atol=1e-4 * np.abs(radial).max())
    slope, _, res = affine_fit(radial, f.evaluate(plan.points))
    assert res < 1e-3
    assert abs(slope) > 1.0


def test_trace_rejects_nonclosed_codifferential(cp2):
    plan = SamplePlan.sobol(4, count=6, seed=13)
    with pytest.raises(ValueError, match="not closed"):
        generalized_trace(cp2, trig_rational_field(4, 2, seed=1), plan)


def test_polynomial_fields_are_differentiated_exactly():
    G = flat_torus(1)
    F = polynomial_field(2, 1, seed=2)
    x = np.array([0.2, 0.1])
    a = fd_partials(F.evaluate, x, 5e-3, 4)
    b = fd_partials(F.evaluate, x, 2e-2, 4)
    np.testing.assert_allclose(a, b, atol=1e-9)
    assert covariant_jet(G, F, x).grad.shape == (2, 2)
