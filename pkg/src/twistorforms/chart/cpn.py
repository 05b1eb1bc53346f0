"""Field-level constructions on CP^m and the checks built from them.

Everything here works on :class:`FormField` objects over a chart geometry and
reduces to per-point residuals through covariant jets.
"""
from __future__ import annotations

from math import comb
from typing import Optional

import numpy as np

from ..kaehler import KaehlerFrame, lambda_power_coefficient
from ..report import Check, check_max
from ..twistor import (
    _ratio,
    d_from_jet,
    delta_from_jet,
    dim4_hamiltonian_condition,
    hamiltonian_residual,
    gamma_gradient_rows,
    relative_residual,
    sigma_gradient,
    structure_coefficient,
    twistor_residual,
)
from .calculus import (
    chunked,
    covariant_jets,
    fd_partials,
    numeric_operator,
    pointwise_map,
    pointwise_operator,
)
from .geometry import ChartGeometry, FormField, SamplePlan

__all__ = [
    "laplace_eigenfunction",
    "default_hermitian",
    "eigenfunction_residuals",
    "build_phi_hat",
    "phi_hat_alternate",
    "primitive_part",
    "phi_hat_gradient_residuals",
    "killing_defects",
    "killing_field_check",
    "closedness_defect",
    "generalized_trace",
    "affine_fit",
    "trig_rational_field",
    "polynomial_field",
    "apply_operator",
    "commutator_suite",
    "structure_form_field",
    "structure_form_field_check",
    "hamiltonian_roundtrip_checks",
    "dim4_hamiltonian_checks",
    "trace_slope",
    "fit_generalized_trace",
    "parallel_j_checks",
]


def default_hermitian(m: int) -> np.ndarray:
    """diag(1, -1/m, ..., -1/m): Hermitian, traceless, nondegenerate."""
    return np.diag([1.0] + [-1.0 / m] * m).astype(complex)


def laplace_eigenfunction(G: ChartGeometry, A: Optional[np.ndarray] = None) -> FormField:
    """f[Z] = Z*AZ / |Z|² in the affine chart Z = (1, z); Δf = 4(m+1) f on Fubini–Study."""
    m = G.m
    A = default_hermitian(m) if A is None else np.asarray(A, dtype=complex)
    if A.shape != (m + 1, m + 1):
        raise ValueError(f"A must be {(m + 1, m + 1)}, got {A.shape}")
    if not np.allclose(A, A.conj().T, atol=1e-12):
        raise ValueError("A must be Hermitian")
    if abs(np.trace(A)) > 1e-12 * max(1.0, np.abs(A).max()):
        raise ValueError("A must be traceless")
    if not np.any(A):
        return FormField(G.n, 0, lambda X: np.zeros(np.shape(X)[:-1] + (1,)), "zero")

    def ev(X):
        X = np.asarray(X, dtype=float)
        z = X[..., 0::2] + 1j * X[..., 1::2]
        Z = np.concatenate([np.ones(z.shape[:-1] + (1,)), z], axis=-1)
        num = np.real(np.einsum("...i,ij,...j->...", Z.conj(), A, Z))
        return (num / np.sum(np.abs(Z) ** 2, axis=-1))[..., None]

    return FormField(G.n, 0, ev, "f")


def eigenfunction_residuals(G: ChartGeometry, f: FormField, plan: SamplePlan) -> list[float]:
    """Per-point relative defect of Δf = 4(m+1) f, with Δf = -tr ∇²f."""
    jets = covariant_jets(G, f, plan, with_hess=True)
    lam = 4.0 * (G.m + 1)
    return [relative_residual(-np.trace(j.hess[:, :, 0]), lam * j.value[0]) for j in jets]


def build_phi_hat(G: ChartGeometry, f: FormField, plan: Optional[SamplePlan] = None) -> FormField:
    """dd^c f + 6 f ω by nested finite differences."""
    ddc = numeric_operator(G, numeric_operator(G, f, "dc", plan), "d", plan)
    out = ddc + G.omega_field().times(f).scaled(6.0)
    return FormField(out.dim, 2, out.evaluate, "phi_hat")


def primitive_part(G: ChartGeometry, F: FormField) -> FormField:
    """F - (ΛF/m) ω for a 2-form field."""
    if F.degree != 2:
        raise ValueError("primitive_part is implemented for 2-forms")
    om = KaehlerFrame(G.m).omega.coeffs
    mat = np.eye(comb(G.n, 2)) - np.outer(om, om) / G.m
    return pointwise_map(G, F, mat, 2, f"({F.name})0")


def phi_hat_alternate(G: ChartGeometry, f: FormField, plan: Optional[SamplePlan] = None) -> FormField:
    """(dd^c f)_0 + (2m-4)/m f ω, the trace-adjusted expression for the same form."""
    ddc = numeric_operator(G, numeric_operator(G, f, "dc", plan), "d", plan)
    m = G.m
    out = primitive_part(G, ddc) + G.omega_field().times(f).scaled((2 * m - 4) / m)
    return FormField(out.dim, 2, out.evaluate, "phi_hat_alt")


def phi_hat_gradient_residuals(G: ChartGeometry, f: FormField, phi: FormField, plan: SamplePlan) -> list[float]:
    """Defect of ∇_X φ̂ = -2(df∧JX - Jdf∧X) + 2 df(X) ω at each plan point."""
    kf = KaehlerFrame(G.m)
    jphi = covariant_jets(G, phi, plan)
    jf = covariant_jets(G, f, plan)
    out = []
    for a, b in zip(jphi, jf):
        df = b.grad[:, 0]
        out.append(relative_residual(a.grad, gamma_gradient_rows(kf, -2.0 * df, 1.0)))
    return out


def killing_defects(G: ChartGeometry, K: FormField, plan: SamplePlan) -> list[float]:
    """||sym ∇K|| / ||∇K|| per point for a 1-form field K."""
    if K.degree != 1:
        raise ValueError("Killing check needs a 1-form field")
    out = []
    for j in covariant_jets(G, K, plan):
        sym = 0.5 * (j.grad + j.grad.T)
        out.append(_ratio(float(np.linalg.norm(sym)), float(np.linalg.norm(j.grad))))
    return out


def killing_field_check(G: ChartGeometry, K: FormField, plan: SamplePlan) -> float:
    return max(killing_defects(G, K, plan))


def closedness_defect(G: ChartGeometry, xi: FormField, points: np.ndarray, h: float, order: int = 4,
                      scale=0.0) -> float:
    """max ||dξ|| / max(||∂ξ||, scale) over points for a 1-form field ξ.

    ``scale`` (a number or one value per point) keeps a ξ that vanishes up to
    rounding from being reported as far from closed.
    """
    dxi = numeric_operator(G, xi, "d", h=h, order=order).evaluate(points)
    partials = fd_partials(xi.evaluate, points, h, order)
    floor = np.broadcast_to(np.asarray(scale, dtype=float), (len(points),))
    worst = 0.0
    for k in range(len(points)):
        den = max(float(np.linalg.norm(partials[k])), float(floor[k]))
        worst = max(worst, _ratio(float(np.linalg.norm(dxi[k])), den))
    return worst


def generalized_trace(G: ChartGeometry, phi: FormField, plan: SamplePlan, path: str = "radial",
                      nodes: int = 16, closed_tol: float = 1e-4, check_points: int = 12) -> FormField:
    """The function f with df = δ^c φ and f(0) = 0, by line integration.

    δ^c φ is first tested for closedness on the leading ``check_points`` plan
    points (a ValueError reports the defect otherwise).  Integrals use
    Gauss–Legendre quadrature along the radial segment from the origin, or
    along coordinate axes one after another (``path="axes"``).
    """
    if phi.degree != 2:
        raise ValueError("the generalized trace is defined for 2-forms")
    xi = numeric_operator(G, phi, "deltac", plan)
    pts = plan.points[:check_points]
    # ξ is one derivative of φ, so |φ| sets the size its derivatives should have
    scale = np.linalg.norm(phi.evaluate(pts), axis=-1)
    defect = closedness_defect(G, xi, pts, plan.h, plan.order, scale)
    if defect > closed_tol:
        raise ValueError(f"δ^c φ is not closed on the chart: curl defect {defect:.3e} > {closed_tol:g}")
    t, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    n = G.n

    def radial(X):
        Y = t[:, None] * X[..., None, :]
        vals = xi.evaluate(Y)
        return np.einsum("q,...qa,...a->...", w, vals, X)[..., None]

    def axes(X):
        total = np.zeros(X.shape[:-1])
        for k in range(n):
            Y = np.zeros(X.shape[:-1] + (nodes, n))
            Y[..., :k] = X[..., None, :k]
            Y[..., k] = t * X[..., k:k + 1]
            total += np.einsum("q,...q->...", w, xi.evaluate(Y)[..., k]) * X[..., k]
        return total[..., None]

    if path not in ("radial", "axes"):
        raise ValueError(f"unknown path {path!r}")
    fn = radial if path == "radial" else axes
    return FormField(n, 0, chunked(fn, 32), f"trace[{path}]")


def affine_fit(y: np.ndarray, x: np.ndarray) -> tuple[float, float, float]:
    """Fit y ≈ a x + b; return (a, b, residual) with residual relative to the spread of y."""
    y = np.asarray(y, dtype=float).ravel()
    x = np.asarray(x, dtype=float).ravel()
    M = np.stack([x, np.ones_like(x)], axis=1)
    (a, b), *_ = np.linalg.lstsq(M, y, rcond=None)
    res = _ratio(float(np.linalg.norm(y - a * x - b)), float(np.linalg.norm(y - y.mean())))
    return float(a), float(b), res


def trace_slope(m: int) -> float:
    """Slope of the generalized trace of (dd^c f)_0 against f: -4(m²-1)/m."""
    return -4.0 * (m * m - 1) / m


# ---------------------------------------------------------------- test fields

def trig_rational_field(n: int, p: int, seed: int = 0, scale: float = 0.8) -> FormField:
    """Coefficients sin(a_I·x + b_I) / (1 + |x|²/4) with seeded random a_I, b_I."""
    rng = np.random.default_rng(seed)
    size = comb(n, p)
    A = scale * rng.standard_normal((size, n))
    b = rng.uniform(0, 2 * np.pi, size)

    def ev(X):
        X = np.asarray(X, dtype=float)
        damp = 1.0 + 0.25 * np.sum(X * X, axis=-1)
        return np.sin(X @ A.T + b) / damp[..., None]

    return FormField(n, p, ev, f"trig{p}")


def polynomial_field(n: int, p: int, seed: int = 0, degree: int = 3) -> FormField:
    """Coefficients are random polynomials of total degree ≤ ``degree`` (≤ 3 keeps FD exact)."""
    rng = np.random.default_rng(seed)
    size = comb(n, p)
    c0 = rng.standard_normal(size)
    c1 = rng.standard_normal((size, n))
    c2 = rng.standard_normal((size, n, n)) if degree >= 2 else np.zeros((size, n, n))
    c3 = rng.standard_normal((size, n)) if degree >= 3 else np.zeros((size, n))

    def ev(X):
        X = np.asarray(X, dtype=float)
        lin = X @ c1.T
        quad = np.einsum("Iab,...a,...b->...I", c2, X, X) / 2
        cub = (X @ c3.T) ** 3 / 6
        return c0 + lin + quad + cub

    return FormField(n, p, ev, f"poly{p}")


# ---------------------------------------------------------------- commutators

_NUMERIC = ("d", "delta", "dc", "deltac")
_SHIFT = {"d": 1, "dc": 1, "delta": -1, "deltac": -1, "L": 2, "Lambda": -2, "J": 0}


def apply_operator(G: ChartGeometry, F: Optional[FormField], op: str,
                   plan: Optional[SamplePlan] = None) -> Optional[FormField]:
    """Apply op to F; ``None`` stands for a result that vanishes for degree reasons."""
    if F is None:
        return None
    n, p = G.n, F.degree
    q = n - p if op == "star" else p + _SHIFT[op]
    if not 0 <= q <= n:
        return None
    if op in ("delta", "deltac") and p == 0:
        return None
    if op in _NUMERIC:
        return numeric_operator(G, F, op, plan)
    return pointwise_operator(G, F, op)


def _combine(terms) -> Optional[FormField]:
    live = [(c, F) for c, F in terms if F is not None]
    if not live:
        return None
    total = live[0][1].scaled(live[0][0])
    for c, F in live[1:]:
        if F.degree != total.degree:
            raise ValueError("degree mismatch in linear combination")
        total = total + F.scaled(c)
    return total


def _field_residuals(a: Optional[FormField], b: Optional[FormField], X: np.ndarray,
                     ref: Optional[np.ndarray] = None) -> Optional[list[float]]:
    """Per-point ||a - b|| / max(||a||, ||b||, ref); ``None`` fields count as zero.

    ``ref`` is a per-point magnitude of the field under test.  Without it a
    relation whose two sides both vanish (one exactly, one up to rounding)
    would report a relative defect of order one.
    """
    if a is None and b is None:
        return None
    va = a.evaluate(X) if a is not None else None
    vb = b.evaluate(X) if b is not None else None
    if va is None:
        va = np.zeros_like(vb)
    if vb is None:
        vb = np.zeros_like(va)
    out = []
    for k in range(len(X)):
        scale = max(np.linalg.norm(va[k]), np.linalg.norm(vb[k]), 0.0 if ref is None else ref[k])
        out.append(_ratio(float(np.linalg.norm(va[k] - vb[k])), float(scale)))
    return out


def _field_scale(F: FormField, plan: SamplePlan) -> np.ndarray:
    """||F|| + ||∂F|| at the plan points."""
    X = plan.points
    val = np.linalg.norm(F.evaluate(X).reshape(len(X), -1), axis=1)
    der = np.linalg.norm(fd_partials(F.evaluate, X, plan.h, plan.order).reshape(len(X), -1), axis=1)
    return val + der


def _relations(G: ChartGeometry, plan: SamplePlan):
    def op(name):
        return lambda F: apply_operator(G, F, name, plan)

    def comm(A, B):
        return lambda F: _combine([(1.0, A(B(F))), (-1.0, B(A(F)))])

    def neg(T):
        return lambda F: _combine([(-1.0, T(F))])

    d, de, dc, dec = op("d"), op("delta"), op("dc"), op("deltac")
    L, Lam, J, st = op("L"), op("Lambda"), op("J"), op("star")
    first = [
        ("dc_equals_minus_comm_delta_L", "d^c = -[δ, L]", dc, neg(comm(de, L))),
        ("dc_equals_minus_comm_d_J", "d^c = -[d, J]", dc, neg(comm(d, J))),
        ("deltac_equals_comm_d_Lambda", "δ^c = [d, Λ]", dec, comm(d, Lam)),
        ("deltac_equals_minus_comm_delta_J", "δ^c = -[δ, J]", dec, neg(comm(de, J))),
        ("d_equals_comm_deltac_L", "d = [δ^c, L]", d, comm(dec, L)),
        ("d_equals_comm_dc_J", "d = [d^c, J]", d, comm(dc, J)),
        ("delta_equals_minus_comm_dc_Lambda", "δ = -[d^c, Λ]", de, neg(comm(dc, Lam))),
        ("delta_equals_comm_deltac_J", "δ = [δ^c, J]", de, comm(dec, J)),
        ("d_commutes_with_L", "[d, L] = 0", lambda F: d(L(F)), lambda F: L(d(F))),
        ("dc_commutes_with_L", "[d^c, L] = 0", lambda F: dc(L(F)), lambda F: L(dc(F))),
        ("delta_commutes_with_Lambda", "[δ, Λ] = 0", lambda F: de(Lam(F)), lambda F: Lam(de(F))),
        ("deltac_commutes_with_Lambda", "[δ^c, Λ] = 0", lambda F: dec(Lam(F)), lambda F: Lam(dec(F))),
        ("Lambda_commutes_with_J", "[Λ, J] = 0", lambda F: Lam(J(F)), lambda F: J(Lam(F))),
        ("J_commutes_with_star", "[J, *] = 0", lambda F: J(st(F)), lambda F: st(J(F))),
    ]
    second = [
        ("delta_dc_anticommute", "δd^c + d^cδ = 0", lambda F: de(dc(F)), neg(lambda F: dc(de(F)))),
        ("d_dc_anticommute", "dd^c + d^cd = 0", lambda F: d(dc(F)), neg(lambda F: dc(d(F)))),
        ("delta_deltac_anticommute", "δδ^c + δ^cδ = 0", lambda F: de(dec(F)), neg(lambda F: dec(de(F)))),
        ("d_deltac_anticommute", "dδ^c + δ^cd = 0", lambda F: d(dec(F)), neg(lambda F: dec(d(F)))),
    ]
    return first, second


def commutator_suite(G: ChartGeometry, plan: SamplePlan, fields: Optional[list[FormField]] = None,
                     first_tol: float = 1e-5, second_tol: float = 1e-4) -> list[Check]:
    """Every Kähler commutator and anticommutator relation, on test fields of degree 0-3."""
    if fields is None:
        fields = [trig_rational_field(G.n, p, seed=11 + p) for p in range(min(4, G.n + 1))]
    first, second = _relations(G, plan)
    X = plan.points
    refs = [_field_scale(F, plan) for F in fields]
    checks = []
    for group, tol in ((first, first_tol), (second, second_tol)):
        for name, anchor, lhs, rhs in group:
            res = []
            for F, ref in zip(fields, refs):
                r = _field_residuals(lhs(F), rhs(F), X, ref)
                if r is not None:
                    res.extend(r)
            checks.append(check_max(name, anchor, res, tol))
    return checks


# ---------------------------------------------------------------- structure forms

def _power_matrix(kf: KaehlerFrame, p: int, s: int) -> np.ndarray:
    mat = np.eye(comb(kf.n, p))
    for i in range(s):
        mat = kf.L_matrix(p + 2 * i) @ mat
    return mat


def structure_form_field(G: ChartGeometry, phi: FormField, trace: FormField, k: int) -> FormField:
    """L^{k-1}φ - (m-p)/(p(m²-1)) L^k(f) with p = 2k, as a field."""
    kf = KaehlerFrame(G.m)
    p = 2 * k
    if not 2 <= p <= G.n - 2:
        raise ValueError(f"degree p = {p} outside [2, n-2]")
    first = pointwise_map(G, phi, _power_matrix(kf, 2, k - 1), p, "L^(k-1)phi")
    second = pointwise_map(G, trace, _power_matrix(kf, 0, k), p, "L^k f")
    out = first + second.scaled(structure_coefficient(G.m, p))
    return FormField(G.n, p, out.evaluate, f"u{p}")


def _mu_constants(n: int, p: int) -> tuple[Optional[float], Optional[float]]:
    den1 = (p - 1) * (n - p) - 2
    den2 = p * (n - p - 1) - 2
    mu1 = None if den1 == 0 else -2.0 * (n - p + 1) / den1
    mu2 = None if den2 == 0 else 2.0 * (p + 1) / den2
    return mu1, mu2


def _eigen_defect(image: np.ndarray, lam: float, v: np.ndarray) -> float:
    return _ratio(float(np.linalg.norm(image - lam * v)), float(np.linalg.norm(v)))


def fit_generalized_trace(G: ChartGeometry, phi: FormField, f: FormField,
                          plan: SamplePlan) -> tuple[FormField, list[Check]]:
    """Line-integrate the trace of φ, fit it affinely in f, and report the fit.

    The returned field is the fitted a·f + b, which is cheap to differentiate.
    """
    trace = generalized_trace(G, phi, plan)
    X = plan.points
    a, b, fit = affine_fit(trace.evaluate(X)[:, 0], f.evaluate(X)[:, 0])
    checks = [
        Check("generalized_trace_affine_fit", "trace of the special form is affine in the eigenfunction", fit, 1e-3),
        Check("generalized_trace_slope", "slope -4(m²-1)/m of the trace against the eigenfunction",
              relative_residual(a, trace_slope(G.m)), 1e-4),
    ]
    return FormField(G.n, 0, lambda Y: a * f.evaluate(Y) + b, "trace_fit"), checks


def structure_form_field_check(G: ChartGeometry, plan: SamplePlan, k: int = 2,
                             A: Optional[np.ndarray] = None,
                             trace: Optional[FormField] = None) -> list[Check]:
    """Build the even-degree twistor form from a special 2-form and its trace and test it.

    The special 2-form is the primitive part φ of φ̂.  Unless ``trace`` is
    given, its generalized trace is line-integrated and replaced by the
    affine fit in the eigenfunction (the fit is reported as checks).
    """
    m, n = G.m, G.n
    p = 2 * k
    if m < 2:
        raise ValueError("need m >= 2")
    if not 2 <= p <= n - 2:
        raise ValueError(f"degree p = {p} outside [2, n-2] = [2, {n - 2}]")
    kf = KaehlerFrame(m)
    f = laplace_eigenfunction(G, A)
    phi = primitive_part(G, build_phi_hat(G, f, plan))
    X = plan.points
    checks = []
    if trace is None:
        trace, checks = fit_generalized_trace(G, phi, f, plan)
    u = structure_form_field(G, phi, trace, k)
    jets = covariant_jets(G, u, plan)
    tag = f"p{p}"
    checks.append(check_max(f"structure_form_twistor_residual_{tag}",
                            "L^(k-1)φ - (m-p)/(p(m²-1)) L^k f is twistor",
                            [twistor_residual(j) for j in jets], 1e-5))

    mu1, mu2 = _mu_constants(n, p)
    op = lambda F, name: apply_operator(G, F, name, plan)  # noqa: E731
    Lu, Lamu = op(u, "L"), op(u, "Lambda")
    rels = [
        ("deltac_u_vs_mu1_d_Lambda_u", "δ^c u = μ1 dΛu", mu1, lambda: op(u, "deltac"), lambda: op(Lamu, "d")),
        ("dc_u_vs_mu2_delta_L_u", "d^c u = μ2 δLu", mu2, lambda: op(u, "dc"), lambda: op(Lu, "delta")),
        ("delta_u_vs_minus_mu1_dc_Lambda_u", "δu = -μ1 d^cΛu", None if mu1 is None else -mu1,
         lambda: op(u, "delta"), lambda: op(Lamu, "dc")),
        ("d_u_vs_minus_mu2_deltac_L_u", "du = -μ2 δ^c Lu", None if mu2 is None else -mu2,
         lambda: op(u, "d"), lambda: op(Lu, "deltac")),
    ]
    for name, anchor, mu, lhs, rhs in rels:
        if mu is None:
            checks.append(Check(f"{name}_{tag}", anchor, float("nan"), 1e-4, skipped=True,
                                note=f"degenerate constant for (n, p) = ({n}, {p})"))
            continue
        left, right = lhs(), rhs()
        rhs_field = None if right is None else right.scaled(mu)
        res = _field_residuals(left, rhs_field, X)
        checks.append(check_max(f"{name}_{tag}", anchor, res or [0.0], 1e-4))

    # ΛL eigenvalues on du and δu, and the vectors v, w
    ev_du = 0.25 * (n - p - 2) * (p + 2)
    ev_delta = 0.25 * (n - p) * p
    c_v = lambda_power_coefficient(m, 1, k, k)
    c_w = lambda_power_coefficient(m, 1, k - 1, k - 1)
    ratio = k * (2 * m - 2 * k + 1) / (2 * k + 1)
    Lk1 = _power_matrix(kf, 1, k)
    Lk1w = _power_matrix(kf, 1, k - 1)
    e_du, e_de, m_du, m_de, r_w = [], [], [], [], []
    for j in jets:
        du = d_from_jet(j)
        de = delta_from_jet(j)
        e_du.append(_eigen_defect(kf.Lambda_matrix(p + 3) @ (kf.L_matrix(p + 1) @ du), ev_du, du))
        e_de.append(_eigen_defect(kf.Lambda_matrix(p + 1) @ (kf.L_matrix(p - 1) @ de), ev_delta, de))
        v = Lk1.T @ du / c_v
        w = Lk1w.T @ de / c_w
        m_du.append(relative_residual(du, Lk1 @ v))
        m_de.append(relative_residual(de, Lk1w @ w))
        r_w.append(relative_residual(w, ratio * (kf.J @ v)))
    checks += [
        check_max(f"lambda_l_on_du_{tag}", "ΛL du = (n-p-2)(p+2)/4 du", e_du, 1e-4),
        check_max(f"lambda_l_on_delta_u_{tag}", "ΛL δu = (n-p)p/4 δu", e_de, 1e-4),
        check_max(f"du_single_lefschetz_level_{tag}", "du = L^k v", m_du, 1e-4),
        check_max(f"delta_u_single_lefschetz_level_{tag}", "δu = L^(k-1) w", m_de, 1e-4),
        check_max(f"w_over_Jv_ratio_{tag}", "w = k(2m-2k+1)/(2k+1) Jv", r_w, 1e-4),
    ]
    checks += parallel_j_checks(G, u, plan, jets, tag)
    return checks


def parallel_j_checks(G: ChartGeometry, u: FormField, plan: SamplePlan, jets=None, tag: str = "") -> list[Check]:
    """∇(Ju) and ∇(ΛJu) measured against ∇u (both vanish for the constructed fields)."""
    jets = jets if jets is not None else covariant_jets(G, u, plan)
    Ju = pointwise_operator(G, u, "J")
    out_j, out_lj = [], []
    jJ = covariant_jets(G, Ju, plan)
    jLJ = covariant_jets(G, pointwise_operator(G, Ju, "Lambda"), plan) if u.degree >= 2 else None
    for k, j in enumerate(jets):
        scale = float(np.linalg.norm(j.grad))
        out_j.append(_ratio(float(np.linalg.norm(jJ[k].grad)), scale))
        if jLJ is not None:
            out_lj.append(_ratio(float(np.linalg.norm(jLJ[k].grad)), scale))
    suffix = f"_{tag}" if tag else ""
    checks = [check_max(f"J_u_parallel{suffix}", "∇(Ju) = 0", out_j, 1e-4)]
    if out_lj:
        checks.append(check_max(f"Lambda_J_u_parallel{suffix}", "∇(ΛJu) = 0", out_lj, 1e-4))
    return checks


# ---------------------------------------------------------------- Hamiltonian forms

def _shift_matrix(m: int, c: float) -> np.ndarray:
    """Matrix of a ↦ a - c <a, ω> ω on 2-forms."""
    om = KaehlerFrame(m).omega.coeffs
    return np.eye(len(om)) - c * np.outer(om, om)


def hamiltonian_roundtrip_checks(G: ChartGeometry, u: FormField, plan: SamplePlan) -> list[Check]:
    """Twistor 2-form → Hamiltonian → twistor, as fields (m > 2)."""
    m = G.m
    if m <= 2:
        raise ValueError("the twistor-to-Hamiltonian shift needs m > 2")
    kf = KaehlerFrame(m)
    psi = pointwise_map(G, u, _shift_matrix(m, 1.0 / (m - 2)), 2, "psi")
    back = pointwise_map(G, psi, _shift_matrix(m, 0.5), 2, "u_back")
    jp = covariant_jets(G, psi, plan)
    jb = covariant_jets(G, back, plan)
    X = plan.points
    return [
        check_max("to_hamiltonian_residual", "u - <u,ω>/(m-2) ω is Hamiltonian",
                  [hamiltonian_residual(kf, j, sigma_gradient(kf, j)) for j in jp], 1e-4),
        check_max("back_to_twistor_residual", "ψ - <ψ,ω>/2 ω is twistor",
                  [twistor_residual(j) for j in jb], 1e-5),
        check_max("hamiltonian_roundtrip_identity", "the two shifts are mutually inverse",
                  _field_residuals(back, u, X), 1e-12),
    ]


def dim4_hamiltonian_checks(G: ChartGeometry, u0: FormField, f_eig: FormField, plan: SamplePlan) -> list[Check]:
    """On a complex surface: u0 + fω Hamiltonian with f = -2 f_eig, δu0 = -3J df, δu0 Killing."""
    if G.m != 2:
        raise ValueError("complex surfaces only")
    kf = KaehlerFrame(2)
    f = f_eig.scaled(-2.0)
    psi = u0 + G.omega_field().times(f)
    ju = covariant_jets(G, u0, plan)
    jf = covariant_jets(G, f, plan)
    jp = covariant_jets(G, psi, plan)
    cond = [dim4_hamiltonian_condition(kf, a, b.grad[:, 0]) for a, b in zip(ju, jf)]
    ham = [hamiltonian_residual(kf, j, sigma_gradient(kf, j)) for j in jp]
    K = numeric_operator(G, u0, "delta", plan)
    return [
        check_max("surface_codifferential_condition", "δu0 = -3 J df", cond, 1e-4),
        check_max("surface_hamiltonian_residual", "u0 + fω is Hamiltonian", ham, 1e-4),
        check_max("surface_codifferential_killing", "δu0 is dual to a Killing field",
                  killing_defects(G, K, plan), 1e-4),
    ]
