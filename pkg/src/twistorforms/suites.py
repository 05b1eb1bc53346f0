"""Verification suites, one per CLI subcommand.

Each suite returns a :class:`~twistorforms.report.SuiteReport` whose checks
carry the worst residual over everything they sampled.
"""
from __future__ import annotations

import time
from math import comb
from typing import Optional

import numpy as np

from . import exterior as ex
from .chart import (
    SamplePlan,
    conformal_rescale,
    covariant_jets,
    flat_torus,
    frame_riemann,
    fubini_study,
    numeric_operator,
)
from .chart.cpn import (
    _field_residuals,
    build_phi_hat,
    commutator_suite,
    dim4_hamiltonian_checks,
    eigenfunction_residuals,
    fit_generalized_trace,
    generalized_trace,
    hamiltonian_roundtrip_checks,
    killing_defects,
    laplace_eigenfunction,
    parallel_j_checks,
    phi_hat_alternate,
    phi_hat_gradient_residuals,
    polynomial_field,
    primitive_part,
    structure_form_field_check,
    trig_rational_field,
)
from .chart.geometry import FormField, _seed_from_env
from .curvature import (
    cpm_curvature,
    cpm_riemann_tensor,
    flat_curvature,
    integrability_residual,
    middim_characterization_residual,
    qR_bruteforce_matrix,
    qR_matrix,
    weitzenboeck_residual,
)
from .kaehler import (
    KaehlerFrame,
    commutator_Lambda_Ls,
    lambda_l_eigenvalue,
    lambda_power_coefficient,
    lefschetz_decompose,
    lefschetz_L_power,
    lefschetz_Lambda,
)
from .report import Check, SuiteReport, check_max
from .twistor import (
    _ratio,
    hodge_dual_jet,
    lefschetz_jets,
    gamma_gradient_rows,
    middim_split_check,
    relative_residual,
    special2_residual,
    specialm_residual,
    twistor2_characterization_residual,
    twistor_jet,
    twistor_residual,
    CovariantJet,
)

__all__ = [
    "algebra_suite",
    "commutators_suite",
    "curvature_suite",
    "cpn_suite",
    "conformal_suite",
    "middim_suite",
    "all_suites",
    "default_plan",
]


def default_plan(m: int, samples: int = 50, h: float = 5e-3, seed: Optional[int] = None) -> SamplePlan:
    return SamplePlan.sobol(2 * m, count=samples, h=h, seed=seed)


def _finish(report: SuiteReport, start: float) -> SuiteReport:
    report.wall_time = round(time.perf_counter() - start, 3)
    return report


# ---------------------------------------------------------------- algebra

def _oracle_L(m: int, p: int) -> np.ndarray:
    """ω ∧ · assembled column by column with the generic wedge product."""
    f = KaehlerFrame(m)
    cols = [ex.wedge(f.omega, b).coeffs for b in ex.iter_basis_forms(f.n, p)]
    return np.array(cols).T if cols else np.zeros((comb(f.n, p + 2), 0))


def _oracle_Lambda(m: int, p: int) -> np.ndarray:
    """Σ_i e_{2i+1} ⌟ e_{2i} ⌟ ·, assembled with the generic interior product."""
    n = 2 * m
    cols = []
    for b in ex.iter_basis_forms(n, p):
        acc = np.zeros(comb(n, p - 2))
        for i in range(m):
            inner = ex.contract(ex.basis_form(n, 2 * i), b)
            acc += ex.contract(ex.basis_form(n, 2 * i + 1), inner).coeffs
        cols.append(acc)
    return np.array(cols).T


def _lefschetz_checks(max_m: int) -> list[Check]:
    comm_res, oracle_res, corollary_res = [], [], []
    for m in range(1, max_m + 1):
        n = 2 * m
        f = KaehlerFrame(m)
        Lo = {p: _oracle_L(m, p) for p in range(n - 1)}
        Lamo = {p: _oracle_Lambda(m, p) for p in range(2, n + 1)}

        def Lpow(p, s, table):
            mat = np.eye(comb(n, p))
            for i in range(s):
                mat = table[p + 2 * i] @ mat
            return mat

        for p in range(n + 1):
            for s in range(1, (n - p) // 2 + 1):
                top = p + 2 * s
                eng = np.array([commutator_Lambda_Ls(f, b, s).coeffs
                                for b in ex.iter_basis_forms(n, p)]).T
                target = s * (m - p - s + 1) * Lpow(p, s - 1, {q: f.L_matrix(q) for q in range(n - 1)})
                comm_res.append(float(np.abs(eng - target).max()))
                # oracle: compose the independently assembled L and Λ
                oracle = Lamo[top] @ Lpow(p, s, Lo)
                if p >= 2:
                    oracle = oracle - Lpow(p - 2, s, Lo) @ Lamo[p]
                oracle_res.append(float(np.abs(oracle - eng).max()))
        # Λ^r L^s on primitive forms
        rng = np.random.default_rng(100 + m)
        for q in range(m + 1):
            if q == 0:
                alpha = ex.AlternatingForm.scalar(n, 1.0)
            else:
                alpha = lefschetz_decompose(f, ex.random_form(n, q, rng)).components[0]
            for s in range(0, m - q + 1):
                Ls = lefschetz_L_power(f, alpha, s)
                for r in range(0, s + 1):
                    img = Ls
                    for _ in range(r):
                        img = lefschetz_Lambda(f, img)
                    expect = lambda_power_coefficient(m, q, r, s) * lefschetz_L_power(f, alpha, s - r)
                    corollary_res.append(relative_residual(img.coeffs, expect.coeffs))
    return [
        check_max("lambda_Ls_commutator", "[Λ, L^s]α = s(m-p-s+1) L^(s-1)α on all basis forms",
                  comm_res, 1e-12),
        check_max("lambda_Ls_commutator_oracle", "explicit Λ and L compositions agree with the engine",
                  oracle_res, 1e-12),
        check_max("lambda_r_L_s_on_primitive", "Λ^r L^s α = s!(m-q-s+r)!/((s-r)!(m-q-s)!) L^(s-r)α",
                  corollary_res, 1e-12),
    ]


def _spectrum_checks(max_m: int) -> list[Check]:
    res, spec_res, distinct_fail = [], [], 0
    for m in range(1, max_m + 1):
        n = 2 * m
        f = KaehlerFrame(m)
        rng = np.random.default_rng(200 + m)
        for p in range(m + 1):
            levels = list(range(p // 2 + 1))
            evs = [lambda_l_eigenvalue(m, p, i) for i in levels]
            if len(set(evs)) != len(evs):
                distinct_fail += 1
            for i in levels:
                q = p - 2 * i
                base = ex.AlternatingForm.scalar(n, 1.0) if q == 0 else \
                    lefschetz_decompose(f, ex.random_form(n, q, rng)).components[0]
                piece = lefschetz_L_power(f, base, i)
                img = lefschetz_Lambda(f, lefschetz_L_power(f, piece, 1)) if p + 2 <= n else piece * 0
                res.append(_ratio(float(np.linalg.norm(img.coeffs - evs[i] * piece.coeffs)),
                                  float(np.linalg.norm(piece.coeffs))))
            # oracle: the full spectrum of ΛL on Λ^p with primitive multiplicities
            if p + 2 <= n:
                mat = f.Lambda_matrix(p + 2) @ f.L_matrix(p)
                eig = np.sort(np.linalg.eigvalsh(0.5 * (mat + mat.T)))
                expect = []
                for i in levels:
                    q = p - 2 * i
                    mult = comb(n, q) - (comb(n, q - 2) if q >= 2 else 0)
                    expect += [evs[i]] * mult
                expect = np.sort(np.array(expect, dtype=float))
                spec_res.append(float(np.abs(eig - expect).max()) if len(eig) == len(expect) else float("inf"))
    return [
        check_max("lambda_L_eigenvalues", "ΛL = (i+1)(m-p+i) on L^i(primitive)", res, 1e-10),
        check_max("lambda_L_full_spectrum", "spectrum of ΛL with primitive multiplicities", spec_res, 1e-10),
        Check("lambda_L_eigenvalues_distinct", "eigenvalues distinct across Lefschetz levels",
              float(distinct_fail), 0.0),
    ]


def _random_jet(n: int, p: int, rng) -> CovariantJet:
    size = comb(n, p)
    return CovariantJet(rng.standard_normal(size), rng.standard_normal((n, size)), None, n, p)


def _sweep_checks(count: int, seed: int) -> list[Check]:
    """Random 2-form jets: the twistor residual and the 2-form characterization agree on vanishing."""
    rng = np.random.default_rng(seed)
    thr = 1e-10
    mismatches = both = neither = 0
    total = 0
    for k in range(count):
        m = (2, 3, 4)[k % 3]
        f = KaehlerFrame(m)
        n = f.n
        family = (k // 3) % 3
        value = rng.standard_normal(comb(n, 2))
        if family == 0:
            j = _random_jet(n, 2, rng)
        else:
            gamma = rng.standard_normal(n)
            grad = gamma_gradient_rows(f, gamma, 1.0)
            if family == 2:
                grad = grad + 10.0 ** rng.uniform(-6, 0) * rng.standard_normal(grad.shape)
            j = CovariantJet(value, grad, None, n, 2)
        a = twistor_residual(j) < thr
        b = twistor2_characterization_residual(f, j) < thr
        total += 1
        mismatches += a != b
        both += a and b
        neither += (not a) and (not b)
    note = f"{total} jets: {both} satisfy both, {neither} satisfy neither"
    return [Check("twistor_vs_characterization_sweep", "twistor 2-forms are exactly the solutions of the "
                  "γ∧JX - Jγ∧X - γ(X)ω equation", float(mismatches), 0.0, note=note)]


def _hodge_checks(seed: int) -> list[Check]:
    rng = np.random.default_rng(seed)
    res, star_res = [], []
    for n in range(1, 9):
        for p in range(n + 1):
            size = comb(n, p)
            j = _random_jet(n, p, rng)
            res.append(abs(twistor_residual(j) - twistor_residual(hodge_dual_jet(j))))
            tw = twistor_jet(rng.standard_normal(size),
                             rng.standard_normal(comb(n, p + 1)) if p < n else np.zeros(0),
                             rng.standard_normal(comb(n, p - 1)) if p > 0 else np.zeros(0), n, p)
            res.append(abs(twistor_residual(tw) - twistor_residual(hodge_dual_jet(tw))))
            a = ex.random_form(n, p, rng)
            twice = ex.hodge_star(ex.hodge_star(a))
            star_res.append(float(np.abs(twice.coeffs - (-1) ** (p * (n - p)) * a.coeffs).max()))
    return [
        check_max("hodge_dual_twistor_invariance", "ψ twistor iff *ψ twistor", res, 1e-12),
        check_max("double_hodge_sign", "** = (-1)^(p(n-p))", star_res, 1e-12),
    ]


def algebra_suite(max_m: int = 5, sweep: int = 1200, seed: Optional[int] = None) -> SuiteReport:
    start = time.perf_counter()
    seed = _seed_from_env() if seed is None else seed
    rep = SuiteReport("algebra", config={"max_m": max_m, "sweep": sweep, "seed": seed})
    rep.extend(_lefschetz_checks(max_m))
    rep.extend(_spectrum_checks(max_m))
    rep.extend(_sweep_checks(sweep, seed))
    return _finish(rep, start)


# ---------------------------------------------------------------- commutators

def commutators_suite(m: int = 2, samples: int = 50, h: float = 5e-3, seed: Optional[int] = None) -> SuiteReport:
    start = time.perf_counter()
    plan = default_plan(m, samples, h, seed)
    rep = SuiteReport("commutators", config=_config(m, None, plan))
    rep.extend(commutator_suite(fubini_study(m), plan))
    return _finish(rep, start)


def _config(m, p, plan: SamplePlan) -> dict:
    return {"m": m, "p": p, "h": plan.h, "samples": len(plan), "seed": plan.seed}


# ---------------------------------------------------------------- curvature

def _hess_plan(plan: SamplePlan, count: int) -> SamplePlan:
    return SamplePlan(plan.points[:count], plan.h, plan.order, plan.seed, plan.radius)


def curvature_suite(m: int = 2, samples: int = 50, h: float = 5e-3, seed: Optional[int] = None,
                    hess_samples: int = 12) -> SuiteReport:
    """q(R), FD curvature of the chart, integrability and Weitzenböck checks.

    Checks needing FD hessians of nested fields run on the first
    ``hess_samples`` plan points.
    """
    start = time.perf_counter()
    plan = default_plan(m, samples, h, seed)
    rep = SuiteReport("curvature", config=_config(m, None, plan))
    n = 2 * m
    R = cpm_curvature(m)
    q1 = qR_matrix(R, 1)
    rep.checks.append(Check("qR_on_1forms_is_ricci", "q(R) = Ric = 2(m+1) id on 1-forms",
                            float(np.abs(q1 - 2 * (m + 1) * np.eye(n)).max()) / (2 * (m + 1)), 1e-12))
    riem = cpm_riemann_tensor(m)
    brute = [float(np.abs(qR_matrix(R, p) - qR_bruteforce_matrix(riem, p)).max()) for p in range(n + 1)]
    rep.checks.append(check_max("qR_bivector_vs_bruteforce", "q(R) from ℛ agrees with Σ e_j∧e_i⌟R_ij",
                                brute, 1e-12))
    G = fubini_study(m)
    fd = frame_riemann(G, plan.points, h=1e-3)
    scale = float(np.abs(riem).max())
    rep.checks.append(check_max("fd_curvature_matches_closed_form",
                                "finite-difference Riemann tensor equals -(X∧Y + JX∧JY) - 2ω(X,Y)J",
                                [float(np.abs(fd[k] - riem).max()) / scale for k in range(len(plan))], 1e-4))
    hp = _hess_plan(plan, hess_samples)
    if m >= 2:
        f = laplace_eigenfunction(G)
        phi = build_phi_hat(G, f, plan)
        jets = covariant_jets(G, phi, hp, with_hess=True)
        rep.checks.append(check_max("phi_hat_integrability", "q(R)ψ = p/(p+1) δdψ + (n-p)/(n-p+1) dδψ",
                                    [integrability_residual(R, j) for j in jets], 1e-3))
    # Weitzenböck on the flat model and on CP^m
    flat = flat_torus(m)
    Rf = flat_curvature(n)
    wf, wc, const = [], [], []
    for p in range(n + 1):
        F = polynomial_field(n, p, seed=300 + p)
        wf += [weitzenboeck_residual(Rf, j) for j in covariant_jets(flat, F, hp, with_hess=True)]
        T = trig_rational_field(n, p, seed=400 + p)
        wc += [weitzenboeck_residual(R, j) for j in covariant_jets(G, T, hp, with_hess=True)]
        C = FormField.constant(ex.random_form(n, p, np.random.default_rng(p)))
        const += [weitzenboeck_residual(Rf, j) for j in covariant_jets(flat, C, _hess_plan(hp, 2), with_hess=True)]
    rep.checks += [
        check_max("weitzenboeck_flat_polynomial", "Δ = ∇*∇ + q(R) on the flat model", wf, 1e-6),
        check_max("weitzenboeck_cpm_trig_rational", "Δ = ∇*∇ + q(R) on Fubini–Study", wc, 1e-3),
        check_max("weitzenboeck_flat_constant", "constant forms: both sides vanish", const, 1e-12),
    ]
    return _finish(rep, start)


# ---------------------------------------------------------------- CP^m constructions

def _inverse_gradient(jets) -> list[float]:
    return [_ratio(float(np.linalg.norm(j.value)), float(np.linalg.norm(j.grad))) for j in jets]


def validate_cpn_args(m: int, degree: Optional[int]) -> None:
    if m < 1:
        raise ValueError("m must be positive")
    if degree is not None:
        if degree % 2:
            raise ValueError(f"degree {degree} is odd; the constructive family has even degree only")
        if not 2 <= degree <= 2 * m - 2:
            raise ValueError(f"degree {degree} outside [2, 2m-2] = [2, {2 * m - 2}]")


def cpn_suite(m: int = 2, degree: Optional[int] = None, samples: int = 50, h: float = 5e-3,
              seed: Optional[int] = None) -> SuiteReport:
    """Eigenfunction, φ̂, Killing fields, structure forms and Hamiltonian shifts on CP^m.

    Without ``degree`` every even degree in [2, 2m-2] is run; degree = m
    runs the φ̂ checks only (the structure form there is φ̂ itself).
    """
    validate_cpn_args(m, degree)
    start = time.perf_counter()
    plan = default_plan(m, samples, h, seed)
    rep = SuiteReport("cpn", config=_config(m, degree, plan))
    G = fubini_study(m)
    kf = KaehlerFrame(m)
    f = laplace_eigenfunction(G)
    rep.checks.append(check_max("eigenfunction_laplacian", "Δf = 4(m+1) f",
                                eigenfunction_residuals(G, f, plan), 1e-4))
    if m < 2:
        return _finish(rep, start)
    phi = build_phi_hat(G, f, plan)
    X = plan.points
    jets = covariant_jets(G, phi, plan)
    Jres = [_ratio(float(np.linalg.norm(kf.J_matrix(2) @ j.value)), float(np.linalg.norm(j.value))) for j in jets]
    K = numeric_operator(G, f, "dc", plan)
    rep.checks += [
        check_max("phi_hat_J_invariant", "Jφ̂ = 0", Jres, 1e-8),
        check_max("phi_hat_twistor_residual", "dd^c f + 6fω is a twistor 2-form",
                  [twistor_residual(j) for j in jets], 1e-5),
        check_max("phi_hat_gradient_formula", "∇_X φ̂ = -2(df∧JX - Jdf∧X) + 2df(X)ω",
                  phi_hat_gradient_residuals(G, f, phi, plan), 1e-4),
        check_max("phi_hat_alternate_expression", "dd^c f + 6fω = (dd^c f)_0 + (2m-4)/m fω",
                  _field_residuals(phi, phi_hat_alternate(G, f, plan), X), 1e-6),
        check_max("phi_hat_not_parallel", "|φ̂| / |∇φ̂| stays bounded (φ̂ is not parallel)",
                  _inverse_gradient(jets), 1e3),
        check_max("J_grad_f_killing", "K = J grad f is a Killing field", killing_defects(G, K, plan), 1e-4),
        check_max("grad_f_not_killing", "grad f is not Killing: inverse symmetric defect",
                  [1.0 / max(r, 1e-300) for r in killing_defects(G, numeric_operator(G, f, "d", plan), plan)],
                  1e3),
    ]
    rep.checks += parallel_j_checks(G, phi, plan, jets, "phi_hat")
    if m == 2:
        rep.checks += dim4_hamiltonian_checks(G, phi, f, plan)
    if m > 2 and (degree is None or degree == 2):
        rep.checks += hamiltonian_roundtrip_checks(G, phi, plan)
    prim = primitive_part(G, phi)
    fitted, trace_checks = fit_generalized_trace(G, prim, f, plan)
    rep.checks += trace_checks
    if m == 2:
        radial = generalized_trace(G, prim, plan)
        axes = generalized_trace(G, prim, plan, path="axes")
        rep.checks.append(check_max("generalized_trace_path_independence",
                                    "radial and axis-by-axis integrals agree",
                                    _field_residuals(radial, axes, X[:8]), 1e-4))
    degrees = [degree] if degree is not None else list(range(2, 2 * m - 1, 2))
    for p in degrees:
        if p == m:
            continue
        rep.checks += structure_form_field_check(G, plan, k=p // 2, trace=fitted)
    return _finish(rep, start)


# ---------------------------------------------------------------- conformal

def gaussian_bump(n: int, amplitude: float = 0.3, width: float = 1.0, center=None) -> FormField:
    c = np.full(n, 0.2) if center is None else np.asarray(center, dtype=float)

    def ev(X):
        r2 = np.sum((np.asarray(X) - c) ** 2, axis=-1)
        return (amplitude * np.exp(-r2 / width ** 2))[..., None]

    return FormField(n, 0, ev, "bump")


def linear_function(coeffs) -> FormField:
    c = np.asarray(coeffs, dtype=float)
    return FormField(len(c), 0, lambda X: (np.asarray(X) @ c)[..., None], "linear")


def conformal_weight(psi: FormField, lam: FormField) -> FormField:
    """e^{(p+1)λ} ψ."""
    p = psi.degree
    return FormField(psi.dim, p, lambda X: np.exp((p + 1) * lam.evaluate(X)) * psi.evaluate(X), f"e^λ{psi.name}")


def conformal_suite(m: int = 2, samples: int = 50, h: float = 5e-3, seed: Optional[int] = None) -> SuiteReport:
    if m < 1:
        raise ValueError("m must be positive")
    start = time.perf_counter()
    plan = default_plan(m, samples, h, seed)
    rep = SuiteReport("conformal", config=_config(m, None, plan))
    n = 2 * m
    if m >= 2:
        G = fubini_study(m)
        f = laplace_eigenfunction(G)
        phi = build_phi_hat(G, f, plan)
        lam = gaussian_bump(n)
        Gh = conformal_rescale(G, lam)
        jets = covariant_jets(Gh, conformal_weight(phi, lam), plan)
        rep.checks.append(check_max("rescaled_phi_hat_twistor", "e^{3λ}φ̂ is twistor for e^{2λ}g",
                                    [twistor_residual(j) for j in jets], 1e-4))
    flat = flat_torus(m)
    lam = linear_function(0.3 * np.arange(1, n + 1) / n)
    psi = FormField.constant(KaehlerFrame(m).omega + ex.basis_form(n, 0, 2), "parallel")
    Gh = conformal_rescale(flat, lam)
    jets = covariant_jets(Gh, conformal_weight(psi, lam), plan)
    rep.checks += [
        check_max("rescaled_parallel_form_twistor", "e^{3λ}ψ is twistor for e^{2λ}g, ψ parallel",
                  [twistor_residual(j) for j in jets], 1e-4),
        check_max("rescaled_parallel_form_not_parallel", "|ψ̂| / |∇ψ̂| stays bounded (ψ̂ is not parallel)",
                  _inverse_gradient(jets), 1e3),
    ]
    return _finish(rep, start)


# ---------------------------------------------------------------- middle dimension

def middim_suite(samples: int = 50, h: float = 5e-3, seed: Optional[int] = None,
                 hess_samples: int = 12) -> SuiteReport:
    """Hodge duality, the parallel splitting, and the middle-degree checks on CP²."""
    start = time.perf_counter()
    seed_val = _seed_from_env() if seed is None else seed
    m = 2
    plan = default_plan(m, samples, h, seed)
    rep = SuiteReport("middim", config=_config(m, m, plan))
    rep.extend(_hodge_checks(seed_val))
    G = fubini_study(m)
    kf = KaehlerFrame(m)
    f = laplace_eigenfunction(G)
    phi = build_phi_hat(G, f, plan)
    shifted = phi + G.omega_field().scaled(0.7)
    wrong = 0
    for j in covariant_jets(G, shifted, plan):
        wrong += not middim_split_check(kf, lefschetz_jets(kf, j), tol=1e-6)
    trig = trig_rational_field(4, 2, seed=7)
    for j in covariant_jets(G, trig, plan):
        wrong += not middim_split_check(kf, lefschetz_jets(kf, j), tol=1e-6)
    rep.checks.append(Check("lefschetz_split_consistency",
                            "a middle-degree form is twistor iff each Lefschetz piece is", float(wrong), 0.0))
    jets = covariant_jets(G, phi, plan)
    rep.checks += [
        check_max("phi_hat_special_middle_form", "φ̂ satisfies the special m-form equation",
                  [specialm_residual(kf, j) for j in jets], 1e-4),
        check_max("special_middle_equals_special2", "special m-form and special 2-form residuals coincide for m = 2",
                  [abs(specialm_residual(kf, j) - special2_residual(kf, j)) for j in jets], 1e-12),
    ]
    hjets = covariant_jets(G, phi, _hess_plan(plan, hess_samples), with_hess=True)
    R = cpm_curvature(m)
    rep.checks.append(check_max("phi_hat_middle_degree_characterization", "Δu = (m+1)/m q(R)u",
                                [middim_characterization_residual(R, j, m) for j in hjets], 1e-3))
    return _finish(rep, start)


def all_suites(samples: int = 50, h: float = 5e-3, seed: Optional[int] = None) -> list[SuiteReport]:
    out = [algebra_suite(seed=seed), commutators_suite(2, samples, h, seed)]
    out += [curvature_suite(m, samples, h, seed) for m in (1, 2, 3)]
    out += [cpn_suite(m, None, samples, h, seed) for m in (1, 2, 3)]
    out.append(conformal_suite(2, samples, h, seed))
    out.append(middim_suite(samples, h, seed))
    return out
