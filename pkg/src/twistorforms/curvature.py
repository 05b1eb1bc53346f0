"""Curvature endomorphism q(R), Weitzenböck identities and the CP^m model.

Sign conventions
----------------
``R_{X,Y} = ∇_X∇_Y - ∇_Y∇_X - ∇_{[X,Y]}``.  The stored curvature operator
ℛ on Λ² satisfies <ℛ(X∧Y), Z∧W> = <R_{X,Y}W, Z>, so ℛ = id on the unit
sphere and <ℛ(X∧Y), X∧Y> is the sectional curvature.  A bivector acts on
forms by (X∧Y)• = X∧(Y⌟·) - Y∧(X⌟·); then R_{X,Y} = ℛ(X∧Y)• and

    q(R) = Σ_{i,j} e_j ∧ e_i ⌟ R_{e_i,e_j} = -Σ_{i<j} (e_i∧e_j)• ℛ(e_i∧e_j)•,

which is positive on the sphere (q(R)ξ = Ric ξ on 1-forms).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .exterior import AlternatingForm, contract_stack, derivation_matrix, wedge_stack
from .kaehler import KaehlerFrame
from .twistor import CovariantJet, relative_residual

__all__ = [
    "CurvatureOperator",
    "bivector_action",
    "qR_matrix",
    "qR_apply",
    "qR_bruteforce_matrix",
    "cpm_curvature",
    "cpm_riemann_tensor",
    "flat_curvature",
    "laplacian_terms",
    "integrability_residual",
    "killing_form_residual",
    "weitzenboeck_residual",
    "middim_characterization_residual",
]


def _pairs(n: int) -> list[tuple[int, int]]:
    return list(combinations(range(n), 2))


@dataclass(frozen=True)
class CurvatureOperator:
    """Symmetric operator on Λ² in the basis e_i ∧ e_j (i < j)."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float)
        size = comb(self.dim, 2)
        if mat.shape != (size, size):
            raise ValueError(f"expected a {size}x{size} matrix, got {mat.shape}")
        if not np.allclose(mat, mat.T, atol=1e-12):
            raise ValueError("curvature operator must be symmetric")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_riemann(cls, riem: np.ndarray) -> "CurvatureOperator":
        """From R[a,b,c,d] = <R_{e_a,e_b} e_c, e_d> in an orthonormal frame."""
        n = riem.shape[0]
        pairs = _pairs(n)
        mat = np.empty((len(pairs), len(pairs)))
        for A, (a, b) in enumerate(pairs):
            for B, (c, d) in enumerate(pairs):
                # <ℛ(e_a∧e_b), e_c∧e_d> = <R_{e_a,e_b} e_d, e_c>
                mat[B, A] = riem[a, b, d, c]
        return cls(n, 0.5 * (mat + mat.T))

    def riemann(self) -> np.ndarray:
        """Inverse of :meth:`from_riemann`."""
        n = self.dim
        pairs = _pairs(n)
        riem = np.zeros((n, n, n, n))
        for A, (a, b) in enumerate(pairs):
            for B, (c, d) in enumerate(pairs):
                v = self.matrix[B, A]
                riem[a, b, d, c] = v
                riem[b, a, d, c] = -v
                riem[a, b, c, d] = -v
                riem[b, a, c, d] = v
        return riem

    def sectional(self, x: np.ndarray, y: np.ndarray) -> float:
        """Sectional curvature of the plane spanned by vectors x, y."""
        biv = np.array([x[a] * y[b] - x[b] * y[a] for a, b in _pairs(self.dim)])
        return float(biv @ self.matrix @ biv / (biv @ biv))

    def ricci(self) -> np.ndarray:
        riem = self.riemann()
        # Ric(Y, Z) = Σ_i <R_{e_i,Y} Z, e_i>
        return np.einsum("iyzi->yz", riem)


@lru_cache(maxsize=None)
def _bivector_actions(n: int, p: int) -> np.ndarray:
    """Stack of (e_a∧e_b)• on Λ^p for a < b."""
    out = []
    for a, b in _pairs(n):
        endo = np.zeros((n, n))
        endo[a, b] = 1.0   # e_b ↦ e_a
        endo[b, a] = -1.0  # e_a ↦ -e_b
        out.append(derivation_matrix(endo, p))
    arr = np.stack(out)
    arr.flags.writeable = False
    return arr


def bivector_action(biv: AlternatingForm, p: int) -> np.ndarray:
    """Matrix of biv• on Λ^p."""
    return np.tensordot(biv.coeffs, _bivector_actions(biv.dim, p), axes=1)


def qR_matrix(R: CurvatureOperator, p: int, basis: np.ndarray | None = None) -> np.ndarray:
    """q(R) on Λ^p as -Σ_A A• ℛ(A)•.

    ``basis`` optionally gives another orthonormal basis of Λ² (rows = bivectors).
    """
    acts = _bivector_actions(R.dim, p)
    if basis is None:
        basis = np.eye(R.matrix.shape[0])
    A_acts = np.tensordot(basis, acts, axes=1)
    RA = basis @ R.matrix.T  # row k: coefficients of ℛ(A_k)
    RA_acts = np.tensordot(RA, acts, axes=1)
    return -np.einsum("kij,kjl->il", A_acts, RA_acts)


def qR_apply(R: CurvatureOperator, f: KaehlerFrame | None, a: AlternatingForm) -> AlternatingForm:
    if a.dim != R.dim:
        raise ValueError(f"form in R^{a.dim}, curvature in R^{R.dim}")
    if f is not None and f.n != R.dim:
        raise ValueError("frame and curvature dimensions differ")
    return AlternatingForm(a.dim, a.degree, qR_matrix(R, a.degree) @ a.coeffs)


def qR_bruteforce_matrix(riem: np.ndarray, p: int) -> np.ndarray:
    """q(R) = Σ_{i,j} e_j ∧ e_i ⌟ R_{e_i,e_j} straight from the Riemann tensor."""
    n = riem.shape[0]
    if p == 0:
        return np.zeros((1, 1))
    W = wedge_stack(n, p - 1)
    C = contract_stack(n, p)
    size = comb(n, p)
    out = np.zeros((size, size))
    for i in range(n):
        for j in range(n):
            # matrix of R_{e_i,e_j} on vectors: column c is R_{e_i,e_j} e_c
            endo = riem[i, j].T
            out += W[j] @ C[i] @ derivation_matrix(endo, p)
    return out


@lru_cache(maxsize=None)
def _cpm_riemann(m: int) -> np.ndarray:
    f = KaehlerFrame(m)
    n = f.n
    J = f.J
    E = np.eye(n)
    riem = np.zeros((n, n, n, n))

    def wedge_act(x, y, z):
        # (X∧Y)Z = <X,Z>Y - <Y,Z>X
        return (x @ z) * y - (y @ z) * x

    for a in range(n):
        for b in range(n):
            X, Y = E[a], E[b]
            omega_xy = (J @ X) @ Y
            for c in range(n):
                Z = E[c]
                RZ = -(wedge_act(X, Y, Z) + wedge_act(J @ X, J @ Y, Z)) - 2.0 * omega_xy * (J @ Z)
                riem[a, b, c] = RZ
    riem.flags.writeable = False
    return riem


def cpm_riemann_tensor(m: int) -> np.ndarray:
    """R[a,b,c,d] = <R_{e_a,e_b}e_c, e_d> for Fubini–Study CP^m in the adapted frame."""
    return _cpm_riemann(m)


def cpm_curvature(m: int) -> CurvatureOperator:
    """Curvature operator of CP^m with holomorphic sectional curvature 4.

    Assembled from R_{X,Y}Z = -(X∧Y + JX∧JY)Z - 2ω(X,Y)JZ, with pair symmetry
    and the first Bianchi identity checked on construction.
    """
    if m < 1:
        raise ValueError("m must be positive")
    riem = cpm_riemann_tensor(m)
    if not np.allclose(riem, -riem.transpose(1, 0, 2, 3)):
        raise ArithmeticError("curvature not skew in its first pair")
    if not np.allclose(riem, riem.transpose(2, 3, 0, 1)):
        raise ArithmeticError("curvature lacks pair symmetry")
    bianchi = riem + riem.transpose(1, 2, 0, 3) + riem.transpose(2, 0, 1, 3)
    if not np.allclose(bianchi, 0.0):
        raise ArithmeticError("first Bianchi identity fails")
    return CurvatureOperator.from_riemann(riem)


def flat_curvature(n: int) -> CurvatureOperator:
    return CurvatureOperator(n, np.zeros((comb(n, 2), comb(n, 2))))


def _require_hess(j: CovariantJet):
    if j.hess is None:
        raise ValueError("this check needs second covariant derivatives (hess)")


def laplacian_terms(j: CovariantJet) -> dict[str, np.ndarray]:
    """δdψ, dδψ and the rough Laplacian ∇*∇ψ from a jet with hess."""
    _require_hess(j)
    n, p = j.dim, j.degree
    size = comb(n, p)
    H = j.hess
    delta_d = np.zeros(size)
    d_delta = np.zeros(size)
    if p < n:
        W = wedge_stack(n, p)
        Cp1 = contract_stack(n, p + 1)
        delta_d = -np.einsum("iab,jbc,ijc->a", Cp1, W, H)
    if p > 0:
        C = contract_stack(n, p)
        Wm1 = wedge_stack(n, p - 1)
        d_delta = -np.einsum("iab,jbc,ijc->a", Wm1, C, H)
    rough = -np.einsum("iic->c", H)
    return {"delta_d": delta_d, "d_delta": d_delta, "rough": rough}


def integrability_residual(R: CurvatureOperator, j: CovariantJet) -> float:
    """Relative defect of q(R)ψ = p/(p+1) δdψ + (n-p)/(n-p+1) dδψ."""
    _require_hess(j)
    n, p = j.dim, j.degree
    t = laplacian_terms(j)
    lhs = qR_matrix(R, p) @ j.value
    rhs = p / (p + 1) * t["delta_d"] + (n - p) / (n - p + 1) * t["d_delta"]
    return relative_residual(lhs, rhs)


def killing_form_residual(R: CurvatureOperator, j: CovariantJet) -> float:
    """Relative defect of Δψ = (p+1)/p q(R)ψ, the Killing-form criterion for coclosed ψ."""
    _require_hess(j)
    p = j.degree
    if p == 0:
        raise ValueError("Killing forms have positive degree")
    t = laplacian_terms(j)
    lap = t["delta_d"] + t["d_delta"]
    return relative_residual(lap, (p + 1) / p * (qR_matrix(R, p) @ j.value))


def weitzenboeck_residual(R: CurvatureOperator, j: CovariantJet) -> float:
    """Relative defect of Δψ = ∇*∇ψ + q(R)ψ."""
    _require_hess(j)
    t = laplacian_terms(j)
    lap = t["delta_d"] + t["d_delta"]
    q = qR_matrix(R, j.degree) @ j.value
    scale = max(np.linalg.norm(lap), np.linalg.norm(t["rough"]), np.linalg.norm(q))
    diff = float(np.linalg.norm(lap - t["rough"] - q))
    return diff if scale < 1e-14 else diff / float(scale)


def middim_characterization_residual(R: CurvatureOperator, j: CovariantJet, m: int,
                                     coefficient: float | None = None) -> float:
    """Relative defect of Δu = (m+1)/m q(R)u for an m-form in dimension 2m.

    ``coefficient`` overrides (m+1)/m; used to confirm the check is sensitive.
    """
    _require_hess(j)
    if j.dim != 2 * m:
        raise ValueError(f"jet dimension {j.dim} is not 2m = {2 * m}")
    if j.degree != m:
        raise ValueError(f"middle-degree check needs degree m = {m}, got {j.degree}")
    c = (m + 1) / m if coefficient is None else coefficient
    t = laplacian_terms(j)
    lap = t["delta_d"] + t["d_delta"]
    return relative_residual(lap, c * (qR_matrix(R, m) @ j.value))
