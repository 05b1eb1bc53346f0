"""Pointwise Kähler operators on Λ^*(R^{2m}) in an adapted orthonormal frame.

The frame is (e_1, e_2 = J e_1, ..., e_{2m-1}, e_{2m} = J e_{2m-1}), so
ω = Σ e_{2i-1} ∧ e_{2i} and ω(X, Y) = <JX, Y>.  Indices are zero-based in
code: J e_{2i} = e_{2i+1}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from typing import NamedTuple

import numpy as np

from .exterior import (
    AlternatingForm,
    derivation_matrix,
    hodge_matrix,
    wedge_stack,
)

__all__ = [
    "KaehlerFrame",
    "LefschetzDecomposition",
    "EigenLevel",
    "lefschetz_L",
    "lefschetz_Lambda",
    "j_extension",
    "type_project",
    "admissible_types",
    "lefschetz_decompose",
    "commutator_Lambda_Ls",
    "lambda_l_eigencheck",
    "lambda_power_coefficient",
    "lambda_l_eigenvalue",
]


@lru_cache(maxsize=None)
def _complex_structure(m: int) -> np.ndarray:
    n = 2 * m
    J = np.zeros((n, n))
    for i in range(m):
        J[2 * i + 1, 2 * i] = 1.0
        J[2 * i, 2 * i + 1] = -1.0
    J.flags.writeable = False
    return J


@lru_cache(maxsize=None)
def _L_matrix(m: int, p: int) -> np.ndarray:
    n = 2 * m
    if p + 2 > n:
        mat = np.zeros((comb(n, p + 2), comb(n, p)))
    else:
        W1 = wedge_stack(n, p + 1)
        W0 = wedge_stack(n, p)
        mat = sum(W1[2 * i] @ W0[2 * i + 1] for i in range(m))
    mat = np.asarray(mat, dtype=float)
    mat.flags.writeable = False
    return mat


@lru_cache(maxsize=None)
def _Lambda_matrix(m: int, p: int) -> np.ndarray:
    if p >= 2:
        mat = _L_matrix(m, p - 2).T.copy()
    else:
        # no forms of negative degree; Λ is reported as the zero function
        mat = np.zeros((1, comb(2 * m, p)))
    mat.flags.writeable = False
    return mat


@lru_cache(maxsize=None)
def _J_matrix(m: int, p: int) -> np.ndarray:
    mat = derivation_matrix(_complex_structure(m), p)
    mat.flags.writeable = False
    return mat


@dataclass(frozen=True)
class KaehlerFrame:
    """Adapted frame of C^m = R^{2m} with its complex structure and Kähler form."""

    m: int
    J: np.ndarray = field(init=False, repr=False, compare=False)
    omega: AlternatingForm = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"complex dimension must be positive, got {self.m}")
        object.__setattr__(self, "J", _complex_structure(self.m))
        object.__setattr__(self, "omega", AlternatingForm(self.n, 2, _L_matrix(self.m, 0)[:, 0]))

    @property
    def n(self) -> int:
        return 2 * self.m

    # cached operator matrices on Λ^p
    def L_matrix(self, p: int) -> np.ndarray:
        return _L_matrix(self.m, p)

    def Lambda_matrix(self, p: int) -> np.ndarray:
        return _Lambda_matrix(self.m, p)

    def J_matrix(self, p: int) -> np.ndarray:
        return _J_matrix(self.m, p)

    def star_matrix(self, p: int) -> np.ndarray:
        return hodge_matrix(self.n, p)

    def Jvec(self, x: np.ndarray) -> np.ndarray:
        """J applied to covector coefficients (vectors and covectors identified)."""
        return self.J @ x

    def _check(self, a: AlternatingForm):
        if a.dim != self.n:
            raise ValueError(f"form lives in R^{a.dim}, frame in R^{self.n}")


class LefschetzDecomposition(NamedTuple):
    """u = Σ_i L^i u_i with every u_i primitive of degree p - 2i."""

    degree: int
    components: tuple  # tuple[AlternatingForm, ...]

    def reassemble(self, frame: KaehlerFrame) -> AlternatingForm:
        total = AlternatingForm.zero(frame.n, self.degree)
        for i, ui in enumerate(self.components):
            total = total + lefschetz_L_power(frame, ui, i)
        return total


class EigenLevel(NamedTuple):
    level: int
    eigenvalue: int
    residual: float


def lefschetz_L(f: KaehlerFrame, a: AlternatingForm) -> AlternatingForm:
    f._check(a)
    if a.degree + 2 > f.n:
        return AlternatingForm.zero(f.n, f.n)
    return AlternatingForm(f.n, a.degree + 2, f.L_matrix(a.degree) @ a.coeffs)


def lefschetz_L_power(f: KaehlerFrame, a: AlternatingForm, s: int) -> AlternatingForm:
    for _ in range(s):
        a = lefschetz_L(f, a)
    return a


def lefschetz_Lambda(f: KaehlerFrame, a: AlternatingForm) -> AlternatingForm:
    f._check(a)
    if a.degree < 2:
        return AlternatingForm.zero(f.n, 0)
    return AlternatingForm(f.n, a.degree - 2, f.Lambda_matrix(a.degree) @ a.coeffs)


def j_extension(f: KaehlerFrame, a: AlternatingForm) -> AlternatingForm:
    """Ju = Σ J(e_i) ∧ (e_i ⌟ u), the derivation extending J from 1-forms."""
    f._check(a)
    return AlternatingForm(f.n, a.degree, f.J_matrix(a.degree) @ a.coeffs)


def admissible_types(f: KaehlerFrame, p: int) -> list[int]:
    """Values s = |a - b| occurring for (a, b)-forms of total degree p."""
    top = min(p, f.n - p)
    return [s for s in range(top + 1) if (s - p) % 2 == 0]


@lru_cache(maxsize=None)
def _type_projector(m: int, p: int, s: int) -> np.ndarray:
    f = KaehlerFrame(m)
    J2 = f.J_matrix(p) @ f.J_matrix(p)
    size = J2.shape[0]
    P = np.eye(size)
    for t in admissible_types(f, p):
        if t != s:
            P = P @ (J2 + t * t * np.eye(size)) / (t * t - s * s)
    P.flags.writeable = False
    return P


def type_project(f: KaehlerFrame, a: AlternatingForm, s: int) -> AlternatingForm:
    """Component of ``a`` in the J²-eigenspace with eigenvalue -s².

    Built as the Lagrange polynomial in J² over the known spectrum, so the
    projections over all admissible s sum to the identity.
    """
    f._check(a)
    if s not in admissible_types(f, a.degree):
        return AlternatingForm.zero(f.n, a.degree)
    return AlternatingForm(f.n, a.degree, _type_projector(f.m, a.degree, s) @ a.coeffs)


def lambda_power_coefficient(m: int, p: int, r: int, s: int) -> float:
    """c with Λ^r L^s α = c L^{s-r} α for primitive α of degree p (0 if r > s)."""
    if r > s:
        return 0.0
    if m - p - s < 0:
        # L^s α vanishes once the degree passes the middle by more than allowed
        return 0.0
    return factorial(s) * factorial(m - p - s + r) / (factorial(s - r) * factorial(m - p - s))


def lefschetz_decompose(f: KaehlerFrame, a: AlternatingForm) -> LefschetzDecomposition:
    """Primitive decomposition u = u_0 + L u_1 + ... + L^l u_l for deg u ≤ m.

    Peels from the top: Λ^l kills every level below l, and on level l it
    acts as the scalar l!(m-q)!/(m-q-l)! with q = p - 2l.
    """
    f._check(a)
    p = a.degree
    if p > f.m:
        raise ValueError(f"degree {p} exceeds m = {f.m}; decompose the Hodge dual instead")
    top = p // 2
    comps = [None] * (top + 1)
    rest = a
    for level in range(top, -1, -1):
        q = p - 2 * level
        proj = rest
        for _ in range(level):
            proj = lefschetz_Lambda(f, proj)
        ul = proj / lambda_power_coefficient(f.m, q, level, level)
        comps[level] = ul
        rest = rest - lefschetz_L_power(f, ul, level)
    return LefschetzDecomposition(p, tuple(comps))


def commutator_Lambda_Ls(f: KaehlerFrame, alpha: AlternatingForm, s: int) -> AlternatingForm:
    """[Λ, L^s] α = Λ L^s α - L^s Λ α."""
    if s < 1:
        raise ValueError("s must be a positive integer")
    first = lefschetz_Lambda(f, lefschetz_L_power(f, alpha, s))
    lam = lefschetz_Lambda(f, alpha)
    if alpha.degree < 2:
        return first
    return first - lefschetz_L_power(f, lam, s)


def lambda_l_eigenvalue(m: int, p: int, i: int) -> int:
    """Eigenvalue of ΛL on L^i(primitive) inside Λ^p."""
    return (i + 1) * (m - p + i)


def lambda_l_eigencheck(f: KaehlerFrame, a: AlternatingForm, tol: float = 1e-10) -> list[EigenLevel]:
    """Report (level, eigenvalue, residual) for each nonzero Lefschetz level of ``a``.

    Raises ``ArithmeticError`` if some level fails the eigen-equation at ``tol``.
    """
    dec = lefschetz_decompose(f, a)
    out = []
    for i, ui in enumerate(dec.components):
        piece = lefschetz_L_power(f, ui, i)
        if piece.norm() <= 1e-14 * max(a.norm(), 1.0):
            continue
        ev = lambda_l_eigenvalue(f.m, a.degree, i)
        q = a.degree
        if q + 2 > f.n:
            image = AlternatingForm.zero(f.n, q)
        else:
            image = AlternatingForm(f.n, q, f.Lambda_matrix(q + 2) @ (f.L_matrix(q) @ piece.coeffs))
        res = (image - ev * piece).norm() / piece.norm()
        if res > tol:
            raise ArithmeticError(f"level {i}: ΛL residual {res:.3e} exceeds {tol:g}")
        out.append(EigenLevel(i, ev, res))
    return out
