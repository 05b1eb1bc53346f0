"""Finite-difference covariant calculus for form fields on a chart.

Covariant derivatives are taken in coordinates, ∇_a α = ∂_a α - D_a α with
D_a = Σ Γ^k_{ab} dx^b ∧ (∂_k ⌟ ·), and pulled back to the adapted orthonormal
frame only when a :class:`~twistorforms.twistor.CovariantJet` is assembled.
The operators d, δ, d^c, δ^c return new lazily evaluated fields, so they
can be nested (each level adds one stencil).
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from ..exterior import contract_stack, hodge_matrix, wedge_stack
from ..kaehler import KaehlerFrame
from ..twistor import CovariantJet
from .geometry import ChartGeometry, FormField, SamplePlan, compound

__all__ = [
    "fd_partials",
    "coordinate_nabla",
    "coordinate_hessian",
    "to_frame",
    "to_coords",
    "covariant_jet",
    "covariant_jets",
    "numeric_operator",
    "pointwise_operator",
    "pointwise_map",
    "chunked",
    "numerical_riemann",
    "frame_riemann",
]

CHUNK = 1024

_STENCILS = {
    2: (np.array([-1.0, 1.0]), np.array([-0.5, 0.5])),
    4: (np.array([-2.0, -1.0, 1.0, 2.0]), np.array([1 / 12, -2 / 3, 2 / 3, -1 / 12])),
}


def fd_partials(fn: Callable[[np.ndarray], np.ndarray], X: np.ndarray, h: float, order: int = 4) -> np.ndarray:
    """Central-difference partials: (..., n) -> (..., n, *out) with ∂_a in axis -1-len(out)."""
    offs, wts = _STENCILS[order]
    X = np.asarray(X, dtype=float)
    n = X.shape[-1]
    shifts = offs[:, None, None] * h * np.eye(n)[None]
    Y = X[..., None, None, :] + shifts
    vals = np.asarray(fn(Y))
    # vals: (..., stencil, n, *out); contract the stencil axis
    return np.tensordot(vals, wts / h, axes=([X.ndim - 1], [0]))


def chunked(fn: Callable[[np.ndarray], np.ndarray], chunk: int = CHUNK) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap a batched evaluator so large batches are processed in slices.

    Nested finite differences multiply the batch by the stencil size at
    every level; slicing keeps the peak memory bounded.
    """

    def wrapped(X):
        X = np.asarray(X, dtype=float)
        lead = X.shape[:-1]
        flat = X.reshape(-1, X.shape[-1])
        if len(flat) <= chunk:
            out = fn(flat)
        else:
            out = np.concatenate([fn(flat[i:i + chunk]) for i in range(0, len(flat), chunk)])
        return out.reshape(lead + out.shape[1:])

    return wrapped


@lru_cache(maxsize=None)
def _connection_stack(n: int, p: int) -> np.ndarray:
    """WC[b, k] = dx^b ∧ (∂_k ⌟ ·) on Λ^p."""
    W = wedge_stack(n, p - 1)
    C = contract_stack(n, p)
    out = np.einsum("bij,kjl->bkil", W, C)
    out.flags.writeable = False
    return out


def _connection_term(gam: np.ndarray, vals: np.ndarray, n: int, p: int) -> np.ndarray:
    """Σ_{b,k} Γ^k_{ab} WC[b,k] α, shape (..., n, N)."""
    if p == 0:
        return np.zeros(vals.shape[:-1] + (n,) + vals.shape[-1:])
    T = np.einsum("bkIJ,...J->...bkI", _connection_stack(n, p), vals, optimize=True)
    return np.einsum("...kab,...bkI->...aI", gam, T, optimize=True)


def coordinate_nabla(G: ChartGeometry, F: FormField, X: np.ndarray, h: float, order: int = 4) -> np.ndarray:
    """(∇_{∂_a} α)_I at points X, shape (..., n, N)."""
    X = np.asarray(X, dtype=float)
    dF = fd_partials(F.evaluate, X, h, order)
    if F.degree == 0:
        return dF
    return dF - _connection_term(G.christoffel(X), F.evaluate(X), G.n, F.degree)


def coordinate_hessian(G: ChartGeometry, F: FormField, X: np.ndarray, h: float, order: int = 4) -> np.ndarray:
    """(∇²_{∂_a, ∂_b} α)_I = (∇_{∂_a}(∇α))(∂_b), shape (..., n, n, N)."""
    X = np.asarray(X, dtype=float)
    n, p = G.n, F.degree
    outer = fd_partials(lambda Y: coordinate_nabla(G, F, Y, h, order), X, h, order)
    nab = coordinate_nabla(G, F, X, h, order)
    gam = G.christoffel(X)
    # -∇α(∇_a ∂_b)
    out = outer - np.einsum("...kab,...kI->...abI", gam, nab)
    if p > 0:
        T = np.einsum("bkIJ,...cJ->...cbkI", _connection_stack(n, p), nab, optimize=True)
        out = out - np.einsum("...kac,...bckI->...abI", gam, T, optimize=True)
    return out


def to_frame(P: np.ndarray, coeffs: np.ndarray, p: int) -> np.ndarray:
    """Coordinate coefficients of a p-form to adapted-frame coefficients."""
    return np.einsum("...JI,...J->...I", compound(P, p), coeffs)


def to_coords(P: np.ndarray, coeffs: np.ndarray, p: int) -> np.ndarray:
    """Adapted-frame coefficients back to the coordinate coframe."""
    return np.einsum("...JI,...J->...I", compound(np.linalg.inv(P), p), coeffs)


def _jet_arrays(G: ChartGeometry, F: FormField, X: np.ndarray, h: float, order: int, with_hess: bool):
    P = G.frame(X)
    p = F.degree
    C = compound(P, p)
    value = np.einsum("...JI,...J->...I", C, F.evaluate(X))
    nab = coordinate_nabla(G, F, X, h, order)
    grad = np.einsum("...ai,...JI,...aJ->...iI", P, C, nab)
    hess = None
    if with_hess:
        H = coordinate_hessian(G, F, X, h, order)
        hess = np.einsum("...ai,...bj,...JI,...abJ->...ijI", P, P, C, H, optimize=True)
    return value, grad, hess


def covariant_jet(G: ChartGeometry, F: FormField, x, plan: SamplePlan | None = None,
                  with_hess: bool = False, h: float | None = None, order: int | None = None) -> CovariantJet:
    """Jet of F at a single point, in the adapted orthonormal frame there."""
    h = h if h is not None else (plan.h if plan else 5e-3)
    order = order if order is not None else (plan.order if plan else 4)
    x = np.asarray(x, dtype=float)
    value, grad, hess = _jet_arrays(G, F, x, h, order, with_hess)
    return CovariantJet(value, grad, hess, G.n, F.degree)


def covariant_jets(G: ChartGeometry, F: FormField, plan: SamplePlan, with_hess: bool = False) -> list[CovariantJet]:
    """Jets at every plan point (one batched evaluation)."""
    value, grad, hess = _jet_arrays(G, F, plan.points, plan.h, plan.order, with_hess)
    return [CovariantJet(value[k], grad[k], None if hess is None else hess[k], G.n, F.degree)
            for k in range(len(plan))]


def _covector_j(G: ChartGeometry, X: np.ndarray) -> np.ndarray:
    """Matrix of J on coordinate covectors: (Jξ)_b = -ξ_a J^a_b, column a = J dx^a."""
    return -np.swapaxes(G.jfield(X), -1, -2)


def numeric_operator(G: ChartGeometry, F: FormField, which: str, plan: SamplePlan | None = None,
                     h: float | None = None, order: int | None = None) -> FormField:
    """Lazily evaluated d, delta, dc or deltac of F by finite differences."""
    h = h if h is not None else (plan.h if plan else 5e-3)
    order = order if order is not None else (plan.order if plan else 4)
    n, p = G.n, F.degree
    if which == "d":
        if p >= n:
            raise ValueError("d of a top-degree form is zero; nothing to evaluate")
        W = wedge_stack(n, p)

        def ev(X):
            return np.einsum("aIJ,...aJ->...I", W, fd_partials(F.evaluate, X, h, order))

        return FormField(n, p + 1, chunked(ev), f"d{F.name}")
    if which == "dc":
        if p >= n:
            raise ValueError("d^c of a top-degree form is zero; nothing to evaluate")
        W = wedge_stack(n, p)

        def ev(X):
            nab = coordinate_nabla(G, F, X, h, order)
            Jc = _covector_j(G, X)  # (..., b, a): component b of J dx^a
            return np.einsum("...ba,bIJ,...aJ->...I", Jc, W, nab, optimize=True)

        return FormField(n, p + 1, chunked(ev), f"dc{F.name}")
    if which in ("delta", "deltac"):
        if p == 0:
            raise ValueError(f"{which} of a function is zero; nothing to evaluate")
        C = contract_stack(n, p)

        def ev(X, twisted=(which == "deltac")):
            nab = coordinate_nabla(G, F, X, h, order)
            ginv = np.linalg.inv(G.metric(X))
            if twisted:
                # Σ_i Je_i ⊗ e_i = g^{ab} J∂_a ⊗ ∂_b
                ginv = np.einsum("...ca,...ab->...cb", G.jfield(X), ginv)
            # ι_{∂_c} on coordinate forms, with vector index raised by ginv
            return -np.einsum("...cb,cIJ,...bJ->...I", ginv, C, nab, optimize=True)

        return FormField(n, p - 1, chunked(ev), f"{which}{F.name}")
    raise ValueError(f"unknown operator {which!r}; expected d, delta, dc or deltac")


def pointwise_map(G: ChartGeometry, F: FormField, mat: np.ndarray, degree: int, name: str = "") -> FormField:
    """Apply a constant matrix in the adapted frame, pointwise (L, Λ, J, * and their combinations)."""
    mat = np.asarray(mat, dtype=float)
    p = F.degree

    def ev(X):
        P = G.frame(X)
        frame_vals = to_frame(P, F.evaluate(X), p)
        return to_coords(P, frame_vals @ mat.T, degree)

    return FormField(G.n, degree, chunked(ev), name or f"M{F.name}")


def pointwise_operator(G: ChartGeometry, F: FormField, which: str) -> FormField:
    """L, Lambda, J or star applied pointwise, via the adapted frame."""
    f = KaehlerFrame(G.m)
    n, p = G.n, F.degree
    if which == "L":
        if p + 2 > n:
            raise ValueError("L raises degree past the dimension")
        q, mat = p + 2, f.L_matrix(p)
    elif which == "Lambda":
        if p < 2:
            raise ValueError("Lambda lowers degree by two; field degree is below 2")
        q, mat = p - 2, f.Lambda_matrix(p)
    elif which == "J":
        q, mat = p, f.J_matrix(p)
    elif which == "star":
        q, mat = n - p, hodge_matrix(n, p)
    else:
        raise ValueError(f"unknown pointwise operator {which!r}")
    return pointwise_map(G, F, mat, q, f"{which}{F.name}")


def numerical_riemann(G: ChartGeometry, X: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """⟨R(∂_a,∂_b)∂_c, ∂_e⟩ from finite differences of the Christoffel symbols."""
    X = np.asarray(X, dtype=float)
    gam = G.christoffel(X)
    dgam = fd_partials(G.christoffel, X, h, 4)  # (..., a, k, b, c) = ∂_a Γ^k_{bc}
    # R^d_{c a b} = ∂_a Γ^d_{bc} - ∂_b Γ^d_{ac} + Γ^d_{ae} Γ^e_{bc} - Γ^d_{be} Γ^e_{ac}
    term = np.einsum("...adbc->...abcd", dgam)
    quad = np.einsum("...dae,...ebc->...abcd", gam, gam)
    Rup = term - np.swapaxes(term, -4, -3) + quad - np.swapaxes(quad, -4, -3)
    return np.einsum("...abcd,...de->...abce", Rup, G.metric(X))


def frame_riemann(G: ChartGeometry, X: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """Riemann tensor R[i,j,k,l] = ⟨R(E_i,E_j)E_k, E_l⟩ in the adapted frame."""
    P = G.frame(X)
    R = numerical_riemann(G, X, h)
    return np.einsum("...abce,...ai,...bj,...ck,...el->...ijkl", R, P, P, P, P, optimize=True)
