"""Model Kähler geometries on a coordinate chart, plus sampling plans.

Coordinates are real and interleaved, x = (x_1, y_1, ..., x_m, y_m) with
z_k = x_k + i y_k, so J ∂_{x_k} = ∂_{y_k} matches the adapted-frame
convention of :mod:`twistorforms.kaehler`.  All geometry callables are
vectorized over leading batch axes: ``metric(X)`` maps (..., n) to (..., n, n).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

from ..exterior import AlternatingForm, compound_indices

__all__ = [
    "ChartGeometry",
    "FormField",
    "SamplePlan",
    "DEFAULT_SEED",
    "fubini_study",
    "flat_torus",
    "conformal_rescale",
    "compound",
    "fs_christoffel_from_metric",
]

DEFAULT_SEED = 20240229


def _seed_from_env(default: int = DEFAULT_SEED) -> int:
    raw = os.environ.get("TWISTOR_SEED")
    return int(raw) if raw else default


def compound(P: np.ndarray, p: int) -> np.ndarray:
    """p-th compound matrix, C[..., J, I] = det P[..., J, I] over basis(n, p)."""
    n = P.shape[-1]
    if p == 0:
        return np.ones(P.shape[:-2] + (1, 1))
    if p == 1:
        return P
    if p == n:
        return np.linalg.det(P)[..., None, None]
    idx = compound_indices(n, p)
    sub = P[..., idx[:, None, :, None], idx[None, :, None, :]]
    if p == 2:
        return sub[..., 0, 0] * sub[..., 1, 1] - sub[..., 0, 1] * sub[..., 1, 0]
    return np.linalg.det(sub)


@dataclass(frozen=True)
class FormField:
    """A p-form field on the chart, coefficients in the coordinate coframe dx^I.

    ``evaluate`` maps points of shape (..., n) to coefficients (..., C(n,p)).
    """

    dim: int
    degree: int
    evaluate: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    name: str = ""

    def __call__(self, x) -> AlternatingForm:
        x = np.asarray(x, dtype=float)
        return AlternatingForm(self.dim, self.degree, self.evaluate(x))

    @property
    def size(self) -> int:
        return comb(self.dim, self.degree)

    def __add__(self, other: "FormField") -> "FormField":
        if (self.dim, self.degree) != (other.dim, other.degree):
            raise ValueError("fields of different dimension or degree")
        return FormField(self.dim, self.degree, lambda X: self.evaluate(X) + other.evaluate(X),
                         f"({self.name} + {other.name})")

    def __sub__(self, other: "FormField") -> "FormField":
        return self + other.scaled(-1.0)

    def scaled(self, c: float) -> "FormField":
        return FormField(self.dim, self.degree, lambda X: c * self.evaluate(X), f"{c:g}·{self.name}")

    def times(self, fn: "FormField") -> "FormField":
        """Pointwise product with a function (degree-0 field)."""
        if fn.degree != 0:
            raise ValueError("multiplier must be a function")
        return FormField(self.dim, self.degree, lambda X: fn.evaluate(X) * self.evaluate(X),
                         f"{fn.name}·{self.name}")

    @classmethod
    def constant(cls, form: AlternatingForm, name: str = "const") -> "FormField":
        c = form.coeffs.copy()
        return cls(form.dim, form.degree,
                   lambda X: np.broadcast_to(c, np.shape(X)[:-1] + c.shape).copy(), name)


@dataclass(frozen=True)
class ChartGeometry:
    """Metric, complex structure and Levi-Civita connection on a chart.

    ``christoffel(X)[..., k, a, b]`` is Γ^k_{ab}, the ∂_k component of ∇_{∂_a}∂_b.
    ``jfield(X)[..., a, b]`` is the matrix of J on vectors (column b = J∂_b).
    """

    m: int
    metric: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    jfield: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    christoffel: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    model: str = "custom"
    kaehler: bool = True
    base: Optional["ChartGeometry"] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return 2 * self.m

    def frame(self, X: np.ndarray) -> np.ndarray:
        """Adapted orthonormal frame P (columns E_i) with E_{2k+1} = J E_{2k}.

        Hermitian Gram–Schmidt on ∂_{x_1}, ∂_{x_2}, ...; the span of earlier
        frame vectors is J-invariant, so J of a unit vector orthogonal to it
        completes the pair.
        """
        X = np.asarray(X, dtype=float)
        g = self.metric(X)
        J = self.jfield(X)
        n = self.n
        P = np.zeros(X.shape[:-1] + (n, n))
        for k in range(self.m):
            v = np.zeros(X.shape[:-1] + (n,))
            v[..., 2 * k] = 1.0
            for j in range(2 * k):
                E = P[..., :, j]
                v = v - np.einsum("...a,...ab,...b->...", v, g, E)[..., None] * E
            v = v / np.sqrt(np.einsum("...a,...ab,...b->...", v, g, v))[..., None]
            P[..., :, 2 * k] = v
            P[..., :, 2 * k + 1] = np.einsum("...ab,...b->...a", J, v)
        return P

    def omega_coords(self, X: np.ndarray) -> np.ndarray:
        """Kähler form ω(X,Y) = g(JX,Y) on dx^a ∧ dx^b, a < b."""
        X = np.asarray(X, dtype=float)
        om = np.einsum("...ca,...cb->...ab", self.jfield(X), self.metric(X))
        idx = compound_indices(self.n, 2)
        return om[..., idx[:, 0], idx[:, 1]]

    def omega_field(self) -> FormField:
        return FormField(self.n, 2, self.omega_coords, "omega")

    def volume_density(self, X: np.ndarray) -> np.ndarray:
        return np.sqrt(np.linalg.det(self.metric(X)))


def _complex_coords(X: np.ndarray) -> np.ndarray:
    return X[..., 0::2] + 1j * X[..., 1::2]


def _real_basis(m: int) -> np.ndarray:
    """Row a holds the holomorphic components of ∂_{x_a}."""
    V = np.zeros((2 * m, m), dtype=complex)
    for k in range(m):
        V[2 * k, k] = 1.0
        V[2 * k + 1, k] = 1j
    return V


def _standard_j(m: int) -> np.ndarray:
    n = 2 * m
    J = np.zeros((n, n))
    for k in range(m):
        J[2 * k + 1, 2 * k] = 1.0
        J[2 * k, 2 * k + 1] = -1.0
    return J


def _constant_j(m: int):
    J0 = _standard_j(m)

    def jfield(X):
        X = np.asarray(X)
        return np.broadcast_to(J0, X.shape[:-1] + J0.shape)

    return jfield


def fubini_study(m: int) -> ChartGeometry:
    """CP^m in the affine chart z ↦ [1 : z], normalized so Ric = 2(m+1) g.

    Hermitian metric h_{i j̄} = ((1+|z|²)δ_ij - z̄_i z_j)/(1+|z|²)²; the
    holomorphic Christoffels are Γ^k_{ij} = -(δ_ik z̄_j + δ_jk z̄_i)/(1+|z|²).
    """
    if m < 1:
        raise ValueError("m must be positive")
    V = _real_basis(m)
    eye = np.eye(m)

    def metric(X):
        X = np.asarray(X, dtype=float)
        z = _complex_coords(X)
        sigma = 1.0 + np.sum(np.abs(z) ** 2, axis=-1)
        h = (sigma[..., None, None] * eye - np.conj(z)[..., :, None] * z[..., None, :]) / sigma[..., None, None] ** 2
        return np.real(np.einsum("ai,...ij,bj->...ab", V, h, np.conj(V)))

    def christoffel(X):
        X = np.asarray(X, dtype=float)
        z = _complex_coords(X)
        sigma = 1.0 + np.sum(np.abs(z) ** 2, axis=-1)
        zb = np.conj(z) / sigma[..., None]
        gam = -(np.einsum("ik,...j->...kij", eye, zb) + np.einsum("jk,...i->...kij", eye, zb))
        cplx = np.einsum("...kij,ai,bj->...kab", gam, V, V)
        out = np.empty(X.shape[:-1] + (2 * m, 2 * m, 2 * m))
        out[..., 0::2, :, :] = cplx.real
        out[..., 1::2, :, :] = cplx.imag
        return out

    return ChartGeometry(m, metric, _constant_j(m), christoffel, "fubini_study", True)


def flat_torus(m: int) -> ChartGeometry:
    """Flat R^{2m} with the standard complex structure (local model of a flat torus)."""
    n = 2 * m
    eye = np.eye(n)

    def metric(X):
        X = np.asarray(X)
        return np.broadcast_to(eye, X.shape[:-1] + (n, n))

    def christoffel(X):
        X = np.asarray(X)
        return np.zeros(X.shape[:-1] + (n, n, n))

    return ChartGeometry(m, metric, _constant_j(m), christoffel, "flat_torus", True)


def conformal_rescale(G: ChartGeometry, lam: FormField, h: float = 1e-3) -> ChartGeometry:
    """The geometry (e^{2λ} g, J) with Christoffels from the conformal-change formula

        Γ̂^k_{ab} = Γ^k_{ab} + δ^k_a ∂_bλ + δ^k_b ∂_aλ - g_{ab} g^{kl} ∂_lλ.

    ∂λ is taken by fourth-order central differences with step ``h``.
    """
    if lam.degree != 0:
        raise ValueError("conformal factor must be a function")
    from .calculus import fd_partials

    n = G.n
    eye = np.eye(n)

    def dlam(X):
        return fd_partials(lam.evaluate, X, h, 4)[..., 0]

    def metric(X):
        X = np.asarray(X, dtype=float)
        return np.exp(2.0 * lam.evaluate(X)[..., 0])[..., None, None] * G.metric(X)

    def christoffel(X):
        X = np.asarray(X, dtype=float)
        dl = dlam(X)
        g = G.metric(X)
        ginv_dl = np.linalg.solve(g, dl[..., None])[..., 0]
        extra = (np.einsum("ka,...b->...kab", eye, dl) + np.einsum("kb,...a->...kab", eye, dl)
                 - np.einsum("...ab,...k->...kab", g, ginv_dl))
        return G.christoffel(X) + extra

    return ChartGeometry(G.m, metric, G.jfield, christoffel, "conformal_rescale", False, G)


def fs_christoffel_from_metric(G: ChartGeometry, X: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Levi-Civita Christoffels from finite differences of the metric (oracle)."""
    from .calculus import fd_partials

    dg = fd_partials(G.metric, X, h, 4)  # (..., c, a, b): ∂_c g_ab
    ginv = np.linalg.inv(G.metric(X))
    # Γ_{l,ab} = ½(∂_a g_lb + ∂_b g_la - ∂_l g_ab)
    lower = 0.5 * (np.einsum("...alb->...lab", dg) + np.einsum("...bla->...lab", dg) - dg)
    return np.einsum("...kl,...lab->...kab", ginv, lower)


@dataclass(frozen=True)
class SamplePlan:
    """Chart points plus finite-difference settings."""

    points: np.ndarray
    h: float = 5e-3
    order: int = 4
    seed: int = DEFAULT_SEED
    radius: float = 1.5

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if not 1e-4 <= self.h <= 1e-1:
            raise ValueError(f"step h = {self.h} outside [1e-4, 1e-1]")
        if self.order not in (2, 4):
            raise ValueError("finite-difference order must be 2 or 4")
        if np.any(np.linalg.norm(pts, axis=-1) > self.radius + 1e-12):
            raise ValueError(f"sample points must satisfy |x| <= {self.radius}")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @classmethod
    def sobol(cls, n: int, count: int = 50, radius: float = 1.5, h: float = 5e-3,
              order: int = 4, seed: Optional[int] = None) -> "SamplePlan":
        """Scrambled Sobol points in the ball |x| <= radius."""
        seed = _seed_from_env() if seed is None else seed
        sampler = qmc.Sobol(d=n, scramble=True, seed=seed)
        kept = np.empty((0, n))
        while len(kept) < count:
            batch = 2.0 * sampler.random(1024) - 1.0
            kept = np.vstack([kept, batch[np.linalg.norm(batch, axis=1) <= 1.0]])
        return cls(radius * kept[:count], h, order, seed, radius)

    def __len__(self) -> int:
        return len(self.points)
