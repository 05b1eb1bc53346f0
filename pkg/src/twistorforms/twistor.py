"""Pointwise twistor-form machinery on covariant jets.

A :class:`CovariantJet` holds a p-form and its covariant derivative in an
orthonormal frame; ``grad[i]`` is ∇_{e_i}ψ.  Everything here is algebra on
that data, so the checks apply equally to synthetic jets and to jets sampled
from a chart (see :mod:`twistorforms.chart`).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence

import numpy as np

from .exterior import (
    AlternatingForm,
    contract_stack,
    hodge_matrix,
    wedge_stack,
)
from .kaehler import (
    KaehlerFrame,
    lefschetz_decompose,
    lefschetz_L_power,
)

__all__ = [
    "CovariantJet",
    "TwistorSplit",
    "relative_residual",
    "d_from_jet",
    "delta_from_jet",
    "dc_from_jet",
    "deltac_from_jet",
    "twistor_split",
    "twistor_residual",
    "twistor_jet",
    "hodge_dual_jet",
    "special2_residual",
    "specialm_residual",
    "specialm_rhs",
    "hamiltonian_residual",
    "sigma_gradient",
    "twistor2_characterization_residual",
    "gamma_gradient_rows",
    "build_structure_form",
    "structure_coefficient",
    "hamiltonian_twistor_convert",
    "dim4_hamiltonian_condition",
    "middim_split_check",
    "lefschetz_jets",
]

ABS_FLOOR = 1e-14


def relative_residual(a, b) -> float:
    """||a - b|| / max(||a||, ||b||), falling back to ||a - b|| near zero."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    diff = float(np.linalg.norm(a - b))
    scale = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)))
    return diff if scale < ABS_FLOOR else diff / scale


def _ratio(num: float, den: float) -> float:
    return num if den < ABS_FLOOR else num / den


@dataclass(frozen=True)
class CovariantJet:
    """Value, first and (optionally) second covariant derivative of a p-form.

    ``grad`` has shape (n, C(n,p)); ``hess`` has shape (n, n, C(n,p)) with
    ``hess[i, j] = ∇²_{e_i, e_j} ψ`` (outer derivative first).
    """

    value: np.ndarray
    grad: np.ndarray
    hess: Optional[np.ndarray] = None
    dim: int = 0
    degree: int = 0

    def __post_init__(self):
        value = np.array(self.value, dtype=float).reshape(-1)
        grad = np.array(self.grad, dtype=float)
        n = grad.shape[0]
        dim = self.dim or n
        if n != dim or grad.ndim != 2 or grad.shape[1] != value.size:
            raise ValueError(f"grad must have shape (n, {value.size}), got {grad.shape}")
        if comb(dim, self.degree) != value.size:
            raise ValueError(f"value has {value.size} coefficients, expected C({dim},{self.degree})")
        value.flags.writeable = False
        grad.flags.writeable = False
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "grad", grad)
        object.__setattr__(self, "dim", dim)
        if self.hess is not None:
            hess = np.array(self.hess, dtype=float)
            if hess.shape != (dim, dim, value.size):
                raise ValueError(f"hess must have shape {(dim, dim, value.size)}, got {hess.shape}")
            hess.flags.writeable = False
            object.__setattr__(self, "hess", hess)

    @classmethod
    def from_forms(cls, value: AlternatingForm, grad: Sequence[AlternatingForm], hess=None):
        g = np.stack([x.coeffs for x in grad])
        h = None
        if hess is not None:
            h = np.stack([np.stack([x.coeffs for x in row]) for row in hess])
        return cls(value.coeffs, g, h, value.dim, value.degree)

    @property
    def form(self) -> AlternatingForm:
        return AlternatingForm(self.dim, self.degree, self.value)

    def grad_form(self, i: int) -> AlternatingForm:
        return AlternatingForm(self.dim, self.degree, self.grad[i])

    def map(self, mat: np.ndarray, degree: int) -> "CovariantJet":
        """Apply a parallel (constant-coefficient) linear map to every slot."""
        hess = None if self.hess is None else self.hess @ mat.T
        return CovariantJet(mat @ self.value, self.grad @ mat.T, hess, self.dim, degree)

    def __add__(self, other: "CovariantJet") -> "CovariantJet":
        if (self.dim, self.degree) != (other.dim, other.degree):
            raise ValueError("jets of different dimension or degree")
        hess = None
        if self.hess is not None and other.hess is not None:
            hess = self.hess + other.hess
        return CovariantJet(self.value + other.value, self.grad + other.grad, hess, self.dim, self.degree)

    def scaled(self, c: float) -> "CovariantJet":
        hess = None if self.hess is None else c * self.hess
        return CovariantJet(c * self.value, c * self.grad, hess, self.dim, self.degree)


@dataclass(frozen=True)
class TwistorSplit:
    """∇ψ split into its Λ^{p+1}, Λ^{p-1} and Cartan (twistor) components."""

    d_part: np.ndarray
    delta_part: np.ndarray
    twistor_part: np.ndarray  # shape (n, C(n,p))
    dim: int
    degree: int

    def reassemble(self) -> np.ndarray:
        n, p = self.dim, self.degree
        return self.twistor_part + _d_term(self.d_part, n, p) - _delta_term(self.delta_part, n, p)


def _wedge_sum(grad: np.ndarray, n: int, p: int) -> np.ndarray:
    if p == n:
        return np.zeros(0)
    return np.einsum("iab,ib->a", wedge_stack(n, p), grad)


def _contract_sum(grad: np.ndarray, n: int, p: int) -> np.ndarray:
    if p == 0:
        return np.zeros(0)
    return np.einsum("iab,ib->a", contract_stack(n, p), grad)


def d_from_jet(j: CovariantJet) -> np.ndarray:
    """dψ = Σ e_i ∧ ∇_{e_i}ψ (coefficients in Λ^{p+1}; empty when p = n)."""
    return _wedge_sum(j.grad, j.dim, j.degree)


def delta_from_jet(j: CovariantJet) -> np.ndarray:
    """δψ = -Σ e_i ⌟ ∇_{e_i}ψ (coefficients in Λ^{p-1}; empty when p = 0)."""
    return -_contract_sum(j.grad, j.dim, j.degree)


def dc_from_jet(f: KaehlerFrame, j: CovariantJet) -> np.ndarray:
    """d^c ψ = Σ Je_i ∧ ∇_{e_i}ψ."""
    n, p = j.dim, j.degree
    if p == n:
        return np.zeros(0)
    W = wedge_stack(n, p)
    JW = np.einsum("ki,kab->iab", f.J, W)  # Je_i ∧ = Σ_k J[k,i] e_k ∧
    return np.einsum("iab,ib->a", JW, j.grad)


def deltac_from_jet(f: KaehlerFrame, j: CovariantJet) -> np.ndarray:
    """δ^c ψ = -Σ Je_i ⌟ ∇_{e_i}ψ."""
    n, p = j.dim, j.degree
    if p == 0:
        return np.zeros(0)
    C = contract_stack(n, p)
    JC = np.einsum("ki,kab->iab", f.J, C)
    return -np.einsum("iab,ib->a", JC, j.grad)


def _d_term(d: np.ndarray, n: int, p: int) -> np.ndarray:
    """Rows (1/(p+1)) e_i ⌟ dψ."""
    if p == n:
        return np.zeros((n, comb(n, p)))
    return np.einsum("iab,b->ia", contract_stack(n, p + 1), d) / (p + 1)


def _delta_term(delta: np.ndarray, n: int, p: int) -> np.ndarray:
    """Rows (1/(n-p+1)) e_i ∧ δψ."""
    if p == 0:
        return np.zeros((n, 1))
    return np.einsum("iab,b->ia", wedge_stack(n, p - 1), delta) / (n - p + 1)


def twistor_split(j: CovariantJet) -> TwistorSplit:
    n, p = j.dim, j.degree
    d = d_from_jet(j)
    delta = delta_from_jet(j)
    tw = j.grad - _d_term(d, n, p) + _delta_term(delta, n, p)
    return TwistorSplit(d, delta, tw, n, p)


def twistor_residual(j: CovariantJet, scale: float = 0.0) -> float:
    """||Tψ|| / max(||∇ψ||, scale); zero exactly on twistor jets.

    ``scale`` lets a piece of a larger form be judged against the whole,
    so a component whose gradient is pure rounding noise is not blown up.
    """
    split = twistor_split(j)
    return _ratio(float(np.linalg.norm(split.twistor_part)), max(float(np.linalg.norm(j.grad)), scale))


def twistor_jet(value: np.ndarray, d: np.ndarray, delta: np.ndarray, n: int, p: int) -> CovariantJet:
    """The jet with prescribed dψ, δψ and vanishing twistor part."""
    grad = _d_term(np.asarray(d, float), n, p) - _delta_term(np.asarray(delta, float), n, p)
    return CovariantJet(value, grad, None, n, p)


def hodge_dual_jet(j: CovariantJet) -> CovariantJet:
    star = hodge_matrix(j.dim, j.degree)
    return j.map(star, j.dim - j.degree)


def _lambda_value(f: KaehlerFrame, v: np.ndarray, p: int) -> np.ndarray:
    return f.Lambda_matrix(p) @ v


def gamma_gradient_rows(f: KaehlerFrame, gamma: np.ndarray, trace_coeff: float = 1.0) -> np.ndarray:
    """Rows γ ∧ Je_i - Jγ ∧ e_i - c γ(e_i) ω for i = 1..n."""
    n = f.n
    W1 = wedge_stack(n, 1)
    Jg = f.J @ gamma
    rows = np.empty((n, comb(n, 2)))
    for i in range(n):
        Jei = f.J[:, i]
        # γ ∧ Je_i = -(Je_i ∧ γ)
        g_Jei = -np.einsum("k,kab,b->a", Jei, W1, gamma)
        Jg_ei = -W1[i] @ Jg
        rows[i] = g_Jei - Jg_ei - trace_coeff * gamma[i] * f.omega.coeffs
    return rows


def _check_frame(f: KaehlerFrame, j: CovariantJet):
    if f.n != j.dim:
        raise ValueError(f"jet lives in R^{j.dim}, frame in R^{f.n}")


def special2_residual(f: KaehlerFrame, j: CovariantJet) -> float:
    """Defect of the special 2-form equation plus primitivity and (1,1) penalties.

    γ is taken as m/(2(m²-1)) δ^c φ.  The penalties are ||Λφ|| and ||Jφ||
    relative to ||φ||.
    """
    _check_frame(f, j)
    if j.degree != 2:
        raise ValueError("special 2-forms have degree 2")
    m = f.m
    if m == 1:
        raise ValueError("no primitive 2-forms when m = 1")
    gamma = m / (2 * (m * m - 1)) * deltac_from_jet(f, j)
    rhs = gamma_gradient_rows(f, gamma, 2.0 / m)
    defect = relative_residual(j.grad, rhs)
    vnorm = float(np.linalg.norm(j.value))
    prim = _ratio(float(np.linalg.norm(_lambda_value(f, j.value, 2))), vnorm)
    typ = _ratio(float(np.linalg.norm(f.J_matrix(2) @ j.value)), vnorm)
    return defect + prim + typ


def specialm_rhs(f: KaehlerFrame, tau: np.ndarray) -> np.ndarray:
    """Rows of the special m-form equation for an (m-1)-form τ.

    Written as -(m-1) Je_i ∧ τ + e_i ∧ Jτ - (m-1) L(e_i ⌟ τ), which for even m
    is the displayed form (m-1) τ∧JX - Jτ∧X - (m-1)(X⌟τ)∧ω and for every m is
    the form produced by the twistor equation of a primitive m-form.
    """
    m, n = f.m, f.n
    q = m - 1
    W = wedge_stack(n, q)
    Jtau = f.J_matrix(q) @ tau
    rows = np.empty((n, comb(n, m)))
    for i in range(n):
        Jei = f.J[:, i]
        first = -(m - 1) * np.einsum("k,kab,b->a", Jei, W, tau)
        second = W[i] @ Jtau
        if q >= 1:
            contracted = contract_stack(n, q)[i] @ tau
            third = -(m - 1) * (f.L_matrix(q - 1) @ contracted)
        else:
            third = np.zeros(comb(n, m))
        rows[i] = first + second + third
    return rows


def specialm_residual(f: KaehlerFrame, j: CovariantJet) -> float:
    """Defect of the special m-form equation with τ = δ^c ψ/(m²-1), plus the
    type penalty ||J²ψ + (m-2)²ψ|| / ||ψ||.

    For m = 2 the penalty is the primitive-(1,1) one of :func:`special2_residual`,
    so the two residuals agree there.
    """
    _check_frame(f, j)
    m = f.m
    if j.degree != m:
        raise ValueError(f"special m-forms have degree m = {m}, got {j.degree}")
    if m == 1:
        raise ValueError("m = 1 has no special m-forms")
    tau = deltac_from_jet(f, j) / (m * m - 1)
    defect = relative_residual(j.grad, specialm_rhs(f, tau))
    Jm = f.J_matrix(m)
    vnorm = float(np.linalg.norm(j.value))
    if m == 2:
        # type (1,1) plus primitivity: the special 2-form constraints
        typ = (_ratio(float(np.linalg.norm(_lambda_value(f, j.value, 2))), vnorm)
               + _ratio(float(np.linalg.norm(Jm @ j.value)), vnorm))
    else:
        typ = _ratio(float(np.linalg.norm(Jm @ (Jm @ j.value) + (m - 2) ** 2 * j.value)), vnorm)
    return defect + typ


def sigma_gradient(f: KaehlerFrame, j: CovariantJet) -> np.ndarray:
    """d<ψ, ω> from a 2-form jet (ω is parallel)."""
    return j.grad @ f.omega.coeffs


def hamiltonian_residual(f: KaehlerFrame, j: CovariantJet, sigma_grad) -> float:
    """Defect of ∇_X ψ = ½(dσ ∧ JX - Jdσ ∧ X) over the frame."""
    _check_frame(f, j)
    if j.degree != 2:
        raise ValueError("Hamiltonian forms have degree 2")
    dsigma = np.asarray(getattr(sigma_grad, "coeffs", sigma_grad), dtype=float)
    rhs = 0.5 * gamma_gradient_rows(f, dsigma, 0.0)
    return relative_residual(j.grad, rhs)


def twistor2_characterization_residual(f: KaehlerFrame, j: CovariantJet) -> float:
    """Defect of ∇_X u = γ∧JX - Jγ∧X - γ(X)ω with γ = J(δu)/(2m-1)."""
    _check_frame(f, j)
    if j.degree != 2:
        raise ValueError("the characterization is for 2-forms")
    gamma = f.J @ delta_from_jet(j) / (2 * f.m - 1)
    return relative_residual(j.grad, gamma_gradient_rows(f, gamma, 1.0))


def structure_coefficient(m: int, p: int) -> float:
    """Coefficient of L^k f in the structure form: -(m-p)/(p(m²-1))."""
    return -(m - p) / (p * (m * m - 1))


def build_structure_form(f: KaehlerFrame, phi: AlternatingForm, fval: float, k: int) -> AlternatingForm:
    """L^{k-1}φ - (m-p)/(p(m²-1)) f L^k(1) with p = 2k."""
    if phi.degree != 2:
        raise ValueError("φ must be a 2-form")
    if k < 1:
        raise ValueError("k must be a positive integer")
    p = 2 * k
    if not 2 <= p <= f.n - 2:
        raise ValueError(f"degree p = {p} outside [2, n-2] = [2, {f.n - 2}]")
    if f.m * f.m == 1:
        raise ValueError("m = 1 leaves no admissible degree")
    one = AlternatingForm.scalar(f.n, 1.0)
    return (lefschetz_L_power(f, phi, k - 1)
            + structure_coefficient(f.m, p) * fval * lefschetz_L_power(f, one, k))


def hamiltonian_twistor_convert(f: KaehlerFrame, a: AlternatingForm, direction: str) -> AlternatingForm:
    """Shift a 2-form along ω between the Hamiltonian and twistor normalizations.

    ``to_twistor``: ψ ↦ ψ - <ψ,ω>/2 ω.  ``to_hamiltonian``: u ↦ u - <u,ω>/(m-2) ω (m > 2).
    """
    if a.degree != 2:
        raise ValueError("conversion acts on 2-forms")
    trace = float(a.coeffs @ f.omega.coeffs)
    if direction == "to_twistor":
        return a - (trace / 2.0) * f.omega
    if direction == "to_hamiltonian":
        if f.m == 2:
            raise ValueError("no Hamiltonian normalization from a twistor form when m = 2")
        if f.m < 2:
            raise ValueError("m must exceed 2")
        return a - (trace / (f.m - 2)) * f.omega
    raise ValueError(f"unknown direction {direction!r}")


def dim4_hamiltonian_condition(f: KaehlerFrame, j: CovariantJet, df) -> float:
    """|δu₀ + 3 J df| / max(|δu₀|, |df|) on a complex surface."""
    if f.m != 2:
        raise ValueError("the condition is specific to m = 2")
    _check_frame(f, j)
    df = np.asarray(getattr(df, "coeffs", df), dtype=float)
    delta = delta_from_jet(j)
    num = float(np.linalg.norm(delta + 3.0 * (f.J @ df)))
    return _ratio(num, max(float(np.linalg.norm(delta)), float(np.linalg.norm(df))))


def lefschetz_jets(f: KaehlerFrame, j: CovariantJet) -> list[CovariantJet]:
    """Split a jet into the jets of its Lefschetz pieces L^i u_i.

    L and Λ are parallel, so the decomposition commutes with ∇ and can be
    applied slot by slot.
    """
    _check_frame(f, j)
    n, p = f.n, j.degree
    size = comb(n, p)
    levels = p // 2 + 1
    slots = [j.value] + list(j.grad)
    pieces = np.zeros((levels, len(slots), size))
    for s, vec in enumerate(slots):
        dec = lefschetz_decompose(f, AlternatingForm(n, p, vec))
        for i, ui in enumerate(dec.components):
            pieces[i, s] = lefschetz_L_power(f, ui, i).coeffs
    return [CovariantJet(pc[0], pc[1:], None, n, p) for pc in pieces]


def middim_split_check(f: KaehlerFrame, jets: Sequence[CovariantJet], tol: float = 1e-10) -> bool:
    """True iff the summed jet is twistor exactly when every component is.

    ``jets`` are the components of one m-form over a parallel splitting of Λ^m.
    Components are judged against the gradient of the whole form, so a piece
    that is parallel up to rounding counts as twistor.
    """
    if not jets:
        raise ValueError("need at least one component")
    deg = {(x.dim, x.degree) for x in jets}
    if len(deg) != 1:
        raise ValueError("components must share dimension and degree")
    total = jets[0]
    for x in jets[1:]:
        total = total + x
    scale = float(np.linalg.norm(total.grad))
    whole = twistor_residual(total) < tol
    parts = all(twistor_residual(x, scale) < tol for x in jets)
    return whole == parts
