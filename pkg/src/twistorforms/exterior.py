"""Alternating forms on an oriented Euclidean space R^n.

Basis p-forms e_I are indexed by n-bit masks; the coefficient of e_I is the
value of the form on (e_i1, ..., e_ip) with i1 < ... < ip, so the basis
{e_I : |I| = p} is orthonormal for :func:`inner`.

Coefficients are held as a dense float64 vector over ``basis(n, p)``.  Linear
maps (wedge/contract with a basis covector, derivations, Hodge star) are
cached matrices; :func:`wedge` of two general forms iterates over nonzero
terms only unless both factors are densely filled.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "AlternatingForm",
    "basis",
    "basis_index",
    "popcount",
    "wedge_sign",
    "covector",
    "basis_form",
    "wedge",
    "contract",
    "inner",
    "hodge_star",
    "wedge_matrix",
    "contract_matrix",
    "derivation_matrix",
    "hodge_matrix",
    "volume_form",
    "random_form",
    "wedge_stack",
    "contract_stack",
    "compound_indices",
    "iter_basis_forms",
]


def popcount(x: int) -> int:
    return bin(x).count("1")


@lru_cache(maxsize=None)
def basis(n: int, p: int) -> tuple[int, ...]:
    """Bitmasks of the degree-p basis of Λ^p(R^n), in lexicographic order."""
    if p < 0 or p > n:
        return ()
    return tuple(sum(1 << i for i in c) for c in combinations(range(n), p))


@lru_cache(maxsize=None)
def basis_index(n: int, p: int) -> dict[int, int]:
    return {mask: k for k, mask in enumerate(basis(n, p))}


@lru_cache(maxsize=None)
def _basis_indices(n: int, p: int) -> np.ndarray:
    """Index tuples of basis(n, p) as an int array of shape (C(n,p), p)."""
    return np.array(list(combinations(range(n), p)), dtype=int).reshape(comb(n, p), p)


def wedge_sign(a: int, b: int) -> int:
    """Sign of e_A ∧ e_B relative to e_{A|B}; 0 if A and B overlap.

    Counts pairs (i in A, j in B) with i > j, i.e. the transpositions needed
    to sort the concatenated index list.
    """
    if a & b:
        return 0
    swaps = 0
    bb = b
    while bb:
        j = (bb & -bb).bit_length() - 1
        swaps += popcount(a >> (j + 1))
        bb &= bb - 1
    return -1 if swaps & 1 else 1


class AlternatingForm:
    """An exact p-form at a point of R^n.

    Immutable; arithmetic returns new forms.  Equality is coefficientwise
    (exact); use ``allclose`` for tolerance comparisons.
    """

    __slots__ = ("dim", "degree", "coeffs")

    def __init__(self, dim: int, degree: int, coeffs=None):
        if dim < 1:
            raise ValueError(f"dimension must be positive, got {dim}")
        if not 0 <= degree <= dim:
            raise ValueError(f"degree {degree} outside [0, {dim}]")
        size = comb(dim, degree)
        if coeffs is None:
            arr = np.zeros(size)
        else:
            arr = np.array(coeffs, dtype=float).reshape(-1)
            if arr.size != size:
                raise ValueError(f"expected {size} coefficients for Λ^{degree}(R^{dim}), got {arr.size}")
        arr.flags.writeable = False
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("AlternatingForm is immutable")

    @classmethod
    def zero(cls, dim: int, degree: int) -> "AlternatingForm":
        return cls(dim, degree)

    @classmethod
    def scalar(cls, dim: int, value: float) -> "AlternatingForm":
        return cls(dim, 0, [value])

    @classmethod
    def from_terms(cls, dim: int, terms: Mapping) -> "AlternatingForm":
        """Build from ``{mask or index tuple: coefficient}``.

        Index tuples need not be sorted; the permutation sign is applied.
        Repeated indices give zero.
        """
        degree = None
        out = {}
        for key, c in terms.items():
            if isinstance(key, (int, np.integer)):
                mask, sign = int(key), 1
            else:
                idx = list(key)
                if len(set(idx)) < len(idx):
                    continue
                mask, sign = 0, 1
                for i in idx:
                    if not 0 <= i < dim:
                        raise ValueError(f"index {i} outside range({dim})")
                    sign *= wedge_sign(mask, 1 << i)
                    mask |= 1 << i
            if mask >= 1 << dim:
                raise ValueError(f"bitmask {mask:#b} exceeds dimension {dim}")
            p = popcount(mask)
            if degree is None:
                degree = p
            elif p != degree:
                raise ValueError("all terms must share one degree")
            out[mask] = out.get(mask, 0.0) + sign * float(c)
        if degree is None:
            raise ValueError("cannot infer degree from empty terms; use AlternatingForm.zero")
        index = basis_index(dim, degree)
        arr = np.zeros(comb(dim, degree))
        for mask, c in out.items():
            arr[index[mask]] += c
        return cls(dim, degree, arr)

    def terms(self, tol: float = 0.0) -> dict[int, float]:
        """Sparse view: nonzero coefficients keyed by basis bitmask."""
        masks = basis(self.dim, self.degree)
        nz = np.flatnonzero(np.abs(self.coeffs) > tol)
        return {masks[k]: float(self.coeffs[k]) for k in nz}

    @property
    def fill(self) -> float:
        return np.count_nonzero(self.coeffs) / self.coeffs.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def _check(self, other: "AlternatingForm"):
        if not isinstance(other, AlternatingForm):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if other.degree != self.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlternatingForm(self.dim, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlternatingForm(self.dim, self.degree, self.coeffs - other.coeffs)

    def __neg__(self):
        return AlternatingForm(self.dim, self.degree, -self.coeffs)

    def __mul__(self, c):
        if isinstance(c, AlternatingForm):
            return NotImplemented
        return AlternatingForm(self.dim, self.degree, self.coeffs * float(c))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return AlternatingForm(self.dim, self.degree, self.coeffs / float(c))

    def __xor__(self, other):
        """``a ^ b`` is the wedge product."""
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, AlternatingForm):
            return NotImplemented
        return (self.dim == other.dim and self.degree == other.degree
                and bool(np.array_equal(self.coeffs, other.coeffs)))

    def __hash__(self):
        return hash((self.dim, self.degree, self.coeffs.tobytes()))

    def allclose(self, other: "AlternatingForm", atol: float = 1e-12) -> bool:
        return (self.dim == other.dim and self.degree == other.degree
                and bool(np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol)))

    def __repr__(self):
        terms = self.terms()
        if not terms:
            return f"AlternatingForm(dim={self.dim}, degree={self.degree}, 0)"
        parts = []
        for mask, c in terms.items():
            idx = [str(i + 1) for i in range(self.dim) if mask >> i & 1]
            parts.append(f"{c:+g}" + ("·e" + "".join(idx) if idx else ""))
        return f"AlternatingForm(dim={self.dim}, degree={self.degree}, {' '.join(parts)})"


def covector(dim: int, components) -> AlternatingForm:
    return AlternatingForm(dim, 1, components)


def basis_form(dim: int, *indices: int) -> AlternatingForm:
    """e_{i1} ∧ ... ∧ e_{ik} with zero-based indices; no indices gives 1."""
    if not indices:
        return AlternatingForm.scalar(dim, 1.0)
    return AlternatingForm.from_terms(dim, {tuple(indices): 1.0})


def volume_form(dim: int) -> AlternatingForm:
    return AlternatingForm(dim, dim, [1.0])


def random_form(dim: int, degree: int, rng: np.random.Generator) -> AlternatingForm:
    return AlternatingForm(dim, degree, rng.standard_normal(comb(dim, degree)))


@lru_cache(maxsize=None)
def _wedge_table(n: int, p: int, q: int):
    """All compatible (I, J) pairs for Λ^p × Λ^q → Λ^{p+q} as index arrays."""
    left, right, out, sign = [], [], [], []
    target = basis_index(n, p + q)
    for i, a in enumerate(basis(n, p)):
        for j, b in enumerate(basis(n, q)):
            s = wedge_sign(a, b)
            if s:
                left.append(i)
                right.append(j)
                out.append(target[a | b])
                sign.append(s)
    return (np.array(left, dtype=int), np.array(right, dtype=int),
            np.array(out, dtype=int), np.array(sign, dtype=float))


def wedge(a: AlternatingForm, b: AlternatingForm) -> AlternatingForm:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    n, p, q = a.dim, a.degree, b.degree
    if p + q > n:
        return AlternatingForm.zero(n, n)
    if a.fill > 0.5 and b.fill > 0.5:
        li, ri, oi, sg = _wedge_table(n, p, q)
        out = np.zeros(comb(n, p + q))
        np.add.at(out, oi, sg * a.coeffs[li] * b.coeffs[ri])
        return AlternatingForm(n, p + q, out)
    index = basis_index(n, p + q)
    out = np.zeros(comb(n, p + q))
    bt = b.terms()
    for ma, ca in a.terms().items():
        for mb, cb in bt.items():
            s = wedge_sign(ma, mb)
            if s:
                out[index[ma | mb]] += s * ca * cb
    return AlternatingForm(n, p + q, out)


@lru_cache(maxsize=None)
def wedge_matrix(n: int, p: int, i: int) -> np.ndarray:
    """Matrix of e_i ∧ · from Λ^p to Λ^{p+1}."""
    if not 0 <= i < n:
        raise ValueError(f"direction {i} outside range({n})")
    mat = np.zeros((comb(n, p + 1), comb(n, p)))
    if p + 1 <= n:
        target = basis_index(n, p + 1)
        bit = 1 << i
        for k, mask in enumerate(basis(n, p)):
            s = wedge_sign(bit, mask)
            if s:
                mat[target[mask | bit], k] = s
    mat.flags.writeable = False
    return mat


@lru_cache(maxsize=None)
def contract_matrix(n: int, p: int, i: int) -> np.ndarray:
    """Matrix of e_i ⌟ · from Λ^p to Λ^{p-1} (zero map on 0-forms)."""
    if p == 0:
        mat = np.zeros((0, 1))
    else:
        mat = wedge_matrix(n, p - 1, i).T.copy()
    mat.flags.writeable = False
    return mat


@lru_cache(maxsize=None)
def wedge_stack(n: int, p: int) -> np.ndarray:
    """Stacked wedge matrices, shape (n, C(n,p+1), C(n,p))."""
    return np.stack([wedge_matrix(n, p, i) for i in range(n)])


@lru_cache(maxsize=None)
def contract_stack(n: int, p: int) -> np.ndarray:
    """Stacked contraction matrices, shape (n, C(n,p-1), C(n,p))."""
    return np.stack([contract_matrix(n, p, i) for i in range(n)])


def derivation_matrix(endo: np.ndarray, p: int) -> np.ndarray:
    """Extension of a linear map on 1-forms to Λ^p as a derivation.

    ``endo[:, c]`` is the image of e_c.  The result is Σ_{b,c} endo[b,c] e_b ∧ (e_c ⌟ ·).
    """
    endo = np.asarray(endo, dtype=float)
    n = endo.shape[0]
    if p == 0:
        return np.zeros((1, 1))
    W = wedge_stack(n, p - 1)
    C = contract_stack(n, p)
    return np.einsum("bc,bij,cjk->ik", endo, W, C)


def contract(x: AlternatingForm, a: AlternatingForm) -> AlternatingForm:
    """Interior product x ⌟ a of a covector (vector via the metric) into a form."""
    if x.degree != 1:
        raise ValueError("first argument must be a covector")
    if x.dim != a.dim:
        raise ValueError(f"dimension mismatch: {x.dim} vs {a.dim}")
    n, p = a.dim, a.degree
    if p == 0:
        return AlternatingForm.zero(n, 0)
    mat = np.tensordot(x.coeffs, contract_stack(n, p), axes=1)
    return AlternatingForm(n, p - 1, mat @ a.coeffs)


def inner(a: AlternatingForm, b: AlternatingForm) -> float:
    if a.dim != b.dim or a.degree != b.degree:
        raise ValueError(f"inner product needs equal degree and dimension, got "
                         f"Λ^{a.degree}(R^{a.dim}) and Λ^{b.degree}(R^{b.dim})")
    return float(a.coeffs @ b.coeffs)


@lru_cache(maxsize=None)
def hodge_matrix(n: int, p: int) -> np.ndarray:
    """Matrix of * : Λ^p → Λ^{n-p} with orientation e_1 ∧ ... ∧ e_n."""
    full = (1 << n) - 1
    target = basis_index(n, n - p)
    mat = np.zeros((comb(n, n - p), comb(n, p)))
    for k, mask in enumerate(basis(n, p)):
        rest = full ^ mask
        mat[target[rest], k] = wedge_sign(mask, rest)
    mat.flags.writeable = False
    return mat


def hodge_star(a: AlternatingForm) -> AlternatingForm:
    return AlternatingForm(a.dim, a.dim - a.degree, hodge_matrix(a.dim, a.degree) @ a.coeffs)


def compound_indices(n: int, p: int) -> np.ndarray:
    return _basis_indices(n, p)


def iter_basis_forms(n: int, p: int) -> Iterable[AlternatingForm]:
    size = comb(n, p)
    for k in range(size):
        c = np.zeros(size)
        c[k] = 1.0
        yield AlternatingForm(n, p, c)
