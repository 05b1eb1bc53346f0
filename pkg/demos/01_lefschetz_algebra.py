"""Lefschetz operators on a single tangent space: decompose, check ΛL eigenvalues."""
import numpy as np

from twistorforms.exterior import random_form
from twistorforms.kaehler import (
    KaehlerFrame,
    lambda_l_eigencheck,
    lambda_l_eigenvalue,
    lefschetz_decompose,
    lefschetz_Lambda,
)

rng = np.random.default_rng(0)

# %% C^3 with its adapted frame; ω = e1∧e2 + e3∧e4 + e5∧e6
f = KaehlerFrame(3)
print("omega:", f.omega)
print("|omega|^2 =", f.omega.norm() ** 2)

# %% a random 3-form splits as u0 + L u1 with u0, u1 primitive
u = random_form(6, 3, rng)
dec = lefschetz_decompose(f, u)
for i, ui in enumerate(dec.components):
    lam = lefschetz_Lambda(f, ui).norm() if ui.degree >= 2 else 0.0
    print(f"level {i}: degree {ui.degree}, |u_i| = {ui.norm():.4f}, |Λu_i| = {lam:.1e}")
print("reassembly error:", (dec.reassemble(f) - u).norm())

# %% ΛL acts on each level by a different integer
for lvl in lambda_l_eigencheck(f, u):
    print(f"L^{lvl.level}(primitive): eigenvalue {lvl.eigenvalue}, residual {lvl.residual:.1e}")

# %% the full table of eigenvalues for m = 4
m = 4
print("\n p |", "  ".join(f"i={i}" for i in range(3)))
for p in range(m + 1):
    row = [lambda_l_eigenvalue(m, p, i) for i in range(p // 2 + 1)]
    print(f" {p} |", "  ".join(f"{v:3d}" for v in row))
