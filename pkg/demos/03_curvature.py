"""Curvature of CP^m: closed form against finite differences, and q(R) on forms."""
import numpy as np

from twistorforms.chart import SamplePlan, covariant_jets, frame_riemann, fubini_study
from twistorforms.chart.cpn import build_phi_hat, laplace_eigenfunction, trig_rational_field
from twistorforms.curvature import (
    cpm_curvature,
    cpm_riemann_tensor,
    integrability_residual,
    qR_matrix,
    weitzenboeck_residual,
)

# %% q(R) on 1-forms is the Ricci tensor, 2(m+1) id
for m in (1, 2, 3):
    q1 = qR_matrix(cpm_curvature(m), 1)
    print(f"m={m}: q(R) on 1-forms = {q1[0, 0]:.1f} id, off-diagonal max {np.abs(q1 - q1[0, 0] * np.eye(2 * m)).max():.0e}")

# %% spectrum of q(R) on 2-forms of CP^2: ω, the primitive (1,1) part, and (2,0)+(0,2)
print("q(R) eigenvalues on 2-forms:", np.round(np.linalg.eigvalsh(qR_matrix(cpm_curvature(2), 2)), 10))

# %% finite-difference Riemann tensor in the adapted frame at a few chart points
G = fubini_study(2)
plan = SamplePlan.sobol(4, count=5, seed=2)
errs = [np.abs(frame_riemann(G, x) - cpm_riemann_tensor(2)).max() for x in plan.points]
print("FD curvature error per point:", " ".join(f"{e:.1e}" for e in errs))

# %% Weitzenböck formula on a generic field, integrability condition on φ̂
R = cpm_curvature(2)
F = trig_rational_field(4, 2, seed=3)
print("Weitzenböck defect:", max(weitzenboeck_residual(R, j) for j in covariant_jets(G, F, plan, with_hess=True)))
phi = build_phi_hat(G, laplace_eigenfunction(G))
print("integrability defect on φ̂:",
      max(integrability_residual(R, j) for j in covariant_jets(G, phi, plan, with_hess=True)))
