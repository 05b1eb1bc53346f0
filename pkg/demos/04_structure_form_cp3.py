"""From a special 2-form on CP^3 to twistor 4-forms and Hamiltonian 2-forms (takes ~15 s)."""
from twistorforms.chart import fubini_study
from twistorforms.report import SuiteReport
from twistorforms.suites import cpn_suite

# %% the whole pipeline: eigenfunction, φ̂, generalized trace, L-built 4-form, Hamiltonian shift
rep: SuiteReport = cpn_suite(m=3, samples=30)
print(f"{fubini_study(3).model}, m = 3, {rep.config['samples']} points, {rep.wall_time:.1f} s\n")

# %% the checks grouped by what they exercise
groups = {
    "eigenfunction and φ̂": ("eigenfunction", "phi_hat"),
    "generalized trace": ("generalized_trace",),
    "structure forms": ("structure_form", "_mu", "lambda_l", "single_lefschetz", "ratio"),
    "parallel pieces": ("J_u_parallel", "Lambda_J_u"),
    "Hamiltonian round trip": ("hamiltonian", "back_to_twistor"),
}
for title, keys in groups.items():
    print(title)
    for c in rep.checks:
        if any(k in c.name for k in keys):
            print("   ", c.line())
print("\nall passed:", rep.passed)
