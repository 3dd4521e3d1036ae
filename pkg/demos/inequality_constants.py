"""Empirical constants for the a priori inequalities of the theory.

Each functional inequality relates an output norm (velocity, propagated
field, evolved ratio field) to input norms with a universal constant.  The
sampler draws reproducible random bump fields and reports the worst observed
ratio; two disjoint seeds gauge how stable that empirical constant is.
"""

from axivort import diagnostics
from axivort.fields import HalfPlaneGrid

SPECS = [
    ("velocity_lp", "||u||_4 <= C ||w||_{4/3}", None),
    ("velocity_sup_weighted", "||u||_inf <= C ||r w||_1^{1/2} ||w/r||_inf^{1/2}", None),
    ("radial_shear", "||u_r/r||_inf <= C ||w||_1^{1/3} ||w/r||_inf^{2/3}", None),
    ("semigroup_smoothing", "t ||S(t) w||_inf <= C ||w||_1", None),
    ("semigroup_div_smoothing", "sqrt(t) ||S(t) div f||_1 <= C ||f||_1", None),
    ("eta_decay", "t^{3/2} ||eta(t)||_inf <= C ||eta_0||_1", HalfPlaneGrid(48, 96)),
]

N = 40
print(f"{N} samples per seed; ratios are empirical constants, not sharp ones\n")
for spec, statement, grid in SPECS:
    a = diagnostics.inequality_sampler(spec, N, 2024, grid=grid)
    b = diagnostics.inequality_sampler(spec, N, 777, grid=grid)
    spread = abs(a["max_ratio"] - b["max_ratio"]) / max(a["max_ratio"], b["max_ratio"])
    print(f"{statement}")
    print(f"    max ratio {a['max_ratio']:.4f} / {b['max_ratio']:.4f} "
          f"(two seeds, spread {spread:.1%}), mean {a['mean_ratio']:.4f}\n")
