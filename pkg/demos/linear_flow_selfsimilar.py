"""Long-time self-similar collapse of the linear flow started from a filament.

A unit circular filament spreads under the linearized dynamics; rescaling by
the parabolic change of variables sends it to a fixed Gaussian profile whose
amplitude is the conserved second radial moment over 16 sqrt(pi).  The
distance to that profile decays like 1/t.
"""

import numpy as np

from axivort import semigroup
from axivort.diagnostics import selfsimilar_profile
from axivort.fields import (
    HalfPlaneGrid,
    VortexMeasure,
    impulse,
    norm_2d,
    rescale_to_selfsimilar,
)

radius = 1.0
filament = VortexMeasure(atoms=((radius, 0.0, 1.0),))
ref = HalfPlaneGrid(96, 192)
profile = selfsimilar_profile(radius ** 2, ref)
print(f"profile mass = {norm_2d(profile, 1):.6f} (limit of ||w(t)||_1 * t)")

print(" t      L1 distance   relative")
for t in (3.0, 10.0, 30.0, 100.0, 300.0):
    span = 12.0 * np.sqrt(t)
    scaled_grid = HalfPlaneGrid(96, 192, span, span)
    spread = semigroup.apply_to_measure(t, filament, scaled_grid)
    w = rescale_to_selfsimilar(spread, t, ref)
    d = norm_2d(w - profile.at_time(t), 1)
    print(f"{t:6.0f}  {d:.6f}     {d / norm_2d(profile, 1):.4%}")
    if t == 100.0:
        print(f"        impulse of the spread field: {impulse(spread):.6f} "
              f"(filament value {radius ** 2:.1f})")
