"""Axisymmetric vorticity dynamics on the meridian half-plane.

Building blocks: special-kernel evaluation (``kernels``), fields and
measures (``fields``), velocity reconstruction (``biot_savart``), the
linearized propagator (``semigroup``), the nonlinear mild-solution stepper
with an independent finite-difference oracle (``mild_solver``), and
quantitative long-time diagnostics (``diagnostics``).
"""

from . import biot_savart, diagnostics, fields, kernels, mild_solver, semigroup
from .biot_savart import BiotSavartOptions, stream_function, velocity, velocity_kernel
from .fields import (
    DiagnosticsRecord,
    HalfPlaneGrid,
    ScalarField,
    VelocityField,
    VortexMeasure,
    eta_to_omega,
    impulse,
    mass,
    norm_2d,
    norm_3d,
    omega_to_eta,
    read_field,
    rescale_to_selfsimilar,
    write_field,
)
from .kernels import KernelEvalPolicy, KernelTable
from .mild_solver import FDConfig, SolverConfig, Trajectory, evolve, fd_eta_solve
from .semigroup import apply_div, apply_to_measure, composition_defect
from .semigroup import apply as apply_semigroup

__version__ = "0.1.0"
