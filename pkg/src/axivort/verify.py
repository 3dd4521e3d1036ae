"""Packaged verification suites behind the command-line interface.

Each suite runs a handful of fast self-contained checks and reports the
measured value against its threshold, plus any series worth exporting for
plots.  The full oracle-backed acceptance battery lives in the test suite;
these are the field-deployable subset.
"""

import numpy as np

from . import biot_savart, diagnostics, kernels, mild_solver, semigroup
from .fields import (
    HalfPlaneGrid,
    ScalarField,
    VortexMeasure,
    impulse,
    norm_2d,
    rescale_to_selfsimilar,
)

SQRT_PI = np.sqrt(np.pi)


def _check(name, value, threshold, larger_is_bad=True):
    passed = value <= threshold if larger_is_bad else value >= threshold
    return {"name": name, "value": float(value), "threshold": float(threshold),
            "passed": bool(passed)}


def _ring(grid, l1_mass=0.1, center=2.0, width=0.7):
    amp = l1_mass / (np.pi * width ** 2)
    return grid.sample(
        lambda r, z: amp * np.exp(-((r - center) ** 2 + z ** 2) / width ** 2)
    )


def suite_kernels(rng_seed=0):
    checks = []
    s_small = np.array([1e-6, 1e-5])
    approx = np.log(8.0 / np.sqrt(s_small)) - 2.0
    checks.append(_check(
        "small-argument stream-kernel expansion",
        np.abs(kernels.stream_kernel(s_small) - approx).max(), 0.01,
    ))
    s_large = np.array([1e5, 1e6])
    checks.append(_check(
        "large-argument stream-kernel tail",
        np.abs(s_large ** 1.5 * kernels.stream_kernel(s_large) - np.pi / 2).max(), 0.01,
    ))
    checks.append(_check(
        "small-argument heat-kernel expansion",
        abs(kernels.heat_kernel(1e-4) - (1.0 - 0.75e-4)), 2e-3,
    ))
    checks.append(_check(
        "large-argument heat-kernel tail",
        abs(1e4 ** 1.5 * kernels.heat_kernel(1e4) - SQRT_PI / 4.0), 1e-3,
    ))
    pol = kernels.DEFAULT_POLICY
    seam = 0.0
    for fn, small, large in [
        (kernels.stream_kernel, kernels._stream_small, kernels._stream_large),
        (kernels.stream_kernel_deriv, kernels._stream_deriv_small, kernels._stream_deriv_large),
        (kernels.heat_kernel, kernels._heat_small, kernels._heat_large),
        (kernels.heat_kernel_deriv, kernels._heat_deriv_small, kernels._heat_deriv_large),
    ]:
        lo, hi = pol.small_arg_threshold, pol.large_arg_threshold
        seam = max(seam, abs(fn(np.array([lo]))[0] - small(np.array([lo]))[0]))
        seam = max(seam, abs(fn(np.array([hi]))[0] - large(np.array([hi]))[0]))
    checks.append(_check("threshold seam mismatch", seam, 10 * pol.quad_abs_tol))
    s = np.geomspace(1e-6, 1e6, 60)
    fvals = kernels.stream_kernel(s)
    checks.append(_check("monotone decrease", np.diff(fvals).max(), 0.0))
    table = kernels.default_table()
    rep = table.validation_report(n_probe=100, seed=rng_seed)
    checks.append(_check("lookup-table relative error", max(rep.values()), 1e-8))
    series = {"stream_kernel": {"s": list(s), "value": [float(v) for v in fvals]}}
    return {"passed": all(c["passed"] for c in checks), "checks": checks, "series": series}


def suite_biotsavart(rng_seed=0):
    checks = []
    grid = HalfPlaneGrid(24, 48)
    f = _ring(grid, l1_mass=1.0)
    fft_v = biot_savart.velocity(f)
    direct_v = biot_savart.velocity_direct(f)
    gap = max(
        np.abs(fft_v.u_r - direct_v.u_r).max(),
        np.abs(fft_v.u_z - direct_v.u_z).max(),
    )
    checks.append(_check("spectral vs direct assembly", gap, 1e-12))
    checks.append(_check(
        "radial velocity odd in z for symmetric data",
        np.abs(fft_v.u_r + fft_v.u_r[:, ::-1]).max(), 1e-14,
    ))
    grid2 = HalfPlaneGrid(64, 128)
    f2 = _ring(grid2, l1_mass=1.0)
    pairing = abs(biot_savart.radial_flux_pairing(f2))
    vel2 = biot_savart.velocity(f2)
    scale = norm_2d(ScalarField(grid2, f2.values * grid2.r[:, None]), 1) * vel2.sup_norm
    checks.append(_check("pair-symmetric radial flux cancellation", pairing, 1e-10 * scale))
    psi = biot_savart.stream_function(f2)
    dpsi_dz = np.gradient(psi.values, grid2.z, axis=1, edge_order=2)
    u_r_psi = -dpsi_dz / grid2.r[:, None]
    interior = (slice(2, -2), slice(2, -2))
    consistency = np.abs(u_r_psi[interior] - vel2.u_r[interior]).max() / vel2.sup_norm
    checks.append(_check("stream-function curl consistency", consistency, 0.02))
    return {"passed": all(c["passed"] for c in checks), "checks": checks, "series": {}}


def suite_semigroup(rng_seed=0):
    checks = []
    grid = HalfPlaneGrid(96, 192)
    f = _ring(grid, l1_mass=1.0)
    l1 = norm_2d(f, 1)
    defect = semigroup.composition_defect(1.0, 1.0, f)
    checks.append(_check("composition defect", defect / l1, 1e-3))
    out = semigroup.apply(1.0, f)
    checks.append(_check("positivity preserved", -out.values.min(), 0.0, larger_is_bad=True))
    checks.append(_check("planar-mass contraction", norm_2d(out, 1) / l1, 1.0))
    checks.append(_check(
        "impulse drift per application", abs(impulse(out) / impulse(f) - 1.0), 1e-5,
    ))
    measure = VortexMeasure(atoms=((1.0, 0.0, 1.0),))
    spread = semigroup.apply_to_measure(1.0, measure, grid)
    checks.append(_check("measure mass bound", norm_2d(spread, 1), 1.0 + 1e-3))
    return {"passed": all(c["passed"] for c in checks), "checks": checks, "series": {}}


def suite_decay(rng_seed=0):
    checks = []
    grid = HalfPlaneGrid(64, 128)
    f = _ring(grid)
    config = mild_solver.SolverConfig(dt=0.1)
    traj = mild_solver.evolve(f, 5.0, config)
    l1 = [rec.l1_2d for rec in traj.records]
    checks.append(_check("planar mass strictly decreasing", max(np.diff(l1)), 0.0))
    imp = [rec.impulse for rec in traj.records]
    drift = max(abs(i / imp[0] - 1.0) for i in imp)
    checks.append(_check("impulse drift", drift, 5e-3))
    tsu = max(rec.time ** 0.5 * rec.u_sup for rec in traj.records)
    checks.append(_check("scaled velocity bound finite", tsu, 10.0 * l1[0]))
    report = diagnostics.decay_report(traj, [2.0, np.inf])
    series = {
        "l1": {"t": [rec.time for rec in traj.records], "value": l1},
        "scaled_l2": {"t": report[2.0]["t"], "value": report[2.0]["scaled"]},
    }
    ok = all(
        np.diff(report[p]["scaled"][-5:]).max() < 0 for p in (2.0, np.inf)
    )
    checks.append(_check("scaled norms decreasing late", 0.0 if ok else 1.0, 0.5))
    return {"passed": all(c["passed"] for c in checks), "checks": checks, "series": series}


def suite_selfsimilar(rng_seed=0):
    checks = []
    measure = VortexMeasure(atoms=((1.0, 0.0, 1.0),))
    ref = HalfPlaneGrid(96, 192)
    profile = diagnostics.selfsimilar_profile(1.0, ref)
    profile_l1 = norm_2d(profile, 1)
    dists = []
    for t in (10.0, 30.0, 100.0):
        scaled_grid = HalfPlaneGrid(96, 192, 12.0 * np.sqrt(t), 12.0 * np.sqrt(t))
        spread = semigroup.apply_to_measure(t, measure, scaled_grid)
        rescaled = rescale_to_selfsimilar(spread, t, ref)
        dists.append(norm_2d(rescaled - profile, 1))
    checks.append(_check("distance decreasing", max(np.diff(dists)), 0.0))
    checks.append(_check("distance at t=100", dists[-1] / profile_l1, 0.05))
    series = {"profile_distance": {"t": [10.0, 30.0, 100.0], "value": dists}}
    return {"passed": all(c["passed"] for c in checks), "checks": checks, "series": series}


def suite_inequalities(rng_seed=0):
    checks = []
    series = {}
    n = 20
    for spec in ("velocity_lp", "velocity_sup_weighted", "radial_shear",
                 "semigroup_smoothing", "semigroup_div_smoothing", "eta_decay"):
        r1 = diagnostics.inequality_sampler(spec, n, rng_seed)
        r2 = diagnostics.inequality_sampler(spec, n, rng_seed + 1)
        spread = abs(r1["max_ratio"] - r2["max_ratio"]) / max(r1["max_ratio"], r2["max_ratio"])
        checks.append(_check(f"{spec} max ratio finite", r1["max_ratio"], np.inf))
        checks.append(_check(f"{spec} seed stability", spread, 0.2))
        series[spec] = {"sample": list(range(n)), "ratio": r1["ratios"]}
    return {"passed": all(c["passed"] for c in checks), "checks": checks, "series": series}


SUITES = {
    "kernels": suite_kernels,
    "biotsavart": suite_biotsavart,
    "semigroup": suite_semigroup,
    "decay": suite_decay,
    "selfsimilar": suite_selfsimilar,
    "inequalities": suite_inequalities,
}


def run_suite(name, rng_seed=0):
    return SUITES[name](rng_seed=rng_seed)
