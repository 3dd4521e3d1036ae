"""Scalar fields and finite measures on the meridian half-plane {r > 0}.

The grid is cell-centered in r so that no sample sits on the axis, where the
toroidal vorticity satisfies a homogeneous Dirichlet condition and its ratio
to r a homogeneous Neumann condition.  Two measure conventions coexist: the
planar measure dr dz (norm_2d) and the solid measure r dr dz (norm_3d); the
L1 norms of a vorticity field and of the matching ratio field agree exactly.

Fields are immutable containers; every operation returns a new object.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "HalfPlaneGrid",
    "ScalarField",
    "VortexMeasure",
    "VelocityField",
    "DiagnosticsRecord",
    "norm_2d",
    "norm_3d",
    "mass",
    "impulse",
    "rescale_to_selfsimilar",
    "omega_to_eta",
    "eta_to_omega",
    "weak_pairing",
    "write_field",
    "read_field",
    "field_to_csv",
]

OMEGA_TAG = "omega_theta"
ETA_TAG = "eta"


@dataclass(frozen=True)
class HalfPlaneGrid:
    """Cell-centered tensor grid on [0, r_max] x [-z_half, z_half]."""

    n_r: int
    n_z: int
    r_max: float = 12.0
    z_half: float = 12.0

    def __post_init__(self):
        if self.n_r < 1 or self.n_z < 1:
            raise ValueError("grid needs at least one cell per direction")
        if self.r_max <= 0 or self.z_half <= 0:
            raise ValueError("domain extents must be positive")

    @property
    def h_r(self):
        return self.r_max / self.n_r

    @property
    def h_z(self):
        return 2.0 * self.z_half / self.n_z

    @property
    def r(self):
        return (np.arange(self.n_r) + 0.5) * self.h_r

    @property
    def z(self):
        return -self.z_half + (np.arange(self.n_z) + 0.5) * self.h_z

    @property
    def cell_area(self):
        return self.h_r * self.h_z

    def meshgrid(self):
        return np.meshgrid(self.r, self.z, indexing="ij")

    def refine(self, factor=2):
        return HalfPlaneGrid(self.n_r * factor, self.n_z * factor, self.r_max, self.z_half)

    def sample(self, fn, tag=OMEGA_TAG):
        """ScalarField from an analytic function of (r, z)."""
        rr, zz = self.meshgrid()
        return ScalarField(self, np.asarray(fn(rr, zz), dtype=float), tag)


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: HalfPlaneGrid
    values: np.ndarray
    quantity_tag: str = OMEGA_TAG
    time: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_r, self.grid.n_z):
            raise ValueError(f"values shape {v.shape} != grid {(self.grid.n_r, self.grid.n_z)}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if self.quantity_tag not in (OMEGA_TAG, ETA_TAG):
            raise ValueError(f"unknown quantity_tag {self.quantity_tag!r}")
        object.__setattr__(self, "values", v)

    def with_values(self, values, tag=None, time=None):
        return ScalarField(
            self.grid,
            values,
            self.quantity_tag if tag is None else tag,
            self.time if time is None else time,
        )

    def at_time(self, time):
        return replace(self, time=time)

    def __add__(self, other):
        self._check_compatible(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        self._check_compatible(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar):
        return self.with_values(self.values * float(scalar))

    __rmul__ = __mul__

    def _check_compatible(self, other):
        if self.grid != other.grid or self.quantity_tag != other.quantity_tag:
            raise ValueError("fields live on different grids or carry different tags")


def _require_tag(f, tag):
    if f.quantity_tag != tag:
        raise ValueError(f"operation needs a {tag!r} field, got {f.quantity_tag!r}")


@dataclass(frozen=True)
class VortexMeasure:
    """Finite measure: an absolutely continuous density plus point masses.

    Each atom (r, z, strength) is a circular vortex filament of that
    circulation through the meridian point; atoms must sit off the axis.
    A singular-continuous part has no finite representation here and must
    be approximated through the density.
    """

    density: ScalarField | None = None
    atoms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.density is not None:
            _require_tag(self.density, OMEGA_TAG)
        atoms = tuple((float(r), float(z), float(g)) for r, z, g in self.atoms)
        for r, _, _ in atoms:
            if not r > 0:
                raise ValueError("atoms must have r > 0")
        object.__setattr__(self, "atoms", atoms)

    @property
    def total_variation(self):
        tv = sum(abs(g) for _, _, g in self.atoms)
        if self.density is not None:
            tv += norm_2d(self.density, 1)
        return tv

    @property
    def atomic_variation(self):
        return sum(abs(g) for _, _, g in self.atoms)

    def impulse(self):
        out = sum(g * r * r for r, _, g in self.atoms)
        if self.density is not None:
            out += impulse(self.density)
        return out


@dataclass(frozen=True, eq=False)
class VelocityField:
    grid: HalfPlaneGrid
    u_r: np.ndarray
    u_z: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        for name in ("u_r", "u_z"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (self.grid.n_r, self.grid.n_z):
                raise ValueError(f"{name} shape mismatch")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    @property
    def sup_norm(self):
        return float(max(np.abs(self.u_r).max(), np.abs(self.u_z).max()))

    def norm_2d(self, p):
        mag = np.hypot(self.u_r, self.u_z)
        if p == np.inf:
            return float(mag.max())
        return float((np.sum(mag ** p) * self.grid.cell_area) ** (1.0 / p))


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    l1_2d: float
    lp_2d: dict
    mass: float
    impulse: float
    u_sup: float
    scaled_norms: dict
    profile_l1_distance: float | None = None

    @staticmethod
    def _p_label(p):
        if p == np.inf:
            return "inf"
        if abs(p - 4.0 / 3.0) < 1e-12:
            return "4/3"
        return f"{p:g}"

    def as_dict(self):
        d = {
            "time": self.time,
            "l1_2d": self.l1_2d,
            "mass": self.mass,
            "impulse": self.impulse,
            "u_sup": self.u_sup,
            "profile_l1_distance": self.profile_l1_distance,
        }
        for p, v in self.lp_2d.items():
            d[f"lp_{self._p_label(p)}"] = v
        for p, v in self.scaled_norms.items():
            d[f"scaled_{self._p_label(p)}"] = v
        return d


# ----------------------------------------------------------------------------
# norms and moments (midpoint rule; cell centers double as quadrature nodes)

def _norm(values, weight, area, p):
    if p < 1:
        raise ValueError("p must be >= 1")
    if p == np.inf:
        return float(np.abs(values).max(initial=0.0))
    return float((np.sum(np.abs(values) ** p * weight) * area) ** (1.0 / p))


def norm_2d(f, p):
    """L^p norm with respect to the planar measure dr dz."""
    return _norm(f.values, 1.0, f.grid.cell_area, p)


def norm_3d(f, p):
    """L^p norm with respect to the solid measure r dr dz."""
    if p == np.inf:
        return float(np.abs(f.values).max(initial=0.0))
    return _norm(f.values, f.grid.r[:, None], f.grid.cell_area, p)


def mass(f):
    """Signed integral of a vorticity field over the half-plane."""
    _require_tag(f, OMEGA_TAG)
    return float(np.sum(f.values) * f.grid.cell_area)


def impulse(f):
    """Second radial moment int r^2 omega dr dz; conserved by the flow."""
    _require_tag(f, OMEGA_TAG)
    return float(np.sum(f.values * f.grid.r[:, None] ** 2) * f.grid.cell_area)


def weighted_norm_2d(f, p, weight_power):
    """L^p norm of r^weight_power * values with respect to dr dz."""
    w = f.grid.r[:, None] ** weight_power
    if p == np.inf:
        return float(np.abs(f.values * w).max(initial=0.0))
    return float((np.sum(np.abs(f.values * w) ** p) * f.grid.cell_area) ** (1.0 / p))


# ----------------------------------------------------------------------------
# conversions and rescaling

def omega_to_eta(f):
    """Divide by r (exact at cell centers, which never touch the axis)."""
    _require_tag(f, OMEGA_TAG)
    return f.with_values(f.values / f.grid.r[:, None], tag=ETA_TAG)


def eta_to_omega(f):
    _require_tag(f, ETA_TAG)
    return f.with_values(f.values * f.grid.r[:, None], tag=OMEGA_TAG)


def bilinear_sample(f, r_pts, z_pts):
    """Sample a field at arbitrary points; zero outside the grid footprint."""
    g = f.grid
    fr = r_pts / g.h_r - 0.5
    fz = (z_pts + g.z_half) / g.h_z - 0.5
    i0 = np.floor(fr).astype(int)
    k0 = np.floor(fz).astype(int)
    wr = fr - i0
    wz = fz - k0
    out = np.zeros(np.broadcast(fr, fz).shape)
    vals = f.values
    for di, wi in ((0, 1.0 - wr), (1, wr)):
        for dk, wk in ((0, 1.0 - wz), (1, wz)):
            ii = i0 + di
            kk = k0 + dk
            ok = (ii >= 0) & (ii < g.n_r) & (kk >= 0) & (kk < g.n_z)
            w = wi * wk
            out += np.where(ok, np.take(vals, np.clip(ii, 0, g.n_r - 1) * g.n_z
                                        + np.clip(kk, 0, g.n_z - 1)), 0.0) * w
    return out


def rescale_to_selfsimilar(f, t, reference_grid=None):
    """Field (r, z) -> t^2 * f(r sqrt(t), z sqrt(t)) on a fixed reference grid.

    Values requested outside the source grid read as zero, so the source grid
    must be large enough (extent ~ reference extent times sqrt(t)) for the
    rescaling to be meaningful at late times.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    ref = reference_grid or default_reference_grid()
    rr, zz = ref.meshgrid()
    st = np.sqrt(t)
    vals = t * t * bilinear_sample(f, rr * st, zz * st)
    return ScalarField(ref, vals, f.quantity_tag, time=t)


_REFERENCE_GRID = HalfPlaneGrid(96, 192, 12.0, 12.0)


def default_reference_grid():
    """Grid on which rescaled profiles are compared."""
    return _REFERENCE_GRID


def weak_pairing(obj, test_fn):
    """Pair a field or measure against a smooth test function of (r, z).

    Discrete stand-in for weak convergence statements: only a fixed family
    of smooth test functions can be probed on a grid.
    """
    if isinstance(obj, VortexMeasure):
        out = sum(g * test_fn(r, z) for r, z, g in obj.atoms)
        if obj.density is not None:
            out += weak_pairing(obj.density, test_fn)
        return float(out)
    rr, zz = obj.grid.meshgrid()
    return float(np.sum(obj.values * test_fn(rr, zz)) * obj.grid.cell_area)


# ----------------------------------------------------------------------------
# on-disk format: one JSON header line, then the raw row-major float64 array
# (little-endian), r index outer.

def write_field(f, path):
    header = {
        "n_r": f.grid.n_r,
        "n_z": f.grid.n_z,
        "r_max": f.grid.r_max,
        "z_half": f.grid.z_half,
        "quantity_tag": f.quantity_tag,
        "time": f.time,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = fh.read()
    grid = HalfPlaneGrid(header["n_r"], header["n_z"], header["r_max"], header["z_half"])
    vals = np.frombuffer(raw, dtype="<f8").reshape(grid.n_r, grid.n_z)
    return ScalarField(grid, vals.astype(float), header["quantity_tag"], header.get("time", 0.0))


def field_to_csv(f, path):
    """r,z,value rows; intended for small grids."""
    rr, zz = f.grid.meshgrid()
    table = np.column_stack([rr.ravel(), zz.ravel(), f.values.ravel()])
    np.savetxt(path, table, delimiter=",", header="r,z,value", comments="")


def write_velocity(vel, path):
    """Same layout as write_field with both components back to back."""
    header = {
        "kind": "velocity",
        "n_r": vel.grid.n_r,
        "n_z": vel.grid.n_z,
        "r_max": vel.grid.r_max,
        "z_half": vel.grid.z_half,
        "time": vel.time,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(vel.u_r, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(vel.u_z, dtype="<f8").tobytes())


def read_velocity(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = fh.read()
    grid = HalfPlaneGrid(header["n_r"], header["n_z"], header["r_max"], header["z_half"])
    n = grid.n_r * grid.n_z
    flat = np.frombuffer(raw, dtype="<f8")
    u_r = flat[:n].reshape(grid.n_r, grid.n_z).astype(float)
    u_z = flat[n:].reshape(grid.n_r, grid.n_z).astype(float)
    return VelocityField(grid, u_r, u_z, header.get("time", 0.0))
