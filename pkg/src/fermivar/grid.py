"""Uniform cubic grids and real scalar fields.

A :class:`BoxGrid` covers the cube [-L, L]^3 with ``n`` nodes per axis at
x_i = -L + i*h, h = 2L/(n-1), so the faces of the cube carry nodes.  The
boundary condition is homogeneous Dirichlet: differential operators read the
boundary planes as zero and write zeros there, which keeps the discrete
Laplacian exactly symmetric under the quadrature inner product for *any*
field, conforming or not.

Quadrature convention (the "boundary-row convention" referred to in tests):
tensor-product trapezoid weights, i.e. weight h per interior node and h/2 on
the first/last node of each axis.  Constants therefore integrate to exactly
(2L)^3, and for fields that vanish on the boundary the rule coincides with
plain h^3 * sum.  Reductions go through numpy's pairwise summation, which is
deterministic for a fixed shape on a fixed build.

Fields are bare float64 arrays wrapped with their grid; operations live at
module level and return new fields.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

BOUNDARY_DIRICHLET = "dirichlet_zero"

SNAPSHOT_MAGIC = b"FVF1"


class GridError(ValueError):
    pass


class GridMismatchError(GridError):
    pass


class NonFiniteFieldError(ValueError):
    pass


@dataclass(frozen=True)
class BoxGrid:
    """Uniform grid on [-L, L]^3 with homogeneous Dirichlet boundary."""

    n_per_axis: int
    half_width: float
    boundary: str = BOUNDARY_DIRICHLET

    def __post_init__(self):
        if self.n_per_axis < 8:
            raise GridError(f"n_per_axis must be >= 8, got {self.n_per_axis}")
        if not (self.half_width > 0.0 and np.isfinite(self.half_width)):
            raise GridError(f"half_width must be positive, got {self.half_width}")
        if self.boundary != BOUNDARY_DIRICHLET:
            raise GridError(f"unsupported boundary {self.boundary!r}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n_per_axis - 1)

    @property
    def shape(self) -> tuple[int, int, int]:
        n = self.n_per_axis
        return (n, n, n)

    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_per_axis)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ax = self.axis()
        return np.meshgrid(ax, ax, ax, indexing="ij")

    def quad_weights_1d(self) -> np.ndarray:
        w = np.full(self.n_per_axis, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def zeros(self) -> "ScalarField":
        return ScalarField(self, np.zeros(self.shape))


@dataclass
class ScalarField:
    """Real scalar field sampled on a :class:`BoxGrid`."""

    grid: BoxGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise GridError(f"field shape {v.shape} != grid shape {self.grid.shape}")
        self.values = v

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


def _require_same_grid(a: ScalarField, b: ScalarField) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")


def _check_finite(values: np.ndarray, grid: BoxGrid, what: str) -> None:
    if np.all(np.isfinite(values)):
        return
    bad = np.argwhere(~np.isfinite(values))[0]
    ax = grid.axis()
    xyz = (ax[bad[0]], ax[bad[1]], ax[bad[2]])
    raise NonFiniteFieldError(
        f"{what} produced a non-finite value at node {tuple(int(i) for i in bad)}"
        f" = {xyz}"
    )


def mask_boundary(values: np.ndarray) -> np.ndarray:
    """Copy of ``values`` with the six boundary planes zeroed."""
    m = values.copy()
    m[0, :, :] = 0.0
    m[-1, :, :] = 0.0
    m[:, 0, :] = 0.0
    m[:, -1, :] = 0.0
    m[:, :, 0] = 0.0
    m[:, :, -1] = 0.0
    return m


def boundary_max_abs(field: ScalarField) -> float:
    v = field.values
    return max(
        float(np.abs(v[0]).max()),
        float(np.abs(v[-1]).max()),
        float(np.abs(v[:, 0]).max()),
        float(np.abs(v[:, -1]).max()),
        float(np.abs(v[:, :, 0]).max()),
        float(np.abs(v[:, :, -1]).max()),
    )


def sample(grid: BoxGrid, f, clamp_boundary: bool = False) -> ScalarField:
    """Sample ``f(x, y, z)`` at the grid nodes.

    ``f`` must accept numpy coordinate arrays (every sampled function in this
    package is a vectorized expression).  Non-finite results are rejected with
    the offending node location.
    """
    X, Y, Z = grid.meshgrid()
    vals = np.asarray(f(X, Y, Z), dtype=np.float64)
    if vals.shape != grid.shape:
        vals = np.broadcast_to(vals, grid.shape).astype(np.float64)
    _check_finite(vals, grid, "sample")
    if clamp_boundary:
        vals = mask_boundary(vals)
    return ScalarField(grid, vals)


def integrate(field: ScalarField) -> float:
    """Trapezoid quadrature of the field over the box."""
    g = field.grid
    w = g.quad_weights_1d()
    return float(np.einsum("ijk,i,j,k->", field.values, w, w, w))


def inner(f: ScalarField, g: ScalarField) -> float:
    """L2 inner product under the same trapezoid weights as :func:`integrate`."""
    _require_same_grid(f, g)
    w = f.grid.quad_weights_1d()
    return float(np.einsum("ijk,i,j,k->", f.values * g.values, w, w, w))


def norm(f: ScalarField) -> float:
    return float(np.sqrt(max(inner(f, f), 0.0)))


def laplacian_apply(field: ScalarField) -> ScalarField:
    """Apply the negated 7-point Laplacian -lap_h under Dirichlet zero.

    The operator is the interior stencil padded with zeros: boundary values of
    the input are read as zero and the output boundary planes are zero.  With
    the uniform interior quadrature weight this makes the operator exactly
    symmetric: inner(-lap f, g) == inner(f, -lap g) up to roundoff for all
    fields.
    """
    g = field.grid
    h2 = g.spacing ** 2
    m = mask_boundary(field.values)
    out = np.zeros_like(m)
    core = 6.0 * m[1:-1, 1:-1, 1:-1]
    core -= m[:-2, 1:-1, 1:-1]
    core -= m[2:, 1:-1, 1:-1]
    core -= m[1:-1, :-2, 1:-1]
    core -= m[1:-1, 2:, 1:-1]
    core -= m[1:-1, 1:-1, :-2]
    core -= m[1:-1, 1:-1, 2:]
    out[1:-1, 1:-1, 1:-1] = core / h2
    return ScalarField(g, out)


def neg_laplacian_core(core: np.ndarray, h: float) -> np.ndarray:
    """-lap_h restricted to interior degrees of freedom (shape (n-2,)^3)."""
    n = core.shape[0] + 2
    padded = np.zeros((n, n, n))
    padded[1:-1, 1:-1, 1:-1] = core
    out = 6.0 * core
    out = out - padded[:-2, 1:-1, 1:-1]
    out -= padded[2:, 1:-1, 1:-1]
    out -= padded[1:-1, :-2, 1:-1]
    out -= padded[1:-1, 2:, 1:-1]
    out -= padded[1:-1, 1:-1, :-2]
    out -= padded[1:-1, 1:-1, 2:]
    return out / (h * h)


def kinetic_energy(field: ScalarField) -> float:
    """Forward-difference gradient form; equals inner(f, -lap_h f) exactly.

    Computed as h * sum over faces of the squared forward difference of the
    boundary-masked field, which is nonnegative by construction.
    """
    m = mask_boundary(field.values)
    h = field.grid.spacing
    acc = 0.0
    for ax in range(3):
        d = np.diff(m, axis=ax)
        acc += float((d * d).sum())
    return acc * h


def resample_scaled(
    field: ScalarField,
    scale: float,
    center: np.ndarray | None = None,
    out_grid: BoxGrid | None = None,
) -> np.ndarray:
    """Values of ``field(scale * x + center)`` on ``out_grid`` nodes.

    Tricubic (cubic-spline) interpolation with zero extension outside the box.
    This is the shared backend of :func:`dilate`, the trial-state builder and
    the profile extraction.
    """
    src = field.grid
    dst = src if out_grid is None else out_grid
    if center is None:
        center = np.zeros(3)
    ax = dst.axis()
    idx = []
    for d in range(3):
        y = scale * ax + center[d]
        idx.append((y + src.half_width) / src.spacing)
    n = dst.n_per_axis
    I = np.broadcast_to(idx[0][:, None, None], (n, n, n))
    J = np.broadcast_to(idx[1][None, :, None], (n, n, n))
    K = np.broadcast_to(idx[2][None, None, :], (n, n, n))
    out = map_coordinates(
        field.values,
        np.stack([I, J, K]),
        order=3,
        mode="grid-constant",
        cval=0.0,
        prefilter=True,
    )
    return out


def _dilate_raw(field: ScalarField, tau: float) -> np.ndarray:
    return tau ** 1.5 * resample_scaled(field, tau)


def dilate(field: ScalarField, tau: float) -> ScalarField:
    """Mass-preserving dilation g(x) = tau^{3/2} f(tau x).

    Exact continuum dilation is unrepresentable on a fixed grid, so after
    cubic resampling the result is rescaled to restore integrate(f^2) exactly.
    tau = 1 is an exact identity fast path.
    """
    if not (np.isfinite(tau) and tau > 0.0):
        raise ValueError(f"dilation factor must be positive, got {tau}")
    if tau == 1.0:
        return field.copy()
    vals = _dilate_raw(field, tau)
    out = ScalarField(field.grid, vals)
    m_in = integrate(ScalarField(field.grid, field.values * field.values))
    m_out = integrate(ScalarField(field.grid, vals * vals))
    if m_out > 0.0 and m_in > 0.0:
        out.values *= np.sqrt(m_in / m_out)
    _check_finite(out.values, field.grid, "dilate")
    return out


def dilation_generator(field: ScalarField) -> ScalarField:
    """Infinitesimal mass-preserving dilation, d/dtau dilate(f, tau) at tau=1.

    Evaluates (3/2) f + x . grad f with centered interior differences and a
    zero boundary.  Subtracting its component from a search direction pins
    the scale of otherwise dilation-invariant functionals.
    """
    g = field.grid
    h = g.spacing
    v = field.values
    out = 1.5 * mask_boundary(v)
    ax = g.axis()
    c = slice(1, -1)
    df = np.zeros_like(v)
    df[c, :, :] = (v[2:, :, :] - v[:-2, :, :]) / (2.0 * h)
    out += ax[:, None, None] * mask_boundary(df)
    df[:] = 0.0
    df[:, c, :] = (v[:, 2:, :] - v[:, :-2, :]) / (2.0 * h)
    out += ax[None, :, None] * mask_boundary(df)
    df[:] = 0.0
    df[:, :, c] = (v[:, :, 2:] - v[:, :, :-2]) / (2.0 * h)
    out += ax[None, None, :] * mask_boundary(df)
    return ScalarField(g, out)


def second_moment(field_sq: ScalarField, center: np.ndarray | None = None) -> float:
    """integrate(|x - center|^2 * field_sq)."""
    g = field_sq.grid
    ax = g.axis()
    if center is None:
        center = np.zeros(3)
    X = (ax - center[0])[:, None, None]
    Y = (ax - center[1])[None, :, None]
    Z = (ax - center[2])[None, None, :]
    r2 = X * X + Y * Y + Z * Z
    return integrate(ScalarField(g, field_sq.values * r2))


# ---------------------------------------------------------------------------
# field snapshots: magic "FVF1", n (uint32 LE), half_width (float64 LE),
# then n^3 float64 LE in C (i,j,k) order.
# ---------------------------------------------------------------------------

class SnapshotFormatError(ValueError):
    pass


def write_snapshot(field: ScalarField, path) -> None:
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<I", g.n_per_axis))
        fh.write(struct.pack("<d", g.half_width))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_snapshot(path) -> ScalarField:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SNAPSHOT_MAGIC:
            raise SnapshotFormatError(f"bad magic {magic!r} in {path}")
        (n,) = struct.unpack("<I", fh.read(4))
        (L,) = struct.unpack("<d", fh.read(8))
        data = fh.read(n * n * n * 8)
        if len(data) != n * n * n * 8:
            raise SnapshotFormatError(f"truncated snapshot {path}")
        vals = np.frombuffer(data, dtype="<f8").reshape(n, n, n).copy()
    grid = BoxGrid(n_per_axis=int(n), half_width=float(L))
    _check_finite(vals, grid, f"snapshot {path}")
    return ScalarField(grid, vals)
