"""Trap potentials, energies and the mean-field operator for an orbital pair.

The energy of an orthonormal pair (u1, u2) with density rho = u1^2 + u2^2 is

    E_a = T + W - a * P,
    T = sum_i kinetic(u_i),  W = int V rho,  P = int rho^{5/3},

and the associated mean-field operator is H = -lap + V - (5a/3) rho^{2/3}.
Multiplying the stationarity system by the orbitals and integrating gives the
trace identity  mu1 + mu2 = E - (2a/3) P,  which holds *exactly* for the 2x2
Rayleigh multipliers at any pair (the trace is rotation invariant), so it is
a free consistency check on every solver record.

Traps are finite products  V(x) = g(x) * prod_m |x - x_m|^{p_m}  with a
positive bounded prefactor g.  The flatness data derived from the wells:

    p       = max_m p_m
    alpha_m = lim_{x->x_m} V(x)/|x-x_m|^p   (+inf when p_m < p)
    alpha   = min over finite alpha_m
    Z       = argmin wells (the flattest minima)

Infinite alpha_m is represented by ``math.inf``, never by a large float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import (
    BoxGrid,
    ScalarField,
    GridError,
    integrate,
    inner,
    kinetic_energy,
    laplacian_apply,
    mask_boundary,
)
from .frames import OrbitalPair

FIVE_THIRDS = 5.0 / 3.0


class TrapError(ValueError):
    pass


@dataclass(frozen=True)
class Well:
    center: tuple[float, float, float]
    power: float

    def __post_init__(self):
        if not (self.power > 0.0 and math.isfinite(self.power)):
            raise TrapError(f"well power must be positive, got {self.power}")
        if len(self.center) != 3 or not all(math.isfinite(c) for c in self.center):
            raise TrapError(f"bad well center {self.center}")


@dataclass(frozen=True)
class TrapMetadata:
    p: float
    centers: tuple[tuple[float, float, float], ...]
    alphas: tuple[float, ...]  # math.inf flags the steeper wells
    alpha: float
    flattest: tuple[tuple[float, float, float], ...]  # the set Z


@dataclass(frozen=True)
class TrapPotential:
    wells: tuple[Well, ...]
    prefactor: float | ScalarField = 1.0

    def __post_init__(self):
        if not self.wells:
            raise TrapError("trap needs at least one well")
        centers = [np.asarray(w.center) for w in self.wells]
        for i in range(len(centers)):
            for j in range(i + 1, len(centers)):
                if np.linalg.norm(centers[i] - centers[j]) == 0.0:
                    raise TrapError(f"wells {i} and {j} share a center")
        if isinstance(self.prefactor, ScalarField):
            vmin = float(self.prefactor.values.min())
            vmax = float(self.prefactor.values.max())
            if not (vmin > 0.0 and np.isfinite(vmax)):
                raise TrapError(
                    f"prefactor field must be positive and bounded, range "
                    f"[{vmin}, {vmax}]"
                )
        else:
            if not (self.prefactor > 0.0 and math.isfinite(self.prefactor)):
                raise TrapError(f"prefactor must be positive, got {self.prefactor}")

    # ----- derived flatness data ------------------------------------------

    def prefactor_at(self, x: np.ndarray) -> float:
        if isinstance(self.prefactor, ScalarField):
            from scipy.ndimage import map_coordinates

            g = self.prefactor.grid
            idx = (np.asarray(x) + g.half_width) / g.spacing
            return float(
                map_coordinates(
                    self.prefactor.values,
                    idx.reshape(3, 1),
                    order=3,
                    mode="nearest",
                )[0]
            )
        return float(self.prefactor)

    def metadata(self) -> TrapMetadata:
        p = max(w.power for w in self.wells)
        centers = tuple(tuple(float(c) for c in w.center) for w in self.wells)
        alphas = []
        for m, w in enumerate(self.wells):
            if w.power < p:
                alphas.append(math.inf)
                continue
            a = self.prefactor_at(np.asarray(w.center))
            for k, other in enumerate(self.wells):
                if k == m:
                    continue
                d = np.linalg.norm(np.asarray(w.center) - np.asarray(other.center))
                a *= d ** other.power
            alphas.append(float(a))
        finite = [a for a in alphas if math.isfinite(a)]
        alpha = min(finite)
        flattest = tuple(
            centers[m]
            for m, a in enumerate(alphas)
            if math.isfinite(a) and a <= alpha * (1.0 + 1e-12)
        )
        return TrapMetadata(
            p=float(p), centers=centers, alphas=tuple(alphas), alpha=alpha,
            flattest=flattest,
        )


def potential_field(trap: TrapPotential, grid: BoxGrid) -> ScalarField:
    """Sample the trap on the grid.  All well centers must sit inside the box."""
    L = grid.half_width
    for w in trap.wells:
        if max(abs(c) for c in w.center) > L:
            raise TrapError(f"well center {w.center} outside box [-{L}, {L}]^3")
    X, Y, Z = grid.meshgrid()
    if isinstance(trap.prefactor, ScalarField):
        if trap.prefactor.grid != grid:
            raise GridError("prefactor field lives on a different grid")
        V = trap.prefactor.values.copy()
    else:
        V = np.full(grid.shape, float(trap.prefactor))
    for w in trap.wells:
        r2 = (X - w.center[0]) ** 2 + (Y - w.center[1]) ** 2 + (Z - w.center[2]) ** 2
        V = V * r2 ** (w.power / 2.0)
    return ScalarField(grid, V)


# ---------------------------------------------------------------------------


@dataclass
class Diagnostics:
    """Energy decomposition and stationarity data for one pair."""

    energy: float
    kinetic: float
    potential: float
    p_norm: float  # int rho^{5/3}
    a: float
    mu1: float | None = None
    mu2: float | None = None
    sum_rule_residual: float | None = None
    virial_residual: float | None = None
    orthonormality_defect: float = 0.0

    def as_dict(self) -> dict:
        return {
            "energy": self.energy,
            "kinetic": self.kinetic,
            "potential": self.potential,
            "p_norm": self.p_norm,
            "a": self.a,
            "mu1": self.mu1,
            "mu2": self.mu2,
            "sum_rule_residual": self.sum_rule_residual,
            "virial_residual": self.virial_residual,
            "orthonormality_defect": self.orthonormality_defect,
        }


def density(pair: OrbitalPair) -> ScalarField:
    """rho = u1^2 + u2^2.  Integrates to 2 within twice the pair defect."""
    v = pair.u1.values * pair.u1.values + pair.u2.values * pair.u2.values
    return ScalarField(pair.grid, v)


def energy(pair: OrbitalPair, a: float, V: ScalarField) -> Diagnostics:
    """Fill the energy decomposition E = T + W - a*P."""
    rho = density(pair)
    T = kinetic_energy(pair.u1) + kinetic_energy(pair.u2)
    W = integrate(ScalarField(rho.grid, V.values * rho.values))
    P = integrate(ScalarField(rho.grid, np.cbrt(rho.values) ** 5))
    return Diagnostics(
        energy=T + W - a * P,
        kinetic=T,
        potential=W,
        p_norm=P,
        a=a,
        orthonormality_defect=pair.defect(),
    )


def concentration_energies(
    pair: OrbitalPair,
    a: float,
    trap: TrapPotential,
    x0,
    taus,
) -> list[float]:
    """Energies of the exact concentration family built from ``pair``.

    The family v_i^tau(x) = tau^{3/2} u_i(tau (x - x0)) is orthonormal for
    every tau > 0, and both the kinetic term and the rho^{5/3} term scale
    exactly as tau^2, so

        E(tau) = tau^2 (T0 - a P0) + integral V(x0 + y/tau) rho0(y) dy,

    with T0, P0, rho0 taken from the supplied pair (its profile about the
    origin).  Only the trap term needs quadrature, and that integrand lives
    on the pair's own grid with the analytic potential sampled at contracted
    points — so narrow members of the family (large tau) cost no resolution.
    Above the threshold (a > T0/P0 achievable) the tau^2 term drives E to
    -infinity; below it, E grows without bound.
    """
    if isinstance(trap.prefactor, ScalarField):
        raise TrapError("concentration energies need a scalar trap prefactor")
    x0 = np.asarray(x0, dtype=float)
    grid = pair.grid
    rho = density(pair)
    T0 = kinetic_energy(pair.u1) + kinetic_energy(pair.u2)
    P0 = integrate(ScalarField(grid, np.cbrt(rho.values) ** 5))
    X, Y, Z = grid.meshgrid()
    out = []
    for tau in taus:
        t = float(tau)
        if t <= 0.0:
            raise ValueError(f"tau must be positive, got {tau}")
        px = x0[0] + X / t
        py = x0[1] + Y / t
        pz = x0[2] + Z / t
        V = np.full(grid.shape, float(trap.prefactor))
        for w in trap.wells:
            r2 = (
                (px - w.center[0]) ** 2
                + (py - w.center[1]) ** 2
                + (pz - w.center[2]) ** 2
            )
            V = V * r2 ** (w.power / 2.0)
        trap_term = integrate(ScalarField(grid, V * rho.values))
        out.append(float(t * t * (T0 - a * P0) + trap_term))
    return out


def hamiltonian_apply(
    rho: ScalarField, V: ScalarField, a: float, f: ScalarField
) -> ScalarField:
    """H f = -lap f + (V - (5a/3) rho^{2/3}) f, Dirichlet-masked.

    The multiplicative part acts on the boundary-masked field so the whole
    operator stays symmetric under the grid inner product.
    """
    out = laplacian_apply(f)
    w = V.values - FIVE_THIRDS * a * np.cbrt(rho.values) ** 2
    out.values += w * mask_boundary(f.values)
    return out


def multipliers(pair: OrbitalPair, V: ScalarField, a: float):
    """Sorted eigenvalues and eigenbasis of the 2x2 matrix <u_i, H u_j>.

    Returns ((mu1, mu2), R, (H u1, H u2)) where R is the 2x2 rotation whose
    columns express the multiplier eigenbasis in terms of (u1, u2).
    """
    rho = density(pair)
    hu1 = hamiltonian_apply(rho, V, a, pair.u1)
    hu2 = hamiltonian_apply(rho, V, a, pair.u2)
    M = np.array(
        [
            [inner(pair.u1, hu1), inner(pair.u1, hu2)],
            [inner(pair.u2, hu1), inner(pair.u2, hu2)],
        ]
    )
    M = 0.5 * (M + M.T)
    vals, R = np.linalg.eigh(M)
    return (float(vals[0]), float(vals[1])), R, (hu1, hu2)


def sum_rule_residual(diag: Diagnostics) -> float:
    """Relative defect of mu1 + mu2 = E - (2a/3) P."""
    if diag.mu1 is None or diag.mu2 is None:
        raise ValueError("multipliers not set on diagnostics")
    lhs = diag.mu1 + diag.mu2
    rhs = diag.energy - (2.0 * diag.a / 3.0) * diag.p_norm
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-300)


def virial_residual(diag: Diagnostics, trap: TrapPotential) -> float | None:
    """Relative defect of 2(T - aP) = p W for a single homogeneous well.

    Only meaningful for one well with a constant prefactor (the dilation
    x -> tau x about the well center is then an exact symmetry of the
    continuum problem); returns None otherwise.
    """
    if len(trap.wells) != 1 or isinstance(trap.prefactor, ScalarField):
        return None
    p = trap.wells[0].power
    lhs = 2.0 * (diag.kinetic - diag.a * diag.p_norm)
    rhs = p * diag.potential
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-300)


def lower_bound_gap(diag: Diagnostics, a: float, a_star: float) -> float:
    """E - (1 - a/a_star) T; nonnegative when a_star certifies the quotient."""
    return diag.energy - (1.0 - a / a_star) * diag.kinetic


def diagnose(
    pair: OrbitalPair,
    a: float,
    V: ScalarField,
    trap: TrapPotential | None = None,
) -> Diagnostics:
    """Full diagnostics: energy parts, multipliers, trace identity, virial."""
    diag = energy(pair, a, V)
    (mu1, mu2), _, _ = multipliers(pair, V, a)
    diag.mu1, diag.mu2 = mu1, mu2
    diag.sum_rule_residual = sum_rule_residual(diag)
    if trap is not None:
        diag.virial_residual = virial_residual(diag, trap)
    return diag
