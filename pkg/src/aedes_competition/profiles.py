"""Stationary fronts of the reduced system on half-lines and on two patches.

All half-line objects are written in the frame of a :class:`GammaSpec`: the
invader rises from 0 at the origin to its equilibrium at +inf while the
resident decays from its equilibrium to 0.  Callers map back to species 1/2
through ``spec.invader_index`` and reflect x -> -x when the invader sits on
the left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .criterion import GammaSpec, gamma_analysis, patch_spec, tabulate_deficit
from .errors import ConstructionFailedError, CriterionFailedError, NonConvergenceError
from .model import Habitat, SharedParams, SpeciesParams, single_species_equilibrium, w_of_F
from .numerics import diffusion_matrix, second_difference

MAX_SWEEPS = 100_000


@dataclass(frozen=True)
class Profile:
    """Samples of a function on a uniform grid starting at 0."""

    grid: np.ndarray
    values: np.ndarray
    left_value: float
    right_limit: float

    def __post_init__(self):
        if len(self.grid) != len(self.values):
            raise ValueError("grid and values differ in length")
        if len(self.grid) > 1 and np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile values must be finite")

    def __call__(self, s):
        """Evaluate at s >= 0; beyond the grid the declared limit is used."""
        return np.interp(s, self.grid, self.values, left=self.left_value, right=self.right_limit)

    def slope_at_start(self) -> float:
        g, v = self.grid, self.values
        h = g[1] - g[0]
        return (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)


@dataclass(frozen=True)
class HalfSpaceSolution:
    spec: GammaSpec
    f1: Profile  # invader
    f2: Profile  # resident
    residual_norm: float
    sweeps: int
    # closed-form sandwich, sampled on the same grid
    f1_lower: np.ndarray = field(repr=False, default=None)
    f1_upper: np.ndarray = field(repr=False, default=None)
    f2_lower: np.ndarray = field(repr=False, default=None)
    f2_upper: np.ndarray = field(repr=False, default=None)
    history: Tuple[float, ...] = field(repr=False, default=())


@dataclass(frozen=True)
class BridgeResult:
    alpha: float
    profile: Profile


def default_xmax(spec: GammaSpec) -> float:
    ell = max(math.sqrt(spec.invader.D / spec.invader.delta),
              math.sqrt(spec.resident.D / spec.resident.delta))
    return max(30.0, 20.0 * ell)


def default_grid(spec: GammaSpec, dx: float = 0.005, x_max: Optional[float] = None) -> np.ndarray:
    x_max = default_xmax(spec) if x_max is None else x_max
    n = int(round(x_max / dx)) + 1
    return np.linspace(0.0, x_max, n)


def closed_form_bounds(spec: GammaSpec, x):
    """Closed-form (invader upper, resident lower, resident upper) profiles."""
    x = np.asarray(x, dtype=float)
    a1, a2 = spec.invader.decay_rate, spec.resident.decay_rate
    F1, F2, L = spec.F_inv_star, spec.F_res_star, spec.L_tilde
    f1_over = F1 * -np.expm1(-a1 * x)
    f2_under = F2 * np.exp(-a2 * x)
    inner = F2 * (1.0 - np.exp(-a2 * L) * np.sinh(a2 * np.minimum(x, L)))
    outer = F2 * spec.cosh_factor * np.exp(-a2 * x)
    f2_over = np.where(x < L, inner, outer)
    return f1_over, f2_under, f2_over


def sub_solution_profile(spec: GammaSpec, grid=None, analysis=None) -> Profile:
    """Non-decreasing invader sub-solution from the first-order energy ODE.

    U' = sqrt(2/D (max Gamma - Gamma(U))), U(0) = 0.  Once the remaining
    energy drops below 1e-14 * max Gamma the square root is replaced by its
    linearisation at argmax, so U approaches argmax exponentially with a
    continuous slope.
    """
    analysis = gamma_analysis(spec) if analysis is None else analysis
    if not analysis.invasion:
        raise CriterionFailedError(
            f"Gamma(F*) = {analysis.value_at_Fstar:.6g} <= 0: no sub-solution")
    grid = default_grid(spec) if grid is None else np.asarray(grid, dtype=float)
    top = analysis.argmax
    deficit = tabulate_deficit(spec, top)
    D = spec.invader.D
    floor = 1e-14 * analysis.max_value

    def rhs(_, u):
        gap = float(deficit(min(u[0], top)))
        return [math.sqrt(2.0 / D * gap) if gap > floor else 0.0]

    def settled(_, u):
        return float(deficit(min(u[0], top))) - floor

    settled.terminal = True
    settled.direction = -1
    sol = solve_ivp(rhs, (grid[0], grid[-1]), [0.0], method="DOP853", dense_output=True,
                    events=settled, rtol=1e-12, atol=1e-12 * spec.F_inv_star,
                    max_step=(grid[-1] - grid[0]) / 1000)
    values = np.empty_like(grid)
    x_s, u_s = sol.t[-1], sol.y[0, -1]
    inside = grid <= x_s
    values[inside] = sol.sol(grid[inside])[0]
    if top > u_s:
        rate = math.sqrt(2.0 / D * max(float(deficit(u_s)), floor)) / (top - u_s)
        values[~inside] = top - (top - u_s) * np.exp(-rate * (grid[~inside] - x_s))
    else:
        values[~inside] = top
    values = np.clip(np.maximum.accumulate(values), 0.0, top)
    return Profile(grid=grid, values=values, left_value=0.0, right_limit=top)


def _sources(spec: GammaSpec, f1, f2):
    inv, res, rho = spec.invader, spec.resident, spec.rho
    d = inv.b * f1 - res.b * f2
    s1 = rho * inv.nu * np.maximum(d, 0.0) / (inv.b / spec.K_inv * f1 + inv.mu + inv.nu)
    s2 = rho * res.nu * np.maximum(-d, 0.0) / (res.b / spec.K_res * f2 + res.mu + res.nu)
    return s1, s2


def stationary_residual(spec: GammaSpec, grid, f1, f2) -> float:
    """Max over interior nodes of the centred stationary-equation residual."""
    dx = grid[1] - grid[0]
    s1, s2 = _sources(spec, f1, f2)
    r1 = -spec.invader.D * second_difference(f1, dx) - (s1[1:-1] - spec.invader.delta * f1[1:-1])
    r2 = -spec.resident.D * second_difference(f2, dx) - (s2[1:-1] - spec.resident.delta * f2[1:-1])
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def half_space_stationary(spec: GammaSpec, grid=None, tol: float = 1e-9,
                          max_sweeps: int = MAX_SWEEPS) -> HalfSpaceSolution:
    """Monotone iteration between the closed-form super pair and the true front.

    Each sweep solves ``(-D d2/dx2 + delta) F_new = source(F_old)`` with
    Dirichlet data (0, F_res*) at the origin and (F_inv*, 0) at the far end,
    invader first and then the resident using the fresh invader.  The source
    plus ``delta * F`` is non-decreasing in the species' own density and
    non-increasing in the competitor's, so starting from the super pair the
    invader iterates decrease and the resident iterates increase.
    """
    analysis = gamma_analysis(spec)
    if not analysis.invasion:
        raise CriterionFailedError(
            f"Gamma(F*) = {analysis.value_at_Fstar:.6g} <= 0: half-space front not guaranteed")
    grid = default_grid(spec) if grid is None else np.asarray(grid, dtype=float)
    if grid[0] != 0.0:
        raise ValueError("half-space grid must start at 0")
    dx = grid[1] - grid[0]
    n = len(grid)
    F1s, F2s = spec.F_inv_star, spec.F_res_star
    A1 = diffusion_matrix(n - 2, dx, spec.invader.D, spec.invader.delta, boundary="dirichlet")
    A2 = diffusion_matrix(n - 2, dx, spec.resident.D, spec.resident.delta, boundary="dirichlet")
    r1, r2 = spec.invader.D / dx**2, spec.resident.D / dx**2

    f1_upper, f2_lower, f2_upper = closed_form_bounds(spec, grid)
    f1_lower = sub_solution_profile(spec, grid, analysis).values
    f1, f2 = f1_upper.copy(), f2_lower.copy()
    f1[-1], f2[-1] = F1s, 0.0
    history = []
    for sweep in range(1, max_sweeps + 1):
        s1, _ = _sources(spec, f1, f2)
        rhs = s1[1:-1].copy()
        rhs[-1] += r1 * F1s
        new1 = np.concatenate([[0.0], A1.solve(rhs), [F1s]])
        _, s2 = _sources(spec, new1, f2)
        rhs = s2[1:-1].copy()
        rhs[0] += r2 * F2s
        new2 = np.concatenate([[F2s], A2.solve(rhs), [0.0]])
        change = max(np.max(np.abs(new1 - f1)), np.max(np.abs(new2 - f2)))
        f1, f2 = new1, new2
        history.append(change)
        if change < tol:
            break
    else:
        raise NonConvergenceError(f"monotone iteration did not converge in {max_sweeps} sweeps",
                                  diagnostics=history[-50:])
    residual = stationary_residual(spec, grid, f1, f2)
    return HalfSpaceSolution(
        spec=spec,
        f1=Profile(grid, f1, left_value=0.0, right_limit=F1s),
        f2=Profile(grid, f2, left_value=F2s, right_limit=0.0),
        residual_norm=residual, sweeps=sweep,
        f1_lower=f1_lower, f1_upper=f1_upper, f2_lower=f2_lower, f2_upper=f2_upper,
        history=tuple(history))


def bridge_profile(sp: SpeciesParams, rho: float, K: float, start_value: float,
                   end_value: float, end_slope: float, step: float = 1e-3,
                   max_length: float = 1e3) -> BridgeResult:
    """Single-species stationary arc from ``start_value`` at 0 down to
    ``end_value`` at ``alpha`` with prescribed slope there.

    Shoots backward from the end point.  Above the equilibrium the arc is
    convex, so going backward it keeps rising until it meets
    ``start_value``.  The mirrored (increasing) bridge is obtained by the
    caller through x -> -x.
    """
    if not (start_value >= end_value > 0):
        raise ValueError("bridge needs start_value >= end_value > 0")
    if start_value == end_value:
        return BridgeResult(alpha=0.0, profile=Profile(np.array([0.0]), np.array([start_value]),
                                                       start_value, end_value))
    if end_slope > 0:
        raise ValueError("end_slope must be <= 0 for a non-increasing bridge")
    gain = rho * sp.nu * sp.b

    def rhs(_, z):
        u, v = z
        force = gain * u / (sp.b / K * u + sp.mu + sp.nu) - sp.delta * u
        return [v, -force / sp.D]

    def reached(_, z):
        return z[0] - start_value

    reached.terminal = True
    reached.direction = 1
    sol = solve_ivp(rhs, (0.0, max_length), [end_value, -end_slope], method="DOP853",
                    events=reached, dense_output=True, rtol=1e-11,
                    atol=1e-12 * start_value, max_step=1.0)
    if sol.status != 1 or not len(sol.t_events[0]):
        raise ConstructionFailedError(
            f"bridge from {end_value:.6g} never reaches {start_value:.6g} within {max_length} km",
            diagnostics={"end_slope": end_slope, "last": sol.y[:, -1]})
    alpha = float(sol.t_events[0][0])
    n = max(3, int(math.ceil(alpha / step)) + 1)
    x = np.linspace(0.0, alpha, n)
    values = sol.sol(alpha - x)[0]
    values[0], values[-1] = start_value, end_value
    values = np.minimum.accumulate(values)
    return BridgeResult(alpha=alpha, profile=Profile(x, values, start_value, end_value))


@dataclass(frozen=True)
class HeterogeneousProfiles:
    """The four glued profiles on a common grid plus their building blocks."""

    x: np.ndarray
    F1_F: np.ndarray  # sub, non-increasing, zero on x > 0
    F2_U: np.ndarray  # sub, non-decreasing, zero on x < 0
    F1_U: np.ndarray  # super, non-increasing
    F2_F: np.ndarray  # super, non-decreasing
    alpha_U: float
    alpha_F: float
    forest: HalfSpaceSolution
    urban: HalfSpaceSolution
    limits: dict


def _glue(sp1, sp2, rho, habitat, hs_F, hs_U, bridge_step):
    F1F = single_species_equilibrium(sp1, rho, habitat.K1F)[1]
    F1U = single_species_equilibrium(sp1, rho, habitat.K1U)[1]
    F2F = single_species_equilibrium(sp2, rho, habitat.K2F)[1]
    F2U = single_species_equilibrium(sp2, rho, habitat.K2U)[1]
    # forest front: invader = species 1 living on x < 0, reflected
    bb_F1_F = lambda x: hs_F.f1(-x)  # noqa: E731
    bb_F2_F = lambda x: hs_F.f2(-x)  # noqa: E731
    # urban front: invader = species 2 on x > 0
    bb_F1_U = hs_U.f2
    bb_F2_U = hs_U.f1

    alpha_U, bridge_U = 0.0, None
    if F1F > F1U:
        br = bridge_profile(sp1, rho, habitat.K1U, F1F, F1U, hs_U.f2.slope_at_start(), step=bridge_step)
        alpha_U, bridge_U = br.alpha, br.profile
    alpha_F, bridge_F = 0.0, None
    if F2F < F2U:
        br = bridge_profile(sp2, rho, habitat.K2F, F2U, F2F, hs_F.f2.slope_at_start(), step=bridge_step)
        alpha_F, bridge_F = -br.alpha, br.profile

    def F1_U(x):
        x = np.asarray(x, dtype=float)
        if bridge_U is None:
            return np.where(x < 0, F1U, bb_F1_U(np.maximum(x, 0)))
        return np.where(x < 0, F1F,
                        np.where(x <= alpha_U, bridge_U(np.clip(x, 0, alpha_U)),
                                 bb_F1_U(np.maximum(x - alpha_U, 0))))

    def F2_U(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < alpha_U, 0.0, bb_F2_U(np.maximum(x - alpha_U, 0)))

    def F1_F(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < alpha_F, bb_F1_F(np.minimum(x - alpha_F, 0)), 0.0)

    def F2_F(x):
        x = np.asarray(x, dtype=float)
        if bridge_F is None:
            return np.where(x < 0, bb_F2_F(np.minimum(x, 0)), F2F)
        return np.where(x < alpha_F, bb_F2_F(np.minimum(x - alpha_F, 0)),
                        np.where(x <= 0, bridge_F(np.clip(-x, 0, -alpha_F)), F2U))

    limits = {
        "F1_F(-inf)": F1F, "F1_U(-inf)": max(F1F, F1U), "F1_U(+inf)": 0.0,
        "F2_U(+inf)": F2U, "F2_F(+inf)": max(F2F, F2U), "F2_F(-inf)": 0.0,
    }
    return F1_F, F2_U, F1_U, F2_F, alpha_U, alpha_F, limits


def assemble_heterogeneous(sp1: SpeciesParams, sp2: SpeciesParams, shared: SharedParams,
                           habitat: Habitat, x=None, dx: float = 0.005,
                           tol: float = 1e-9) -> HeterogeneousProfiles:
    """Glue half-space fronts, constants and bridges into the two-patch
    sub pair (F1_F, F2_U) and super pair (F1_U, F2_F)."""
    spec_F = patch_spec(sp1, sp2, shared, habitat, "F")
    spec_U = patch_spec(sp1, sp2, shared, habitat, "U")
    for name, spec in (("forest, species 1", spec_F), ("urban, species 2", spec_U)):
        res = gamma_analysis(spec)
        if not res.invasion:
            raise CriterionFailedError(f"criterion fails in {name}: Gamma(F*) = {res.value_at_Fstar:.6g}")
    hs_F = half_space_stationary(spec_F, default_grid(spec_F, dx), tol=tol)
    hs_U = half_space_stationary(spec_U, default_grid(spec_U, dx), tol=tol)
    F1_F, F2_U, F1_U, F2_F, aU, aF, limits = _glue(sp1, sp2, shared.rho, habitat, hs_F, hs_U, dx)
    if x is None:
        reach = max(hs_F.f1.grid[-1], hs_U.f1.grid[-1]) + max(aU, -aF)
        x = np.arange(-reach, reach + dx / 2, dx)
    x = np.asarray(x, dtype=float)
    return HeterogeneousProfiles(x=x, F1_F=F1_F(x), F2_U=F2_U(x), F1_U=F1_U(x), F2_F=F2_F(x),
                                 alpha_U=aU, alpha_F=aF, forest=hs_F, urban=hs_U, limits=limits)


def default_shifts(profiles: HeterogeneousProfiles, max_steps: int = 100_000) -> Tuple[float, float]:
    """Smallest common grid-step multiples x0F = x0U > 0 giving the ordering
    F1_F(.+x0F) <= F1_U(.-x0U) and F2_U(.-x0U) <= F2_F(.+x0F) on the grid."""
    x = profiles.x
    dx = x[1] - x[0]
    for k in range(1, max_steps):
        s = k * dx
        a = np.interp(x + s, x, profiles.F1_F) <= np.interp(x - s, x, profiles.F1_U) + 1e-12
        b = np.interp(x - s, x, profiles.F2_U) <= np.interp(x + s, x, profiles.F2_F) + 1e-12
        if a.all() and b.all():
            return s, s
    raise ConstructionFailedError("no ordering shift found")


def homogeneous_initial_data(half_space: HalfSpaceSolution, x0: float, x):
    """Whole-line data built from a half-space front, translated by ``x0``.

    Left of ``x0`` the invader is absent and the resident sits at its
    equilibrium; ``w`` is the rest value of the aquatic equation.  Returns
    ``(w0, F1_0, F2_0)`` in species order.
    """
    spec = half_space.spec
    s = np.asarray(x, dtype=float) - x0
    inv = np.where(s < 0, 0.0, half_space.f1(np.maximum(s, 0.0)))
    res = np.where(s < 0, spec.F_res_star, half_space.f2(np.maximum(s, 0.0)))
    if spec.invader_index == 1:
        F1, F2, sp1, sp2, K1, K2 = inv, res, spec.invader, spec.resident, spec.K_inv, spec.K_res
    else:
        F1, F2, sp1, sp2, K1, K2 = res, inv, spec.resident, spec.invader, spec.K_res, spec.K_inv
    w = w_of_F(F1, F2, K1, K2, sp1, sp2)
    return np.asarray(w, dtype=float), F1, F2
