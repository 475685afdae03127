"""Explicit invasion criterion for one species entering a resident's range.

The invader's adult density is bounded above by an exponential rise to its
equilibrium while the resident is squeezed between a pure exponential decay
and a two-branch profile glued at the crossing point ``L_tilde``.  Writing the
invader's reaction against the upper resident profile as a function of the
invader density gives an integrand whose primitive ``Gamma`` acts as a
potential: if ``Gamma(F*) > 0`` the invader wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import minimize_scalar

from .errors import NumericalError
from .model import Habitat, SharedParams, SpeciesParams, single_species_equilibrium
from .numerics import bracket_root, root_in

QUAD_EPSREL = 1e-9
QUAD_EPSABS = 1e-12


@dataclass(frozen=True)
class GammaSpec:
    invader: SpeciesParams
    resident: SpeciesParams
    K_inv: float
    K_res: float
    rho: float
    F_inv_star: float
    F_res_star: float
    zeta: float
    L_tilde: float
    cosh_factor: float
    invader_index: int = 1

    @property
    def resident_index(self) -> int:
        return 3 - self.invader_index


@dataclass(frozen=True)
class GammaResult:
    value_at_Fstar: float
    argmax: float
    max_value: float
    chi0: float
    invasion: bool
    # zeros of Gamma' above chi0, ascending
    critical_points: Tuple[float, ...] = ()


def interface_point(invader: SpeciesParams, resident: SpeciesParams,
                    F_inv_star: float, F_res_star: float) -> float:
    """Crossing of ``b_inv F_inv*(1 - e^{-a_inv x})`` and ``b_res F_res* e^{-a_res x}``."""
    if not (F_inv_star > 0 and F_res_star > 0):
        raise ValueError("equilibrium densities must be positive")
    a_inv, a_res = invader.decay_rate, resident.decay_rate
    p, q = invader.b * F_inv_star, resident.b * F_res_star

    def g(x):
        return p * -math.expm1(-a_inv * x) - q * math.exp(-a_res * x)

    return bracket_root(g, 1e-8, 1.0, rtol=1e-13)


def make_gamma_spec(invader: SpeciesParams, resident: SpeciesParams, K_inv: float,
                    K_res: float, rho: float, invader_index: int = 1) -> GammaSpec:
    _, F_inv = single_species_equilibrium(invader, rho, K_inv)
    _, F_res = single_species_equilibrium(resident, rho, K_res)
    L = interface_point(invader, resident, F_inv, F_res)
    zeta = math.sqrt(resident.delta * invader.D / (invader.delta * resident.D))
    return GammaSpec(invader=invader, resident=resident, K_inv=K_inv, K_res=K_res, rho=rho,
                     F_inv_star=F_inv, F_res_star=F_res, zeta=zeta, L_tilde=L,
                     cosh_factor=math.cosh(resident.decay_rate * L),
                     invader_index=invader_index)


def homogeneous_spec(sp1: SpeciesParams, sp2: SpeciesParams, shared: SharedParams,
                     K1: float, K2: float, invader: int = 1) -> GammaSpec:
    if invader == 1:
        return make_gamma_spec(sp1, sp2, K1, K2, shared.rho, invader_index=1)
    if invader == 2:
        return make_gamma_spec(sp2, sp1, K2, K1, shared.rho, invader_index=2)
    raise ValueError(f"invader must be 1 or 2, got {invader!r}")


def patch_spec(sp1: SpeciesParams, sp2: SpeciesParams, shared: SharedParams,
               habitat: Habitat, patch: str, invader: Optional[int] = None) -> GammaSpec:
    """Criterion inputs for one patch of a two-patch habitat.

    By default species 1 is the invader in the forest patch ("F") and
    species 2 in the urban patch ("U").
    """
    if habitat.kind != "two_patch":
        raise ValueError("patch criteria need a two_patch habitat")
    if patch == "F":
        K1, K2 = habitat.K1F, habitat.K2F
        invader = 1 if invader is None else invader
    elif patch == "U":
        K1, K2 = habitat.K1U, habitat.K2U
        invader = 2 if invader is None else invader
    else:
        raise ValueError(f"patch must be 'F' or 'U', got {patch!r}")
    return homogeneous_spec(sp1, sp2, shared, K1, K2, invader)


def _power_remaining(spec: GammaSpec, y, exponent: float):
    """(1 - y/F*)^exponent, exactly 0 at and beyond F*."""
    y = np.asarray(y, dtype=float)
    t = np.clip(y / spec.F_inv_star, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        out = np.exp(exponent * np.log1p(-t))
    return np.where(t >= 1.0, 0.0, out)


def _resident_pressure(spec: GammaSpec, y):
    return spec.resident.b * spec.F_res_star * spec.cosh_factor * _power_remaining(spec, y, spec.zeta)


def gamma_integrand(spec: GammaSpec, y):
    inv = spec.invader
    y = np.asarray(y, dtype=float)
    gain = spec.rho * inv.nu / (inv.b / spec.K_inv * y + inv.mu + inv.nu)
    return gain * np.maximum(inv.b * y - _resident_pressure(spec, y), 0.0) - inv.delta * y


def chi0(spec: GammaSpec) -> float:
    """Density at which the positive part in the integrand switches on."""
    F = spec.F_inv_star

    def h(y):
        return spec.invader.b * y - float(_resident_pressure(spec, y))

    return root_in(h, 0.0, F)


def _bracket_factor(spec: GammaSpec, y):
    """Sign-carrying factor of Gamma' above chi0 (after removing F* - y > 0)."""
    inv, F = spec.invader, spec.F_inv_star
    C = spec.rho * inv.nu * spec.resident.b * spec.F_res_star * spec.cosh_factor / F**spec.zeta
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        return inv.delta * inv.b / spec.K_inv * y - C * np.power(F - y, spec.zeta - 1.0)


def gamma_derivative(spec: GammaSpec, y, x0: Optional[float] = None):
    """Gamma'(y) from the factorised closed form.

    Below ``chi0`` the positive part is inactive and Gamma' = -delta * y.
    Above it Gamma' = (F* - y) / (b y / K + mu + nu) * bracket(y), which uses
    the equilibrium identity rho nu b = delta (b F*/K + mu + nu).
    """
    inv, F = spec.invader, spec.F_inv_star
    x0 = chi0(spec) if x0 is None else x0
    y = np.asarray(y, dtype=float)
    above = (F - y) / (inv.b / spec.K_inv * y + inv.mu + inv.nu) * _bracket_factor(spec, np.minimum(y, F))
    above = np.where(y >= F, 0.0, above)
    out = np.where(y <= x0, -inv.delta * y, above)
    return float(out) if out.ndim == 0 else out


def gamma(spec: GammaSpec, chi: float, x0: Optional[float] = None) -> float:
    """Gamma(chi) by adaptive quadrature, split at the kink chi0."""
    F = spec.F_inv_star
    if not (0.0 <= chi <= F * (1 + 1e-14)):
        raise ValueError(f"chi={chi!r} outside [0, F*={F!r}]")
    chi = min(chi, F)
    if chi == 0.0:
        return 0.0
    x0 = chi0(spec) if x0 is None else x0
    f = lambda y: float(gamma_integrand(spec, y))  # noqa: E731
    pieces = [(0.0, min(chi, x0))]
    if chi > x0:
        pieces.append((x0, chi))
    total = 0.0
    for a, b in pieces:
        val, _ = quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=500)
        total += val
    return total


def gamma_analysis(spec: GammaSpec) -> GammaResult:
    """chi0, critical points and argmax of Gamma on [0, F*], plus the verdict."""
    F, zeta = spec.F_inv_star, spec.zeta
    x0 = chi0(spec)
    value = gamma(spec, F, x0)
    h = lambda y: float(_bracket_factor(spec, y))  # noqa: E731
    crit: Tuple[float, ...] = ()
    if zeta >= 1.0:
        # bracket factor is non-decreasing: one zero at most, Gamma has a
        # single minimum there and its max on [0, F*] is at an endpoint
        if h(x0) < 0 < h(F):
            crit = (root_in(h, x0, F),)
        candidates = [(0.0, 0.0), (F, value)]
    else:
        # bracket factor is concave and tends to -inf at F*
        res = minimize_scalar(lambda y: -h(y), bounds=(x0, F), method="bounded",
                              options={"xatol": 1e-12 * F})
        ym = float(res.x)
        candidates = [(0.0, 0.0), (F, value)]
        if h(ym) > 0:
            hi = 0.5 * (ym + F)
            for _ in range(200):
                if h(hi) < 0:
                    break
                hi = 0.5 * (hi + F)
            y1 = root_in(h, x0, ym) if h(x0) < 0 else x0
            ubar = root_in(h, ym, hi)
            crit = (y1, ubar)
            # Gamma(F*) as Gamma(ubar) plus the (decreasing) tail keeps the
            # two values consistent when ubar sits next to F*
            top = gamma(spec, ubar, x0)
            tail, _ = quad(lambda y: float(gamma_integrand(spec, y)), ubar, F,
                           epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=500)
            value = top + tail
            candidates = [(0.0, 0.0), (ubar, top)]
    argmax, max_value = max(candidates, key=lambda c: c[1])
    if not np.isfinite(value):
        raise NumericalError("Gamma(F*) is not finite", diagnostics=spec)
    return GammaResult(value_at_Fstar=value, argmax=argmax, max_value=max_value, chi0=x0,
                       invasion=value > 0, critical_points=crit)


def _panels(spec: GammaSpec, upper: float, n_panels: int, order: int):
    """Nodes on [0, upper] split at chi0 (clustered toward ``upper``) and the
    Gauss-Legendre integral of the integrand over each panel."""
    x0 = min(chi0(spec), upper)
    n_lo = max(2, int(round(n_panels * x0 / upper)))
    n_hi = max(2, n_panels - n_lo)
    # cluster nodes toward the top, where (F* - y)^(zeta - 1) may be singular
    s = np.linspace(0.0, 1.0, n_hi + 1)
    top = x0 + (upper - x0) * (1 - (1 - s) ** 2)
    nodes = np.concatenate([np.linspace(0.0, x0, n_lo + 1), top[1:]])
    nodes = nodes[np.concatenate([[True], np.diff(nodes) > 0])]
    gx, gw = np.polynomial.legendre.leggauss(order)
    a, b = nodes[:-1], nodes[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * gx[None, :]
    return nodes, (gamma_integrand(spec, pts) * gw[None, :]).sum(axis=1) * half


def tabulate_gamma(spec: GammaSpec, n_panels: int = 2000, order: int = 10) -> CubicHermiteSpline:
    """Piecewise cubic Hermite interpolant of Gamma on [0, F*].

    Panels are split at chi0 so the integrand is smooth on each; panel
    integrals use fixed-order Gauss-Legendre.  The closed-form Gamma' gives
    the node slopes, so the interpolant is C^1 like Gamma itself.
    """
    nodes, panel = _panels(spec, spec.F_inv_star, n_panels, order)
    values = np.concatenate([[0.0], np.cumsum(panel)])
    return CubicHermiteSpline(nodes, values, gamma_integrand(spec, nodes))


def tabulate_deficit(spec: GammaSpec, top: float, n_panels: int = 2000,
                     order: int = 10) -> CubicHermiteSpline:
    """Interpolant of Gamma(top) - Gamma(y) on [0, top].

    Accumulated from ``top`` downward so that the small values near ``top``
    keep their relative accuracy.
    """
    nodes, panel = _panels(spec, top, n_panels, order)
    values = np.concatenate([np.cumsum(panel[::-1])[::-1], [0.0]])
    return CubicHermiteSpline(nodes, values, -gamma_integrand(spec, nodes))
