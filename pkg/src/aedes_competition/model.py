"""Parameters, equilibria and stability of the two-species mosquito model.

Unknowns are the aquatic densities E1, E2 and the adult female densities
F1, F2.  Species interact only through larval competition ``c * E1 * E2``.
In the strong competition limit the aquatic phases are segregated and
``w = E1 - E2`` replaces the pair (E1, E2); :func:`w_of_F` gives the value of
``w`` at which its own equation is at rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import DegenerateParametersError, NumericalError

# eigenvalue real parts within this of zero are reported as marginal
STABILITY_TOL = 1e-9
DEGENERATE_RTOL = 1e-12

EQUILIBRIUM_NAMES = ("extinction", "single1", "single2", "coexistence")


@dataclass(frozen=True)
class SpeciesParams:
    """Biological rates of one species (per day, D in km^2/day)."""

    b: float
    mu: float
    nu: float
    delta: float
    D: float

    def __post_init__(self):
        for name in ("b", "mu", "nu", "delta", "D"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"SpeciesParams.{name} must be a positive finite number, got {v!r}")

    @property
    def decay_rate(self) -> float:
        """Spatial decay rate sqrt(delta / D) of adult profiles (1/km)."""
        return math.sqrt(self.delta / self.D)


@dataclass(frozen=True)
class SharedParams:
    rho: float = 0.49
    c: float = 40.0

    def __post_init__(self):
        if not (0 < self.rho <= 1):
            raise ValueError(f"rho must lie in (0, 1], got {self.rho!r}")
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError(f"c must be positive, got {self.c!r}")


@dataclass(frozen=True)
class Habitat:
    """Piecewise constant carrying capacities.

    ``kind == "constant"`` uses ``K1``/``K2`` everywhere.  ``kind ==
    "two_patch"`` uses the forest values (``K1F``, ``K2F``) on x < 0 and the
    urban values (``K1U``, ``K2U``) on x >= 0.
    """

    kind: str = "constant"
    K1: float = 2000.0
    K2: float = 500.0
    K1F: float = 2000.0
    K1U: float = 300.0
    K2F: float = 500.0
    K2U: float = 2200.0

    def __post_init__(self):
        if self.kind not in ("constant", "two_patch"):
            raise ValueError(f"unknown habitat kind {self.kind!r}")
        for name in self._used_fields():
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"Habitat.{name} must be positive and finite, got {v!r}")

    def _used_fields(self):
        if self.kind == "constant":
            return ("K1", "K2")
        return ("K1F", "K1U", "K2F", "K2U")

    @classmethod
    def constant(cls, K1: float, K2: float) -> "Habitat":
        return cls(kind="constant", K1=K1, K2=K2)

    @classmethod
    def two_patch(cls, K1F: float, K1U: float, K2F: float, K2U: float) -> "Habitat":
        return cls(kind="two_patch", K1F=K1F, K1U=K1U, K2F=K2F, K2U=K2U)

    def capacities(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """K1(x), K2(x); the node x = 0 belongs to the urban patch."""
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full_like(x, self.K1), np.full_like(x, self.K2)
        right = x >= 0
        return (np.where(right, self.K1U, self.K1F),
                np.where(right, self.K2U, self.K2F))

    def sup_capacities(self) -> Tuple[float, float]:
        if self.kind == "constant":
            return self.K1, self.K2
        return max(self.K1F, self.K1U), max(self.K2F, self.K2U)


# reference rates for the two species
SPECIES1 = SpeciesParams(b=10.0, mu=0.03, nu=0.05, delta=0.04, D=0.025)
SPECIES2 = SpeciesParams(b=8.0, mu=0.04, nu=0.05, delta=0.07, D=0.025)
SHARED = SharedParams(rho=0.49, c=40.0)


def basic_reproduction_number(sp: SpeciesParams, rho: float) -> float:
    return sp.b * rho * sp.nu / (sp.delta * (sp.mu + sp.nu))


def single_species_equilibrium(sp: SpeciesParams, rho: float, K: float) -> Tuple[float, float]:
    """Return ``(E*, F*)`` for one species alone at carrying capacity ``K``.

    Raises ValueError when the species is not viable (N <= 1).
    """
    if not K > 0:
        raise ValueError(f"carrying capacity must be positive, got {K!r}")
    n = basic_reproduction_number(sp, rho)
    if n <= 1:
        raise ValueError(f"species not viable: basic reproduction number {n:.6g} <= 1")
    E = K * (1.0 - 1.0 / n)
    F = rho * sp.nu / sp.delta * E
    return E, F


def _require_viable(sp1, sp2, rho):
    for i, sp in ((1, sp1), (2, sp2)):
        n = basic_reproduction_number(sp, rho)
        if n <= 1:
            raise ValueError(f"species {i} not viable: basic reproduction number {n:.6g} <= 1")


def competition_threshold(sp1: SpeciesParams, sp2: SpeciesParams, shared: SharedParams,
                          K1: float, K2: float) -> float:
    """Smallest competition rate above which the coexistence state is positive."""
    _require_viable(sp1, sp2, shared.rho)
    rho = shared.rho
    g1 = 1.0 - 1.0 / basic_reproduction_number(sp1, rho)
    g2 = 1.0 - 1.0 / basic_reproduction_number(sp2, rho)
    a = rho * sp2.nu * sp2.b / (sp2.delta * K1) * g2 / g1
    b = rho * sp1.nu * sp1.b / (sp1.delta * K2) * g1 / g2
    return max(a, b)


def coexistence_equilibrium(sp1: SpeciesParams, sp2: SpeciesParams, shared: SharedParams,
                            K1: float, K2: float) -> Optional[Tuple[float, float, float, float]]:
    """Interior equilibrium ``(E1, F1, E2, F2)``, or None if not strictly positive."""
    _require_viable(sp1, sp2, shared.rho)
    rho, c = shared.rho, shared.c
    g1 = 1.0 - 1.0 / basic_reproduction_number(sp1, rho)
    g2 = 1.0 - 1.0 / basic_reproduction_number(sp2, rho)
    cross = c * c * sp1.delta * sp2.delta * K1 * K2 / (rho**2 * sp1.nu * sp2.nu * sp1.b * sp2.b)
    denom = 1.0 - cross
    if abs(denom) <= DEGENERATE_RTOL * max(1.0, cross):
        raise DegenerateParametersError(
            "coexistence formulas degenerate: 1 - c^2 d1 d2 K1 K2 / (rho^2 nu1 nu2 b1 b2) ~ 0",
            diagnostics={"denominator": denom})
    num1 = g1 - c * sp1.delta / (rho * sp1.nu * sp1.b) * K2 * g2
    num2 = g2 - c * sp2.delta / (rho * sp2.nu * sp2.b) * K1 * g1
    F1 = rho * sp1.nu * K1 / sp1.delta * num1 / denom
    F2 = rho * sp2.nu * K2 / sp2.delta * num2 / denom
    if not (F1 > 0 and F2 > 0):
        return None
    E1 = sp1.delta / (rho * sp1.nu) * F1
    E2 = sp2.delta / (rho * sp2.nu) * F2
    return E1, F1, E2, F2


@dataclass(frozen=True)
class EquilibriumSet:
    n1: float
    n2: float
    extinction: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    single1: Optional[Tuple[float, float, float, float]] = None
    single2: Optional[Tuple[float, float, float, float]] = None
    coexistence: Optional[Tuple[float, float, float, float]] = None

    def items(self):
        for name in EQUILIBRIUM_NAMES:
            value = getattr(self, name)
            if value is not None:
                yield name, value


def equilibria(sp1: SpeciesParams, sp2: SpeciesParams, shared: SharedParams,
               K1: float, K2: float) -> EquilibriumSet:
    """All non-negative constant equilibria for constant capacities.

    Non-viable species get no single-species entry and no coexistence state
    is attempted.
    """
    rho = shared.rho
    n1 = basic_reproduction_number(sp1, rho)
    n2 = basic_reproduction_number(sp2, rho)
    single1 = single2 = coex = None
    if n1 > 1:
        E, F = single_species_equilibrium(sp1, rho, K1)
        single1 = (E, F, 0.0, 0.0)
    if n2 > 1:
        E, F = single_species_equilibrium(sp2, rho, K2)
        single2 = (0.0, 0.0, E, F)
    if n1 > 1 and n2 > 1:
        coex = coexistence_equilibrium(sp1, sp2, shared, K1, K2)
    return EquilibriumSet(n1=n1, n2=n2, single1=single1, single2=single2, coexistence=coex)


def ode_rhs(state, sp1: SpeciesParams, sp2: SpeciesParams, shared: SharedParams, K1, K2):
    """Reaction terms of the full system without diffusion."""
    E1, F1, E2, F2 = state
    rho, c = shared.rho, shared.c
    return np.array([
        sp1.b * F1 * (1 - E1 / K1) - c * E1 * E2 - (sp1.mu + sp1.nu) * E1,
        rho * sp1.nu * E1 - sp1.delta * F1,
        sp2.b * F2 * (1 - E2 / K2) - c * E1 * E2 - (sp2.mu + sp2.nu) * E2,
        rho * sp2.nu * E2 - sp2.delta * F2,
    ])


def jacobian(state, sp1: SpeciesParams, sp2: SpeciesParams, shared: SharedParams,
             K1: float, K2: float) -> np.ndarray:
    E1, F1, E2, F2 = state
    rho, c = shared.rho, shared.c
    return np.array([
        [-sp1.b * F1 / K1 - c * E2 - sp1.mu - sp1.nu, sp1.b * (1 - E1 / K1), -c * E1, 0.0],
        [rho * sp1.nu, -sp1.delta, 0.0, 0.0],
        [-c * E2, 0.0, -sp2.b * F2 / K2 - c * E1 - sp2.mu - sp2.nu, sp2.b * (1 - E2 / K2)],
        [0.0, 0.0, rho * sp2.nu, -sp2.delta],
    ])


@dataclass(frozen=True)
class StabilityReport:
    labels: dict = field(default_factory=dict)
    leading_real_part: dict = field(default_factory=dict)


def classify(leading: float, tol: float = STABILITY_TOL) -> str:
    if leading < -tol:
        return "LocallyAsymptoticallyStable"
    if leading > tol:
        return "Unstable"
    return "Marginal"


def equilibrium_stability(eq: EquilibriumSet, sp1: SpeciesParams, sp2: SpeciesParams,
                          shared: SharedParams, K1: float, K2: float,
                          tol: float = STABILITY_TOL) -> StabilityReport:
    """Label each equilibrium from the eigenvalues of the 4x4 Jacobian."""
    labels, leading = {}, {}
    for name, state in eq.items():
        J = jacobian(state, sp1, sp2, shared, K1, K2)
        try:
            ev = np.linalg.eigvals(J)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigenvalue solver failed at {name}", diagnostics=J) from exc
        if not np.all(np.isfinite(ev)):
            raise NumericalError(f"non-finite eigenvalues at {name}", diagnostics=J)
        lead = float(np.max(ev.real))
        leading[name] = lead
        labels[name] = classify(lead, tol)
    return StabilityReport(labels=labels, leading_real_part=leading)


def closed_form_single_stable(sp_res: SpeciesParams, sp_inv: SpeciesParams, rho: float,
                              c: float, E_res: float) -> bool:
    """Resident-only equilibrium is stable iff a rare invader cannot grow:
    delta_inv * (mu_inv + nu_inv + c * E_res) > rho * nu_inv * b_inv."""
    return sp_inv.delta * (sp_inv.mu + sp_inv.nu + c * E_res) > rho * sp_inv.nu * sp_inv.b


def w_of_F(F1, F2, K1, K2, sp1: SpeciesParams, sp2: SpeciesParams):
    """Rest value of the segregated aquatic variable ``w`` given adult densities."""
    F1 = np.asarray(F1, dtype=float)
    F2 = np.asarray(F2, dtype=float)
    diff = sp1.b * F1 - sp2.b * F2
    pos = np.maximum(diff, 0.0) / (sp1.b / K1 * F1 + sp1.mu + sp1.nu)
    neg = np.maximum(-diff, 0.0) / (sp2.b / K2 * F2 + sp2.mu + sp2.nu)
    out = pos - neg
    return float(out) if out.ndim == 0 else out
