"""Semi-implicit finite differences for the full and reduced systems in 1D.

Each step applies the reactions explicitly and then the adult diffusion
implicitly with zero-flux ends.  In the full model the stiff competition
term ``c * E1 * E2`` drops out of ``w = E1 - E2``, which is advanced
explicitly; the locally outnumbered species then takes its competition and
loss terms at the new level (a scalar quadratic per node) and the majority
species is recovered from ``w``.  Constant equilibria are fixed points,
densities stay non-negative for any ``c``, and as ``c -> inf`` the step
coincides with the reduced-model step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .errors import NumericalError
from .model import Habitat, SharedParams, SpeciesParams, single_species_equilibrium
from .numerics import diffusion_matrix

DEFAULT_DT = 0.01
FULL_FIELDS = ("E1", "F1", "E2", "F2")
REDUCED_FIELDS = ("w", "F1", "F2")


@dataclass(frozen=True)
class Grid1D:
    x_min: float = -50.0
    x_max: float = 50.0
    n_nodes: int = 2000

    def __post_init__(self):
        if self.n_nodes < 3:
            raise ValueError("need at least 3 nodes")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_nodes - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_nodes)

    def refined(self) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, 2 * self.n_nodes - 1)


@dataclass(frozen=True)
class FullState:
    E1: np.ndarray
    F1: np.ndarray
    E2: np.ndarray
    F2: np.ndarray
    time: float = 0.0

    fields = FULL_FIELDS


@dataclass(frozen=True)
class ReducedState:
    w: np.ndarray
    F1: np.ndarray
    F2: np.ndarray
    time: float = 0.0

    fields = REDUCED_FIELDS

    @classmethod
    def from_full(cls, state: FullState) -> "ReducedState":
        return cls(w=state.E1 - state.E2, F1=state.F1.copy(), F2=state.F2.copy(), time=state.time)


@dataclass(frozen=True)
class SimConfig:
    grid: Grid1D = field(default_factory=Grid1D)
    dt: float = DEFAULT_DT
    t_end: float = 2000.0
    output_stride: int = 1000
    boundary: str = "zero-flux"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be non-negative")
        if self.output_stride < 1:
            raise ValueError("output_stride must be >= 1")
        if self.boundary != "zero-flux":
            raise ValueError("only zero-flux boundaries are supported")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class Diagnostics:
    times: List[float] = field(default_factory=list)
    segregation: List[float] = field(default_factory=list)
    sup: Dict[str, List[float]] = field(default_factory=dict)
    front: List[float] = field(default_factory=list)
    invariant_violation: float = 0.0
    min_value: float = 0.0

    def arrays(self):
        return {"t": np.array(self.times), "segregation": np.array(self.segregation),
                "supF1": np.array(self.sup.get("F1", [])), "supF2": np.array(self.sup.get("F2", [])),
                "front": np.array(self.front)}


@dataclass(frozen=True)
class Trajectory:
    x: np.ndarray
    times: np.ndarray
    data: Dict[str, np.ndarray]  # field -> (n_snapshots, n_nodes)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[name]

    def window(self, start: int = 0, stop: Optional[int] = None) -> "Trajectory":
        sl = slice(start, stop)
        return Trajectory(self.x, self.times[sl], {k: v[sl] for k, v in self.data.items()})


@dataclass(frozen=True)
class SimResult:
    trajectory: Trajectory
    diagnostics: Diagnostics
    final: object
    model: str


def _capacity_arrays(habitat: Habitat, x):
    K1, K2 = habitat.capacities(x)
    return K1, K2


def stable_dt_bound(model: str, sp1: SpeciesParams, sp2: SpeciesParams, shared: SharedParams,
                    habitat: Habitat, sup_F=(0.0, 0.0)) -> float:
    """Largest time step for which the explicit reaction parts stay monotone.

    Competition is handled implicitly, so ``c`` does not enter.

    ``sup_F`` holds the initial sup norms of F1, F2; the a-priori bound
    max(sup F0, rho nu ||K|| / delta) caps adult densities for all time.
    """
    Ksup = habitat.sup_capacities()
    Kmin = habitat.capacities(np.array([-1.0, 1.0]))
    rates = []
    for i, sp in enumerate((sp1, sp2)):
        Fbound = max(sup_F[i], shared.rho * sp.nu * Ksup[i] / sp.delta)
        rates.append(sp.b * Fbound / float(np.min(Kmin[i])) + sp.mu + sp.nu)
        rates.append(sp.delta)
    return 0.9 / max(rates)


class FullStepper:
    """Advances the four-field model; matrices are factored once."""

    def __init__(self, sp1: SpeciesParams, sp2: SpeciesParams, shared: SharedParams,
                 habitat: Habitat, x: np.ndarray, dt: float):
        self.sp1, self.sp2, self.shared, self.dt = sp1, sp2, shared, dt
        dx = x[1] - x[0]
        self.K1, self.K2 = _capacity_arrays(habitat, x)
        self.A1 = diffusion_matrix(len(x), dx, dt * sp1.D)
        self.A2 = diffusion_matrix(len(x), dx, dt * sp2.D)

    def __call__(self, s: FullState) -> FullState:
        sp1, sp2, dt = self.sp1, self.sp2, self.dt
        rho = self.shared.rho
        birth1 = sp1.b * s.F1 * (1 - s.E1 / self.K1)
        birth2 = sp2.b * s.F2 * (1 - s.E2 / self.K2)
        # competition cancels in E1 - E2, so w needs only the remaining terms
        w = s.E1 - s.E2 + dt * (birth1 - (sp1.mu + sp1.nu) * s.E1 - birth2 + (sp2.mu + sp2.nu) * s.E2)
        first_wins = w >= 0
        L0 = np.where(first_wins, s.E2, s.E1)
        gain = np.where(first_wins, sp2.b * s.F2, sp1.b * s.F1)
        loss = np.where(first_wins, sp2.b * s.F2 / self.K2 + sp2.mu + sp2.nu,
                        sp1.b * s.F1 / self.K1 + sp1.mu + sp1.nu)
        L = minority_update(L0, gain, loss, np.abs(w), self.shared.c, dt)
        E1 = np.where(first_wins, L + w, L)
        E2 = np.where(first_wins, L, L - w)
        F1 = self.A1.solve(s.F1 + dt * (rho * sp1.nu * s.E1 - sp1.delta * s.F1))
        F2 = self.A2.solve(s.F2 + dt * (rho * sp2.nu * s.E2 - sp2.delta * s.F2))
        return FullState(E1, F1, E2, F2, s.time + dt)


def minority_update(L0, gain, loss, margin, c, dt):
    """New density of the locally outnumbered aquatic species.

    Solves L (1 + dt loss + c dt (L + margin)) = L0 + dt gain, i.e. loss and
    competition taken at the new level with the majority equal to
    ``L + margin``.  The positive root is evaluated in the cancellation-free
    form 2q / (b + sqrt(b^2 + 4 c dt q)).
    """
    q = L0 + dt * gain
    b = 1 + dt * loss + c * dt * margin
    return 2 * q / (b + np.sqrt(b * b + 4 * c * dt * q))


class ReducedStepper:
    """Advances (w, F1, F2); w explicitly with its positive/negative parts."""

    def __init__(self, sp1: SpeciesParams, sp2: SpeciesParams, shared: SharedParams,
                 habitat: Habitat, x: np.ndarray, dt: float):
        self.sp1, self.sp2, self.shared, self.dt = sp1, sp2, shared, dt
        dx = x[1] - x[0]
        self.K1, self.K2 = _capacity_arrays(habitat, x)
        self.A1 = diffusion_matrix(len(x), dx, dt * sp1.D)
        self.A2 = diffusion_matrix(len(x), dx, dt * sp2.D)

    def __call__(self, s: ReducedState) -> ReducedState:
        sp1, sp2, dt, rho = self.sp1, self.sp2, self.dt, self.shared.rho
        wp = np.maximum(s.w, 0.0)
        wm = np.maximum(-s.w, 0.0)
        rate = (sp1.b * s.F1 * (1 - wp / self.K1) - (sp1.mu + sp1.nu) * wp
                - sp2.b * s.F2 * (1 - wm / self.K2) + (sp2.mu + sp2.nu) * wm)
        w = s.w + dt * rate
        F1 = self.A1.solve(s.F1 + dt * (rho * sp1.nu * wp - sp1.delta * s.F1))
        F2 = self.A2.solve(s.F2 + dt * (rho * sp2.nu * wm - sp2.delta * s.F2))
        return ReducedState(w, F1, F2, s.time + dt)


def step_full(state: FullState, sp1, sp2, shared, habitat, x, dt) -> FullState:
    return FullStepper(sp1, sp2, shared, habitat, np.asarray(x, float), dt)(state)


def step_reduced(state: ReducedState, sp1, sp2, shared, habitat, x, dt) -> ReducedState:
    return ReducedStepper(sp1, sp2, shared, habitat, np.asarray(x, float), dt)(state)


def segregation_integral(state: FullState, x) -> float:
    """Trapezoid rule for the overlap of the two aquatic populations."""
    return float(trapezoid(state.E1 * state.E2, x))


def front_position(x, F1, level: float) -> float:
    """First crossing of ``level`` by F1 scanning from the left.

    With species 1 entering from the left this is the right edge of its
    range; with species 1 on the right it is the leftmost point above the
    level.  Linear interpolation between nodes; ``x[-1]`` if F1 is above
    the level everywhere and NaN if it is nowhere.
    """
    above = F1 > level
    change = np.flatnonzero(above[1:] != above[:-1])
    if not len(change):
        return float(x[-1]) if above[0] else math.nan
    j = change[0] + 1
    f0, f1 = F1[j - 1], F1[j]
    return float(x[j - 1] + (f0 - level) / (f0 - f1) * (x[j] - x[j - 1]))


def _invariant_violation(state, K1, K2) -> float:
    if isinstance(state, FullState):
        return float(max(0.0, np.max(state.E1 - K1), np.max(state.E2 - K2)))
    return float(max(0.0, np.max(state.w - K1), np.max(-K2 - state.w)))


def simulate(config: SimConfig, initial, sp1: SpeciesParams, sp2: SpeciesParams,
             shared: SharedParams, habitat: Habitat, model: Optional[str] = None,
             front_level: Optional[float] = None) -> SimResult:
    """Run to ``config.t_end`` storing every ``output_stride``-th state."""
    if model is None:
        model = "full" if isinstance(initial, FullState) else "reduced"
    if model == "full" and not isinstance(initial, FullState):
        raise TypeError("full model needs a FullState")
    if model == "reduced":
        if isinstance(initial, FullState):
            initial = ReducedState.from_full(initial)
        elif not isinstance(initial, ReducedState):
            raise TypeError("reduced model needs a ReducedState")
    x = config.grid.nodes
    for name in initial.fields:
        if getattr(initial, name).shape != x.shape:
            raise ValueError(f"initial field {name} does not match the grid")
    sup0 = (float(np.max(initial.F1)), float(np.max(initial.F2)))
    bound = stable_dt_bound(model, sp1, sp2, shared, habitat, sup0)
    if config.dt > bound:
        raise ValueError(f"dt={config.dt} exceeds the stability bound {bound:.4g}")
    stepper_cls = FullStepper if model == "full" else ReducedStepper
    step = stepper_cls(sp1, sp2, shared, habitat, x, config.dt)
    K1, K2 = step.K1, step.K2
    if front_level is None:
        front_level = 0.5 * single_species_equilibrium(sp1, shared.rho, float(K1[0]))[1] \
            if _viable(sp1, shared.rho) else math.inf

    diag = Diagnostics(sup={"F1": [], "F2": []})
    snaps: Dict[str, list] = {k: [] for k in initial.fields}
    times: list = []

    def record(s):
        times.append(s.time)
        for k in s.fields:
            snaps[k].append(getattr(s, k).copy())
        diag.times.append(s.time)
        diag.segregation.append(segregation_integral(s, x) if model == "full" else 0.0)
        diag.sup["F1"].append(float(np.max(s.F1)))
        diag.sup["F2"].append(float(np.max(s.F2)))
        diag.front.append(front_position(x, s.F1, front_level))

    def check(s, n):
        diag.invariant_violation = max(diag.invariant_violation, _invariant_violation(s, K1, K2))
        lo = min(float(np.min(getattr(s, k))) for k in s.fields if k != "w")
        diag.min_value = min(diag.min_value, lo)
        if not all(np.all(np.isfinite(getattr(s, k))) for k in s.fields):
            raise NumericalError(f"non-finite values at step {n}", diagnostics={"step": n, "time": s.time})

    state = replace(initial, time=0.0)
    check(state, 0)
    record(state)
    for n in range(1, config.n_steps + 1):
        state = step(state)
        check(state, n)
        if n % config.output_stride == 0 or n == config.n_steps:
            record(state)
    traj = Trajectory(x=x, times=np.array(times), data={k: np.array(v) for k, v in snaps.items()})
    return SimResult(trajectory=traj, diagnostics=diag, final=state, model=model)


def _viable(sp, rho):
    from .model import basic_reproduction_number
    return basic_reproduction_number(sp, rho) > 1


def indicator_state(x, blocks: Dict[str, Sequence], model: str = "full"):
    """Piecewise constant initial data.

    ``blocks`` maps field name to a list of ``(value, lo, hi)`` with the
    half-open indicator of [lo, hi); later blocks add to earlier ones.
    """
    x = np.asarray(x, dtype=float)
    names = FULL_FIELDS if model == "full" else REDUCED_FIELDS
    out = {}
    for name in names:
        arr = np.zeros_like(x)
        for value, lo, hi in blocks.get(name, ()):
            arr = arr + value * ((x >= lo) & (x < hi))
        out[name] = arr
    unknown = set(blocks) - set(names)
    if unknown:
        raise ValueError(f"unknown fields {sorted(unknown)} for model {model!r}")
    return FullState(**out) if model == "full" else ReducedState(**out)


def invasion_setup(x, species2_level: float = 150.0):
    """Species 1 on x < -15, species 2 on x > 15, both at their stated levels."""
    inf = math.inf
    return indicator_state(x, {
        "E1": [(1000.0, -inf, -15.0)], "F1": [(1000.0, -inf, -15.0)],
        "E2": [(species2_level, 15.0, inf)], "F2": [(species2_level, 15.0, inf)],
    })


def l1_distance_trace(a: Trajectory, b: Trajectory) -> np.ndarray:
    """Per-snapshot sum over (w, F1, F2) of the discrete L1 distance.

    A full-model trajectory is mapped to w = E1 - E2 first.
    """
    da, db = _as_reduced(a), _as_reduced(b)
    if da.x.shape != db.x.shape or not np.allclose(da.x, db.x) or len(da.times) != len(db.times):
        raise ValueError("trajectories live on different meshes")
    dx = da.x[1] - da.x[0]
    total = 0.0
    for k in REDUCED_FIELDS:
        total = total + np.abs(da[k] - db[k]).sum(axis=1) * dx
    return total


def _as_reduced(t: Trajectory) -> Trajectory:
    if "w" in t.data:
        return t
    return Trajectory(t.x, t.times, {"w": t["E1"] - t["E2"], "F1": t["F1"], "F2": t["F2"]})


@dataclass(frozen=True)
class ReductionRow:
    c: float
    distance: float
    max_segregation: float


def reduction_experiment(config: SimConfig, initial: FullState, sp1: SpeciesParams,
                         sp2: SpeciesParams, shared: SharedParams, habitat: Habitat,
                         c_values: Iterable[float]) -> List[ReductionRow]:
    """Distance between full runs at increasing ``c`` and the reduced run."""
    c_values = list(c_values)
    if len(c_values) < 2:
        raise ValueError("need at least two competition values")
    if np.any(initial.E1 * initial.E2 != 0):
        raise ValueError("initial aquatic densities must be segregated (E1 * E2 = 0)")
    reduced = simulate(config, ReducedState.from_full(initial), sp1, sp2, shared, habitat, "reduced")
    rows = []
    for c in c_values:
        full = simulate(config, initial, sp1, sp2, replace(shared, c=c), habitat, "full")
        dist = float(np.max(l1_distance_trace(full.trajectory, reduced.trajectory)))
        rows.append(ReductionRow(c=c, distance=dist,
                                 max_segregation=float(np.max(full.diagnostics.segregation))))
    return rows


def ordering_monitor(sub: Trajectory, sup: Trajectory) -> Dict[str, float]:
    """Largest breach of the competitive order sub <= sup.

    The order is increasing in w and F1 and decreasing in F2.
    """
    a, b = _as_reduced(sub), _as_reduced(sup)
    if a.x.shape != b.x.shape or not np.allclose(a.x, b.x):
        raise ValueError("trajectories live on different grids")
    if a.times.shape != b.times.shape:
        raise ValueError("trajectories have different numbers of snapshots")
    return {
        "w": float(np.max(np.maximum(a["w"] - b["w"], 0.0))),
        "F1": float(np.max(np.maximum(a["F1"] - b["F1"], 0.0))),
        "F2": float(np.max(np.maximum(b["F2"] - a["F2"], 0.0))),
    }
