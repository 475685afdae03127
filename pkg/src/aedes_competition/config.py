"""Scenario files: flat ``key = value`` text with dotted section names.

Example::

    # species 1
    species1.b = 10
    species1.mu = 0.03
    ...
    habitat.kind = constant
    habitat.K1 = 2000
    initial.recipe = blocks
    initial.E1 = 1000@-inf:-15

Species, shared and habitat keys are required; grid, time and initial keys
fall back to the defaults below.  Block values are ``value@lo:hi`` items
separated by ``;`` and denote ``value`` on [lo, hi).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import ConfigError
from .model import SHARED, SPECIES1, SPECIES2, Habitat, SharedParams, SpeciesParams
from .simulator import FULL_FIELDS, FullState, Grid1D, ReducedState, SimConfig, indicator_state

SPECIES_KEYS = ("b", "mu", "nu", "delta", "D")
HABITAT_KEYS = {"constant": ("K1", "K2"), "two_patch": ("K1F", "K1U", "K2F", "K2U")}
RECIPES = ("blocks", "stationary")

Block = Tuple[float, float, float]


@dataclass(frozen=True)
class InitialRecipe:
    """How to build initial data on the simulation grid.

    ``blocks`` holds indicator blocks per full-model field.  The
    ``stationary`` recipe translates a half-space front by ``x0``; it needs a
    constant habitat and uses ``invader`` as the entering species.
    """

    kind: str = "blocks"
    blocks: Dict[str, Tuple[Block, ...]] = field(default_factory=lambda: {
        "E1": ((1000.0, -math.inf, -15.0),), "F1": ((1000.0, -math.inf, -15.0),),
        "E2": ((150.0, 15.0, math.inf),), "F2": ((150.0, 15.0, math.inf),),
    })
    x0: float = 0.0
    invader: int = 1


@dataclass(frozen=True)
class Scenario:
    species1: SpeciesParams = SPECIES1
    species2: SpeciesParams = SPECIES2
    shared: SharedParams = SHARED
    habitat: Habitat = field(default_factory=Habitat)
    sim: SimConfig = field(default_factory=SimConfig)
    initial: InitialRecipe = field(default_factory=InitialRecipe)

    def digest(self, n: int = 10) -> str:
        return hashlib.sha256(dumps(self).encode()).hexdigest()[:n]


def default_scenario() -> Scenario:
    return Scenario()


def two_patch_scenario() -> Scenario:
    """Forest/urban landscape with species 2 introduced at 700 on x > 15."""
    blocks = dict(InitialRecipe().blocks)
    blocks["E2"] = blocks["F2"] = ((700.0, 15.0, math.inf),)
    return Scenario(habitat=Habitat.two_patch(2000.0, 300.0, 500.0, 2200.0),
                    initial=InitialRecipe(blocks=blocks))


# ---------------------------------------------------------------- writing

def _num(v: float) -> str:
    # repr round-trips floats exactly
    return repr(float(v))


def _blocks_text(blocks) -> str:
    return ";".join(f"{_num(v)}@{_num(lo)}:{_num(hi)}" for v, lo, hi in blocks)


def dumps(sc: Scenario) -> str:
    lines = []
    for i, sp in ((1, sc.species1), (2, sc.species2)):
        lines += [f"species{i}.{k} = {_num(getattr(sp, k))}" for k in SPECIES_KEYS]
    lines += [f"shared.rho = {_num(sc.shared.rho)}", f"shared.c = {_num(sc.shared.c)}"]
    lines.append(f"habitat.kind = {sc.habitat.kind}")
    lines += [f"habitat.{k} = {_num(getattr(sc.habitat, k))}" for k in HABITAT_KEYS[sc.habitat.kind]]
    g = sc.sim.grid
    lines += [f"grid.x_min = {_num(g.x_min)}", f"grid.x_max = {_num(g.x_max)}",
              f"grid.n_nodes = {g.n_nodes}"]
    lines += [f"time.dt = {_num(sc.sim.dt)}", f"time.t_end = {_num(sc.sim.t_end)}",
              f"time.output_stride = {sc.sim.output_stride}"]
    ini = sc.initial
    lines.append(f"initial.recipe = {ini.kind}")
    if ini.kind == "blocks":
        lines += [f"initial.{k} = {_blocks_text(ini.blocks[k])}" for k in FULL_FIELDS if ini.blocks.get(k)]
    else:
        lines += [f"initial.x0 = {_num(ini.x0)}", f"initial.invader = {ini.invader}"]
    return "\n".join(lines) + "\n"


def save(sc: Scenario, path) -> Path:
    path = Path(path)
    path.write_text(dumps(sc))
    return path


# ---------------------------------------------------------------- reading

def _parse_lines(text: str, source: str) -> Dict[str, Tuple[str, int]]:
    entries: Dict[str, Tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or "." not in key:
            raise ConfigError(f"{source}:{lineno}: key {key!r} must look like 'section.name'")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first on line {entries[key][1]})")
        entries[key] = (value, lineno)
    return entries


class _Reader:
    def __init__(self, entries, source):
        self.entries, self.source, self.used = entries, source, set()

    def _where(self, key):
        return f"{self.source}:{self.entries[key][1]}"

    def has(self, key):
        return key in self.entries

    def raw(self, key, default=None, required=False):
        if key not in self.entries:
            if required:
                raise ConfigError(f"{self.source}: missing required key {key!r}")
            return default
        self.used.add(key)
        return self.entries[key][0]

    def number(self, key, default=None, required=False, kind=float):
        text = self.raw(key, None, required)
        if text is None:
            return default
        try:
            return kind(text)
        except ValueError:
            raise ConfigError(f"{self._where(key)}: {key} = {text!r} is not a valid {kind.__name__}") from None

    def build(self, keys, factory):
        try:
            return factory()
        except ValueError as exc:
            where = next((self._where(k) for k in keys if k in self.entries), self.source)
            raise ConfigError(f"{where}: {exc}") from None

    def blocks(self, key) -> Tuple[Block, ...]:
        text = self.raw(key)
        out = []
        for item in filter(None, (s.strip() for s in text.split(";"))):
            try:
                value, interval = item.split("@")
                lo, hi = interval.split(":")
                out.append((float(value), float(lo), float(hi)))
            except ValueError:
                raise ConfigError(f"{self._where(key)}: block {item!r} is not 'value@lo:hi'") from None
        return tuple(out)

    def leftover(self):
        extra = sorted(set(self.entries) - self.used, key=lambda k: self.entries[k][1])
        if extra:
            raise ConfigError(f"{self._where(extra[0])}: unknown key {extra[0]!r}")


def loads(text: str, source: str = "<config>") -> Scenario:
    """Parse scenario text; every error names the file, line and key."""
    r = _Reader(_parse_lines(text, source), source)

    species = []
    for i in (1, 2):
        keys = [f"species{i}.{k}" for k in SPECIES_KEYS]
        vals = {k: r.number(f"species{i}.{k}", required=True) for k in SPECIES_KEYS}
        species.append(r.build(keys, lambda: SpeciesParams(**vals)))
    shared_vals = {k: r.number(f"shared.{k}", required=True) for k in ("rho", "c")}
    shared = r.build(["shared.rho", "shared.c"], lambda: SharedParams(**shared_vals))

    kind = r.raw("habitat.kind", required=True)
    if kind not in HABITAT_KEYS:
        raise ConfigError(f"{r._where('habitat.kind')}: habitat.kind must be one of "
                          f"{sorted(HABITAT_KEYS)}, got {kind!r}")
    hkeys = [f"habitat.{k}" for k in HABITAT_KEYS[kind]]
    hvals = {k: r.number(f"habitat.{k}", required=True) for k in HABITAT_KEYS[kind]}
    habitat = r.build(hkeys, lambda: Habitat(kind=kind, **hvals))

    g0, t0 = Grid1D(), SimConfig()
    grid = r.build(["grid.x_min", "grid.x_max", "grid.n_nodes"], lambda: Grid1D(
        r.number("grid.x_min", g0.x_min), r.number("grid.x_max", g0.x_max),
        r.number("grid.n_nodes", g0.n_nodes, kind=int)))
    sim = r.build(["time.dt", "time.t_end", "time.output_stride"], lambda: SimConfig(
        grid=grid, dt=r.number("time.dt", t0.dt), t_end=r.number("time.t_end", t0.t_end),
        output_stride=r.number("time.output_stride", t0.output_stride, kind=int)))

    recipe = r.raw("initial.recipe", "blocks")
    if recipe not in RECIPES:
        raise ConfigError(f"{r._where('initial.recipe')}: initial.recipe must be one of {RECIPES}, got {recipe!r}")
    if recipe == "blocks":
        given = [k for k in FULL_FIELDS if r.has(f"initial.{k}")]
        blocks = {k: r.blocks(f"initial.{k}") for k in given} if given else InitialRecipe().blocks
        for k in given:
            for _, lo, hi in blocks[k]:
                if not lo < hi:
                    raise ConfigError(f"{r._where(f'initial.{k}')}: empty interval [{lo}, {hi})")
                for end in (lo, hi):
                    if math.isfinite(end) and not grid.x_min <= end <= grid.x_max:
                        raise ConfigError(f"{r._where(f'initial.{k}')}: endpoint {end} outside the domain "
                                          f"[{grid.x_min}, {grid.x_max}]")
        initial = InitialRecipe(kind="blocks", blocks=blocks)
    else:
        invader = r.number("initial.invader", 1, kind=int)
        if invader not in (1, 2):
            raise ConfigError(f"{r._where('initial.invader')}: initial.invader must be 1 or 2")
        if habitat.kind != "constant":
            raise ConfigError(f"{r._where('initial.recipe')}: the stationary recipe needs a constant habitat")
        initial = InitialRecipe(kind="stationary", blocks={}, x0=r.number("initial.x0", 0.0), invader=invader)
    r.leftover()
    return Scenario(species1=species[0], species2=species[1], shared=shared, habitat=habitat,
                    sim=sim, initial=initial)


def load(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text, str(path))


# ---------------------------------------------------------------- initial data

def initial_state(sc: Scenario, model: str = "full"):
    """Initial state on the scenario grid for the requested model."""
    x = sc.sim.grid.nodes
    ini = sc.initial
    if ini.kind == "blocks":
        state = indicator_state(x, {k: list(v) for k, v in ini.blocks.items()}, "full")
        return state if model == "full" else ReducedState.from_full(state)
    from .criterion import homogeneous_spec
    from .profiles import default_xmax, half_space_stationary, homogeneous_initial_data
    spec = homogeneous_spec(sc.species1, sc.species2, sc.shared, sc.habitat.K1, sc.habitat.K2, ini.invader)
    dx = sc.sim.grid.dx
    # half-space grid on the simulation nodes so no interpolation is needed
    n = int(math.ceil(default_xmax(spec) / dx))
    hs = half_space_stationary(spec, np.arange(n + 1) * dx)
    w, F1, F2 = homogeneous_initial_data(hs, ini.x0, x)
    if model == "reduced":
        return ReducedState(w=w, F1=F1, F2=F2)
    return FullState(E1=np.maximum(w, 0.0), F1=F1, E2=np.maximum(-w, 0.0), F2=F2)


def with_competition(sc: Scenario, c: float) -> Scenario:
    return replace(sc, shared=replace(sc.shared, c=c))
