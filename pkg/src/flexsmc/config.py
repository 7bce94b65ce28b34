"""Project configuration: TOML file with sections, validated on load.

Every key is optional; missing keys take the bundled fixture values.  See
``configs/fixture.toml`` in the repository for the full layout.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import tomli
import tomli_w

from . import fixtures
from .errors import ConfigSemantic, ConfigSyntax
from .modal import NORMALIZATIONS, BeamParams
from .simulate import MODES, SCENARIOS

OUTPUT_NAMES = ("theta_c", "theta_t")


@dataclass(frozen=True)
class ModesSection:
    n_design: int = 2
    n_plant: int = 5
    normalization: str = "tabulated"


@dataclass(frozen=True)
class ControllerSection:
    Gamma: tuple = fixtures.GAMMA
    k1: float = fixtures.K1
    k2: float = fixtures.K2
    boundary_layer: Optional[float] = None


@dataclass(frozen=True)
class ObserverSection:
    v: int = 2
    N: tuple = fixtures.OBSERVER_N
    L: tuple = fixtures.OBSERVER_L
    output_order: tuple = fixtures.OBSERVER_OUTPUT_ORDER
    realization: str = "least_squares"


@dataclass(frozen=True)
class SimulationSection:
    dt: float = 1e-4
    t_final: float = 10.0
    scenario: str = "regulation"
    mode: str = "observer_fed"
    theta_ref: float = fixtures.THETA_REGULATION
    x0: Optional[tuple] = None
    eta0: Optional[tuple] = None
    band_sigma: float = 1e-3
    settle_band: float = 0.02


@dataclass(frozen=True)
class OutputSection:
    directory: str = "out"
    emit_plot_data: bool = True


@dataclass(frozen=True)
class ProjectConfig:
    beam: BeamParams = field(default_factory=lambda: BeamParams(**fixtures.BEAM))
    modes: ModesSection = ModesSection()
    controller: ControllerSection = ControllerSection()
    observer: ObserverSection = ObserverSection()
    simulation: SimulationSection = SimulationSection()
    output: OutputSection = OutputSection()

    def initial_state(self) -> tuple:
        """x0 for the simulated plant; defaults to the fixture state, truncated or zero-padded."""
        if self.simulation.x0 is not None:
            return self.simulation.x0
        n = self.modes.n_plant
        if n <= 5:
            return tuple(fixtures.truncate_state(fixtures.X0_FIVE_MODE, 5, n))
        x = list(fixtures.X0_FIVE_MODE)
        pos, vel = x[:6] + [0.0] * (n - 5), x[6:] + [0.0] * (n - 5)
        return tuple(pos + vel)


SECTIONS = {
    "beam": BeamParams,
    "modes": ModesSection,
    "controller": ControllerSection,
    "observer": ObserverSection,
    "simulation": SimulationSection,
    "output": OutputSection,
}


def _number(name, value, *, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigSemantic(name, f"expected a number, got {value!r}")
    if integer:
        if int(value) != value:
            raise ConfigSemantic(name, f"expected an integer, got {value!r}")
        return int(value)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigSemantic(name, "must be finite")
    return value


def _vector(name, value):
    if not isinstance(value, (list, tuple)):
        raise ConfigSemantic(name, "expected a list of numbers")
    return tuple(_number(f"{name}[{i}]", v) for i, v in enumerate(value))


def _matrix(name, value):
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigSemantic(name, "expected a list of rows")
    rows = tuple(_vector(f"{name}[{i}]", r) for i, r in enumerate(value))
    if len({len(r) for r in rows}) != 1:
        raise ConfigSemantic(name, "rows have different lengths")
    return rows


def _coerce(section: str, key: str, value, default):
    name = f"{section}.{key}"
    if section == "observer" and key in ("N", "L"):
        return _matrix(name, value)
    if key in ("Gamma", "x0", "eta0"):
        return _vector(name, value)
    if key == "output_order":
        if not isinstance(value, (list, tuple)) or sorted(value) != sorted(OUTPUT_NAMES):
            raise ConfigSemantic(name, f"must be a permutation of {list(OUTPUT_NAMES)}")
        return tuple(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigSemantic(name, "expected true or false")
        return value
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigSemantic(name, "expected a string")
        return value
    if isinstance(default, int):
        return _number(name, value, integer=True)
    return _number(name, value)


def _validate(cfg: ProjectConfig) -> None:
    m, c, o, s = cfg.modes, cfg.controller, cfg.observer, cfg.simulation
    if m.n_design < 1:
        raise ConfigSemantic("modes.n_design", "must be >= 1")
    if m.n_plant < m.n_design:
        raise ConfigSemantic("modes.n_plant", "must be >= modes.n_design")
    if m.normalization not in NORMALIZATIONS:
        raise ConfigSemantic("modes.normalization", f"must be one of {list(NORMALIZATIONS)}")
    if m.normalization == "tabulated":
        if cfg.beam != BeamParams(**fixtures.BEAM):
            raise ConfigSemantic(
                "modes.normalization",
                "'tabulated' only applies to the bundled beam; use 'mean_square' for other parameters",
            )
        if m.n_plant > len(fixtures.PHI_L):
            raise ConfigSemantic("modes.n_plant", f"'tabulated' covers at most {len(fixtures.PHI_L)} modes")
    if len(c.Gamma) != 2 * m.n_design + 2:
        raise ConfigSemantic("controller.Gamma", f"needs {2 * m.n_design + 2} entries for n_design={m.n_design}")
    if not c.k1 > 0:
        raise ConfigSemantic("controller.k1", "must be > 0")
    if not c.k2 >= 0:
        raise ConfigSemantic("controller.k2", "must be >= 0")
    if c.boundary_layer is not None and not c.boundary_layer > 0:
        raise ConfigSemantic("controller.boundary_layer", "must be > 0 (omit the key to disable)")
    if o.v < 1:
        raise ConfigSemantic("observer.v", "must be >= 1")
    if len(o.N) != o.v or len(o.N[0]) != o.v:
        raise ConfigSemantic("observer.N", f"must be {o.v}x{o.v}")
    if len(o.L) != o.v or len(o.L[0]) != 2:
        raise ConfigSemantic("observer.L", f"must be {o.v}x2")
    if o.realization not in ("exact", "least_squares"):
        raise ConfigSemantic("observer.realization", "must be 'exact' or 'least_squares'")
    if not s.dt > 0:
        raise ConfigSemantic("simulation.dt", "must be > 0")
    if not s.t_final >= s.dt:
        raise ConfigSemantic("simulation.t_final", "must be >= dt")
    if s.scenario not in SCENARIOS:
        raise ConfigSemantic("simulation.scenario", f"must be one of {list(SCENARIOS)}")
    if s.mode not in MODES:
        raise ConfigSemantic("simulation.mode", f"must be one of {list(MODES)}")
    if s.x0 is not None and len(s.x0) != 2 * m.n_plant + 2:
        raise ConfigSemantic("simulation.x0", f"needs {2 * m.n_plant + 2} entries for n_plant={m.n_plant}")
    if s.eta0 is not None and len(s.eta0) != o.v:
        raise ConfigSemantic("simulation.eta0", f"needs {o.v} entries")
    for key in ("band_sigma", "settle_band"):
        if not getattr(s, key) > 0:
            raise ConfigSemantic(f"simulation.{key}", "must be > 0")


def from_dict(data: dict) -> ProjectConfig:
    """Build and validate a config from parsed TOML data."""
    kwargs = {}
    for section, payload in data.items():
        if section not in SECTIONS:
            raise ConfigSemantic(section, f"unknown section (expected one of {sorted(SECTIONS)})")
        if not isinstance(payload, dict):
            raise ConfigSemantic(section, "expected a table")
        cls = SECTIONS[section]
        defaults = ProjectConfig().__getattribute__(section)
        known = {f.name for f in fields(cls)}
        values = {}
        for key, value in payload.items():
            if key not in known:
                raise ConfigSemantic(f"{section}.{key}", "unknown key")
            values[key] = _coerce(section, key, value, getattr(defaults, key))
        merged = {f.name: getattr(defaults, f.name) for f in fields(cls)}
        merged.update(values)
        try:
            kwargs[section] = cls(**merged)
        except ValueError as exc:
            field_name = str(exc).split(" ", 1)[0]
            raise ConfigSemantic(f"{section}.{field_name}", str(exc)) from None
    cfg = ProjectConfig(**kwargs)
    _validate(cfg)
    return cfg


def loads(text: str) -> ProjectConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigSyntax(str(exc)) from None
    return from_dict(data)


def load_config(path) -> ProjectConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigSyntax(f"cannot read {path}: {exc}") from None
    return loads(text)


def to_dict(cfg: ProjectConfig) -> dict:
    out = {}
    for section in SECTIONS:
        d = asdict(getattr(cfg, section))
        out[section] = {
            k: ([list(r) for r in v] if k in ("N", "L") else list(v) if isinstance(v, tuple) else v)
            for k, v in d.items()
            if v is not None
        }
    return out


def dumps(cfg: ProjectConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))


def with_override(cfg: ProjectConfig, dotted: str, value) -> ProjectConfig:
    """Copy of ``cfg`` with ``section.key`` replaced, re-validated."""
    try:
        section, key = dotted.split(".")
    except ValueError:
        raise ConfigSemantic(dotted, "parameter must be written as section.key") from None
    data = to_dict(cfg)
    if section not in data:
        raise ConfigSemantic(dotted, "unknown section")
    data[section][key] = value
    return from_dict(data)
