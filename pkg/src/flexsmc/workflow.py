"""Build models, controller and observer from a :class:`ProjectConfig`."""

from __future__ import annotations

import numpy as np

from .config import OUTPUT_NAMES, ProjectConfig
from .modal import ModalData, modal_analysis
from .observer import ObserverSpec, synthesize
from .plant import PlantModel, build_plant
from .simulate import SimConfig, SimResult, SlidingModeController, simulate
from .smc import SlidingSpec


def output_permutation(order) -> np.ndarray:
    """P with ``y_ordered = P @ y`` where ``y = [theta_c, theta_t]``."""
    return np.array([[1.0 if name == ref else 0.0 for ref in OUTPUT_NAMES] for name in order])


def modal_data(cfg: ProjectConfig, n: int) -> ModalData:
    return modal_analysis(cfg.beam, n, cfg.modes.normalization)


def plants(cfg: ProjectConfig):
    """(design plant, simulated plant)."""
    full = modal_data(cfg, cfg.modes.n_plant)
    return build_plant(full.truncated(cfg.modes.n_design)), build_plant(full)


def sliding_spec(cfg: ProjectConfig, design: PlantModel) -> SlidingSpec:
    c = cfg.controller
    return SlidingSpec.for_plant(c.Gamma, c.k1, c.k2, design, c.boundary_layer)


def observer_gains(cfg: ProjectConfig):
    """N and L with L acting on the canonical output vector."""
    P = output_permutation(cfg.observer.output_order)
    return np.array(cfg.observer.N, dtype=float), np.array(cfg.observer.L, dtype=float) @ P


def synthesize_observer(cfg: ProjectConfig, design: PlantModel, spec: SlidingSpec) -> ObserverSpec:
    N, L = observer_gains(cfg)
    return synthesize(design, spec, N, L, realization=cfg.observer.realization)


def sim_config(cfg: ProjectConfig, **overrides) -> SimConfig:
    s = cfg.simulation
    kw = dict(
        dt=s.dt, t_final=s.t_final, x0=cfg.initial_state(), eta0=s.eta0,
        n_plant=cfg.modes.n_plant, scenario=s.scenario, mode=s.mode,
        band_sigma=s.band_sigma, boundary_layer=cfg.controller.boundary_layer,
        theta_ref=s.theta_ref, settle_band=s.settle_band,
    )
    kw.update(overrides)
    return SimConfig(**kw)


def run(cfg: ProjectConfig, **overrides) -> SimResult:
    """Design on the ``n_design`` model and simulate the ``n_plant`` model."""
    design, plant = plants(cfg)
    spec = sliding_spec(cfg, design)
    sc = sim_config(cfg, **overrides)
    observer = synthesize_observer(cfg, design, spec) if sc.mode == "observer_fed" else None
    return simulate(plant, SlidingModeController(spec, design), observer, sc)
