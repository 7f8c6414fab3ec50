"""Pulse generator, emission falloff, repellence and habituation models."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, SingularDistanceError
from .field_model import FieldSpec, PestSpecies


@dataclass(frozen=True)
class OscillatorConfig:
    r1_ohm: float = 10_000.0
    r2_ohm: float = 33_000.0
    capacitance_f: float = 470e-12

    def __post_init__(self):
        for name in ("r1_ohm", "r2_ohm", "capacitance_f"):
            if not getattr(self, name) > 0:
                raise ConfigError("must be positive", f"oscillator.{name}")


@dataclass(frozen=True)
class EmitterSpec:
    acoustic_power_w: float = 1.0
    frequency_hz: float = 40_000.0
    rf_enabled: bool = True
    effective_range_m: float = 15.0

    def __post_init__(self):
        for name in ("acoustic_power_w", "frequency_hz", "effective_range_m"):
            if not getattr(self, name) > 0:
                raise ConfigError("must be positive", f"emitter.{name}")


def oscillator_frequency(cfg: OscillatorConfig) -> float:
    """Astable pulse-generator output frequency in Hz."""
    for name in ("r1_ohm", "r2_ohm", "capacitance_f"):
        if not getattr(cfg, name) > 0:
            raise ConfigError("must be positive", f"oscillator.{name}")
    return 1.44 / ((cfg.r1_ohm + 2.0 * cfg.r2_ohm) * cfg.capacitance_f)


def intensity_at(em: EmitterSpec, distance_m: float) -> float:
    """Free-field intensity (W/m^2) with a hard cutoff at the effective range."""
    if distance_m <= 0:
        raise SingularDistanceError(f"distance must be positive, got {distance_m}")
    if distance_m > em.effective_range_m:
        return 0.0
    return em.acoustic_power_w / (4.0 * math.pi * distance_m * distance_m)


def repellence_probability(sp: PestSpecies, intensity: float, freq: float,
                           habituation: float, rf_on: bool, dt_s: float,
                           k: float, i_ref: float) -> float:
    """Probability that one pest is removed during a step of length ``dt_s``.

    RF keeps habituated pests fully responsive when the species reacts to it.
    """
    if intensity < 0:
        raise ValueError("intensity must be >= 0")
    if not 0 <= habituation <= 1:
        raise ValueError("habituation must lie in [0, 1]")
    if not sp.in_band(freq) or intensity == 0 or dt_s <= 0:
        return 0.0
    g = 1.0 if (rf_on and sp.rf_susceptible) else 1.0 - habituation
    rate = k * sp.base_susceptibility * min(intensity / i_ref, 1.0) * g
    return -math.expm1(-rate * dt_s)


def habituation_gain(sp: PestSpecies, rf_on: bool, habituation):
    """Multiplier applied to the hazard for a given habituation level (scalar or array)."""
    if rf_on and sp.rf_susceptible:
        return np.ones_like(np.asarray(habituation, dtype=float))
    return 1.0 - np.asarray(habituation, dtype=float)


def habituate(h: float, exposed_days: float, sp: PestSpecies) -> float:
    """Linear habituation; saturates at 1 after ``sp.habituation_days`` exposed days."""
    if not 0 <= h <= 1:
        raise ValueError("habituation must lie in [0, 1]")
    if exposed_days < 0:
        raise ValueError("exposed_days must be >= 0")
    return min(1.0, h + exposed_days / sp.habituation_days)


class ExposureField:
    """Accumulated dose grid (W*s/m^2), aligned to the FieldSpec cells."""

    def __init__(self, field: FieldSpec):
        self.field = field
        self.dose = np.zeros((field.ny, field.nx))

    @property
    def min_distance(self) -> float:
        # callers clamp to one cell radius so the agent's own cell stays finite
        return self.field.cell_size_m / 2.0

    def accumulate(self, agent_xy, em: EmitterSpec, dt_s: float) -> "ExposureField":
        x, y = agent_xy
        if not self.field.contains(x, y):
            raise ValueError(f"agent ({x}, {y}) outside the field")
        if dt_s == 0:
            return self
        track = np.array([[[x, y]]], dtype=float)
        self.accumulate_track(track, np.ones((1, 1), dtype=np.uint8), em, dt_s)
        return self

    def accumulate_track(self, agent_xy: np.ndarray, emitting: np.ndarray,
                         em: EmitterSpec, dt_s: float) -> None:
        """Add the dose from a whole trajectory: ``agent_xy`` is (steps, agents, 2)."""
        _kernels.accumulate_exposure(
            self.dose, self.field.cell_size_m,
            np.ascontiguousarray(agent_xy, dtype=np.float64),
            np.ascontiguousarray(emitting, dtype=np.uint8),
            em.acoustic_power_w, em.effective_range_m, self.min_distance, dt_s)


def accumulate_exposure(ef: ExposureField, agent_xy, em: EmitterSpec, dt_s: float) -> ExposureField:
    return ef.accumulate(agent_xy, em, dt_s)
