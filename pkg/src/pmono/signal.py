"""Discretized periodic trajectories on a uniform grid.

A signal is one period of a real trajectory: ``samples`` values spaced
``dt`` seconds apart on [0, T), T = samples * dt.  The inner product uses
the left-endpoint quadrature rule, which is the discretization consistent
with the periodic backward difference used by the circuit elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, DimensionError

__all__ = [
    "Grid",
    "PeriodicSignal",
    "SignalBundle",
    "Sine",
    "Constant",
    "Tabulated",
    "make_waveform",
    "inner_product",
    "signal_norm",
    "backward_difference",
    "difference_matrix",
    "difference_spectrum",
]


def _freeze(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Grid:
    """Uniform sampling of one period: ``samples`` points, ``dt`` seconds apart."""

    samples: int
    dt: float

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 2:
            raise ConfigurationError(f"grid needs an integer sample count >= 2, got {self.samples}")
        object.__setattr__(self, "samples", int(self.samples))
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(f"grid spacing must be positive and finite, got {self.dt}")
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def period(self) -> float:
        return self.samples * self.dt

    @property
    def times(self) -> np.ndarray:
        return _freeze(np.arange(self.samples) * self.dt)


@dataclass(frozen=True)
class PeriodicSignal:
    """One period of a real-valued trajectory sampled on ``grid``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        arr = _freeze(self.values)
        if arr.ndim != 1 or arr.shape[0] != self.grid.samples:
            raise DimensionError(
                f"signal needs {self.grid.samples} samples, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("signal values must be finite")
        object.__setattr__(self, "values", arr)

    def __add__(self, other: "PeriodicSignal") -> "PeriodicSignal":
        _check_same_grid(self, other)
        return PeriodicSignal(self.grid, self.values + other.values)

    def __sub__(self, other: "PeriodicSignal") -> "PeriodicSignal":
        _check_same_grid(self, other)
        return PeriodicSignal(self.grid, self.values - other.values)

    def __mul__(self, scale: float) -> "PeriodicSignal":
        return PeriodicSignal(self.grid, self.values * float(scale))

    __rmul__ = __mul__

    def __neg__(self) -> "PeriodicSignal":
        return PeriodicSignal(self.grid, -self.values)


@dataclass(frozen=True)
class SignalBundle:
    """Ordered channels sharing one grid, stored as a (channels, samples) array."""

    grid: Grid
    values: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        arr = _freeze(np.atleast_2d(self.values))
        if arr.ndim != 2 or arr.shape[1] != self.grid.samples:
            raise DimensionError(
                f"bundle needs shape (channels, {self.grid.samples}), got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("bundle values must be finite")
        labels = tuple(self.labels) if self.labels else tuple(f"ch{i}" for i in range(arr.shape[0]))
        if len(labels) != arr.shape[0]:
            raise DimensionError(f"{arr.shape[0]} channels but {len(labels)} labels")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_signals(
        cls, signals: Sequence[PeriodicSignal], labels: Iterable[str] = ()
    ) -> "SignalBundle":
        if not signals:
            raise DimensionError("cannot build a bundle from zero signals without a grid")
        grid = signals[0].grid
        for s in signals[1:]:
            _check_same_grid(signals[0], s)
        return cls(grid, np.stack([s.values for s in signals]), tuple(labels))

    @classmethod
    def empty(cls, grid: Grid) -> "SignalBundle":
        return cls(grid, np.zeros((0, grid.samples)), ())

    @classmethod
    def concat(cls, first: "SignalBundle", second: "SignalBundle") -> "SignalBundle":
        if first.grid != second.grid:
            raise DimensionError("bundles live on different grids")
        return cls(
            first.grid,
            np.vstack([first.values, second.values]),
            first.labels + second.labels,
        )

    @property
    def channel_count(self) -> int:
        return self.values.shape[0]

    def channel(self, index: int) -> PeriodicSignal:
        return PeriodicSignal(self.grid, self.values[index])

    @property
    def channels(self) -> tuple[PeriodicSignal, ...]:
        return tuple(self.channel(k) for k in range(self.channel_count))

    def __add__(self, other: "SignalBundle") -> "SignalBundle":
        if self.grid != other.grid or self.values.shape != other.values.shape:
            raise DimensionError("bundle shapes or grids differ")
        return SignalBundle(self.grid, self.values + other.values, self.labels)

    def __mul__(self, scale: float) -> "SignalBundle":
        return SignalBundle(self.grid, self.values * float(scale), self.labels)

    __rmul__ = __mul__


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise DimensionError(f"signals live on different grids: {a.grid} vs {b.grid}")


def inner_product(u: PeriodicSignal, y: PeriodicSignal) -> float:
    """Discrete L2 pairing sum_k u(k) y(k) dt over one period."""
    _check_same_grid(u, y)
    return float(np.dot(u.values, y.values)) * u.grid.dt


def signal_norm(u: PeriodicSignal) -> float:
    return math.sqrt(inner_product(u, u))


def backward_difference(u: PeriodicSignal) -> PeriodicSignal:
    """Periodic backward difference: out(k) = (u(k) - u(k-1 mod N)) / dt."""
    return PeriodicSignal(u.grid, (u.values - np.roll(u.values, 1)) / u.grid.dt)


def difference_matrix(grid: Grid) -> np.ndarray:
    """Dense N x N matrix of the periodic backward difference operator."""
    n = grid.samples
    # one-step delay: ones on the subdiagonal plus the wraparound corner
    delay = np.roll(np.eye(n), 1, axis=0)
    return (np.eye(n) - delay) / grid.dt


@lru_cache(maxsize=64)
def _difference_spectrum(samples: int, dt: float) -> np.ndarray:
    k = np.arange(samples // 2 + 1)
    lam = (1.0 - np.exp(-2j * np.pi * k / samples)) / dt
    lam.flags.writeable = False
    return lam


def difference_spectrum(grid: Grid) -> np.ndarray:
    """Eigenvalues of the backward difference on the real-FFT bins of the grid."""
    return _difference_spectrum(grid.samples, grid.dt)


@dataclass(frozen=True)
class Sine:
    """amplitude * sin(2 pi frequency_hz t + phase_rad); must fit whole periods."""

    amplitude: float
    frequency_hz: float
    phase_rad: float = 0.0


@dataclass(frozen=True)
class Constant:
    level: float


@dataclass(frozen=True)
class Tabulated:
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


Waveform = Sine | Constant | Tabulated


def make_waveform(descriptor: Waveform, grid: Grid) -> PeriodicSignal:
    """Sample a waveform descriptor at t = k dt, k = 0..N-1."""
    if isinstance(descriptor, Sine):
        cycles = descriptor.frequency_hz * grid.period
        if abs(cycles - round(cycles)) > 1e-9 * max(1.0, abs(cycles)) or round(cycles) < 1:
            raise ConfigurationError(
                f"sine at {descriptor.frequency_hz} Hz does not fit a whole number of "
                f"periods on T = {grid.period} s (got {cycles} cycles)"
            )
        t = np.arange(grid.samples) * grid.dt
        values = descriptor.amplitude * np.sin(
            2.0 * np.pi * descriptor.frequency_hz * t + descriptor.phase_rad
        )
        return PeriodicSignal(grid, values)
    if isinstance(descriptor, Constant):
        return PeriodicSignal(grid, np.full(grid.samples, float(descriptor.level)))
    if isinstance(descriptor, Tabulated):
        if len(descriptor.values) != grid.samples:
            raise ConfigurationError(
                f"tabulated waveform has {len(descriptor.values)} values, grid has "
                f"{grid.samples} samples"
            )
        return PeriodicSignal(grid, np.array(descriptor.values))
    raise ConfigurationError(f"unknown waveform descriptor {descriptor!r}")
