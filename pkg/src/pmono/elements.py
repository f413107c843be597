"""Maximal monotone one-port device laws and their resolvents.

Each law maps one scalar channel of a trajectory to another (current to
voltage for impedances, voltage to current for admittances) and knows how
to evaluate its resolvent (Id + step * law)^{-1} exactly:

* diodes resolve to one-sided clips,
* static resistive laws resolve in closed form,
* LTI dynamic laws resolve through the spectrum of the periodic backward
  difference (a circulant operator on the uniform grid),
* piecewise-linear laws resolve by exact segment inversion.

``forward`` evaluates the law itself where it is single valued; it returns
``None`` when any sample lands on a multivalued point or outside the law's
domain, so diagnostics can skip rather than guess.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, LawError, NumericalError
from .signal import (
    Grid,
    PeriodicSignal,
    SignalBundle,
    backward_difference,
    difference_matrix,
    _difference_spectrum,
)

__all__ = [
    "ElementLaw",
    "DiodeImpedance",
    "DiodeAdmittance",
    "ResistorImpedance",
    "ResistorAdmittance",
    "CapacitorAdmittance",
    "InductorImpedance",
    "ParallelRCImpedance",
    "PwlResistor",
    "DiagonalOperator",
    "diagonal_resolvent",
    "offset_resolvent",
    "forward_eval",
    "resolvent_signal",
    "dense_resolvent_matrix",
    "smoothed_diode_impedance",
    "smoothed_diode_admittance",
]

# Conditioning guard for the circulant solves; the monotone parameter
# ranges keep every multiplier well away from zero, so tripping this
# indicates corrupted inputs rather than an unlucky circuit.
_COND_LIMIT = 1e14


def _require_nonneg(name: str, value: float) -> float:
    value = float(value)
    if not (np.isfinite(value) and value >= 0.0):
        raise LawError(f"{name} must be finite and >= 0, got {value}")
    return value


def _require_pos(name: str, value: float) -> float:
    value = float(value)
    if not (np.isfinite(value) and value > 0.0):
        raise LawError(f"{name} must be positive, got {value}")
    return value


def _spectral_solve(values: np.ndarray, gain: np.ndarray) -> np.ndarray:
    n = values.shape[-1]
    return np.fft.irfft(np.fft.rfft(values) * gain, n=n)


@lru_cache(maxsize=None)
def _first_order_gain(coeff: float, samples: int, dt: float) -> np.ndarray:
    """Multiplier diagonalizing (Id + coeff * diff)^{-1} on the rFFT bins."""
    lam = _difference_spectrum(samples, dt)
    denom = 1.0 + coeff * lam
    if np.min(np.abs(denom)) * _COND_LIMIT < np.max(np.abs(denom)):
        raise NumericalError(
            f"circulant solve is singular to working precision "
            f"(condition ~ {np.max(np.abs(denom)) / max(np.min(np.abs(denom)), 1e-300):.2e})"
        )
    gain = 1.0 / denom
    gain.flags.writeable = False
    return gain


@lru_cache(maxsize=None)
def _parallel_rc_gain(
    resistance: float, capacitance: float, step: float, samples: int, dt: float
) -> np.ndarray:
    lam = _difference_spectrum(samples, dt)
    rc = resistance * capacitance
    denom = rc * lam + 1.0 + step * resistance
    if np.min(np.abs(denom)) * _COND_LIMIT < np.max(np.abs(denom)):
        raise NumericalError(
            f"parallel-RC resolvent is singular to working precision "
            f"(condition ~ {np.max(np.abs(denom)) / max(np.min(np.abs(denom)), 1e-300):.2e})"
        )
    gain = (rc * lam + 1.0) / denom
    gain.flags.writeable = False
    return gain


class ElementLaw:
    """Base class; subclasses provide ``resolvent`` and ``forward`` on raw arrays."""

    #: which block the law may occupy: "impedance", "admittance" or "either"
    role = "either"

    def resolvent(self, step: float, values: np.ndarray, grid: Grid) -> np.ndarray:
        raise NotImplementedError

    def forward(self, values: np.ndarray, grid: Grid) -> np.ndarray | None:
        raise NotImplementedError


@dataclass(frozen=True)
class DiodeImpedance(ElementLaw):
    """Ideal diode, current to voltage: v = 0 for i > 0, v <= 0 at i = 0."""

    role = "impedance"

    def resolvent(self, step, values, grid):
        return np.maximum(values, 0.0)

    def forward(self, values, grid):
        if np.any(values <= 0.0):
            return None
        return np.zeros_like(values)


@dataclass(frozen=True)
class DiodeAdmittance(ElementLaw):
    """Relational inverse of the ideal diode: i = 0 for v < 0, i >= 0 at v = 0."""

    role = "admittance"

    def resolvent(self, step, values, grid):
        return np.minimum(values, 0.0)

    def forward(self, values, grid):
        if np.any(values >= 0.0):
            return None
        return np.zeros_like(values)


@dataclass(frozen=True)
class ResistorImpedance(ElementLaw):
    resistance: float
    role = "impedance"

    def __post_init__(self):
        object.__setattr__(self, "resistance", _require_nonneg("resistance", self.resistance))

    def resolvent(self, step, values, grid):
        return values / (1.0 + step * self.resistance)

    def forward(self, values, grid):
        return self.resistance * values


@dataclass(frozen=True)
class ResistorAdmittance(ElementLaw):
    conductance: float
    role = "admittance"

    def __post_init__(self):
        object.__setattr__(self, "conductance", _require_nonneg("conductance", self.conductance))

    def resolvent(self, step, values, grid):
        return values / (1.0 + step * self.conductance)

    def forward(self, values, grid):
        return self.conductance * values


@dataclass(frozen=True)
class CapacitorAdmittance(ElementLaw):
    """i = C dv/dt, discretized with the periodic backward difference."""

    capacitance: float
    role = "admittance"

    def __post_init__(self):
        object.__setattr__(self, "capacitance", _require_nonneg("capacitance", self.capacitance))

    def resolvent(self, step, values, grid):
        coeff = step * self.capacitance
        if coeff == 0.0:
            return np.array(values, dtype=float)
        return _spectral_solve(values, _first_order_gain(coeff, grid.samples, grid.dt))

    def forward(self, values, grid):
        return self.capacitance * backward_difference(PeriodicSignal(grid, values)).values


@dataclass(frozen=True)
class InductorImpedance(ElementLaw):
    """v = L di/dt, discretized with the periodic backward difference."""

    inductance: float
    role = "impedance"

    def __post_init__(self):
        object.__setattr__(self, "inductance", _require_nonneg("inductance", self.inductance))

    def resolvent(self, step, values, grid):
        coeff = step * self.inductance
        if coeff == 0.0:
            return np.array(values, dtype=float)
        return _spectral_solve(values, _first_order_gain(coeff, grid.samples, grid.dt))

    def forward(self, values, grid):
        return self.inductance * backward_difference(PeriodicSignal(grid, values)).values


@dataclass(frozen=True)
class ParallelRCImpedance(ElementLaw):
    """Resistor and capacitor in parallel as one impedance R (RC d/dt + 1)^{-1}."""

    resistance: float
    capacitance: float
    role = "impedance"

    def __post_init__(self):
        object.__setattr__(self, "resistance", _require_nonneg("resistance", self.resistance))
        object.__setattr__(self, "capacitance", _require_nonneg("capacitance", self.capacitance))

    def resolvent(self, step, values, grid):
        if step * self.resistance == 0.0:
            return np.array(values, dtype=float)
        gain = _parallel_rc_gain(
            self.resistance, self.capacitance, step, grid.samples, grid.dt
        )
        return _spectral_solve(values, gain)

    def forward(self, values, grid):
        # v = R (RC diff + 1)^{-1} i, evaluated spectrally
        lam = _difference_spectrum(grid.samples, grid.dt)
        gain = self.resistance / (self.resistance * self.capacitance * lam + 1.0)
        return _spectral_solve(values, gain)


@dataclass(frozen=True)
class PwlResistor(ElementLaw):
    """Piecewise-linear maximal monotone curve through ordered breakpoints.

    The curve passes through the given (x, y) points and continues past each
    end along the direction of the outermost segment (a vertical outer
    segment caps the domain, a horizontal one caps the range).  Vertical and
    horizontal segments are allowed; both coordinates must be nondecreasing
    along the arc, so the graph is maximal monotone in the plane.
    """

    breakpoints: tuple[tuple[float, float], ...]
    role = "either"

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.breakpoints)
        if len(pts) < 2:
            raise LawError("piecewise-linear curve needs at least 2 breakpoints")
        if not all(np.isfinite(x) and np.isfinite(y) for x, y in pts):
            raise LawError("breakpoints must be finite")
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            dx, dy = x1 - x0, y1 - y0
            if dx < 0.0 or dy < 0.0:
                raise LawError(
                    f"curve decreases between ({x0}, {y0}) and ({x1}, {y1})"
                )
            if dx == 0.0 and dy == 0.0:
                raise LawError(f"repeated breakpoint ({x0}, {y0})")
        object.__setattr__(self, "breakpoints", pts)

    def swapped(self) -> "PwlResistor":
        """The relational inverse: the same curve with coordinates exchanged."""
        return PwlResistor(tuple((y, x) for x, y in self.breakpoints))

    def _knots(self):
        xs = np.array([p[0] for p in self.breakpoints])
        ys = np.array([p[1] for p in self.breakpoints])
        return xs, ys

    def resolvent(self, step, values, grid=None):
        # x + step * f(x) is strictly increasing along the curve, so each
        # sample is inverted on exactly one segment (extrapolating at the
        # ends); no iteration is involved.
        xs, ys = self._knots()
        knots = xs + step * ys
        scalar = np.isscalar(values)
        vals = np.atleast_1d(np.asarray(values, dtype=float))
        seg = np.clip(np.searchsorted(knots, vals, side="right") - 1, 0, len(knots) - 2)
        span = knots[seg + 1] - knots[seg]
        frac = (vals - knots[seg]) / span
        out = xs[seg] + frac * (xs[seg + 1] - xs[seg])
        return float(out[0]) if scalar else out

    def forward(self, values, grid=None):
        xs, ys = self._knots()
        vals = np.atleast_1d(np.asarray(values, dtype=float))
        dx = np.diff(xs)
        vertical_x = xs[:-1][dx == 0.0]
        if vertical_x.size and np.any(np.isin(vals, vertical_x)):
            return None
        if dx[0] == 0.0 and np.any(vals < xs[0]):
            return None
        if dx[-1] == 0.0 and np.any(vals > xs[-1]):
            return None
        out = np.interp(vals, xs, ys)
        low = vals < xs[0]
        if np.any(low):
            out[low] = ys[0] + (vals[low] - xs[0]) * (ys[1] - ys[0]) / dx[0]
        high = vals > xs[-1]
        if np.any(high):
            out[high] = ys[-1] + (vals[high] - xs[-1]) * (ys[-1] - ys[-2]) / dx[-1]
        return out


def smoothed_diode_impedance(eps: float) -> PwlResistor:
    """Ideal diode impedance with on-resistance eps and off-conductance eps."""
    eps = _require_pos("smoothing", eps)
    return PwlResistor(((-1.0, -1.0 / eps), (0.0, 0.0), (1.0, eps)))


def smoothed_diode_admittance(eps: float) -> PwlResistor:
    """Ideal diode admittance with off-conductance eps and on-resistance eps."""
    eps = _require_pos("smoothing", eps)
    return PwlResistor(((-1.0, -eps), (0.0, 0.0), (eps, 1.0)))


@dataclass(frozen=True)
class DiagonalOperator:
    """Ordered laws applied channelwise, each tagged with the block it occupies.

    ``forms`` is one tag per law ("impedance" or "admittance"); passing a
    single string tags every law the same way.  The tag decides where the
    channel sits in the compiled structure and must agree with the law's
    directional role; the resolvent itself is channelwise regardless.
    """

    laws: tuple[ElementLaw, ...]
    forms: tuple[str, ...] | str

    def __post_init__(self):
        laws = tuple(self.laws)
        forms = self.forms
        if isinstance(forms, str):
            forms = (forms,) * len(laws)
        forms = tuple(forms)
        if len(forms) != len(laws):
            raise LawError(f"{len(laws)} laws but {len(forms)} form tags")
        for law, form in zip(laws, forms):
            if form not in ("impedance", "admittance"):
                raise LawError(f"form tag must be impedance or admittance, got {form!r}")
            if law.role not in (form, "either"):
                raise LawError(f"{type(law).__name__} cannot sit in the {form} block")
        object.__setattr__(self, "laws", laws)
        object.__setattr__(self, "forms", forms)

    def __len__(self) -> int:
        return len(self.laws)

    def uniform(self, form: str) -> bool:
        return all(tag == form for tag in self.forms)

    def resolve_array(self, step: float, values: np.ndarray, grid: Grid) -> np.ndarray:
        if values.shape[0] != len(self.laws):
            raise DimensionError(f"{len(self.laws)} laws but {values.shape[0]} channels")
        if not self.laws:
            return values.copy()
        return np.stack(
            [law.resolvent(step, values[k], grid) for k, law in enumerate(self.laws)]
        )


def resolvent_signal(law: ElementLaw, step: float, signal: PeriodicSignal) -> PeriodicSignal:
    """Apply one law's resolvent to a whole signal."""
    if step <= 0:
        raise LawError(f"resolvent step must be positive, got {step}")
    return PeriodicSignal(signal.grid, law.resolvent(step, signal.values, signal.grid))


def diagonal_resolvent(op: DiagonalOperator, step: float, z: SignalBundle) -> SignalBundle:
    """Apply each law's resolvent to its own channel of the bundle."""
    if step <= 0:
        raise LawError(f"resolvent step must be positive, got {step}")
    return SignalBundle(z.grid, op.resolve_array(step, z.values, z.grid), z.labels)


def offset_resolvent(
    op: DiagonalOperator, step: float, z: SignalBundle, offset: SignalBundle
) -> SignalBundle:
    """Resolvent of the law block shifted by a constant drive.

    Realizes (Id + step * A_shifted)^{-1} for A_shifted(x) = A(x) - offset by
    feeding z + step * offset to the plain block resolvent.  Note the step
    factor on the offset: it is forced by the algebra of the shifted
    inclusion x + step A(x) - step offset = z.
    """
    if z.values.shape != offset.values.shape or z.grid != offset.grid:
        raise DimensionError("offset bundle must match the input bundle")
    shifted = SignalBundle(z.grid, z.values + step * offset.values, z.labels)
    return diagonal_resolvent(op, step, shifted)


def forward_eval(law: ElementLaw, signal: PeriodicSignal) -> PeriodicSignal | None:
    """Evaluate the law where single valued; None when any sample is not."""
    result = law.forward(signal.values, signal.grid)
    if result is None:
        return None
    return PeriodicSignal(signal.grid, result)


def dense_resolvent_matrix(law: ElementLaw, step: float, grid: Grid) -> np.ndarray:
    """N x N matrix of the resolvent for the LTI laws (dense cross-check route)."""
    n = grid.samples
    eye = np.eye(n)
    diff = difference_matrix(grid)
    if isinstance(law, CapacitorAdmittance):
        return np.linalg.solve(eye + step * law.capacitance * diff, eye)
    if isinstance(law, InductorImpedance):
        return np.linalg.solve(eye + step * law.inductance * diff, eye)
    if isinstance(law, ParallelRCImpedance):
        rc = law.resistance * law.capacitance
        lhs = rc * diff + (1.0 + step * law.resistance) * eye
        return (rc * diff + eye) @ np.linalg.solve(lhs, eye)
    if isinstance(law, ResistorImpedance):
        return eye / (1.0 + step * law.resistance)
    if isinstance(law, ResistorAdmittance):
        return eye / (1.0 + step * law.conductance)
    raise LawError(f"{type(law).__name__} has no dense resolvent matrix")
