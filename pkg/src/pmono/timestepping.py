"""Backward-Euler time marching: the cross-validation oracle.

Instead of iterating in the space of periodic trajectories, march the
circuit forward in time from a zero initial state and wait for the
transient to die out.  At every time step the dynamic laws collapse to
affine scalar laws against the known history (one-step backward
differences), leaving a static monotone-plus-skew inclusion in the
instantaneous currents and voltages.  That tiny inclusion is solved by
the same primal-dual sweep as the periodic solver, restricted to a single
sample; the per-step kernel below is a scalar specialization of it (the
vectors have only a handful of entries, so plain floats beat arrays).

Ideal diodes are multivalued at a point, which a per-step solve cannot
pin down from history alone, so they must first be replaced by steep
piecewise-linear laws (``smooth_problem``); the cross-check then compares
the march against the periodic solver run on the same smoothed laws.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, replace
from math import isfinite

import numpy as np

from .elements import (
    CapacitorAdmittance,
    DiagonalOperator,
    DiodeAdmittance,
    DiodeImpedance,
    ElementLaw,
    InductorImpedance,
    ParallelRCImpedance,
    PwlResistor,
    ResistorAdmittance,
    ResistorImpedance,
    smoothed_diode_admittance,
    smoothed_diode_impedance,
)
from .errors import ConfigurationError, DivergenceError, PmonoError
from .signal import SignalBundle
from .solver import Problem, default_step_sizes

__all__ = ["MarchResult", "StepNonConvergence", "smooth_problem", "march_periods"]


class StepNonConvergence(PmonoError):
    """A per-step static solve exhausted its iteration budget."""

    def __init__(self, message, step_index):
        self.step_index = step_index
        super().__init__(message)


@dataclass(frozen=True)
class MarchResult:
    currents: SignalBundle  # final marched period
    voltages: SignalBundle
    outputs: SignalBundle
    steps: int
    worst_step_iterations: int


def smooth_problem(problem: Problem, eps: float) -> Problem:
    """Replace ideal diodes with steep piecewise-linear laws (slopes eps, 1/eps)."""

    def smooth(law: ElementLaw) -> ElementLaw:
        if isinstance(law, DiodeImpedance):
            return smoothed_diode_impedance(eps)
        if isinstance(law, DiodeAdmittance):
            return smoothed_diode_admittance(eps)
        return law

    return replace(
        problem,
        impedance_block=DiagonalOperator(
            tuple(smooth(law) for law in problem.impedance_block.laws), "impedance"
        ),
        admittance_block=DiagonalOperator(
            tuple(smooth(law) for law in problem.admittance_block.laws), "admittance"
        ),
    )


class _AffineStep:
    """Law reduced per step to x -> slope * x + offset(history); scalar resolvent."""

    __slots__ = ("slope", "offset", "_gain", "_step")

    #: True when the handler carries state across time steps
    stateful = False

    def __init__(self, slope):
        self.slope = slope
        self.offset = 0.0
        self._gain = 1.0
        self._step = 0.0

    def prepare(self, step):
        self._step = step
        self._gain = 1.0 / (1.0 + step * self.slope)

    def resolve(self, value):
        return (value - self._step * self.offset) * self._gain

    def advance(self, value):
        pass


class _CapacitorStep(_AffineStep):
    # i = C (v_k - v_{k-1}) / dt
    stateful = True

    def advance(self, value):
        self.offset = -self.slope * value


class _InductorStep(_AffineStep):
    # v = L (i_k - i_{k-1}) / dt
    stateful = True

    def advance(self, value):
        self.offset = -self.slope * value


class _ParallelRCStep(_AffineStep):
    # (RC/dt)(v_k - v_{k-1}) + v_k = R i_k collapses to
    # v_k = R/(1+RC/dt) i_k + (RC/dt)/(1+RC/dt) v_{k-1}
    __slots__ = ("_memory",)
    stateful = True

    def __init__(self, resistance, capacitance, dt):
        ratio = resistance * capacitance / dt
        super().__init__(resistance / (1.0 + ratio))
        self._memory = ratio / (1.0 + ratio)

    def advance(self, value):
        self.offset = self._memory * (self.slope * value + self.offset)


class _PwlStep:
    """Static piecewise-linear law; exact segment inversion with cached knots."""

    __slots__ = ("_xs", "_ys", "_knots", "_ratio", "offset")

    stateful = False

    def __init__(self, law: PwlResistor):
        self._xs = [point[0] for point in law.breakpoints]
        self._ys = [point[1] for point in law.breakpoints]
        self._knots = []
        self._ratio = []
        self.offset = 0.0

    def prepare(self, step):
        xs, ys = self._xs, self._ys
        self._knots = [x + step * y for x, y in zip(xs, ys)]
        self._ratio = [
            (xs[j + 1] - xs[j]) / (self._knots[j + 1] - self._knots[j])
            for j in range(len(xs) - 1)
        ]

    def resolve(self, value):
        knots = self._knots
        idx = bisect_right(knots, value) - 1
        if idx < 0:
            idx = 0
        elif idx > len(self._ratio) - 1:
            idx = len(self._ratio) - 1
        return self._xs[idx] + (value - knots[idx]) * self._ratio[idx]

    def advance(self, value):
        pass


def _step_handler(law: ElementLaw, dt: float):
    if isinstance(law, (DiodeImpedance, DiodeAdmittance)):
        raise ConfigurationError(
            "ideal diodes are multivalued; smooth the problem before marching"
        )
    if isinstance(law, ResistorImpedance):
        return _AffineStep(law.resistance)
    if isinstance(law, ResistorAdmittance):
        return _AffineStep(law.conductance)
    if isinstance(law, PwlResistor):
        return _PwlStep(law)
    if isinstance(law, CapacitorAdmittance):
        return _CapacitorStep(law.capacitance / dt)
    if isinstance(law, InductorImpedance):
        return _InductorStep(law.inductance / dt)
    if isinstance(law, ParallelRCImpedance):
        return _ParallelRCStep(law.resistance, law.capacitance, dt)
    raise ConfigurationError(f"no time-stepping reduction for {type(law).__name__}")


def march_periods(
    problem: Problem,
    periods: int,
    *,
    tau: float | None = None,
    sigma: float | None = None,
    step_tol: float = 1e-9,
    max_step_iters: int = 500_000,
) -> MarchResult:
    """March ``periods`` whole periods from zero state; returns the final period.

    Every time step runs the primal-dual sweep on the instantaneous inclusion,
    warm started from the previous step.  The stopping test watches the
    quantities that propagate beyond the step: dynamic-element channels (they
    become the next step's history) and the port responses.  Purely static
    internal channels are excluded on purpose: steeply smoothed diode pairs
    admit a stiffness-limited redistribution mode between blocked channels
    that creeps at a rate proportional to the smoothing slope while leaving
    every port quantity and every element state untouched, and chasing it
    would inflate each step's cost by the inverse smoothing factor.

    A step that exhausts ``max_step_iters`` raises StepNonConvergence with
    its index.  ``periods=0`` returns the zero initial period.
    """
    if periods < 0:
        raise ConfigurationError("periods must be >= 0")
    grid = problem.grid
    n = grid.samples
    p, q = problem.ic.n_impedance, problem.ic.n_admittance
    m = problem.ic.n_ports
    if tau is None or sigma is None:
        tau, sigma = default_step_sizes(problem.ic.coupling)

    imp_handlers = [_step_handler(law, grid.dt) for law in problem.impedance_block.laws]
    adm_handlers = [_step_handler(law, grid.dt) for law in problem.admittance_block.laws]
    for handler in imp_handlers:
        handler.prepare(tau)
    for handler in adm_handlers:
        handler.prepare(sigma)
    resolve_i = [handler.resolve for handler in imp_handlers]
    resolve_v = [handler.resolve for handler in adm_handlers]
    dyn_i = [j for j, handler in enumerate(imp_handlers) if handler.stateful]
    dyn_v = [j for j, handler in enumerate(adm_handlers) if handler.stateful]

    coupling_rows = [tuple(float(x) for x in row) for row in problem.ic.coupling]
    coupling_t_rows = [tuple(float(x) for x in row) for row in problem.ic.coupling.T]
    out_i_rows = [tuple(float(x) for x in row) for row in (-problem.ic.impedance_drive.T)]
    out_v_rows = [tuple(float(x) for x in row) for row in (-problem.ic.admittance_drive.T)]
    drive_i_table = (tau * (problem.ic.impedance_drive @ problem.excitation.values)).T.tolist()
    drive_v_table = (sigma * (problem.ic.admittance_drive @ problem.excitation.values)).T.tolist()

    i_vec = [0.0] * p
    v_vec = [0.0] * q
    y_vec = [0.0] * m
    i_period = np.zeros((p, n))
    v_period = np.zeros((q, n))
    worst = 0
    p_range = range(p)
    q_range = range(q)
    m_range = range(m)

    for step_index in range(periods * n):
        k = step_index % n
        drive_i = drive_i_table[k]
        drive_v = drive_v_table[k]
        for iteration in range(1, max_step_iters + 1):
            i_next = [0.0] * p
            for j in p_range:
                row = coupling_t_rows[j]
                acc = 0.0
                for l in q_range:
                    acc += row[l] * v_vec[l]
                i_next[j] = resolve_i[j](i_vec[j] - tau * acc + drive_i[j])
            v_next = [0.0] * q
            for j in q_range:
                row = coupling_rows[j]
                acc = 0.0
                for l in p_range:
                    acc += row[l] * (2.0 * i_next[l] - i_vec[l])
                v_next[j] = resolve_v[j](v_vec[j] + sigma * acc + drive_v[j])
            y_next = [0.0] * m
            for j in m_range:
                acc = 0.0
                row = out_i_rows[j]
                for l in p_range:
                    acc += row[l] * i_next[l]
                row = out_v_rows[j]
                for l in q_range:
                    acc += row[l] * v_next[l]
                y_next[j] = acc
            change = 0.0
            size = 0.0
            for j in dyn_i:
                change += abs(i_next[j] - i_vec[j])
                size += abs(i_next[j])
            for j in dyn_v:
                change += abs(v_next[j] - v_vec[j])
                size += abs(v_next[j])
            for j in m_range:
                change += abs(y_next[j] - y_vec[j])
                size += abs(y_next[j])
            i_vec, v_vec, y_vec = i_next, v_next, y_next
            if change <= step_tol * max(1.0, size):
                break
        else:
            raise StepNonConvergence(
                f"time step {step_index} did not converge within {max_step_iters} sweeps",
                step_index,
            )
        if not all(isfinite(x) for x in i_vec) or not all(isfinite(x) for x in v_vec):
            raise DivergenceError(
                f"march iterates became non-finite at step {step_index}", iteration=step_index
            )
        worst = max(worst, iteration)
        for handler, value in zip(imp_handlers, i_vec):
            handler.advance(value)
        for handler, value in zip(adm_handlers, v_vec):
            handler.advance(value)
        i_period[:, k] = i_vec
        v_period[:, k] = v_vec

    outputs = (
        -(problem.ic.impedance_drive.T @ i_period)
        - (problem.ic.admittance_drive.T @ v_period)
        + problem.ic.feedthrough @ problem.excitation.values
    )
    return MarchResult(
        currents=SignalBundle(grid, i_period, problem.current_labels),
        voltages=SignalBundle(grid, v_period, problem.voltage_labels),
        outputs=SignalBundle(grid, outputs, problem.response_labels),
        steps=periods * n,
        worst_step_iterations=worst,
    )
