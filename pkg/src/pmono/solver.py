"""Primal-dual solution of the compiled circuit inclusion.

The iteration alternates the impedance-block resolvent (with the port
drive folded in as an input offset) against the coupling adjoint, and the
admittance-block resolvent against the coupling of an extrapolated
current iterate:

    i_{k+1} = J_tau  (i_k - tau * coupling' v_k + tau * drive_i)
    v_{k+1} = J_sigma(v_k + sigma * coupling (2 i_{k+1} - i_k) + sigma * drive_v)

Fixed points solve the circuit inclusion exactly; convergence is
guaranteed whenever tau * sigma * |coupling|^2 < 1.  The stopping rule is
a normalized successive-iterate residual; the device laws may be
multivalued, so the inclusion residual itself is diagnostic only.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .elements import DiagonalOperator, forward_eval
from .errors import ConfigurationError, DimensionError, DivergenceError
from .signal import Grid, SignalBundle
from .structure import Interconnection, operator_norm, validate_interconnection

__all__ = [
    "Problem",
    "SolverConfig",
    "SolverResult",
    "StepSizeWarning",
    "condat_vu_solve",
    "default_step_sizes",
    "fixed_point_residual",
    "inclusion_residual",
]


class StepSizeWarning(UserWarning):
    """Raised as a warning record when the step-size product is too large."""


@dataclass(frozen=True)
class Problem:
    """A compiled circuit: structure, ordered element blocks, excitations."""

    grid: Grid
    ic: Interconnection
    impedance_block: DiagonalOperator
    admittance_block: DiagonalOperator
    excitation: SignalBundle
    current_labels: tuple[str, ...] = ()
    voltage_labels: tuple[str, ...] = ()
    response_labels: tuple[str, ...] = ()

    def __post_init__(self):
        problems = validate_interconnection(self.ic)
        if problems:
            raise DimensionError("invalid interconnection: " + "; ".join(problems))
        if len(self.impedance_block) != self.ic.n_impedance:
            raise DimensionError(
                f"impedance block has {len(self.impedance_block)} laws, structure expects "
                f"{self.ic.n_impedance}"
            )
        if len(self.admittance_block) != self.ic.n_admittance:
            raise DimensionError(
                f"admittance block has {len(self.admittance_block)} laws, structure expects "
                f"{self.ic.n_admittance}"
            )
        if not self.impedance_block.uniform("impedance"):
            raise DimensionError("the impedance block must hold impedance-form laws only")
        if not self.admittance_block.uniform("admittance"):
            raise DimensionError("the admittance block must hold admittance-form laws only")
        if self.excitation.channel_count != self.ic.n_ports:
            raise DimensionError(
                f"{self.excitation.channel_count} excitation channels for {self.ic.n_ports} ports"
            )
        if self.excitation.grid != self.grid:
            raise DimensionError("excitations live on a different grid than the problem")
        object.__setattr__(
            self, "current_labels", _default_labels(self.current_labels, "i", self.ic.n_impedance)
        )
        object.__setattr__(
            self, "voltage_labels", _default_labels(self.voltage_labels, "v", self.ic.n_admittance)
        )
        object.__setattr__(
            self, "response_labels", _default_labels(self.response_labels, "y", self.ic.n_ports)
        )


def _default_labels(labels, prefix, count):
    labels = tuple(labels)
    if not labels:
        return tuple(f"{prefix}{k}" for k in range(count))
    if len(labels) != count:
        raise DimensionError(f"expected {count} {prefix!r} labels, got {len(labels)}")
    return labels


@dataclass(frozen=True)
class SolverConfig:
    tau: float
    sigma: float
    max_iters: int = 500_000
    tol: float = 1e-6
    check_every: int = 10
    force_steps: bool = False
    keep_iterates: bool = False

    def __post_init__(self):
        if not (self.tau > 0 and self.sigma > 0):
            raise ConfigurationError(f"step sizes must be positive, got {self.tau}, {self.sigma}")
        if self.max_iters < 1 or self.check_every < 1:
            raise ConfigurationError("max_iters and check_every must be positive integers")
        if not self.tol > 0:
            raise ConfigurationError(f"tolerance must be positive, got {self.tol}")


@dataclass(frozen=True)
class SolverResult:
    currents: SignalBundle
    voltages: SignalBundle
    outputs: SignalBundle
    iterations: int
    converged: bool
    residual_history: tuple[tuple[int, float], ...]
    iterate_history: tuple[tuple[int, np.ndarray, np.ndarray], ...] = ()


def default_step_sizes(coupling: np.ndarray) -> tuple[float, float]:
    """Equal steps with tau*sigma = 0.9801 / |coupling|^2 (1 when decoupled)."""
    nrm = operator_norm(coupling)
    if nrm == 0.0:
        return 1.0, 1.0
    return 0.99 / nrm, 0.99 / nrm


def _bundle_l2(values: np.ndarray, dt: float) -> float:
    return math.sqrt(float(np.sum(values * values)) * dt)


def fixed_point_residual(
    prev_i: SignalBundle, prev_v: SignalBundle, next_i: SignalBundle, next_v: SignalBundle
) -> float:
    """Normalized change between successive iterates in the discrete L2 norm."""
    if prev_i.values.shape != next_i.values.shape or prev_v.values.shape != next_v.values.shape:
        raise DimensionError("iterate shapes do not match")
    dt = next_i.grid.dt
    return _residual_arrays(
        prev_i.values, prev_v.values, next_i.values, next_v.values, dt
    )


def _residual_arrays(prev_i, prev_v, next_i, next_v, dt) -> float:
    num = _bundle_l2(next_i - prev_i, dt) + _bundle_l2(next_v - prev_v, dt)
    den = max(1.0, _bundle_l2(next_i, dt) + _bundle_l2(next_v, dt))
    return num / den


def condat_vu_iterate(i, v, coupling, coupling_t, resolve_i, resolve_v, tau, sigma, drive_i, drive_v):
    """One primal-dual sweep on raw arrays; drives arrive pre-scaled by the steps."""
    arg_i = i - tau * (coupling_t @ v) + drive_i
    i_next = resolve_i(tau, arg_i)
    arg_v = v + sigma * (coupling @ (2.0 * i_next - i)) + drive_v
    v_next = resolve_v(sigma, arg_v)
    return i_next, v_next


def check_step_sizes(coupling: np.ndarray, tau: float, sigma: float, force: bool) -> None:
    """Gate on tau*sigma*|coupling|^2 < 1; warn always, raise unless forced."""
    nrm = operator_norm(coupling)
    product = tau * sigma * nrm * nrm
    if product >= 1.0:
        warnings.warn(
            f"step sizes violate the convergence condition: tau*sigma*|coupling|^2 = "
            f"{product:.6g} >= 1",
            StepSizeWarning,
            stacklevel=2,
        )
        if not force:
            raise ConfigurationError(
                f"tau*sigma*|coupling|^2 = {product:.6g} >= 1; convergence is not "
                "guaranteed (pass force_steps to run anyway)"
            )


def condat_vu_solve(problem: Problem, config: SolverConfig) -> SolverResult:
    """Iterate to the periodic steady state of the compiled circuit.

    Starts from zero trajectories, checks the normalized fixed-point
    residual every ``check_every`` sweeps and stops at ``tol``.  Exhausting
    ``max_iters`` is reported through ``converged=False``, never raised: a
    forced circuit need not have a periodic solution at all.  Non-finite
    iterates raise DivergenceError with the offending sweep index.
    """
    check_step_sizes(problem.ic.coupling, config.tau, config.sigma, config.force_steps)

    grid = problem.grid
    n = grid.samples
    p, q = problem.ic.n_impedance, problem.ic.n_admittance
    coupling = problem.ic.coupling
    coupling_t = np.ascontiguousarray(coupling.T)
    u = problem.excitation.values
    drive_i = config.tau * (problem.ic.impedance_drive @ u)
    drive_v = config.sigma * (problem.ic.admittance_drive @ u)

    resolve_i = lambda step, arr: problem.impedance_block.resolve_array(step, arr, grid)
    resolve_v = lambda step, arr: problem.admittance_block.resolve_array(step, arr, grid)

    i = np.zeros((p, n))
    v = np.zeros((q, n))
    history: list[tuple[int, float]] = []
    iterates: list[tuple[int, np.ndarray, np.ndarray]] = []
    converged = False
    iterations = 0

    for sweep in range(1, config.max_iters + 1):
        i_next, v_next = condat_vu_iterate(
            i, v, coupling, coupling_t, resolve_i, resolve_v,
            config.tau, config.sigma, drive_i, drive_v,
        )
        iterations = sweep
        if sweep % config.check_every == 0 or sweep == config.max_iters:
            residual = _residual_arrays(i, v, i_next, v_next, grid.dt)
            if not np.isfinite(residual) or not (
                np.all(np.isfinite(i_next)) and np.all(np.isfinite(v_next))
            ):
                raise DivergenceError(
                    f"iterates became non-finite at sweep {sweep}", iteration=sweep
                )
            history.append((sweep, residual))
            if config.keep_iterates:
                iterates.append((sweep, i_next.copy(), v_next.copy()))
            if residual <= config.tol:
                i, v = i_next, v_next
                converged = True
                break
        i, v = i_next, v_next

    currents = SignalBundle(grid, i, problem.current_labels)
    voltages = SignalBundle(grid, v, problem.voltage_labels)
    outputs = SignalBundle(
        grid,
        -(problem.ic.impedance_drive.T @ i)
        - (problem.ic.admittance_drive.T @ v)
        + problem.ic.feedthrough @ u,
        problem.response_labels,
    )
    return SolverResult(
        currents=currents,
        voltages=voltages,
        outputs=outputs,
        iterations=iterations,
        converged=converged,
        residual_history=tuple(history),
        iterate_history=tuple(iterates),
    )


def inclusion_residual(problem: Problem, currents: SignalBundle, voltages: SignalBundle):
    """L2 norm of the inclusion defect at (i, v); None when any law is multivalued.

    Evaluates law(i) + coupling' v - impedance_drive u channelwise (and the
    admittance analogue) with the laws' forward maps, so it only applies
    where every law is single valued.  Diagnostic only; the solver itself
    never needs it.
    """
    u = problem.excitation.values
    dt = problem.grid.dt
    total = 0.0
    duals_i = problem.ic.impedance_drive @ u - problem.ic.coupling.T @ voltages.values
    for k, law in enumerate(problem.impedance_block.laws):
        value = forward_eval(law, currents.channel(k))
        if value is None:
            return None
        defect = value.values - duals_i[k]
        total += float(np.sum(defect * defect)) * dt
    duals_v = problem.ic.admittance_drive @ u + problem.ic.coupling @ currents.values
    for k, law in enumerate(problem.admittance_block.laws):
        value = forward_eval(law, voltages.channel(k))
        if value is None:
            return None
        defect = value.values - duals_v[k]
        total += float(np.sum(defect * defect)) * dt
    return math.sqrt(total)
