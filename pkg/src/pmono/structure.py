"""Structured skew-symmetric interconnection of a compiled circuit.

The interconnection couples the impedance-block currents and the
admittance-block voltages through a small real matrix acting samplewise
(the full-trajectory operator is that matrix Kronecker the identity), and
routes port excitations into each block.  Everything here is a pure,
samplewise linear map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError
from .signal import PeriodicSignal, SignalBundle

__all__ = [
    "Interconnection",
    "HybridMatrix",
    "validate_interconnection",
    "apply_coupling",
    "apply_coupling_adjoint",
    "apply_output",
    "apply_duals",
    "power_balance",
    "operator_norm",
]

SKEW_TOL = 1e-9


def _matrix(values, rows, cols, name) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0 and rows * cols == 0:
        arr = np.zeros((rows, cols))
    try:
        arr = arr.reshape(rows, cols).copy()
    except ValueError as exc:
        raise DimensionError(f"{name} must be {rows}x{cols}, got size {arr.size}") from exc
    arr.flags.writeable = False
    return arr


def _coerce(values, rows, cols) -> np.ndarray:
    # Best-effort coercion: reshape when the size fits, otherwise keep the
    # given shape so validate_interconnection can report it.
    arr = np.asarray(values, dtype=float)
    if arr.size == rows * cols:
        arr = arr.reshape(rows, cols)
    arr = np.atleast_2d(arr.copy())
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Interconnection:
    """Samplewise structure data: coupling between blocks plus port drives.

    coupling          -- (admittances x impedances) skew coupling block
    impedance_drive   -- (impedances x ports) map from excitations
    admittance_drive  -- (admittances x ports) map from excitations
    feedthrough       -- (ports x ports) direct excitation-to-response term
    """

    n_ports: int
    n_impedance: int
    n_admittance: int
    coupling: np.ndarray
    impedance_drive: np.ndarray
    admittance_drive: np.ndarray
    feedthrough: np.ndarray

    def __post_init__(self):
        m, p, q = self.n_ports, self.n_impedance, self.n_admittance
        if min(m, p, q) < 0:
            raise DimensionError("port and element counts must be nonnegative")
        object.__setattr__(self, "coupling", _coerce(self.coupling, q, p))
        object.__setattr__(self, "impedance_drive", _coerce(self.impedance_drive, p, m))
        object.__setattr__(self, "admittance_drive", _coerce(self.admittance_drive, q, m))
        object.__setattr__(self, "feedthrough", _coerce(self.feedthrough, m, m))


def validate_interconnection(ic: Interconnection) -> list[str]:
    """Dimension and finiteness checks; returns human-readable violations."""
    violations = []
    m, p, q = ic.n_ports, ic.n_impedance, ic.n_admittance
    checks = [
        ("coupling", ic.coupling, (q, p)),
        ("impedance_drive", ic.impedance_drive, (p, m)),
        ("admittance_drive", ic.admittance_drive, (q, m)),
        ("feedthrough", ic.feedthrough, (m, m)),
    ]
    for name, arr, shape in checks:
        if arr.shape != shape:
            violations.append(f"{name} has shape {arr.shape}, expected {shape}")
        elif arr.size and not np.all(np.isfinite(arr)):
            violations.append(f"{name} contains non-finite entries")
    return violations


def _bundle_matmul(matrix: np.ndarray, bundle: SignalBundle, labels=()) -> SignalBundle:
    if bundle.channel_count != matrix.shape[1]:
        raise DimensionError(
            f"matrix expects {matrix.shape[1]} channels, bundle has {bundle.channel_count}"
        )
    return SignalBundle(bundle.grid, matrix @ bundle.values, labels)


def apply_coupling(ic: Interconnection, currents: SignalBundle) -> SignalBundle:
    """Samplewise product of the coupling block with the impedance currents."""
    return _bundle_matmul(ic.coupling, currents)


def apply_coupling_adjoint(ic: Interconnection, voltages: SignalBundle) -> SignalBundle:
    """Samplewise product of the transposed coupling with the admittance voltages."""
    return _bundle_matmul(ic.coupling.T, voltages)


def apply_output(
    ic: Interconnection, currents: SignalBundle, voltages: SignalBundle, excitation: SignalBundle
) -> SignalBundle:
    """Port responses from internal trajectories and excitations.

    Computes y = -(impedance_drive' i + admittance_drive' v) + feedthrough u.
    The minus sign makes the output row the negated transpose of the drive
    column, which is what skew-symmetry of the underlying hybrid matrix
    requires (and what the worked rectifier matrices use).
    """
    for bundle, count, name in (
        (currents, ic.n_impedance, "currents"),
        (voltages, ic.n_admittance, "voltages"),
        (excitation, ic.n_ports, "excitation"),
    ):
        if bundle.channel_count != count:
            raise DimensionError(f"{name} bundle has {bundle.channel_count} channels, expected {count}")
    out = (
        -(ic.impedance_drive.T @ currents.values)
        - (ic.admittance_drive.T @ voltages.values)
        + ic.feedthrough @ excitation.values
    )
    return SignalBundle(excitation.grid, out)


def apply_duals(
    ic: Interconnection, currents: SignalBundle, voltages: SignalBundle, excitation: SignalBundle
) -> tuple[SignalBundle, SignalBundle]:
    """Element-side dual trajectories implied by the interconnection.

    Returns (voltages across impedance elements, currents into admittance
    elements): (impedance_drive u - coupling' v, admittance_drive u + coupling i).
    At a solution these equal the element laws evaluated at (i, v).
    """
    z_imp = ic.impedance_drive @ excitation.values - ic.coupling.T @ voltages.values
    z_adm = ic.admittance_drive @ excitation.values + ic.coupling @ currents.values
    return (
        SignalBundle(excitation.grid, z_imp),
        SignalBundle(excitation.grid, z_adm),
    )


def power_balance(
    u: SignalBundle, y: SignalBundle, z: SignalBundle, z_dual: SignalBundle
) -> PeriodicSignal:
    """Per-sample u'y + z'z_dual; identically zero for a lossless interconnection."""
    if z.channel_count != z_dual.channel_count or u.channel_count != y.channel_count:
        raise DimensionError("paired bundles must have matching channel counts")
    residual = np.sum(u.values * y.values, axis=0) + np.sum(z.values * z_dual.values, axis=0)
    return PeriodicSignal(u.grid, residual)


def operator_norm(matrix: np.ndarray) -> float:
    """Spectral norm of a samplewise block (equals the full operator's norm).

    Exact singular values for blocks with a side of 3 or less; otherwise
    power iteration on the Gram matrix from a fixed all-ones start vector
    (relative tolerance 1e-12, at most 10,000 sweeps), so the result is
    deterministic.
    """
    mat = np.atleast_2d(np.asarray(matrix, dtype=float))
    if mat.size == 0:
        return 0.0
    if min(mat.shape) <= 3:
        return float(np.linalg.svd(mat, compute_uv=False)[0])
    gram = mat.T @ mat
    x = np.ones(gram.shape[0])
    x /= np.linalg.norm(x)
    estimate = 0.0
    for sweep in range(10_000):
        y = gram @ x
        norm_y = np.linalg.norm(y)
        if norm_y == 0.0:
            # all-ones start lies in the null space; restart along a basis vector
            x = np.zeros(gram.shape[0])
            x[sweep % gram.shape[0]] = 1.0
            continue
        x = y / norm_y
        new_estimate = float(x @ (gram @ x))
        if abs(new_estimate - estimate) <= 1e-12 * max(1.0, abs(new_estimate)):
            estimate = new_estimate
            break
        estimate = new_estimate
    return float(np.sqrt(max(estimate, 0.0)))


@dataclass(frozen=True)
class HybridMatrix:
    """Full skew hybrid map from (excitations, independents) to (responses, duals).

    Partitioned with the external ports first, then the impedance-block
    entries, then the admittance-block entries.
    """

    matrix: np.ndarray
    n_ports: int
    n_impedance: int
    n_admittance: int

    def __post_init__(self):
        size = self.n_ports + self.n_impedance + self.n_admittance
        mat = _matrix(self.matrix, size, size, "hybrid matrix")
        object.__setattr__(self, "matrix", mat)
        skew_defect = float(np.max(np.abs(mat + mat.T))) if size else 0.0
        if skew_defect > SKEW_TOL:
            raise NumericalError(
                f"hybrid matrix is not skew-symmetric (defect {skew_defect:.3e})"
            )
        blk = self.block22
        p = self.n_impedance
        for corner in (blk[:p, :p], blk[p:, p:]):
            if corner.size and np.max(np.abs(corner)) > SKEW_TOL:
                raise NumericalError(
                    "hybrid matrix mixes variables inside an element block "
                    f"(defect {np.max(np.abs(corner)):.3e})"
                )

    @property
    def block11(self) -> np.ndarray:
        m = self.n_ports
        return self.matrix[:m, :m]

    @property
    def block12(self) -> np.ndarray:
        m = self.n_ports
        return self.matrix[:m, m:]

    @property
    def block21(self) -> np.ndarray:
        m = self.n_ports
        return self.matrix[m:, :m]

    @property
    def block22(self) -> np.ndarray:
        m = self.n_ports
        return self.matrix[m:, m:]

    def interconnection(self) -> Interconnection:
        m, p, q = self.n_ports, self.n_impedance, self.n_admittance
        return Interconnection(
            n_ports=m,
            n_impedance=p,
            n_admittance=q,
            coupling=self.block22[p:, :p],
            impedance_drive=self.block21[:p, :],
            admittance_drive=self.block21[p:, :],
            feedthrough=self.block11,
        )
