"""Periodic steady-state analysis of m-port circuits of monotone elements.

Compile a netlist (or load a problem document) into a monotone-plus-skew
inclusion over one period of trajectories, solve it with a primal-dual
splitting iteration, and read off the port responses.
"""

from .elements import (
    CapacitorAdmittance,
    DiagonalOperator,
    DiodeAdmittance,
    DiodeImpedance,
    InductorImpedance,
    ParallelRCImpedance,
    PwlResistor,
    ResistorAdmittance,
    ResistorImpedance,
    diagonal_resolvent,
    forward_eval,
    offset_resolvent,
)
from .errors import (
    ConfigurationError,
    DimensionError,
    DivergenceError,
    LawError,
    NoRepresentationError,
    NumericalError,
    ParseError,
    PmonoError,
)
from .netlist import (
    Netlist,
    Partition,
    compile_problem,
    derive_hybrid,
    parse_netlist,
    partition_search,
)
from .signal import (
    Constant,
    Grid,
    PeriodicSignal,
    SignalBundle,
    Sine,
    Tabulated,
    backward_difference,
    inner_product,
    make_waveform,
)
from .solver import (
    Problem,
    SolverConfig,
    SolverResult,
    StepSizeWarning,
    condat_vu_solve,
    default_step_sizes,
    fixed_point_residual,
    inclusion_residual,
)
from .structure import (
    HybridMatrix,
    Interconnection,
    apply_coupling,
    apply_coupling_adjoint,
    apply_duals,
    apply_output,
    operator_norm,
    power_balance,
    validate_interconnection,
)

__version__ = "0.1.0"
