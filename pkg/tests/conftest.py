import numpy as np
import pytest

from pmono import (
    Constant,
    Grid,
    Sine,
    SolverConfig,
    compile_problem,
    condat_vu_solve,
    parse_netlist,
    partition_search,
)

# Filtered bridge rectifier: 1:24 step-down transformer, diode bridge,
# parallel-RC load, auxiliary current port across the load.  Branch
# orientations pin the derived hybrid matrix to the reference below.
RECTIFIER_NETLIST = """\
# filtered bridge rectifier
PORT p P1 P2
PORT q A B
XFMR t prim P1 P2 24
XFMR t sec  s2 s1 1
RC load A B 1000 10e-6
D d1 s1 A
D d2 B s1
D d3 B s2
D d4 s2 A
EXCITE p V
EXCITE q I
"""

RECTIFIER_HYBRID = np.array(
    [
        [0, 0, 0, 1 / 24, -1 / 24, 0, 0],
        [0, 0, 0, 0, 0, -1, -1],
        [0, 0, 0, 0, 0, -1, -1],
        [-1 / 24, 0, 0, 0, 0, 0, 1],
        [1 / 24, 0, 0, 0, 0, 1, 0],
        [0, 1, 1, 0, -1, 0, 0],
        [0, 1, 1, -1, 0, 0, 0],
    ]
)

RECTIFIER_COUPLING = np.array([[1.0, 0.0, -1.0], [1.0, -1.0, 0.0]])
RECTIFIER_IMPEDANCE_DRIVE = np.array([[0.0, 0.0], [-1 / 24, 0.0], [1 / 24, 0.0]])
RECTIFIER_ADMITTANCE_DRIVE = np.array([[0.0, 1.0], [0.0, 1.0]])

RECTIFIER_GRID = Grid(200, 1e-4)
RECTIFIER_EXCITATIONS = {"p": Sine(240.0, 50.0), "q": Constant(-0.005)}


@pytest.fixture(scope="session")
def rectifier_netlist():
    return parse_netlist(RECTIFIER_NETLIST)


@pytest.fixture(scope="session")
def rectifier_partition(rectifier_netlist):
    return partition_search(rectifier_netlist)


@pytest.fixture(scope="session")
def rectifier_problem(rectifier_netlist, rectifier_partition):
    return compile_problem(
        rectifier_netlist, rectifier_partition, RECTIFIER_GRID, RECTIFIER_EXCITATIONS
    )


@pytest.fixture(scope="session")
def rectifier_solution(rectifier_problem):
    """One shared solve at the reference parameters, with iterate snapshots.

    The snapshot cadence is coarsened to keep the recorded history small;
    the reference step sizes and tolerance are untouched.
    """
    config = SolverConfig(
        tau=0.005, sigma=0.005, tol=1e-6, check_every=100, keep_iterates=True
    )
    import time

    started = time.perf_counter()
    result = condat_vu_solve(rectifier_problem, config)
    elapsed = time.perf_counter() - started
    return result, elapsed
