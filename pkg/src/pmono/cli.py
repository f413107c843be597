"""Command-line front end.

Subcommands:

* ``solve``    -- load a problem document or compile a netlist, run the
                  periodic solver, write trajectories as CSV.
* ``compile``  -- derive the hybrid structure from a netlist and write a
                  problem document (optionally printing the hybrid matrix).
* ``simulate`` -- backward-Euler time-marching oracle on a problem document
                  (ideal diodes smoothed), writing the final period as CSV.
* ``plot``     -- static SVG/PDF line plot of named CSV columns against time.

Exit codes: 0 success/converged, 1 input or configuration error, 2
non-convergence (solve still writes the last iterate, flagged with a
trailing ``# converged=false`` line).

The environment variable PMONO_SEED is reserved for future use; nothing
reads it today and every default is deterministic.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .errors import DivergenceError, PmonoError
from .netlist import compile_problem, derive_hybrid, parse_netlist, partition_search
from .problemdoc import (
    document_from_parts,
    document_to_problem,
    load_document,
    save_document,
)
from .signal import Constant, Grid, Sine, Tabulated, Waveform
from .solver import Problem, SolverConfig, SolverResult, condat_vu_solve, default_step_sizes
from .timestepping import StepNonConvergence, march_periods, smooth_problem

__all__ = ["main", "entry"]


def entry() -> None:
    sys.exit(main())


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except PmonoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmono",
        description="Periodic steady-state solver for circuits of monotone elements.",
        epilog="PMONO_SEED is reserved; all defaults are deterministic.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a problem or netlist for its periodic steady state")
    src = solve.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem", help="problem document (JSON)")
    src.add_argument("--netlist", help="netlist file")
    solve.add_argument("--partition", help="comma-separated pins name=Z|Y|V|I (netlist mode)")
    solve.add_argument("--samples", type=int, help="grid samples per period (netlist mode)")
    solve.add_argument("--dt", type=float, help="grid spacing in seconds (netlist mode)")
    solve.add_argument(
        "--excite",
        action="append",
        default=[],
        metavar="PORT=SPEC",
        help="excitation, e.g. p=sine:240,50,0 or q=const:-0.005 (netlist mode)",
    )
    solve.add_argument("--tau", type=float, help="primal step size")
    solve.add_argument("--sigma", type=float, help="dual step size")
    solve.add_argument("--tol", type=float, default=1e-6, help="fixed-point residual target")
    solve.add_argument("--max-iters", type=int, default=500_000)
    solve.add_argument("--check-every", type=int, default=10)
    solve.add_argument("--force-steps", action="store_true", help="run despite the step condition")
    solve.add_argument("--out", help="trajectory CSV path (default: stdout)")
    solve.add_argument("--residuals", help="residual log path (iteration,residual lines)")
    solve.add_argument("--plot", help="plot excitations and responses to this file")
    solve.set_defaults(handler=_cmd_solve)

    compile_ = sub.add_parser("compile", help="derive the hybrid structure and write a problem document")
    compile_.add_argument("--netlist", required=True)
    compile_.add_argument("--out", required=True, help="problem document path")
    compile_.add_argument("--partition", help="comma-separated pins name=Z|Y|V|I")
    compile_.add_argument("--samples", type=int)
    compile_.add_argument("--dt", type=float)
    compile_.add_argument("--excite", action="append", default=[], metavar="PORT=SPEC")
    compile_.add_argument("--print-hybrid", action="store_true", help="print the derived hybrid matrix")
    compile_.set_defaults(handler=_cmd_compile)

    simulate = sub.add_parser("simulate", help="backward-Euler time-marching cross-check")
    simulate.add_argument("--problem", required=True, help="problem document (JSON)")
    simulate.add_argument("--periods", type=int, required=True, help="whole periods to march")
    simulate.add_argument("--smooth", type=float, default=1e-6, metavar="EPS",
                          help="diode smoothing slope (default 1e-6)")
    simulate.add_argument("--tau", type=float, help="per-step primal step size")
    simulate.add_argument("--sigma", type=float, help="per-step dual step size")
    simulate.add_argument("--step-tol", type=float, default=1e-9)
    simulate.add_argument("--max-step-iters", type=int, default=500_000)
    simulate.add_argument("--out", help="final-period CSV path (default: stdout)")
    simulate.set_defaults(handler=_cmd_simulate)

    plot = sub.add_parser("plot", help="plot CSV columns against time")
    plot.add_argument("--csv", required=True)
    plot.add_argument("--columns", required=True, help="comma-separated column names")
    plot.add_argument("--out", required=True, help="output image (.svg, .pdf, .png)")
    plot.add_argument(
        "--scale",
        action="append",
        default=[],
        metavar="COL=FACTOR",
        help="multiply a column for display; FACTOR may be a ratio like 1/24",
    )
    plot.set_defaults(handler=_cmd_plot)
    return parser


def parse_waveform_spec(text: str) -> Waveform:
    """CLI waveform syntax: sine:AMP,HZ[,PHASE] | const:LEVEL | tab:v0,v1,..."""
    kind, _, argtext = text.partition(":")
    kind = kind.strip().lower()
    fields = [f for f in argtext.split(",") if f.strip()] if argtext else []
    try:
        if kind == "sine":
            if len(fields) not in (2, 3):
                raise ValueError("sine takes amplitude,frequency[,phase]")
            return Sine(float(fields[0]), float(fields[1]), float(fields[2]) if len(fields) == 3 else 0.0)
        if kind in ("const", "constant"):
            if len(fields) != 1:
                raise ValueError("constant takes a single level")
            return Constant(float(fields[0]))
        if kind in ("tab", "tabulated"):
            return Tabulated(tuple(float(f) for f in fields))
    except ValueError as exc:
        raise PmonoError(f"bad waveform spec {text!r}: {exc}") from exc
    raise PmonoError(f"unknown waveform kind in {text!r} (use sine/const/tab)")


def _parse_excites(specs) -> dict[str, Waveform]:
    excitations = {}
    for spec in specs:
        name, sep, rest = spec.partition("=")
        if not sep or not name:
            raise PmonoError(f"bad --excite {spec!r}; expected PORT=SPEC")
        excitations[name.strip()] = parse_waveform_spec(rest.strip())
    return excitations


def _parse_pins(text) -> dict[str, str]:
    pins = {}
    if not text:
        return pins
    for item in text.split(","):
        name, sep, value = item.partition("=")
        value = value.strip().upper()
        if not sep or value not in ("Z", "Y", "V", "I"):
            raise PmonoError(f"bad --partition entry {item!r}; expected name=Z|Y|V|I")
        pins[name.strip()] = value
    return pins


def _load_problem_for_solve(args) -> Problem:
    if args.problem:
        return document_to_problem(load_document(args.problem))
    netlist = parse_netlist(_read_text(args.netlist))
    if args.samples is None or args.dt is None:
        raise PmonoError("netlist mode needs --samples and --dt")
    grid = Grid(args.samples, args.dt)
    partition = partition_search(netlist, _parse_pins(args.partition))
    return compile_problem(netlist, partition, grid, _parse_excites(args.excite))


def _read_text(path) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def format_value(value: float) -> str:
    return f"{value:.17g}"


def write_trajectories(handle, problem: Problem, result: SolverResult) -> None:
    labels = (
        ("t",)
        + problem.excitation.labels
        + result.outputs.labels
        + result.currents.labels
        + result.voltages.labels
    )
    handle.write(",".join(labels) + "\n")
    columns = np.vstack(
        [
            problem.grid.times,
            problem.excitation.values,
            result.outputs.values,
            result.currents.values,
            result.voltages.values,
        ]
    )
    for k in range(problem.grid.samples):
        handle.write(",".join(format_value(x) for x in columns[:, k]) + "\n")
    if not result.converged:
        handle.write("# converged=false\n")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line.strip() for line in handle]
    lines = [line for line in lines if line and not line.startswith("#")]
    if not lines:
        raise PmonoError(f"{path}: empty CSV")
    header = [name.strip() for name in lines[0].split(",")]
    rows = []
    for line in lines[1:]:
        fields = line.split(",")
        if len(fields) != len(header):
            raise PmonoError(f"{path}: row with {len(fields)} fields, header has {len(header)}")
        rows.append([float(f) for f in fields])
    if not rows:
        raise PmonoError(f"{path}: no data rows")
    return header, np.array(rows).T


def _cmd_solve(args) -> int:
    problem = _load_problem_for_solve(args)
    if args.tau is None or args.sigma is None:
        tau, sigma = default_step_sizes(problem.ic.coupling)
        tau = args.tau if args.tau is not None else tau
        sigma = args.sigma if args.sigma is not None else sigma
    else:
        tau, sigma = args.tau, args.sigma
    config = SolverConfig(
        tau=tau,
        sigma=sigma,
        max_iters=args.max_iters,
        tol=args.tol,
        check_every=args.check_every,
        force_steps=args.force_steps,
    )
    started = time.perf_counter()
    try:
        result = condat_vu_solve(problem, config)
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - started

    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            write_trajectories(handle, problem, result)
    else:
        write_trajectories(sys.stdout, problem, result)
    if args.residuals:
        with open(args.residuals, "w", encoding="utf-8") as handle:
            for iteration, residual in result.residual_history:
                handle.write(f"{iteration},{format_value(residual)}\n")
    if args.plot:
        _plot_bundles(args.plot, problem, result)
    status = "converged" if result.converged else "did not converge"
    print(
        f"{status}: {result.iterations} iterations, "
        f"final residual {result.residual_history[-1][1]:.3e}, {elapsed:.2f}s",
        file=sys.stderr,
    )
    return 0 if result.converged else 2


def _cmd_compile(args) -> int:
    netlist = parse_netlist(_read_text(args.netlist))
    partition = partition_search(netlist, _parse_pins(args.partition))
    derived = derive_hybrid(netlist, partition)
    if args.print_hybrid:
        print("hybrid matrix rows (outputs " + ", ".join(derived.output_labels) + ")")
        print("            columns (inputs  " + ", ".join(derived.input_labels) + ")")
        for row in derived.hybrid.matrix:
            print("  [" + ", ".join(format_value(x) for x in row) + "]")
    grid = None
    if args.samples is not None and args.dt is not None:
        grid = Grid(args.samples, args.dt)
    excitations = _parse_excites(args.excite) or None
    elements = [
        (name, netlist.element(name).kind, netlist.element(name).params, form)
        for name, form in (
            [(el, "Z") for el in derived.impedance_elements]
            + [(el, "Y") for el in derived.admittance_elements]
        )
    ]
    doc = document_from_parts(
        derived.ic,
        elements,
        derived.port_names,
        derived.port_excitations,
        grid=grid,
        excitations=excitations,
    )
    save_document(doc, args.out)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _cmd_simulate(args) -> int:
    problem = document_to_problem(load_document(args.problem))
    problem = smooth_problem(problem, args.smooth)
    try:
        march = march_periods(
            problem,
            args.periods,
            tau=args.tau,
            sigma=args.sigma,
            step_tol=args.step_tol,
            max_step_iters=args.max_step_iters,
        )
    except StepNonConvergence as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 2
    labels = (
        ("t",)
        + problem.excitation.labels
        + march.outputs.labels
        + march.currents.labels
        + march.voltages.labels
    )
    columns = np.vstack(
        [
            problem.grid.times,
            problem.excitation.values,
            march.outputs.values,
            march.currents.values,
            march.voltages.values,
        ]
    )

    def emit(handle):
        handle.write(",".join(labels) + "\n")
        for k in range(problem.grid.samples):
            handle.write(",".join(format_value(x) for x in columns[:, k]) + "\n")

    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            emit(handle)
    else:
        emit(sys.stdout)
    print(
        f"marched {march.steps} steps (worst step took {march.worst_step_iterations} sweeps)",
        file=sys.stderr,
    )
    return 0


def _plot_bundles(path, problem: Problem, result: SolverResult) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    t = problem.grid.times
    for label, series in zip(problem.excitation.labels, problem.excitation.values):
        ax.plot(t, series, "--", label=label)
    for label, series in zip(result.outputs.labels, result.outputs.values):
        ax.plot(t, series, label=label)
    ax.set_xlabel("t (s)")
    ax.grid(True, linewidth=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _parse_factor(text: str) -> float:
    num, sep, den = text.partition("/")
    try:
        if sep:
            return float(num) / float(den)
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise PmonoError(f"bad scale factor {text!r}") from exc


def _cmd_plot(args) -> int:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    header, data = read_csv(args.csv)
    if "t" not in header:
        raise PmonoError(f"{args.csv}: no t column")
    scales = {}
    for item in args.scale:
        name, sep, factor_text = item.partition("=")
        if not sep:
            raise PmonoError(f"bad --scale entry {item!r}; expected COL=FACTOR")
        scales[name.strip()] = (factor_text.strip(), _parse_factor(factor_text.strip()))
    t = data[header.index("t")]
    wanted = [name.strip() for name in args.columns.split(",") if name.strip()]
    if not wanted:
        raise PmonoError("no columns requested")
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    for name in wanted:
        if name not in header:
            raise PmonoError(f"{args.csv}: unknown column {name!r} (have {', '.join(header)})")
        series = data[header.index(name)]
        label = name
        if name in scales:
            text, factor = scales[name]
            series = series * factor
            label = f"{text}*{name}"
        ax.plot(t, series, label=label)
    ax.set_xlabel("t (s)")
    ax.grid(True, linewidth=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out)
    plt.close(fig)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0
