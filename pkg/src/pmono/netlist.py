"""Netlist parsing and compilation to the structured inclusion form.

The netlist names ports, one-port elements, and transformer windings over
a shared node set.  Deriving the hybrid representation pulls every element
out to an internal port of the lossless wires-and-transformers core, sets
up Kirchhoff's laws plus the ideal transformer constraints, and eliminates
the internal variables so that the chosen independent variables (port
excitations, impedance-block currents, admittance-block voltages) map
linearly onto the dependent ones.  The resulting matrix is validated to be
skew-symmetric, which is the structural certificate that the elimination
preserved losslessness.

Orientation conventions (these fix every sign in the derived matrices):

* a branch ``X name a b`` has voltage phi_a - phi_b, and its current flows
  out of node ``a`` through the attached device and back into node ``b``,
  so current * voltage is the power extracted from the wire core;
* ``D name anode cathode`` conducts from anode to cathode;
* windings of one transformer group share a flux variable; each winding's
  voltage is its turns value times the flux, and the turns-weighted sum of
  winding currents vanishes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

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
)
from .errors import (
    ConfigurationError,
    NoRepresentationError,
    ParseError,
)
from .signal import Grid, SignalBundle, Waveform, make_waveform
from .solver import Problem
from .structure import HybridMatrix, Interconnection

__all__ = [
    "PortBranch",
    "ElementBranch",
    "WindingBranch",
    "Netlist",
    "Partition",
    "DerivedHybrid",
    "parse_netlist",
    "admissible_forms",
    "build_law",
    "derive_hybrid",
    "partition_search",
    "compile_problem",
]

@dataclass(frozen=True)
class PortBranch:
    name: str
    positive: str
    negative: str
    line: int = 0


@dataclass(frozen=True)
class ElementBranch:
    name: str
    kind: str
    positive: str
    negative: str
    params: tuple = ()
    line: int = 0


@dataclass(frozen=True)
class WindingBranch:
    group: str
    name: str
    positive: str
    negative: str
    turns: float
    line: int = 0


@dataclass(frozen=True)
class Netlist:
    ports: tuple[PortBranch, ...]
    elements: tuple[ElementBranch, ...]
    windings: tuple[WindingBranch, ...]
    form_pins: Mapping[str, str] = field(default_factory=dict)
    excite_pins: Mapping[str, str] = field(default_factory=dict)
    ground: str | None = None

    @property
    def nodes(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for branch in (*self.ports, *self.elements, *self.windings):
            seen.setdefault(branch.positive)
            seen.setdefault(branch.negative)
        return tuple(seen)

    def element(self, name: str) -> ElementBranch:
        for el in self.elements:
            if el.name == name:
                return el
        raise KeyError(name)


@dataclass(frozen=True)
class Partition:
    """Complete per-element form and per-port excitation choices."""

    element_forms: Mapping[str, str]  # name -> "Z" (impedance) or "Y" (admittance)
    port_excitations: Mapping[str, str]  # name -> "V" or "I"

    def describe(self) -> str:
        forms = ",".join(f"{k}={v}" for k, v in self.element_forms.items())
        ports = ",".join(f"{k}={v}" for k, v in self.port_excitations.items())
        return f"{forms} / {ports}" if forms else ports


def _tokenize(line: str):
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _number(token: str, lineno: int, col: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"malformed number {token!r}", lineno, col) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite number {token!r}", lineno, col)
    return value


def parse_netlist(text: str) -> Netlist:
    """Parse the line-oriented netlist grammar; raises ParseError with location."""
    ports: list[PortBranch] = []
    elements: list[ElementBranch] = []
    windings: list[WindingBranch] = []
    form_pins: dict[str, str] = {}
    excite_pins: dict[str, str] = {}
    names: dict[str, int] = {}

    def claim_name(name, lineno, col):
        if name in names:
            raise ParseError(f"duplicate name {name!r} (first used on line {names[name]})", lineno, col)
        names[name] = lineno

    def need(tokens, count, lineno, what, exact=True):
        if len(tokens) < count:
            missing_at = tokens[-1][1] + len(tokens[-1][0]) if tokens else 1
            raise ParseError(f"{what}: expected {count - 1} fields", lineno, missing_at)
        if exact and len(tokens) > count:
            raise ParseError(
                f"{what}: unexpected extra field {tokens[count][0]!r}",
                lineno,
                tokens[count][1],
            )

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = _tokenize(line)
        if not tokens:
            continue
        directive = tokens[0][0].upper()
        if directive == "PORT":
            need(tokens, 4, lineno, "PORT <name> <node+> <node->")
            name = tokens[1][0]
            claim_name(name, lineno, tokens[1][1])
            ports.append(PortBranch(name, tokens[2][0], tokens[3][0], lineno))
        elif directive in ("R", "C", "L"):
            need(tokens, 5, lineno, f"{directive} <name> <n+> <n-> <value>")
            name = tokens[1][0]
            claim_name(name, lineno, tokens[1][1])
            value = _number(tokens[4][0], lineno, tokens[4][1])
            if value < 0:
                raise ParseError(f"{directive} value must be >= 0", lineno, tokens[4][1])
            elements.append(
                ElementBranch(name, directive, tokens[2][0], tokens[3][0], (value,), lineno)
            )
        elif directive == "D":
            need(tokens, 4, lineno, "D <name> <anode> <cathode>")
            name = tokens[1][0]
            claim_name(name, lineno, tokens[1][1])
            elements.append(ElementBranch(name, "D", tokens[2][0], tokens[3][0], (), lineno))
        elif directive == "RC":
            need(tokens, 6, lineno, "RC <name> <n+> <n-> <ohms> <farads>")
            name = tokens[1][0]
            claim_name(name, lineno, tokens[1][1])
            ohms = _number(tokens[4][0], lineno, tokens[4][1])
            farads = _number(tokens[5][0], lineno, tokens[5][1])
            if ohms < 0 or farads < 0:
                raise ParseError("RC values must be >= 0", lineno, tokens[4][1])
            elements.append(
                ElementBranch(name, "RC", tokens[2][0], tokens[3][0], (ohms, farads), lineno)
            )
        elif directive == "PWL":
            need(tokens, 8, lineno, "PWL <name> <n+> <n-> <x0> <y0> <x1> <y1> ...", exact=False)
            name = tokens[1][0]
            claim_name(name, lineno, tokens[1][1])
            coords = [_number(tok, lineno, col) for tok, col in tokens[4:]]
            if len(coords) % 2:
                raise ParseError("PWL needs an even number of coordinates", lineno, tokens[-1][1])
            points = tuple(zip(coords[0::2], coords[1::2]))
            try:
                PwlResistor(points)
            except ValueError as exc:
                raise ParseError(str(exc), lineno, tokens[4][1]) from None
            elements.append(
                ElementBranch(name, "PWL", tokens[2][0], tokens[3][0], points, lineno)
            )
        elif directive == "XFMR":
            need(tokens, 6, lineno, "XFMR <group> <name> <n+> <n-> <turns>")
            group, name = tokens[1][0], tokens[2][0]
            claim_name(name, lineno, tokens[2][1])
            turns = _number(tokens[5][0], lineno, tokens[5][1])
            if turns == 0:
                raise ParseError("winding turns must be nonzero", lineno, tokens[5][1])
            windings.append(WindingBranch(group, name, tokens[3][0], tokens[4][0], turns, lineno))
        elif directive == "FORM":
            need(tokens, 3, lineno, "FORM <element-name> Z|Y")
            target, value = tokens[1][0], tokens[2][0].upper()
            if value not in ("Z", "Y"):
                raise ParseError(f"FORM value must be Z or Y, got {tokens[2][0]!r}", lineno, tokens[2][1])
            if target in form_pins:
                raise ParseError(f"duplicate FORM pin for {target!r}", lineno, tokens[1][1])
            form_pins[target] = value
        elif directive == "EXCITE":
            need(tokens, 3, lineno, "EXCITE <port-name> V|I")
            target, value = tokens[1][0], tokens[2][0].upper()
            if value not in ("V", "I"):
                raise ParseError(f"EXCITE value must be V or I, got {tokens[2][0]!r}", lineno, tokens[2][1])
            if target in excite_pins:
                raise ParseError(f"duplicate EXCITE pin for {target!r}", lineno, tokens[1][1])
            excite_pins[target] = value
        else:
            raise ParseError(f"unknown directive {tokens[0][0]!r}", lineno, tokens[0][1])

    if not ports and not elements and not windings:
        raise ParseError("no branches", 1, 1)

    netlist = Netlist(
        ports=tuple(ports),
        elements=tuple(elements),
        windings=tuple(windings),
        form_pins=form_pins,
        excite_pins=excite_pins,
    )
    _validate_topology(netlist)
    element_names = {el.name for el in netlist.elements}
    port_names = {port.name for port in netlist.ports}
    for target, value in form_pins.items():
        if target not in element_names:
            raise ParseError(f"FORM pin targets unknown element {target!r}")
        element = netlist.element(target)
        if value not in admissible_forms(element):
            raise ParseError(
                f"element {target!r} ({element.kind}) does not admit form {value}"
            )
    for target in excite_pins:
        if target not in port_names:
            raise ParseError(f"EXCITE pin targets unknown port {target!r}")
    return netlist


def _validate_topology(netlist: Netlist) -> None:
    branches = (*netlist.ports, *netlist.elements, *netlist.windings)
    touch: dict[str, int] = {}
    for branch in branches:
        if branch.positive == branch.negative:
            raise ParseError(
                f"branch {branch.name!r} connects node {branch.positive!r} to itself",
                branch.line,
            )
        touch[branch.positive] = touch.get(branch.positive, 0) + 1
        touch[branch.negative] = touch.get(branch.negative, 0) + 1
    for node, count in touch.items():
        if count < 2:
            raise ParseError(f"dangling node {node!r} (only one attachment)")
    groups: dict[str, list[WindingBranch]] = {}
    for w in netlist.windings:
        groups.setdefault(w.group, []).append(w)
    for group, members in groups.items():
        if len(members) < 2:
            raise ParseError(f"transformer group {group!r} has a single winding")
    # connectivity: winding groups tie their islands magnetically, which counts
    adjacency: dict[str, set[str]] = {node: set() for node in touch}
    for branch in branches:
        adjacency[branch.positive].add(branch.negative)
        adjacency[branch.negative].add(branch.positive)
    for members in groups.values():
        for a, b in zip(members, members[1:]):
            adjacency[a.positive].add(b.positive)
            adjacency[b.positive].add(a.positive)
    start = next(iter(adjacency))
    seen = {start}
    stack = [start]
    while stack:
        for nxt in adjacency[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    if len(seen) != len(adjacency):
        missing = sorted(set(adjacency) - seen)
        raise ParseError(f"netlist graph is not connected (unreachable: {', '.join(missing)})")


def _islands(netlist: Netlist) -> list[list[str]]:
    """Connected components over galvanic (wire-level) connections only."""
    adjacency: dict[str, set[str]] = {}
    order: list[str] = []

    def node(n):
        if n not in adjacency:
            adjacency[n] = set()
            order.append(n)

    for branch in (*netlist.ports, *netlist.elements, *netlist.windings):
        node(branch.positive)
        node(branch.negative)
        adjacency[branch.positive].add(branch.negative)
        adjacency[branch.negative].add(branch.positive)
    islands = []
    seen: set[str] = set()
    for start in order:
        if start in seen:
            continue
        component = []
        stack = [start]
        seen.add(start)
        while stack:
            current = stack.pop()
            component.append(current)
            for nxt in sorted(adjacency[current]):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        islands.append(component)
    return islands


def admissible_forms(element: ElementBranch) -> tuple[str, ...]:
    """Allowed partition forms in search preference order (impedance first)."""
    if element.kind == "R":
        return ("Z", "Y") if element.params[0] > 0 else ("Z",)
    if element.kind == "C":
        return ("Y",)
    if element.kind == "L":
        return ("Z",)
    if element.kind in ("D", "PWL"):
        return ("Z", "Y")
    if element.kind == "RC":
        return ("Z",)
    raise ConfigurationError(f"unknown element kind {element.kind!r}")


def build_law(element: ElementBranch, form: str) -> ElementLaw:
    if form not in admissible_forms(element):
        raise ConfigurationError(
            f"element {element.name!r} ({element.kind}) does not admit form {form}"
        )
    if element.kind == "R":
        return ResistorImpedance(element.params[0]) if form == "Z" else ResistorAdmittance(
            1.0 / element.params[0]
        )
    if element.kind == "C":
        return CapacitorAdmittance(element.params[0])
    if element.kind == "L":
        return InductorImpedance(element.params[0])
    if element.kind == "D":
        return DiodeImpedance() if form == "Z" else DiodeAdmittance()
    if element.kind == "RC":
        return ParallelRCImpedance(*element.params)
    if element.kind == "PWL":
        law = PwlResistor(element.params)
        return law if form == "Z" else law.swapped()
    raise ConfigurationError(f"unknown element kind {element.kind!r}")


@dataclass(frozen=True)
class DerivedHybrid:
    """Hybrid map plus the bookkeeping of which physical variable sits where."""

    hybrid: HybridMatrix
    ic: Interconnection
    port_names: tuple[str, ...]
    port_excitations: tuple[str, ...]
    impedance_elements: tuple[str, ...]
    admittance_elements: tuple[str, ...]
    input_labels: tuple[str, ...]
    output_labels: tuple[str, ...]


def _complete_partition(netlist: Netlist, partition: Partition) -> Partition:
    forms = dict(partition.element_forms)
    excitations = dict(partition.port_excitations)
    for el in netlist.elements:
        if el.name not in forms:
            raise ConfigurationError(f"partition misses a form for element {el.name!r}")
        if forms[el.name] not in admissible_forms(el):
            raise ConfigurationError(
                f"element {el.name!r} ({el.kind}) does not admit form {forms[el.name]}"
            )
    for port in netlist.ports:
        if port.name not in excitations:
            raise ConfigurationError(f"partition misses an excitation kind for port {port.name!r}")
        if excitations[port.name] not in ("V", "I"):
            raise ConfigurationError(f"excitation kind must be V or I for port {port.name!r}")
    unknown = set(forms) - {el.name for el in netlist.elements}
    unknown |= set(excitations) - {port.name for port in netlist.ports}
    if unknown:
        raise ConfigurationError(f"partition names unknown branches: {sorted(unknown)}")
    return Partition(forms, excitations)


def _eliminate(matrix: np.ndarray, rhs: np.ndarray, tol_factor: float = 1e-10):
    """Gaussian elimination with partial pivoting; None when a pivot collapses.

    The pivot tolerance is relative to the largest entry of the system, so a
    structurally singular elimination (no hybrid representation for this
    partition) is distinguished from roundoff on the small integer and
    turns-ratio entries that actually occur.
    """
    a = matrix.astype(float).copy()
    b = rhs.astype(float).copy()
    n = a.shape[0]
    if n == 0:
        return b
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return None
    tol = tol_factor * scale
    for k in range(n):
        pivot = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[pivot, k]) <= tol:
            return None
        if pivot != k:
            a[[k, pivot]] = a[[pivot, k]]
            b[[k, pivot]] = b[[pivot, k]]
        factors = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k:] -= np.outer(factors, a[k, k:])
        b[k + 1 :] -= np.outer(factors, b[k])
    x = np.zeros_like(b)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x


def derive_hybrid(netlist: Netlist, partition: Partition) -> DerivedHybrid:
    """Eliminate the wire core to the skew hybrid map for this partition.

    Raises NoRepresentationError when the elimination is singular, meaning
    the chosen independent variables are not independent for this circuit
    (for instance two voltage-excited ports wired in parallel).
    """
    partition = _complete_partition(netlist, partition)
    ports = list(netlist.ports)
    imp_elements = [el for el in netlist.elements if partition.element_forms[el.name] == "Z"]
    adm_elements = [el for el in netlist.elements if partition.element_forms[el.name] == "Y"]
    attachments = ports + imp_elements + adm_elements
    total = len(attachments)
    m, p, q = len(ports), len(imp_elements), len(adm_elements)

    islands = _islands(netlist)
    references = set()
    for island in islands:
        if netlist.ground is not None and netlist.ground in island:
            references.add(netlist.ground)
        else:
            references.add(island[0])
    free_nodes = [n for n in netlist.nodes if n not in references]
    groups = list(dict.fromkeys(w.group for w in netlist.windings))

    # variable layout: i_k, v_k per attachment, then node potentials,
    # winding fluxes, winding currents
    n_vars = 2 * total + len(free_nodes) + len(groups) + len(netlist.windings)
    current_col = {k: k for k in range(total)}
    voltage_col = {k: total + k for k in range(total)}
    node_col = {node: 2 * total + j for j, node in enumerate(free_nodes)}
    flux_col = {g: 2 * total + len(free_nodes) + j for j, g in enumerate(groups)}
    winding_col = {
        w.name: 2 * total + len(free_nodes) + len(groups) + j
        for j, w in enumerate(netlist.windings)
    }

    rows = []
    # attachment voltage definitions: v_k - (phi+ - phi-) = 0
    for k, branch in enumerate(attachments):
        row = np.zeros(n_vars)
        row[voltage_col[k]] = 1.0
        if branch.positive in node_col:
            row[node_col[branch.positive]] -= 1.0
        if branch.negative in node_col:
            row[node_col[branch.negative]] += 1.0
        rows.append(row)
    # Kirchhoff current law at every non-reference node
    for node in free_nodes:
        row = np.zeros(n_vars)
        for k, branch in enumerate(attachments):
            if branch.positive == node:
                row[current_col[k]] += 1.0
            if branch.negative == node:
                row[current_col[k]] -= 1.0
        for w in netlist.windings:
            if w.positive == node:
                row[winding_col[w.name]] += 1.0
            if w.negative == node:
                row[winding_col[w.name]] -= 1.0
        rows.append(row)
    # winding voltages tie to the group flux
    for w in netlist.windings:
        row = np.zeros(n_vars)
        if w.positive in node_col:
            row[node_col[w.positive]] += 1.0
        if w.negative in node_col:
            row[node_col[w.negative]] -= 1.0
        row[flux_col[w.group]] -= w.turns
        rows.append(row)
    # magnetomotive balance per group
    for g in groups:
        row = np.zeros(n_vars)
        for w in netlist.windings:
            if w.group == g:
                row[winding_col[w.name]] += w.turns
        rows.append(row)
    system = np.array(rows) if rows else np.zeros((0, n_vars))

    input_cols, input_labels = [], []
    output_cols, output_labels = [], []
    excitations = []
    for k, port in enumerate(ports):
        kind = partition.port_excitations[port.name]
        excitations.append(kind)
        if kind == "V":
            input_cols.append(voltage_col[k])
            input_labels.append(f"v_{port.name}")
            output_cols.append(current_col[k])
            output_labels.append(f"i_{port.name}")
        else:
            input_cols.append(current_col[k])
            input_labels.append(f"i_{port.name}")
            output_cols.append(voltage_col[k])
            output_labels.append(f"v_{port.name}")
    for offset, el in enumerate(imp_elements):
        k = m + offset
        input_cols.append(current_col[k])
        input_labels.append(f"i_{el.name}")
        output_cols.append(voltage_col[k])
        output_labels.append(f"v_{el.name}")
    for offset, el in enumerate(adm_elements):
        k = m + p + offset
        input_cols.append(voltage_col[k])
        input_labels.append(f"v_{el.name}")
        output_cols.append(current_col[k])
        output_labels.append(f"i_{el.name}")

    internal_cols = (
        [node_col[n] for n in free_nodes]
        + [flux_col[g] for g in groups]
        + [winding_col[w.name] for w in netlist.windings]
    )
    unknown_cols = output_cols + internal_cols
    a_x = system[:, unknown_cols]
    a_s = system[:, input_cols]
    if a_x.shape[0] != a_x.shape[1]:
        raise NoRepresentationError(
            f"constraint system is not square ({a_x.shape[0]} equations, "
            f"{a_x.shape[1]} unknowns); the netlist is inconsistent"
        )
    solution = _eliminate(a_x, -a_s)
    if solution is None:
        raise NoRepresentationError(
            f"no hybrid representation for partition [{partition.describe()}]"
        )
    hybrid = HybridMatrix(solution[: m + p + q], m, p, q)
    return DerivedHybrid(
        hybrid=hybrid,
        ic=hybrid.interconnection(),
        port_names=tuple(port.name for port in ports),
        port_excitations=tuple(excitations),
        impedance_elements=tuple(el.name for el in imp_elements),
        admittance_elements=tuple(el.name for el in adm_elements),
        input_labels=tuple(input_labels),
        output_labels=tuple(output_labels),
    )


def partition_search(
    netlist: Netlist, fixed_choices: Mapping[str, str] | None = None
) -> Partition:
    """First partition (deterministic depth-first order) admitting a hybrid form.

    Elements are scanned in netlist order trying impedance before admittance;
    ports follow, trying voltage excitation before current.  FORM/EXCITE pins
    in the netlist and entries of ``fixed_choices`` (which win on conflict)
    freeze their branch's choice.
    """
    pins: dict[str, str] = dict(netlist.form_pins)
    pins.update({k: v.upper() for k, v in dict(netlist.excite_pins).items()})
    if fixed_choices:
        for name, value in fixed_choices.items():
            pins[name] = value.upper()

    element_names = {el.name for el in netlist.elements}
    port_names = {port.name for port in netlist.ports}
    for name, value in pins.items():
        if name in element_names:
            if value not in admissible_forms(netlist.element(name)):
                raise ConfigurationError(f"element {name!r} does not admit form {value}")
        elif name in port_names:
            if value not in ("V", "I"):
                raise ConfigurationError(f"port {name!r} excitation must be V or I")
        else:
            raise ConfigurationError(f"pin names unknown branch {name!r}")

    slots: list[tuple[str, tuple[str, ...]]] = []
    for el in netlist.elements:
        options = (pins[el.name],) if el.name in pins else admissible_forms(el)
        slots.append((el.name, options))
    for port in netlist.ports:
        options = (pins[port.name],) if port.name in pins else ("V", "I")
        slots.append((port.name, options))

    n_elements = len(netlist.elements)
    attempted: list[str] = []

    def walk(index: int, chosen: list[str]):
        if index == len(slots):
            partition = Partition(
                {slots[j][0]: chosen[j] for j in range(n_elements)},
                {slots[j][0]: chosen[j] for j in range(n_elements, len(slots))},
            )
            try:
                derive_hybrid(netlist, partition)
            except NoRepresentationError:
                attempted.append(partition.describe())
                return None
            return partition
        for option in slots[index][1]:
            found = walk(index + 1, chosen + [option])
            if found is not None:
                return found
        return None

    result = walk(0, [])
    if result is None:
        tried = "; ".join(attempted[:64])
        more = "" if len(attempted) <= 64 else f" (and {len(attempted) - 64} more)"
        raise NoRepresentationError(
            f"no partition admits a hybrid representation; attempted: {tried}{more}"
        )
    return result


def compile_problem(
    netlist: Netlist,
    partition: Partition,
    grid: Grid,
    excitations: Mapping[str, Waveform],
) -> Problem:
    """Bind the derived structure and element laws to excitation waveforms."""
    derived = derive_hybrid(netlist, partition)
    partition = _complete_partition(netlist, partition)
    impedance_laws = tuple(
        build_law(netlist.element(name), "Z") for name in derived.impedance_elements
    )
    admittance_laws = tuple(
        build_law(netlist.element(name), "Y") for name in derived.admittance_elements
    )
    unknown = set(excitations) - set(derived.port_names)
    if unknown:
        raise ConfigurationError(f"excitations name unknown ports: {sorted(unknown)}")
    channels = []
    labels = []
    for name, kind in zip(derived.port_names, derived.port_excitations):
        if name not in excitations:
            raise ConfigurationError(f"missing excitation for port {name!r}")
        channels.append(make_waveform(excitations[name], grid).values)
        labels.append(f"{'v' if kind == 'V' else 'i'}_{name}")
    u = SignalBundle(
        grid,
        np.stack(channels) if channels else np.zeros((0, grid.samples)),
        tuple(labels),
    )
    return Problem(
        grid=grid,
        ic=derived.ic,
        impedance_block=DiagonalOperator(impedance_laws, "impedance"),
        admittance_block=DiagonalOperator(admittance_laws, "admittance"),
        excitation=u,
        current_labels=tuple(f"i_{name}" for name in derived.impedance_elements),
        voltage_labels=tuple(f"v_{name}" for name in derived.admittance_elements),
        response_labels=tuple(
            f"{'i' if kind == 'V' else 'v'}_{name}"
            for name, kind in zip(derived.port_names, derived.port_excitations)
        ),
    )
