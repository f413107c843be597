"""Problem documents: the on-disk JSON form of a compiled circuit.

The document records the sampling grid, the structure blocks (row-major),
the ordered element laws with their block forms, the per-port excitation
descriptors and the channel labels.  Numbers are written with Python's
shortest-roundtrip float repr, so save/load is bit exact.
"""

from __future__ import annotations

import json
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
from .errors import ConfigurationError, ParseError
from .signal import Constant, Grid, SignalBundle, Sine, Tabulated, Waveform, make_waveform
from .solver import Problem
from .structure import Interconnection

__all__ = [
    "waveform_to_dict",
    "waveform_from_dict",
    "document_from_parts",
    "document_to_problem",
    "save_document",
    "load_document",
]


def waveform_to_dict(descriptor: Waveform, port: str | None = None) -> dict:
    if isinstance(descriptor, Sine):
        entry = {
            "kind": "sine",
            "amplitude": descriptor.amplitude,
            "frequency_hz": descriptor.frequency_hz,
            "phase_rad": descriptor.phase_rad,
        }
    elif isinstance(descriptor, Constant):
        entry = {"kind": "constant", "level": descriptor.level}
    elif isinstance(descriptor, Tabulated):
        entry = {"kind": "tabulated", "values": list(descriptor.values)}
    else:
        raise ConfigurationError(f"unknown waveform descriptor {descriptor!r}")
    if port is not None:
        entry = {"port": port, **entry}
    return entry


def waveform_from_dict(entry: Mapping) -> Waveform:
    kind = entry.get("kind")
    try:
        if kind == "sine":
            return Sine(
                float(entry["amplitude"]),
                float(entry["frequency_hz"]),
                float(entry.get("phase_rad", 0.0)),
            )
        if kind == "constant":
            return Constant(float(entry["level"]))
        if kind == "tabulated":
            return Tabulated(tuple(float(v) for v in entry["values"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad {kind!r} waveform entry: {exc}") from exc
    raise ParseError(f"unknown waveform kind {kind!r}")


_LAW_PARAM_KEYS = {
    "R": ("ohms",),
    "C": ("farads",),
    "L": ("henries",),
    "D": (),
    "RC": ("ohms", "farads"),
    "PWL": ("breakpoints",),
}


def _law_entry(name: str, kind: str, params: tuple, form: str) -> dict:
    keys = _LAW_PARAM_KEYS[kind]
    if kind == "PWL":
        payload = {"breakpoints": [list(point) for point in params]}
    else:
        payload = dict(zip(keys, params))
    return {"name": name, "law": kind, "params": payload, "form": form}


def _law_from_entry(entry: Mapping) -> tuple[str, str, ElementLaw]:
    try:
        name = entry["name"]
        kind = entry["law"]
        form = entry["form"]
        params = entry.get("params", {})
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad element entry {entry!r}: {exc}") from exc
    if form not in ("Z", "Y"):
        raise ParseError(f"element {name!r}: form must be Z or Y, got {form!r}")
    if kind == "R":
        ohms = float(params["ohms"])
        law = ResistorImpedance(ohms) if form == "Z" else ResistorAdmittance(1.0 / ohms)
    elif kind == "C":
        if form != "Y":
            raise ParseError(f"capacitor {name!r} must be admittance form")
        law = CapacitorAdmittance(float(params["farads"]))
    elif kind == "L":
        if form != "Z":
            raise ParseError(f"inductor {name!r} must be impedance form")
        law = InductorImpedance(float(params["henries"]))
    elif kind == "D":
        law = DiodeImpedance() if form == "Z" else DiodeAdmittance()
    elif kind == "RC":
        if form != "Z":
            raise ParseError(f"parallel RC {name!r} must be impedance form")
        law = ParallelRCImpedance(float(params["ohms"]), float(params["farads"]))
    elif kind == "PWL":
        curve = PwlResistor(tuple(tuple(point) for point in params["breakpoints"]))
        law = curve if form == "Z" else curve.swapped()
    else:
        raise ParseError(f"element {name!r}: unknown law {kind!r}")
    return name, form, law


def document_from_parts(
    ic: Interconnection,
    elements: list[tuple[str, str, tuple, str]],
    port_names: tuple[str, ...],
    port_excitations: tuple[str, ...],
    grid: Grid | None = None,
    excitations: Mapping[str, Waveform] | None = None,
) -> dict:
    """Assemble the document dict; elements are (name, kind, params, form)."""
    m, p, q = ic.n_ports, ic.n_impedance, ic.n_admittance
    doc: dict = {}
    if grid is not None:
        doc["grid"] = {"samples": grid.samples, "dt": grid.dt}
    doc["structure"] = {
        "m": m,
        "p": p,
        "q": q,
        "M": ic.coupling.tolist(),
        "B_R": ic.impedance_drive.tolist(),
        "B_G": ic.admittance_drive.tolist(),
        "D": ic.feedthrough.tolist(),
    }
    doc["elements"] = [
        _law_entry(name, kind, params, form) for name, kind, params, form in elements
    ]
    if excitations is not None:
        missing = [name for name in port_names if name not in excitations]
        if missing:
            raise ConfigurationError(f"missing excitations for ports: {missing}")
        doc["excitations"] = [
            waveform_to_dict(excitations[name], port=name) for name in port_names
        ]
    u_labels = [
        f"{'v' if kind == 'V' else 'i'}_{name}"
        for name, kind in zip(port_names, port_excitations)
    ]
    y_labels = [
        f"{'i' if kind == 'V' else 'v'}_{name}"
        for name, kind in zip(port_names, port_excitations)
    ]
    i_labels = [f"i_{name}" for name, _, _, form in elements if form == "Z"]
    v_labels = [f"v_{name}" for name, _, _, form in elements if form == "Y"]
    doc["labels"] = {"u": u_labels, "y": y_labels, "i": i_labels, "v": v_labels}
    return doc


def _structure_block(raw: Mapping, key: str, rows: int, cols: int) -> np.ndarray:
    values = raw.get(key)
    if values is None:
        raise ParseError(f"structure block {key!r} is missing")
    arr = np.asarray(values, dtype=float)
    if arr.size != rows * cols:
        raise ParseError(f"structure block {key!r} has {arr.size} entries, needs {rows * cols}")
    return arr.reshape(rows, cols)


def document_to_problem(doc: Mapping) -> Problem:
    """Build a solvable Problem; the document must carry grid and excitations."""
    try:
        grid_entry = doc["grid"]
        grid = Grid(int(grid_entry["samples"]), float(grid_entry["dt"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"document grid section is missing or malformed: {exc}") from exc
    structure = doc.get("structure")
    if not isinstance(structure, Mapping):
        raise ParseError("document structure section is missing")
    try:
        m, p, q = int(structure["m"]), int(structure["p"]), int(structure["q"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"structure dimensions are malformed: {exc}") from exc
    ic = Interconnection(
        n_ports=m,
        n_impedance=p,
        n_admittance=q,
        coupling=_structure_block(structure, "M", q, p),
        impedance_drive=_structure_block(structure, "B_R", p, m),
        admittance_drive=_structure_block(structure, "B_G", q, m),
        feedthrough=_structure_block(structure, "D", m, m),
    )
    entries = doc.get("elements")
    if entries is None:
        raise ParseError("document elements section is missing")
    impedance_laws, admittance_laws = [], []
    i_labels, v_labels = [], []
    for entry in entries:
        name, form, law = _law_from_entry(entry)
        if form == "Z":
            impedance_laws.append(law)
            i_labels.append(f"i_{name}")
        else:
            admittance_laws.append(law)
            v_labels.append(f"v_{name}")
    if len(impedance_laws) != p or len(admittance_laws) != q:
        raise ParseError(
            f"document lists {len(impedance_laws)} impedance and {len(admittance_laws)} "
            f"admittance elements; structure expects {p} and {q}"
        )
    excitation_entries = doc.get("excitations")
    if excitation_entries is None:
        raise ConfigurationError("document has no excitations; cannot build a problem")
    if len(excitation_entries) != m:
        raise ParseError(f"{len(excitation_entries)} excitations for {m} ports")
    channels = [make_waveform(waveform_from_dict(entry), grid).values for entry in excitation_entries]
    labels = doc.get("labels", {})
    u_labels = tuple(labels.get("u", ()))
    y_labels = tuple(labels.get("y", ()))
    if labels.get("i") is not None:
        i_labels = list(labels["i"])
    if labels.get("v") is not None:
        v_labels = list(labels["v"])
    u = SignalBundle(
        grid,
        np.stack(channels) if channels else np.zeros((0, grid.samples)),
        u_labels or tuple(f"u{k}" for k in range(m)),
    )
    return Problem(
        grid=grid,
        ic=ic,
        impedance_block=DiagonalOperator(tuple(impedance_laws), "impedance"),
        admittance_block=DiagonalOperator(tuple(admittance_laws), "admittance"),
        excitation=u,
        current_labels=tuple(i_labels),
        voltage_labels=tuple(v_labels),
        response_labels=y_labels,
    )


def save_document(doc: Mapping, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=2)
        handle.write("\n")


def load_document(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid problem document: {exc}", exc.lineno, exc.colno) from exc
