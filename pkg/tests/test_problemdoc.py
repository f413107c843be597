import json

import numpy as np
import pytest

from pmono import ConfigurationError, Constant, ParseError, Sine, Tabulated
from pmono.netlist import derive_hybrid
from pmono.problemdoc import (
    document_from_parts,
    document_to_problem,
    load_document,
    save_document,
    waveform_from_dict,
    waveform_to_dict,
)
from tests.conftest import RECTIFIER_EXCITATIONS, RECTIFIER_GRID


def rectifier_document(rectifier_netlist, rectifier_partition):
    derived = derive_hybrid(rectifier_netlist, rectifier_partition)
    elements = [
        (name, rectifier_netlist.element(name).kind, rectifier_netlist.element(name).params, form)
        for name, form in (
            [(n, "Z") for n in derived.impedance_elements]
            + [(n, "Y") for n in derived.admittance_elements]
        )
    ]
    return document_from_parts(
        derived.ic,
        elements,
        derived.port_names,
        derived.port_excitations,
        grid=RECTIFIER_GRID,
        excitations=RECTIFIER_EXCITATIONS,
    )


def test_waveform_dict_roundtrip():
    for wf in (Sine(240.0, 50.0, 0.25), Constant(-0.005), Tabulated((0.5, -1.5))):
        assert waveform_from_dict(waveform_to_dict(wf)) == wf
    with pytest.raises(ParseError):
        waveform_from_dict({"kind": "noise"})
    with pytest.raises(ParseError):
        waveform_from_dict({"kind": "sine", "amplitude": 1.0})


def test_document_structure_keys(rectifier_netlist, rectifier_partition):
    doc = rectifier_document(rectifier_netlist, rectifier_partition)
    assert doc["grid"] == {"samples": 200, "dt": 1e-4}
    structure = doc["structure"]
    assert structure["m"] == 2 and structure["p"] == 3 and structure["q"] == 2
    assert structure["M"] == [[1.0, 0.0, -1.0], [1.0, -1.0, 0.0]]
    assert structure["B_R"] == [[0.0, 0.0], [-1 / 24, 0.0], [1 / 24, 0.0]]
    assert structure["B_G"] == [[0.0, 1.0], [0.0, 1.0]]
    assert structure["D"] == [[0.0, 0.0], [0.0, 0.0]]
    assert doc["labels"]["u"] == ["v_p", "i_q"]
    assert doc["labels"]["y"] == ["i_p", "v_q"]
    assert [e["name"] for e in doc["elements"]] == ["load", "d1", "d2", "d3", "d4"]
    assert doc["elements"][0]["params"] == {"ohms": 1000.0, "farads": 1e-5}


def test_document_to_problem_roundtrip(rectifier_netlist, rectifier_partition, rectifier_problem):
    doc = rectifier_document(rectifier_netlist, rectifier_partition)
    problem = document_to_problem(doc)
    assert np.array_equal(problem.ic.coupling, rectifier_problem.ic.coupling)
    assert np.array_equal(problem.excitation.values, rectifier_problem.excitation.values)
    assert problem.current_labels == rectifier_problem.current_labels
    assert [type(l).__name__ for l in problem.impedance_block.laws] == [
        type(l).__name__ for l in rectifier_problem.impedance_block.laws
    ]


def test_save_load_bit_exact(tmp_path, rectifier_netlist, rectifier_partition):
    doc = rectifier_document(rectifier_netlist, rectifier_partition)
    path = tmp_path / "problem.json"
    save_document(doc, path)
    again = load_document(path)
    assert again == json.loads(json.dumps(doc))
    problem_a = document_to_problem(doc)
    problem_b = document_to_problem(again)
    assert np.array_equal(problem_a.excitation.values, problem_b.excitation.values)


def test_document_without_excitations_cannot_solve(rectifier_netlist, rectifier_partition):
    derived = derive_hybrid(rectifier_netlist, rectifier_partition)
    elements = [
        (name, rectifier_netlist.element(name).kind, rectifier_netlist.element(name).params, form)
        for name, form in (
            [(n, "Z") for n in derived.impedance_elements]
            + [(n, "Y") for n in derived.admittance_elements]
        )
    ]
    doc = document_from_parts(
        derived.ic, elements, derived.port_names, derived.port_excitations
    )
    assert "grid" not in doc and "excitations" not in doc
    doc["grid"] = {"samples": 200, "dt": 1e-4}
    with pytest.raises(ConfigurationError):
        document_to_problem(doc)


def test_malformed_documents(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    with pytest.raises(ParseError):
        load_document(path)
    with pytest.raises(ParseError):
        document_to_problem({"grid": {"samples": 8, "dt": 0.1}})
    with pytest.raises(ParseError):
        document_to_problem(
            {
                "grid": {"samples": 8, "dt": 0.1},
                "structure": {"m": 1, "p": 1, "q": 0, "M": [], "B_R": [[1.0]],
                              "B_G": [], "D": [[0.0]]},
                "elements": [{"name": "r", "law": "R", "params": {"ohms": 1.0}, "form": "Y"}],
                "excitations": [{"kind": "constant", "level": 1.0}],
            }
        )
