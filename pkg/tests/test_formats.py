import json
from fractions import Fraction

import pytest

from formats.codec import (
    check_report,
    decode_deadline,
    decode_graph,
    decode_realization,
    decode_ug,
    decode_witness,
    dumps,
    encode_deadline,
    encode_graph,
    encode_realization,
    encode_ug,
    encode_witness,
    export_dot,
    read_document,
    write_document,
)
from formats.schemas import REALIZATION_FORMAT, REPORT_FORMAT, UG_FORMAT
from models.digraph import PlainDigraph
from models.timecost import brute_force_deadline, dvd_to_deadline
from tools.gadget import dictator_partition, verify_completeness
from tools.reduction import partition_from_labeling
from utils.errors import FormatError, InvalidGraph
from utils.rationals import format_fraction, to_fraction

CHAIN = PlainDigraph(n=3, arcs=frozenset({(0, 1), (1, 2)}))


def through_text(payload):
    return json.loads(dumps(payload))


def test_rational_literals():
    assert format_fraction(Fraction(6, -8)) == "-3/4"
    assert format_fraction(2) == "2/1"
    assert to_fraction(" 3/9 ") == Fraction(1, 3)
    for bad in ("1/0", "x", 0.5, True):
        with pytest.raises(FormatError):
            to_fraction(bad)


def test_gadget_survives_a_file(fvs_gadget, tmp_path):
    path = tmp_path / "gadget.json"
    write_document(encode_graph(fvs_gadget), str(path))
    decoded = decode_graph(read_document(str(path)))
    assert decoded == fvs_gadget
    assert decoded.provenance["params"]["R"] == 3


def test_reduced_graph_survives_text(reduced_dvd):
    assert decode_graph(through_text(encode_graph(reduced_dvd))) == reduced_dvd


def test_plain_graph_keeps_labels():
    labelled = PlainDigraph(n=2, arcs=frozenset({(0, 1)}), labels=(4, 7))
    assert decode_graph(through_text(encode_graph(labelled))) == labelled
    assert "labels" not in encode_graph(CHAIN)


def test_tampered_vertex_id_is_refused(fvs_gadget):
    payload = through_text(encode_graph(fvs_gadget))
    payload["vertices"][0]["x"] = [1 - d for d in payload["vertices"][0]["x"]]
    with pytest.raises(FormatError):
        decode_graph(payload)


def test_graph_invariants_survive_decoding():
    payload = through_text(encode_graph(CHAIN))
    payload["arcs"].append([2, 2])
    with pytest.raises(InvalidGraph):
        decode_graph(payload)


def test_wrong_format_is_refused(satisfiable):
    with pytest.raises(FormatError):
        decode_graph(through_text(encode_ug(satisfiable)))
    with pytest.raises(FormatError):
        decode_ug([1, 2])


def test_validation_reports_the_location():
    payload = {"format": UG_FORMAT, "R": True, "V": [], "W": [], "edges": []}
    with pytest.raises(FormatError, match=r"\$\.R"):
        decode_ug(payload)
    del payload["R"]
    with pytest.raises(FormatError, match=r"\$\.R: Field required"):
        decode_ug(payload)
    payload.update(R=2, edges=[{"v": "v0", "w": "w0", "perm": ["0", 1]}])
    with pytest.raises(FormatError, match=r"\$\.edges\[0\]\.perm\[0\]"):
        decode_ug(payload)


def test_test_vertex_without_a_sequence_is_refused(fvs_gadget):
    payload = through_text(encode_graph(fvs_gadget))
    test_entry = next(entry for entry in payload["vertices"] if entry["role"] == "test")
    del test_entry["S"]
    with pytest.raises(FormatError, match="no index sequence S"):
        decode_graph(payload)


def test_plain_graph_needs_a_vertex_count():
    payload = through_text(encode_graph(CHAIN))
    del payload["n"]
    with pytest.raises(FormatError, match="vertex count"):
        decode_graph(payload)


def test_deadline_rationals_must_be_exact():
    inst = dvd_to_deadline(CHAIN, 2, Fraction(1, 40))
    payload = through_text(encode_deadline(inst))
    payload["deadline"] = 2.5
    with pytest.raises(FormatError, match=r"\$\.deadline"):
        decode_deadline(payload)
    payload["deadline"] = "5/2"
    assert decode_deadline(payload).deadline == Fraction(5, 2)
    payload["activities"][0]["menu"][0]["cost"] = "1/0"
    with pytest.raises(FormatError, match=r"\$\.activities\[0\]\.menu\[0\]\.cost"):
        decode_deadline(payload)


def test_ug_keeps_the_planted_labeling(satisfiable):
    decoded = decode_ug(through_text(encode_ug(satisfiable)))
    assert decoded == satisfiable
    assert decoded.planted == satisfiable.planted


def test_deadline_survives_text():
    inst = dvd_to_deadline(CHAIN, 2, Fraction(1, 40))
    payload = through_text(encode_deadline(inst))
    assert payload["deadline"] == "3/1"
    decoded = decode_deadline(payload)
    assert decoded == inst
    assert decoded.provenance["gamma"] == Fraction(1, 40)
    assert brute_force_deadline(decoded)[0] == 1


def test_witness_survives_text(fvs_gadget):
    witness = dictator_partition(fvs_gadget, 2)
    decoded = decode_witness(through_text(encode_witness(witness)))
    assert decoded == witness
    assert verify_completeness(fvs_gadget, decoded, 0).ok


def test_labeling_witness_keeps_the_labeling(reduced_fvs, satisfiable):
    witness = partition_from_labeling(reduced_fvs, satisfiable.planted).witness
    decoded = decode_witness(through_text(encode_witness(witness)))
    assert decoded.labeling == satisfiable.planted
    assert decoded.s is None


def test_realization_choices_must_be_indices():
    assert decode_realization(through_text(encode_realization({"m0": 1}))) == {"m0": 1}
    with pytest.raises(FormatError):
        decode_realization({"format": REALIZATION_FORMAT, "choice": {"m0": True}})
    with pytest.raises(FormatError, match=r"\$\.choice\.m0"):
        decode_realization({"format": REALIZATION_FORMAT, "choice": {"m0": -1}})


def test_report_check():
    report = {"format": REPORT_FORMAT, "command": "solve", "params": {}, "results": [{"size": 1}]}
    assert check_report(report) is report
    with pytest.raises(FormatError):
        check_report({"format": REPORT_FORMAT, "command": "solve", "params": {}})


def test_dumps_is_deterministic(fvs_gadget):
    assert dumps(encode_graph(fvs_gadget)) == dumps(encode_graph(fvs_gadget))
    assert json.loads(dumps({"value": Fraction(1, 4), "set": {3, 1}})) == {"value": "1/4", "set": [1, 3]}


def test_read_document_errors(tmp_path):
    with pytest.raises(FormatError):
        read_document(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(FormatError):
        read_document(str(broken))


def test_write_document_to_stdout(capsys):
    write_document(encode_realization({"m0": 0}))
    assert json.loads(capsys.readouterr().out)["choice"] == {"m0": 0}


def test_export_dot_shapes(small_dvd_gadget):
    text = export_dot(small_dvd_gadget)
    assert text.startswith("digraph hforge {")
    assert text.count("shape=box") == len(small_dvd_gadget.bit_ids)
    assert text.count("shape=ellipse") == len(small_dvd_gadget.test_ids)
    assert text.count("->") == len(small_dvd_gadget.arcs)
    assert "0 -> 1;" in export_dot(CHAIN)
