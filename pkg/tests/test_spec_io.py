import json

import numpy as np
import pytest

from kraus_thermo.errors import SpecFormatError
from kraus_thermo.measure import ConjugationByUnitary, Identity, Table
from kraus_thermo.spec_io import (dump_json, explicit_spec, load_spec, matrix_from_json,
                                  matrix_to_json, parse_spec, to_jsonable)

from helpers import random_complex


def _atoms_doc(rng, m=4, k=3):
    return {"dim": k, "measure": {"atoms": [
        {"weight": float(w), "matrix": matrix_to_json(random_complex(rng, k, k))}
        for w in rng.random(m) + 0.1]}}


def test_matrix_json_roundtrip_bits(rng):
    A = random_complex(rng, 3, 3) * 1e-7 + 1 / 3
    back = matrix_from_json(json.loads(json.dumps(matrix_to_json(A))))
    assert np.array_equal(back.view(np.uint64), A.view(np.uint64))


def test_matrix_from_json_defaults_imaginary_part():
    A = matrix_from_json({"re": [[1, 2], [3, 4]]})
    assert A.dtype == complex and np.all(A.imag == 0)


def test_matrix_from_json_rejects_mismatch():
    with pytest.raises(SpecFormatError):
        matrix_from_json({"re": [[1, 2]], "im": [[1, 2], [3, 4]]})


def test_explicit_atoms_roundtrip_is_bit_exact(rng, tmp_path):
    doc = _atoms_doc(rng)
    doc["lmap"] = {"conjugation": {"U": matrix_to_json(np.linalg.qr(random_complex(rng, 3, 3))[0])}}
    p = tmp_path / "a.json"
    dump_json(doc, p)
    spec = load_spec(p)
    again = tmp_path / "b.json"
    dump_json(spec.to_json(), again)
    assert p.read_bytes() == again.read_bytes()
    spec2 = load_spec(again)
    assert np.array_equal(spec.measure.points, spec2.measure.points)
    assert np.array_equal(spec.measure.weights, spec2.measure.weights)


def test_generator_specs_keep_parameters():
    doc = {"dim": 2, "measure": {"markov_chain": {"P": [[0.5, 0.3], [0.5, 0.7]]}}}
    spec = parse_spec(doc)
    assert spec.to_json()["measure"] == doc["measure"]
    assert isinstance(spec.lmap, Identity)
    assert len(spec.family) == 4


def test_default_generators():
    assert len(parse_spec({"dim": 2, "measure": {"four_projector": {}}}).family) == 4
    fam = parse_spec({"dim": 2, "measure": {"example1_truncated": {"mass_tol": 1e-3}}}).family
    assert len(fam) == 1000  # tail bound 1/N


def test_table_lmap_and_hamiltonian(rng):
    doc = _atoms_doc(rng, m=3, k=2)
    ops = [random_complex(rng, 2, 2) for _ in range(3)]
    doc["hamiltonian"] = {"lmap": {"table": {"matrices": [matrix_to_json(K) for K in ops]}}}
    spec = parse_spec(doc)
    assert isinstance(spec.h_lmap, Table)
    assert np.allclose(spec.hamiltonian.operators, ops)
    assert spec.to_json()["hamiltonian"]["lmap"] == doc["hamiltonian"]["lmap"]


def test_explicit_spec_reproduces_family(fix_mc):
    spec = parse_spec(json.loads(json.dumps(explicit_spec(fix_mc))))
    assert np.array_equal(spec.family.operators, fix_mc.operators)
    assert np.array_equal(spec.family.weights, fix_mc.weights)


@pytest.mark.parametrize("doc", [
    {},
    {"dim": 2},
    {"dim": 0, "measure": {"four_projector": {}}},
    {"dim": 2, "measure": {"four_projector": {}, "markov_chain": {"P": [[1]]}}},
    {"dim": 2, "measure": {"atoms": []}},
    {"dim": 2, "measure": {"atoms": [{"weight": -1, "matrix": {"re": [[1, 0], [0, 1]]}}]}},
    {"dim": 2, "measure": {"atoms": [{"weight": 1, "matrix": {"re": [[1, 0], [0, 1]],
                                                                "extra": 1}}]}},
    {"dim": 2, "measure": {"four_projector": {}}, "lmap": {"bogus": {}}},
    {"dim": 2, "measure": {"four_projector": {}}, "hamiltonian": {}},
    {"dim": 2, "measure": {"gaussian_rotation": {"n_r": 2}}},
    {"dim": 2, "measure": {"four_projector": {}}, "unknown": 1},
])
def test_schema_violations(doc):
    with pytest.raises(SpecFormatError):
        parse_spec(doc)


def test_dimension_mismatch():
    with pytest.raises(SpecFormatError, match="dim"):
        parse_spec({"dim": 3, "measure": {"four_projector": {}}})


def test_conjugation_must_be_unitary():
    doc = {"dim": 2, "measure": {"four_projector": {}},
           "lmap": {"conjugation": {"U": {"re": [[2, 0], [0, 1]]}}}}
    with pytest.raises(SpecFormatError):
        parse_spec(doc)


def test_load_spec_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(SpecFormatError):
        load_spec(p)


def test_to_jsonable_types():
    doc = to_jsonable({"a": np.float64(1.5), "b": np.int32(2), "c": np.bool_(True),
                       "d": np.eye(2) * (1 + 1j), "e": 1 - 2j, "f": (np.arange(2),)})
    assert doc["a"] == 1.5 and doc["b"] == 2 and doc["c"] is True
    assert doc["d"] == {"re": [[1.0, 0.0], [0.0, 1.0]], "im": [[1.0, 0.0], [0.0, 1.0]]}
    assert doc["e"] == {"re": 1.0, "im": -2.0}
    assert doc["f"] == [[0, 1]]
    json.dumps(doc)
