import json
import math

import numpy as np
import pytest

from maxjump import fixtures as fx
from maxjump.io import (
    FileFormatError,
    certificate_from_dict,
    certificate_to_dict,
    load_certificate,
    load_system,
    system_from_dict,
    system_to_dict,
)
from maxjump.stochastic import verify_one_step


def _write(tmp_path, doc, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return path


def test_round_trip(tmp_path):
    sys, chain = fx.production()
    doc = system_to_dict(sys, chain)
    assert doc["A"][0][0][1] == "-inf"
    sys2, chain2 = load_system(_write(tmp_path, doc))
    assert np.array_equal(sys2._A, sys._A) and np.array_equal(sys2._C, sys._C)
    assert np.array_equal(chain2.c, chain.c)


def test_shared_matrices_and_single_mode():
    doc = {"algebra": "max-plus", "A": [[0, 1], [-1, "-inf"]], "B": [[0], [1]], "chain": [[1]]}
    sys, chain = system_from_dict(doc)
    assert sys.M == 1 and sys.m == 1


def test_exact_entries():
    doc = {"algebra": "max-product", "A": [[["2/3", "2"], ["1/3", "3/4"]]], "chain": [[1]]}
    sys, _ = system_from_dict(doc)
    assert sys.A[0].is_exact


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"A": [[[1]]], "chain": [[1]]}, "algebra"),
        ({"algebra": "tropical", "A": [[[1]]], "chain": [[1]]}, "algebra"),
        ({"algebra": "max-product", "A": [[[1]]]}, "chain"),
        ({"algebra": "max-product", "A": [[[1]]], "chain": [[0.5]]}, "chain"),
        ({"algebra": "max-product", "A": [[[1]]], "chain": [[0.5, 0.5], [0.5, 0.5]]}, "chain"),
        ({"algebra": "max-product", "n": 2, "A": [[[1]]], "chain": [[1]]}, "'n'"),
        ({"algebra": "max-product", "modes": 2, "A": [[[1]]], "chain": [[1]]}, "'A'"),
        ({"algebra": "max-product", "A": [[[-1]]], "chain": [[1]]}, "'A'"),
        ({"algebra": "max-product", "A": [[[1]]], "B": [[[1], [1]]], "chain": [[1]]}, "system matrices"),
        ({"algebra": "max-product", "A": [[[1]]], "B": 3, "chain": [[1]]}, "'B'"),
    ],
)
def test_errors_name_the_field(doc, field):
    with pytest.raises(FileFormatError, match=field):
        system_from_dict(doc)


def test_bad_json_reports_position(tmp_path):
    with pytest.raises(FileFormatError, match="line 2"):
        load_system(_write(tmp_path, '{"algebra":\n ]'))


def test_certificate_round_trip(tmp_path):
    sys, chain = fx.mj_example()
    cert = verify_one_step(sys, chain, fx.MJ_P)
    path = _write(tmp_path, certificate_to_dict(cert), "c.json")
    back = load_certificate(path)
    assert np.array_equal(back.p, cert.p) and np.array_equal(back.delta, cert.delta) and back.k0 == 1


def test_certificate_gamma_and_errors():
    doc = certificate_to_dict(certificate_from_dict({"p": [[1.0, 2.0]], "gamma": math.e}))
    assert doc["gamma"] == math.e
    with pytest.raises(FileFormatError):
        certificate_from_dict({"delta": [0.5]})
    with pytest.raises(FileFormatError):
        certificate_from_dict({"p": [1.0, 2.0]})
