"""JSON system and certificate files.

System file::

    {"algebra": "max-plus" | "max-product", "n": 2, "modes": 2,
     "A": [matrix per mode], "B": optional, "C": optional,
     "chain": M x M matrix}

``B`` and ``C`` may be one matrix per mode or a single shared matrix.
Infinities are written as the strings ``"-inf"`` and ``"inf"``.

Certificate file::

    {"k0": 1, "delta": [per mode], "p": [vector per mode], "gamma": optional}
"""

import json
import math

import numpy as np

from .markov import JumpSystem, validate_chain
from .semiring import Algebra, SemiringMatrix, matrix_to_json
from .stochastic import Certificate


class FileFormatError(ValueError):
    """Malformed input file; the message names the offending field."""


def _depth(obj):
    d = 0
    while isinstance(obj, list) and obj:
        obj = obj[0]
        d += 1
    return d


def _family(doc, key, algebra, M, required=False):
    if key not in doc or doc[key] is None:
        if required:
            raise FileFormatError(f"missing required field {key!r}")
        return None
    value = doc[key]
    depth = _depth(value)
    try:
        if depth == 2:
            return [SemiringMatrix(value, algebra)] * M
        if depth == 3:
            return [SemiringMatrix(m, algebra) for m in value]
    except (ValueError, TypeError) as exc:
        raise FileFormatError(f"field {key!r}: {exc}") from exc
    raise FileFormatError(f"field {key!r} must be a matrix or a list of matrices")


def system_from_dict(doc):
    """Returns ``(system, chain)``."""
    try:
        algebra = Algebra.parse(doc["algebra"])
    except KeyError:
        raise FileFormatError("missing required field 'algebra'") from None
    except ValueError as exc:
        raise FileFormatError(f"field 'algebra': {exc}") from exc
    A = doc.get("A")
    if _depth(A) == 2:
        A = [A]
    M = int(doc.get("modes", len(A) if A else 0))
    if A is None or len(A) != M:
        raise FileFormatError(f"field 'A': expected {M} matrices")
    fam_A = _family({"A": A}, "A", algebra, M, required=True)
    try:
        sys = JumpSystem(fam_A, _family(doc, "B", algebra, M), _family(doc, "C", algebra, M), algebra)
    except ValueError as exc:
        raise FileFormatError(f"system matrices: {exc}") from exc
    if "n" in doc and int(doc["n"]) != sys.n:
        raise FileFormatError(f"field 'n' is {doc['n']} but A matrices are {sys.n}x{sys.n}")
    if "chain" not in doc:
        raise FileFormatError("missing required field 'chain'")
    try:
        chain = validate_chain(doc["chain"])
    except ValueError as exc:
        raise FileFormatError(f"field 'chain': {exc}") from exc
    if chain.M != M:
        raise FileFormatError(f"field 'chain' has {chain.M} modes, 'A' has {M}")
    return sys, chain


def load_system(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return system_from_dict(doc)


def system_to_dict(sys, chain):
    doc = {
        "algebra": sys.algebra.value,
        "n": sys.n,
        "modes": sys.M,
        "A": [matrix_to_json(a) for a in sys.A],
    }
    if sys.B is not None:
        doc["B"] = [matrix_to_json(b) for b in sys.B]
    if sys.C is not None:
        doc["C"] = [matrix_to_json(c) for c in sys.C]
    doc["chain"] = chain.c.tolist()
    return doc


def certificate_to_dict(cert):
    doc = {"k0": cert.k0, "delta": [float(d) for d in cert.delta], "p": np.asarray(cert.p, dtype=float).tolist()}
    if cert.gamma is not None:
        doc["gamma"] = cert.gamma
    return doc


def certificate_from_dict(doc):
    if "p" not in doc:
        raise FileFormatError("certificate: missing required field 'p'")
    p = np.asarray(doc["p"], dtype=float)
    if p.ndim != 2:
        raise FileFormatError("certificate: field 'p' must be a list of vectors, one per mode")
    delta = np.asarray(doc.get("delta", [math.nan] * p.shape[0]), dtype=float)
    return Certificate(p=p, delta=delta, k0=int(doc.get("k0", 1)), gamma=doc.get("gamma"))


def load_certificate(path):
    with open(path) as fh:
        try:
            return certificate_from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise FileFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
