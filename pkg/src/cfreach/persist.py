"""Estimator and report documents.

The estimator document is JSON. Floats are written with Python's shortest
round-trip repr, so a reloaded estimator reproduces every stored bit.
"""
import json

import numpy as np

from .basis import basis_from_exponents
from .christoffel import ChristoffelEstimator, NormalizationMap
from .sampler import atomic_write_text

FORMAT = "cfreach-estimator"
VERSION = 1


def estimator_to_dict(est):
    L = est.chol_lower
    return {
        "format": FORMAT,
        "version": VERSION,
        "n": est.n,
        "k": est.k,
        "ordering": "grlex",
        "exponents": est.basis.exponents.tolist(),
        "normalization": {
            "offset": [float(v) for v in est.normalization.offset],
            "scale": [float(v) for v in est.normalization.scale],
        },
        # row i holds L[i, :i+1]
        "chol_lower": [[float(v) for v in L[i, : i + 1]] for i in range(L.shape[0])],
        "alpha": float(est.alpha),
        "meta": est.meta,
    }


def estimator_from_dict(doc):
    if doc.get("format") != FORMAT:
        raise ValueError("not an estimator document")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported estimator document version {doc.get('version')}")
    basis = basis_from_exponents(doc["exponents"])
    if (basis.n, basis.k) != (doc["n"], doc["k"]):
        raise ValueError("exponent table disagrees with the declared n and k")
    m = basis.size
    rows = doc["chol_lower"]
    if len(rows) != m or any(len(r) != i + 1 for i, r in enumerate(rows)):
        raise ValueError(f"factor must have {m} triangular rows")
    L = np.zeros((m, m))
    for i, row in enumerate(rows):
        L[i, : i + 1] = row
    norm = NormalizationMap(
        np.array(doc["normalization"]["offset"], dtype=float),
        np.array(doc["normalization"]["scale"], dtype=float),
    )
    if norm.offset.shape != (basis.n,) or norm.scale.shape != (basis.n,) or np.any(norm.scale <= 0):
        raise ValueError("normalization must have n entries with positive scale")
    return ChristoffelEstimator(basis, L, float(doc["alpha"]), norm, dict(doc.get("meta", {})))


def dumps_estimator(est):
    return json.dumps(estimator_to_dict(est), indent=1, sort_keys=True) + "\n"


def save_estimator(path, est):
    atomic_write_text(path, dumps_estimator(est))


def load_estimator(path):
    with open(path) as fh:
        return estimator_from_dict(json.load(fh))


def report_text(report, extra=None):
    items = dict(report.to_dict())
    items.update(extra or {})
    return "".join(f"{key} = {value!r}\n" for key, value in items.items())


def save_report(prefix, report, extra=None):
    """Write ``prefix.txt`` (key = value) and ``prefix.json``; returns both paths."""
    doc = dict(report.to_dict())
    doc.update(extra or {})
    txt, js = f"{prefix}.txt", f"{prefix}.json"
    atomic_write_text(txt, report_text(report, extra))
    atomic_write_text(js, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    if report.outliers is not None:
        lines = "".join(",".join(repr(float(v)) for v in row) + "\n" for row in report.outliers)
        atomic_write_text(f"{prefix}.outliers.csv", lines)
    return txt, js
