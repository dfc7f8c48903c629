"""JSON and CSV schemas for metrics, specs, measures, embeddings, and reports.

Matrices are always emitted in full (no triangular compression) so files diff
cleanly; report-level artifacts carry a schema_version field and enough
provenance (seeds, hashes, derived constants) to re-run exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .cutcone import CutMeasure, DistortionCertificate, L1Embedding, NotInCutCone
from .metrics import FiniteMetricSpace
from .twisted import Joiner, TwistedUnionSpace, TwistedUnionSpec

SCHEMA_VERSION = 1


def _matrix(a: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in np.asarray(a)]


def metric_to_json(space: FiniteMetricSpace) -> dict:
    return {"labels": list(space.labels), "dist": _matrix(space.dist)}


def metric_from_json(obj: dict) -> FiniteMetricSpace:
    try:
        labels = obj["labels"]
        dist = obj["dist"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"metric JSON needs 'labels' and 'dist': {exc}") from exc
    return FiniteMetricSpace(labels, np.asarray(dist, dtype=float))


def spec_to_json(spec: TwistedUnionSpec) -> dict:
    joiner = ({"constant": float(spec.joiner.values[0])} if spec.joiner.constant
              else {"values": [float(v) for v in spec.joiner.values]})
    return {
        "labels": list(spec.labels),
        "d0": _matrix(spec.d0.dist),
        "d1": _matrix(spec.d1.dist),
        "joiner": joiner,
    }


def spec_from_json(obj: dict) -> TwistedUnionSpec:
    try:
        labels = obj["labels"]
        d0 = np.asarray(obj["d0"], dtype=float)
        d1 = np.asarray(obj["d1"], dtype=float)
        joiner = obj["joiner"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"spec JSON needs labels/d0/d1/joiner: {exc}") from exc
    if "constant" in joiner:
        j = Joiner.fixed(float(joiner["constant"]), len(labels))
    elif "values" in joiner:
        j = Joiner.from_values(joiner["values"])
    else:
        raise ValueError("joiner must carry 'constant' or 'values'")
    return TwistedUnionSpec(FiniteMetricSpace(labels, d0),
                            FiniteMetricSpace(labels, d1), j)


def spec_hash(spec: TwistedUnionSpec) -> str:
    payload = json.dumps(spec_to_json(spec), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()


def union_to_json(space: TwistedUnionSpace) -> dict:
    """Union metric plus a provenance block tying it to its generating spec."""
    return {
        "labels": list(space.labels),
        "dist": _matrix(space.dist),
        "provenance": {
            "spec_sha256": spec_hash(space.spec),
            "lipschitz": space.derived.lipschitz,
            "comparability": space.derived.comparability,
            "min_is_metric": space.derived.min_is_metric,
        },
    }


def measure_to_json(measure: CutMeasure) -> dict:
    return {
        "n": measure.n,
        "cuts": [{"S": sorted(int(i) for i in cut), "w": float(w)}
                 for cut, w in measure.sorted_items()],
    }


def measure_from_json(obj: dict) -> CutMeasure:
    try:
        n = int(obj["n"])
        items = [(entry["S"], float(entry["w"])) for entry in obj["cuts"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"cut-measure JSON needs 'n' and 'cuts': {exc}") from exc
    return CutMeasure.from_items(n, items)


def embedding_to_json(emb: L1Embedding) -> dict:
    return {"labels": list(emb.labels), "dim": emb.dim, "coords": _matrix(emb.coords)}


def embedding_from_json(obj: dict) -> L1Embedding:
    try:
        labels = obj["labels"]
        coords = np.asarray(obj["coords"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"embedding JSON needs 'labels' and 'coords': {exc}") from exc
    if coords.size == 0:
        coords = coords.reshape(len(labels), int(obj.get("dim", 0)))
    return L1Embedding(tuple(labels), coords)


def certificate_to_json(cert: DistortionCertificate) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "mode": cert.mode,
        "value": cert.value,
        "lower_scale": cert.lower_scale,
        "upper_scale": cert.upper_scale,
        "witness_low": list(cert.witness_low) if cert.witness_low else None,
        "witness_high": list(cert.witness_high) if cert.witness_high else None,
    }
    if cert.measure is not None:
        out["measure"] = measure_to_json(cert.measure)
    return out


def separation_to_json(sep: NotInCutCone) -> dict:
    n = len(sep.labels)
    iu, ju = np.triu_indices(n, 1)
    return {
        "schema_version": SCHEMA_VERSION,
        "in_cut_cone": False,
        "labels": list(sep.labels),
        "violation": sep.violation,
        "max_over_cuts": sep.max_over_cuts,
        "inequality": [
            {"pair": [sep.labels[i], sep.labels[j]], "coefficient": float(c)}
            for i, j, c in zip(iu, ju, sep.pair_coefficients)
        ],
    }


def assembly_report_to_json(report, space: TwistedUnionSpace) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "route": report.route,
        "inputs_sha256": spec_hash(space.spec),
        "factors": {k: (v if isinstance(v, str) else float(v))
                    for k, v in report.factors.items()},
        "derived_bound": report.derived_bound,
        "measured_distortion": report.certificate.value,
        "bound_satisfied": report.bound_satisfied,
        "witness_low": list(report.certificate.witness_low or []),
        "witness_high": list(report.certificate.witness_high or []),
    }


def save_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def write_csv(path, header: list[str], rows: list[list]) -> None:
    """Deterministic CSV with a schema_version column appended to every row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header + ["schema_version"])
        for row in rows:
            writer.writerow(list(row) + [SCHEMA_VERSION])
