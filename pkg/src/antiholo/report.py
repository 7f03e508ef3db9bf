"""JSON report records: conversion, schema validation and serialization.

Reals are written as decimals with 17 significant digits (enough to
round-trip an IEEE double); the standard ``json`` encoder only offers the
shortest repr, hence the small writer below.
"""

from __future__ import annotations

import json
import math
from importlib import resources

import jsonschema

from .verify import ManifoldReport, PointDiagnostics


def point_record(d: PointDiagnostics) -> dict:
    c = d.constancy
    return {
        "point": list(d.point),
        "class": d.point_class.value,
        "norms": {
            "F": d.f_norm,
            "N": d.n_norm,
            "hermitian_residual": d.hermitian_residual,
            "class_eps": d.class_eps,
        },
        "constancy": {
            "nu_hat": c.nu_hat,
            "max_dev": c.max_dev,
            "k_min": c.k_min,
            "k_max": c.k_max,
            "sample_min": c.sample_min,
            "sample_max": c.sample_max,
            "m": c.m,
            "seed": c.seed,
            "stream": c.stream,
        },
        "residual25": d.residual25,
        "residual26": d.residual26,
        "fit": d.fit,
        "trace_checks": dict(d.trace_checks),
        "theorem_a": d.theorem_a.value,
        "theorem_a_inputs": {
            "max_dev": d.theorem_a_inputs.max_dev,
            "residual25": d.theorem_a_inputs.residual25,
            "distance_to_nu_pi1": d.theorem_a_inputs.distance_to_nu_pi1,
            "trace_defect": d.theorem_a_inputs.trace_defect,
        },
        "property_suite": [
            {"name": r.name, "residual": r.residual, "tol": r.tol, "verdict": r.verdict, "kind": r.kind}
            for r in d.property_suite
        ],
        "extremize_iterations": d.extremize_iterations,
    }


def report_record(rep: ManifoldReport) -> dict:
    return {
        "tool_version": rep.tool_version,
        "manifold": rep.manifold,
        "params": list(rep.params),
        "seed": rep.seed,
        "sampler": rep.sampler,
        "points": [point_record(d) for d in rep.points],
        "summary": rep.summary,
    }


def load_schema() -> dict:
    text = resources.files("antiholo").joinpath("report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_record(record: dict) -> None:
    jsonschema.validate(record, load_schema())


def _float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return dumps(obj.item(), indent, _level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_report(rep: ManifoldReport, path) -> dict:
    record = report_record(rep)
    validate_record(record)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(record) + "\n")
    return record
