"""JSON manifests describing a structure on one chart.

Layout::

    {
      "chart": {"coordinates": ["x1", "x2", "t", "z1"], "time": "t"},
      "omega": [{"indices": ["x1", "x2"], "coeff_terms": [{"monomial": {}, "coeff": "1"}]}],
      "eta":   [{"indices": ["t"],        "coeff_terms": [{"monomial": {}, "coeff": "1"}]}],
      "submanifold": ["x1"],
      "complement": [{"z": "z1", "x": "x1", "coeff_terms": [...]}],
      "verification": {"radius": "1/2", "grid": 5, "steps": 64, "tol": 1e-05},
      "thickening": {"base_dim": 4, "fiber_dim": 1, "liouville": [...]}
    }

Only ``chart``, ``omega`` and ``eta`` are required.  Rationals are ``"p/q"``
strings (integers are accepted too); floats are rejected in coefficients.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

from .errors import ManifestError
from .forms import Chart, PolyForm, form_from_records, form_to_records, scalar_from_terms, scalar_to_terms
from .polynomial import PolyScalar, as_fraction

__all__ = ["Verification", "Manifest", "parse_manifest", "emit_manifest", "load_manifest", "parse_complement"]

TOP_FIELDS = ("chart", "omega", "eta", "submanifold", "complement", "verification", "thickening")


@dataclass(frozen=True)
class Verification:
    radius: Fraction = Fraction(1, 2)
    grid: int = 5
    steps: int = 64
    tol: float = 1e-5


@dataclass(frozen=True)
class Manifest:
    chart: Chart
    omega: PolyForm
    eta: PolyForm
    submanifold: tuple | None = None
    complement: dict | None = None  # {(z_label, x_label): PolyScalar}
    verification: Verification = field(default_factory=Verification)
    thickening: dict | None = None  # {"base_dim", "fiber_dim", "liouville"}

    def with_overrides(self, **values) -> "Manifest":
        values = {k: v for k, v in values.items() if v is not None}
        return replace(self, verification=replace(self.verification, **values)) if values else self


def _require_keys(obj, allowed, where, required=()):
    if not isinstance(obj, dict):
        raise ManifestError("expected an object", where)
    for key in obj:
        if key not in allowed:
            raise ManifestError(f"unknown field {key!r}", where)
    for key in required:
        if key not in obj:
            raise ManifestError(f"missing field {key!r}", where)


def _rational(value, where) -> Fraction:
    try:
        return as_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ManifestError(f"not an exact rational: {value!r} ({exc})", where) from None


def _int(value, where, minimum=1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ManifestError(f"expected an integer >= {minimum}, got {value!r}", where)
    return value


def _float(value, where) -> float:
    if isinstance(value, bool):
        raise ManifestError("expected a number", where)
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ManifestError(f"expected a number, got {value!r}", where) from None
    if not out > 0:
        raise ManifestError("tolerance must be positive", where)
    return out


def _check_records(records, chart, where):
    if not isinstance(records, list):
        raise ManifestError("expected a list of term records", where)
    for i, rec in enumerate(records):
        _require_keys(rec, ("indices", "coeff_terms"), f"{where}[{i}]", required=("indices", "coeff_terms"))
        if not isinstance(rec["indices"], list) or any(l not in chart.names for l in rec["indices"]):
            raise ManifestError(f"indices must be chart labels, got {rec['indices']!r}", f"{where}[{i}].indices")
        _check_terms(rec["coeff_terms"], chart, f"{where}[{i}].coeff_terms")


def _check_terms(terms, chart, where):
    if not isinstance(terms, list):
        raise ManifestError("expected a list of monomials", where)
    for j, term in enumerate(terms):
        _require_keys(term, ("monomial", "coeff"), f"{where}[{j}]", required=("monomial", "coeff"))
        mono = term["monomial"]
        if not isinstance(mono, dict):
            raise ManifestError("monomial must map labels to exponents", f"{where}[{j}].monomial")
        for label, e in mono.items():
            if label not in chart.names:
                raise ManifestError(f"unknown coordinate {label!r}", f"{where}[{j}].monomial")
            _int(e, f"{where}[{j}].monomial.{label}", minimum=0)
        _rational(term["coeff"], f"{where}[{j}].coeff")


def _form(records, chart, degree, where) -> PolyForm:
    _check_records(records, chart, where)
    for i, rec in enumerate(records):
        if len(rec["indices"]) != degree:
            raise ManifestError(f"expected {degree} indices", f"{where}[{i}].indices")
    return form_from_records(chart, degree, records)


def _chart(obj) -> Chart:
    _require_keys(obj, ("coordinates", "time"), "chart", required=("coordinates",))
    coords = obj["coordinates"]
    if not isinstance(coords, list) or not coords or not all(isinstance(c, str) and c for c in coords):
        raise ManifestError("coordinates must be a nonempty list of labels", "chart.coordinates")
    if len(set(coords)) != len(coords):
        dup = sorted({c for c in coords if coords.count(c) > 1})
        raise ManifestError(f"duplicate coordinate label(s) {dup}", "chart.coordinates")
    time = obj.get("time")
    if time is not None and time not in coords:
        raise ManifestError(f"time label {time!r} is not a coordinate", "chart.time")
    return Chart.from_labels(coords, time)


def parse_complement(entries, chart: Chart, where="complement") -> dict:
    """``[{"z", "x", "coeff_terms"}]`` -> ``{(z, x): PolyScalar}``."""
    if not isinstance(entries, list):
        raise ManifestError("expected a list of table entries", where)
    table = {}
    for i, ent in enumerate(entries):
        loc = f"{where}[{i}]"
        _require_keys(ent, ("z", "x", "coeff_terms"), loc, required=("z", "x", "coeff_terms"))
        for key in ("z", "x"):
            if ent[key] not in chart.names:
                raise ManifestError(f"unknown coordinate {ent[key]!r}", f"{loc}.{key}")
        _check_terms(ent["coeff_terms"], chart, f"{loc}.coeff_terms")
        key = (ent["z"], ent["x"])
        if key in table:
            raise ManifestError(f"duplicate entry {key}", loc)
        table[key] = scalar_from_terms(chart, ent["coeff_terms"])
    return table


def _decode(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None


def parse_manifest(text: str) -> Manifest:
    data = _decode(text)
    if isinstance(data, dict) and ("charts" in data or isinstance(data.get("chart"), list)):
        raise ManifestError("manifests describe a single chart; multi-chart input is not supported", "chart")
    _require_keys(data, TOP_FIELDS, "manifest", required=("chart", "omega", "eta"))
    chart = _chart(data["chart"])
    omega = _form(data["omega"], chart, 2, "omega")
    eta = _form(data["eta"], chart, 1, "eta")

    sub = data.get("submanifold")
    if sub is not None:
        if not isinstance(sub, list) or any(l not in chart.names for l in sub) or len(set(sub)) != len(sub):
            raise ManifestError("submanifold must list distinct chart labels", "submanifold")
        if chart.time_label in sub:
            raise ManifestError("the time coordinate cannot vanish on the submanifold", "submanifold")
        sub = tuple(sub)

    comp = parse_complement(data["complement"], chart) if "complement" in data else None

    ver = Verification()
    if "verification" in data:
        v = data["verification"]
        _require_keys(v, ("radius", "grid", "steps", "tol"), "verification")
        ver = Verification(
            radius=_rational(v.get("radius", ver.radius), "verification.radius"),
            grid=_int(v.get("grid", ver.grid), "verification.grid"),
            steps=_int(v.get("steps", ver.steps), "verification.steps"),
            tol=_float(v.get("tol", ver.tol), "verification.tol"),
        )
        if ver.radius <= 0:
            raise ManifestError("radius must be positive", "verification.radius")

    thick = None
    if "thickening" in data:
        t = data["thickening"]
        _require_keys(t, ("base_dim", "fiber_dim", "liouville"), "thickening", required=("base_dim", "fiber_dim", "liouville"))
        base = _int(t["base_dim"], "thickening.base_dim")
        fiber = _int(t["fiber_dim"], "thickening.fiber_dim", minimum=0)
        if base + fiber != chart.dim:
            raise ManifestError("base_dim + fiber_dim must equal the chart dimension", "thickening")
        thick = {"base_dim": base, "fiber_dim": fiber, "liouville": _form(t["liouville"], chart, 1, "thickening.liouville")}
    return Manifest(chart, omega, eta, sub, comp, ver, thick)


def load_manifest(path) -> Manifest:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ManifestError(str(exc.strerror or exc), str(path)) from None
    return parse_manifest(text)


def _num_text(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def manifest_dict(m: Manifest) -> dict:
    chart = {"coordinates": list(m.chart.names)}
    if m.chart.time_label is not None:
        chart["time"] = m.chart.time_label
    out = {"chart": chart, "omega": form_to_records(m.omega), "eta": form_to_records(m.eta)}
    if m.submanifold is not None:
        out["submanifold"] = list(m.submanifold)
    if m.complement is not None:
        out["complement"] = [
            {"z": z, "x": x, "coeff_terms": scalar_to_terms(f, m.chart.names)}
            for (z, x), f in sorted(m.complement.items())
        ]
    v = m.verification
    out["verification"] = {"radius": _num_text(v.radius), "grid": v.grid, "steps": v.steps, "tol": v.tol}
    if m.thickening is not None:
        out["thickening"] = {
            "base_dim": m.thickening["base_dim"],
            "fiber_dim": m.thickening["fiber_dim"],
            "liouville": form_to_records(m.thickening["liouville"]),
        }
    return out


def emit_manifest(m: Manifest) -> str:
    return json.dumps(manifest_dict(m), indent=2) + "\n"
