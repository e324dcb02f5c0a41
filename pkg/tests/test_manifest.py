import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from coisotropic.errors import ManifestError
from coisotropic.forms import Chart, PolyForm
from coisotropic.manifest import Manifest, Verification, emit_manifest, load_manifest, parse_manifest
from coisotropic.polynomial import PolyScalar

DATA = Path(__file__).parent / "data"

MINIMAL = {
    "chart": {"coordinates": ["x", "y", "t"], "time": "t"},
    "omega": [{"indices": ["x", "y"], "coeff_terms": [{"monomial": {}, "coeff": "1"}]}],
    "eta": [{"indices": ["t"], "coeff_terms": [{"monomial": {}, "coeff": "1"}]}],
}


def text(obj):
    return json.dumps(obj)


def variant(**changes):
    out = json.loads(json.dumps(MINIMAL))
    out.update(changes)
    return out


def test_minimal_manifest_gets_defaults():
    m = parse_manifest(text(MINIMAL))
    assert m.chart.names == ("x", "y", "t")
    assert m.chart.time_label == "t"
    assert m.verification == Verification(Fraction(1, 2), 5, 64, 1e-5)
    assert m.submanifold is None and m.complement is None and m.thickening is None
    assert m.omega.terms[(0, 1)] == PolyScalar.constant(3, 1)


def test_third_is_exact():
    m = parse_manifest(text(variant(omega=[{"indices": ["x", "y"], "coeff_terms": [{"monomial": {"x": 1}, "coeff": "1/3"}]}])))
    coeff = m.omega.terms[(0, 1)].terms[(1, 0, 0)]
    assert isinstance(coeff, Fraction) and coeff == Fraction(1, 3)


def test_float_coefficient_rejected():
    with pytest.raises(ManifestError, match="omega"):
        parse_manifest(text(variant(omega=[{"indices": ["x", "y"], "coeff_terms": [{"monomial": {}, "coeff": 0.5}]}])))


def test_duplicate_label_rejected():
    with pytest.raises(ManifestError, match="duplicate"):
        parse_manifest(text(variant(chart={"coordinates": ["x", "x", "t"], "time": "t"})))


def test_unknown_field_rejected():
    with pytest.raises(ManifestError, match="unknown field 'colour'"):
        parse_manifest(text(variant(colour="red")))
    with pytest.raises(ManifestError, match="verification"):
        parse_manifest(text(variant(verification={"grid": 3, "speed": 1})))


@pytest.mark.parametrize("bad", [{"charts": []}, {"chart": [MINIMAL["chart"], MINIMAL["chart"]]}])
def test_multi_chart_rejected(bad):
    with pytest.raises(ManifestError, match="single chart"):
        parse_manifest(text(variant(**bad)))


def test_json_syntax_error_reports_line():
    with pytest.raises(ManifestError, match="line 3 column"):
        parse_manifest('{\n  "chart": {},\n  oops\n}')


@pytest.mark.parametrize("field, value, where", [
    ("omega", [{"indices": ["x"], "coeff_terms": []}], "omega"),
    ("eta", [{"indices": ["w"], "coeff_terms": []}], "eta"),
    ("submanifold", ["t"], "submanifold"),
    ("verification", {"radius": "-1"}, "verification.radius"),
    ("verification", {"grid": 0}, "verification.grid"),
])
def test_field_diagnostics(field, value, where):
    with pytest.raises(ManifestError) as err:
        parse_manifest(text(variant(**{field: value})))
    assert where in str(err.value)


def test_missing_file_is_manifest_error(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(tmp_path / "absent.json")


def test_overrides_replace_only_given_values():
    m = parse_manifest(text(MINIMAL)).with_overrides(grid=3, steps=None, radius=Fraction(1, 4))
    assert m.verification == Verification(Fraction(1, 4), 3, 64, 1e-5)


def test_round_trip_of_example_files():
    for path in sorted(DATA.glob("*.json")):
        m = load_manifest(path)
        again = parse_manifest(emit_manifest(m))
        assert again == m
        assert emit_manifest(again) == emit_manifest(m)


def test_round_trip_with_complement_and_thickening():
    obj = variant(
        chart={"coordinates": ["x1", "x2", "t", "z1", "b1"], "time": "t"},
        submanifold=["b1"],
        complement=[{"z": "z1", "x": "x1", "coeff_terms": [{"monomial": {"t": 1}, "coeff": "-2/5"}]}],
        verification={"radius": "1/3", "grid": 3, "steps": 8, "tol": 1e-7},
        thickening={"base_dim": 4, "fiber_dim": 1, "liouville": [{"indices": ["z1"], "coeff_terms": [{"monomial": {"b1": 1}, "coeff": "1"}]}]},
        omega=[{"indices": ["x1", "x2"], "coeff_terms": [{"monomial": {}, "coeff": "1"}]}],
    )
    m = parse_manifest(text(obj))
    assert m.complement[("z1", "x1")].terms == {(0, 0, 1, 0, 0): Fraction(-2, 5)}
    assert parse_manifest(emit_manifest(m)) == m


coefficient = st.fractions(min_value=-5, max_value=5, max_denominator=7)
exponent = st.integers(0, 3)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([(0, 1), (0, 2), (1, 2)]), exponent, exponent, exponent, coefficient), max_size=5))
def test_round_trip_is_polynomial_identity(entries):
    chart = Chart.from_labels(["x", "y", "t"], "t")
    terms = {}
    for idx, a, b, c, coeff in entries:
        piece = PolyScalar(3, {(a, b, c): coeff})
        terms[idx] = terms.get(idx, PolyScalar.zero(3)) + piece
    omega = PolyForm(chart, 2, terms)
    m = Manifest(chart, omega, PolyForm(chart, 1, {(2,): PolyScalar.constant(3, 1)}))
    back = parse_manifest(emit_manifest(m))
    assert back.omega == omega and back.eta == m.eta
