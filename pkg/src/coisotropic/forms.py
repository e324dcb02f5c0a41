"""Differential forms with polynomial coefficients on a single coordinate chart.

Forms are stored sparsely as ``{strictly increasing index tuple: PolyScalar}``.
All arithmetic is exact; nothing here touches floating point except the
``lambdify`` helpers used by the numerical flow code.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ChartMismatch, DegreeError
from .polynomial import PolyScalar, as_fraction

__all__ = [
    "Chart",
    "PolyForm",
    "PolyMap",
    "PolyVectorField",
    "wedge",
    "d",
    "interior",
    "pullback",
    "evaluate",
]


@dataclass(frozen=True)
class Chart:
    """Ordered coordinate labels, optionally marking one as the time coordinate."""

    names: tuple
    time_index: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        if not self.names:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate coordinate labels in {self.names}")
        if self.time_index is not None and not 0 <= self.time_index < len(self.names):
            raise ValueError(f"time_index {self.time_index} outside chart of dim {len(self.names)}")

    @classmethod
    def from_labels(cls, labels: Sequence[str], time: str | None = None) -> "Chart":
        labels = tuple(labels)
        return cls(labels, labels.index(time) if time is not None else None)

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def time_label(self) -> str | None:
        return None if self.time_index is None else self.names[self.time_index]

    def index(self, label: str) -> int:
        try:
            return self.names.index(label)
        except ValueError:
            raise KeyError(f"unknown coordinate {label!r} in chart {self.names}") from None

    def coord(self, label: str) -> PolyScalar:
        return PolyScalar.variable(self.dim, self.index(label))

    def coords(self) -> list:
        return [PolyScalar.variable(self.dim, i) for i in range(self.dim)]

    def const(self, value) -> PolyScalar:
        return PolyScalar.constant(self.dim, value)

    def dx(self, label: str) -> "PolyForm":
        return PolyForm(self, 1, {(self.index(label),): self.const(1)})

    def partial(self, label: str) -> "PolyVectorField":
        i = self.index(label)
        return PolyVectorField(self, [self.const(1 if j == i else 0) for j in range(self.dim)])


def _sort_sign(indices: Sequence[int]):
    """Sort indices; return (sign, sorted tuple), sign 0 on repeats."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    # insertion sort counting transpositions; k is small
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


class PolyForm:
    """A k-form ``sum_I f_I dx^I`` with polynomial coefficients ``f_I``."""

    __slots__ = ("chart", "degree", "terms")

    def __init__(self, chart: Chart, degree: int, terms: Mapping[tuple, object] | None = None):
        if degree < 0:
            raise DegreeError("form degree must be nonnegative")
        self.chart = chart
        self.degree = int(degree)
        clean: dict = {}
        n = chart.dim
        if degree <= n:
            for idx, coeff in (terms or {}).items():
                idx = tuple(int(i) for i in idx)
                if len(idx) != degree:
                    raise DegreeError(f"index tuple {idx} does not match degree {degree}")
                if any(not 0 <= i < n for i in idx):
                    raise IndexError(f"index tuple {idx} outside chart of dim {n}")
                sign, key = _sort_sign(idx)
                if not sign:
                    continue
                if not isinstance(coeff, PolyScalar):
                    coeff = PolyScalar.constant(n, coeff)
                elif coeff.nvars != n:
                    raise ChartMismatch(f"coefficient has {coeff.nvars} variables, chart has {n}")
                c = clean.get(key)
                clean[key] = coeff * sign if c is None else c + coeff * sign
        self.terms = {k: v for k, v in clean.items() if not v.is_zero()}

    @classmethod
    def _raw(cls, chart, degree, terms):
        obj = cls.__new__(cls)
        obj.chart = chart
        obj.degree = degree
        obj.terms = terms
        return obj

    @classmethod
    def zero(cls, chart: Chart, degree: int) -> "PolyForm":
        return cls._raw(chart, degree, {})

    @classmethod
    def scalar(cls, chart: Chart, value) -> "PolyForm":
        if not isinstance(value, PolyScalar):
            value = PolyScalar.constant(chart.dim, value)
        return cls(chart, 0, {(): value})

    @classmethod
    def from_labels(cls, chart: Chart, terms: Mapping[tuple, object]) -> "PolyForm":
        """Build from ``{("x", "y"): coeff}``; label order may be arbitrary."""
        items = list(terms.items())
        if not items:
            raise ValueError("degree is ambiguous for an empty term map; use PolyForm.zero")
        k = len(items[0][0])
        return cls(chart, k, {tuple(chart.index(l) for l in labels): c for labels, c in items})

    # -- basic protocol ---------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, indices: Sequence[int]) -> PolyScalar:
        sign, key = _sort_sign(indices)
        c = self.terms.get(key)
        if not sign or c is None:
            return PolyScalar.zero(self.chart.dim)
        return c if sign > 0 else -c

    def as_scalar(self) -> PolyScalar:
        if self.degree != 0:
            raise DegreeError(f"expected a 0-form, got degree {self.degree}")
        return self.terms.get((), PolyScalar.zero(self.chart.dim))

    def _check(self, other: "PolyForm"):
        if not isinstance(other, PolyForm):
            raise TypeError(f"expected PolyForm, got {type(other).__name__}")
        if other.chart != self.chart:
            raise ChartMismatch(f"charts differ: {self.chart.names} vs {other.chart.names}")

    def __add__(self, other):
        if not isinstance(other, PolyForm):
            return NotImplemented
        self._check(other)
        if other.degree != self.degree:
            raise DegreeError(f"cannot add forms of degree {self.degree} and {other.degree}")
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out[k] + v if k in out else v
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return PolyForm._raw(self.chart, self.degree, out)

    def __neg__(self):
        return PolyForm._raw(self.chart, self.degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, PolyForm):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PolyForm):
            return wedge(self, other)
        if not isinstance(other, PolyScalar):
            try:
                other = PolyScalar.constant(self.chart.dim, as_fraction(other))
            except TypeError:
                return NotImplemented
        elif other.nvars != self.chart.dim:
            raise ChartMismatch("scalar lives on a different chart")
        out = {}
        for k, v in self.terms.items():
            p = v * other
            if not p.is_zero():
                out[k] = p
        return PolyForm._raw(self.chart, self.degree, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = as_fraction(other)
        if not c:
            raise ZeroDivisionError("division of a form by zero")
        return self * (1 / c)

    def __eq__(self, other):
        if not isinstance(other, PolyForm):
            return NotImplemented
        return self.chart == other.chart and self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        return hash((self.chart, self.degree, frozenset(self.terms.items())))

    def wedge(self, other: "PolyForm") -> "PolyForm":
        return wedge(self, other)

    def restrict_to_zero(self, labels: Iterable[str]) -> "PolyForm":
        """Set the named coordinates to zero in every coefficient (keeps all differentials)."""
        idx = [self.chart.index(l) for l in labels]
        out = {}
        for k, v in self.terms.items():
            p = v.set_zero(idx)
            if not p.is_zero():
                out[k] = p
        return PolyForm._raw(self.chart, self.degree, out)

    def is_constant(self) -> bool:
        return all(v.is_constant() for v in self.terms.values())

    def lambdify(self) -> Callable[[np.ndarray], np.ndarray]:
        """Float evaluator on ``(N, dim)`` points.

        Returns ``(N,)`` for 0-forms, ``(N, dim)`` for 1-forms and skew
        ``(N, dim, dim)`` arrays for 2-forms.
        """
        n = self.chart.dim
        funcs = [(k, v.lambdify()) for k, v in sorted(self.terms.items())]
        k = self.degree
        if k > 2:
            raise DegreeError("float evaluation is only provided for degree <= 2")

        def f(pts):
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            N = pts.shape[0]
            if k == 0:
                return funcs[0][1](pts) if funcs else np.zeros(N)
            if k == 1:
                out = np.zeros((N, n))
                for (i,), fn in funcs:
                    out[:, i] = fn(pts)
                return out
            out = np.zeros((N, n, n))
            for (i, j), fn in funcs:
                val = fn(pts)
                out[:, i, j] = val
                out[:, j, i] = -val
            return out

        return f

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        names = self.chart.names
        parts = []
        for idx, c in sorted(self.terms.items()):
            basis = "^".join(f"d{names[i]}" for i in idx)
            coeff = c.to_str(names)
            if not basis:
                parts.append(coeff)
            elif coeff == "1":
                parts.append(basis)
            else:
                parts.append(f"({coeff})*{basis}")
        return " + ".join(parts)

    def __repr__(self):
        return f"PolyForm[{self.degree}]({self.to_str()})"


class PolyVectorField:
    """Vector field with polynomial components ``sum_i X^i d/dx^i``."""

    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components: Sequence):
        if len(components) != chart.dim:
            raise ValueError(f"expected {chart.dim} components, got {len(components)}")
        comps = []
        for c in components:
            if not isinstance(c, PolyScalar):
                c = PolyScalar.constant(chart.dim, c)
            elif c.nvars != chart.dim:
                raise ChartMismatch("component lives on a different chart")
            comps.append(c)
        self.chart = chart
        self.components = tuple(comps)

    @classmethod
    def zero(cls, chart: Chart) -> "PolyVectorField":
        return cls(chart, [0] * chart.dim)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def coordinate_label(self) -> str | None:
        """Label ``u`` if this field is exactly ``d/du``, else None."""
        hits = [i for i, c in enumerate(self.components) if not c.is_zero()]
        if len(hits) == 1 and self.components[hits[0]] == 1:
            return self.chart.names[hits[0]]
        return None

    def __add__(self, other):
        if not isinstance(other, PolyVectorField) or other.chart != self.chart:
            return NotImplemented
        return PolyVectorField(self.chart, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other):
        if not isinstance(other, PolyVectorField) or other.chart != self.chart:
            return NotImplemented
        return PolyVectorField(self.chart, [a - b for a, b in zip(self.components, other.components)])

    def __mul__(self, other):
        return PolyVectorField(self.chart, [c * other for c in self.components])

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        return self.chart == other.chart and self.components == other.components

    def __hash__(self):
        return hash((self.chart, self.components))

    def evaluate(self, point: Sequence) -> tuple:
        pt = [as_fraction(x) for x in point]
        return tuple(c.evaluate(pt) for c in self.components)

    def lambdify(self) -> Callable[[np.ndarray], np.ndarray]:
        funcs = [c.lambdify() for c in self.components]

        def f(pts):
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            return np.stack([fn(pts) for fn in funcs], axis=1)

        return f

    def __repr__(self):
        names = self.chart.names
        parts = [f"({c.to_str(names)})*d/d{n}" for c, n in zip(self.components, names) if not c.is_zero()]
        return "PolyVectorField(" + (" + ".join(parts) or "0") + ")"


class PolyMap:
    """Polynomial map ``source -> target`` given by one component per target coordinate."""

    __slots__ = ("source", "target", "components")

    def __init__(self, source: Chart, target: Chart, components: Sequence):
        if len(components) != target.dim:
            raise ValueError(f"expected {target.dim} components, got {len(components)}")
        comps = []
        for c in components:
            if not isinstance(c, PolyScalar):
                c = PolyScalar.constant(source.dim, c)
            elif c.nvars != source.dim:
                raise ChartMismatch("component is not a polynomial on the source chart")
            comps.append(c)
        self.source = source
        self.target = target
        self.components = tuple(comps)

    @classmethod
    def identity(cls, chart: Chart) -> "PolyMap":
        return cls(chart, chart, chart.coords())

    @classmethod
    def by_labels(cls, source: Chart, target: Chart, components: Mapping[str, PolyScalar]) -> "PolyMap":
        """Components keyed by target label; missing labels map to the same-named source coordinate."""
        comps = []
        for name in target.names:
            if name in components:
                comps.append(components[name])
            else:
                comps.append(source.coord(name))
        return cls(source, target, comps)

    def compose(self, inner: "PolyMap") -> "PolyMap":
        """``self o inner``."""
        if inner.target != self.source:
            raise ChartMismatch("cannot compose: inner target differs from outer source")
        return PolyMap(inner.source, self.target, [c.substitute(inner.components) for c in self.components])

    def evaluate(self, point: Sequence) -> tuple:
        pt = [as_fraction(x) for x in point]
        return tuple(c.evaluate(pt) for c in self.components)

    def __eq__(self, other):
        if not isinstance(other, PolyMap):
            return NotImplemented
        return (self.source, self.target, self.components) == (other.source, other.target, other.components)

    def __hash__(self):
        return hash((self.source, self.target, self.components))


# -- operations -------------------------------------------------------------

def wedge(*forms: PolyForm) -> PolyForm:
    """Exterior product of one or more forms on the same chart."""
    if not forms:
        raise ValueError("wedge needs at least one form")
    result = forms[0]
    for b in forms[1:]:
        result = _wedge2(result, b)
    return result


def _wedge2(a: PolyForm, b: PolyForm) -> PolyForm:
    a._check(b)
    chart = a.chart
    deg = a.degree + b.degree
    if deg > chart.dim:
        return PolyForm.zero(chart, deg)
    out: dict = {}
    for I, f in a.terms.items():
        for J, g in b.terms.items():
            sign, key = _sort_sign(I + J)
            if not sign:
                continue
            p = f * g
            if sign < 0:
                p = -p
            c = out.get(key)
            out[key] = p if c is None else c + p
    return PolyForm._raw(chart, deg, {k: v for k, v in out.items() if not v.is_zero()})


def d(a: PolyForm) -> PolyForm:
    """Exterior derivative."""
    chart = a.chart
    deg = a.degree + 1
    if deg > chart.dim:
        return PolyForm.zero(chart, deg)
    out: dict = {}
    for I, f in a.terms.items():
        for j in range(chart.dim):
            if j in I:
                continue
            df = f.diff(j)
            if df.is_zero():
                continue
            # dx^j ^ dx^I: move dx^j past the entries of I smaller than j
            pos = sum(1 for i in I if i < j)
            key = tuple(sorted(I + (j,)))
            if pos % 2:
                df = -df
            c = out.get(key)
            out[key] = df if c is None else c + df
    return PolyForm._raw(chart, deg, {k: v for k, v in out.items() if not v.is_zero()})


def interior(X: PolyVectorField, a: PolyForm) -> PolyForm:
    """Contraction ``i_X a``; inserts X into the first slot."""
    if a.degree == 0:
        raise DegreeError("interior product of a 0-form is undefined")
    if X.chart != a.chart:
        raise ChartMismatch(f"charts differ: {X.chart.names} vs {a.chart.names}")
    out: dict = {}
    for I, f in a.terms.items():
        for s, i in enumerate(I):
            comp = X.components[i]
            if comp.is_zero():
                continue
            p = comp * f
            if s % 2:
                p = -p
            key = I[:s] + I[s + 1:]
            c = out.get(key)
            out[key] = p if c is None else c + p
    return PolyForm._raw(a.chart, a.degree - 1, {k: v for k, v in out.items() if not v.is_zero()})


def pullback(m: PolyMap, a: PolyForm) -> PolyForm:
    """Pull ``a`` (on ``m.target``) back to ``m.source``."""
    if a.chart != m.target:
        raise ChartMismatch(f"form lives on {a.chart.names}, map targets {m.target.names}")
    src = m.source
    k = a.degree
    if k > src.dim:
        return PolyForm.zero(src, k)
    differentials = {}
    result = PolyForm.zero(src, k)
    for I, f in a.terms.items():
        coeff = f.substitute(m.components)
        if coeff.is_zero():
            continue
        term = PolyForm.scalar(src, coeff)
        for i in I:
            if i not in differentials:
                differentials[i] = d(PolyForm.scalar(src, m.components[i]))
            term = _wedge2(term, differentials[i])
            if term.is_zero():
                break
        else:
            result = result + term
    return result


def evaluate(a: PolyForm, point: Sequence):
    """Exact value of ``a`` at a rational point.

    Degree 0 gives a Fraction, degree 1 a covector tuple, degree 2 a skew
    matrix (``M[i][j] = a(e_i, e_j)``).  Higher degrees give the full
    alternating table ``{ordered index tuple: value}`` with zero entries omitted.
    """
    n = a.chart.dim
    if len(point) != n:
        raise ValueError(f"point has {len(point)} coordinates, chart dim is {n}")
    pt = [as_fraction(x) for x in point]
    vals = {I: f.evaluate(pt) for I, f in a.terms.items()}
    if a.degree == 0:
        return vals.get((), Fraction(0))
    if a.degree == 1:
        cov = [Fraction(0)] * n
        for (i,), v in vals.items():
            cov[i] = v
        return tuple(cov)
    if a.degree == 2:
        mat = [[Fraction(0)] * n for _ in range(n)]
        for (i, j), v in vals.items():
            mat[i][j] = v
            mat[j][i] = -v
        return tuple(tuple(r) for r in mat)
    table = {}
    for I, v in vals.items():
        if not v:
            continue
        for perm in permutations(I):
            sign, _ = _sort_sign(perm)
            table[perm] = v * sign
    return table


def canonical_two_form(chart: Chart, labels: Sequence[str]) -> PolyForm:
    """``sum_i dx^i ^ dx^{p+i}`` over the 2p given labels."""
    if len(labels) % 2:
        raise ValueError("need an even number of labels")
    p = len(labels) // 2
    terms = {(chart.index(labels[i]), chart.index(labels[p + i])): 1 for i in range(p)}
    return PolyForm(chart, 2, terms) if terms else PolyForm.zero(chart, 2)


def basis_forms(chart: Chart, degree: int):
    """All ``dx^I`` with ``I`` strictly increasing, in lexicographic order."""
    for I in combinations(range(chart.dim), degree):
        yield I, PolyForm(chart, degree, {I: 1})


# -- serialization --------------------------------------------------------

def _fraction_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def scalar_to_terms(f: PolyScalar, names: Sequence[str]) -> list:
    return [
        {"monomial": {names[i]: k for i, k in enumerate(e) if k}, "coeff": _fraction_text(c)}
        for e, c in sorted(f.terms.items())
    ]


def form_to_records(a: PolyForm) -> list:
    """Canonical record list: one record per basis element, lexicographic order."""
    names = a.chart.names
    return [
        {"indices": [names[i] for i in I], "coeff_terms": scalar_to_terms(a.terms[I], names)}
        for I in sorted(a.terms)
    ]


def scalar_from_terms(chart: Chart, coeff_terms: Sequence[Mapping]) -> PolyScalar:
    terms = {}
    for t in coeff_terms:
        exp = [0] * chart.dim
        for label, k in t.get("monomial", {}).items():
            if not isinstance(k, int) or k < 0:
                raise ValueError(f"exponent of {label!r} must be a nonnegative integer")
            exp[chart.index(label)] += k
        key = tuple(exp)
        terms[key] = terms.get(key, 0) + as_fraction(t["coeff"])
    return PolyScalar(chart.dim, terms)


def form_from_records(chart: Chart, degree: int, records: Sequence[Mapping]) -> PolyForm:
    terms: dict = {}
    for rec in records:
        idx = tuple(chart.index(l) for l in rec["indices"])
        if len(idx) != degree:
            raise DegreeError(f"record {rec['indices']} does not have degree {degree}")
        coeff = scalar_from_terms(chart, rec.get("coeff_terms", []))
        sign, key = _sort_sign(idx)
        if not sign:
            continue
        prev = terms.get(key)
        c = coeff if sign > 0 else -coeff
        terms[key] = c if prev is None else prev + c
    return PolyForm(chart, degree, terms)
