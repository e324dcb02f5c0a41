"""Command-line front end.

Exit codes: 0 when every check passes, 1 on a failed check or a module error,
2 when an input cannot be parsed.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import rational as Q
from .coslinalg import (
    CosymplecticLinearData,
    SkewForm,
    canonical_matrix,
    darboux_precosymplectic,
    darboux_presymplectic,
    reeb_linear,
    skew_rank_kernel,
)
from .errors import CoisotropicError, ManifestError
from .forms import PolyMap, d, evaluate, pullback
from .manifest import Manifest, emit_manifest, load_manifest, parse_complement
from .moser import SubmanifoldSpec, coordinate_reeb, verify_equivalence
from .polynomial import as_fraction
from .report import Check, plain
from .sampling import box_points
from .thicken import (
    PrecosymplecticChartStructure,
    ThickenedStructure,
    choose_complement,
    thickened_structure,
    verify_embedding,
)

__all__ = ["Report", "execute", "emit_report", "main"]

CHECK_CAP = 243


@dataclass
class Report:
    command: str
    status: str = "pass"
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    error: dict | None = None

    def finish(self) -> "Report":
        if self.error is None:
            self.status = "pass" if all(c.passed for c in self.checks) else "fail"
        return self

    @property
    def exit_code(self) -> int:
        return 0 if self.status == "pass" else 1

    def to_dict(self) -> dict:
        out = {"command": self.command, "status": self.status, "checks": [c.to_dict() for c in self.checks]}
        if self.info:
            out["info"] = plain(self.info)
        if self.artifacts:
            out["artifacts"] = list(self.artifacts)
        if self.error is not None:
            out["error"] = self.error
        return out


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3e}"
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_fmt(x) for x in v) + ")"
    return str(v)


def emit_report(r: Report, fmt: str = "structured") -> str:
    if fmt == "structured":
        return json.dumps(r.to_dict(), indent=2) + "\n"
    lines = [f"{r.command}: {r.status.upper()}"]
    if r.error is not None:
        lines.append(f"  error {r.error['name']}: {r.error['message']}")
    if r.checks:
        width = max(len(c.name) for c in r.checks)
        lines.append(f"  {'check'.ljust(width)}  result  residual    worst point")
        for c in r.checks:
            res = "exact" if c.residual is None else f"{c.residual:.3e}"
            pt = "-" if c.worst_point is None else _fmt(plain(c.worst_point))
            lines.append(f"  {c.name.ljust(width)}  {'pass' if c.passed else 'FAIL'}    {res:<10}  {pt}")
            if c.witness is not None:
                lines.append(f"  {' ' * width}  witness {_fmt(plain(c.witness))}")
    for key, value in plain(r.info).items():
        lines.append(f"  {key}: {value}")
    for path in r.artifacts:
        lines.append(f"  wrote {path}")
    return "\n".join(lines) + "\n"


# -- commands ---------------------------------------------------------------------------

def _check(m: Manifest) -> Report:
    rep = Report("check")
    rep.checks.append(Check("omega-closed", d(m.omega).is_zero()))
    rep.checks.append(Check("eta-closed", d(m.eta).is_zero()))
    v = m.verification
    points = box_points(m.chart.dim, v.radius, v.grid, cap=CHECK_CAP, seed=5)
    ranks = Check("constant-rank", True, detail={"samples": len(points)})
    pre = Check("precosymplectic", True, detail={"samples": len(points)})
    rank0 = None
    cosymplectic = True
    for pt in points:
        data = CosymplecticLinearData(evaluate(m.omega, pt), evaluate(m.eta, pt))
        r, _ = skew_rank_kernel(data.omega)
        if rank0 is None:
            rank0 = r
        if r != rank0 and ranks.passed:
            ranks.passed, ranks.worst_point, ranks.detail["rank"] = False, pt, r
        kind = data.classify()
        cosymplectic &= kind == "cosymplectic"
        if kind == "neither" and pre.passed:
            pre.passed, pre.worst_point = False, pt
    rep.checks += [ranks, pre]
    p = rank0 // 2
    rep.info.update({"p": p, "k": m.chart.dim - 1 - 2 * p, "kind": "cosymplectic" if cosymplectic else "precosymplectic"})
    u = coordinate_reeb(m.omega, m.eta)
    if u is not None:
        rep.info["reeb"] = f"d/d{u}"
    elif cosymplectic:
        origin = [Fraction(0)] * m.chart.dim
        rep.info["reeb_at_origin"] = reeb_linear(CosymplecticLinearData(evaluate(m.omega, origin), evaluate(m.eta, origin)))
    return rep


def _read_matrix(path) -> tuple:
    try:
        with open(path, encoding="utf-8") as fh:
            rows = [line.split() for line in fh if line.strip() and not line.lstrip().startswith("#")]
    except OSError as exc:
        raise ManifestError(str(exc.strerror or exc), str(path)) from None
    try:
        return tuple(tuple(as_fraction(x) for x in row) for row in rows)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ManifestError(f"bad rational entry ({exc})", str(path)) from None


def _darboux(matrix_path, eta_path=None) -> Report:
    rep = Report("darboux")
    mat = _read_matrix(matrix_path)
    n = len(mat)
    if n == 0 or any(len(r) != n for r in mat):
        raise ManifestError("matrix must be square and nonempty", str(matrix_path))
    try:
        form = SkewForm(mat)
    except ValueError as exc:
        raise ManifestError(str(exc), str(matrix_path)) from None
    if eta_path is None:
        basis = darboux_presymplectic(form)
        t_index = None
    else:
        eta = _read_matrix(eta_path)
        if len(eta) != 1 or len(eta[0]) != n:
            raise ManifestError(f"expected one row of {n} entries", str(eta_path))
        data = CosymplecticLinearData(form, eta[0])
        basis = darboux_precosymplectic(data)
        t_index = basis.t_index
        ok = Q.matvec(Q.transpose(basis.basis), data.eta) == Q.unit(n, basis.t_index)
        rep.checks.append(Check("eta-normal-form", ok))
    congruent = Q.matmul(Q.transpose(basis.basis), Q.matmul(form.mat, basis.basis))
    rep.checks.insert(0, Check("canonical-congruence", congruent == canonical_matrix(n, basis.p)))
    rep.info.update({"p": basis.p, "k": basis.k, "t_index": t_index, "basis_columns": basis.columns()})
    return rep


def _structure(m: Manifest) -> PrecosymplecticChartStructure:
    return PrecosymplecticChartStructure.from_forms(m.chart, m.omega, m.eta)


def _thickened_manifest(m: Manifest, t: ThickenedStructure) -> Manifest:
    return Manifest(
        t.chart, t.omega_G, t.eta_G, submanifold=tuple(t.fiber_labels), complement=None,
        verification=m.verification,
        thickening={"base_dim": t.base_dim, "fiber_dim": t.fiber_dim, "liouville": t.liouville},
    )


def _embedding_report(command, t, s, m) -> Report:
    rep = Report(command)
    ver = verify_embedding(t, s, m.verification.radius, m.verification.grid)
    rep.checks = ver.checks
    rep.info.update({"p": s.p, "k": s.k, "box": ver.box, "grid": ver.grid, **ver.info})
    return rep


def _embed(m: Manifest, complement=None, out=None) -> Report:
    s = _structure(m)
    if complement is None or complement == "coordinate":
        policy = m.complement if (complement is None and m.complement) else "coordinate"
    else:
        try:
            with open(complement, encoding="utf-8") as fh:
                entries = json.load(fh)
        except OSError as exc:
            raise ManifestError(str(exc.strerror or exc), str(complement)) from None
        except json.JSONDecodeError as exc:
            raise ManifestError(exc.msg, f"{complement}: line {exc.lineno} column {exc.colno}") from None
        policy = parse_complement(entries, m.chart, where=str(complement))
    t = thickened_structure(s, choose_complement(s, policy))
    rep = _embedding_report("embed", t, s, m)
    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(emit_manifest(_thickened_manifest(m, t)))
        rep.artifacts.append(str(out))
    return rep


def _verify_embed(m: Manifest, tm: Manifest) -> Report:
    if tm.thickening is None:
        raise ManifestError("missing thickening section", "thickening")
    s = _structure(m)
    t = ThickenedStructure(tm.chart, tm.omega, tm.eta, tm.thickening["liouville"], tm.thickening["base_dim"], tm.thickening["fiber_dim"])
    if t.base_chart != s.chart:
        raise ManifestError("thickened chart does not extend the base chart", "chart")
    rep = _embedding_report("verify-embed", t, s, m)
    pr = PolyMap(t.chart, s.chart, t.chart.coords()[: t.base_dim])
    consistent = t.omega_G == pullback(pr, s.omega) + d(t.liouville) and t.eta_G == pullback(pr, s.eta)
    rep.checks.insert(0, Check("construction-consistent", consistent))
    return rep


def _moser(m0: Manifest, m1: Manifest) -> Report:
    if m0.chart != m1.chart:
        raise ManifestError("both manifests must use the same chart", "chart")
    sub = m0.submanifold if m0.submanifold is not None else m1.submanifold
    if sub is None:
        raise ManifestError("a submanifold is required for moser", "submanifold")
    v = m0.verification
    ver = verify_equivalence((m0.omega, m0.eta), (m1.omega, m1.eta), SubmanifoldSpec(sub), v.grid, v.steps, v.tol, v.radius)
    rep = Report("moser")
    rep.checks = ver.checks
    rep.info.update({"box": ver.box, "grid": ver.grid, "steps": ver.steps, "tol": v.tol, **ver.info})
    return rep


def execute(command: str, *inputs, **options) -> Report:
    """Run ``command`` and return its report.

    Module errors become ``status="error"``; ManifestError propagates so the
    caller can exit with the parse-error code.
    """
    try:
        if command == "check":
            rep = _check(*inputs)
        elif command == "darboux":
            rep = _darboux(*inputs)
        elif command == "embed":
            rep = _embed(*inputs, **options)
        elif command == "verify-embed":
            rep = _verify_embed(*inputs)
        elif command == "moser":
            rep = _moser(*inputs)
        else:
            raise ValueError(f"unknown command {command!r}")
    except ManifestError:
        raise
    except (CoisotropicError, ValueError) as exc:
        name = exc.name if isinstance(exc, CoisotropicError) else type(exc).__name__
        rep = Report(command, status="error", error={"name": name, "message": str(exc)})
        point = getattr(exc, "point", None)
        if point is not None:
            rep.error["point"] = plain(point)
        return rep
    return rep.finish()


# -- argument parsing -----------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--radius", help="verification box radius (rational, e.g. 1/2)")
    common.add_argument("--grid", type=int, help="grid points per axis")
    common.add_argument("--steps", type=int, help="RK4 steps")
    common.add_argument("--tol", type=float, help="residual tolerance")
    common.add_argument("--format", choices=("structured", "human", "both"), default="structured")

    ap = argparse.ArgumentParser(prog="coisotropic", description="Cosymplectic structures, thickenings and Moser flows.")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common], help="validate a (pre)cosymplectic manifest")
    p.add_argument("manifest")
    p = sub.add_parser("darboux", parents=[common], help="Darboux basis of a rational skew matrix")
    p.add_argument("matrix")
    p.add_argument("--eta")
    p = sub.add_parser("embed", parents=[common], help="build and verify the coisotropic thickening")
    p.add_argument("manifest")
    p.add_argument("--complement", default=None, help="'coordinate' or a JSON file with an A-table")
    p.add_argument("-o", "--output", required=True)
    p = sub.add_parser("verify-embed", parents=[common], help="verify a thickened manifest against its base")
    p.add_argument("manifest")
    p.add_argument("thickened")
    p = sub.add_parser("moser", parents=[common], help="two-stage Moser equivalence of two structures")
    p.add_argument("manifest0")
    p.add_argument("manifest1")
    return ap


def _overrides(args) -> dict:
    out = {"grid": args.grid, "steps": args.steps, "tol": args.tol}
    if args.radius is not None:
        try:
            out["radius"] = as_fraction(args.radius)
        except (TypeError, ValueError, ZeroDivisionError):
            raise ManifestError(f"bad radius {args.radius!r}", "--radius") from None
    for key in ("grid", "steps"):
        if out[key] is not None and out[key] < 1:
            raise ManifestError(f"{key} must be >= 1", f"--{key}")
    return out


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        ov = _overrides(args)
        load = lambda path: load_manifest(path).with_overrides(**ov)
        if args.command == "check":
            rep = execute("check", load(args.manifest))
        elif args.command == "darboux":
            rep = execute("darboux", args.matrix, args.eta)
        elif args.command == "embed":
            rep = execute("embed", load(args.manifest), complement=args.complement, out=args.output)
        elif args.command == "verify-embed":
            rep = execute("verify-embed", load(args.manifest), load(args.thickened))
        else:
            rep = execute("moser", load(args.manifest0), load(args.manifest1))
    except ManifestError as exc:
        rep = Report(args.command, status="error", error={"name": exc.name, "message": str(exc)})
        _write(rep, args.format)
        return 2
    _write(rep, args.format)
    return rep.exit_code


def _write(rep: Report, fmt: str):
    if fmt in ("structured", "both"):
        sys.stdout.write(emit_report(rep, "structured"))
    if fmt == "human":
        sys.stdout.write(emit_report(rep, "human"))
    elif fmt == "both":
        sys.stderr.write(emit_report(rep, "human"))
