"""JSON equation files, certificates and solution reports.

Reals are written as JSON numbers, except non-integral rationals, which are
``"p/q"`` strings so that exact input survives a round trip.  Integers and
``"p/q"`` strings parse to :class:`~fractions.Fraction`; JSON floats stay float.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .certify import HypothesisCertificate, NoAdmissibleSubsequence, NotCertifiable, SignEvidence
from .equation import AbelEquation, CurveFamily
from .flow import PeriodicSolution, PeriodicSolutionReport
from .poly import IsolatedRoot
from .trig import TrigPoly

SCHEMA = "abel-report/1"

_RATIONAL = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


class EquationFileError(ValueError):
    """Malformed equation file; ``field`` names the offending location."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


def parse_real(value: Any, field: str):
    if isinstance(value, bool):
        raise EquationFileError(field, "expected a real number, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise EquationFileError(field, "real numbers must be finite")
        return value
    if isinstance(value, str):
        m = _RATIONAL.match(value)
        if not m:
            raise EquationFileError(field, f"cannot read {value!r} as a number or 'p/q' rational")
        den = int(m.group(2)) if m.group(2) is not None else 1
        if den == 0:
            raise EquationFileError(field, "zero denominator")
        return Fraction(int(m.group(1)), den)
    raise EquationFileError(field, f"expected a number or 'p/q' string, got {type(value).__name__}")


def format_real(value) -> Any:
    """Inverse of :func:`parse_real` for canonical values."""
    if isinstance(value, IsolatedRoot):
        return format_real(value.exact) if value.exact is not None else float(value.value)
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return value
    v = float(value)
    return v if math.isfinite(v) else None


@dataclass(frozen=True)
class CoefficientRecord:
    const: Any
    cos: tuple
    sin: tuple

    @classmethod
    def parse(cls, raw: Any, field: str) -> "CoefficientRecord":
        if not isinstance(raw, dict):
            raise EquationFileError(field, "expected an object with keys const, cos, sin")
        unknown = set(raw) - {"const", "cos", "sin"}
        if unknown:
            raise EquationFileError(field, f"unknown keys {sorted(unknown)}")
        if "const" not in raw:
            raise EquationFileError(f"{field}.const", "missing")
        cos = raw.get("cos", [])
        sin = raw.get("sin", [])
        for name, arr in (("cos", cos), ("sin", sin)):
            if not isinstance(arr, list):
                raise EquationFileError(f"{field}.{name}", "expected a list")
        if len(cos) != len(sin):
            raise EquationFileError(field, f"cos has {len(cos)} entries but sin has {len(sin)}")
        return cls(parse_real(raw["const"], f"{field}.const"),
                   tuple(parse_real(v, f"{field}.cos[{i}]") for i, v in enumerate(cos)),
                   tuple(parse_real(v, f"{field}.sin[{i}]") for i, v in enumerate(sin)))

    @classmethod
    def from_trig(cls, p: TrigPoly) -> "CoefficientRecord":
        return cls(p.constant, tuple(p.cos_coeffs), tuple(p.sin_coeffs))

    def to_trig(self) -> TrigPoly:
        return TrigPoly.from_arrays(self.const, list(self.cos), list(self.sin))

    def to_json(self) -> dict:
        return {"const": format_real(self.const), "cos": [format_real(v) for v in self.cos],
                "sin": [format_real(v) for v in self.sin]}


@dataclass(frozen=True)
class EquationFile:
    degree: int
    coefficients: tuple
    curves: tuple | None = None  # (a, b) coefficient records
    nodes: tuple | None = None

    @classmethod
    def parse(cls, raw: Any) -> "EquationFile":
        if not isinstance(raw, dict):
            raise EquationFileError("", "top level must be a JSON object")
        unknown = set(raw) - {"degree", "coefficients", "curves", "nodes"}
        if unknown:
            raise EquationFileError("", f"unknown keys {sorted(unknown)}")
        degree = raw.get("degree")
        if isinstance(degree, bool) or not isinstance(degree, int) or degree < 1:
            raise EquationFileError("degree", "expected an integer >= 1")
        coeffs = raw.get("coefficients")
        if not isinstance(coeffs, list):
            raise EquationFileError("coefficients", "expected a list of coefficient records")
        if len(coeffs) != degree + 1:
            raise EquationFileError("coefficients", f"degree {degree} needs {degree + 1} coefficient records "
                                                    f"(a_0 .. a_{degree}), got {len(coeffs)}")
        records = tuple(CoefficientRecord.parse(c, f"coefficients[{i}]") for i, c in enumerate(coeffs))
        curves = None
        if raw.get("curves") is not None:
            cv = raw["curves"]
            if not isinstance(cv, dict) or set(cv) != {"a", "b"}:
                raise EquationFileError("curves", "expected an object with keys a and b")
            curves = (CoefficientRecord.parse(cv["a"], "curves.a"), CoefficientRecord.parse(cv["b"], "curves.b"))
        nodes = None
        if raw.get("nodes") is not None:
            if not isinstance(raw["nodes"], list):
                raise EquationFileError("nodes", "expected a list")
            nodes = tuple(parse_real(v, f"nodes[{i}]") for i, v in enumerate(raw["nodes"]))
        eqf = cls(degree, records, curves, nodes)
        eqf.equation()  # surfaces semantic errors (zero leading coefficient) here
        return eqf

    @classmethod
    def from_equation(cls, eq: AbelEquation, curves: CurveFamily | None = None, nodes=None) -> "EquationFile":
        if eq.denominator is not None:
            raise ValueError("quotient-form equations have no file representation")
        cv = (CoefficientRecord.from_trig(curves.a), CoefficientRecord.from_trig(curves.b)) if curves else None
        return cls(eq.degree, tuple(CoefficientRecord.from_trig(c) for c in eq.coefficients), cv,
                   tuple(nodes) if nodes is not None else None)

    def equation(self) -> AbelEquation:
        try:
            return AbelEquation([r.to_trig() for r in self.coefficients])
        except ValueError as exc:
            raise EquationFileError("coefficients", str(exc)) from exc

    def curve_family(self) -> CurveFamily | None:
        if self.curves is None:
            return None
        return CurveFamily(self.curves[0].to_trig(), self.curves[1].to_trig())

    def to_json(self) -> dict:
        out = {"degree": self.degree, "coefficients": [r.to_json() for r in self.coefficients]}
        if self.curves is not None:
            out["curves"] = {"a": self.curves[0].to_json(), "b": self.curves[1].to_json()}
        if self.nodes is not None:
            out["nodes"] = [format_real(v) for v in self.nodes]
        return out


def loads_equation(text: str) -> EquationFile:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise EquationFileError(f"line {exc.lineno}, column {exc.colno}", f"invalid JSON: {exc.msg}") from exc
    return EquationFile.parse(raw)


def load_equation(path) -> EquationFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise EquationFileError(str(path), f"cannot read file: {exc.strerror}") from exc
    return loads_equation(text)


def dumps_equation(eqf: EquationFile) -> str:
    """Indented JSON with one coefficient record per line."""
    data = eqf.to_json()
    lines = ["{", f'  "degree": {data["degree"]},', '  "coefficients": [']
    recs = [json.dumps(r) for r in data["coefficients"]]
    lines += [f"    {r}," for r in recs[:-1]] + [f"    {recs[-1]}", "  ]"]
    if "curves" in data:
        lines[-1] += ","
        a, b = (json.dumps(data["curves"][k]) for k in ("a", "b"))
        lines += ['  "curves": {', f'    "a": {a},', f'    "b": {b}', "  }"]
    if "nodes" in data:
        lines[-1] += ","
        lines.append(f'  "nodes": {json.dumps(data["nodes"])}')
    lines.append("}")
    return "\n".join(lines)


# -- certificates ---------------------------------------------------------------


def node_to_json(node) -> Any:
    if isinstance(node, IsolatedRoot) and node.exact is None:
        out = {"value": node.value, "interval": [format_real(node.lo), format_real(node.hi)]}
        if node.factor is not None:
            out["minimal_polynomial"] = [format_real(c) for c in node.factor.coeffs]
        return out
    return format_real(node)


def _finite(v):
    if v is None:
        return None
    if isinstance(v, (tuple, list)):
        return [_finite(x) for x in v]
    return format_real(v)


def evidence_to_json(ev: SignEvidence) -> dict:
    # amplitude_squares = [constant**2, first harmonic amplitude**2] for the exact test
    return {"node": node_to_json(ev.node), "sign": ev.sign, "method": ev.method, "margin": _finite(ev.margin),
            "mean_value": format_real(ev.value), "amplitude_squares": _finite(ev.witness)}


def certificate_to_json(cert: HypothesisCertificate) -> dict:
    out = {
        "status": "certified",
        "hypothesis": cert.kind,
        "nodes": [node_to_json(n) for n in cert.nodes],
        "pattern": cert.pattern,
        "bound": cert.bound,
        "all_nodes_identically_zero": cert.all_nodes_identically_zero,
        "evidence": [evidence_to_json(ev) for ev in cert.evidence],
    }
    if cert.curves is not None:
        out["curves"] = {"a": CoefficientRecord.from_trig(cert.curves.a).to_json(),
                         "b": CoefficientRecord.from_trig(cert.curves.b).to_json()}
    if cert.alternatives:
        out["alternatives"] = [[node_to_json(n) for n in alt] for alt in cert.alternatives]
    return out


def refusal_to_json(exc: Exception, hypothesis: str) -> dict:
    out = {"status": "not_certifiable", "hypothesis": hypothesis, "message": str(exc)}
    if isinstance(exc, NotCertifiable):
        out.update({
            "node_index": exc.index,
            "node": node_to_json(exc.node),
            "reason": exc.reason,
            "witness_t": _finite(exc.witness),
            "conflicts_with": exc.conflicts_with,
            "evidence": [evidence_to_json(ev) for ev in exc.evidence],
        })
    elif isinstance(exc, NoAdmissibleSubsequence):
        out["reason"] = "no_admissible_subsequence"
        out["zeros"] = [{"x": float(r.value), "f_a_sign": r.f_a_sign} for r in exc.roots]
    return out


# -- solution reports -----------------------------------------------------------


def solution_to_json(sol: PeriodicSolution) -> dict:
    out = {
        "x0": sol.x0,
        "kind": sol.kind,
        "log_dH": _finite(sol.log_dH),
        "dH": _finite(sol.dH),
        "ddH": _finite(sol.ddH),
        "multiplicity_flag": sol.multiplicity_flag,
        "displacement": sol.displacement,
        "component": sol.component,
        "refined_with": sol.refined_with,
    }
    if sol.interval is not None:
        out["interval"] = list(sol.interval)
    return out


def report_to_json(rep: PeriodicSolutionReport) -> dict:
    cfg = rep.scan.config
    out = {
        "solutions": [solution_to_json(s) for s in rep.solutions],
        "count": rep.count,
        "has_continuum": rep.has_continuum,
        "stability_alternates": rep.stability_alternates(),
        "scan": {
            "range": list(rep.scan.range),
            "grid": rep.scan.grid,
            "tol": rep.scan.tol,
            "bisection_tol": rep.scan.bisection_tol,
            "escaped_samples": rep.scan.escaped,
            "underflow_samples": rep.scan.underflow,
            "integration": {"rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol, "max_step": cfg.max_step,
                            "escape_radius": cfg.escape_radius},
        },
    }
    if rep.nodes_used is not None:
        out["nodes_used"] = [node_to_json(n) for n in rep.nodes_used]
        out["bound"] = rep.bound
        out["component_counts"] = dict(rep.component_counts)
        out["per_component_ok"] = rep.per_component_ok()
        out["exteriors_ok"] = rep.exteriors_ok()
    return out


def build_report(certificate: dict | None, solutions: PeriodicSolutionReport | None, provenance: dict) -> dict:
    """Top-level report; ``bound_satisfied`` only when both parts are present."""
    out = {"schema": SCHEMA}
    if certificate is not None:
        out["certificate"] = certificate
    if solutions is not None:
        out["solutions"] = report_to_json(solutions)
    if certificate is not None and solutions is not None and certificate.get("status") == "certified":
        out["bound_satisfied"] = bool(solutions.bound_satisfied())
    out["provenance"] = provenance
    return out


__all__ = [
    "SCHEMA",
    "EquationFileError",
    "CoefficientRecord",
    "EquationFile",
    "parse_real",
    "format_real",
    "loads_equation",
    "load_equation",
    "dumps_equation",
    "certificate_to_json",
    "refusal_to_json",
    "report_to_json",
    "solution_to_json",
    "build_report",
]
