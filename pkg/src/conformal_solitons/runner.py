"""Scenario validation, suite execution and report rendering."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field as dc_field
from typing import Any

import numpy as np

from .catalog import ENTRY_NAMES, CatalogEntry, canonical_field, expected_lambda, get_entry
from .conformal import ConformalField, angle_function, conformality_residual, sigma_hessian_residual
from .errors import GeometryError, ValidationError
from .semiriem import ConformalMatrix, validate_conformal_matrix
from .soliton_lab import (
    PointLab,
    StationaryEvidence,
    concircular_fit,
    psi_density,
    stationary_scan,
    tashiro_classify,
)

SUITES = ("conformality", "lemmas", "soliton", "concircular", "classify", "codazzi", "gauss")
DEFAULT_TOLERANCES = {
    "conformality": 1e-8,
    "lemmas": 1e-6,
    "soliton": 1e-7,
    "concircular": 1e-6,
    "concircular.spread": 1e-8,
    "classify": 0.0,
    "codazzi": 1e-7,
    "gauss": 1e-7,
}
LEMMA_IDENTITIES = {
    "l31": "L_Vbar gbar - L_V g = -2 eps_N C A",
    "l32": "Ric=-psi g - eps_N C A",
    "l33": "grad C = -(Dbar_N Vbar)^T - A V",
    "l34": "Hess C = -(cC + N sigma) g + sigma A + eps_N C A^2 - (nabla_V A) - A nabla V - (A nabla V)^T",
}
SUITE_IDENTITIES = {
    "conformality": "L_Vbar gbar = 2 sigma gbar",
    "lemmas": "angle-function identities l31-l34",
    "soliton": "Ric + 1/2 L_V g = lambda g",
    "concircular": "Hess C = (-k C + b) g, k = c + eps_N H^2, b = -(N sigma + eps_N sigma H)",
    "classify": "rho'' + k rho = b case table with stationary-point evidence",
    "codazzi": "(nabla_X A) Y = (nabla_Y A) X",
    "gauss": "Ric = c(n-1) g + n H A - eps_N A^2",
}
CONFIG_KEYS = ("geometry", "n", "field", "samples", "seed", "tolerance_overrides", "suites")
FIELD_KEYS = ("a", "beta", "B", "gamma")
DEFAULT_SAMPLES = 20
PROBES_PER_POINT = 10
SCAN_GRID = {2: 15, 3: 7}
MAX_LOGGED_ERRORS = 10


@dataclass
class Scenario:
    geometry: str
    n: int
    field: dict | None = None
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    tolerance_overrides: dict = dc_field(default_factory=dict)
    suites: tuple = SUITES

    def tolerances(self) -> dict:
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.tolerance_overrides)
        return tol

    def to_dict(self) -> dict:
        return {
            "geometry": self.geometry,
            "n": self.n,
            "field": self.field,
            "samples": self.samples,
            "seed": self.seed,
            "tolerance_overrides": dict(self.tolerance_overrides),
            "suites": list(self.suites),
        }


# ---------------------------------------------------------------------------
# validation


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v) -> bool:
    return (isinstance(v, (int, float)) and not isinstance(v, bool)) and math.isfinite(v)


def _vector(value, path: str, m: int) -> list:
    if not isinstance(value, list) or len(value) != m or not all(_is_number(v) for v in value):
        raise ValidationError(path, f"expected a list of {m} finite numbers")
    return [float(v) for v in value]


def validate_config(data: Any) -> Scenario:
    """Build a Scenario from parsed JSON, raising ValidationError with a field path."""
    if not isinstance(data, dict):
        raise ValidationError("$", "configuration must be a JSON object")
    for key in data:
        if key not in CONFIG_KEYS:
            raise ValidationError(key, "unknown key")
    for key in ("geometry", "n"):
        if key not in data:
            raise ValidationError(key, "required key missing")
    geometry = data["geometry"]
    if geometry not in ENTRY_NAMES:
        raise ValidationError("geometry", f"unknown catalog entry {geometry!r}")
    n = data["n"]
    if not _is_int(n) or n < 2:
        raise ValidationError("n", "expected an integer >= 2")

    suites = data.get("suites", list(SUITES))
    if not isinstance(suites, list) or not suites:
        raise ValidationError("suites", "expected a non-empty list of suite names")
    for i, s in enumerate(suites):
        if s not in SUITES:
            raise ValidationError(f"suites[{i}]", f"unknown suite {s!r}")
        if s in suites[:i]:
            raise ValidationError(f"suites[{i}]", f"duplicate suite {s!r}")

    samples = data.get("samples", DEFAULT_SAMPLES)
    if not _is_int(samples) or samples < 1:
        raise ValidationError("samples", "expected a positive integer")
    if samples < 3 and ("concircular" in suites or "classify" in suites):
        raise ValidationError("samples", "the concircular fit needs at least 3 samples")

    seed = data.get("seed", 0)
    if not _is_int(seed) or not 0 <= seed < 2**64:
        raise ValidationError("seed", "expected an integer in [0, 2^64)")

    tol = data.get("tolerance_overrides", {})
    if not isinstance(tol, dict):
        raise ValidationError("tolerance_overrides", "expected an object")
    for key, value in tol.items():
        if key not in DEFAULT_TOLERANCES:
            raise ValidationError(f"tolerance_overrides.{key}", "unknown tolerance name")
        if not _is_number(value) or value < 0:
            raise ValidationError(f"tolerance_overrides.{key}", "expected a finite non-negative number")

    fld = data.get("field")
    if fld is not None:
        fld = _validate_field(fld, get_entry(geometry, n))
    return Scenario(geometry, n, fld, samples, seed, {k: float(v) for k, v in tol.items()}, tuple(suites))


def _validate_field(fld, entry: CatalogEntry) -> dict:
    if not isinstance(fld, dict):
        raise ValidationError("field", "expected an object")
    for key in fld:
        if key not in FIELD_KEYS:
            raise ValidationError(f"field.{key}", "unknown key")
    amb = entry.chart.ambient
    m = amb.container_dim
    out = {
        "a": _vector(fld.get("a", [0.0] * m), "field.a", m),
        "beta": fld.get("beta", 0.0),
        "gamma": _vector(fld.get("gamma", [0.0] * m), "field.gamma", m),
    }
    if not _is_number(out["beta"]):
        raise ValidationError("field.beta", "expected a finite number")
    out["beta"] = float(out["beta"])
    B = fld.get("B", [[0.0] * m for _ in range(m)])
    if not isinstance(B, list) or len(B) != m:
        raise ValidationError("field.B", f"expected a {m}x{m} matrix")
    for i, row in enumerate(B):
        _vector(row, f"field.B[{i}]", m)
    verdict = validate_conformal_matrix(amb.signature, B)
    if not verdict.valid:
        j, k = verdict.violations[0]
        raise ValidationError(f"field.B[{j}][{k}]", "violates eps_j b_jk + eps_k b_kj = 0 / b_ii = 0")
    out["B"] = [[float(v) for v in row] for row in B]
    if amb.is_quadric:
        if any(out["a"]):
            raise ValidationError("field.a", "quadric ambients take fields generated by gamma and B only")
        if out["beta"]:
            raise ValidationError("field.beta", "quadric ambients take fields generated by gamma and B only")
    return out


def load_config(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError("$", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError("$", f"invalid JSON: {exc.msg} at line {exc.lineno}") from exc
    return validate_config(data)


def demo_scenario(name: str, n: int = 2, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> Scenario:
    if name not in ENTRY_NAMES:
        raise ValidationError("geometry", f"unknown catalog entry {name!r}")
    return validate_config({"geometry": name, "n": n, "samples": samples, "seed": seed})


# ---------------------------------------------------------------------------
# execution


def build_field(scenario: Scenario, entry: CatalogEntry) -> ConformalField:
    if scenario.field is None:
        return canonical_field(entry)
    f = scenario.field
    amb = entry.chart.ambient
    B = ConformalMatrix(np.array(f["B"]), amb.signature)
    if amb.is_quadric:
        return ConformalField.quadric(amb, f["gamma"], B)
    return ConformalField.flat(amb, a=f["a"], beta=f["beta"], B=B, gamma=f["gamma"])


def _num(v):
    """JSON-safe float: non-finite values become null."""
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _stats(values) -> dict:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return {"min": None, "max": None, "mean": None}
    return {"min": _num(arr.min()), "max": _num(arr.max()), "mean": _num(arr.mean())}


def _max(values) -> float:
    return float(max(values)) if values else float("nan")


def _suite(residual, tol, extra=None, applicable=True, reason=None) -> dict:
    out = {"identity": None, "max_residual": _num(residual), "tolerance": tol}
    if not applicable:
        out["pass"] = None
        out["not_applicable"] = reason
    else:
        out["pass"] = bool(math.isfinite(residual) and residual <= tol)
    if extra:
        out.update(extra)
    return out


class _Run:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.entry = get_entry(scenario.geometry, scenario.n)
        self.field = build_field(scenario, self.entry)
        self.tol = scenario.tolerances()
        point_seq, probe_seq = np.random.SeedSequence(scenario.seed).spawn(2)
        self.points = self.entry.chart.sample(np.random.default_rng(point_seq), scenario.samples)
        self.probe_rng = np.random.default_rng(probe_seq)
        self.labs: dict[int, PointLab] = {}
        self.errors: dict[int, str] = {}
        self._fit = None

    def lab(self, i: int) -> PointLab | None:
        if i in self.errors:
            return None
        if i not in self.labs:
            try:
                self.labs[i] = PointLab(self.entry.chart, self.field, self.points[i])
            except GeometryError as exc:
                self.errors[i] = f"{type(exc).__name__}: {exc}"
                return None
        return self.labs[i]

    def each(self):
        for i in range(len(self.points)):
            lab = self.lab(i)
            if lab is not None:
                yield i, lab

    # suites ---------------------------------------------------------------
    def conformality(self) -> dict:
        conf, hess = [], []
        for i, u in enumerate(self.points):
            try:
                x = self.entry.chart.point(u)
                conf.append(conformality_residual(self.field, x, PROBES_PER_POINT, self.probe_rng))
                hess.append(sigma_hessian_residual(self.field, x))
            except GeometryError as exc:
                self.errors.setdefault(i, f"{type(exc).__name__}: {exc}")
        residual = max(_max(conf), _max(hess))
        return _suite(residual, self.tol["conformality"], {
            "conformality_residual": _num(_max(conf)),
            "sigma_hessian_residual": _num(_max(hess)),
        })

    def lemmas(self) -> dict:
        worst = {k: [] for k in LEMMA_IDENTITIES}
        for _, lab in self.each():
            worst["l31"].append(lab.lemma31())
            worst["l32"].append(lab.lemma32())
            worst["l33"].append(lab.lemma33())
            worst["l34"].append(lab.lemma34())
        tol = self.tol["lemmas"]
        subs = {}
        for key, identity in LEMMA_IDENTITIES.items():
            sub = _suite(_max(worst[key]), tol)
            sub["identity"] = identity
            subs[key] = sub
        residual = max((_max(v) for v in worst.values()), default=float("nan"))
        return _suite(residual, tol, {"checks": subs})

    def soliton(self) -> dict:
        res, lam_err = [], []
        expect = self._lambda_expectation()
        for i, lab in self.each():
            res.append(lab.soliton_residual())
            if expect is not None:
                lam_err.append(abs(lab.lam - expect(self.points[i], lab)))
        residual = max(_max(res), _max(lam_err)) if lam_err else _max(res)
        extra = {
            "soliton_residual": _num(_max(res)),
            "lambda_expectation": None if expect is None else expect.__doc__,
            "lambda_max_error": _num(_max(lam_err)) if lam_err else None,
            "psi_density": psi_density(lab.psi for _, lab in self.each()),
        }
        return _suite(residual, self.tol["soliton"], extra)

    def _lambda_expectation(self):
        entry, f = self.entry, self.field
        if entry.name == "flat_plane":
            def flat(u, lab):
                """sigma restricted to the hypersurface"""
                return lab.sigma
            return flat
        if not entry.soliton_bearing or np.any(f.a != 0) or f.beta != 0:
            return None
        gamma = f.gamma if f.ambient.is_quadric else 0.5 * f.gamma

        def closed(u, lab):
            """closed-form soliton function of the height of gamma"""
            return expected_lambda(entry, gamma, u)
        return closed

    def fit(self):
        if self._fit is None:
            samples = [lab.concircular_sample() for _, lab in self.each()]
            self._fit = concircular_fit(samples) if len(samples) >= 3 else None
        return self._fit

    def concircular(self) -> dict:
        tol = self.tol["concircular"]
        fit = self.fit()
        if fit is None:
            return _suite(float("nan"), tol, applicable=False, reason="fewer than 3 evaluable samples")
        extra = {
            "k": _num(fit.k), "b": _num(fit.b), "fit_residual": _num(fit.fit_residual),
            "k_expected": _num(fit.k_expected), "b_expected": _num(fit.b_expected),
            "k_expected_spread": _num(fit.k_spread), "b_expected_spread": _num(fit.b_spread),
            "spread_tolerance": self.tol["concircular.spread"], "degenerate": fit.degenerate,
        }
        if not self.entry.umbilic:
            return _suite(fit.fit_residual, tol, extra, applicable=False,
                          reason="hypersurface is not totally umbilic")
        if fit.degenerate:
            return _suite(float("nan"), tol, extra, applicable=False,
                          reason="angle function is constant, k is unidentifiable")
        residual = max(abs(fit.k - fit.k_expected), abs(fit.b - fit.b_expected), fit.fit_residual)
        out = _suite(residual, tol, extra)
        out["pass"] = out["pass"] and bool(fit.b_spread <= self.tol["concircular.spread"])
        return out

    def classify(self) -> dict:
        tol = self.tol["classify"]
        entry = self.entry
        if not entry.umbilic or entry.classification is None:
            return _suite(float("nan"), tol, {"verdict": None}, applicable=False,
                          reason="hypersurface is not totally umbilic")
        fit = self.fit()
        if fit is None or fit.degenerate:
            return _suite(float("nan"), tol, {"verdict": None}, applicable=False,
                          reason="no identifiable concircular fit")
        evidence, scan = StationaryEvidence.NONE, None
        if fit.k < 0:
            scan = stationary_scan(entry.chart, angle_function(entry.chart, self.field), SCAN_GRID.get(entry.n, 5))
            evidence = scan.evidence
        verdict = tashiro_classify(fit.k, fit.b, evidence, entry.profile)
        residual = 0.0 if verdict is entry.classification else 1.0
        return _suite(residual, tol, {
            "verdict": verdict.value,
            "expected": entry.classification.value,
            "stationary_evidence": None if scan is None else scan.evidence.value,
            "critical_points": None if scan is None else [list(p) for p in scan.critical_points],
            "min_gradient": None if scan is None else _num(scan.min_gradient),
        })

    def codazzi(self) -> dict:
        return _suite(_max([lab.geo.codazzi_residual() for _, lab in self.each()]), self.tol["codazzi"])

    def gauss(self) -> dict:
        contracted, scalar = [], []
        for _, lab in self.each():
            contracted.append(lab.geo.gauss_residual())
            if self.entry.umbilic:
                scalar.append(lab.geo.scalar_curvature_residual())
        residual = max(_max(contracted), _max(scalar)) if scalar else _max(contracted)
        return _suite(residual, self.tol["gauss"], {
            "contracted_gauss_residual": _num(_max(contracted)),
            "scalar_curvature_residual": _num(_max(scalar)) if scalar else None,
        })


def run_scenario(scenario: Scenario) -> dict:
    """Execute the requested suites in order; the result is JSON-ready."""
    run = _Run(scenario)
    suites = {}
    for name in scenario.suites:
        out = getattr(run, name)()
        if out["identity"] is None:
            out["identity"] = SUITE_IDENTITIES[name]
        suites[name] = out
    labs = [lab for _, lab in run.each()]
    errors = [
        {"u": [float(v) for v in run.points[i]], "error": msg}
        for i, msg in sorted(run.errors.items())[:MAX_LOGGED_ERRORS]
    ]
    return {
        "scenario": scenario.to_dict(),
        "entry": run.entry.metadata(),
        "run": {
            "seed": scenario.seed,
            "samples": scenario.samples,
            "evaluated_points": len(labs),
            "point_errors": len(run.errors),
            "errors": errors,
        },
        "statistics": {
            "lambda": _stats([lab.lam for lab in labs]),
            "psi": _stats([lab.psi for lab in labs]),
            "C": _stats([lab.C for lab in labs]),
        },
        "suites": suites,
        "all_pass": all(s["pass"] is not False for s in suites.values()),
    }


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def render_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["suite", "max_residual", "tolerance", "pass"])
    for name, s in report["suites"].items():
        rows = [(name, s)]
        rows += [(f"{name}.{k}", sub) for k, sub in s.get("checks", {}).items()]
        for label, row in rows:
            passed = "n/a" if row["pass"] is None else str(row["pass"]).lower()
            mr = "" if row["max_residual"] is None else repr(row["max_residual"])
            writer.writerow([label, mr, repr(row["tolerance"]), passed])
    return buf.getvalue()
