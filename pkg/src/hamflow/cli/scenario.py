"""Scenario configuration: JSON loading, validation and system construction."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

from hamflow.errors import ExprError, HamflowError
from hamflow.expr import ChartSpec, ScalarField, parse
from hamflow.hj import ContactField, GeneratingFunction
from hamflow.mechanics import FundamentalForm, NormalForm, eta_from_components

SYSTEM_KINDS = ("lagrangian", "fundamental_form", "normal_form")


class ConfigError(HamflowError):
    pass


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _number(value, where) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), f"{where}: expected a number")
    return float(value)


def _numbers(value, n, where) -> tuple[float, ...]:
    _require(isinstance(value, list), f"{where}: expected a list of {n} numbers")
    _require(len(value) == n, f"{where}: expected {n} entries (dimension), got {len(value)}")
    return tuple(_number(v, f"{where}[{k}]") for k, v in enumerate(value))


def _text(value, where) -> str:
    _require(isinstance(value, str) and value.strip(), f"{where}: expected a non-empty expression string")
    return value


def _expr(source, chart, where) -> ScalarField:
    try:
        return parse(_text(source, where), chart)
    except ExprError as exc:
        raise ConfigError(f"{where}: {exc}") from None


@dataclass(frozen=True)
class Scenario:
    name: str
    dimension: int
    system_kind: str
    system: dict
    initial: dict
    run: dict
    checks: tuple[str, ...]
    seed: int = 0
    sample_box: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    hj: dict | None = None
    frame: dict | None = None

    # ---- construction -------------------------------------------------

    @classmethod
    def from_dict(cls, data: Any) -> "Scenario":
        _require(isinstance(data, dict), "scenario must be a JSON object")
        known = {"name", "dimension", "system", "initial", "run", "checks", "sample_box",
                 "seed", "tolerances", "hj", "frame", "description"}
        extra = set(data) - known
        _require(not extra, f"unknown scenario fields {sorted(extra)}")
        for key in ("name", "dimension", "system", "initial", "run", "checks"):
            _require(key in data, f"missing required field {key!r}")
        name = data["name"]
        _require(isinstance(name, str) and name, "name: expected a non-empty string")
        n = data["dimension"]
        _require(isinstance(n, int) and not isinstance(n, bool) and n >= 1, "dimension: expected a positive integer")

        system = data["system"]
        _require(isinstance(system, dict), "system: expected an object")
        present = [k for k in SYSTEM_KINDS if k in system]
        _require(len(present) == 1 and len(system) == 1,
                 f"system: exactly one of {', '.join(SYSTEM_KINDS)} is required, got {sorted(system)}")
        kind = present[0]

        initial = data["initial"]
        _require(isinstance(initial, dict), "initial: expected an object")
        fiber = "p" if kind == "normal_form" else "v"
        other = "v" if fiber == "p" else "p"
        _require(other not in initial, f"initial.{other}: not valid for a {kind} system (use {fiber})")
        init = {
            "t0": _number(initial.get("t0", 0.0), "initial.t0"),
            "x": _numbers(initial.get("x"), n, "initial.x"),
            fiber: _numbers(initial.get(fiber), n, f"initial.{fiber}"),
        }

        run = data["run"]
        _require(isinstance(run, dict), "run: expected an object")
        t1, h = _number(run.get("t1"), "run.t1"), _number(run.get("h"), "run.h")
        _require(t1 > init["t0"], "run.t1: must exceed initial.t0")
        _require(h > 0, "run.h: must be positive")

        checks = data["checks"]
        _require(isinstance(checks, list) and all(isinstance(c, str) for c in checks),
                 "checks: expected a list of check names")
        _require(len(set(checks)) == len(checks), "checks: duplicate check names")

        seed = data.get("seed", 0)
        _require(isinstance(seed, int) and not isinstance(seed, bool), "seed: expected an integer")
        env_seed = os.environ.get("HAMFLOW_SEED")
        if env_seed is not None:
            try:
                seed = int(env_seed)
            except ValueError:
                raise ConfigError(f"HAMFLOW_SEED: expected an integer, got {env_seed!r}") from None

        box = data.get("sample_box", {})
        _require(isinstance(box, dict), "sample_box: expected an object of [lo, hi] pairs")
        clean_box = {}
        for coord, bounds in box.items():
            lo, hi = _numbers(bounds, 2, f"sample_box.{coord}")
            _require(lo < hi, f"sample_box.{coord}: need lo < hi")
            clean_box[coord] = (lo, hi)

        tolerances = data.get("tolerances", {})
        _require(isinstance(tolerances, dict), "tolerances: expected an object")
        tol = {k: _number(v, f"tolerances.{k}") for k, v in tolerances.items()}

        scenario = cls(name, n, kind, system[kind], init, {"t1": t1, "h": h}, tuple(checks), seed,
                       clean_box, tol, data.get("hj"), data.get("frame"))
        scenario._validate_system()
        return scenario

    def _validate_system(self):
        # build everything once so expression and shape errors surface as config errors
        self.system_object
        if self.system_kind == "normal_form":
            self.eta_given
        if self.hj is not None:
            self.contact_field
        if self.frame is not None:
            self.omega
        bad = set(self.sample_box) - set(self.chart.coordinates)
        _require(not bad, f"sample_box: unknown coordinates {sorted(bad)} for chart {self.chart.coordinates}")

    # ---- derived objects ---------------------------------------------

    @cached_property
    def chart(self) -> ChartSpec:
        if self.system_kind == "normal_form":
            return ChartSpec.momentum(self.dimension)
        return ChartSpec.velocity(self.dimension)

    @property
    def momentum_chart(self) -> ChartSpec:
        return ChartSpec.momentum(self.dimension)

    @cached_property
    def system_object(self):
        n, chart, spec = self.dimension, self.chart, self.system
        kind = self.system_kind
        if kind == "lagrangian":
            return _expr(spec, chart, "system.lagrangian")
        _require(isinstance(spec, dict), f"system.{kind}: expected an object")
        if kind == "fundamental_form":
            P = _expr(spec.get("P", "0"), chart, "system.fundamental_form.P")
            F = spec.get("F")
            p = spec.get("p")
            _require(isinstance(F, list) and len(F) == n, f"system.fundamental_form.F: expected {n} expressions")
            _require(isinstance(p, list) and len(p) == n, f"system.fundamental_form.p: expected {n} expressions")
            return FundamentalForm(
                chart, P,
                tuple(_expr(f, chart, f"system.fundamental_form.F[{k}]") for k, f in enumerate(F)),
                tuple(_expr(q, chart, f"system.fundamental_form.p[{k}]") for k, q in enumerate(p)),
            )
        H = _expr(spec.get("H"), chart, "system.normal_form.H")
        terms = spec.get("terms", [])
        _require(isinstance(terms, list), "system.normal_form.terms: expected a list")
        pairs = []
        for k, term in enumerate(terms):
            where = f"system.normal_form.terms[{k}]"
            _require(isinstance(term, dict) and set(term) == {"mu", "v"}, f"{where}: expected {{mu, v}}")
            pairs.append((_expr(term["mu"], chart, f"{where}.mu"), _expr(term["v"], chart, f"{where}.v")))
        extra = set(spec) - {"H", "terms", "eta"}
        _require(not extra, f"system.normal_form: unknown fields {sorted(extra)}")
        return NormalForm(H, tuple(pairs))

    @cached_property
    def eta_given(self):
        spec = self.system.get("eta") if isinstance(self.system, dict) else None
        if spec is None:
            return None
        n, chart = self.dimension, self.chart
        _require(isinstance(spec, dict), "system.normal_form.eta: expected {P, F, v}")
        F, v = spec.get("F"), spec.get("v")
        _require(isinstance(F, list) and len(F) == n, f"system.normal_form.eta.F: expected {n} expressions")
        _require(isinstance(v, list) and len(v) == n, f"system.normal_form.eta.v: expected {n} expressions")
        return eta_from_components(
            chart,
            _expr(spec.get("P", "0"), chart, "system.normal_form.eta.P"),
            [_expr(f, chart, f"system.normal_form.eta.F[{k}]") for k, f in enumerate(F)],
            [_expr(w, chart, f"system.normal_form.eta.v[{k}]") for k, w in enumerate(v)],
        )

    @cached_property
    def generating_function(self) -> GeneratingFunction | None:
        if self.hj is None or "S" not in self.hj:
            return None
        S = _expr(self.hj["S"], self.momentum_chart, "hj.S")
        try:
            return GeneratingFunction(S)
        except ValueError as exc:
            raise ConfigError(f"hj.S: {exc}") from None

    @cached_property
    def contact_field(self) -> ContactField | None:
        if self.hj is None:
            return None
        _require(isinstance(self.hj, dict), "hj: expected an object with S or p")
        extra = set(self.hj) - {"S", "p", "avoid_t_zero"}
        _require(not extra, f"hj: unknown fields {sorted(extra)}")
        if "S" in self.hj:
            _require("p" not in self.hj, "hj: give either S or p, not both")
            return self.generating_function.contact_field
        comps = self.hj.get("p")
        _require(isinstance(comps, list) and len(comps) == self.dimension,
                 f"hj.p: expected {self.dimension} expressions")
        fields = tuple(_expr(c, self.momentum_chart, f"hj.p[{k}]") for k, c in enumerate(comps))
        try:
            return ContactField(fields)
        except ValueError as exc:
            raise ConfigError(f"hj.p: {exc}") from None

    @cached_property
    def omega(self):
        _require(isinstance(self.frame, dict) and "omega" in self.frame, "frame: expected {omega: n x n matrix}")
        rows = self.frame["omega"]
        _require(isinstance(rows, list) and len(rows) == self.dimension, "frame.omega: expected n rows")
        return [_numbers(r, self.dimension, f"frame.omega[{k}]") for k, r in enumerate(rows)]

    def tolerance(self, check: str, default: float) -> float:
        return self.tolerances.get(check, default)


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return Scenario.from_dict(data)
