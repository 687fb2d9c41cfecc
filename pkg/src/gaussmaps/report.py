"""Suite orchestration and machine-readable reports.

A run configuration selects a fixture (or a custom expression chart), a set
of verification suites, numeric parameters, and output formats.  Reports
are deterministic: the same configuration and seed produce byte-identical
JSON and CSV output, so timing is written to a sidecar file rather than
into the report.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path as FsPath

import jsonschema
import numpy as np

from . import catalog, liealg
from .immersion import (
    NotConformal, chart_from_expressions, shape_data, shape_operator,
)
from .gaussmap import (
    mean_curvature_identity_residuals, mean_curvature_one_form,
    mean_curvature_result, reeb_component, unit_normal_chart,
)
from .spaces import (
    AmbientTangentUS, contact_form, plane_inner, plane_symplectic,
    reeb_vector, sasaki_metric, span_plane, span_plane_pushforward,
)
from .gaussmap import horizontal_lift
from .variations import (
    DeformationFamily, exterior_derivative, loop_integral, mean_curvature_form,
    transversality_monitor, variation_form,
)

SCHEMA_VERSION = 1

SUITE_NAMES = ("algebra", "legendrian", "metric", "meancurvature", "theorem",
               "palmer", "variations")

DEFAULT_NUMERIC = {
    "fd_step": 1e-5,
    "t_step": 1e-4,
    "seed": 42,
    "samples": 64,
}

DEFAULT_TOLERANCES = {
    "algebra": 1e-13,
    "algebra_ad_invariance": 1e-10,
    "legendrian": 1e-8,
    "lagrangian": 1e-8,
    "metric_identity": 1e-6,
    "reeb_norm": 1e-12,
    "plane_metric": 1e-10,
    "pullback": 1e-8,
    "meancurvature_rel": 1e-3,
    "reeb_component": 1e-5,
    "theorem": 1e-3,
    "minimal_plane_norm": 1e-4,
    "palmer_iso": 1e-5,
    "palmer_oracle": 1e-3,
    "closedness": 1e-4,
    "period": 1e-4,
}

# deterministic per-suite seed offsets so suite order cannot matter
_SUITE_KEYS = {name: idx + 1 for idx, name in enumerate(SUITE_NAMES)}


class ConfigError(ValueError):
    pass


class FixtureBuildError(RuntimeError):
    pass


def load_schema():
    with resources.files("gaussmaps.schemas").joinpath(
            "config_schema_v1.json").open("r") as fh:
        return json.load(fh)


def validate_config(config):
    """Schema-validate a configuration dict; raises ConfigError."""
    try:
        jsonschema.validate(config, load_schema())
    except jsonschema.ValidationError as err:
        raise ConfigError(f"configuration invalid: {err.message}") from None
    numeric = dict(DEFAULT_NUMERIC)
    numeric.update(config.get("numeric", {}))
    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(config.get("numeric", {}).get("tolerances", {}))
    unknown = set(tolerances) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
    return {
        "schema_version": SCHEMA_VERSION,
        "fixture": config.get("fixture"),
        "custom": config.get("custom"),
        "suites": sorted(config["suites"]),
        "numeric": {k: numeric[k] for k in sorted(numeric) if k != "tolerances"},
        "tolerances": {k: tolerances[k] for k in sorted(tolerances)},
        "output": {
            "directory": config.get("output", {}).get("directory", "out"),
            "formats": sorted(config.get("output", {}).get("formats", ["json"])),
        },
    }


def build_target(cfg):
    """Fixture or custom chart named by the configuration."""
    try:
        if cfg["fixture"] is not None:
            name = cfg["fixture"]["name"]
            params = cfg["fixture"].get("params", {})
            target = catalog.get(name, **params)
        else:
            spec = cfg["custom"]
            chart = chart_from_expressions(
                spec["components"], m=spec["m"], n=spec["n"],
                domain_box=[tuple(b) for b in spec["domain"]],
                periodic=spec.get("periodic"),
                derivative_mode=spec.get("derivative_mode", "forward-dual"),
                fd_step=cfg["numeric"]["fd_step"], name="custom")
            target = unit_normal_chart(chart,
                                       sheet_sign=spec.get("sheet_sign", 1.0))
        if isinstance(target, DeformationFamily):
            return target
        object.__setattr__(target.base, "fd_step", cfg["numeric"]["fd_step"])
        return target
    except Exception as err:
        raise FixtureBuildError(str(err)) from err


@dataclass
class SuiteResult:
    name: str
    status: str  # "pass" | "fail" | "skip"
    reason: str = ""
    stats: dict = field(default_factory=dict)
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def as_dict(self):
        return {"name": self.name, "status": self.status, "reason": self.reason,
                "stats": self.stats,
                "table": {"columns": self.columns, "rows": self.rows}}


def _rng_for(cfg, suite):
    return np.random.default_rng([cfg["numeric"]["seed"], _SUITE_KEYS[suite]])


def _residual_stats(values):
    if not values:
        return {"max_residual": 0.0, "median_residual": 0.0, "n_samples": 0}
    arr = np.array(values, dtype=float)
    return {"max_residual": float(np.max(arr)),
            "median_residual": float(np.median(arr)),
            "n_samples": int(arr.size)}


def _chart_of(target):
    if isinstance(target, DeformationFamily):
        return target.lift_at(0.25 * sum(target.t_interval))
    return target


def _sample_count(cfg, chart, heavy=False):
    per_dim = cfg["numeric"]["samples"]
    total = min(per_dim * chart.dim, 4096)
    if heavy:
        total = max(8, total // 8)
    return total


def _coord_columns(chart):
    cols = [f"u{k + 1}" for k in range(chart.m)]
    cols += [f"s{k + 1}" for k in range(chart.fiber_dim)]
    return cols


def _row(w, *vals):
    return [float(x) for x in w] + [v for v in vals]


# -- suites ---------------------------------------------------------------------

def suite_algebra(target, cfg):
    tol = cfg["tolerances"]["algebra"]
    tol_ad = cfg["tolerances"]["algebra_ad_invariance"]
    chart = _chart_of(target)
    n = chart.n
    rng = _rng_for(cfg, "algebra")
    basis = liealg.split_basis(n)
    rows = []

    def record(identity, residual, bound):
        rows.append([identity, float(residual), float(bound)])

    worst_brackets = 0.0
    for a in basis.vertical:
        for b in basis.vertical:
            br = liealg.bracket(a, b)
            out = np.linalg.norm(br.matrix
                                 - liealg.project(br, basis.isotropy).matrix,
                                 ord=np.inf)
            worst_brackets = max(worst_brackets, out)
        for b in basis.horizontal:
            br = liealg.bracket(a, b)
            out = np.linalg.norm(br.matrix
                                 - liealg.project(br, basis.flow).matrix,
                                 ord=np.inf)
            worst_brackets = max(worst_brackets, out)
    for a in basis.horizontal:
        for b in basis.horizontal:
            br = liealg.bracket(a, b)
            out = np.linalg.norm(br.matrix
                                 - liealg.project(br, basis.isotropy).matrix,
                                 ord=np.inf)
            worst_brackets = max(worst_brackets, out)
    record("bracket_relations", worst_brackets, tol)

    worst = 0.0
    for _ in range(8):
        a = liealg.project(liealg.AlgebraElement(
            rng.standard_normal((n + 1, n + 1))), basis.contact)
        twice = liealg.ad_flow(liealg.ad_flow(a))
        worst = max(worst, np.linalg.norm(twice.matrix + a.matrix, ord=np.inf))
    record("ad_flow_squared_plus_identity", worst, tol)

    worst = 0.0
    for _ in range(8):
        a = liealg.project(liealg.AlgebraElement(
            rng.standard_normal((n + 1, n + 1))), basis.contact)
        b = liealg.project(liealg.AlgebraElement(
            rng.standard_normal((n + 1, n + 1))), basis.contact)
        worst = max(worst, abs(liealg.symplectic_pairing(a, b)
                               - liealg.inner_product(liealg.ad_flow(a), b)))
    record("pairing_vs_rotated_inner", worst, tol)

    worst = 0.0
    for _ in range(6):
        a = liealg.AlgebraElement(rng.standard_normal((n + 1, n + 1)))
        b = liealg.AlgebraElement(rng.standard_normal((n + 1, n + 1)))
        g = liealg.exp(liealg.AlgebraElement(0.7 * rng.standard_normal((n + 1, n + 1))))
        worst = max(worst, abs(
            liealg.inner_product(liealg.adjoint(g, a), liealg.adjoint(g, b))
            - liealg.inner_product(a, b)))
    record("adjoint_invariance", worst, tol_ad)

    failed = [r for r in rows if r[1] >= r[2]]
    residuals = [r[1] for r in rows]
    return SuiteResult(
        name="algebra", status="fail" if failed else "pass",
        reason="; ".join(r[0] for r in failed),
        stats=_residual_stats(residuals),
        columns=["identity", "residual", "bound"], rows=rows)


def suite_legendrian(target, cfg):
    tol_theta = cfg["tolerances"]["legendrian"]
    tol_lambda = cfg["tolerances"]["lagrangian"]
    chart = _chart_of(target)
    rng = _rng_for(cfg, "legendrian")
    rows = []
    worst = 0.0
    for w in chart.sample_points(rng, _sample_count(cfg, chart)):
        x = chart.lift(w)
        theta_res = max(abs(contact_form(x, z)) for z in chart.tangents(w))
        q = chart.plane(w)
        pushes = chart.plane_tangents(w)
        lam_res = 0.0
        for a in range(len(pushes)):
            for b in range(a + 1, len(pushes)):
                lam_res = max(lam_res, abs(plane_symplectic(q, pushes[a],
                                                            pushes[b])))
        rows.append(_row(w, theta_res, lam_res))
        worst = max(worst, theta_res / tol_theta, lam_res / tol_lambda)
    stats = _residual_stats([max(r[-2], r[-1]) for r in rows])
    stats["max_contact_residual"] = max((r[-2] for r in rows), default=0.0)
    stats["max_symplectic_residual"] = max((r[-1] for r in rows), default=0.0)
    return SuiteResult(
        name="legendrian", status="pass" if worst < 1.0 else "fail",
        stats=stats,
        columns=_coord_columns(chart) + ["contact_residual", "symplectic_residual"],
        rows=rows)


def suite_metric(target, cfg):
    tol_eq = cfg["tolerances"]["metric_identity"]
    tol_reeb = cfg["tolerances"]["reeb_norm"]
    tol_plane = cfg["tolerances"]["plane_metric"]
    tol_pull = cfg["tolerances"]["pullback"]
    chart = _chart_of(target)
    rng = _rng_for(cfg, "metric")
    rows = []
    worst = 0.0
    for w in chart.sample_points(rng, _sample_count(cfg, chart, heavy=True)):
        x = chart.lift(w)
        u, s = chart.split_point(w)
        sd = shape_data(chart.base, u)
        a_mat = shape_operator(sd, chart.normal(u, s))
        # lifted-metric identity on independently built horizontal lifts
        eq_res = 0.0
        for _ in range(3):
            xc = rng.standard_normal(chart.m)
            yc = rng.standard_normal(chart.m)
            zx, _ = horizontal_lift(chart, w, xc)
            zy, _ = horizontal_lift(chart, w, yc)
            lhs = sasaki_metric(x, zx, zy)
            rhs = float(xc @ sd.metric @ yc
                        + (a_mat @ xc) @ sd.metric @ (a_mat @ yc))
            eq_res = max(eq_res, abs(lhs - rhs))
        # Reeb normalization
        reeb_res = abs(sasaki_metric(x, reeb_vector(x), reeb_vector(x)) - 1.0)
        # plane metric matches pushforward lengths on contact vectors
        q = span_plane(x)
        plane_res = 0.0
        pull_res = 0.0
        for z in chart.tangents(w):
            push = span_plane_pushforward(x, z)
            plane_res = max(plane_res, abs(plane_inner(q, push, push)
                                           - sasaki_metric(x, z, z)))
        # symplectic pullback against the algebra pairing in a moved frame
        pull_res = _pullback_residual(x, rng)
        rows.append(_row(w, eq_res, reeb_res, plane_res, pull_res))
        worst = max(worst, eq_res / tol_eq, reeb_res / tol_reeb,
                    plane_res / tol_plane, pull_res / tol_pull)
    stats = _residual_stats([r[-4] for r in rows])
    stats["max_reeb_residual"] = max((r[-3] for r in rows), default=0.0)
    stats["max_plane_metric_residual"] = max((r[-2] for r in rows), default=0.0)
    stats["max_pullback_residual"] = max((r[-1] for r in rows), default=0.0)
    return SuiteResult(
        name="metric", status="pass" if worst < 1.0 else "fail",
        stats=stats,
        columns=_coord_columns(chart) + ["metric_identity_residual",
                                         "reeb_residual", "plane_metric_residual",
                                         "pullback_residual"],
        rows=rows)


def _pullback_residual(x, rng):
    """Symplectic pullback vs the algebra pairing, in a frame moved to x."""
    n1 = x.p.shape[0]
    n = n1 - 1
    basis = liealg.split_basis(n)
    # orthogonal map sending the standard flag to x
    cols = [x.p, x.v]
    for k in range(n1):
        cand = np.eye(n1)[k]
        for c in cols:
            cand = cand - (cand @ c) * c
        norm = np.linalg.norm(cand)
        if norm > 1e-6:
            cols.append(cand / norm)
        if len(cols) == n1:
            break
    g = np.column_stack([*cols[2:], x.v, x.p])
    if np.linalg.det(g) < 0:
        g[:, 0] = -g[:, 0]
    worst = 0.0
    q = span_plane(x)
    for _ in range(3):
        eta = liealg.project(liealg.AlgebraElement(
            rng.standard_normal((n1, n1))), basis.contact)
        zeta = liealg.project(liealg.AlgebraElement(
            rng.standard_normal((n1, n1))), basis.contact)
        eta_g, zeta_g = liealg.adjoint(g, eta), liealg.adjoint(g, zeta)
        zx = AmbientTangentUS(x, eta_g.matrix @ x.p, eta_g.matrix @ x.v)
        wx = AmbientTangentUS(x, zeta_g.matrix @ x.p, zeta_g.matrix @ x.v)
        got = plane_symplectic(q, span_plane_pushforward(x, zx),
                               span_plane_pushforward(x, wx))
        worst = max(worst, abs(got - liealg.symplectic_pairing(eta, zeta)))
    return worst


def suite_meancurvature(target, cfg):
    tol_rel = cfg["tolerances"]["meancurvature_rel"]
    tol_reeb = cfg["tolerances"]["reeb_component"]
    chart = _chart_of(target)
    rng = _rng_for(cfg, "meancurvature")
    rows = []
    worst = 0.0
    for w in chart.sample_points(rng, _sample_count(cfg, chart, heavy=True)):
        res = mean_curvature_result(chart, w)
        rc = abs(reeb_component(chart, w))
        rows.append(_row(w, res.residual, rc,
                         float(np.linalg.norm(res.oracle))))
        worst = max(worst, res.residual / tol_rel, rc / tol_reeb)
    stats = _residual_stats([r[chart.dim] for r in rows])
    stats["max_reeb_component"] = max((r[chart.dim + 1] for r in rows),
                                      default=0.0)
    return SuiteResult(
        name="meancurvature", status="pass" if worst < 1.0 else "fail",
        stats=stats,
        columns=_coord_columns(chart) + ["relative_residual", "reeb_component",
                                         "plane_mean_curvature_norm"],
        rows=rows)


def suite_theorem(target, cfg):
    tol = cfg["tolerances"]["theorem"]
    tol_min = cfg["tolerances"]["minimal_plane_norm"]
    chart = _chart_of(target)
    rng = _rng_for(cfg, "theorem")
    rows = []
    worst = 0.0
    refused = 0
    points = chart.sample_points(rng, _sample_count(cfg, chart, heavy=True))
    hg_max = 0.0
    for w in points:
        try:
            res = mean_curvature_identity_residuals(chart, w)
        except NotConformal:
            refused += 1
            continue
        hg = float(np.linalg.norm(res.h_gamma))
        hg_max = max(hg_max, hg)
        rows.append(_row(w, res.horizontal_residual, res.vertical_residual, hg))
        worst = max(worst, res.horizontal_residual / tol,
                    res.vertical_residual / tol)
    if refused == len(points):
        return SuiteResult(
            name="theorem", status="skip",
            reason="shape form is not conformal on this fixture "
                   "(identities not applicable)",
            stats={"n_samples": 0, "refused": refused})
    stats = _residual_stats([max(r[chart.dim], r[chart.dim + 1]) for r in rows])
    stats["refused"] = refused
    stats["max_plane_mean_curvature"] = hg_max
    desc = getattr(chart, "descriptor", None)
    status = "pass" if worst < 1.0 else "fail"
    if desc is not None and "plane_mean_curvature_norm" in desc.expectations:
        if hg_max >= max(tol_min, desc.expectations[
                "plane_mean_curvature_norm"].tol):
            status = "fail"
    return SuiteResult(
        name="theorem", status=status,
        stats=stats,
        columns=_coord_columns(chart) + ["residual1", "residual2",
                                         "plane_mean_curvature_norm"],
        rows=rows)


def suite_palmer(target, cfg):
    tol_iso = cfg["tolerances"]["palmer_iso"]
    tol_oracle = cfg["tolerances"]["palmer_oracle"]
    chart = _chart_of(target)
    if chart.fiber_dim != 0:
        return SuiteResult(
            name="palmer", status="skip",
            reason="principal-curvature one-form needs a hypersurface fixture")
    rng = _rng_for(cfg, "palmer")
    rows = []
    worst = 0.0
    sigma_max = 0.0
    desc = getattr(chart, "descriptor", None)
    isoparametric = (desc is not None
                     and "isoparametric" in desc.expectations
                     and desc.expectations["isoparametric"].value)
    for w in chart.sample_points(rng, _sample_count(cfg, chart, heavy=True)):
        cmp = mean_curvature_one_form(chart, w)
        sigma_max = max(sigma_max, float(np.max(np.abs(cmp.sigma))))
        rows.append(_row(w, cmp.residual, float(np.max(np.abs(cmp.sigma))),
                         int(cmp.used_symmetric_fallback)))
        worst = max(worst, cmp.residual / tol_oracle)
        if isoparametric:
            worst = max(worst, float(np.max(np.abs(cmp.sigma))) / tol_iso)
    stats = _residual_stats([r[chart.dim] for r in rows])
    stats["max_one_form_norm"] = sigma_max
    return SuiteResult(
        name="palmer", status="pass" if worst < 1.0 else "fail",
        stats=stats,
        columns=_coord_columns(chart) + ["oracle_residual", "sigma_max",
                                         "used_fallback"],
        rows=rows)


def suite_variations(target, cfg):
    tol_closed = cfg["tolerances"]["closedness"]
    tol_period = cfg["tolerances"]["period"]
    rng = _rng_for(cfg, "variations")
    rows = []
    worst = 0.0
    if isinstance(target, DeformationFamily):
        chart = _chart_of(target)
        t0 = 0.25 * sum(target.t_interval) + 0.05
        form = lambda ww: variation_form(target, t0, ww)
        for w in chart.sample_points(rng, 3):
            res = exterior_derivative(form, w, step=3e-4)
            rows.append(["closedness", float(res), tol_closed])
            worst = max(worst, res / tol_closed)
        loops = target.descriptor.loops if target.descriptor else []
        for k, loop in enumerate(loops):
            per = abs(loop_integral(form, loop))
            rows.append([f"variation_period_{k}", float(per), tol_period])
            worst = max(worst, per / tol_period)
        samples = chart.sample_points(rng, 4)
        lo, hi = target.t_interval
        monitors = {}
        for t in (0.0, 0.5 * hi, 0.9 * hi):
            if lo <= t <= hi:
                monitors[f"monitor_t_{t:g}"] = transversality_monitor(
                    target, t, samples)
        for key in sorted(monitors):
            rows.append([key, float(monitors[key]), None])
    else:
        chart = target
        form = lambda ww: mean_curvature_form(chart, ww)
        loops = chart.descriptor.loops if chart.descriptor else []
        for k, loop in enumerate(loops):
            per = abs(loop_integral(form, loop))
            rows.append([f"mean_curvature_period_{k}", float(per), tol_period])
            worst = max(worst, per / tol_period)
        if not loops:
            return SuiteResult(name="variations", status="skip",
                               reason="fixture declares no loops")
    stats = _residual_stats([r[1] for r in rows if r[2] is not None])
    return SuiteResult(
        name="variations", status="pass" if worst < 1.0 else "fail",
        stats=stats, columns=["item", "value", "bound"], rows=rows)


SUITES = {
    "algebra": suite_algebra,
    "legendrian": suite_legendrian,
    "metric": suite_metric,
    "meancurvature": suite_meancurvature,
    "theorem": suite_theorem,
    "palmer": suite_palmer,
    "variations": suite_variations,
}


# -- runner ----------------------------------------------------------------------

def run(config):
    """Validate, build, run suites; returns (report dict, timings dict)."""
    cfg = validate_config(config)
    target = build_target(cfg)
    results = []
    timings = {}
    for suite in cfg["suites"]:
        t0 = time.perf_counter()
        try:
            result = SUITES[suite](target, cfg)
        except Exception as err:  # numerical failure inside a suite
            result = SuiteResult(name=suite, status="fail",
                                 reason=f"{type(err).__name__}: {err}")
        timings[suite] = time.perf_counter() - t0
        results.append(result)
    overall = all(r.status != "fail" for r in results)
    # the echoed config omits the output directory so report bytes depend
    # only on the mathematical configuration and seed
    echo = {k: v for k, v in cfg.items() if k != "output"}
    echo["output_formats"] = cfg["output"]["formats"]
    report = {
        "schema_version": SCHEMA_VERSION,
        "package": "gaussmaps",
        "config": echo,
        "suites": [r.as_dict() for r in results],
        "overall_pass": overall,
    }
    return report, timings


def report_to_json(report):
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_report(report, timings, outdir):
    """Write report.json (+ CSVs when requested) and a timing sidecar.

    The report and CSV bytes depend only on config and seed; timings go to
    a separate file so the determinism contract holds.
    """
    outdir = FsPath(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    report_path = outdir / "report.json"
    report_path.write_text(report_to_json(report))
    paths.append(report_path)
    if "csv" in report["config"]["output_formats"]:
        paths.extend(emit_plotdata(report, outdir))
    timing_path = outdir / "timings.json"
    timing_path.write_text(json.dumps(
        {k: round(v, 3) for k, v in sorted(timings.items())}, indent=2) + "\n")
    return paths


def emit_plotdata(report, outdir):
    """One CSV per suite with the documented per-suite columns, rows in
    deterministic sample order; header-only when a suite has no rows."""
    outdir = FsPath(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for suite in report["suites"]:
        path = outdir / f"{suite['name']}.csv"
        table = suite.get("table", {"columns": [], "rows": []})
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table["columns"])
            for row in table["rows"]:
                writer.writerow([repr(v) if isinstance(v, float) else v
                                 for v in row])
        paths.append(path)
    return paths
