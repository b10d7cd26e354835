"""
Command Runner
Implements eval, verify, invert, audit and sample over a metric source; every
command returns a report dictionary carrying its exit code
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

import numpy as np

from config import Config
from src.processors.alphabeta_family import (
    INFINITE_SERIES,
    FamilyKind,
    euler_residuals,
    family_by_name,
    jet_agreement,
    jet_fd,
)
from src.processors.audit_report import AuditThresholds, audit_document, run_audit
from src.processors.invariants import (
    DERIVED,
    LITERAL,
    Invariants,
    rho_invariants,
    sigma_from_invariants,
    sigma_invariants,
)
from src.processors.metric_model import (
    EvaluationPoint,
    GroundValues,
    MetricData,
    fixture_by_name,
    grid_points,
    ground_values,
    load_metric_file,
    margin_predicate,
    metric_from_source,
    sample_points,
    sample_valid_points,
)
from src.processors.rank1_inverse import determinant_audit, invert_pipeline
from src.processors.tensor_engine import (
    assemble_tensors,
    homogeneity_residuals,
    identity_suite,
    oracle_angular,
    oracle_hessians,
    sigma_form_tensor,
    tensor_difference,
)
from src.utils.errors import ConfigError, NotNonHermitian, RCFinslerError
from src.utils.linalg_core import lu_invert, max_abs, residual_to_identity
from src.utils.report_writer import load_replay
from src.utils.validation import InputValidator, collect_errors

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_ERROR = 2

T = TypeVar("T")


@dataclass
class RunConfig:
    """One command invocation: metric source, family, points and output settings"""

    fixture: Optional[str] = None
    metric_path: Optional[str] = None
    family: str = "infinite-series"
    z: Optional[List[complex]] = None
    eta: Optional[List[complex]] = None
    b: Optional[List[complex]] = None
    samples: Optional[int] = None
    seed: int = 42
    grid: Optional[int] = None
    jobs: int = 1
    fmt: Optional[str] = None
    replay: Optional[str] = None
    witness: Optional[str] = None
    box: float = 1.0
    verify_tolerance: float = 1e-5
    consistent_threshold: float = 1e-5
    discrepant_threshold: float = 1e-3
    discrepant_min_points: int = 10
    valid_margin: float = 0.05
    sigma_margin: float = 0.1
    max_error_fraction: float = 0.1

    @classmethod
    def from_mapping(cls, data: Dict[str, Any], config: Config = Config) -> "RunConfig":
        """
        Build a run configuration from CLI arguments or a JSON request body

        Raises:
            ConfigError: listing every invalid field
        """
        validator = InputValidator(max_samples=config.MAX_SAMPLES, max_jobs=64)
        results = []
        values: Dict[str, Any] = {}

        if data.get("fixture"):
            check = validator.validate_fixture(data["fixture"])
            results.append(check)
            values["fixture"] = check.get("fixture")
        if data.get("metric"):
            check = validator.validate_json_path(data["metric"], "metric file")
            results.append(check)
            values["metric_path"] = check.get("path")
        if data.get("replay"):
            check = validator.validate_json_path(data["replay"], "replay file")
            results.append(check)
            values["replay"] = check.get("path")

        family = validator.validate_family(data.get("family"))
        results.append(family)
        values["family"] = family.get("family", "infinite-series")

        for key in ("z", "eta", "b"):
            if data.get(key) is not None:
                parsed = validator.parse_complex_list(data[key], f"--{key}")
                results.append(parsed)
                values[key] = parsed.get("values")

        for key, minimum in (("samples", 1), ("grid", 1)):
            if data.get(key) is not None:
                count = validator.validate_count(data[key], f"--{key}", minimum)
                results.append(count)
                values[key] = count.get("value")
        if data.get("jobs") is not None:
            jobs = validator.validate_count(data["jobs"], "--jobs", 1, 64)
            results.append(jobs)
            values["jobs"] = jobs.get("value", 1)
        else:
            values["jobs"] = config.MAX_JOBS

        if data.get("format") is not None:
            fmt = validator.validate_format(data["format"])
            results.append(fmt)
            values["fmt"] = fmt.get("format")

        try:
            values["seed"] = int(data["seed"]) if data.get("seed") is not None else config.DEFAULT_SEED
            values["box"] = float(data.get("box") or config.SAMPLE_BOX)
            values["verify_tolerance"] = float(data.get("tolerance") or config.VERIFY_TOLERANCE)
            values["consistent_threshold"] = float(data.get("consistent") or config.CONSISTENT_THRESHOLD)
            values["discrepant_threshold"] = float(data.get("discrepant") or config.DISCREPANT_THRESHOLD)
        except (TypeError, ValueError):
            results.append({"valid": False, "error": "seed, box and tolerances must be numbers"})

        errors = collect_errors(results)
        if errors:
            raise ConfigError("; ".join(errors), {"errors": errors})

        return cls(
            witness=data.get("witness"),
            discrepant_min_points=config.DISCREPANT_MIN_POINTS,
            valid_margin=config.VALID_MARGIN,
            sigma_margin=config.SIGMA_MARGIN,
            max_error_fraction=config.VERIFY_MAX_ERROR_FRACTION,
            **values,
        )


# ---------------------------------------------------------------------------
# Resolution helpers
# ---------------------------------------------------------------------------


def resolve_metric(cfg: RunConfig) -> MetricData:
    """
    The single metric source of a run (a replay report may supply it)

    Raises:
        ConfigError: when zero or two sources are given
    """
    sources = [s for s in (cfg.fixture, cfg.metric_path) if s]
    if len(sources) > 1:
        raise ConfigError("Give exactly one of --fixture and --metric")
    if cfg.fixture:
        return fixture_by_name(cfg.fixture, seed=cfg.seed, b=cfg.b)
    if cfg.metric_path:
        return load_metric_file(cfg.metric_path)
    if cfg.replay:
        source, _ = _replay(cfg)
        return metric_from_source(source)
    raise ConfigError("A metric source is required: --fixture NAME or --metric FILE")


def _replay(cfg: RunConfig):
    try:
        return load_replay(cfg.replay, cfg.witness)
    except (OSError, ValueError) as e:
        raise ConfigError(f"Cannot replay {cfg.replay}: {e}")


def explicit_points(cfg: RunConfig, m: MetricData) -> Optional[List[EvaluationPoint]]:
    """Points named on the command line or by a replay file; None when the run should sample"""
    if cfg.eta is not None:
        z = cfg.z if cfg.z is not None else [0j] * len(cfg.eta)
        point = EvaluationPoint.make(z, cfg.eta)
        if point.n != m.n:
            raise ConfigError(f"η has {point.n} entries but the metric has dimension {m.n}")
        return [point]
    if cfg.replay:
        _, witnesses = _replay(cfg)
        return [EvaluationPoint.from_dict(w) for w in witnesses]
    return None


def fan_out(fn: Callable[[EvaluationPoint], T], points: Sequence[EvaluationPoint], jobs: int) -> List[T]:
    """Apply fn to every point on a thread pool; results keep the point order"""
    if jobs <= 1 or len(points) <= 1:
        return [fn(p) for p in points]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, points))


def describe_metric(m: MetricData) -> Dict[str, Any]:
    return {"name": m.name, "n": m.n, **m.source}


def _header(command: str, cfg: RunConfig, m: MetricData, kind: FamilyKind) -> Dict[str, Any]:
    return {
        "command": command,
        "success": True,
        "exit_code": EXIT_OK,
        "metric": describe_metric(m),
        "family": kind.name,
        "seed": cfg.seed,
    }


def _finish(report: Dict[str, Any], code: int) -> Dict[str, Any]:
    report["exit_code"] = code
    report["success"] = code == EXIT_OK
    return report


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def _sigma_record(gv: GroundValues, inv: Invariants, kind: FamilyKind) -> Dict[str, Any]:
    record: Dict[str, Any] = {}
    if kind.name == INFINITE_SERIES.name:
        variants = (
            (DERIVED, lambda: sigma_invariants(gv.alpha, gv.beta, DERIVED)),
            (LITERAL, lambda: sigma_invariants(gv.alpha, gv.beta, LITERAL)),
        )
    else:
        variants = ((DERIVED, lambda: sigma_from_invariants(inv)),)
    for tag, compute in variants:
        try:
            record[tag] = compute().to_dict()
        except RCFinslerError as e:
            record[tag] = {"error": e.name, "message": e.message}
    return record


def evaluate_point(m: MetricData, p: EvaluationPoint, kind: FamilyKind = INFINITE_SERIES) -> Dict[str, Any]:
    """α, β, validity, jet, invariants, both σ variants and the tensors at one point"""
    record: Dict[str, Any] = {"success": True, "point": p.to_dict()}
    try:
        gv = ground_values(m, p)
        record.update(gv.to_dict())
        jet = kind.jet(gv.alpha, gv.beta)
    except RCFinslerError as e:
        record.update(e.to_dict())
        logger.warning(f"eval: {e.name} at a point: {e.message}")
        return record

    inv = rho_invariants(jet, gv.alpha)
    t = assemble_tensors(gv, inv)
    record.update(
        {
            "jet": jet.to_dict(),
            "euler_residuals": list(euler_residuals(jet, gv.alpha, gv.beta)),
            "invariants": inv.to_dict(),
            "sigma": _sigma_record(gv, inv, kind),
            **t.to_dict(),
        }
    )
    return record


def cmd_eval(cfg: RunConfig) -> Dict[str, Any]:
    """
    Evaluate the ground values, jet, invariants and tensors at explicit or sampled points

    Exit code 2 when an explicitly requested point hits a domain error.
    """
    m = resolve_metric(cfg)
    kind = family_by_name(cfg.family)
    points = explicit_points(cfg, m)
    explicit = points is not None
    if points is None:
        if not cfg.samples:
            raise ConfigError("eval needs --eta, --replay or --samples")
        points = sample_points(m, cfg.samples, cfg.seed, cfg.box)

    records = fan_out(lambda p: evaluate_point(m, p, kind), points, cfg.jobs)
    report = _header("eval", cfg, m, kind)
    report["points"] = records

    failed = any(not r["success"] for r in records)
    return _finish(report, EXIT_ERROR if explicit and failed else EXIT_OK)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def check_limits(tolerance: float, strict_jet: bool) -> Dict[str, float]:
    """Acceptance limit of every verify check"""
    return {
        "jet_vs_fd": tolerance,
        "euler": 1e-10 if strict_jet else tolerance,
        "tensor_vs_oracle": 1.0,
        "reconstruction": 1e-9,
        "euler_first": 1e-9,
        "lowering": 1e-9,
        "angular": 1e-12,
        "epsilon": 1e-12,
        "delta_epsilon": 1e-12,
        "angular_oracle": 1e-6,
        "homogeneity_L": 1e-12,
        "homogeneity_g": 1e-11 if strict_jet else tolerance,
        "sigma_form": 1e-11,
        "pipeline_identity": 1e-9,
        "pipeline_det": 1e-9,
        "proof_step_det": 1e-9,
    }


def required_checks(m: MetricData, kind: FamilyKind) -> List[str]:
    """Checks a verify run must evaluate at least once before it can pass"""
    names = ["euler", "tensor_vs_oracle", "reconstruction", "angular_oracle", "homogeneity_L"]
    if kind.analytic_jet is not None:
        names.insert(0, "jet_vs_fd")
    if m.non_hermitian:
        names.append("pipeline_identity")
    return names


def verify_point(
    m: MetricData, p: EvaluationPoint, kind: FamilyKind, tolerance: float
) -> Dict[str, Any]:
    """
    Every verification check at one point

    Returns:
        {"checks": {name: value}, "errors": {stage: error name}}
    """
    checks: Dict[str, float] = {}
    errors: Dict[str, str] = {}

    try:
        gv = ground_values(m, p)
        jet = kind.jet(gv.alpha, gv.beta)
    except RCFinslerError as e:
        return {"checks": checks, "errors": {"point": e.name}}

    inv = rho_invariants(jet, gv.alpha)
    t = assemble_tensors(gv, inv)

    def stage(name: str, fn: Callable[[], None]):
        try:
            fn()
        except RCFinslerError as e:
            errors[name] = e.name

    if kind.analytic_jet is not None:
        stage("jet_fd", lambda: checks.update(jet_vs_fd=jet_agreement(jet, jet_fd(kind, gv.alpha, gv.beta))))
    checks["euler"] = max(euler_residuals(jet, gv.alpha, gv.beta))

    def oracle_stage():
        oracle = oracle_hessians(m, p, kind)
        d_g, d_mixed = tensor_difference(t, oracle)
        norm = max(max_abs(t.g.entries), max_abs(t.g_mixed.entries))
        allowed = max(tolerance * norm, 10 * oracle.error_estimate, 1e-300)
        checks["tensor_vs_oracle"] = max(d_g, d_mixed) / allowed

    stage("oracle", oracle_stage)

    suite = identity_suite(t, gv, jet.L)
    for key in ("reconstruction", "euler_first", "lowering", "angular", "epsilon", "delta_epsilon"):
        if suite.get(key) is not None:
            checks[key] = suite[key]

    oracle_l = oracle_angular(m, p)
    checks["angular_oracle"] = max_abs(oracle_l - gv.l) / max(max_abs(gv.l), 1e-300)

    def homogeneity_stage():
        h = homogeneity_residuals(m, p, kind)
        checks["homogeneity_L"] = h["L_degree_two"]
        checks["homogeneity_g"] = h["g_degree_zero"]

    stage("homogeneity", homogeneity_stage)

    def sigma_stage():
        sig = sigma_from_invariants(inv)
        form = sigma_form_tensor(gv, inv, sig)
        checks["sigma_form"] = max_abs(form.entries - t.g.entries) / max(max_abs(t.g.entries), 1e-300)

    stage("sigma", sigma_stage)

    if m.non_hermitian:

        def pipeline_stage():
            result = invert_pipeline(gv, inv, None, t)
            checks["pipeline_identity"] = residual_to_identity(t.g.entries, result.g_inv.entries)
            det = determinant_audit(gv, inv, result.sigma, t, result)
            if det.get("success") and det["rel_diff"]["lu_vs_pipeline"] is not None:
                checks["pipeline_det"] = det["rel_diff"]["lu_vs_pipeline"]
                checks["proof_step_det"] = det["rel_diff"]["lu_vs_proof_step"]

        stage("pipeline", pipeline_stage)

    return {"checks": checks, "errors": errors}


def _verify_predicate(cfg: RunConfig, kind: FamilyKind):
    if kind.name == INFINITE_SERIES.name:
        return margin_predicate(cfg.valid_margin, cfg.sigma_margin)

    def predicate(alpha: float, beta: float) -> bool:
        return kind.singular_distance(alpha, beta) > cfg.valid_margin * max(alpha, 1.0)

    return predicate


def cmd_verify(cfg: RunConfig) -> Dict[str, Any]:
    """
    Identity suite, Euler relations and closed-form vs oracle sweeps

    Exit code 1 when any check exceeds its limit.
    """
    m = resolve_metric(cfg)
    kind = family_by_name(cfg.family)
    points = explicit_points(cfg, m)
    explicit = points is not None
    if points is None:
        samples = cfg.samples or Config.DEFAULT_SAMPLES
        points = sample_valid_points(m, samples, cfg.seed, _verify_predicate(cfg, kind), cfg.box)

    results = fan_out(lambda p: verify_point(m, p, kind, cfg.verify_tolerance), points, cfg.jobs)
    limits = check_limits(cfg.verify_tolerance, kind.analytic_jet is not None)

    checks: Dict[str, Dict[str, Any]] = {}
    errors: Dict[str, int] = {}
    for idx, res in enumerate(results):
        for name, value in res["checks"].items():
            entry = checks.setdefault(name, {"max": 0.0, "limit": limits[name], "count": 0, "witness": None})
            entry["count"] += 1
            if entry["witness"] is None or value > entry["max"]:
                entry["max"] = float(value)
                entry["witness"] = points[idx].to_dict()
        for stage, name in res["errors"].items():
            key = f"{stage}:{name}"
            errors[key] = errors.get(key, 0) + 1

    for entry in checks.values():
        entry["pass"] = bool(entry["max"] <= entry["limit"])
    unchecked = [name for name in required_checks(m, kind) if name not in checks]
    error_fraction = sum(1 for res in results if res["errors"]) / len(points) if points else 0.0
    all_pass = (
        bool(checks)
        and all(entry["pass"] for entry in checks.values())
        and not unchecked
        and error_fraction <= cfg.max_error_fraction
    )

    report = _header("verify", cfg, m, kind)
    report.update(
        {
            "verdict": "PASS" if all_pass else "FAIL",
            "samples": len(points),
            "tolerance": cfg.verify_tolerance,
            "checks": {name: checks[name] for name in limits if name in checks},
            "errors": errors,
            "error_fraction": error_fraction,
            "unchecked": unchecked,
        }
    )
    if unchecked:
        logger.warning(f"verify {m.name}: never evaluated {', '.join(unchecked)}")
    logger.info(f"verify {m.name}: {report['verdict']} over {len(points)} points, {sum(errors.values())} errors")

    if explicit and errors:
        return _finish(report, EXIT_ERROR)
    return _finish(report, EXIT_OK if all_pass else EXIT_FAIL)


# ---------------------------------------------------------------------------
# invert
# ---------------------------------------------------------------------------


def invert_point(m: MetricData, p: EvaluationPoint, kind: FamilyKind) -> Dict[str, Any]:
    """Three-step inverse and determinant audit at one point, checked against LU"""
    record: Dict[str, Any] = {"success": True, "point": p.to_dict()}
    try:
        gv = ground_values(m, p)
        record.update(gv.to_dict())
        inv = rho_invariants(kind.jet(gv.alpha, gv.beta), gv.alpha)
        t = assemble_tensors(gv, inv)
        result = invert_pipeline(gv, inv, None, t)
    except RCFinslerError as e:
        record.update(e.to_dict())
        return record

    identity = residual_to_identity(t.g.entries, result.g_inv.entries)
    det = determinant_audit(gv, inv, result.sigma, t, result)
    try:
        lu_det = lu_invert(t.g).determinant
        det_rel = abs(result.det_g - lu_det) / max(abs(lu_det), 1e-300)
    except RCFinslerError:
        det_rel = None

    record.update(
        {
            "sigma": result.sigma.to_dict(),
            "pipeline": result.to_dict(),
            "determinants": det,
            "identity_residual": identity,
            "det_rel_diff": det_rel,
            "pass": bool(identity <= 1e-9 and det_rel is not None and det_rel <= 1e-9),
        }
    )
    return record


def cmd_invert(cfg: RunConfig) -> Dict[str, Any]:
    """
    Inverse and determinant of g_ij through the rank-one pipeline

    Raises:
        NotNonHermitian: when the metric has a_ij̄ != 0
    """
    m = resolve_metric(cfg)
    if not m.non_hermitian:
        raise NotNonHermitian(f"invert needs a_ij̄ = 0; {m.name} has a mixed block")
    kind = family_by_name(cfg.family)
    points = explicit_points(cfg, m)
    explicit = points is not None
    if points is None:
        samples = cfg.samples or Config.DEFAULT_SAMPLES
        points = sample_valid_points(m, samples, cfg.seed, _verify_predicate(cfg, kind), cfg.box)

    records = fan_out(lambda p: invert_point(m, p, kind), points, cfg.jobs)
    report = _header("invert", cfg, m, kind)
    report["points"] = records

    failed = [r for r in records if not r["success"]]
    if explicit and failed:
        return _finish(report, EXIT_ERROR)
    all_pass = all(r["pass"] for r in records if r["success"])
    return _finish(report, EXIT_OK if all_pass else EXIT_FAIL)


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------


def cmd_audit(cfg: RunConfig) -> Dict[str, Any]:
    """Findings document for the metric; exit 0 unless the configuration is invalid"""
    m = resolve_metric(cfg)
    kind = family_by_name(cfg.family)
    samples = cfg.samples or Config.DEFAULT_SAMPLES
    thresholds = AuditThresholds(
        consistent=cfg.consistent_threshold,
        discrepant=cfg.discrepant_threshold,
        min_points=cfg.discrepant_min_points,
    )
    findings = run_audit(
        m,
        samples,
        cfg.seed,
        kind,
        jobs=cfg.jobs,
        thresholds=thresholds,
        valid_margin=cfg.valid_margin,
        sigma_margin=cfg.sigma_margin,
    )
    document = audit_document(m, findings, cfg.seed, samples, kind)
    return {"command": "audit", "success": True, "exit_code": EXIT_OK, **document}


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------


def format_complex_list(values: Sequence[complex]) -> str:
    """Inverse of the re:im input syntax; shortest text that parses back to the same floats"""

    def text(x: float) -> str:
        return np.format_float_positional(x, unique=True, trim="-")

    return ",".join(f"{text(c.real)}:{text(c.imag)}" for c in values)


def sample_row(m: MetricData, p: EvaluationPoint, kind: FamilyKind, index: int) -> Dict[str, Any]:
    """One validity-map row: points with violated guards are tagged, never dropped"""
    row: Dict[str, Any] = {
        "index": index,
        "z": format_complex_list(p.z),
        "eta": format_complex_list(p.eta),
        "alpha": None,
        "beta": None,
        "valid": False,
        "status": "invalid",
        "det_g_re": None,
        "det_g_im": None,
        "min_eig_modulus": None,
        "error": None,
    }
    try:
        gv = ground_values(m, p)
        row.update({"alpha": gv.alpha, "beta": gv.beta, "valid": gv.valid})
        row["status"] = "valid" if gv.valid else "invalid"
        inv = rho_invariants(kind.jet(gv.alpha, gv.beta), gv.alpha)
        g = assemble_tensors(gv, inv).g.entries
        det = complex(np.linalg.det(g))
        row.update(
            {
                "det_g_re": det.real,
                "det_g_im": det.imag,
                "min_eig_modulus": float(np.min(np.abs(np.linalg.eigvals(g)))),
            }
        )
    except RCFinslerError as e:
        row["error"] = e.name
    return row


def cmd_sample(cfg: RunConfig) -> Dict[str, Any]:
    """Validity-region map over a grid (--grid K) or a seeded box sample (--samples N)"""
    m = resolve_metric(cfg)
    kind = family_by_name(cfg.family)
    if cfg.grid:
        points = grid_points(m, cfg.grid, cfg.box)
        mode = {"grid": cfg.grid}
    else:
        samples = cfg.samples or Config.DEFAULT_SAMPLES
        points = sample_points(m, samples, cfg.seed, cfg.box)
        mode = {"samples": samples}

    indexed = list(enumerate(points))
    rows = fan_out(lambda item: sample_row(m, item[1], kind, item[0]), indexed, cfg.jobs)
    valid = sum(1 for r in rows if r["valid"])

    report = _header("sample", cfg, m, kind)
    report.update(
        {
            **mode,
            "box": cfg.box,
            "summary": {"points": len(rows), "valid": valid, "valid_fraction": valid / len(rows) if rows else 0.0},
            "rows": rows,
        }
    )
    logger.info(f"sample {m.name}: {valid}/{len(rows)} points in the validity region")
    return _finish(report, EXIT_OK)


COMMANDS: Dict[str, Callable[[RunConfig], Dict[str, Any]]] = {
    "eval": cmd_eval,
    "verify": cmd_verify,
    "invert": cmd_invert,
    "audit": cmd_audit,
    "sample": cmd_sample,
}

DEFAULT_FORMATS = {"sample": "csv"}


def run_command(name: str, cfg: RunConfig) -> Dict[str, Any]:
    """
    Dispatch a command; domain and configuration errors become exit-code-2 reports
    """
    if name not in COMMANDS:
        return {"command": name, "exit_code": EXIT_ERROR, **ConfigError(f"Unknown command '{name}'").to_dict()}
    try:
        return COMMANDS[name](cfg)
    except RCFinslerError as e:
        logger.warning(f"{name}: {e.name}: {e.message}")
        return {"command": name, "exit_code": EXIT_ERROR, **e.to_dict()}
