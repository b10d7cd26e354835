"""
Audit Report Processor
Compares printed-literal formulas with derivation-consistent ones and with the
finite-difference and LU oracles; emits a deterministic findings document
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from src.processors.alphabeta_family import INFINITE_SERIES, FamilyKind
from src.processors.invariants import (
    DERIVED,
    LITERAL,
    closed_form_invariants,
    sigma_invariants,
)
from src.processors.metric_model import (
    EvaluationPoint,
    MetricData,
    alpha_beta,
    is_valid,
    margin_predicate,
    sample_points,
    sample_valid_points,
)
from src.processors.rank1_inverse import (
    determinant_audit,
    invert_pipeline,
    printed_omega_gamma,
    proof_p_q,
    rel_diff_c,
    trailing_det_base,
)
from src.processors.tensor_engine import (
    assemble_tensors,
    oracle_angular,
    oracle_hessians,
    point_tensors,
    printed_mixed_coefficient,
    sigma_form_tensor,
)
from src.utils.errors import ConfigError, NoValidPoints, RCFinslerError
from src.utils.linalg_core import max_abs
from src.utils.report_writer import jsonable

logger = logging.getLogger(__name__)

CONSISTENT = "consistent"
DISCREPANT = "discrepant"
INDETERMINATE = "indeterminate"

# formula_id -> (printed formula, specific to the infinite-series family)
REGISTRY: Dict[str, Tuple[str, bool]] = {
    "sigma1": ("σ₁ = (β − α)⁵(β − 4α)/(2α²(β − 2α))", True),
    "sigma2": ("σ₂ = −α³/(β²(β − α))", True),
    "sigma3": ("σ₃ = α(β − α)⁵(β − 4α)/(2β⁸(β − 2α))", True),
    "g_mixed_coeff": ("g_ij̄ = ρ₀a_ij̄ + β(4β − α)/(2(α − β)⁴)·l_il_j̄ + μ₀b_ib_j̄ + ρ₋₁(b_j̄l_i + b_il_j̄)", True),
    "det_theorem_text": ("det(g_ij) = (ρ₀)ⁿ[1 + (Ωγ + Γε)√σ₃][1 + ω + σ₁ε²/(1 − σ₁γ)](1 − σ₁γ)det(a_ij)", True),
    "det_proof_step": ("det(H_ij) = [1 + σ₂(ω + σ₁ε²/(1 − σ₁γ))](1 − σ₁γ)det(a_ij)", True),
    "omega_gamma_closed_form": (
        "Ω = 1 + [σ₁/(1 − σ₁γ) − σ₁²σ₂ε²/(τ(1 − σ₁γ)²)]γ − σ₁σ₂ε²/(τ(1 − σ₁γ)), "
        "Γ = −σ₂ε/τ + σ₁σ₂εγ/(τ(1 − σ₁γ))",
        True,
    ),
    "omega_gamma_proof_form": (
        "P = [1 + (σ₁/(1 − σ₁γ) − σ₁²σ₂ε²/(τ(1 − σ₁γ)²))]γ − σ₁σ₂ε/(τ(1 − σ₁γ)³), "
        "Q = −σ₂ε/τ − σ₁σ₂εγ/(τ(1 − σ₁γ))",
        True,
    ),
    "l_i_restatement": ("l_i = a_īj̄η̄^j + a_ij̄η^j", False),
    "lowering_indices": ("∂L/∂η^j = g_ijη^i + g_j̄iη̄^i", False),
    "trailing_det_line": ("det(g_ij) = (α²(α − 2β)/(α − β)³)ⁿ det(H_ij)", True),
    "example_validity_region": ("α² = Re{a_ij̄η^iη̄^j}, β = Re{e^{z²}η²} on ℂ³, F = β²/(β − α) where α < β", False),
    "rho_closed_forms": ("ρ₀ = β⁴/(α(β − α)³), ρ₁ = β³(β − 2α)/(β − α)³, ρ₋₂, ρ₋₁, μ₀ closed forms", True),
    "mixed_rho0_display": ("∂ρ₀/∂η̄^j = ∂/∂η̄^j[(α³ − 2α²β)/(α − β)³]", True),
}


@dataclass
class AuditThresholds:
    consistent: float = 1e-5
    discrepant: float = 1e-3
    min_points: int = 10


@dataclass
class Finding:
    formula_id: str
    status: str
    max_rel_diff: float
    sample_count: int
    witness_point: Optional[EvaluationPoint] = None
    values: Dict[str, Any] = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "formula_id": self.formula_id,
            "status": self.status,
            "max_rel_diff": self.max_rel_diff,
            "sample_count": self.sample_count,
            "witness": self.witness_point.to_dict() if self.witness_point is not None else None,
            "paper_quote": REGISTRY[self.formula_id][0],
            "values": self.values,
            "note": self.note,
        }


def classify(diffs: List[float], thresholds: AuditThresholds) -> str:
    """discrepant: >= min_points above the discrepant threshold; consistent: all within tolerance"""
    if not diffs:
        return INDETERMINATE
    if sum(1 for d in diffs if d > thresholds.discrepant) >= thresholds.min_points:
        return DISCREPANT
    if max(diffs) <= thresholds.consistent:
        return CONSISTENT
    return INDETERMINATE


def _pair(c: complex) -> List[float]:
    c = complex(c)
    return [c.real, c.imag]


def _tensor_rel(a: np.ndarray, b: np.ndarray) -> float:
    return max_abs(a - b) / max(max_abs(a), max_abs(b), 1e-300)


# ---------------------------------------------------------------------------
# Per-point checks; each returns {formula_id: (rel_diff, values)}
# ---------------------------------------------------------------------------

PointChecks = Dict[str, Tuple[float, Dict[str, Any]]]


def _sigma_checks(gv, inv, t, oracle) -> PointChecks:
    derived = sigma_invariants(gv.alpha, gv.beta, DERIVED)
    literal = sigma_invariants(gv.alpha, gv.beta, LITERAL)
    values = {}
    if oracle is not None:
        values = {
            "oracle_residual_derived": _tensor_rel(sigma_form_tensor(gv, inv, derived).entries, oracle.g.entries),
            "oracle_residual_literal": _tensor_rel(sigma_form_tensor(gv, inv, literal).entries, oracle.g.entries),
        }
    out = {}
    for key in ("sigma1", "sigma2", "sigma3"):
        lit, der = getattr(literal, key), getattr(derived, key)
        out[key] = (rel_diff_c(lit, der), {"literal": lit, "derived": der, **values})
    return out


def _mixed_checks(gv, inv, t, oracle) -> PointChecks:
    printed = printed_mixed_coefficient(gv.alpha, gv.beta)
    values = {"literal": printed, "derived": inv.rho_m2}
    if oracle is not None:
        printed_t = assemble_tensors(gv, inv, mixed_coeff=printed)
        values["oracle_residual_derived"] = _tensor_rel(t.g_mixed.entries, oracle.g_mixed.entries)
        values["oracle_residual_literal"] = _tensor_rel(printed_t.g_mixed.entries, oracle.g_mixed.entries)
    return {"g_mixed_coeff": (rel_diff_c(printed, inv.rho_m2), values)}


def _pipeline_checks(gv, inv, t) -> PointChecks:
    result = invert_pipeline(gv, inv, None, t)
    det = determinant_audit(gv, inv, result.sigma, t, result)
    out: PointChecks = {}
    if det.get("success") and det["values"]["lu"] is not None:
        vals = det["values"]
        out["det_theorem_text"] = (
            det["rel_diff"]["lu_vs_theorem_text"],
            {"literal": vals["theorem_text"], "oracle": vals["lu"], "indistinguishable_here": det["indistinguishable_here"]},
        )
        out["det_proof_step"] = (
            det["rel_diff"]["lu_vs_proof_step"],
            {"literal": vals["proof_step"], "oracle": vals["lu"], "pipeline": vals["pipeline"]},
        )

    if result.expansion_unique:
        cs = result.scalars
        omega, big_gamma = printed_omega_gamma(result.sigma, cs, result.tau)
        p, q = proof_p_q(result.sigma, cs, result.tau)
        numeric = {"omega": _pair(result.omega_coeff), "gamma": _pair(result.gamma_coeff)}
        out["omega_gamma_closed_form"] = (
            max(rel_diff_c(omega, result.omega_coeff), rel_diff_c(big_gamma, result.gamma_coeff)),
            {
                "literal": {"omega": _pair(omega), "gamma": _pair(big_gamma)},
                "oracle": numeric,
                "omega_rel_diff": rel_diff_c(omega, result.omega_coeff),
                "gamma_rel_diff": rel_diff_c(big_gamma, result.gamma_coeff),
            },
        )
        out["omega_gamma_proof_form"] = (
            max(rel_diff_c(p, result.omega_coeff), rel_diff_c(q, result.gamma_coeff)),
            {
                "literal": {"P": _pair(p), "Q": _pair(q)},
                "oracle": numeric,
                "P_rel_diff": rel_diff_c(p, result.omega_coeff),
                "Q_rel_diff": rel_diff_c(q, result.gamma_coeff),
            },
        )
    return out


def _restatement_checks(m, p, gv, t) -> PointChecks:
    eta = np.asarray(gv.eta)
    restated = np.conj(gv.a.entries) @ np.conj(eta) + gv.a_mixed.entries @ eta
    oracle_l = oracle_angular(m, p)
    return {
        "l_i_restatement": (
            _tensor_rel(restated, np.asarray(gv.l)),
            {
                "oracle_residual_derived": _tensor_rel(np.asarray(gv.l), oracle_l),
                "oracle_residual_literal": _tensor_rel(restated, oracle_l),
            },
        )
    }


def _lowering_checks(gv, t) -> PointChecks:
    eta = np.asarray(gv.eta)
    satisfied = t.g.entries @ eta + t.g_mixed.entries @ np.conj(eta)
    printed = t.g.entries @ eta + t.g_mixed.entries.T @ np.conj(eta)
    target = np.asarray(t.eta_lower)
    return {
        "lowering_indices": (
            _tensor_rel(printed, target),
            {
                "residual_oracle_placement": _tensor_rel(satisfied, target),
                "residual_printed_placement": _tensor_rel(printed, target),
            },
        )
    }


def _rho_checks(gv, inv) -> PointChecks:
    closed = closed_form_invariants(gv.alpha, gv.beta)
    worst = max(rel_diff_c(getattr(closed, k), getattr(inv, k)) for k in inv.to_dict())
    displayed = (gv.alpha ** 3 - 2 * gv.alpha ** 2 * gv.beta) / (gv.alpha - gv.beta) ** 3
    trailing = trailing_det_base(gv.alpha, gv.beta)
    n = gv.n
    return {
        "rho_closed_forms": (worst, {"closed_form": closed.to_dict(), "defining_relations": inv.to_dict()}),
        "mixed_rho0_display": (rel_diff_c(displayed, inv.rho0), {"literal": displayed, "derived": inv.rho0}),
        "trailing_det_line": (
            rel_diff_c(trailing ** n, inv.rho0 ** n),
            {"literal_base": trailing, "infinite_series_rho0": inv.rho0, "note": "matches the Matsumoto ρ₀"},
        ),
    }


def audit_point(m: MetricData, p: EvaluationPoint, kind: FamilyKind = INFINITE_SERIES) -> Dict[str, Any]:
    """
    Every applicable check at one point; failures are recorded per check group

    Returns:
        {"checks": PointChecks, "errors": {group: error name}}
    """
    checks: PointChecks = {}
    errors: Dict[str, str] = {}

    def attempt(group: str, fn: Callable[[], PointChecks]):
        try:
            checks.update(fn())
        except RCFinslerError as e:
            errors[group] = e.name
            logger.debug(f"Audit group {group} failed at a point: {e.name}")

    try:
        gv, jet, inv, t = point_tensors(m, p, kind)
    except RCFinslerError as e:
        return {"checks": {}, "errors": {"point": e.name}}

    try:
        oracle = oracle_hessians(m, p, kind)
    except RCFinslerError as e:
        oracle = None
        errors["oracle"] = e.name

    specific = kind.name == INFINITE_SERIES.name
    if specific:
        attempt("sigma", lambda: _sigma_checks(gv, inv, t, oracle))
        attempt("g_mixed", lambda: _mixed_checks(gv, inv, t, oracle))
        attempt("pipeline", lambda: _pipeline_checks(gv, inv, t))
        attempt("rho", lambda: _rho_checks(gv, inv))
    attempt("restatement", lambda: _restatement_checks(m, p, gv, t))
    attempt("lowering", lambda: _lowering_checks(gv, t))
    return {"checks": checks, "errors": errors}


# ---------------------------------------------------------------------------
# Audit driver
# ---------------------------------------------------------------------------


def _validity_finding(m: MetricData, samples: int, seed: int, thresholds: AuditThresholds) -> Finding:
    points = sample_points(m, samples, seed)
    valid = 0
    for p in points:
        alpha_sq, beta = alpha_beta(m, p)
        if alpha_sq > 0 and is_valid(float(np.sqrt(alpha_sq)), beta):
            valid += 1
    empty = valid == 0
    status = DISCREPANT if empty and samples >= thresholds.min_points else CONSISTENT
    return Finding(
        formula_id="example_validity_region",
        status=status,
        max_rel_diff=1.0 if empty else 0.0,
        sample_count=samples,
        witness_point=points[0] if points else None,
        values={"valid_points": valid, "valid_fraction": valid / samples if samples else 0.0},
        note="validity region β > α > 0 is empty over the sample" if empty else "",
    )


def _collect(formula_id: str, per_point: List[Dict[str, Any]], points: List[EvaluationPoint], thresholds) -> Finding:
    diffs: List[float] = []
    best: Optional[Tuple[float, int, Dict[str, Any]]] = None
    for idx, record in enumerate(per_point):
        entry = record["checks"].get(formula_id)
        if entry is None:
            continue
        diff, values = entry
        diff = float(diff)
        diffs.append(diff)
        if best is None or diff > best[0]:
            best = (diff, idx, values)

    if best is None:
        return Finding(formula_id, INDETERMINATE, 0.0, 0, note="no point could evaluate this formula")
    return Finding(
        formula_id=formula_id,
        status=classify(diffs, thresholds),
        max_rel_diff=best[0],
        sample_count=len(diffs),
        witness_point=points[best[1]],
        values=jsonable(best[2]),
    )


def run_audit(
    m: MetricData,
    samples: int,
    seed: int,
    kind: FamilyKind = INFINITE_SERIES,
    jobs: int = 1,
    thresholds: Optional[AuditThresholds] = None,
    valid_margin: float = 0.05,
    sigma_margin: float = 0.1,
) -> List[Finding]:
    """
    Evaluate every registered formula over seeded valid points

    Points are drawn sequentially before the fan-out; findings come back in
    registry order, so a given (metric, samples, seed) always yields the same report.

    Raises:
        ConfigError: when samples < 10
    """
    thresholds = thresholds or AuditThresholds()
    if samples < 10:
        raise ConfigError("The audit needs at least 10 samples", {"samples": samples})

    validity = _validity_finding(m, samples, seed, thresholds)
    specific = kind.name == INFINITE_SERIES.name
    if specific:
        predicate = margin_predicate(valid_margin, sigma_margin)
    else:
        def predicate(alpha: float, beta: float) -> bool:
            return kind.singular_distance(alpha, beta) > valid_margin * max(alpha, 1.0)

    try:
        points = sample_valid_points(m, samples, seed, predicate)
    except NoValidPoints as e:
        logger.info(f"Audit of {m.name}: {e.message}")
        points = []

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        per_point = list(pool.map(lambda p: audit_point(m, p, kind), points))

    findings = []
    for formula_id, (_, family_specific) in REGISTRY.items():
        if formula_id == "example_validity_region":
            findings.append(validity)
            continue
        if family_specific and not specific:
            findings.append(
                Finding(formula_id, INDETERMINATE, 0.0, 0, note=f"not applicable to the {kind.name} family")
            )
            continue
        findings.append(_collect(formula_id, per_point, points, thresholds))

    logger.info(
        f"Audit of {m.name} over {len(points)} points: "
        + ", ".join(f"{f.formula_id}={f.status}" for f in findings)
    )
    return findings


def audit_document(
    m: MetricData, findings: List[Finding], seed: int, samples: int, kind: FamilyKind = INFINITE_SERIES
) -> Dict[str, Any]:
    """Report document {"metric", "family", "seed", "samples", "findings"}"""
    return {
        "metric": {"name": m.name, "n": m.n, **m.source},
        "family": kind.name,
        "seed": seed,
        "samples": samples,
        "findings": [f.to_dict() for f in findings],
    }


def dumps_report(document: Dict[str, Any]) -> str:
    """Deterministic JSON text of a report"""
    return json.dumps(jsonable(document), indent=2, ensure_ascii=False)
