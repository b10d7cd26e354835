"""
Rank-One Inverse Processor
The rank-one update lemma and the three-step inversion of g_ij for a_ij̄ = 0
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.processors.alphabeta_family import jet_matsumoto
from src.processors.invariants import Invariants, SigmaInvariants, rho_invariants, sigma_from_invariants
from src.processors.metric_model import ContractionScalars, GroundValues, contraction_scalars
from src.processors.tensor_engine import MetricTensors
from src.utils.errors import (
    NotNonHermitian,
    RCFinslerError,
    SingularBaseMetric,
    SingularMatrix,
    StepSingular,
    UpdateSingular,
)
from src.utils.linalg_core import CMatrix, as_vector, contract, lu_invert, max_abs, outer

logger = logging.getLogger(__name__)

UPDATE_GUARD = 1e-12
COINCIDENCE_RTOL = 1e-12


@dataclass(frozen=True)
class Rank1Step:
    """One application of H = Q ± C⊗C, with Q already inverted"""

    Q_inv: CMatrix
    detQ: complex
    C_lower: np.ndarray
    C_upper: np.ndarray
    C2: complex
    sign: int

    @classmethod
    def build(cls, Q_inv: CMatrix, detQ: complex, C_lower, sign: int) -> "Rank1Step":
        c_low = as_vector(C_lower)
        c_up = Q_inv.apply(c_low)
        return cls(Q_inv, complex(detQ), c_low, c_up, contract(c_up, c_low), 1 if sign >= 0 else -1)

    @property
    def factor(self) -> complex:
        return 1 + self.sign * self.C2

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sign": self.sign,
            "C2": [self.C2.real, self.C2.imag],
            "factor": [self.factor.real, self.factor.imag],
            "detQ": [self.detQ.real, self.detQ.imag],
        }


@dataclass(frozen=True)
class PipelineResult:
    g_inv: CMatrix
    det_g: complex
    per_step: Tuple[Rank1Step, Rank1Step, Rank1Step]
    tau: complex
    omega_coeff: complex
    gamma_coeff: complex
    expansion_unique: bool
    scalars: ContractionScalars
    sigma: SigmaInvariants

    def to_dict(self) -> Dict[str, Any]:
        def pair(c: complex):
            return [float(c.real), float(c.imag)]

        return {
            "det_g": pair(self.det_g),
            "tau": pair(self.tau),
            "omega": pair(self.omega_coeff),
            "gamma": pair(self.gamma_coeff),
            "expansion_unique": self.expansion_unique,
            "steps": [s.to_dict() for s in self.per_step],
            "g_inv": [[pair(c) for c in row] for row in self.g_inv.entries],
        }


def rank1_update(s: Rank1Step) -> Tuple[CMatrix, complex]:
    """
    det(Q ± CCᵀ) = (1 ± C²)det Q and (Q ± CCᵀ)⁻¹ = Q⁻¹ ∓ C^iC^j/(1 ± C²)

    Raises:
        UpdateSingular: when |1 ± C²| <= 1e-12
    """
    factor = s.factor
    if abs(factor) <= UPDATE_GUARD:
        raise UpdateSingular(
            f"1 {'+' if s.sign > 0 else '-'} C² = {factor:.3e} is too close to zero",
            {"C2": [s.C2.real, s.C2.imag], "sign": s.sign},
        )
    h_inv = s.Q_inv.entries - (s.sign / factor) * outer(s.C_upper, s.C_upper)
    return CMatrix.symmetric(h_inv), factor * s.detQ


def _signed_root(coef: float, vector: np.ndarray) -> Tuple[np.ndarray, int]:
    if coef >= 0:
        return np.sqrt(coef) * vector, 1
    return np.sqrt(-coef) * vector, -1


def _expand(w: np.ndarray, eta: np.ndarray, b_up: np.ndarray) -> Tuple[complex, complex, bool]:
    """Coefficients of w in the basis {η, b^i}; unique only when the two are independent"""
    basis = np.column_stack([eta, b_up])
    coeffs, _, rank, _ = np.linalg.lstsq(basis, w, rcond=1e-10)
    return complex(coeffs[0]), complex(coeffs[1]), int(rank) == 2


def invert_pipeline(
    gv: GroundValues,
    inv: Invariants,
    sig: Optional[SigmaInvariants] = None,
    t: Optional[MetricTensors] = None,
) -> PipelineResult:
    """
    Invert g_ij = ρ₀[a_ij − σ₁l_il_j + σ₂b_ib_j + σ₃η_iη_j] with three rank-one updates

    Step 1 starts from Q = a_ij and adds −σ₁l⊗l, step 2 adds σ₂b⊗b, step 3 adds
    σ₃η_low⊗η_low. Negative coefficients use C = √|σ|·v with the minus branch.
    The (Ω, Γ) pair expands H₂⁻¹l, the inverse after step 2 applied to l_i,
    in the basis {η^i, b^i}.

    Raises:
        NotNonHermitian: when a_ij̄ does not vanish at the point
        StepSingular: when a step guard fails (step 1 also covers ρ₀ = 0 and singular a_ij)
        SigmaUndefined: when σ₃ is undefined (ρ₁ = 0)
    """
    if max_abs(gv.a_mixed.entries) != 0.0:
        raise NotNonHermitian("The inversion needs a_ij̄ = 0 at the point")
    if inv.rho0 == 0 or not np.isfinite(inv.rho0):
        raise StepSingular(1, "ρ₀ = 0: g_ij degenerates and has no inverse")

    sig = sig or sigma_from_invariants(inv)
    try:
        cs = contraction_scalars(gv)
    except SingularBaseMetric as e:
        raise StepSingular(1, f"Step 1 needs a_ij invertible: {e.message}")

    eta_low = inv.rho0 * gv.l + inv.rho1 * gv.b
    updates = ((-sig.sigma1, gv.l), (sig.sigma2, gv.b), (sig.sigma3, eta_low))

    q_inv, det_q = cs.a_inv, cs.det_a
    steps = []
    after_two = None
    for k, (coef, vector) in enumerate(updates, start=1):
        c_lower, sign = _signed_root(coef, np.asarray(vector))
        step = Rank1Step.build(q_inv, det_q, c_lower, sign)
        try:
            q_inv, det_q = rank1_update(step)
        except UpdateSingular as e:
            raise StepSingular(k, f"Step {k}: {e.message}")
        steps.append(step)
        if k == 2:
            after_two = q_inv

    n = gv.n
    tau = 1 + sig.sigma2 * (cs.omega + sig.sigma1 * cs.epsilon ** 2 / (1 - sig.sigma1 * cs.gamma))
    omega_coeff, gamma_coeff, unique = _expand(after_two.apply(gv.l), gv.eta, cs.b_up)

    logger.debug(f"Pipeline factors {[complex(s.factor) for s in steps]}, τ = {tau:.6g}")
    return PipelineResult(
        g_inv=CMatrix.symmetric(q_inv.entries / inv.rho0),
        det_g=complex(inv.rho0 ** n * det_q),
        per_step=tuple(steps),
        tau=complex(tau),
        omega_coeff=omega_coeff,
        gamma_coeff=gamma_coeff,
        expansion_unique=unique,
        scalars=cs,
        sigma=sig,
    )


def printed_omega_gamma(sig: SigmaInvariants, cs: ContractionScalars, tau: complex) -> Tuple[complex, complex]:
    """Ω and Γ as printed in the theorem statement"""
    s1, s2 = sig.sigma1, sig.sigma2
    gamma, eps = cs.gamma, cs.epsilon
    u = 1 - s1 * gamma
    k = s1 / u - s1 ** 2 * s2 * eps ** 2 / (tau * u ** 2)
    omega = 1 + k * gamma - s1 * s2 * eps ** 2 / (tau * u)
    big_gamma = -s2 * eps / tau + s1 * s2 * eps * gamma / (tau * u)
    return complex(omega), complex(big_gamma)


def proof_p_q(sig: SigmaInvariants, cs: ContractionScalars, tau: complex) -> Tuple[complex, complex]:
    """P and Q as printed in the third step of the proof"""
    s1, s2 = sig.sigma1, sig.sigma2
    gamma, eps = cs.gamma, cs.epsilon
    u = 1 - s1 * gamma
    k = s1 / u - s1 ** 2 * s2 * eps ** 2 / (tau * u ** 2)
    p = (1 + k) * gamma - s1 * s2 * eps / (tau * u ** 3)
    q = -s2 * eps / tau - s1 * s2 * eps * gamma / (tau * u)
    return complex(p), complex(q)


def rel_diff_c(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def trailing_det_base(alpha: float, beta: float) -> float:
    """Base of the trailing determinant line, α²(α − 2β)/(α − β)³"""
    return alpha ** 2 * (alpha - 2 * beta) / (alpha - beta) ** 3


def determinant_audit(
    gv: GroundValues,
    inv: Invariants,
    sig: Optional[SigmaInvariants],
    t: MetricTensors,
    result: Optional[PipelineResult] = None,
) -> Dict[str, Any]:
    """
    det(g_ij) four ways with pairwise relative differences

    - lu: LU on the assembled g
    - pipeline: ρ₀ⁿ times the product of the step factors
    - proof_step: ρ₀ⁿ·f₃·τ·(1 − σ₁γ)·det a
    - theorem_text: ρ₀ⁿ·f₃·(1 + ω + σ₁ε²/(1 − σ₁γ))·(1 − σ₁γ)·det a

    The trailing line base α²(α − 2β)/(α − β)³ is compared with the Matsumoto and
    infinite-series ρ₀.
    """
    report: Dict[str, Any] = {"success": True}

    try:
        report_lu: Optional[complex] = lu_invert(t.g).determinant
    except SingularMatrix:
        report_lu = None

    try:
        result = result or invert_pipeline(gv, inv, sig, t)
    except RCFinslerError as e:
        report.update({"success": False, "error": e.name, "message": e.message})
        if report_lu is not None:
            report["values"] = {"lu": [report_lu.real, report_lu.imag]}
        return report

    cs, s = result.scalars, result.sigma
    n = gv.n
    u = 1 - s.sigma1 * cs.gamma
    x = cs.omega + s.sigma1 * cs.epsilon ** 2 / u
    f3 = result.per_step[2].factor
    base = inv.rho0 ** n * f3 * u * cs.det_a

    values = {
        "lu": report_lu,
        "pipeline": result.det_g,
        "proof_step": complex(base * result.tau),
        "theorem_text": complex(base * (1 + x)),
    }
    names = list(values)
    diffs = {}
    for i, first in enumerate(names):
        for second in names[i + 1:]:
            if values[first] is None or values[second] is None:
                diffs[f"{first}_vs_{second}"] = None
            else:
                diffs[f"{first}_vs_{second}"] = rel_diff_c(values[first], values[second])

    trailing = trailing_det_base(gv.alpha, gv.beta)
    matsumoto_rho0 = rho_invariants(jet_matsumoto(gv.alpha, gv.beta), gv.alpha).rho0

    report.update(
        {
            "values": {k: None if v is None else [v.real, v.imag] for k, v in values.items()},
            "rel_diff": diffs,
            "indistinguishable_here": abs(x) <= COINCIDENCE_RTOL * max(1.0, abs(cs.omega)),
            "trailing_det_line": {
                "base": trailing,
                "vs_matsumoto_rho0": rel_diff_c(trailing ** n, matsumoto_rho0 ** n),
                "vs_infinite_series_rho0": rel_diff_c(trailing ** n, inv.rho0 ** n),
            },
        }
    )
    return report
