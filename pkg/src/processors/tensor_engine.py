"""
Tensor Engine Processor
Fundamental tensors g_ij, g_ij̄ from the ρ-invariants, the Wirtinger finite-difference
oracle, and the homogeneity identity checks
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from src.processors.alphabeta_family import INFINITE_SERIES, FamilyKind, Jet2
from src.processors.invariants import Invariants, SigmaInvariants, rho_invariants
from src.processors.metric_model import (
    EvaluationPoint,
    GroundValues,
    MetricData,
    alpha_sq_beta,
    contraction_scalars,
    ground_from_fields,
    ground_values,
)
from src.utils.errors import (
    DegenerateAlpha,
    RCFinslerError,
    TooCloseToSingularLocus,
    UnstableStencil,
)
from src.utils.linalg_core import CMatrix, as_vector, contract, max_abs, outer

logger = logging.getLogger(__name__)

STENCIL_RSTEP = 1e-4
STENCIL_CLEARANCE = 10.0
UNSTABLE_RATIO = 1e-3


@dataclass(frozen=True)
class MetricTensors:
    g: CMatrix
    g_mixed: CMatrix
    g_barbar: CMatrix
    eta_lower: np.ndarray

    def to_dict(self) -> Dict[str, list]:
        return {
            "g": _matrix_pairs(self.g.entries),
            "g_mixed": _matrix_pairs(self.g_mixed.entries),
            "eta_lower": [[float(c.real), float(c.imag)] for c in self.eta_lower],
        }


@dataclass(frozen=True)
class OracleTensors(MetricTensors):
    """Tensors from finite differences of L, with the step used and a step-halving error estimate"""

    stencil_step: float = 0.0
    error_estimate: float = 0.0
    L: float = 0.0


def _matrix_pairs(arr: np.ndarray) -> list:
    return [[[float(c.real), float(c.imag)] for c in row] for row in arr]


def printed_mixed_coefficient(alpha: float, beta: float) -> float:
    """The l_il_j̄ coefficient as printed in the mixed tensor, β(4β − α)/(2(α − β)⁴)"""
    return beta * (4 * beta - alpha) / (2 * (alpha - beta) ** 4)


def assemble_tensors(
    gv: GroundValues, inv: Invariants, mixed_coeff: Optional[float] = None
) -> MetricTensors:
    """
    ρ-form of the fundamental tensors

    g_ij  = ρ₀a_ij + ρ₋₂l_il_j + μ₀b_ib_j + ρ₋₁(b_jl_i + b_il_j)
    g_ij̄ = ρ₀a_ij̄ + ρ₋₂l_il_j̄ + μ₀b_ib_j̄ + ρ₋₁(b_j̄l_i + b_il_j̄)

    Args:
        gv: Ground values at the point
        inv: ρ/μ invariants at (α, β)
        mixed_coeff: Replaces ρ₋₂ on l_il_j̄ (audit of the printed coefficient)
    """
    l, l_bar, b = gv.l, gv.l_bar, gv.b
    b_bar = np.conj(b)
    c_mixed = inv.rho_m2 if mixed_coeff is None else mixed_coeff

    g = (
        inv.rho0 * gv.a.entries
        + inv.rho_m2 * outer(l, l)
        + inv.mu0 * outer(b, b)
        + inv.rho_m1 * (outer(l, b) + outer(b, l))
    )
    g_mixed = (
        inv.rho0 * gv.a_mixed.entries
        + c_mixed * outer(l, l_bar)
        + inv.mu0 * outer(b, b_bar)
        + inv.rho_m1 * (outer(l, b_bar) + outer(b, l_bar))
    )
    g_sym = CMatrix.symmetric(g)
    return MetricTensors(
        g=g_sym,
        g_mixed=CMatrix.general(g_mixed),
        g_barbar=g_sym.conj(),
        eta_lower=as_vector(inv.rho0 * l + inv.rho1 * b),
    )


def sigma_form_tensor(gv: GroundValues, inv: Invariants, sig: SigmaInvariants) -> CMatrix:
    """g_ij = ρ₀[a_ij − σ₁l_il_j + σ₂b_ib_j + σ₃η_iη_j] with η_i = ρ₀l_i + ρ₁b_i"""
    eta_low = inv.rho0 * gv.l + inv.rho1 * gv.b
    inner = (
        gv.a.entries
        - sig.sigma1 * outer(gv.l, gv.l)
        + sig.sigma2 * outer(gv.b, gv.b)
        + sig.sigma3 * outer(eta_low, eta_low)
    )
    return CMatrix.symmetric(inv.rho0 * inner)


def point_tensors(
    m: MetricData, p: EvaluationPoint, kind: FamilyKind = INFINITE_SERIES
) -> Tuple[GroundValues, Jet2, Invariants, MetricTensors]:
    """Ground values, jet, invariants and closed-form tensors at one point"""
    gv = ground_values(m, p)
    jet = kind.jet(gv.alpha, gv.beta)
    inv = rho_invariants(jet, gv.alpha)
    return gv, jet, inv, assemble_tensors(gv, inv)


# ---------------------------------------------------------------------------
# Wirtinger finite differences
# ---------------------------------------------------------------------------


def _split(eta: np.ndarray) -> np.ndarray:
    return np.concatenate([eta.real, eta.imag])


def _join(x: np.ndarray) -> np.ndarray:
    n = x.size // 2
    return x[:n] + 1j * x[n:]


def wirtinger_gradient(
    f: Callable[[np.ndarray], float], eta: Sequence[complex], h: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    First Wirtinger derivatives of a real function of η by central differences

    ∂f/∂η^k = ½(∂f/∂u^k − i∂f/∂v^k), ∂f/∂η̄^k = ½(∂f/∂u^k + i∂f/∂v^k)

    Returns:
        Tuple (∂f/∂η, ∂f/∂η̄)
    """
    x = _split(np.asarray(eta, dtype=complex))
    grad = np.empty(x.size)
    for k in range(x.size):
        step = np.zeros(x.size)
        step[k] = h
        grad[k] = (f(_join(x + step)) - f(_join(x - step))) / (2 * h)

    n = x.size // 2
    du, dv = grad[:n], grad[n:]
    return 0.5 * (du - 1j * dv), 0.5 * (du + 1j * dv)


def real_hessian(f: Callable[[np.ndarray], float], x: np.ndarray, h: float) -> np.ndarray:
    """Central-difference Hessian on real coordinates (corner stencil off the diagonal)"""
    size = x.size
    f0 = f(_join(x))
    hess = np.empty((size, size))
    eye = np.eye(size) * h

    for k in range(size):
        hess[k, k] = (f(_join(x + eye[k])) - 2 * f0 + f(_join(x - eye[k]))) / h ** 2
        for j in range(k + 1, size):
            value = (
                f(_join(x + eye[k] + eye[j]))
                - f(_join(x + eye[k] - eye[j]))
                - f(_join(x - eye[k] + eye[j]))
                + f(_join(x - eye[k] - eye[j]))
            ) / (4 * h ** 2)
            hess[k, j] = hess[j, k] = value
    return hess


def wirtinger_hessian(
    f: Callable[[np.ndarray], float], eta: Sequence[complex], h: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Second Wirtinger derivatives from the real Hessian

    g_ij  = ¼(H_uu − H_vv − i(H_uv + H_vu))
    g_ij̄ = ¼(H_uu + H_vv + i(H_uv − H_vu))
    """
    x = _split(np.asarray(eta, dtype=complex))
    n = x.size // 2
    hess = real_hessian(f, x, h)
    huu, huv = hess[:n, :n], hess[:n, n:]
    hvu, hvv = hess[n:, :n], hess[n:, n:]
    g = 0.25 * (huu - hvv - 1j * (huv + hvu))
    g_mixed = 0.25 * (huu + hvv + 1j * (huv - hvu))
    return g, g_mixed


def oracle_hessians(
    m: MetricData, p: EvaluationPoint, kind: FamilyKind = INFINITE_SERIES
) -> OracleTensors:
    """
    Fundamental tensors by Wirtinger finite differences of L(z, η) at fixed z

    Step h = 1e-4·max(1, ||η||); the error estimate is the largest entrywise change
    between steps h and h/2.

    Raises:
        TooCloseToSingularLocus: when the family's singular locus is within 10 steps
        UnstableStencil: when the error estimate exceeds 1e-3·||g||
    """
    a, a_mixed, b = m.evaluate_fields(p.z)
    gv = ground_from_fields(a, a_mixed, b, p.eta)
    h = STENCIL_RSTEP * max(1.0, float(np.linalg.norm(p.eta)))

    # (α, β) move by at most this much per unit step in η
    sensitivity = float(np.linalg.norm(gv.l)) / gv.alpha + float(np.linalg.norm(gv.b))
    distance = kind.singular_distance(gv.alpha, gv.beta)
    if distance <= STENCIL_CLEARANCE * h * max(sensitivity, 1.0):
        raise TooCloseToSingularLocus(
            f"{kind.name}: singular locus {kind.singular_locus} within {STENCIL_CLEARANCE:g} stencil steps",
            {"alpha": gv.alpha, "beta": gv.beta, "family": kind.name},
        )

    def lagrangian(eta: np.ndarray) -> float:
        alpha_sq, beta = alpha_sq_beta(a, a_mixed, b, eta)
        if alpha_sq <= 0:
            raise DegenerateAlpha("α² left the positive region inside the stencil")
        return float(kind.L(float(np.sqrt(alpha_sq)), beta))

    g_h, mixed_h = wirtinger_hessian(lagrangian, p.eta, h)
    g_half, mixed_half = wirtinger_hessian(lagrangian, p.eta, h / 2)
    error = max(max_abs(g_h - g_half), max_abs(mixed_h - mixed_half))

    scale = max(max_abs(g_h), max_abs(mixed_h))
    if error > UNSTABLE_RATIO * scale and error > 0:
        raise UnstableStencil(
            f"Step-halving error {error:.3e} exceeds {UNSTABLE_RATIO:g}·||g|| = {UNSTABLE_RATIO * scale:.3e}",
            {"error_estimate": error, "stencil_step": h},
        )

    d_eta, _ = wirtinger_gradient(lagrangian, p.eta, h)
    g_sym = CMatrix.symmetric(g_h)
    logger.debug(f"Oracle tensors at h={h:.3e}, error estimate {error:.3e}")
    return OracleTensors(
        g=g_sym,
        g_mixed=CMatrix.general(mixed_h),
        g_barbar=g_sym.conj(),
        eta_lower=as_vector(d_eta),
        stencil_step=h,
        error_estimate=error,
        L=lagrangian(np.asarray(p.eta)),
    )


def oracle_angular(m: MetricData, p: EvaluationPoint) -> np.ndarray:
    """l_i recovered as ∂α²/∂η^i"""
    a, a_mixed, b = m.evaluate_fields(p.z)
    h = STENCIL_RSTEP * max(1.0, float(np.linalg.norm(p.eta)))
    d_eta, _ = wirtinger_gradient(lambda eta: alpha_sq_beta(a, a_mixed, b, eta)[0], p.eta, h)
    return d_eta


# ---------------------------------------------------------------------------
# Identity checks
# ---------------------------------------------------------------------------


def identity_suite(t: MetricTensors, gv: GroundValues, L: float) -> Dict[str, Optional[float]]:
    """
    Normalized residuals of the homogeneity identities

    - reconstruction: g_ijη^iη^j + g_īj̄η̄^iη̄^j + 2g_ij̄η^iη̄^j = 2L
    - euler_first: η_iη^i + η_īη̄^i = 2L
    - lowering: (g·η)_j + (g_mixed·η̄)_j = η_j, the index placement the oracle satisfies
    - lowering_transposed: the same with g_mixedᵀ·η̄, reported only
    - angular: l_iη^i + l_īη̄^i = 2α²
    - epsilon: ε + ε̄ = 2β
    - delta_epsilon: δ = ε (only where a_ij̄ = 0 and a_ij is invertible)
    """
    eta = np.asarray(gv.eta)
    eta_bar = np.conj(eta)
    norm = max(1.0, abs(2 * L))

    quad = contract(t.g.apply(eta), eta)
    quad_bar = contract(t.g_barbar.apply(eta_bar), eta_bar)
    mixed = contract(t.g_mixed.apply(eta_bar), eta)
    reconstruction = abs(quad + quad_bar + 2 * mixed - 2 * L) / norm

    low = contract(t.eta_lower, eta)
    euler_first = abs(low + np.conj(low) - 2 * L) / norm

    lowered = t.g.entries @ eta + t.g_mixed.entries @ eta_bar
    lowering = max_abs(lowered - t.eta_lower) / norm
    transposed = t.g.entries @ eta + t.g_mixed.entries.T @ eta_bar
    lowering_transposed = max_abs(transposed - t.eta_lower) / norm

    alpha_sq = gv.alpha ** 2
    gamma = contract(gv.l, eta)
    epsilon = contract(gv.b, eta)
    angular = abs(gamma + np.conj(gamma) - 2 * alpha_sq) / max(1.0, 2 * alpha_sq)
    epsilon_res = abs(epsilon + np.conj(epsilon) - 2 * gv.beta) / max(1.0, abs(2 * gv.beta))

    delta_epsilon = None
    if max_abs(gv.a_mixed.entries) == 0.0:
        try:
            cs = contraction_scalars(gv)
            delta_epsilon = abs(cs.delta - cs.epsilon) / max(1.0, abs(cs.epsilon))
        except RCFinslerError:
            pass

    return {
        "reconstruction": float(reconstruction),
        "euler_first": float(euler_first),
        "lowering": float(lowering),
        "lowering_transposed": float(lowering_transposed),
        "angular": float(angular),
        "epsilon": float(epsilon_res),
        "delta_epsilon": None if delta_epsilon is None else float(delta_epsilon),
    }


def homogeneity_residuals(
    m: MetricData,
    p: EvaluationPoint,
    kind: FamilyKind = INFINITE_SERIES,
    lambdas: Sequence[float] = (0.5, 2.0, 7.0),
) -> Dict[str, float]:
    """
    Real-scaling checks: L(z, λη) = λ²L(z, η) and g(z, λη) = g(z, η)

    Returns:
        Largest relative residual of each check over the given λ
    """
    gv, jet, _, t = point_tensors(m, p, kind)
    g_norm = max(max_abs(t.g.entries), max_abs(t.g_mixed.entries), 1e-300)
    l_worst = 0.0
    g_worst = 0.0

    for lam in lambdas:
        _, jet_s, _, t_s = point_tensors(m, p.scaled(lam), kind)
        target = lam ** 2 * jet.L
        l_worst = max(l_worst, abs(jet_s.L - target) / max(abs(target), 1e-300))
        diff = max(max_abs(t_s.g.entries - t.g.entries), max_abs(t_s.g_mixed.entries - t.g_mixed.entries))
        g_worst = max(g_worst, diff / g_norm)

    return {"L_degree_two": l_worst, "g_degree_zero": g_worst}


def tensor_difference(a: MetricTensors, b: MetricTensors) -> Tuple[float, float]:
    """Max-norm differences of the g and g_mixed blocks"""
    return (
        max_abs(a.g.entries - b.g.entries),
        max_abs(a.g_mixed.entries - b.g_mixed.entries),
    )
