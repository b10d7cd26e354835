"""
Invariants Processor
The five ρ/μ invariants and the three σ invariants, in a printed-literal and a derived variant
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict

from src.processors.alphabeta_family import Jet2, jet_infinite_series
from src.utils.errors import PoleAtAlphaEqualsBeta, SigmaUndefined

logger = logging.getLogger(__name__)

LITERAL = "literal"
DERIVED = "derived"
SIGMA_RTOL = 1e-9


@dataclass(frozen=True)
class Invariants:
    rho0: float
    rho1: float
    rho_m2: float
    rho_m1: float
    mu0: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class SigmaInvariants:
    sigma1: float
    sigma2: float
    sigma3: float
    variant_tag: str

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def rho_invariants(jet: Jet2, alpha: float) -> Invariants:
    """
    ρ₀ = L_α/(2α), ρ₁ = L_β/2, ρ₋₂ = (αL_αα − L_α)/(4α³), ρ₋₁ = L_αβ/(4α), μ₀ = L_ββ/4

    Args:
        jet: Second-order jet of any family at (α, β)
        alpha: α > 0
    """
    return Invariants(
        rho0=jet.L_alpha / (2 * alpha),
        rho1=jet.L_beta / 2,
        rho_m2=(alpha * jet.L_alphaalpha - jet.L_alpha) / (4 * alpha ** 3),
        rho_m1=jet.L_alphabeta / (4 * alpha),
        mu0=jet.L_betabeta / 4,
    )


def closed_form_invariants(alpha: float, beta: float) -> Invariants:
    """Printed closed forms of the infinite-series invariants"""
    d = beta - alpha
    if abs(d) <= 1e-9 * max(1.0, abs(alpha), abs(beta)):
        raise PoleAtAlphaEqualsBeta(f"Pole at α = β (α={alpha:.6g}, β={beta:.6g})")
    return Invariants(
        rho0=beta ** 4 / (alpha * d ** 3),
        rho1=beta ** 3 * (beta - 2 * alpha) / d ** 3,
        rho_m2=beta ** 4 * (4 * alpha - beta) / (2 * alpha ** 3 * d ** 4),
        rho_m1=beta ** 3 * (beta - 4 * alpha) / (2 * alpha * d ** 4),
        mu0=beta ** 2 * (beta ** 2 - 4 * alpha * beta + 6 * alpha ** 2) / (2 * d ** 4),
    )


def sigma_from_invariants(inv: Invariants) -> SigmaInvariants:
    """
    Derived σ for any family from its ρ-values

    Raises:
        SigmaUndefined: when ρ₀ or ρ₁ vanishes (relative to the invariant sizes)
    """
    size = max(abs(inv.rho0), abs(inv.rho1), abs(inv.rho_m2), abs(inv.mu0), 1e-300)
    if abs(inv.rho0) <= SIGMA_RTOL * size or abs(inv.rho1) <= SIGMA_RTOL * size:
        raise SigmaUndefined(
            "σ₃ = ρ₋₁/(ρ₀²ρ₁) is undefined where ρ₀ or ρ₁ vanishes",
            {"rho0": inv.rho0, "rho1": inv.rho1},
        )
    sigma3 = inv.rho_m1 / (inv.rho0 ** 2 * inv.rho1)
    sigma1 = sigma3 * inv.rho0 ** 2 - inv.rho_m2 / inv.rho0
    sigma2 = inv.mu0 / inv.rho0 - sigma3 * inv.rho1 ** 2
    return SigmaInvariants(sigma1, sigma2, sigma3, DERIVED)


def sigma_invariants(alpha: float, beta: float, variant: str = DERIVED) -> SigmaInvariants:
    """
    σ₁, σ₂, σ₃ of the infinite-series metric

    The derived variant follows from matching the ρ-form and σ-form of g_ij; the
    literal variant returns the printed formulas as they stand.

    Raises:
        PoleAtAlphaEqualsBeta: on α = β
        SigmaUndefined: on β = 2α or β = 0
    """
    scale = max(1.0, abs(alpha), abs(beta))
    if abs(beta - alpha) <= 1e-9 * scale:
        raise PoleAtAlphaEqualsBeta(f"Pole at α = β (α={alpha:.6g}, β={beta:.6g})")
    if abs(beta - 2 * alpha) <= SIGMA_RTOL * scale or abs(beta) <= SIGMA_RTOL * scale:
        raise SigmaUndefined(
            f"σ is undefined at α={alpha:.6g}, β={beta:.6g} (β = 2α or β = 0)",
            {"alpha": alpha, "beta": beta},
        )

    if variant == LITERAL:
        d = beta - alpha
        return SigmaInvariants(
            sigma1=d ** 5 * (beta - 4 * alpha) / (2 * alpha ** 2 * (beta - 2 * alpha)),
            sigma2=-alpha ** 3 / (beta ** 2 * d),
            sigma3=alpha * d ** 5 * (beta - 4 * alpha) / (2 * beta ** 8 * (beta - 2 * alpha)),
            variant_tag=LITERAL,
        )
    if variant != DERIVED:
        raise ValueError(f"Unknown σ variant: {variant}")
    return sigma_from_invariants(rho_invariants(jet_infinite_series(alpha, beta), alpha))
