"""
(α, β) Family Processor
Second-order jets of L(α, β) = F² for the infinite-series metric and comparator families
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Optional, Tuple

from src.utils.errors import ConfigError, PoleAtAlphaEqualsBeta, TooCloseToSingularLocus

logger = logging.getLogger(__name__)

POLE_RTOL = 1e-9
FD_RSTEP = 1e-6
FD_RSTEP_SECOND = 1e-4
LOCUS_CLEARANCE = 10.0


@dataclass(frozen=True)
class Jet2:
    """L and its first and second partial derivatives in (α, β)"""

    L: float
    L_alpha: float
    L_beta: float
    L_alphaalpha: float
    L_alphabeta: float
    L_betabeta: float

    def as_tuple(self) -> Tuple[float, ...]:
        return (
            self.L,
            self.L_alpha,
            self.L_beta,
            self.L_alphaalpha,
            self.L_alphabeta,
            self.L_betabeta,
        )

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class FamilyKind:
    """An (α, β)-metric family: L as a function of (α, β) plus its singular locus"""

    name: str
    L: Callable[[float, float], float]
    singular_distance: Callable[[float, float], float]
    singular_locus: str
    analytic_jet: Optional[Callable[[float, float], Jet2]] = None

    def jet(self, alpha: float, beta: float) -> Jet2:
        """Closed-form jet when the family has one, finite differences otherwise"""
        if self.analytic_jet is not None:
            return self.analytic_jet(alpha, beta)
        return jet_fd(self, alpha, beta)


def _scale(alpha: float, beta: float) -> float:
    return max(1.0, abs(alpha), abs(beta))


def _pole_guard(alpha: float, beta: float, gap: float, locus: str):
    if abs(gap) <= POLE_RTOL * _scale(alpha, beta):
        if locus == "alpha=beta":
            raise PoleAtAlphaEqualsBeta(
                f"Pole at α = β (α={alpha:.6g}, β={beta:.6g})", {"alpha": alpha, "beta": beta}
            )
        raise TooCloseToSingularLocus(
            f"Point on the singular locus {locus}", {"alpha": alpha, "beta": beta}
        )


def jet_infinite_series(alpha: float, beta: float) -> Jet2:
    """
    Closed-form jet of L = β⁴/(β−α)²

    Raises:
        PoleAtAlphaEqualsBeta: when |β − α| <= 1e-9 · max(1, α, |β|)
    """
    _pole_guard(alpha, beta, beta - alpha, "alpha=beta")
    d = beta - alpha
    b2, b3, b4 = beta ** 2, beta ** 3, beta ** 4
    return Jet2(
        L=b4 / d ** 2,
        L_alpha=2 * b4 / d ** 3,
        L_beta=2 * b3 * (beta - 2 * alpha) / d ** 3,
        L_alphaalpha=6 * b4 / d ** 4,
        L_alphabeta=2 * b3 * (beta - 4 * alpha) / d ** 4,
        L_betabeta=2 * b2 * (b2 - 4 * alpha * beta + 6 * alpha ** 2) / d ** 4,
    )


def jet_randers(alpha: float, beta: float) -> Jet2:
    s = alpha + beta
    return Jet2(L=s * s, L_alpha=2 * s, L_beta=2 * s, L_alphaalpha=2.0, L_alphabeta=2.0, L_betabeta=2.0)


def jet_kropina(alpha: float, beta: float) -> Jet2:
    _pole_guard(alpha, beta, beta, "beta=0")
    a2, a3, a4 = alpha ** 2, alpha ** 3, alpha ** 4
    return Jet2(
        L=a4 / beta ** 2,
        L_alpha=4 * a3 / beta ** 2,
        L_beta=-2 * a4 / beta ** 3,
        L_alphaalpha=12 * a2 / beta ** 2,
        L_alphabeta=-8 * a3 / beta ** 3,
        L_betabeta=6 * a4 / beta ** 4,
    )


def jet_matsumoto(alpha: float, beta: float) -> Jet2:
    _pole_guard(alpha, beta, alpha - beta, "alpha=beta")
    d = alpha - beta
    a2, a3, a4 = alpha ** 2, alpha ** 3, alpha ** 4
    return Jet2(
        L=a4 / d ** 2,
        L_alpha=2 * a3 * (alpha - 2 * beta) / d ** 3,
        L_beta=2 * a4 / d ** 3,
        L_alphaalpha=2 * a2 * (a2 - 4 * alpha * beta + 6 * beta ** 2) / d ** 4,
        L_alphabeta=2 * a3 * (alpha - 4 * beta) / d ** 4,
        L_betabeta=6 * a4 / d ** 4,
    )


def _series_L(r: int) -> Callable[[float, float], float]:
    def L(alpha: float, beta: float) -> float:
        ratio = alpha / beta
        return (beta * sum(ratio ** k for k in range(r + 1))) ** 2

    return L


INFINITE_SERIES = FamilyKind(
    name="infinite-series",
    L=lambda a, b: b ** 4 / (b - a) ** 2,
    singular_distance=lambda a, b: abs(b - a),
    singular_locus="alpha=beta",
    analytic_jet=jet_infinite_series,
)

RANDERS = FamilyKind(
    name="randers",
    L=lambda a, b: (a + b) ** 2,
    singular_distance=lambda a, b: math.inf,
    singular_locus="none",
    analytic_jet=jet_randers,
)

KROPINA = FamilyKind(
    name="kropina",
    L=lambda a, b: a ** 4 / b ** 2,
    singular_distance=lambda a, b: abs(b),
    singular_locus="beta=0",
    analytic_jet=jet_kropina,
)

MATSUMOTO = FamilyKind(
    name="matsumoto",
    L=lambda a, b: a ** 4 / (a - b) ** 2,
    singular_distance=lambda a, b: abs(a - b),
    singular_locus="alpha=beta",
    analytic_jet=jet_matsumoto,
)

FAMILIES = {f.name: f for f in (INFINITE_SERIES, RANDERS, KROPINA, MATSUMOTO)}


def custom_family(
    name: str,
    L: Callable[[float, float], float],
    singular_distance: Optional[Callable[[float, float], float]] = None,
) -> FamilyKind:
    """Wrap a black-box L(α, β); jets come from finite differences"""
    return FamilyKind(
        name=name,
        L=L,
        singular_distance=singular_distance or (lambda a, b: math.inf),
        singular_locus="custom",
    )


def series_family(r: int) -> FamilyKind:
    """Partial sum L_r = (β Σ_{k=0..r} (α/β)^k)², converging to the infinite series for α < β"""
    if r < 0:
        raise ConfigError("Series order must be >= 0")
    return FamilyKind(
        name=f"series-{r}",
        L=_series_L(r),
        singular_distance=lambda a, b: abs(b),
        singular_locus="beta=0",
    )


def family_by_name(name: str) -> FamilyKind:
    """
    Resolve a CLI family name

    Args:
        name: infinite-series | randers | kropina | matsumoto | series-<r>

    Raises:
        ConfigError: for an unknown name
    """
    key = (name or "infinite-series").strip().lower()
    if key in FAMILIES:
        return FAMILIES[key]
    if key.startswith("series-"):
        try:
            return series_family(int(key.split("-", 1)[1]))
        except ValueError:
            pass
    raise ConfigError(f"Unknown family '{name}'", {"known": sorted(FAMILIES) + ["series-<r>"]})


def jet_fd(kind: FamilyKind, alpha: float, beta: float) -> Jet2:
    """
    Central finite-difference jet of any family

    First derivatives use O(h²) central differences, second derivatives the 3×3
    (9-point) stencil. Steps are relative to min(max(1, α, |β|), distance to the
    singular locus).

    Raises:
        TooCloseToSingularLocus: when the locus is within 10·h, h = 1e-6·max(1, α, |β|)
    """
    scale = _scale(alpha, beta)
    h_guard = FD_RSTEP * scale
    distance = kind.singular_distance(alpha, beta)
    if distance <= LOCUS_CLEARANCE * h_guard:
        raise TooCloseToSingularLocus(
            f"{kind.name}: singular locus {kind.singular_locus} at distance {distance:.3e}",
            {"alpha": alpha, "beta": beta, "family": kind.name},
        )

    local = min(scale, distance)
    h1 = FD_RSTEP * local
    h2 = FD_RSTEP_SECOND * local
    f = kind.L

    f0 = f(alpha, beta)
    L_alpha = (f(alpha + h1, beta) - f(alpha - h1, beta)) / (2 * h1)
    L_beta = (f(alpha, beta + h1) - f(alpha, beta - h1)) / (2 * h1)

    L_aa = (f(alpha + h2, beta) - 2 * f0 + f(alpha - h2, beta)) / h2 ** 2
    L_bb = (f(alpha, beta + h2) - 2 * f0 + f(alpha, beta - h2)) / h2 ** 2
    L_ab = (
        f(alpha + h2, beta + h2)
        - f(alpha + h2, beta - h2)
        - f(alpha - h2, beta + h2)
        + f(alpha - h2, beta - h2)
    ) / (4 * h2 ** 2)

    return Jet2(L=f0, L_alpha=L_alpha, L_beta=L_beta, L_alphaalpha=L_aa, L_alphabeta=L_ab, L_betabeta=L_bb)


def euler_residuals(jet: Jet2, alpha: float, beta: float) -> Tuple[float, float, float, float]:
    """
    Residuals of the four homogeneity relations, normalized by max(1, |2L|)

    αL_α + βL_β = 2L;  αL_αα + βL_αβ = L_α;  αL_αβ + βL_ββ = L_β;
    α²L_αα + 2αβL_αβ + β²L_ββ = 2L
    """
    norm = max(1.0, abs(2 * jet.L))
    r1 = alpha * jet.L_alpha + beta * jet.L_beta - 2 * jet.L
    r2 = alpha * jet.L_alphaalpha + beta * jet.L_alphabeta - jet.L_alpha
    r3 = alpha * jet.L_alphabeta + beta * jet.L_betabeta - jet.L_beta
    r4 = (
        alpha ** 2 * jet.L_alphaalpha
        + 2 * alpha * beta * jet.L_alphabeta
        + beta ** 2 * jet.L_betabeta
        - 2 * jet.L
    )
    return tuple(abs(r) / norm for r in (r1, r2, r3, r4))


def rel_diff(a: float, b: float, floor: float = 1e-300) -> float:
    """|a − b| / max(|a|, |b|, floor)"""
    return abs(a - b) / max(abs(a), abs(b), floor)


def jet_agreement(a: Jet2, b: Jet2) -> float:
    """
    Largest entrywise relative difference between two jets

    Entries are compared relative to their own size, floored at 1e-3 of the
    largest entry so that vanishing derivatives (L_β at β = 2α) stay meaningful.
    """
    floor = max(1e-300, 1e-3 * max(abs(x) for x in a.as_tuple() + b.as_tuple()))
    return max(abs(x - y) / max(abs(x), abs(y), floor) for x, y in zip(a.as_tuple(), b.as_tuple()))
