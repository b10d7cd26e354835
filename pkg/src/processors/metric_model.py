"""
Metric Model Processor
Evaluates α, β, the angular covectors l_i, l_ī and the contraction scalars at a point;
hosts the built-in fixtures and the seeded point samplers
"""

import itertools
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.processors.coeff_expr import FieldTable, Literal, parse
from src.utils.errors import (
    ConfigError,
    DegenerateAlpha,
    DimensionMismatch,
    NoValidPoints,
    SingularBaseMetric,
    SingularMatrix,
    ZeroSection,
)
from src.utils.linalg_core import CMatrix, as_vector, contract, lu_invert

logger = logging.getLogger(__name__)

DEGENERATE_RTOL = 1e-14
FIXTURE_NAMES = ("flat-real", "c3-example", "random-seeded")


@dataclass(frozen=True)
class MetricData:
    """Coefficient fields defining α and β, plus a description of where they came from"""

    n: int
    fields: FieldTable
    name: str = "custom"
    source: Dict[str, Any] = field(default_factory=dict)

    @property
    def non_hermitian(self) -> bool:
        """True when a_ij̄ vanishes identically (the a_ij̄ = 0 case)"""
        return self.fields.mixed_is_zero()

    def evaluate_fields(self, z: Sequence[complex]) -> Tuple[CMatrix, CMatrix, np.ndarray]:
        return self.fields.evaluate(z)


@dataclass(frozen=True)
class EvaluationPoint:
    """A point (z, η) of the holomorphic tangent bundle; conjugates are implied"""

    z: np.ndarray
    eta: np.ndarray

    @classmethod
    def make(cls, z: Sequence[complex], eta: Sequence[complex]) -> "EvaluationPoint":
        zv, ev = as_vector(z), as_vector(eta)
        if zv.size != ev.size:
            raise DimensionMismatch(f"z has {zv.size} coordinates but η has {ev.size}")
        return cls(zv, ev)

    @property
    def n(self) -> int:
        return self.eta.size

    def scaled(self, lam: float) -> "EvaluationPoint":
        return EvaluationPoint.make(self.z, lam * self.eta)

    def to_dict(self) -> Dict[str, List[List[float]]]:
        return {
            "z": [[float(c.real), float(c.imag)] for c in self.z],
            "eta": [[float(c.real), float(c.imag)] for c in self.eta],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvaluationPoint":
        try:
            z = [complex(re, im) for re, im in data["z"]]
            eta = [complex(re, im) for re, im in data["eta"]]
        except (KeyError, TypeError, ValueError):
            raise ConfigError("Witness point must be {'z': [[re, im], ...], 'eta': [[re, im], ...]}")
        return cls.make(z, eta)


@dataclass(frozen=True)
class GroundValues:
    """α, β, the evaluated fields and the angular covectors at one point"""

    alpha: float
    beta: float
    a: CMatrix
    a_mixed: CMatrix
    b: np.ndarray
    l: np.ndarray
    l_bar: np.ndarray
    eta: np.ndarray

    @property
    def n(self) -> int:
        return self.b.size

    @property
    def valid(self) -> bool:
        return is_valid(self.alpha, self.beta)

    def to_dict(self) -> Dict[str, Any]:
        return {"alpha": self.alpha, "beta": self.beta, "alpha_sq": self.alpha ** 2, "valid": self.valid}


@dataclass(frozen=True)
class ContractionScalars:
    """γ, ε, ω, δ and the raised vectors used by the inversion pipeline"""

    gamma: complex
    epsilon: complex
    omega: complex
    delta: complex
    b_up: np.ndarray
    eta_up_check: np.ndarray
    a_inv: CMatrix
    det_a: complex


def is_valid(alpha: float, beta: float) -> bool:
    """Validity region of the infinite-series metric: β > α > 0"""
    return beta > alpha > 0


def alpha_sq_beta(
    a: CMatrix, a_mixed: CMatrix, b: np.ndarray, eta: np.ndarray
) -> Tuple[float, float]:
    """α² = Re{η·a·η + η·a_mixed·η̄}, β = Re{b·η} for already evaluated fields"""
    alpha_sq = (eta @ a.entries @ eta + eta @ a_mixed.entries @ np.conj(eta)).real
    beta = (b @ eta).real
    return float(alpha_sq), float(beta)


def alpha_beta(m: MetricData, p: EvaluationPoint) -> Tuple[float, float]:
    """(α², β) at a point without the covector work"""
    a, a_mixed, b = m.evaluate_fields(p.z)
    return alpha_sq_beta(a, a_mixed, b, p.eta)


def ground_from_fields(
    a: CMatrix, a_mixed: CMatrix, b: np.ndarray, eta: Sequence[complex]
) -> GroundValues:
    """Ground values from fields evaluated at z (z fixed, η free)"""
    ev = np.asarray(eta, dtype=complex)
    norm_sq = float(np.sum(np.abs(ev) ** 2))
    if norm_sq == 0.0:
        raise ZeroSection("η = 0 lies on the excluded zero section")

    alpha_sq, beta = alpha_sq_beta(a, a_mixed, b, ev)
    if alpha_sq <= DEGENERATE_RTOL * norm_sq:
        raise DegenerateAlpha(
            f"α² = {alpha_sq:.6g} is not positive at this point", {"alpha_sq": alpha_sq}
        )

    l = a.entries @ ev + a_mixed.entries @ np.conj(ev)
    return GroundValues(
        alpha=float(np.sqrt(alpha_sq)),
        beta=beta,
        a=a,
        a_mixed=a_mixed,
        b=as_vector(b),
        l=as_vector(l),
        l_bar=as_vector(np.conj(l)),
        eta=as_vector(ev),
    )


def ground_values(m: MetricData, p: EvaluationPoint) -> GroundValues:
    """
    Evaluate α, β, l_i = a_ijη^j + a_ij̄η̄^j and l_ī at a point

    Raises:
        ZeroSection: when η = 0
        DegenerateAlpha: when α² <= 1e-14 · ||η||²
    """
    if p.n != m.n:
        raise DimensionMismatch(f"Point of dimension {p.n} for a metric of dimension {m.n}")
    a, a_mixed, b = m.evaluate_fields(p.z)
    return ground_from_fields(a, a_mixed, b, p.eta)


def contraction_scalars(g: GroundValues) -> ContractionScalars:
    """
    γ = l_kη^k, ε = b_jη^j, b^k = a^{jk}b_j, ω = b_jb^j, δ = l_kb^k

    Raises:
        SingularBaseMetric: when a_ij is singular at z
    """
    try:
        lu = lu_invert(g.a)
    except SingularMatrix as e:
        raise SingularBaseMetric(f"a_ij is singular: {e.message}")

    a_inv = lu.inverse
    b_up = a_inv.apply(g.b)
    return ContractionScalars(
        gamma=contract(g.l, g.eta),
        epsilon=contract(g.b, g.eta),
        omega=contract(g.b, b_up),
        delta=contract(g.l, b_up),
        b_up=b_up,
        eta_up_check=a_inv.apply(g.l),
        a_inv=a_inv,
        det_a=lu.determinant,
    )


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------


def _literal_grid(matrix: np.ndarray):
    return [[Literal(complex(x)) for x in row] for row in matrix]


def flat_real(b: Optional[Sequence[complex]] = None) -> MetricData:
    """a_ij = δ_ij, a_ij̄ = 0, constant real 1-form b (default (2, 0))"""
    one_form = [2.0, 0.0] if b is None else list(b)
    n = len(one_form)
    if n < 1:
        raise ConfigError("flat-real needs a non-empty 1-form")
    fields = FieldTable.build(
        n,
        a_sym=_literal_grid(np.eye(n)),
        b=[Literal(complex(x)) for x in one_form],
    )
    source = {"fixture": "flat-real", "b": [[complex(x).real, complex(x).imag] for x in one_form]}
    return MetricData(n=n, fields=fields, name="flat-real", source=source)


def c3_example() -> MetricData:
    """The ℂ³ example: purely Hermitian α² with exponential weights, β = Re{e^{z²}η²}"""
    diagonal = ["exp(z1+conj(z1))", "exp(z2+conj(z2))", "exp(z1+z2+z3+conj(z3))"]
    mixed = [[parse(diagonal[i]) if i == j else None for j in range(3)] for i in range(3)]
    fields = FieldTable.build(3, a_mixed=mixed, b=[None, parse("exp(z2)"), None])
    return MetricData(n=3, fields=fields, name="c3-example", source={"fixture": "c3-example"})


def random_seeded(seed: int, n: int = 3, b: Optional[Sequence[complex]] = None) -> MetricData:
    """Reproducible a_ij = δ_ij + 0.1·S (S complex symmetric), a_ij̄ = 0, b near (2, 0, ...)"""
    rng = np.random.default_rng(seed)
    if b is not None:
        n = len(b)
    raw = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
    a = np.eye(n) + 0.1 * (raw + raw.T) / 2
    if b is None:
        base = np.zeros(n, dtype=complex)
        base[0] = 2.0
        one_form = base + 0.2 * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n))
    else:
        one_form = np.asarray(b, dtype=complex)
    fields = FieldTable.build(n, a_sym=_literal_grid(a), b=[Literal(complex(x)) for x in one_form])
    source = {"fixture": "random-seeded", "seed": seed, "n": n}
    if b is not None:
        source["b"] = [[complex(x).real, complex(x).imag] for x in b]
    return MetricData(n=n, fields=fields, name="random-seeded", source=source)


def fixture_by_name(name: str, seed: int = 42, b: Optional[Sequence[complex]] = None) -> MetricData:
    """
    Build a named fixture

    Raises:
        ConfigError: for an unknown fixture name
    """
    if name == "flat-real":
        return flat_real(b)
    if name == "c3-example":
        return c3_example()
    if name == "random-seeded":
        return random_seeded(seed, b=b)
    raise ConfigError(f"Unknown fixture '{name}'", {"known": list(FIXTURE_NAMES)})


def load_metric_file(path: str) -> MetricData:
    """
    Load a JSON metric definition {"n", "a_sym", "a_mixed", "b"}

    Raises:
        ConfigError: when the file is missing or not valid JSON
    """
    if not os.path.isfile(path):
        raise ConfigError(f"Metric file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read metric file {path}: {e}")
    fields = FieldTable.from_mapping(data)
    return MetricData(n=fields.n, fields=fields, name=os.path.basename(path), source={"file": path})


def metric_from_source(source: Dict[str, Any]) -> MetricData:
    """Rebuild a metric from the description echoed in reports"""
    if "file" in source:
        return load_metric_file(source["file"])
    b = source.get("b")
    one_form = [complex(re, im) for re, im in b] if b else None
    return fixture_by_name(source.get("fixture", ""), seed=int(source.get("seed", 42)), b=one_form)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_points(
    m: MetricData, count: int, seed: int, box: float = 1.0, z_scale: float = 0.5
) -> List[EvaluationPoint]:
    """Seeded uniform points: Re/Im of η in [-box, box], of z in [-z_scale·box, z_scale·box]"""
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(count):
        zr = z_scale * box * rng.uniform(-1, 1, (2, m.n))
        er = box * rng.uniform(-1, 1, (2, m.n))
        points.append(EvaluationPoint.make(zr[0] + 1j * zr[1], er[0] + 1j * er[1]))
    return points


def margin_predicate(valid_margin: float, sigma_margin: float) -> Callable[[float, float], bool]:
    """β > α(1 + valid_margin) and |β − 2α| > sigma_margin·α"""

    def accept(alpha: float, beta: float) -> bool:
        return beta > alpha * (1 + valid_margin) and abs(beta - 2 * alpha) > sigma_margin * alpha

    return accept


def sample_valid_points(
    m: MetricData,
    count: int,
    seed: int,
    predicate: Optional[Callable[[float, float], bool]] = None,
    box: float = 1.0,
    max_attempts: Optional[int] = None,
) -> List[EvaluationPoint]:
    """
    Rejection-sample points whose (α, β) satisfy the predicate

    Raises:
        NoValidPoints: when no accepted point turns up within the attempt budget
    """
    accept = predicate or margin_predicate(0.05, 0.1)
    budget = max_attempts or max(200, 200 * count)
    rng = np.random.default_rng(seed)
    found: List[EvaluationPoint] = []
    attempts = 0

    while len(found) < count and attempts < budget:
        attempts += 1
        zr = 0.5 * box * rng.uniform(-1, 1, (2, m.n))
        er = box * rng.uniform(-1, 1, (2, m.n))
        point = EvaluationPoint.make(zr[0] + 1j * zr[1], er[0] + 1j * er[1])
        a, a_mixed, b = m.evaluate_fields(point.z)
        alpha_sq, beta = alpha_sq_beta(a, a_mixed, b, point.eta)
        if alpha_sq <= 0:
            continue
        if accept(float(np.sqrt(alpha_sq)), beta):
            found.append(point)

    if not found:
        raise NoValidPoints(
            f"No point of {m.name} passed the validity predicate in {attempts} attempts",
            {"attempts": attempts},
        )
    if len(found) < count:
        logger.warning(f"Only {len(found)} of {count} valid points found for {m.name}")
    logger.debug(f"Sampled {len(found)} valid points for {m.name} in {attempts} attempts")
    return found


def grid_points(m: MetricData, k: int, box: float = 1.0) -> List[EvaluationPoint]:
    """
    Regular grid of k points per axis over the first min(3, 2n) real η axes
    (Re η¹..Re ηⁿ, then Im η¹..Im ηⁿ); other coordinates and z are zero
    """
    axes = min(3, 2 * m.n)
    ticks = np.linspace(-box, box, k)
    points = []
    for values in itertools.product(ticks, repeat=axes):
        real = np.zeros(2 * m.n)
        real[:axes] = values
        eta = real[: m.n] + 1j * real[m.n:]
        points.append(EvaluationPoint.make(np.zeros(m.n), eta))
    return points
