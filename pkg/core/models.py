"""
Data models for sphere-moments.

Uses dataclasses for the spectral fields, operators, perturbation models and
study reports that flow between the core modules. Coefficients of real
spherical harmonics are stored flat, with (l, m) at index l*l + l + m.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from core.errors import DomainError, UnsupportedModelError, UsageError


class OperatorKind(Enum):
    """Boundary operators diagonalised by spherical harmonics on the unit sphere."""
    V = "V"
    K = "K"
    KPRIME = "Kprime"
    D = "D"
    S_MINUS = "S_minus"
    S_PLUS = "S_plus"
    JUMP_ALPHA_S = "JumpAlphaS"


class Side(Enum):
    """Subdomain relative to the reference interface."""
    INTERIOR = "interior"
    EXTERIOR = "exterior"


class MomentQuantity(Enum):
    """Quantity compared in a linearization study."""
    MEAN = "mean"
    COVARIANCE = "covariance"
    RAW_SECOND_MOMENT = "raw_second_moment"


class StudyKind(Enum):
    LINEARIZATION = "linearization"
    CONVERGENCE = "convergence"


class Benchmark(Enum):
    EXAMPLE1 = "example1"
    EXAMPLE2 = "example2"


def harmonic_count(band_limit: int) -> int:
    """Number of real harmonics with degree <= band_limit."""
    return (band_limit + 1) ** 2


def flat_index(degree: int, order: int) -> int:
    return degree * degree + degree + order


def degree_array(band_limit: int) -> np.ndarray:
    """Degree l of every flat coefficient slot up to band_limit."""
    return np.concatenate([np.full(2 * l + 1, l, dtype=int) for l in range(band_limit + 1)])


def order_array(band_limit: int) -> np.ndarray:
    """Order m of every flat coefficient slot up to band_limit."""
    return np.concatenate([np.arange(-l, l + 1, dtype=int) for l in range(band_limit + 1)])


@dataclass(frozen=True)
class HarmonicIndex:
    """Degree/order pair (l, m) of a real spherical harmonic."""
    degree: int
    order: int

    def __post_init__(self):
        if self.degree < 0 or abs(self.order) > self.degree:
            raise DomainError(f"Invalid harmonic index (l={self.degree}, m={self.order})")

    @property
    def flat(self) -> int:
        return flat_index(self.degree, self.order)


@dataclass
class SpectralField:
    """A band-limited function on the unit sphere given by its real harmonic coefficients."""
    band_limit: int
    coefficients: np.ndarray

    def __post_init__(self):
        if self.band_limit < 0:
            raise UsageError(f"Band limit must be nonnegative, got {self.band_limit}")
        self.coefficients = np.array(self.coefficients, dtype=float).reshape(-1)
        expected = harmonic_count(self.band_limit)
        if self.coefficients.size != expected:
            raise UsageError(
                f"Band limit {self.band_limit} needs {expected} coefficients, "
                f"got {self.coefficients.size}"
            )

    @classmethod
    def zeros(cls, band_limit: int) -> "SpectralField":
        return cls(band_limit, np.zeros(harmonic_count(band_limit)))

    @classmethod
    def unit(cls, band_limit: int, degree: int, order: int) -> "SpectralField":
        """Field equal to the single harmonic Y_{degree,order}."""
        result = cls.zeros(band_limit)
        result.coefficients[HarmonicIndex(degree, order).flat] = 1.0
        return result

    @classmethod
    def constant(cls, band_limit: int, value: float) -> "SpectralField":
        """Field equal to `value` everywhere (Y_00 = 1/sqrt(4 pi))."""
        result = cls.zeros(band_limit)
        result.coefficients[0] = value * np.sqrt(4.0 * np.pi)
        return result

    def __getitem__(self, index: Tuple[int, int]) -> float:
        degree, order = index
        return float(self.coefficients[HarmonicIndex(degree, order).flat])

    @property
    def degrees(self) -> np.ndarray:
        return degree_array(self.band_limit)

    def with_band_limit(self, band_limit: int) -> "SpectralField":
        """Truncate or zero-pad to a new band limit."""
        result = SpectralField.zeros(band_limit)
        n = min(result.coefficients.size, self.coefficients.size)
        result.coefficients[:n] = self.coefficients[:n]
        return result

    def _aligned(self, other: "SpectralField") -> Tuple[np.ndarray, np.ndarray, int]:
        band_limit = max(self.band_limit, other.band_limit)
        return (
            self.with_band_limit(band_limit).coefficients,
            other.with_band_limit(band_limit).coefficients,
            band_limit,
        )

    def __add__(self, other: "SpectralField") -> "SpectralField":
        a, b, band_limit = self._aligned(other)
        return SpectralField(band_limit, a + b)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        a, b, band_limit = self._aligned(other)
        return SpectralField(band_limit, a - b)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.band_limit, self.coefficients * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.band_limit, -self.coefficients)


@dataclass
class QuadratureGrid:
    """
    Gauss-Legendre nodes in cos(theta) times uniform nodes in phi.

    Nodes are ordered polar-major: node (j, k) sits at flat position
    j * azimuthal_count + k. Weights are in steradians and sum to 4 pi.
    """
    band_limit: int
    cos_theta: np.ndarray
    polar_weights: np.ndarray
    azimuthal_count: int
    theta: np.ndarray = field(init=False, repr=False)
    phi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.cos_theta = np.asarray(self.cos_theta, dtype=float)
        self.polar_weights = np.asarray(self.polar_weights, dtype=float)
        self.theta = np.arccos(self.cos_theta)
        self.phi = 2.0 * np.pi * np.arange(self.azimuthal_count) / self.azimuthal_count

    @property
    def polar_count(self) -> int:
        return self.cos_theta.size

    @property
    def node_count(self) -> int:
        return self.polar_count * self.azimuthal_count

    @property
    def exactness(self) -> int:
        """Highest total degree integrated exactly."""
        return min(2 * self.polar_count - 1, self.azimuthal_count - 1)

    @property
    def azimuthal_weight(self) -> float:
        return 2.0 * np.pi / self.azimuthal_count

    @property
    def weights(self) -> np.ndarray:
        return np.repeat(self.polar_weights * self.azimuthal_weight, self.azimuthal_count)

    @property
    def points(self) -> np.ndarray:
        sin_theta = np.sqrt(1.0 - self.cos_theta ** 2)
        x = np.outer(sin_theta, np.cos(self.phi))
        y = np.outer(sin_theta, np.sin(self.phi))
        z = np.outer(self.cos_theta, np.ones(self.azimuthal_count))
        return np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)

    def frame(self) -> Tuple[np.ndarray, np.ndarray]:
        """Unit vectors e_theta and e_phi at every node, shape (N, 3) each."""
        ct = np.repeat(self.cos_theta, self.azimuthal_count)
        st = np.sqrt(1.0 - ct ** 2)
        phi = np.tile(self.phi, self.polar_count)
        e_theta = np.stack([ct * np.cos(phi), ct * np.sin(phi), -st], axis=1)
        e_phi = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], axis=1)
        return e_theta, e_phi


@dataclass
class TangentField:
    """Tangent vectors sampled at the nodes of a quadrature grid."""
    grid: QuadratureGrid
    vectors: np.ndarray

    def __post_init__(self):
        self.vectors = np.array(self.vectors, dtype=float)
        if self.vectors.shape != (self.grid.node_count, 3):
            raise UsageError(
                f"Tangent field needs shape ({self.grid.node_count}, 3), got {self.vectors.shape}"
            )
        normal_part = np.abs(np.sum(self.vectors * self.grid.points, axis=1))
        magnitude = np.linalg.norm(self.vectors, axis=1)
        if np.any(normal_part > 1e-10 * magnitude + 1e-300):
            raise DomainError("Tangent field has a normal component")

    @classmethod
    def zeros(cls, grid: QuadratureGrid) -> "TangentField":
        return cls(grid, np.zeros((grid.node_count, 3)))

    def components(self) -> Tuple[np.ndarray, np.ndarray]:
        """Components along e_theta and e_phi, each reshaped to (polar, azimuthal)."""
        e_theta, e_phi = self.grid.frame()
        shape = (self.grid.polar_count, self.grid.azimuthal_count)
        f_theta = np.sum(self.vectors * e_theta, axis=1).reshape(shape)
        f_phi = np.sum(self.vectors * e_phi, axis=1).reshape(shape)
        return f_theta, f_phi

    def scaled(self, values: np.ndarray) -> "TangentField":
        """Pointwise product with a scalar field sampled on the same grid."""
        return TangentField(self.grid, self.vectors * np.asarray(values, dtype=float)[:, None])


@dataclass(frozen=True)
class TransmissionCoefficients:
    """Piecewise-constant diffusivity: alpha_minus inside, alpha_plus outside."""
    alpha_minus: float
    alpha_plus: float

    def __post_init__(self):
        if not (self.alpha_minus > 0 and self.alpha_plus > 0):
            raise DomainError(
                f"Diffusivities must be positive, got ({self.alpha_minus}, {self.alpha_plus})"
            )

    @property
    def jump(self) -> float:
        """[[alpha]] = alpha_minus - alpha_plus."""
        return self.alpha_minus - self.alpha_plus


@dataclass(frozen=True)
class BoundaryOperator:
    """Operator acting diagonally on harmonic coefficients with degree-only eigenvalues."""
    kind: OperatorKind
    eigenvalue: Callable[[np.ndarray], np.ndarray]


@dataclass
class NominalTraceData:
    """Jumps of the nominal solution across the reference sphere."""
    jump_normal_derivative: SpectralField
    jump_tangential_gradient: TangentField

    def __post_init__(self):
        if self.grid.exactness < 2 * self.band_limit:
            raise UsageError(
                f"Grid exactness {self.grid.exactness} is below 2L = {2 * self.band_limit}"
            )

    @property
    def grid(self) -> QuadratureGrid:
        return self.jump_tangential_gradient.grid

    @property
    def band_limit(self) -> int:
        return self.jump_normal_derivative.band_limit


@dataclass
class ShapeDerivativeTrace:
    """Boundary traces of the shape derivative and the jump data that produced them."""
    trace_plus: SpectralField
    trace_minus: SpectralField
    g_dirichlet: SpectralField
    g_neumann: SpectralField


@dataclass(frozen=True)
class HyperbolicCross:
    """Degree tuples (l_1, ..., l_k) with prod(1 + l_i) <= 1 + order."""
    order: int
    legs: int
    degree_tuples: Tuple[Tuple[int, ...], ...]

    def contains(self, degrees: Tuple[int, ...]) -> bool:
        if len(degrees) != self.legs or min(degrees) < 0:
            return False
        return int(np.prod([1 + l for l in degrees])) <= 1 + self.order


@dataclass
class TensorSpectralField:
    """
    Coefficients of a k-leg tensor of real harmonics on a hyperbolic cross.

    `indices` holds the flat harmonic index of every leg, one row per stored
    entry; `sides` records which trace each leg represents, when known.
    """
    cross: HyperbolicCross
    indices: np.ndarray
    values: np.ndarray
    sides: Optional[Tuple[Side, ...]] = None

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=int).reshape(-1, self.cross.legs)
        self.values = np.array(self.values, dtype=float).reshape(-1)
        if self.values.size != self.indices.shape[0]:
            raise UsageError("Tensor values and index rows differ in length")

    @property
    def legs(self) -> int:
        return self.cross.legs

    @property
    def coefficients(self) -> Dict[Tuple[Tuple[int, int], ...], float]:
        degrees = np.floor(np.sqrt(self.indices)).astype(int)
        orders = self.indices - degrees * degrees - degrees
        return {
            tuple((int(l), int(m)) for l, m in zip(row_l, row_m)): float(v)
            for row_l, row_m, v in zip(degrees, orders, self.values)
        }

    def with_values(self, values: np.ndarray) -> "TensorSpectralField":
        return TensorSpectralField(self.cross, self.indices, values, self.sides)


@dataclass
class PerturbationModel:
    """
    Separable random perturbation kappa(x, w) = sum_j a_j(w) phi_j(x).

    Cov[kappa](x, y) = sum_j sigma_j phi_j(x) phi_j(y). A single-mode model
    may also carry raw amplitude moments E[a^n]. A model holding only a
    covariance kernel is non-separable.
    """
    modes: List[Tuple[float, SpectralField]] = field(default_factory=list)
    amplitude_moments: Dict[int, float] = field(default_factory=dict)
    kernel: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if abs(self.amplitude_moments.get(1, 0.0)) > 1e-14:
            raise DomainError("Perturbation amplitude must be centered (E[a] = 0)")
        for sigma, _ in self.modes:
            if sigma < 0:
                raise DomainError(f"Mode weight must be nonnegative, got {sigma}")

    @classmethod
    def uniform_single_mode(cls, phi: SpectralField, max_moment: int = 12) -> "PerturbationModel":
        """kappa = a(w) phi with a uniform on [-1, 1]: E[a^n] = 1/(n+1) for even n, else 0."""
        moments = {n: (1.0 / (n + 1) if n % 2 == 0 else 0.0) for n in range(1, max_moment + 1)}
        return cls(modes=[(moments[2], phi)], amplitude_moments=moments)

    @property
    def is_separable(self) -> bool:
        return self.kernel is None

    @property
    def is_single_mode(self) -> bool:
        return len(self.modes) == 1

    def amplitude_moment(self, n: int) -> float:
        if not self.is_single_mode:
            raise UnsupportedModelError("Amplitude moments are only defined for single-mode models")
        if n == 2 and 2 not in self.amplitude_moments:
            return self.modes[0][0]
        if n not in self.amplitude_moments:
            raise UnsupportedModelError(f"Model carries no amplitude moment of order {n}")
        return self.amplitude_moments[n]


@dataclass(frozen=True)
class Example1Config:
    """Radially symmetric benchmark with interface radius R = 1 + epsilon * a."""
    tc: TransmissionCoefficients
    epsilon: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")


@dataclass
class MomentEstimate:
    """Per-point moments of a sampled solution; standard errors are set for Monte Carlo."""
    order: int
    raw: np.ndarray
    mean: np.ndarray
    central: np.ndarray
    raw_se: Optional[np.ndarray] = None
    mean_se: Optional[np.ndarray] = None
    central_se: Optional[np.ndarray] = None


@dataclass
class StudyRow:
    parameter: float
    error: float
    reference: float


@dataclass
class StudyReport:
    """Errors against a study parameter and the least-squares log-log fit."""
    rows: List[StudyRow] = field(default_factory=list)
    slope: float = 0.0
    intercept: float = 0.0
    r_squared: float = 0.0
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def rate(self) -> float:
        """Algebraic convergence rate, i.e. the negated slope."""
        return -self.slope

    @property
    def errors(self) -> List[float]:
        return [row.error for row in self.rows]


BENCHMARK_POINTS: List[Tuple[float, float, float]] = [
    (0.0, 0.0, 0.2),
    (0.0, 0.0, 0.5),
    (0.0, 0.0, 5.0),
]


@dataclass
class RunConfig:
    """Resolved run configuration. Defaults are the radial benchmark at its three standard evaluation points."""
    benchmark: str = "example1"
    alpha_minus: float = 2.0
    alpha_plus: float = 1.0
    epsilon: float = 0.1
    band_limit: int = 16
    cross_order: int = 8
    moment_order: int = 2
    evaluation_points: List[Tuple[float, float, float]] = field(
        default_factory=lambda: list(BENCHMARK_POINTS)
    )
    epsilons: List[float] = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    p_list: List[int] = field(default_factory=lambda: [4, 8, 16, 32])
    reference_p: int = 64
    seed: int = 12345
    mc_samples: int = 100000
    quadrature_nodes: int = 64
    study: str = "linearization"
    quantity: str = "covariance"
    kappa: Dict[str, object] = field(default_factory=dict)
    output_path: Optional[str] = None

    @property
    def tc(self) -> TransmissionCoefficients:
        return TransmissionCoefficients(self.alpha_minus, self.alpha_plus)
