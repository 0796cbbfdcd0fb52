"""Spin correlations, the CHSH combination and the spatial weight of localized detection.

For a state that factorizes into a singlet spin part and a spatial part,
detection restricted to regions O1, O2 multiplies the spin correlation
``-a.b`` by ``g(O1, O2)``, the probability that the pair is found in
``O1 x O2``.  The largest CHSH value then becomes ``g * 2 sqrt(2)``, which
exceeds the classical bound 2 only when ``g > 1/sqrt(2)``.

The spatial wave functions are two Gaussian families chosen here because
their normalization and marginals are analytic: a product of two isotropic
packets, and a correlated packet in center-of-mass/relative coordinates.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import BudgetTooSmall, NonHermitianResult
from .quadrature import adaptive_panels

__all__ = [
    "UnitVector3",
    "SingletSystem",
    "Region",
    "AllSpace",
    "ALL_SPACE",
    "ProductPackets",
    "CorrelatedPackets",
    "WavePacketPair",
    "SeparableState",
    "GMethod",
    "GFactorResult",
    "ThresholdVerdict",
    "VIOLATION_THRESHOLD",
    "spin_correlation",
    "singlet_oracle",
    "chsh",
    "canonical_settings",
    "lhv_baseline",
    "lhv_standard_error",
    "g_factor",
    "localized_correlation",
    "violation_threshold",
]

VIOLATION_THRESHOLD = 1.0 / math.sqrt(2.0)
_NORM_TOL = 1e-12


@dataclass(frozen=True)
class UnitVector3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        norm_sq = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(norm_sq - 1.0) > _NORM_TOL:
            raise ValueError(f"not a unit vector: |v|^2 = {norm_sq!r}")

    @classmethod
    def normalized(cls, v) -> "UnitVector3":
        v = np.asarray(v, dtype=float)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        x, y, z = v / n
        return cls(float(x), float(y), float(z))

    @classmethod
    def in_xz_plane(cls, degrees: float) -> "UnitVector3":
        """Unit vector at ``degrees`` from the z axis towards the x axis."""
        theta = math.radians(degrees)
        return cls(math.sin(theta), 0.0, math.cos(theta))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other: "UnitVector3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z


def _default_pauli():
    return (
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]], dtype=complex),
        np.array([[1, 0], [0, -1]], dtype=complex),
    )


def _default_singlet():
    # basis |00>, |01>, |10>, |11>
    return np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True)
class SingletSystem:
    """Pauli triple and the two-qubit singlet ``(|01> - |10>)/sqrt(2)``."""

    pauli: tuple = field(default_factory=_default_pauli)
    state: np.ndarray = field(default_factory=_default_singlet)

    def check(self, atol: float = 1e-12) -> None:
        eye = np.eye(2)
        for s in self.pauli:
            if not np.allclose(s, s.conj().T, atol=atol):
                raise ValueError("Pauli matrix is not Hermitian")
            if abs(np.trace(s)) > atol:
                raise ValueError("Pauli matrix is not traceless")
            if not np.allclose(s @ s, eye, atol=atol):
                raise ValueError("Pauli matrix does not square to identity")
        if abs(np.linalg.norm(self.state) - 1.0) > atol:
            raise ValueError("state is not normalized")
        swapped = self.state.reshape(2, 2).T.ravel()
        if not np.allclose(swapped, -self.state, atol=atol):
            raise ValueError("state is not antisymmetric under qubit exchange")

    def sigma_dot(self, n: UnitVector3) -> np.ndarray:
        s1, s2, s3 = self.pauli
        return n.x * s1 + n.y * s2 + n.z * s3


def spin_correlation(a: UnitVector3, b: UnitVector3) -> float:
    """Singlet spin correlation ``-a.b``."""
    return -a.dot(b)


def singlet_oracle(sys: SingletSystem, a: UnitVector3, b: UnitVector3) -> float:
    """``<psi|(sigma.a) x (sigma.b)|psi>`` by explicit 4x4 construction."""
    op = np.kron(sys.sigma_dot(a), sys.sigma_dot(b))
    value = np.vdot(sys.state, op @ sys.state)
    if abs(value.imag) > 1e-12:
        raise NonHermitianResult(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


Correlation = Callable[[UnitVector3, UnitVector3], float]


def chsh(a: UnitVector3, a2: UnitVector3, b: UnitVector3, b2: UnitVector3,
         correlation: Correlation = spin_correlation) -> float:
    """``E(a,b) - E(a,b') + E(a',b) + E(a',b')``."""
    return correlation(a, b) - correlation(a, b2) + correlation(a2, b) + correlation(a2, b2)


def canonical_settings() -> tuple[UnitVector3, UnitVector3, UnitVector3, UnitVector3]:
    """Coplanar settings at 0, 90, 45 and 135 degrees, where ``|S| = 2 sqrt(2)``."""
    return tuple(UnitVector3.in_xz_plane(d) for d in (0.0, 90.0, 45.0, 135.0))


def lhv_baseline(a: UnitVector3, b: UnitVector3, samples: int, seed: int) -> float:
    """Monte Carlo correlation of a local model: outcomes ``sign(l.a)`` and ``-sign(l.b)``.

    The hidden variable ``l`` is uniform on the unit sphere.  The exact value
    is ``2*theta/pi - 1`` for the angle ``theta`` between the settings.  The
    same seed draws the same ``l`` sequence, so the four terms of a CHSH
    combination evaluated with one seed share their hidden variables.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    lam = rng.standard_normal((samples, 3))
    # normalization does not change the signs
    alice = np.sign(lam @ a.as_array())
    bob = -np.sign(lam @ b.as_array())
    return float(np.mean(alice * bob))


def lhv_standard_error(estimate: float, samples: int) -> float:
    """Standard error of a mean of +-1 outcomes with the given sample mean."""
    return math.sqrt(max(0.0, 1.0 - estimate * estimate) / samples)


@dataclass(frozen=True)
class Region:
    """Axis-aligned box ``lo <= x <= hi``."""

    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def __post_init__(self):
        if len(self.lo) != 3 or len(self.hi) != 3:
            raise ValueError("box corners need 3 coordinates")
        if any(l > h for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"need lo <= hi componentwise, got {self.lo} > {self.hi}")
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))

    @classmethod
    def cube(cls, center, half_width: float) -> "Region":
        c = [float(v) for v in center]
        return cls(tuple(v - half_width for v in c), tuple(v + half_width for v in c))

    @property
    def volume(self) -> float:
        return math.prod(h - l for l, h in zip(self.lo, self.hi))

    def contains_region(self, other: "Region") -> bool:
        return all(l <= ol and oh <= h for l, h, ol, oh in zip(self.lo, self.hi, other.lo, other.hi))


class AllSpace:
    """The whole of R^3."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ALL_SPACE"


ALL_SPACE = AllSpace()
AnyRegion = Union[Region, AllSpace]


def _vec3(v) -> tuple[float, float, float]:
    v = tuple(float(x) for x in v)
    if len(v) != 3:
        raise ValueError("expected 3 coordinates")
    return v


@dataclass(frozen=True)
class ProductPackets:
    """``|phi(r1,r2)|^2 = N(r1; c1, w1^2) N(r2; c2, w2^2)`` with isotropic 3-D normals."""

    center1: tuple[float, float, float] = (0.0, 0.0, 0.0)
    center2: tuple[float, float, float] = (0.0, 0.0, 0.0)
    width1: float = 1.0
    width2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center1", _vec3(self.center1))
        object.__setattr__(self, "center2", _vec3(self.center2))
        if not (self.width1 > 0 and self.width2 > 0):
            raise ValueError("packet widths must be positive")

    def marginals(self):
        return (self.center1, self.width1), (self.center2, self.width2)

    def density(self, r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
        return _normal3(r1, self.center1, self.width1) * _normal3(r2, self.center2, self.width2)


@dataclass(frozen=True)
class CorrelatedPackets:
    """Gaussian in the relative coordinate ``r1 - r2`` (mean ``offset``) times a Gaussian
    in the center of mass ``(r1 + r2)/2`` (mean ``center``).

    The map ``(r1, r2) -> (R, rho)`` has unit Jacobian, so the density is
    normalized whenever both factors are.
    """

    offset: tuple[float, float, float] = (2.0, 0.0, 0.0)
    sigma_rel: float = 1.0
    sigma_cm: float = 1.0
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "offset", _vec3(self.offset))
        object.__setattr__(self, "center", _vec3(self.center))
        if not (self.sigma_rel > 0 and self.sigma_cm > 0):
            raise ValueError("packet widths must be positive")

    def marginals(self):
        # r1 = R + rho/2, r2 = R - rho/2
        width = math.sqrt(self.sigma_cm**2 + 0.25 * self.sigma_rel**2)
        c = np.asarray(self.center)
        d = np.asarray(self.offset)
        return (tuple(c + 0.5 * d), width), (tuple(c - 0.5 * d), width)

    def density(self, r1: np.ndarray, r2: np.ndarray) -> np.ndarray:
        cm = 0.5 * (r1 + r2)
        rel = r1 - r2
        return _normal3(cm, self.center, self.sigma_cm) * _normal3(rel, self.offset, self.sigma_rel)


WavePacketPair = Union[ProductPackets, CorrelatedPackets]


def _normal3(x: np.ndarray, center, width: float) -> np.ndarray:
    d = np.asarray(x, dtype=float) - np.asarray(center, dtype=float)
    return np.exp(-0.5 * np.sum(d * d, axis=-1) / width**2) / (2.0 * math.pi * width**2) ** 1.5


@dataclass(frozen=True)
class SeparableState:
    spin: SingletSystem
    space: WavePacketPair


class GMethod(str, enum.Enum):
    TENSORIZED = "tensorized"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class GFactorResult:
    g: float
    est_error: float
    method: GMethod


def _interval_probability(center: float, width: float, lo: float, hi: float) -> tuple[float, float]:
    """Mass of a 1-D normal on ``[lo, hi]`` by adaptive Gauss-Legendre panels."""
    # beyond 40 widths the density underflows to zero
    lo = max(lo, center - 40.0 * width)
    hi = min(hi, center + 40.0 * width)
    if hi <= lo:
        return 0.0, 0.0
    norm = 1.0 / (width * math.sqrt(2.0 * math.pi))

    def pdf(x):
        u = (x - center) / width
        return norm * np.exp(-0.5 * u * u)

    value, err = adaptive_panels(pdf, lo, hi, 0.5 * width, 1e-13, 1e-15, 1 << 16)
    return float(value), err


def _box_probability(center, width: float, region: AnyRegion) -> tuple[float, float]:
    if region is ALL_SPACE:
        return 1.0, 0.0
    factors = [_interval_probability(c, width, l, h) for c, l, h in zip(center, region.lo, region.hi)]
    return _product_with_error(factors)


def _product_with_error(factors):
    value = math.prod(v for v, _ in factors)
    err = 0.0
    for i, (_, e) in enumerate(factors):
        err += e * math.prod(v for j, (v, _) in enumerate(factors) if j != i)
    return value, err


def _stratified_mc(pair: WavePacketPair, O1: Region, O2: Region, budget: int, seed: int) -> tuple[float, float]:
    """Stratified Monte Carlo of the pair density over the 6-D box ``O1 x O2``.

    Each axis is cut into ``m`` equal strata, with ``m`` as large as possible
    while keeping at least two samples per cell for the variance estimate.
    """
    if budget < 2:
        raise BudgetTooSmall(f"budget {budget} cannot give a variance estimate")
    m = 1
    while (m + 1) ** 6 * 2 <= budget:
        m += 1
    cells = m**6
    per_cell = budget // cells
    lo = np.array(O1.lo + O2.lo)
    hi = np.array(O1.hi + O2.hi)
    step = (hi - lo) / m
    cell_volume = float(np.prod(step))
    idx = np.array(list(itertools.product(range(m), repeat=6)), dtype=float)
    rng = np.random.default_rng(seed)
    u = rng.random((cells, per_cell, 6))
    pts = lo + (idx[:, None, :] + u) * step
    vals = pair.density(pts[..., :3], pts[..., 3:])
    means = vals.mean(axis=1)
    variances = vals.var(axis=1, ddof=1)
    g = cell_volume * float(means.sum())
    se = cell_volume * math.sqrt(float((variances / per_cell).sum()))
    return g, se


def g_factor(pair: WavePacketPair, O1: AnyRegion, O2: AnyRegion, budget: int = 100_000,
             seed: int = 0) -> GFactorResult:
    """Probability that the pair is found in ``O1 x O2``.

    Product packets on boxes factor into six 1-D Gaussian integrals.  For the
    correlated family, an unbounded region integrates out analytically to a
    single-particle marginal; two boxes go to stratified Monte Carlo with
    ``budget`` samples.
    """
    for region in (O1, O2):
        if region is not ALL_SPACE and region.volume == 0.0:
            return GFactorResult(0.0, 0.0, GMethod.TENSORIZED)
    (c1, w1), (c2, w2) = pair.marginals()
    if isinstance(pair, ProductPackets) or O1 is ALL_SPACE or O2 is ALL_SPACE:
        g, err = _product_with_error([_box_probability(c1, w1, O1), _box_probability(c2, w2, O2)])
        return GFactorResult(min(max(g, 0.0), 1.0), err, GMethod.TENSORIZED)
    g, se = _stratified_mc(pair, O1, O2, budget, seed)
    if se > 0.1 * g:
        raise BudgetTooSmall(f"Monte Carlo error {se:.3e} exceeds 10% of g = {g:.3e}; raise the budget")
    return GFactorResult(min(max(g, 0.0), 1.0), se, GMethod.MONTE_CARLO)


def localized_correlation(state: SeparableState, a: UnitVector3, O1: AnyRegion, b: UnitVector3,
                          O2: AnyRegion, budget: int = 100_000, seed: int = 0) -> float:
    return g_factor(state.space, O1, O2, budget, seed).g * spin_correlation(a, b)


@dataclass(frozen=True)
class ThresholdVerdict:
    max_chsh: float
    violated: bool


def violation_threshold(g: float) -> ThresholdVerdict:
    """Largest CHSH value ``g * 2 sqrt(2)`` and whether it strictly exceeds 2."""
    if not 0.0 <= g <= 1.0:
        raise ValueError(f"g must lie in [0, 1], got {g}")
    max_chsh = g * 2.0 * math.sqrt(2.0)
    return ThresholdVerdict(max_chsh, max_chsh > 2.0)
