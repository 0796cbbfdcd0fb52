"""Two unbalanced interferometers in front of the detectors.

``coincidence_rate`` is the textbook fringe ``eta1 eta2 R0 cos^2(phi1 - phi2) / 4``.
``model_coincidence`` instead pushes the long/short path superposition
through the driven-field model, where the vacuum expectation factorizes per
detector.  The two need not agree; both are exposed so they can be compared.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyInput
from .field import CoincidenceBase, phi_radial
from .formfactor import Formfactor, QuadratureSpec

__all__ = [
    "FransonSettings",
    "CoincidenceResult",
    "coincidence_rate",
    "superposed_amplitude",
    "model_coincidence",
    "visibility",
    "visibility_allows_violation",
]


@dataclass(frozen=True)
class FransonSettings:
    phi1: float = 0.0
    phi2: float = 0.0
    delta_t: float = 0.0
    eta1: float = 1.0
    eta2: float = 1.0

    def __post_init__(self):
        if self.delta_t < 0:
            raise ValueError(f"delta_t must be nonnegative, got {self.delta_t}")
        for name in ("eta1", "eta2"):
            eta = getattr(self, name)
            if not 0.0 < eta <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {eta}")


@dataclass(frozen=True)
class CoincidenceResult:
    rc: float
    base: CoincidenceBase
    fringe_phase: float


def coincidence_rate(base: CoincidenceBase, s: FransonSettings) -> CoincidenceResult:
    if base.r0 < 0:
        raise ValueError("R0 must be nonnegative")
    dphi = s.phi1 - s.phi2
    rc = s.eta1 * s.eta2 * 0.25 * base.r0 * math.cos(dphi) ** 2
    return CoincidenceResult(rc, base, dphi)


def superposed_amplitude(f: Formfactor, r: float, t: float, delta_t: float, phase: float,
                         spec: QuadratureSpec | None = None) -> complex:
    """``phi(r,t)/2 + exp(i phase) phi(r, t - delta_t)/2``: short plus long arm."""
    short = phi_radial(f, r, t, spec).value
    long_ = short if delta_t == 0 else phi_radial(f, r, t - delta_t, spec).value
    return 0.5 * short + 0.5 * cmath.exp(1j * phase) * long_


def model_coincidence(f: Formfactor, r1: float, r2: float, t: float, s: FransonSettings,
                      spec: QuadratureSpec | None = None) -> float:
    psi1 = superposed_amplitude(f, r1, t, s.delta_t, s.phi1, spec)
    psi2 = superposed_amplitude(f, r2, t, s.delta_t, s.phi2, spec)
    return s.eta1 * s.eta2 * abs(psi1) ** 2 * abs(psi2) ** 2


def visibility(rates: Sequence[tuple[float, float]]) -> float:
    """Fringe contrast ``(max - min) / (max + min)`` of ``(phase, rate)`` samples."""
    if len(rates) < 2:
        raise EmptyInput(f"visibility needs at least 2 samples, got {len(rates)}")
    values = [rate for _, rate in rates]
    if min(values) < 0:
        raise ValueError("rates must be nonnegative")
    hi, lo = max(values), min(values)
    if hi + lo == 0:
        return 0.0
    return (hi - lo) / (hi + lo)


def visibility_allows_violation(v: float) -> bool:
    """Strictly above ``1/sqrt(2)``; at or below it no CHSH violation is possible."""
    return v * 2.0 * math.sqrt(2.0) > 2.0
