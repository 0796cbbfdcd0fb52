"""One-point field amplitude of the driven massless field and the mirror-free coincidence rate.

Units are natural (hbar = c = 1), so ``r`` and ``t`` share one unit and the
dispersion law is ``omega(p) = |p|``.  The amplitude is

    phi(r, t) = int d^3p exp(i p.r) f(|p|)/omega(p) (exp(-i omega(p) t) - 1)

and the coincidence rate without mirrors is ``|phi(r1,t)|^2 |phi(r2,t)|^2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ToleranceNotMet
from .formfactor import Formfactor, QuadratureSpec, integration_limits, transform
from .quadrature import oscillation_panel, tensor_rule

__all__ = [
    "DispersionLaw",
    "FieldMethod",
    "FieldAmplitude",
    "CoincidenceBase",
    "phi_radial",
    "phi_direct3d",
    "r0",
]


class DispersionLaw(str, enum.Enum):
    MASSLESS = "massless"

    def omega(self, p):
        return np.abs(p)


class FieldMethod(str, enum.Enum):
    RADIAL_REDUCTION = "radial_reduction"
    DIRECT_3D = "direct_3d"


@dataclass(frozen=True)
class FieldAmplitude:
    value: complex
    r: float
    t: float
    est_error: float
    method: FieldMethod


@dataclass(frozen=True)
class CoincidenceBase:
    r1: float
    r2: float
    t: float
    r0: float


def _check_radius(r: float) -> None:
    if not r > 0:
        raise ValueError(f"radial distance must be positive, got r={r}")


def phi_radial(f: Formfactor, r: float, t: float, spec: QuadratureSpec | None = None) -> FieldAmplitude:
    """phi(r,t) = (2 pi / (i r)) [I(t-r) - I(t+r) + I(r) - I(-r)]."""
    _check_radius(r)
    spec = spec or QuadratureSpec()
    terms = [transform(f, alpha, spec) for alpha in (t - r, -r, r, t + r)]
    i_tmr, i_mr, i_r, i_tpr = (tv.value for tv in terms)
    # grouped so that t == 0 cancels exactly
    combo = (i_tmr - i_mr) + (i_r - i_tpr)
    value = 2.0 * math.pi / (1j * r) * combo
    err = 2.0 * math.pi / r * sum(tv.est_error for tv in terms)
    return FieldAmplitude(complex(value), r, t, err, FieldMethod.RADIAL_REDUCTION)


def _direct_sum(f: Formfactor, r: float, t: float, p_lo: float, p_hi: float, refine: int, order: int) -> complex:
    # radial panels resolve exp(-i p t) and exp(+-i p r); polar panels resolve exp(i p r mu)
    p_panel = oscillation_panel(abs(r) + abs(t)) / refine
    mu_panel = min(0.5, oscillation_panel(p_hi * r)) / refine
    p, wp = tensor_rule(p_lo, p_hi, p_panel, order)
    mu, wmu = tensor_rule(-1.0, 1.0, mu_panel, order)
    omega = DispersionLaw.MASSLESS.omega(p)
    # p^2 dp from the volume element, divided by omega(p) = p
    radial = wp * p * p * f(p) / omega * (np.exp(-1j * omega * t) - 1.0)
    angular = np.exp(1j * np.outer(p * r, mu)) @ wmu
    return complex(2.0 * math.pi * (radial @ angular))


def phi_direct3d(f: Formfactor, r: float, t: float, spec: QuadratureSpec | None = None) -> FieldAmplitude:
    """phi(r,t) by direct quadrature of the defining 3-D integral.

    The azimuthal integral is done analytically (factor 2 pi); the remaining
    radius x polar-cosine integral uses a composite Gauss-Legendre tensor
    grid, evaluated at two resolutions whose difference is the error estimate.
    This path never touches the half-line transform and serves as an
    independent check on :func:`phi_radial`.
    """
    _check_radius(r)
    spec = spec or QuadratureSpec()
    p_lo, p_hi = integration_limits(f, spec)
    coarse = _direct_sum(f, r, t, p_lo, p_hi, refine=1, order=16)
    fine = _direct_sum(f, r, t, p_lo, p_hi, refine=2, order=20)
    err = abs(fine - coarse)
    tol = max(spec.rel_tol * abs(fine), spec.abs_tol)
    if err > tol:
        raise ToleranceNotMet(f"direct 3-D quadrature error {err:.3e} exceeds tolerance {tol:.3e}")
    return FieldAmplitude(fine, r, t, float(err), FieldMethod.DIRECT_3D)


def r0(f: Formfactor, r1: float, r2: float, t: float, spec: QuadratureSpec | None = None) -> CoincidenceBase:
    a1 = phi_radial(f, r1, t, spec)
    a2 = phi_radial(f, r2, t, spec)
    return CoincidenceBase(r1, r2, t, abs(a1.value) ** 2 * abs(a2.value) ** 2)
