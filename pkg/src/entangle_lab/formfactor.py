"""Formfactor catalog and the half-line oscillatory transform.

The transform evaluated here is

    I(alpha) = int_0^inf f(x) exp(-i alpha x) dx

for a real, nonnegative formfactor ``f``.  The step cutoff has a closed form;
every kind can be integrated by adaptive Gauss-Legendre panels whose length
never exceeds a quarter of the oscillation half-period.

Note on the step profile: it is implemented as ``f(x) = 1`` on ``[0, A]``.
That is the profile whose transform is ``i (exp(-i alpha A) - 1) / alpha``.
Writing the same cutoff as ``theta(x - A)`` (the reversed step) would give a
divergent transform, so the closed form is taken as the definition.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .quadrature import adaptive_panels, oscillation_panel

__all__ = [
    "StepCutoff",
    "Gaussian",
    "CompactBump",
    "Formfactor",
    "QuadratureSpec",
    "TransformMethod",
    "TransformValue",
    "evaluate_formfactor",
    "transform_closed_form",
    "transform_quadrature",
    "transform",
    "total_mass",
    "integration_limits",
    "formfactor_from_name",
]

# |alpha * A| below which the step closed form switches to its Taylor series
SERIES_SWITCH = 1e-6



@dataclass(frozen=True)
class StepCutoff:
    """``f(x) = 1`` for ``0 <= x <= cutoff``, else 0."""

    cutoff: float
    name = "step"

    def __post_init__(self):
        if not self.cutoff > 0:
            raise ValueError(f"cutoff must be positive, got {self.cutoff}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= 0.0) & (x <= self.cutoff), 1.0, 0.0)


@dataclass(frozen=True)
class Gaussian:
    """``f(x) = exp(-x**2 / width)``."""

    width: float
    name = "gaussian"

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-(x * x) / self.width)


@dataclass(frozen=True)
class CompactBump:
    """Unnormalized smooth bump ``exp(-1/((x-lo)(hi-x)))`` on ``(lo, hi)``.

    The bump and all of its derivatives vanish at both ends of the support.
    """

    lo: float
    hi: float
    name = "bump"

    def __post_init__(self):
        if not (0.0 < self.lo < self.hi):
            raise ValueError(f"need 0 < lo < hi, got ({self.lo}, {self.hi})")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > self.lo) & (x < self.hi)
        gap = np.where(inside, (x - self.lo) * (self.hi - x), 1.0)
        return np.where(inside, np.exp(-1.0 / gap), 0.0)


Formfactor = Union[StepCutoff, Gaussian, CompactBump]


def formfactor_from_name(name: str, *, cutoff: float = 1.0, width: float = 1.0,
                         support: tuple[float, float] = (0.5, 2.0)) -> Formfactor:
    if name == "step":
        return StepCutoff(cutoff)
    if name == "gaussian":
        return Gaussian(width)
    if name == "bump":
        return CompactBump(*support)
    raise ValueError(f"unknown formfactor {name!r}")


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_panels: int = 1 << 20
    truncation_epsilon: float = 1e-16

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.truncation_epsilon < 1:
            raise ValueError("truncation_epsilon must lie in (0, 1)")
        if self.max_panels < 1:
            raise ValueError("max_panels must be >= 1")


class TransformMethod(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class TransformValue:
    value: complex
    est_error: float
    method: TransformMethod


def evaluate_formfactor(f: Formfactor, x: float) -> float:
    if x < 0:
        raise ValueError(f"formfactor is defined for x >= 0, got {x}")
    return float(f(x))


def integration_limits(f: Formfactor, spec: QuadratureSpec) -> tuple[float, float]:
    """Finite interval carrying the formfactor, up to ``spec.truncation_epsilon``."""
    if isinstance(f, StepCutoff):
        return 0.0, f.cutoff
    if isinstance(f, Gaussian):
        return 0.0, math.sqrt(f.width * math.log(1.0 / spec.truncation_epsilon))
    if isinstance(f, CompactBump):
        return f.lo, f.hi
    raise TypeError(f"not a formfactor: {f!r}")


def total_mass(f: Formfactor, spec: QuadratureSpec | None = None) -> float:
    """``int_0^inf f(x) dx``, which bounds ``|I(alpha)|`` for every alpha."""
    if isinstance(f, StepCutoff):
        return f.cutoff
    if isinstance(f, Gaussian):
        return 0.5 * math.sqrt(math.pi * f.width)
    return transform_quadrature(f, 0.0, spec or QuadratureSpec()).value.real


def transform_closed_form(f: Formfactor, alpha: float) -> TransformValue | None:
    if not isinstance(f, StepCutoff):
        return None
    A = f.cutoff
    z = alpha * A
    if abs(z) < SERIES_SWITCH:
        # A * (1 - i z/2 - z^2/6)
        value = A * complex(1.0 - z * z / 6.0, -0.5 * z)
    else:
        # exp(-iz) - 1 = -2 sin^2(z/2) - i sin z, free of cancellation near z = 0
        half = math.sin(0.5 * z)
        value = complex(math.sin(z), -2.0 * half * half) / alpha
    return TransformValue(value, 0.0, TransformMethod.CLOSED_FORM)


def transform_quadrature(f: Formfactor, alpha: float, spec: QuadratureSpec) -> TransformValue:
    lo, hi = integration_limits(f, spec)

    def integrand(x):
        return f(x) * np.exp(-1j * alpha * x)

    value, err = adaptive_panels(integrand, lo, hi, oscillation_panel(alpha),
                                 spec.rel_tol, spec.abs_tol, spec.max_panels)
    return TransformValue(complex(value), err, TransformMethod.QUADRATURE)


def transform(f: Formfactor, alpha: float, spec: QuadratureSpec) -> TransformValue:
    """Best available transform: closed form when registered, quadrature otherwise."""
    closed = transform_closed_form(f, alpha)
    if closed is not None:
        return closed
    return transform_quadrature(f, alpha, spec)
