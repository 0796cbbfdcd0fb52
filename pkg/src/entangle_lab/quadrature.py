"""Composite Gauss-Legendre rules shared by the transform, field and g-factor code."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import ToleranceNotMet

# panel length used when the integrand oscillates slowly
BASE_PANEL = 0.25

_LOW_ORDER = 10
_HIGH_ORDER = 20
# panels whose rule difference is at rounding level are not split further
_ROUNDING_FLOOR = 64 * np.finfo(float).eps


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _panel_rules(func, left: np.ndarray, right: np.ndarray):
    """Low- and high-order Gauss-Legendre sums on each panel."""
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    out = []
    for order in (_LOW_ORDER, _HIGH_ORDER):
        nodes, weights = gauss_legendre(order)
        x = mid[:, None] + half[:, None] * nodes[None, :]
        values = func(x)
        out.append(half * (values @ weights))
    # integral of |func|; sets the rounding floor of each panel sum
    out.append(half * (np.abs(values) @ weights))
    return out


def adaptive_panels(func, lo: float, hi: float, panel_len: float,
                    rel_tol: float, abs_tol: float, max_panels: int) -> tuple[complex, float]:
    """Integrate a vectorized ``func`` over ``[lo, hi]`` by adaptive bisection of panels.

    Each panel is integrated with 10- and 20-point Gauss-Legendre rules; the
    difference bounds the error of the lower rule and is reported as the
    error estimate of the (returned) higher rule.  Panels whose estimate
    exceeds both their length-proportional share of the tolerance and the
    rounding floor of the panel sum are halved.

    Returns ``(integral, est_error)``.  Raises ToleranceNotMet once more than
    ``max_panels`` panels would be needed.
    """
    span = hi - lo
    if span <= 0:
        return 0.0, 0.0
    n = max(1, math.ceil(span / panel_len))
    if n > max_panels:
        raise ToleranceNotMet(f"{n} panels needed to resolve oscillation, max_panels={max_panels}")
    edges = np.linspace(lo, hi, n + 1)
    left, right = edges[:-1], edges[1:]
    accepted_value = 0.0
    accepted_error = 0.0
    n_accepted = 0
    while left.size:
        low, high, magnitude = _panel_rules(func, left, right)
        est = np.abs(high - low)
        tol = max(rel_tol * abs(accepted_value + high.sum()), abs_tol)
        ok = (est <= tol * (right - left) / span) | (est <= _ROUNDING_FLOOR * magnitude)
        accepted_value = accepted_value + high[ok].sum()
        accepted_error += float(est[ok].sum())
        n_accepted += int(ok.sum())
        bad = ~ok
        if not bad.any():
            break
        mid = 0.5 * (left[bad] + right[bad])
        left, right = np.concatenate([left[bad], mid]), np.concatenate([mid, right[bad]])
        if n_accepted + left.size > max_panels or np.any(right - left <= 4 * np.finfo(float).eps * span):
            raise ToleranceNotMet(
                f"error estimate {accepted_error + float(est[bad].sum()):.3e} above tolerance "
                f"{tol:.3e} with {n_accepted + left.size} panels (max_panels={max_panels})")
    if accepted_error > max(rel_tol * abs(accepted_value), abs_tol):
        raise ToleranceNotMet(
            f"accumulated error {accepted_error:.3e} exceeds tolerance "
            f"{max(rel_tol * abs(accepted_value), abs_tol):.3e}")
    return accepted_value, accepted_error


def oscillation_panel(frequency: float) -> float:
    """Panel length resolving ``exp(i frequency x)``: at most an eighth of a period."""
    if frequency == 0:
        return BASE_PANEL
    return min(BASE_PANEL, math.pi / (4.0 * abs(frequency)))




def tensor_rule(lo: float, hi: float, panel: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite ``order``-point Gauss-Legendre rule on ``[lo, hi]``."""
    n = max(1, math.ceil((hi - lo) / panel))
    edges = np.linspace(lo, hi, n + 1)
    nodes, weights = gauss_legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w
