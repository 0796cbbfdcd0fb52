"""Large-distance behavior of |phi(r,t)|^2 and R0: envelopes, log-log slopes, decay certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateFit, NoPeaksFound, TooFewPoints
from .field import phi_radial
from .formfactor import CompactBump, Formfactor, QuadratureSpec

__all__ = [
    "DecayFit",
    "envelope",
    "fit_decay",
    "superpoly_certificate",
    "abs_phi_sq_samples",
    "top_decade_grid",
    "MIN_FIT_POINTS",
]

MIN_FIT_POINTS = 4


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    r_window: tuple[float, float]
    n_points: int
    residual_rms: float
    used_envelope: bool = False

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "window": list(self.r_window),
            "n_points": self.n_points,
            "residual_rms": self.residual_rms,
            "used_envelope": self.used_envelope,
        }


def _as_arrays(samples: Iterable[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray]:
    pairs = np.asarray(list(samples), dtype=float).reshape(-1, 2)
    return pairs[:, 0], pairs[:, 1]


def envelope(samples: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Strict interior local maxima of ``y`` over ``r``, in input order."""
    r, y = _as_arrays(samples)
    if r.size < 3:
        raise TooFewPoints(f"envelope needs at least 3 samples, got {r.size}")
    if np.any(np.diff(r) <= 0):
        raise ValueError("samples must be sorted by strictly increasing r")
    peak = (y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])
    idx = np.flatnonzero(peak) + 1
    if idx.size == 0:
        raise NoPeaksFound("no strict interior maxima; data is monotone or flat")
    return [(float(r[i]), float(y[i])) for i in idx]


def fit_decay(samples: Sequence[tuple[float, float]], use_envelope: bool = False) -> DecayFit:
    """Least-squares line through ``(log r, log y)``.

    The decade check applies to the supplied ``r`` range; with
    ``use_envelope`` the line is then fitted through the peaks only, which
    necessarily sit slightly inside that range.
    """
    r, y = _as_arrays(samples)
    if r.size < MIN_FIT_POINTS:
        raise TooFewPoints(f"need at least {MIN_FIT_POINTS} points, got {r.size}")
    if not r.min() > 0:
        raise ValueError("r must be positive for a log-log fit")
    if r.max() / r.min() < 10.0 * (1 - 1e-12):
        raise DegenerateFit(f"r spans {r.min():g}..{r.max():g}, less than one decade")
    if use_envelope:
        r, y = _as_arrays(envelope(list(zip(r, y))))
        if r.size < MIN_FIT_POINTS:
            raise TooFewPoints(f"only {r.size} envelope peaks, need {MIN_FIT_POINTS}")
    if np.any(y <= 0):
        raise ValueError("all y must be positive for a log-log fit")
    lx, ly = np.log(r), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return DecayFit(
        slope=float(slope),
        intercept=float(intercept),
        r_window=(float(r.min()), float(r.max())),
        n_points=int(r.size),
        residual_rms=float(math.sqrt(np.mean(resid**2))),
        used_envelope=use_envelope,
    )


def fit_decay_auto(samples: Sequence[tuple[float, float]], prefer_envelope: bool) -> DecayFit:
    """Envelope fit when requested and peaks exist, raw fit otherwise."""
    if prefer_envelope:
        try:
            return fit_decay(samples, use_envelope=True)
        except (NoPeaksFound, TooFewPoints):
            pass
    return fit_decay(samples, use_envelope=False)


def top_decade_grid(r_max: float, points: int) -> np.ndarray:
    return np.geomspace(r_max / 10.0, r_max, points)


def abs_phi_sq_samples(f: Formfactor, t: float, r_grid: Iterable[float],
                       spec: QuadratureSpec | None = None) -> list[tuple[float, float]]:
    return [(float(r), abs(phi_radial(f, float(r), t, spec).value) ** 2) for r in r_grid]


def superpoly_certificate(f: Formfactor, t: float, powers: Sequence[int], r_grid: Sequence[float],
                          spec: QuadratureSpec | None = None) -> list[tuple[int, bool]]:
    """For each ``k``, whether ``r**k |phi(r,t)|^2`` decreases over the top decade of ``r_grid``.

    The transform of a compactly supported bump has zeros, so ``|phi|^2``
    dips to zero between peaks; "decreasing" means the log-log slope of the
    peak envelope (raw samples if there are no peaks) is negative.
    """
    if not isinstance(f, CompactBump):
        raise ValueError("superpoly_certificate applies to CompactBump formfactors only")
    r = np.asarray(r_grid, dtype=float)
    if r.size < 2 or np.any(np.diff(r) <= 0) or r[0] <= 0:
        raise ValueError("r_grid must be positive and strictly increasing")
    decades = math.log10(r[-1] / r[0])
    if r.size < max(3, math.ceil(3 * decades)):
        raise ValueError("r_grid needs at least 3 points per decade")
    r = r[r >= r[-1] / 10.0 * (1 - 1e-12)]
    base = np.array([y for _, y in abs_phi_sq_samples(f, t, r, spec)])
    out = []
    for k in powers:
        if k < 0:
            raise ValueError(f"powers must be nonnegative, got {k}")
        fit = fit_decay_auto(list(zip(r, r**k * base)), prefer_envelope=True)
        out.append((int(k), fit.slope < 0))
    return out
