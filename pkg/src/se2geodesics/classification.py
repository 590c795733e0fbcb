"""Qualitative types of geodesics and the singular points of their projections.

The vertical system reduces on C to a pendulum whose separatrix is the level
F = h1^2 + h3^2 = 1 of the Casimir through the saddles (+-1, 0, 0).  Inside the
separatrix (F < 1) the angular velocity h2 never vanishes; outside it (F > 1)
h2 changes sign, so the projection turns both ways between cusps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .flow import Covector, Geodesic, NotNaturalError, casimir

SEPARATRIX_EPS = 1e-9
EQUILIBRIUM_EPS = 1e-9
BISECTION_TOL = 1e-8
MAX_SCAN_STEP = 1e-2
# a component counts as identically zero below this level
DEGENERATE_TOL = 1e-12


class GeodesicClass(str, Enum):
    STRAIGHT_LINE = "straight"
    ROTATION_IN_PLACE = "rotation"
    NON_INFLEXIONAL = "noninflexional"
    INFLEXIONAL = "inflexional"
    CRITICAL = "critical"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Crossings:
    """Sign-change times; ``degenerate`` flags an identically zero component."""

    times: list
    degenerate: bool = False

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self):
        return iter(self.times)

    def __getitem__(self, i):
        return self.times[i]


def equilibrium_kind(p: Covector, eps: float = EQUILIBRIUM_EPS) -> GeodesicClass | None:
    if abs(p.h3) > eps:
        return None
    if abs(p.h2) <= eps and abs(abs(p.h1) - 1.0) <= eps:
        return GeodesicClass.STRAIGHT_LINE
    if abs(p.h1) <= eps and abs(abs(p.h2) - 1.0) <= eps:
        return GeodesicClass.ROTATION_IN_PLACE
    return None


def classify_covector(p: Covector, eps: float = SEPARATRIX_EPS) -> GeodesicClass:
    if not p.is_natural(1e-9):
        raise NotNaturalError(f"covector {p} is not on H = 1/2")
    eq = equilibrium_kind(p)
    if eq is not None:
        return eq
    F = casimir(p)
    if F > 1.0 + eps:
        return GeodesicClass.INFLEXIONAL
    if F < 1.0 - eps:
        return GeodesicClass.NON_INFLEXIONAL
    return GeodesicClass.CRITICAL


def _component_at(p: np.ndarray, ds: float, comp: int) -> float:
    if ds == 0.0:
        return float(p[comp])
    n = max(1, math.ceil(abs(ds) / 1e-3))
    return float(kernels.rk4_vertical(p, ds / n, n)[comp])


def _sign_changes(geo: Geodesic, comp: int) -> Crossings:
    if geo.step > MAX_SCAN_STEP:
        raise ValueError(f"sampling step {geo.step} too coarse, need <= {MAX_SCAN_STEP}")
    v = geo.states[:, comp]
    if np.all(np.abs(v) <= DEGENERATE_TOL):
        return Crossings([], True)
    nz = np.nonzero(v)[0]
    sv = np.sign(v[nz])
    flips = np.nonzero(sv[:-1] != sv[1:])[0]
    times = []
    for f in flips:
        a, b = nz[f], nz[f + 1]
        p_a = geo.states[a, :3].copy()
        lo, hi = 0.0, float(geo.t[b] - geo.t[a])
        sign_lo = sv[f]
        while hi - lo > BISECTION_TOL:
            mid = 0.5 * (lo + hi)
            if np.sign(_component_at(p_a, mid, comp)) == sign_lo:
                lo = mid
            else:
                hi = mid
        times.append(float(geo.t[a]) + 0.5 * (lo + hi))
    return Crossings(times, False)


def detect_cusps(geo: Geodesic) -> Crossings:
    """Times where h1 changes sign: the planar velocity vanishes and reverses."""
    return _sign_changes(geo, 0)


def detect_inflections(geo: Geodesic) -> Crossings:
    """Times where h2 = theta' changes sign."""
    return _sign_changes(geo, 1)


def vertical_period(p: Covector, step: float = 1e-3, t_max: float = 200.0) -> float:
    """Numerical period of the vertical flow through ``p`` (inf at equilibria or on the separatrix).

    Measured as the time between the first and third sign changes of h3 for
    oscillations, or of h2 for rotations.
    """
    if equilibrium_kind(p) is not None:
        return math.inf
    F = casimir(p)
    if abs(F - 1.0) <= SEPARATRIX_EPS:
        return math.inf
    comp = 2 if F < 1.0 else 1
    n = math.ceil(t_max / step)
    s0 = np.array([p.h1, p.h2, p.h3, 0.0, 0.0, 0.0])
    path = kernels.rk4_path(s0, step, n)
    v = path[:, comp]
    flips = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
    if len(flips) < 3:
        return math.inf

    def root(i):
        # linear interpolation between samples
        return step * (i + v[i] / (v[i] - v[i + 1]))

    return root(flips[2]) - root(flips[0])
