"""Brute-force cut-time estimation through Maxwell points.

A geodesic stops being a shortest path at the latest when another geodesic
of the same length reaches the same endpoint (a Maxwell point).  The
estimator integrates geodesics from a product grid over C alongside the
target, in two stages:

1. coarse scan: the earliest target time t such that a grid geodesic that
   has visibly separated from the target comes within ``delta`` of g_p(t) at
   some time s <= t (endpoints are looked up in a bucket index of the target
   path); the same pass records, per grid covector, the first time its
   equal-time distance to the target has a local minimum after separating;
2. refinement: those reconvergence seeds are polished by Newton's method on
   exp(q, t) = exp(p, t) in the unknowns (angle of q, h3 of q, t).  A solution
   with q away from p is an exact Maxwell point up to integration error.

The reported value is the earliest refined Maxwell time, or the coarse time
when no seed converges.  Both are upper bounds on the cut time; conjugate
points are not searched for.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .flow import (
    Covector,
    NotNaturalError,
    _steps,
    natural_grid,
    propagate,
    vertical_flow,
)
from .group import GroupElement, compose, inverse, reduce_angle

log = logging.getLogger(__name__)

MAX_GRID_POINTS = 4_000_000
MAX_TIME_STEPS = 1_000_000


def group_distance(g1: GroupElement, g2: GroupElement) -> float:
    """Chart distance sqrt(dx^2 + dy^2 + d(theta)^2) with the short arc on S^1."""
    dth = reduce_angle(g1.theta - g2.theta)
    return math.sqrt((g1.x - g2.x) ** 2 + (g1.y - g2.y) ** 2 + dth * dth)


@dataclass(frozen=True)
class SearchConfig:
    n_alpha: int = 720
    n_h3: int = 200
    h3_max: float = 4.0
    horizon: float = 10.0
    time_step: float = 5e-3
    delta: float = 2e-2
    # refined partners closer than this to p (covector norm) are the trivial solution
    separation: float = 1e-3
    # a grid geodesic must first get this far from the target to count as distinct
    divergence: float = 0.1
    # equal-time reconvergence below this distance seeds a Newton refinement
    seed_radius: float = 0.5
    max_refine: int = 256

    def __post_init__(self):
        if self.n_alpha < 2 or self.n_h3 < 2 or self.max_refine < 0:
            raise ValueError("grid counts must be >= 2")
        for name in ("h3_max", "horizon", "time_step", "delta", "separation", "divergence", "seed_radius"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if self.time_step >= self.horizon:
            raise ValueError("time_step must be below the horizon")
        if self.n_alpha * self.n_h3 > MAX_GRID_POINTS:
            raise ValueError(
                f"grid of {self.n_alpha * self.n_h3} covectors exceeds the cap {MAX_GRID_POINTS}"
            )
        if self.horizon / self.time_step > MAX_TIME_STEPS:
            raise ValueError(f"more than {MAX_TIME_STEPS} time steps")

    @classmethod
    def ci(cls, **overrides) -> SearchConfig:
        """Reduced configuration for quick runs."""
        base = dict(n_alpha=180, n_h3=50, horizon=7.0)
        base.update(overrides)
        return cls(**base)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CutTimeEstimate:
    p: Covector
    value: float | None  # None means no Maxwell point up to the horizon
    lower: float | None
    upper: float | None
    config: SearchConfig
    coarse_value: float | None = None
    refined: bool = False
    partner: Covector | None = None

    @property
    def horizon_exceeded(self) -> bool:
        return self.value is None

    @property
    def grid_spec(self) -> dict:
        c = self.config
        return {"n_alpha": c.n_alpha, "n_h3": c.n_h3, "h3_max": c.h3_max, "time_step": c.time_step}

    @property
    def match_tol(self) -> float:
        return self.config.delta

    @property
    def width(self) -> float:
        return 0.0 if self.value is None else self.upper - self.lower

    def to_json(self) -> dict:
        return {
            "p": list(self.p),
            "value": "horizon_exceeded" if self.value is None else self.value,
            "lower": self.lower,
            "upper": self.upper,
            "coarse_value": self.coarse_value,
            "refined": self.refined,
            "partner": None if self.partner is None else list(self.partner),
            "config": self.config.to_json(),
        }


def _endpoints(rows: np.ndarray, t: float, step: float) -> np.ndarray:
    n, h = _steps(t, step)
    N = rows.shape[0]
    S = np.zeros((N, 6))
    S[:, :3] = rows
    return kernels.rk4_endpoints(S, np.full(N, h), np.full(N, n, dtype=np.int64))


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def refine_maxwell(
    p: Covector,
    q0: Covector,
    t0: float,
    step: float,
    t_max: float,
    t_min: float = 0.0,
    tol: float = 1e-10,
    max_iter: int = 30,
) -> tuple[Covector, float] | None:
    """Newton on exp(q, t) = exp(p, t) over (angle of q, h3 of q, t).

    Returns ``(q, t)`` on convergence, or None when the iteration fails or
    leaves ``(t_min, t_max]`` (every pair of geodesics meets at t = 0).
    """
    a, h3, t = q0.alpha, q0.h3, t0
    pa = p.as_array()
    eps = 1e-6
    for _ in range(max_iter):
        if not (t_min < t <= t_max):
            return None
        rows = np.array(
            [
                [math.cos(a), math.sin(a), h3],
                [math.cos(a + eps), math.sin(a + eps), h3],
                [math.cos(a - eps), math.sin(a - eps), h3],
                [math.cos(a), math.sin(a), h3 + eps],
                [math.cos(a), math.sin(a), h3 - eps],
                pa,
            ]
        )
        E = _endpoints(rows, t, step)
        g = E[:, 3:]
        r = g[0] - g[5]
        r[2] = _wrap(r[2])
        if np.linalg.norm(r) < tol:
            return Covector(math.cos(a), math.sin(a), h3), t
        J = np.empty((3, 3))
        for col, (i, k) in enumerate(((1, 2), (3, 4))):
            d = g[i] - g[k]
            d[2] = _wrap(d[2])
            J[:, col] = d / (2 * eps)
        vq = np.array([E[0, 0] * math.cos(E[0, 5]), E[0, 0] * math.sin(E[0, 5]), E[0, 1]])
        vp = np.array([E[5, 0] * math.cos(E[5, 5]), E[5, 0] * math.sin(E[5, 5]), E[5, 1]])
        J[:, 2] = vq - vp
        dz, *_ = np.linalg.lstsq(J, -r, rcond=None)
        # damped steps keep Newton on the seed's branch
        scale = max(1.0, np.hypot(dz[0], dz[1]) / 0.3, abs(dz[2]) / 0.5)
        dz = dz / scale
        a, h3, t = a + dz[0], h3 + dz[1], t + dz[2]
    return None


_SIGN_FLIPS = [(s1, s2, s3) for s1 in (1, -1) for s2 in (1, -1) for s3 in (1, -1)][1:]


def _image_seeds(p: Covector, path: np.ndarray, h: float, cfg: SearchConfig) -> list:
    """Seeds from the coordinate sign flips of ``p``.

    These images often are (or are close to) the Maxwell partners that a
    coarse grid misses; each seed sits at a local minimum of the equal-time
    distance to the target after separation.
    """
    seeds = []
    for flip in _SIGN_FLIPS:
        q = p.as_array() * flip
        if np.linalg.norm(q - p.as_array()) < cfg.separation:
            continue
        other = kernels.rk4_path(np.array([*q, 0.0, 0.0, 0.0]), h, path.shape[0] - 1)
        d = np.sqrt(
            np.sum((other[:, 3:5] - path[:, 3:5]) ** 2, axis=1)
            + _wrap(other[:, 5] - path[:, 5]) ** 2
        )
        apart = np.nonzero(d >= cfg.divergence)[0]
        if apart.size == 0:
            continue
        j0 = apart[0]
        mid = np.arange(max(j0, 1), len(d) - 1)
        mins = mid[(d[mid] <= d[mid - 1]) & (d[mid] < d[mid + 1]) & (d[mid] < cfg.seed_radius)]
        seeds.extend((float(d[j]), j * h, Covector(*q)) for j in mins)
    return seeds


def _bracket(value: float, ts: float) -> tuple[float, float]:
    lo = math.floor(value / ts) * ts
    if lo > value:
        lo -= ts
    return lo, lo + ts


def estimate_cut_time(p: Covector, cfg: SearchConfig | None = None) -> CutTimeEstimate:
    cfg = SearchConfig() if cfg is None else cfg
    if not p.is_natural(1e-9):
        raise NotNaturalError(f"covector {p} is not on H = 1/2")
    n, h = _steps(cfg.horizon, cfg.time_step)
    s0 = np.array([p.h1, p.h2, p.h3, 0.0, 0.0, 0.0])
    path = kernels.rk4_path(s0, h, n)
    grid = natural_grid(cfg.n_alpha, cfg.n_h3, cfg.h3_max)
    states = np.zeros((grid.shape[0], 6))
    states[:, :3] = grid

    nth = max(3, int(2 * np.pi / cfg.delta))
    skeys, order = kernels.build_index(path, cfg.delta, nth)
    best_k, best_q, best_j, seed_j, seed_d = kernels.scan(
        path, states, h, cfg.delta, cfg.divergence, cfg.seed_radius, skeys, order, cfg.delta, nth
    )
    coarse = None if best_k > n else best_k * h
    log.debug("coarse scan for %s: k=%s q=%s j=%s", p, best_k, best_q, best_j)

    # closest reconvergences first; the coarse match goes in front
    seeds = [
        (float(seed_d[i]), int(seed_j[i]) * h, Covector(*grid[i])) for i in np.nonzero(seed_j >= 0)[0]
    ]
    seeds += _image_seeds(p, path, h, cfg)
    seeds.sort(key=lambda s: (s[0], s[1]))
    if best_q >= 0:
        seeds.insert(0, (0.0, 0.5 * (best_j + best_k) * h, Covector(*grid[best_q])))

    best_t, partner = math.inf, None
    tried = 0
    for _, t_seed, q0 in seeds:
        if tried >= cfg.max_refine:
            break
        if t_seed > best_t + 0.5:
            continue
        tried += 1
        sol = refine_maxwell(
            p, q0, t_seed, cfg.time_step, cfg.horizon, t_min=0.5 * cfg.divergence
        )
        if sol is None:
            continue
        q, t = sol
        if np.linalg.norm(q.as_array() - p.as_array()) < cfg.separation:
            continue
        if t < cfg.divergence or t > cfg.horizon:
            continue
        if t < best_t:
            best_t, partner = t, q

    if partner is not None:
        lo, hi = _bracket(best_t, h)
        return CutTimeEstimate(p, best_t, lo, hi, cfg, coarse, True, partner)
    if coarse is not None:
        return CutTimeEstimate(
            p, coarse, (best_k - 1) * h, coarse, cfg, coarse, False, Covector(*grid[best_q])
        )
    return CutTimeEstimate(p, None, None, None, cfg)


@dataclass
class EquioptimalityReport:
    p: Covector
    taus: list
    estimates: list
    max_deviation: float
    tolerance: float
    consistent_horizon: bool
    passed: bool = field(init=False)

    def __post_init__(self):
        self.max_deviation = float(self.max_deviation)
        self.passed = bool(self.consistent_horizon and self.max_deviation <= self.tolerance)

    def to_json(self) -> dict:
        return {
            "p": list(self.p),
            "taus": list(self.taus),
            "estimates": [e.to_json() for e in self.estimates],
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "consistent_horizon": self.consistent_horizon,
            "passed": self.passed,
        }


def equioptimality_check(
    p: Covector,
    taus,
    cfg: SearchConfig | None = None,
    flow_step: float = 1e-3,
) -> EquioptimalityReport:
    """Cut-time estimates along the vertical orbit of ``p``.

    Passes when every estimate is finite (or every one exceeds the horizon)
    and the spread of the finite ones is within two bracket widths.
    """
    cfg = SearchConfig() if cfg is None else cfg
    taus = [float(t) for t in taus]
    ests = [estimate_cut_time(vertical_flow(p, tau, flow_step), cfg) for tau in taus]
    finite = [e.value for e in ests if e.value is not None]
    consistent = len(finite) in (0, len(ests))
    dev = (max(finite) - min(finite)) if finite else 0.0
    # two bracket widths at the common time step
    tol = 2.0 * _steps(cfg.horizon, cfg.time_step)[1]
    return EquioptimalityReport(p, taus, ests, dev, tol, consistent)


def shift_identity_check(
    p: Covector,
    tau: float,
    T: float,
    step: float = 1e-3,
    samples: int = 51,
) -> float:
    """Max over t in [0, T] of the distance between exp(e^{tau H_v} p, t) and g(tau)^-1 g(t + tau)."""
    if not p.is_natural(1e-9):
        raise NotNaturalError(f"covector {p} is not on H = 1/2")
    if tau == 0.0:
        # both sides are the same geodesic
        return 0.0
    ident = GroupElement.identity()
    q = vertical_flow(p, tau, step)
    g_tau_inv = inverse(propagate(p, ident, tau, step).g)
    worst = 0.0
    for t in np.linspace(0.0, T, samples):
        lhs = propagate(q, ident, float(t), step).g
        rhs = compose(g_tau_inv, propagate(p, ident, float(t) + tau, step).g)
        worst = max(worst, group_distance(lhs, rhs))
    return worst


__all__ = [
    "CutTimeEstimate",
    "EquioptimalityReport",
    "SearchConfig",
    "equioptimality_check",
    "estimate_cut_time",
    "group_distance",
    "refine_maxwell",
    "shift_identity_check",
]
