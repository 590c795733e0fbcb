"""One-parameter isometry subgroups of SE(2) and the homogeneity of geodesics.

Every one-parameter subgroup of the isometry group acts through left shifts
by e^{sX}, X in se(2).  Its orbit through a point projects to the plane as a
line (c = 0), a point, or a circle about (-b/c, a/c).  A geodesic is
homogeneous exactly when it is such an orbit, which on SE(2) happens only
for the straight line and the rotation in place.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .classification import GeodesicClass, equilibrium_kind
from .flow import Covector, NotNaturalError, integrate, natural_grid
from .group import AlgebraElement, E13, ROT, GroupElement, algebra_exp, compose

POINT_TOL = 1e-12
EQUILIBRIUM_EPS = 1e-9
# relative RMS residual above which a projection is certified non-conic
NON_CONIC_THRESHOLD = 1e-2
WITNESS_TOL = 1e-9


@dataclass(frozen=True)
class OrbitSpec:
    generator: AlgebraElement
    base: GroupElement = field(default_factory=GroupElement.identity)


@dataclass(frozen=True)
class ProjectionKind:
    kind: str  # "line" | "point" | "circle"
    parameters: dict

    def to_json(self) -> dict:
        return {"kind": self.kind, "parameters": dict(self.parameters), "residual": 0.0}


def orbit_point(spec: OrbitSpec, s: float) -> GroupElement:
    """e^{sX} applied to the base point, in closed form."""
    a, b, c = spec.generator.a, spec.generator.b, spec.generator.c
    x0, y0, th0 = spec.base.x, spec.base.y, spec.base.theta
    if c == 0.0:
        return GroupElement(x0 + a * s, y0 + b * s, th0)
    cs = c * s
    if abs(cs) < 1e-8:
        # closed form cancels catastrophically here
        return compose(algebra_exp(spec.generator, s), spec.base)
    cos_cs, sin_cs = math.cos(cs), math.sin(cs)
    omc = 2.0 * math.sin(0.5 * cs) ** 2
    return GroupElement(
        x0 * cos_cs - y0 * sin_cs + a / c * sin_cs - b / c * omc,
        y0 * cos_cs + x0 * sin_cs + b / c * sin_cs + a / c * omc,
        th0 + cs,
    )


def classify_orbit_projection(spec: OrbitSpec) -> ProjectionKind:
    a, b, c = spec.generator.a, spec.generator.b, spec.generator.c
    if a == 0.0 and b == 0.0 and c == 0.0:
        raise ValueError("zero generator: the orbit is a single group element")
    x0, y0 = spec.base.x, spec.base.y
    if c == 0.0:
        norm = math.hypot(a, b)
        return ProjectionKind(
            "line", {"point": [x0, y0], "direction": [a / norm, b / norm]}
        )
    cx, cy = -b / c + 0.0, a / c + 0.0  # no signed zeros in reports
    r = math.hypot(x0 - cx, y0 - cy)
    if r <= POINT_TOL:
        return ProjectionKind("point", {"point": [cx, cy]})
    return ProjectionKind("circle", {"center": [cx, cy], "radius": r})


@dataclass(frozen=True)
class FitResult:
    kind: str  # "line" | "circle" | "point"
    parameters: dict
    residual: float
    relative_residual: float

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "parameters": dict(self.parameters),
            "residual": self.residual,
            "relative_residual": self.relative_residual,
        }


def fit_projection(points) -> FitResult:
    """Least-squares line and algebraic circle fits; returns the better one.

    ``residual`` is the RMS orthogonal distance to the model,
    ``relative_residual`` divides it by the RMS spread of the points about
    their centroid so the measure does not depend on the size of the curve.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] != 2:
        raise ValueError("points must have shape (N, 2)")
    if P.shape[0] < 8:
        raise ValueError("need at least 8 points")
    centroid = P.mean(axis=0)
    if np.max(np.abs(P - P[0])) <= 1e-12:
        return FitResult("point", {"point": P[0].tolist()}, 0.0, 0.0)
    Q = P - centroid
    spread = math.sqrt(float(np.mean(np.sum(Q * Q, axis=1))))

    _, sv, vt = np.linalg.svd(Q, full_matrices=False)
    direction = vt[0]
    line_res = float(sv[-1]) / math.sqrt(P.shape[0])
    line = FitResult(
        "line",
        {"point": centroid.tolist(), "direction": direction.tolist()},
        line_res,
        line_res / spread,
    )

    # Kasa fit in centred coordinates: |q|^2 + D qx + E qy + F = 0
    A = np.column_stack([Q, np.ones(len(Q))])
    rhs = -np.sum(Q * Q, axis=1)
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    cq = -0.5 * sol[:2]
    r2 = float(cq @ cq - sol[2])
    if r2 <= 0 or not math.isfinite(r2):
        return line
    radius = math.sqrt(r2)
    circ_res = math.sqrt(float(np.mean((np.linalg.norm(Q - cq, axis=1) - radius) ** 2)))
    if circ_res < line_res:
        return FitResult(
            "circle",
            {"center": (cq + centroid).tolist(), "radius": radius},
            circ_res,
            circ_res / spread,
        )
    return line


@dataclass(frozen=True)
class HomogeneityResult:
    covector: Covector
    homogeneous: bool
    witness: AlgebraElement | None = None
    # max distance between geodesic and witness orbit, for positive verdicts
    witness_deviation: float | None = None
    # best conic fit of the planar projection, for certified negative verdicts
    fit: FitResult | None = None

    @property
    def certified(self) -> bool | None:
        if self.homogeneous:
            return None if self.witness_deviation is None else self.witness_deviation <= WITNESS_TOL
        if self.fit is None:
            return None
        return self.fit.relative_residual >= NON_CONIC_THRESHOLD

    def to_json(self) -> dict:
        out = {
            "covector": list(self.covector),
            "homogeneous": self.homogeneous,
            "witness": None if self.witness is None else asdict(self.witness),
        }
        if self.witness_deviation is not None:
            out["witness_deviation"] = self.witness_deviation
        if self.fit is not None:
            out["fit"] = self.fit.to_json()
        if self.certified is not None:
            out["certified"] = self.certified
        return out


def homogeneity_test(
    p: Covector,
    eps: float = EQUILIBRIUM_EPS,
    confirm: bool = False,
    horizon: float = 10.0,
    step: float = 1e-3,
) -> HomogeneityResult:
    """Decide whether the geodesic through ``p`` is an orbit of a one-parameter subgroup.

    The verdict is algebraic: only the vertical-flow equilibria qualify, with
    witness +-E13 (straight line) or +-(E21 - E12) (rotation in place).  With
    ``confirm=True`` the verdict is also checked geometrically over
    ``[0, horizon]``: a positive one against the witness orbit, a negative one
    by the conic-fit residual of the planar projection.
    """
    if not p.is_natural(1e-9):
        raise NotNaturalError(f"covector {p} is not on H = 1/2")
    kind = equilibrium_kind(p, eps)
    if kind is GeodesicClass.STRAIGHT_LINE:
        witness = E13 * math.copysign(1.0, p.h1)
    elif kind is GeodesicClass.ROTATION_IN_PLACE:
        witness = ROT * math.copysign(1.0, p.h2)
    else:
        witness = None
    if not confirm:
        return HomogeneityResult(p, witness is not None, witness)

    geo = integrate(p, None, horizon, step)
    if witness is not None:
        spec = OrbitSpec(witness)
        dev = 0.0
        for i in range(len(geo)):
            o = orbit_point(spec, float(geo.t[i]))
            g = geo.point(i)
            dev = max(dev, abs(o.x - g.x), abs(o.y - g.y), abs(o.theta - g.theta))
        return HomogeneityResult(p, True, witness, witness_deviation=dev)
    fit = fit_projection(np.column_stack([geo.x, geo.y]))
    return HomogeneityResult(p, False, None, fit=fit)


@dataclass
class SweepReport:
    n_alpha: int
    n_h3: int
    h3_max: float
    n_covectors: int
    homogeneous: list
    confirmations: list = field(default_factory=list)

    @property
    def geodesic_orbital(self) -> bool:
        return len(self.homogeneous) == self.n_covectors

    def to_json(self) -> dict:
        return {
            "grid": {"n_alpha": self.n_alpha, "n_h3": self.n_h3, "h3_max": self.h3_max},
            "n_covectors": self.n_covectors,
            "n_homogeneous": len(self.homogeneous),
            "homogeneous": [r.to_json() for r in self.homogeneous],
            "verdict": "geodesic-orbital" if self.geodesic_orbital else "not geodesic-orbital",
            "confirmations": [r.to_json() for r in self.confirmations],
        }


def homogeneity_sweep(
    n_alpha: int,
    n_h3: int,
    h3_max: float = 4.0,
    confirm_sample: int = 0,
    seed: int = 0,
    horizon: float = 10.0,
    step: float = 1e-3,
) -> SweepReport:
    """Run the homogeneity test over a grid on C.

    ``confirm_sample`` non-homogeneous covectors, drawn with ``seed``, plus all
    homogeneous ones get the geometric confirmation.
    """
    grid = natural_grid(n_alpha, n_h3, h3_max)
    results = [homogeneity_test(Covector(*row)) for row in grid]
    homog = [r for r in results if r.homogeneous]
    confirmations = [homogeneity_test(r.covector, confirm=True, horizon=horizon, step=step) for r in homog]
    if confirm_sample:
        rest = [i for i, r in enumerate(results) if not r.homogeneous]
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(rest), size=min(confirm_sample, len(rest)), replace=False)
        for i in sorted(pick):
            p = results[rest[i]].covector
            confirmations.append(homogeneity_test(p, confirm=True, horizon=horizon, step=step))
    return SweepReport(n_alpha, n_h3, h3_max, len(grid), homog, confirmations)
