"""Normal geodesic flow of the left-invariant sub-Riemannian structure on SE(2).

In the left trivialization T*G = g* x G the Hamiltonian system is triangular:
the covector p = (h1, h2, h3) evolves by the coadjoint (vertical) equation
and drives the group point through g' = h1 X1(g) + h2 X2(g), where
H = (h1^2 + h2^2) / 2.  With X3 = -sin th d/dx + cos th d/dy the brackets
are [X1, X2] = -X3, [X2, X3] = -X1, [X1, X3] = 0, which gives

    h1' =  h2 h3,    h2' = -h1 h3,    h3' = -h1 h2.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .group import GroupElement, compose

DEFAULT_STEP = 1e-3
MAX_STEP = 0.1
# renormalize onto h1^2 + h2^2 = 1 below this deviation, reject above
NATURAL_RENORM_TOL = 1e-6
NATURAL_TOL = 1e-12


class NotNaturalError(ValueError):
    """Covector does not lie (close enough) on the level set H = 1/2."""


@dataclass(frozen=True)
class Covector:
    """Left-trivialized momentum; h_i is the value of the covector on X_i."""

    h1: float
    h2: float
    h3: float

    @classmethod
    def natural(cls, h1: float, h2: float, h3: float) -> Covector:
        """Build a covector on C = {H = 1/2}, renormalizing tiny deviations."""
        vals = (h1, h2, h3)
        if not all(math.isfinite(v) for v in vals):
            raise NotNaturalError(f"non-finite covector {vals}")
        r2 = h1 * h1 + h2 * h2
        if abs(r2 - 1.0) > NATURAL_RENORM_TOL:
            raise NotNaturalError(f"h1^2 + h2^2 = {r2!r}, expected 1")
        r = math.sqrt(r2)
        return cls(h1 / r, h2 / r, float(h3))

    @classmethod
    def from_angle(cls, alpha: float, h3: float) -> Covector:
        return cls(math.cos(alpha), math.sin(alpha), float(h3))

    @property
    def alpha(self) -> float:
        return math.atan2(self.h2, self.h1)

    def as_array(self) -> np.ndarray:
        return np.array([self.h1, self.h2, self.h3])

    def is_natural(self, tol: float = NATURAL_TOL) -> bool:
        return abs(self.h1 * self.h1 + self.h2 * self.h2 - 1.0) <= tol

    def __iter__(self):
        return iter((self.h1, self.h2, self.h3))


@dataclass(frozen=True)
class ExtremalState:
    p: Covector
    g: GroupElement

    def as_array(self) -> np.ndarray:
        return np.array([self.p.h1, self.p.h2, self.p.h3, self.g.x, self.g.y, self.g.theta])

    @classmethod
    def from_array(cls, s) -> ExtremalState:
        return cls(
            Covector(float(s[0]), float(s[1]), float(s[2])),
            GroupElement(float(s[3]), float(s[4]), float(s[5])),
        )


def hamiltonian(p: Covector) -> float:
    return 0.5 * (p.h1 * p.h1 + p.h2 * p.h2)


def casimir(p: Covector) -> float:
    """h1^2 + h3^2, constant along every coadjoint orbit."""
    return p.h1 * p.h1 + p.h3 * p.h3


def vertical_field(p: Covector) -> np.ndarray:
    return np.array([p.h2 * p.h3, -p.h1 * p.h3, -p.h1 * p.h2])


def horizontal_field(state: ExtremalState) -> np.ndarray:
    th = state.g.theta
    return np.array([state.p.h1 * math.cos(th), state.p.h1 * math.sin(th), state.p.h2])


@dataclass(frozen=True, eq=False)
class Geodesic:
    """A uniformly sampled normal extremal.

    ``states`` is an ``(n + 1, 6)`` array with columns h1, h2, h3, x, y, theta.
    """

    p0: Covector
    t: np.ndarray
    states: np.ndarray
    step: float
    g0: GroupElement = field(default_factory=GroupElement.identity)

    def __post_init__(self):
        self.t.setflags(write=False)
        self.states.setflags(write=False)

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def h1(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def h2(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def h3(self) -> np.ndarray:
        return self.states[:, 2]

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 3]

    @property
    def y(self) -> np.ndarray:
        return self.states[:, 4]

    @property
    def theta(self) -> np.ndarray:
        return self.states[:, 5]

    def state(self, i: int) -> ExtremalState:
        return ExtremalState.from_array(self.states[i])

    def point(self, i: int) -> GroupElement:
        s = self.states[i]
        return GroupElement(float(s[3]), float(s[4]), float(s[5]))

    @property
    def endpoint(self) -> GroupElement:
        return self.point(-1)

    def to_csv(self, dest=None) -> str:
        """Write columns t, x, y, theta, h1, h2, h3 in shortest round-trip form.

        Returns the CSV text; also writes it to ``dest`` when given.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y", "theta", "h1", "h2", "h3"])
        cols = np.column_stack([self.t, self.states[:, [3, 4, 5, 0, 1, 2]]])
        for row in cols:
            w.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if dest is not None:
            Path(dest).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> Geodesic:
        rows = list(csv.DictReader(io.StringIO(Path(source).read_text())))
        t = np.array([float(r["t"]) for r in rows])
        states = np.array(
            [[float(r[k]) for k in ("h1", "h2", "h3", "x", "y", "theta")] for r in rows]
        )
        p0 = Covector(*states[0, :3])
        g0 = GroupElement(*states[0, 3:])
        step = float(t[1] - t[0]) if len(t) > 1 else 0.0
        return cls(p0, t, states, step, g0)


def _check_finite(*vals):
    for v in vals:
        if not math.isfinite(v):
            raise ValueError(f"non-finite input {v!r}")


def _steps(T: float, step: float) -> tuple[int, float]:
    """Number of steps and the actual step so that n * h == T exactly."""
    n = max(1, math.ceil(abs(T) / step - 1e-9))
    return n, T / n


def integrate(
    p0: Covector,
    g0: GroupElement | None = None,
    T: float = 1.0,
    step: float = DEFAULT_STEP,
) -> Geodesic:
    """Integrate the coupled 6-dimensional extremal system with classical RK4.

    The step is shrunk so that an integer number of steps lands exactly on T.
    """
    g0 = GroupElement.identity() if g0 is None else g0
    _check_finite(p0.h1, p0.h2, p0.h3, g0.x, g0.y, g0.theta, T, step)
    if T <= 0 or step <= 0:
        raise ValueError("T and step must be positive")
    if step > T:
        raise ValueError(f"step {step} exceeds horizon {T}")
    if step > MAX_STEP:
        raise ValueError(f"step {step} above the accuracy guard {MAX_STEP}")
    n, h = _steps(T, step)
    s0 = np.array([p0.h1, p0.h2, p0.h3, g0.x, g0.y, g0.theta])
    states = kernels.rk4_path(s0, h, n)
    t = np.arange(n + 1) * h
    t[-1] = T
    return Geodesic(p0, t, states, h, g0)


def propagate(p0: Covector, g0: GroupElement, t: float, step: float = DEFAULT_STEP) -> ExtremalState:
    """Extremal state at signed time ``t`` (no history kept)."""
    _check_finite(t, step)
    if t == 0.0:
        return ExtremalState(p0, g0)
    n, h = _steps(t, step)
    s0 = np.array([[p0.h1, p0.h2, p0.h3, g0.x, g0.y, g0.theta]])
    out = kernels.rk4_endpoints(s0, np.array([h]), np.array([n], dtype=np.int64))
    return ExtremalState.from_array(out[0])


def exponential_map(p0: Covector, t: float, step: float = DEFAULT_STEP) -> GroupElement:
    """Sub-Riemannian exponential: endpoint of the geodesic from the identity."""
    if not p0.is_natural(1e-9):
        raise NotNaturalError(f"covector {p0} is not on H = 1/2")
    _check_finite(t, step)
    if t < 0:
        raise ValueError("exponential_map needs t >= 0")
    if step <= 0 or step > MAX_STEP:
        raise ValueError(f"step {step} outside (0, {MAX_STEP}]")
    if t == 0:
        return GroupElement.identity()
    return propagate(p0, GroupElement.identity(), t, step).g


def exponential_map_batch(P: np.ndarray, t: float, step: float = DEFAULT_STEP) -> np.ndarray:
    """Endpoints (x, y, theta) of many geodesics of equal length, shape (N, 3)."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    S = np.zeros((P.shape[0], 6))
    S[:, :3] = P
    if t == 0:
        return S[:, 3:]
    n, h = _steps(t, step)
    N = P.shape[0]
    out = kernels.rk4_endpoints(S, np.full(N, h), np.full(N, n, dtype=np.int64))
    return out[:, 3:]


def vertical_flow(p0: Covector, tau: float, step: float = DEFAULT_STEP) -> Covector:
    """Flow of the coadjoint equation alone for signed time ``tau``."""
    _check_finite(p0.h1, p0.h2, p0.h3, tau, step)
    if step <= 0 or step > MAX_STEP:
        raise ValueError(f"step {step} outside (0, {MAX_STEP}]")
    if tau == 0:
        return p0
    n, h = _steps(tau, step)
    out = kernels.rk4_vertical(p0.as_array(), h, n)
    return Covector(float(out[0]), float(out[1]), float(out[2]))


def left_translate(geo: Geodesic, g: GroupElement) -> np.ndarray:
    """Group points of ``geo`` left-translated by ``g``, shape (n + 1, 3)."""
    pts = [compose(g, geo.point(i)) for i in range(len(geo))]
    return np.array([[q.x, q.y, q.theta] for q in pts])


def natural_grid(n_alpha: int, n_h3: int, h3_max: float) -> np.ndarray:
    """Covectors (cos a, sin a, h3) on a product grid over C, shape (n_alpha * n_h3, 3).

    Both axes are half-open and uniform: a = 2 pi i / n_alpha and
    h3 = -h3_max + 2 h3_max j / n_h3, so for even counts the grid contains the
    four equilibria (+-1, 0, 0), (0, +-1, 0).  Rows are ordered with a slowest.
    """
    if n_alpha < 2 or n_h3 < 2:
        raise ValueError("grid counts must be >= 2")
    if not h3_max > 0:
        raise ValueError("h3_max must be positive")
    i = np.arange(n_alpha)
    j = np.arange(n_h3)
    alpha = 2.0 * np.pi * i / n_alpha
    h3 = -h3_max + 2.0 * h3_max * j / n_h3
    A, H3 = np.meshgrid(alpha, h3, indexing="ij")
    # exact zeros at the quarter turns keep the equilibria exact
    c = np.cos(A.ravel())
    s = np.sin(A.ravel())
    quarter = (4 * np.repeat(i, n_h3)) % n_alpha == 0
    k = (4 * np.repeat(i, n_h3)) // n_alpha
    c[quarter] = np.array([1.0, 0.0, -1.0, 0.0])[k[quarter] % 4]
    s[quarter] = np.array([0.0, 1.0, 0.0, -1.0])[k[quarter] % 4]
    return np.column_stack([c, s, H3.ravel()])
