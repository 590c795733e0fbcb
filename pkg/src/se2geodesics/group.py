"""The group SE(2) of proper planar motions and its Lie algebra se(2).

Group elements are ``(x, y, theta)`` with matrix form

    [[cos theta, -sin theta, x],
     [sin theta,  cos theta, y],
     [0,          0,         1]]

Algebra elements are ``a*E13 + b*E23 + c*(E21 - E12)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# |c * s| below this uses the c = 0 closed form in algebra_exp
EXP_BRANCH_THRESHOLD = 1e-8
# componentwise tolerance for GroupElement.isclose
EQUALITY_TOL = 1e-9


def reduce_angle(theta: float) -> float:
    """Map an angle to (-pi, pi]."""
    r = math.remainder(theta, 2.0 * math.pi)
    if r == -math.pi:
        return math.pi
    return r


@dataclass(frozen=True)
class GroupElement:
    """A proper planar motion.  ``theta`` is kept unreduced."""

    x: float
    y: float
    theta: float

    @classmethod
    def identity(cls) -> GroupElement:
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_matrix(cls, m) -> GroupElement:
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
        return cls(float(m[0, 2]), float(m[1, 2]), math.atan2(m[1, 0], m[0, 0]))

    def to_matrix(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, -s, self.x], [s, c, self.y], [0.0, 0.0, 1.0]])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    def reduced(self) -> GroupElement:
        return GroupElement(self.x, self.y, reduce_angle(self.theta))

    def isclose(self, other: GroupElement, tol: float = EQUALITY_TOL) -> bool:
        return (
            abs(self.x - other.x) <= tol
            and abs(self.y - other.y) <= tol
            and abs(reduce_angle(self.theta - other.theta)) <= tol
        )

    def __matmul__(self, other: GroupElement) -> GroupElement:
        return compose(self, other)


@dataclass(frozen=True)
class AlgebraElement:
    """``a*E13 + b*E23 + c*(E21 - E12)``; also the generator of a one-parameter subgroup."""

    a: float
    b: float
    c: float

    def to_matrix(self) -> np.ndarray:
        return np.array([[0.0, -self.c, self.a], [self.c, 0.0, self.b], [0.0, 0.0, 0.0]])

    @classmethod
    def from_matrix(cls, m) -> AlgebraElement:
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 2]), float(m[1, 2]), float(m[1, 0]))

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])

    def __add__(self, other: AlgebraElement) -> AlgebraElement:
        return AlgebraElement(self.a + other.a, self.b + other.b, self.c + other.c)

    def __neg__(self) -> AlgebraElement:
        return AlgebraElement(-self.a, -self.b, -self.c)

    def __mul__(self, k: float) -> AlgebraElement:
        return AlgebraElement(k * self.a, k * self.b, k * self.c)

    __rmul__ = __mul__


E13 = AlgebraElement(1.0, 0.0, 0.0)
E23 = AlgebraElement(0.0, 1.0, 0.0)
ROT = AlgebraElement(0.0, 0.0, 1.0)  # E21 - E12


def compose(g1: GroupElement, g2: GroupElement) -> GroupElement:
    c, s = math.cos(g1.theta), math.sin(g1.theta)
    return GroupElement(
        g1.x + c * g2.x - s * g2.y,
        g1.y + s * g2.x + c * g2.y,
        g1.theta + g2.theta,
    )


def inverse(g: GroupElement) -> GroupElement:
    c, s = math.cos(g.theta), math.sin(g.theta)
    return GroupElement(-g.x * c - g.y * s, g.x * s - g.y * c, -g.theta)


def bracket(X: AlgebraElement, Y: AlgebraElement) -> AlgebraElement:
    """Matrix commutator XY - YX in the (a, b, c) basis.

    Structure relations: [E13, E23] = 0, [R, E13] = E23, [R, E23] = -E13,
    with R = E21 - E12.
    """
    return AlgebraElement(
        Y.c * X.b - X.c * Y.b,
        X.c * Y.a - Y.c * X.a,
        0.0,
    )


def algebra_exp(X: AlgebraElement, s: float) -> GroupElement:
    """Point at parameter ``s`` of the one-parameter subgroup generated by X."""
    a, b, c = X.a, X.b, X.c
    cs = c * s
    if abs(cs) < EXP_BRANCH_THRESHOLD:
        # second-order Taylor terms keep the branch continuous in c
        return GroupElement(a * s - 0.5 * b * c * s * s, b * s + 0.5 * a * c * s * s, cs)
    sin_cs = math.sin(cs)
    omc = 2.0 * math.sin(0.5 * cs) ** 2  # 1 - cos(cs) without cancellation
    return GroupElement(
        a / c * sin_cs - b / c * omc,
        b / c * sin_cs + a / c * omc,
        cs,
    )


def frame_at(g: GroupElement) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values of X1, X2, X3 at ``g`` in (x, y, theta) coordinates.

    X1 = cos th d/dx + sin th d/dy, X2 = d/dth, X3 = -sin th d/dx + cos th d/dy.
    """
    c, s = math.cos(g.theta), math.sin(g.theta)
    return (
        np.array([c, s, 0.0]),
        np.array([0.0, 0.0, 1.0]),
        np.array([-s, c, 0.0]),
    )


def left_translation_differential(g: GroupElement) -> np.ndarray:
    """Jacobian of h -> g h in (x, y, theta) coordinates (independent of h)."""
    c, s = math.cos(g.theta), math.sin(g.theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
