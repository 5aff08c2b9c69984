"""Parametric curve primitives over the unit parameter interval"""

import logging
import math
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import BSpline

from ..exceptions import GeometryError
from ._tools import (
    PARAM_CLAMP_TOL,
    TWO_PI,
    angle_to_param,
    as_point,
    bbox_diagonal,
    clamp_param,
    golden_section,
    lerp,
    orthonormal_frame,
    resolve_hint,
)

log = logging.getLogger(__name__)

NUM_SEEDS = 64
"""Number of seed intervals used by the generic closest-point search"""


# -----------------------------------------------------------------------------


class ParametricCurve:
    """Base class of all curves ``C: [0, 1] -> R^3``.

    Subclasses implement ``_eval`` (vectorized over parameters) and
    ``_derivatives``. An analytic closest-point projection may be provided
    via ``_analytic_closest``.
    """

    kind: str = None

    def eval(self, t) -> np.ndarray:
        """Evaluates the curve at a parameter or an array of parameters"""
        t = clamp_param(t)
        return self._eval(t)

    def derivatives(self, t: float) -> Tuple[np.ndarray, ...]:
        """Returns ``(C, C', C'')`` at a single parameter value"""
        return self._derivatives(clamp_param(t))

    @cached_property
    def scale(self) -> float:
        """Bounding box diagonal of a coarse sample; at least 1e-300"""
        pts = self._eval(np.linspace(0.0, 1.0, 33))
        return max(bbox_diagonal(pts), 1e-300)

    @cached_property
    def closed(self) -> bool:
        start, end = self._eval(0.0), self._eval(1.0)
        return bool(np.linalg.norm(start - end) <= 1e-12 * self.scale)

    def length(
        self, t0: float = 0.0, t1: float = 1.0, *, n: int = 256
    ) -> float:
        """Polyline approximation of the arc length between two parameters"""
        pts = self._eval(np.linspace(t0, t1, n + 1))
        return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))

    def closest_point(
        self, p, *, hint: Optional[float] = None
    ) -> Tuple[float, float]:
        """Finds the parameter of the point on the curve closest to ``p``.

        Args:
            p: The query point
            hint (float, optional): A parameter close to the expected result;
                restricts the search to its neighbourhood.

        Returns:
            Tuple[float, float]: The parameter and the distance
        """
        p = as_point(p)
        t = self._analytic_closest(p)
        if t is None:
            t = self._seeded_closest(p, hint=resolve_hint(hint))
        return t, float(np.linalg.norm(self._eval(t) - p))

    def _seeded_closest(
        self, p: np.ndarray, *, hint: Optional[float]
    ) -> float:
        def dist2(t: float) -> float:
            d = self._eval(t) - p
            return float(np.dot(d, d))

        h = 1.0 / NUM_SEEDS
        if hint is not None:
            brackets = [(max(hint - 2.0 * h, 0.0), min(hint + 2.0 * h, 1.0))]
        else:
            ts = np.linspace(0.0, 1.0, NUM_SEEDS + 1)
            pts = self._eval(ts)
            d2 = np.sum((pts - p) ** 2, axis=1)
            order = np.argsort(d2, kind="stable")[:3]
            brackets = [
                (ts[max(i - 1, 0)], ts[min(i + 1, NUM_SEEDS)]) for i in order
            ]

        best_t, best_d = None, math.inf
        for a, b in brackets:
            t, d = golden_section(dist2, a, b)
            t, d = self._newton_polish(p, t, d, a, b)
            if d < best_d or (d == best_d and t < best_t):
                best_t, best_d = t, d
        return best_t

    def _newton_polish(
        self, p: np.ndarray, t: float, d2: float, a: float, b: float
    ) -> Tuple[float, float]:
        for _ in range(8):
            c, c1, c2 = self._derivatives(t)
            r = c - p
            g = np.dot(r, c1)
            h = np.dot(c1, c1) + np.dot(r, c2)
            if h <= 0.0:
                break
            t_new = min(max(t - g / h, a), b)
            r_new = self._eval(t_new) - p
            d2_new = float(np.dot(r_new, r_new))
            if d2_new >= d2:
                break
            t, d2 = t_new, d2_new
        return t, d2

    def _analytic_closest(self, p: np.ndarray) -> Optional[float]:
        return None

    def _eval(self, t):
        raise NotImplementedError()

    def _derivatives(self, t: float):
        raise NotImplementedError()


# -----------------------------------------------------------------------------


class LineSegment(ParametricCurve):
    """``C(t) = (1 - t) a + t b``"""

    kind = "line"

    def __init__(self, start, end):
        self.start = as_point(start, name="line start")
        self.end = as_point(end, name="line end")

    def __repr__(self) -> str:
        return f"LineSegment({self.start.tolist()}, {self.end.tolist()})"

    def _eval(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        return (1.0 - t) * self.start + t * self.end

    def _derivatives(self, t):
        d = self.end - self.start
        return self._eval(t), d, np.zeros(3)

    def _analytic_closest(self, p):
        d = self.end - self.start
        dd = np.dot(d, d)
        if dd == 0.0:
            return 0.0
        return float(np.clip(np.dot(p - self.start, d) / dd, 0.0, 1.0))


class CircularArc(ParametricCurve):
    """A circular arc ``c + r (cos θ x + sin θ y)`` with ``θ`` running
    linearly from the first to the second angle"""

    kind = "arc"

    def __init__(
        self,
        center,
        axis,
        radius: float,
        angles: Sequence[float] = (0.0, TWO_PI),
        *,
        ref_direction=None,
    ):
        self.center = as_point(center, name="arc center")
        self.radius = float(radius)
        if not self.radius > 0.0:
            raise GeometryError(f"Arc radius must be positive, got {radius}")

        self.x, self.y, self.axis = orthonormal_frame(axis, ref_direction)
        a0, a1 = (float(a) for a in angles)
        if a0 == a1 or abs(a1 - a0) > TWO_PI + PARAM_CLAMP_TOL:
            raise GeometryError(
                f"Invalid arc angles {angles}; the span must be non-zero and "
                "at most 2π"
            )
        self.angles = (a0, a1)

    def __repr__(self) -> str:
        return (
            f"CircularArc(center={self.center.tolist()}, "
            f"radius={self.radius}, angles={self.angles})"
        )

    @property
    def span(self) -> float:
        return self.angles[1] - self.angles[0]

    def _theta(self, t):
        return lerp(self.angles[0], self.angles[1], t)

    def _eval(self, t):
        th = np.asarray(self._theta(np.asarray(t, dtype=float)))[..., None]
        return self.center + self.radius * (
            np.cos(th) * self.x + np.sin(th) * self.y
        )

    def _derivatives(self, t):
        th = self._theta(t)
        radial = math.cos(th) * self.x + math.sin(th) * self.y
        tangent = -math.sin(th) * self.x + math.cos(th) * self.y
        s = self.span
        return (
            self.center + self.radius * radial,
            s * self.radius * tangent,
            -(s**2) * self.radius * radial,
        )

    def _analytic_closest(self, p):
        q = p - self.center
        qx, qy = np.dot(q, self.x), np.dot(q, self.y)
        if qx == 0.0 and qy == 0.0:
            return 0.0
        return angle_to_param(math.atan2(qy, qx), *self.angles)


class BSplineCurve(ParametricCurve):
    """A non-rational B-spline curve of degree 1 to 3.

    The knot vector is normalized such that the base interval maps onto
    ``[0, 1]``.
    """

    kind = "bspline"

    def __init__(self, degree: int, knots: Sequence[float], control_points):
        self.degree = int(degree)
        ctrl = np.asarray(control_points, dtype=float)
        knots = np.asarray(knots, dtype=float)

        if not 1 <= self.degree <= 3:
            raise GeometryError(
                f"B-spline degree must be between 1 and 3, got {degree}"
            )
        if ctrl.ndim != 2 or ctrl.shape[1] != 3:
            raise GeometryError("B-spline control points need shape (n, 3)")
        self.knots = normalize_knots(knots, self.degree, len(ctrl))
        self.control_points = ctrl
        self._spl = BSpline(self.knots, ctrl, self.degree, extrapolate=True)

    def __repr__(self) -> str:
        return (
            f"BSplineCurve(degree={self.degree}, "
            f"num_ctrl={len(self.control_points)})"
        )

    @cached_property
    def _d1(self):
        return self._spl.derivative(1)

    @cached_property
    def _d2(self):
        if self.degree < 2:
            return None
        return self._spl.derivative(2)

    def _eval(self, t):
        return np.asarray(self._spl(np.clip(t, 0.0, 1.0)))

    def _derivatives(self, t):
        c2 = np.zeros(3) if self._d2 is None else np.asarray(self._d2(t))
        return self._eval(t), np.asarray(self._d1(t)), c2


def normalize_knots(
    knots: np.ndarray, degree: int, num_ctrl: int, *, name: str = "knot vector"
) -> np.ndarray:
    """Validates a clamped or unclamped knot vector and maps its base
    interval ``[t_k, t_n]`` onto ``[0, 1]``"""
    if knots.ndim != 1 or len(knots) != num_ctrl + degree + 1:
        raise GeometryError(
            f"The {name} needs {num_ctrl + degree + 1} entries for "
            f"{num_ctrl} control points of degree {degree}, got {len(knots)}"
        )
    if not np.all(np.isfinite(knots)) or np.any(np.diff(knots) < 0.0):
        raise GeometryError(f"The {name} must be finite and non-decreasing")

    _, counts = np.unique(knots, return_counts=True)
    if np.any(counts > degree + 1):
        raise GeometryError(
            f"The {name} has a knot of multiplicity above {degree + 1}"
        )

    lo, hi = knots[degree], knots[num_ctrl]
    if not hi > lo:
        raise GeometryError(f"The base interval of the {name} is empty")
    return (knots - lo) / (hi - lo)


# -----------------------------------------------------------------------------


def curve_eval(curve: ParametricCurve, t) -> np.ndarray:
    """Evaluates a curve; ``t`` is clamped to [0, 1] within 1e-12"""
    return curve.eval(t)


def curve_closest_point(
    curve: ParametricCurve, p, *, hint: Optional[float] = None
) -> Tuple[float, float]:
    """Returns ``(t, distance)`` of the curve point closest to ``p``"""
    return curve.closest_point(p, hint=hint)

