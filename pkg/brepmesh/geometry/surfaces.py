"""Parametric surface primitives over the unit square.

Every surface maps ``[0, 1]^2`` into space. Periodic directions and singular
domain sides (sides that collapse onto a single point) are detected
numerically, so B-spline patches and analytic surfaces are treated alike.
"""

import copy
import logging
import math
from functools import cached_property
from typing import FrozenSet, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import BSpline

from ..exceptions import GeometryError
from ._tools import (
    TWO_PI,
    angle_to_param,
    as_point,
    bbox_diagonal,
    clamp_param,
    golden_section,
    lerp,
    normalize_range,
    orthonormal_frame,
)
from .curves import normalize_knots

log = logging.getLogger(__name__)

GRID_CELLS = 64
"""Cells per direction of the seed grid used for closest-point queries"""

STRUCTURE_TOL = 1e-12
"""Relative tolerance for detecting periodic directions and singular sides"""

SIDES = ("u0", "u1", "v0", "v1")


# -----------------------------------------------------------------------------


class ParametricSurface:
    """Base class of all surfaces ``S: [0, 1]^2 -> R^3``.

    Subclasses implement the vectorized ``_eval`` and the scalar
    ``_partials``, which returns ``(S, Su, Sv, Suu, Suv, Svv)``.
    """

    kind: str = None

    range_attrs: Tuple[str, ...] = ()
    """Attributes holding the non-angular parameter ranges"""

    # .. Evaluation ...........................................................

    def eval(self, u, v) -> np.ndarray:
        """Evaluates the surface; arrays of parameters are broadcast.

        On periodic directions the parameter value 1 is identified with 0,
        such that both evaluate to the identical point.
        """
        u = clamp_param(u, name="u")
        v = clamp_param(v, name="v")
        pu, pv = self.periodic
        if pu:
            u = np.where(np.asarray(u) >= 1.0, 0.0, u)
        if pv:
            v = np.where(np.asarray(v) >= 1.0, 0.0, v)
        return self._eval(
            np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        )

    def partials(self, u: float, v: float) -> Tuple[np.ndarray, ...]:
        """First and second partial derivatives at a single parameter pair"""
        return self._partials(
            clamp_param(u, name="u"), clamp_param(v, name="v")
        )

    def normal(self, u: float, v: float) -> np.ndarray:
        """Unit normal ``Su x Sv``; zero at singular points"""
        _, su, sv, *_ = self.partials(u, v)
        n = np.cross(su, sv)
        norm = np.linalg.norm(n)
        return n / norm if norm > 0.0 else n

    # .. Structure ............................................................

    def padded(self, padding: float) -> "ParametricSurface":
        """A copy whose nearly empty parameter ranges are widened to a width
        of ``2 * padding`` around their midpoint, for sampling degenerate
        domains; returns the surface itself if no range needs padding"""
        update = {}
        for name in self.range_attrs:
            old = tuple(getattr(self, name))
            new = normalize_range(*old, padding=padding, name=name)
            if new != old:
                update[name] = new
        if not update:
            return self

        surface = copy.copy(self)
        cls = type(self)
        surface.__dict__ = {
            k: v
            for k, v in self.__dict__.items()
            if not isinstance(getattr(cls, k, None), cached_property)
        }
        surface.__dict__.update(update)
        log.debug("Padded the domain of %s: %s", self, update)
        return surface

    @cached_property
    def scale(self) -> float:
        s = np.linspace(0.0, 1.0, 9)
        uu, vv = np.meshgrid(s, s, indexing="ij")
        return max(bbox_diagonal(self._eval(uu, vv)), 1e-300)

    @cached_property
    def periodic(self) -> Tuple[bool, bool]:
        """Whether the surface closes up in ``u`` and ``v``, respectively"""
        s = np.linspace(0.0, 1.0, 17)
        zeros, ones = np.zeros_like(s), np.ones_like(s)
        tol = STRUCTURE_TOL * self.scale

        def same(a, b) -> bool:
            return bool(np.all(np.linalg.norm(a - b, axis=-1) <= tol))

        return (
            same(self._eval(zeros, s), self._eval(ones, s)),
            same(self._eval(s, zeros), self._eval(s, ones)),
        )

    @cached_property
    def singular_sides(self) -> FrozenSet[str]:
        """Sides of the domain along which the surface degenerates to a
        point, named ``u0``, ``u1``, ``v0`` and ``v1``"""
        s = np.linspace(0.0, 1.0, 17)
        tol = STRUCTURE_TOL * self.scale
        sides = set()
        for name, (uu, vv) in (
            ("u0", (np.zeros_like(s), s)),
            ("u1", (np.ones_like(s), s)),
            ("v0", (s, np.zeros_like(s))),
            ("v1", (s, np.ones_like(s))),
        ):
            pts = self._eval(uu, vv)
            if np.all(np.linalg.norm(pts - pts[0], axis=-1) <= tol):
                sides.add(name)
        return frozenset(sides)

    @cached_property
    def second_derivative_bounds(self) -> Tuple[float, float, float]:
        """Sampled maxima of ``|Suu|``, ``|Suv|`` and ``|Svv|``"""
        s = np.linspace(0.0, 1.0, 17)
        maxima = np.zeros(3)
        for u in s:
            for v in s:
                _, _, _, suu, suv, svv = self._partials(float(u), float(v))
                norms = [np.linalg.norm(d) for d in (suu, suv, svv)]
                maxima = np.maximum(maxima, norms)
        return tuple(float(m) for m in maxima)

    # .. Closest point ........................................................

    def closest_point(
        self, p, *, hint: Optional[Tuple[float, float]] = None
    ) -> Tuple[float, float, float]:
        """Finds the parameters of the surface point closest to ``p``.

        Args:
            p: The query point
            hint (Tuple[float, float], optional): Parameters close to the
                expected result; the search then starts there instead of on
                the seed grid.

        Returns:
            Tuple[float, float, float]: ``(u, v, distance)``
        """
        p = as_point(p)
        uv = self._analytic_closest(p)
        if uv is not None:
            u, v = uv
            if u in (0.0, 1.0) or v in (0.0, 1.0):
                u, v, _ = self._polish(p, u, v, (0.0, 1.0, 0.0, 1.0))
        elif hint is not None:
            u, v = (float(np.clip(x, 0.0, 1.0)) for x in hint)
            u, v, _ = self._polish(p, u, v, self._cell_bounds(u, v, 2))
            u, v, _ = self._polish(p, u, v, (0.0, 1.0, 0.0, 1.0))
        else:
            u, v = self._seeded_closest(p)

        return u, v, float(np.linalg.norm(self._eval(u, v) - p))

    @cached_property
    def _seed_grid(self) -> np.ndarray:
        s = np.linspace(0.0, 1.0, GRID_CELLS + 1)
        uu, vv = np.meshgrid(s, s, indexing="ij")
        return self._eval(uu, vv)

    def _cell_bounds(self, u: float, v: float, cells: int = 1):
        h = cells / GRID_CELLS
        return (
            max(u - h, 0.0),
            min(u + h, 1.0),
            max(v - h, 0.0),
            min(v + h, 1.0),
        )

    def _seeded_closest(self, p: np.ndarray) -> Tuple[float, float]:
        d2 = np.sum((self._seed_grid - p) ** 2, axis=-1).ravel()
        order = np.argsort(d2, kind="stable")[:4]

        best = (math.inf, 0.0, 0.0)
        for idx in order:
            i, j = divmod(int(idx), GRID_CELLS + 1)
            u, v = i / GRID_CELLS, j / GRID_CELLS
            u, v, f = self._polish(p, u, v, self._cell_bounds(u, v))
            if f < best[0]:
                best = (f, u, v)

        _, u, v = best
        u, v, _ = self._polish(p, u, v, (0.0, 1.0, 0.0, 1.0))
        return u, v

    def _polish(
        self, p: np.ndarray, u: float, v: float, bounds
    ) -> Tuple[float, float, float]:
        """Damped Newton iteration on the squared distance within ``bounds``,
        with a coordinate-wise golden-section fallback"""
        u0, u1, v0, v1 = bounds

        def dist2(u: float, v: float) -> float:
            d = self._eval(u, v) - p
            return float(np.dot(d, d))

        f = dist2(u, v)
        for it in range(30):
            s, su, sv, suu, suv, svv = self._partials(u, v)
            r = s - p
            g = np.array([np.dot(r, su), np.dot(r, sv)])
            if f <= 0.0 or not np.any(_free_gradient(g, u, v, bounds)):
                break
            jtj = np.array(
                [
                    [np.dot(su, su), np.dot(su, sv)],
                    [np.dot(su, sv), np.dot(sv, sv)],
                ]
            )
            hess = jtj + np.array(
                [
                    [np.dot(r, suu), np.dot(r, suv)],
                    [np.dot(r, suv), np.dot(r, svv)],
                ]
            )
            if hess[0, 0] <= 0.0 or np.linalg.det(hess) <= 0.0:
                hess = jtj + (1e-12 * np.trace(jtj) + 1e-300) * np.eye(2)
            try:
                step = -np.linalg.solve(hess, g)
            except np.linalg.LinAlgError:
                step = -g

            alpha, improved = 1.0, False
            for _ in range(20):
                un = min(max(u + alpha * step[0], u0), u1)
                vn = min(max(v + alpha * step[1], v0), v1)
                fn = dist2(un, vn)
                if fn < f:
                    improved = True
                    break
                alpha *= 0.5

            if not improved:
                if it == 0:
                    return self._coordinate_search(p, u, v, bounds, f)
                break

            moved = abs(un - u) + abs(vn - v)
            u, v, f = un, vn, fn
            if moved < 1e-16:
                break

        return u, v, f

    def _coordinate_search(self, p, u, v, bounds, f):
        u0, u1, v0, v1 = bounds

        def dist2(u: float, v: float) -> float:
            return float(np.sum((self._eval(u, v) - p) ** 2))

        # Only ever moves to strictly better points
        for _ in range(3):
            un, _ = golden_section(lambda x: dist2(x, v), u0, u1)
            vn, fn = golden_section(lambda y: dist2(un, y), v0, v1)
            if fn >= f:
                break
            u, v, f = un, vn, fn
        return u, v, f

    # .. Interface for subclasses .............................................

    def _analytic_closest(
        self, p: np.ndarray
    ) -> Optional[Tuple[float, float]]:
        return None

    def _eval(self, u, v):
        raise NotImplementedError()

    def _partials(self, u: float, v: float):
        raise NotImplementedError()


# -----------------------------------------------------------------------------


def _free_gradient(g: np.ndarray, u: float, v: float, bounds) -> np.ndarray:
    """Zeroes the gradient components that point out of the bounds"""
    u0, u1, v0, v1 = bounds
    g = g.copy()
    if (u <= u0 and g[0] > 0.0) or (u >= u1 and g[0] < 0.0):
        g[0] = 0.0
    if (v <= v0 and g[1] > 0.0) or (v >= v1 and g[1] < 0.0):
        g[1] = 0.0
    return g


def _angles(angles: Sequence[float], name: str) -> Tuple[float, float]:
    a0, a1 = (float(a) for a in angles)
    if a0 == a1 or abs(a1 - a0) > TWO_PI + 1e-12:
        raise GeometryError(
            f"Invalid {name} {angles}; the span must be non-zero and at "
            "most 2π"
        )
    return a0, a1


class Plane(ParametricSurface):
    """``S(u, v) = o + u U + v V``"""

    kind = "plane"

    def __init__(self, origin, u_vec, v_vec):
        self.origin = as_point(origin, name="plane origin")
        self.u_vec = as_point(u_vec, name="plane u vector")
        self.v_vec = as_point(v_vec, name="plane v vector")
        if np.linalg.norm(np.cross(self.u_vec, self.v_vec)) == 0.0:
            raise GeometryError("The plane spanning vectors are parallel")

    def __repr__(self) -> str:
        return (
            f"Plane(origin={self.origin.tolist()}, u={self.u_vec.tolist()}, "
            f"v={self.v_vec.tolist()})"
        )

    def _eval(self, u, v):
        u = np.asarray(u)[..., None]
        v = np.asarray(v)[..., None]
        return self.origin + u * self.u_vec + v * self.v_vec

    def _partials(self, u, v):
        z = np.zeros(3)
        return self._eval(u, v), self.u_vec, self.v_vec, z, z, z

    def _analytic_closest(self, p):
        a = np.stack([self.u_vec, self.v_vec], axis=1)
        sol, *_ = np.linalg.lstsq(a, p - self.origin, rcond=None)
        return tuple(float(x) for x in np.clip(sol, 0.0, 1.0))


class Cylinder(ParametricSurface):
    """A cylinder around an axis through ``origin``; ``u`` runs along the
    angle range, ``v`` along the height range"""

    kind = "cylinder"
    range_attrs = ("heights",)

    def __init__(
        self,
        origin,
        axis,
        radius: float,
        heights: Sequence[float] = (0.0, 1.0),
        angles: Sequence[float] = (0.0, TWO_PI),
        *,
        ref_direction=None,
    ):
        self.origin = as_point(origin, name="cylinder origin")
        self.x, self.y, self.axis = orthonormal_frame(axis, ref_direction)
        self.radius = float(radius)
        if not self.radius > 0.0:
            raise GeometryError(f"Cylinder radius must be positive: {radius}")
        self.heights = normalize_range(*heights, name="height range")
        self.angles = _angles(angles, "cylinder angle range")

    def __repr__(self) -> str:
        return f"Cylinder(radius={self.radius}, heights={self.heights})"

    def _eval(self, u, v):
        th = np.asarray(lerp(*self.angles, np.asarray(u)))[..., None]
        h = np.asarray(lerp(*self.heights, np.asarray(v)))[..., None]
        radial = np.cos(th) * self.x + np.sin(th) * self.y
        return self.origin + self.radius * radial + h * self.axis

    def _partials(self, u, v):
        th = lerp(*self.angles, u)
        da = self.angles[1] - self.angles[0]
        dh = self.heights[1] - self.heights[0]
        radial = math.cos(th) * self.x + math.sin(th) * self.y
        tangent = -math.sin(th) * self.x + math.cos(th) * self.y
        z = np.zeros(3)
        return (
            self._eval(u, v),
            da * self.radius * tangent,
            dh * self.axis,
            -(da**2) * self.radius * radial,
            z,
            z,
        )

    def _analytic_closest(self, p):
        q = p - self.origin
        qx, qy = np.dot(q, self.x), np.dot(q, self.y)
        u = 0.0
        if qx != 0.0 or qy != 0.0:
            u = angle_to_param(math.atan2(qy, qx), *self.angles)
        h0, h1 = self.heights
        v = float(np.clip((np.dot(q, self.axis) - h0) / (h1 - h0), 0.0, 1.0))
        return u, v


class Cone(ParametricSurface):
    """A cone with apex and axis; ``v`` runs along the height range
    (measured from the apex), the radius at height ``h`` being
    ``h tan(half_angle)``"""

    kind = "cone"
    range_attrs = ("heights",)

    def __init__(
        self,
        apex,
        axis,
        half_angle: float,
        heights: Sequence[float] = (0.0, 1.0),
        angles: Sequence[float] = (0.0, TWO_PI),
        *,
        ref_direction=None,
    ):
        self.apex = as_point(apex, name="cone apex")
        self.x, self.y, self.axis = orthonormal_frame(axis, ref_direction)
        self.half_angle = float(half_angle)
        if not 0.0 < self.half_angle < 0.5 * math.pi:
            raise GeometryError(
                f"Cone half angle must be in (0, π/2), got {half_angle}"
            )
        self.heights = normalize_range(*heights, name="height range")
        if min(self.heights) < 0.0:
            raise GeometryError("Cone heights must not be negative")
        self.angles = _angles(angles, "cone angle range")
        self._tan = math.tan(self.half_angle)

    def __repr__(self) -> str:
        return f"Cone(half_angle={self.half_angle}, heights={self.heights})"

    def _eval(self, u, v):
        th = np.asarray(lerp(*self.angles, np.asarray(u)))[..., None]
        h = np.asarray(lerp(*self.heights, np.asarray(v)))[..., None]
        radial = np.cos(th) * self.x + np.sin(th) * self.y
        return self.apex + h * (self.axis + self._tan * radial)

    def _partials(self, u, v):
        th = lerp(*self.angles, u)
        h = lerp(*self.heights, v)
        da = self.angles[1] - self.angles[0]
        dh = self.heights[1] - self.heights[0]
        radial = math.cos(th) * self.x + math.sin(th) * self.y
        tangent = -math.sin(th) * self.x + math.cos(th) * self.y
        return (
            self._eval(u, v),
            da * h * self._tan * tangent,
            dh * (self.axis + self._tan * radial),
            -(da**2) * h * self._tan * radial,
            da * dh * self._tan * tangent,
            np.zeros(3),
        )

    def _analytic_closest(self, p):
        q = p - self.apex
        qx, qy = np.dot(q, self.x), np.dot(q, self.y)
        rho = math.hypot(qx, qy)
        u = 0.0
        if rho > 0.0:
            u = angle_to_param(math.atan2(qy, qx), *self.angles)

        # Distance along the generator line, then back to the axial height
        sin_a, cos_a = math.sin(self.half_angle), math.cos(self.half_angle)
        s = max(0.0, rho * sin_a + np.dot(q, self.axis) * cos_a)
        h = s * cos_a
        h0, h1 = self.heights
        v = float(np.clip((h - h0) / (h1 - h0), 0.0, 1.0))
        return u, v


class Sphere(ParametricSurface):
    """A sphere with ``u`` along the longitude range and ``v`` along the
    colatitude range; ``v = 0`` is the north pole by default"""

    kind = "sphere"
    range_attrs = ("colatitudes",)

    def __init__(
        self,
        center,
        radius: float,
        *,
        axis=(0.0, 0.0, 1.0),
        ref_direction=None,
        angles: Sequence[float] = (0.0, TWO_PI),
        colatitudes: Sequence[float] = (0.0, math.pi),
    ):
        self.center = as_point(center, name="sphere center")
        self.radius = float(radius)
        if not self.radius > 0.0:
            raise GeometryError(f"Sphere radius must be positive: {radius}")
        self.x, self.y, self.axis = orthonormal_frame(axis, ref_direction)
        self.angles = _angles(angles, "longitude range")
        c0, c1 = normalize_range(*colatitudes, name="colatitude range")
        if min(c0, c1) < 0.0 or max(c0, c1) > math.pi:
            raise GeometryError("Colatitudes must lie within [0, π]")
        self.colatitudes = (c0, c1)

    def __repr__(self) -> str:
        return f"Sphere(center={self.center.tolist()}, radius={self.radius})"

    def _eval(self, u, v):
        th = np.asarray(lerp(*self.angles, np.asarray(u)))[..., None]
        ph = np.asarray(lerp(*self.colatitudes, np.asarray(v)))[..., None]
        return self.center + self.radius * (
            np.sin(ph) * (np.cos(th) * self.x + np.sin(th) * self.y)
            + np.cos(ph) * self.axis
        )

    def _partials(self, u, v):
        th = lerp(*self.angles, u)
        ph = lerp(*self.colatitudes, v)
        da = self.angles[1] - self.angles[0]
        dc = self.colatitudes[1] - self.colatitudes[0]
        r = self.radius
        radial = math.cos(th) * self.x + math.sin(th) * self.y
        tangent = -math.sin(th) * self.x + math.cos(th) * self.y
        sp, cp = math.sin(ph), math.cos(ph)
        return (
            self._eval(u, v),
            da * r * sp * tangent,
            dc * r * (cp * radial - sp * self.axis),
            -(da**2) * r * sp * radial,
            da * dc * r * cp * tangent,
            -(dc**2) * r * (sp * radial + cp * self.axis),
        )

    def _analytic_closest(self, p):
        q = p - self.center
        norm = np.linalg.norm(q)
        if norm == 0.0:
            return 0.0, 0.0
        ph = math.acos(float(np.clip(np.dot(q, self.axis) / norm, -1.0, 1.0)))
        qx, qy = np.dot(q, self.x), np.dot(q, self.y)
        u = 0.0
        if qx != 0.0 or qy != 0.0:
            u = angle_to_param(math.atan2(qy, qx), *self.angles)
        c0, c1 = self.colatitudes
        v = float(np.clip((ph - c0) / (c1 - c0), 0.0, 1.0))
        return u, v


class Torus(ParametricSurface):
    """A torus; ``u`` runs around the axis, ``v`` around the tube"""

    kind = "torus"

    def __init__(
        self,
        center,
        axis,
        major_radius: float,
        minor_radius: float,
        *,
        ref_direction=None,
        angles: Sequence[float] = (0.0, TWO_PI),
        tube_angles: Sequence[float] = (0.0, TWO_PI),
    ):
        self.center = as_point(center, name="torus center")
        self.x, self.y, self.axis = orthonormal_frame(axis, ref_direction)
        self.major_radius = float(major_radius)
        self.minor_radius = float(minor_radius)
        if not self.major_radius > self.minor_radius > 0.0:
            raise GeometryError(
                "Torus radii must satisfy major > minor > 0, got "
                f"{major_radius} and {minor_radius}"
            )
        self.angles = _angles(angles, "torus angle range")
        self.tube_angles = _angles(tube_angles, "torus tube angle range")

    def __repr__(self) -> str:
        return f"Torus(R={self.major_radius}, r={self.minor_radius})"

    def _eval(self, u, v):
        th = np.asarray(lerp(*self.angles, np.asarray(u)))[..., None]
        ps = np.asarray(lerp(*self.tube_angles, np.asarray(v)))[..., None]
        radial = np.cos(th) * self.x + np.sin(th) * self.y
        return (
            self.center
            + (self.major_radius + self.minor_radius * np.cos(ps)) * radial
            + self.minor_radius * np.sin(ps) * self.axis
        )

    def _partials(self, u, v):
        th = lerp(*self.angles, u)
        ps = lerp(*self.tube_angles, v)
        da = self.angles[1] - self.angles[0]
        dt = self.tube_angles[1] - self.tube_angles[0]
        big, r = self.major_radius, self.minor_radius
        radial = math.cos(th) * self.x + math.sin(th) * self.y
        tangent = -math.sin(th) * self.x + math.cos(th) * self.y
        ring = big + r * math.cos(ps)
        return (
            self._eval(u, v),
            da * ring * tangent,
            dt * r * (-math.sin(ps) * radial + math.cos(ps) * self.axis),
            -(da**2) * ring * radial,
            -da * dt * r * math.sin(ps) * tangent,
            -(dt**2) * r * (math.cos(ps) * radial + math.sin(ps) * self.axis),
        )

    def _analytic_closest(self, p):
        q = p - self.center
        qx, qy = np.dot(q, self.x), np.dot(q, self.y)
        th = 0.0 if qx == qy == 0.0 else math.atan2(qy, qx)
        radial = math.cos(th) * self.x + math.sin(th) * self.y
        w = q - self.major_radius * radial
        wr, wz = np.dot(w, radial), np.dot(w, self.axis)
        ps = 0.0 if wr == wz == 0.0 else math.atan2(wz, wr)
        return (
            angle_to_param(th, *self.angles),
            angle_to_param(ps, *self.tube_angles),
        )


class BSplinePatch(ParametricSurface):
    """A tensor-product, non-rational B-spline patch.

    Both knot vectors are normalized such that the base intervals map onto
    the unit square.
    """

    kind = "bspline"

    def __init__(
        self,
        degrees: Sequence[int],
        knots_u: Sequence[float],
        knots_v: Sequence[float],
        control_points,
    ):
        ctrl = np.asarray(control_points, dtype=float)
        if ctrl.ndim != 3 or ctrl.shape[2] != 3:
            raise GeometryError(
                "B-spline patch control points need shape (nu, nv, 3)"
            )
        ku, kv = (int(d) for d in degrees)
        for k in (ku, kv):
            if not 1 <= k <= 3:
                raise GeometryError(
                    f"B-spline degrees must be between 1 and 3, got {degrees}"
                )
        nu, nv, _ = ctrl.shape
        self.degrees = (ku, kv)
        self.knots_u = normalize_knots(
            np.asarray(knots_u, dtype=float), ku, nu, name="u knot vector"
        )
        self.knots_v = normalize_knots(
            np.asarray(knots_v, dtype=float), kv, nv, name="v knot vector"
        )
        self.control_points = ctrl
        self._basis_u = BSpline(self.knots_u, np.eye(nu), ku)
        self._basis_v = BSpline(self.knots_v, np.eye(nv), kv)

    def __repr__(self) -> str:
        nu, nv, _ = self.control_points.shape
        return f"BSplinePatch(degrees={self.degrees}, ctrl={nu}x{nv})"

    @cached_property
    def _derivative_bases(self):
        def derive(basis, k, n):
            d1 = basis.derivative(1)
            d2 = basis.derivative(2) if k >= 2 else None
            return d1, d2, n

        nu, nv, _ = self.control_points.shape
        return (
            derive(self._basis_u, self.degrees[0], nu),
            derive(self._basis_v, self.degrees[1], nv),
        )

    def _eval(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        shape = u.shape
        bu = self._basis_u(np.clip(u.ravel(), 0.0, 1.0))
        bv = self._basis_v(np.clip(v.ravel(), 0.0, 1.0))
        pts = np.einsum("mi,ijd,mj->md", bu, self.control_points, bv)
        return pts.reshape(shape + (3,))

    def _partials(self, u, v):
        (du1, du2, nu), (dv1, dv2, nv) = self._derivative_bases
        bu = self._basis_u(u)
        bv = self._basis_v(v)
        bu1, bv1 = du1(u), dv1(v)
        bu2 = du2(u) if du2 is not None else np.zeros(nu)
        bv2 = dv2(v) if dv2 is not None else np.zeros(nv)
        c = self.control_points

        def combine(a, b):
            return np.einsum("i,ijd,j->d", a, c, b)

        return (
            combine(bu, bv),
            combine(bu1, bv),
            combine(bu, bv1),
            combine(bu2, bv),
            combine(bu1, bv1),
            combine(bu, bv2),
        )


# -----------------------------------------------------------------------------


def surface_eval(surface: ParametricSurface, u, v) -> np.ndarray:
    return surface.eval(u, v)


def surface_closest_point(
    surface: ParametricSurface, p, *, hint=None
) -> Tuple[float, float, float]:
    """Returns ``(u, v, distance)`` of the surface point closest to ``p``"""
    return surface.closest_point(p, hint=hint)
