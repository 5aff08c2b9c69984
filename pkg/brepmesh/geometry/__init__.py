"""Curve and surface primitives over normalized parameter domains"""

from .curves import (
    BSplineCurve,
    CircularArc,
    LineSegment,
    ParametricCurve,
    curve_closest_point,
    curve_eval,
)
from .surfaces import (
    BSplinePatch,
    Cone,
    Cylinder,
    ParametricSurface,
    Plane,
    Sphere,
    Torus,
    surface_closest_point,
    surface_eval,
)
