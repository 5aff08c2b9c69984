"""Numerical helpers shared by curve and surface primitives"""

import math
from typing import Callable, Optional, Tuple

import numpy as np

from ..exceptions import GeometryError

TWO_PI = 2.0 * math.pi

PARAM_CLAMP_TOL = 1e-12
"""Parameters this far outside the unit interval are clamped silently"""

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# -----------------------------------------------------------------------------


def as_point(p, *, name: str = "point") -> np.ndarray:
    """Converts to a float array of shape (3,)"""
    arr = np.asarray(p, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise GeometryError(f"Invalid {name} {p!r}; need three finite values")
    return arr


def unit(vec, *, name: str = "direction") -> np.ndarray:
    vec = as_point(vec, name=name)
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise GeometryError(f"The {name} must not be a zero vector")
    return vec / norm


def orthonormal_frame(
    axis, ref_direction=None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns ``(x, y, z)`` with ``z`` along ``axis``.

    Without a reference direction, ``x`` is derived from the world axis that
    is least aligned with ``axis`` (lowest index on ties), e.g. ``+x`` for a
    ``+z`` axis.
    """
    z = unit(axis, name="axis")
    if ref_direction is None:
        ref = np.eye(3)[int(np.argmin(np.abs(z)))]
    else:
        ref = as_point(ref_direction, name="reference direction")

    x = ref - np.dot(ref, z) * z
    norm = np.linalg.norm(x)
    if norm < 1e-12:
        raise GeometryError(
            "The reference direction must not be parallel to the axis"
        )
    x /= norm
    y = np.cross(z, x)
    return x, y, z


def clamp_param(t, *, name: str = "t"):
    """Clamps parameters to [0, 1]; values further than
    :py:data:`PARAM_CLAMP_TOL` outside the interval are rejected."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < -PARAM_CLAMP_TOL) or np.any(arr > 1.0 + PARAM_CLAMP_TOL):
        raise ValueError(
            f"Parameter {name} = {t!r} is outside of the unit interval"
        )
    clamped = np.clip(arr, 0.0, 1.0)
    if clamped.ndim == 0:
        return float(clamped)
    return clamped


def lerp(a: float, b: float, t):
    """Linear interpolation that reproduces both endpoints exactly"""
    return (1.0 - t) * a + t * b


def normalize_range(
    lo: float, hi: float, *, padding: float = 1e-10, name: str = "range"
) -> Tuple[float, float]:
    """Validates a parameter range; (nearly) empty ranges are padded"""
    lo, hi = float(lo), float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise GeometryError(f"The {name} [{lo}, {hi}] is not finite")
    if abs(hi - lo) < padding:
        mid = 0.5 * (lo + hi)
        sign = 1.0 if hi >= lo else -1.0
        return mid - sign * padding, mid + sign * padding
    return lo, hi


def angle_to_param(phi: float, a0: float, a1: float) -> float:
    """Maps an angle onto the parameter of the angular range ``[a0, a1]``
    (which may run in negative direction). Angles outside the range go to
    the angularly closer end."""
    span = a1 - a0
    width = abs(span)
    sign = 1.0 if span >= 0.0 else -1.0
    offset = float(np.mod(sign * (phi - a0), TWO_PI))
    if offset <= width:
        return min(offset / width, 1.0)

    dist_to_start = TWO_PI - offset
    dist_to_end = offset - width
    return 0.0 if dist_to_start <= dist_to_end else 1.0


def golden_section(
    f: Callable[[float], float], a: float, b: float, *, tol: float = 1e-15
) -> Tuple[float, float]:
    """Minimizes a unimodal scalar function on ``[a, b]``.

    Returns:
        Tuple[float, float]: The argument and value of the minimum, also
            considering the interval ends.
    """
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)

    candidates = [(fc, c), (fd, d), (f(a), a), (f(b), b)]
    fbest, xbest = min(candidates)
    return xbest, fbest


def bbox_diagonal(points: np.ndarray) -> float:
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(points) == 0:
        return 0.0
    return float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))


def resolve_hint(hint: Optional[float]) -> Optional[float]:
    if hint is None:
        return None
    return float(np.clip(hint, 0.0, 1.0))
