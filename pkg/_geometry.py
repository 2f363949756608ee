# This software is released under the GNU General Public License v3.0
# https://opensource.org/licenses/GPL-3.0

# Convex polygon representation: validation, signed area and centroid
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, Tuple

import numpy as np

# absolute epsilon on the cross product of successive edge vectors
default_convexity_eps = 1e-12


class GeometryError(ValueError):
    """Base for invalid geometric input."""


class TooFewVertices(GeometryError):
    pass


class NotConvex(GeometryError):
    pass


class DegenerateEdge(GeometryError):
    pass


class NonFinite(GeometryError):
    pass


class GeneratorCollision(GeometryError):
    pass


class InvalidParameter(GeometryError):
    pass


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class ConvexPolygon:
    """A strictly convex polygon with vertices in CCW order"""

    vertices: Tuple[Point2, ...]
    reversed_input: bool = False  # True if the input was CW and got reversed
    xs: np.ndarray = field(init=False, repr=False, compare=False)
    ys: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        xs = np.array([v.x for v in self.vertices], dtype=np.float64)
        ys = np.array([v.y for v in self.vertices], dtype=np.float64)
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edges(self) -> Iterable[Tuple[Point2, Point2]]:
        """Edges as (q_i, q_j) pairs; edge k runs from vertex k to vertex k+1"""
        for i, q_i in enumerate(self.vertices):
            yield q_i, self.vertices[(i + 1) % self.n]


def _as_point(value) -> Point2:
    try:
        x, y = value
        return Point2(float(x), float(y))
    except (TypeError, ValueError) as err:
        raise GeometryError(f"Not a 2D point: {value!r}") from err


def _cross_products(vertices: Sequence[Point2]) -> Tuple[float, ...]:
    n = len(vertices)
    crosses = []
    for i in range(n):
        ax, ay = vertices[i - 1]
        bx, by = vertices[i]
        cx, cy = vertices[(i + 1) % n]
        crosses.append((bx - ax) * (cy - by) - (by - ay) * (cx - bx))
    return tuple(crosses)


def validate_polygon(
    vertices: Iterable, eps: float = default_convexity_eps
) -> ConvexPolygon:
    """
    Validate a vertex list as a strictly convex polygon.
    CW input is accepted and reversed to CCW.

    :param vertices: sequence of (x, y) pairs
    :param eps: absolute epsilon on the successive edge cross products
    :return:
    """
    points = [_as_point(v) for v in vertices]
    if len(points) < 3:
        raise TooFewVertices(f"A polygon needs at least 3 vertices, got {len(points)}")
    for p in points:
        if not (math.isfinite(p.x) and math.isfinite(p.y)):
            raise NonFinite(f"Non-finite coordinate in vertex {p}")
    n = len(points)
    for i, p in enumerate(points):
        if p == points[(i + 1) % n]:
            raise DegenerateEdge(f"Repeated consecutive vertex {p} at index {i}")

    reversed_input = False
    if _signed_area(points) < 0:
        points.reverse()
        reversed_input = True

    for i, cross in enumerate(_cross_products(points)):
        if cross <= eps:
            raise NotConvex(
                f"Reflex or collinear vertex {points[i]} (cross={cross:.3g})"
            )
    # all left turns but winding more than once, e.g. a pentagram
    if _total_turning(points) > 3 * math.pi:
        raise NotConvex("Self-intersecting vertex order")
    return ConvexPolygon(vertices=tuple(points), reversed_input=reversed_input)


def _total_turning(vertices: Sequence[Point2]) -> float:
    n = len(vertices)
    total = 0.0
    for i in range(n):
        ax, ay = vertices[i - 1]
        bx, by = vertices[i]
        cx, cy = vertices[(i + 1) % n]
        ux, uy = bx - ax, by - ay
        vx, vy = cx - bx, cy - by
        total += math.atan2(ux * vy - uy * vx, ux * vx + uy * vy)
    return total


def _signed_area(vertices: Sequence[Point2]) -> float:
    # partial areas V'x * Vy - Vx * V'y, V' being the previous vertex
    total = 0.0
    for i, (x, y) in enumerate(vertices):
        px, py = vertices[i - 1]
        total += px * y - x * py
    return total / 2.0


def signed_area(polygon: ConvexPolygon) -> float:
    return _signed_area(polygon.vertices)


def centroid(polygon: ConvexPolygon) -> Point2:
    """
    Area-weighted barycenter: (1/6A) sum (q_i + q_j) det[q_i q_j]

    :param polygon:
    :return:
    """
    area = 0.0
    cx = 0.0
    cy = 0.0
    for i, (x, y) in enumerate(polygon.vertices):
        px, py = polygon.vertices[i - 1]
        partial = px * y - x * py
        area += partial
        cx += (px + x) * partial
        cy += (py + y) * partial
    area /= 2.0
    return Point2(cx / (6.0 * area), cy / (6.0 * area))
