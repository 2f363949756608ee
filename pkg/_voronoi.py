# This software is released under the GNU General Public License v3.0
# https://opensource.org/licenses/GPL-3.0

# Conversion of a convex polygon into its Voronoi generator set
import math
from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np

from _geometry import (
    ConvexPolygon,
    DegenerateEdge,
    GeneratorCollision,
    NonFinite,
    Point2,
    centroid,
)

default_edge_eps = 0.0  # on a^2 + b^2
default_collision_eps = 1e-12  # relative to the edge length


class EdgeCoefficients(NamedTuple):
    """Standard form a*x + b*y + c = 0 of the line through an edge"""

    a: float
    b: float
    c: float


@dataclass(frozen=True)
class GeneratorSet:
    """Inner generator p0 and one outer generator per edge, in edge order"""

    inner: Point2
    outer: Tuple[Point2, ...]
    # all generators as a (n+1, 2) array, row 0 being the inner one
    points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        points = np.array([self.inner, *self.outer], dtype=np.float64).reshape(-1, 2)
        if not np.all(np.isfinite(points)):
            raise NonFinite("Non-finite generator coordinate")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def n(self) -> int:
        return len(self.outer)


def edge_coefficients(
    q_i: Point2, q_j: Point2, eps: float = default_edge_eps
) -> EdgeCoefficients:
    a = q_i[1] - q_j[1]
    b = q_j[0] - q_i[0]
    if a * a + b * b <= eps:
        raise DegenerateEdge(f"Edge {q_i} -> {q_j} has no length")
    c = -(a * q_i[0] + b * q_i[1])
    return EdgeCoefficients(a, b, c)


def foot_of_perpendicular(p0: Point2, e: EdgeCoefficients) -> Point2:
    """
    Closest point to p0 on the line of e.

    :param p0:
    :param e:
    :return:
    """
    a, b, c = e
    norm = a * a + b * b
    x = (b * b * p0[0] - a * b * p0[1] - c * a) / norm
    y = (-a * b * p0[0] + a * a * p0[1] - c * b) / norm
    return Point2(x, y)


def reflect_generator(
    p0: Point2, e: EdgeCoefficients, eps: float = default_collision_eps
) -> Point2:
    """
    Mirror image of p0 across the line of e, evaluated as a single
    reflection matrix rather than 2 * foot - p0.

    :param p0: inner generator
    :param e: edge line
    :param eps: minimum distance of p0 to the line, relative to the edge length
    :return:
    """
    a, b, c = e
    norm = a * a + b * b
    # |a x + b y + c| / |(a, b)| compared with eps * |(a, b)|
    if abs(a * p0[0] + b * p0[1] + c) <= eps * norm:
        raise GeneratorCollision(f"Generator {p0} lies on the edge line {e}")
    x = ((b * b - a * a) * p0[0] - 2.0 * a * b * p0[1] - 2.0 * c * a) / norm
    y = (-2.0 * a * b * p0[0] + (a * a - b * b) * p0[1] - 2.0 * c * b) / norm
    return Point2(x, y)


def to_voronoi(polygon: ConvexPolygon) -> GeneratorSet:
    inner = centroid(polygon)
    outer = tuple(
        reflect_generator(inner, edge_coefficients(q_i, q_j))
        for q_i, q_j in polygon.edges()
    )
    return GeneratorSet(inner=inner, outer=outer)


def generator_residuals(
    polygon: ConvexPolygon, generators: GeneratorSet
) -> Dict[str, float]:
    """
    Worst-case deviations of a generator set from its polygon:
      - midpoint: distance of (p0 + pk) / 2 from the edge line
      - perpendicular: |(pk - p0) . edge direction| / (|pk - p0| |edge|)
      - equidistance: relative difference of |q - p0| and |q - pk| over both
        endpoints q of the edge

    :param polygon:
    :param generators:
    :return:
    """
    if generators.n != polygon.n:
        raise DegenerateEdge(
            f"Generator set has {generators.n} outer points for {polygon.n} edges"
        )
    p0 = generators.inner
    midpoint = perpendicular = equidistance = 0.0
    for (q_i, q_j), pk in zip(polygon.edges(), generators.outer):
        a, b, c = edge_coefficients(q_i, q_j)
        length = math.hypot(a, b)
        mx = (p0.x + pk.x) / 2.0
        my = (p0.y + pk.y) / 2.0
        midpoint = max(midpoint, abs(a * mx + b * my + c) / length)

        dx = pk.x - p0.x
        dy = pk.y - p0.y
        span = math.hypot(dx, dy)
        if span:
            perpendicular = max(perpendicular, abs(dx * b - dy * a) / (span * length))
        else:
            perpendicular = math.inf

        for q in (q_i, q_j):
            d_inner = math.hypot(q.x - p0.x, q.y - p0.y)
            d_outer = math.hypot(q.x - pk.x, q.y - pk.y)
            scale = max(d_inner, d_outer) or 1.0
            equidistance = max(equidistance, abs(d_inner - d_outer) / scale)
    return {
        "midpoint": midpoint,
        "perpendicular": perpendicular,
        "equidistance": equidistance,
    }


def generators_from_points(
    inner, outer, polygon: Optional[ConvexPolygon] = None
) -> GeneratorSet:
    """Build a GeneratorSet from raw coordinate pairs, e.g. a stored conversion"""
    generators = GeneratorSet(
        inner=Point2(float(inner[0]), float(inner[1])),
        outer=tuple(Point2(float(x), float(y)) for x, y in outer),
    )
    if polygon is not None and polygon.n != generators.n:
        raise DegenerateEdge(
            f"Generator set has {generators.n} outer points for {polygon.n} edges"
        )
    return generators
