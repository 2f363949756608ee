import math
import unittest

from _bench_utils import generate_random_convex_polygon, generate_regular_polygon
from _engines import sign_of_offset_contains
from _geometry import (
    ConvexPolygon,
    DegenerateEdge,
    GeometryError,
    NonFinite,
    NotConvex,
    Point2,
    TooFewVertices,
    centroid,
    signed_area,
    validate_polygon,
)

UNIT_SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def fan_centroid(polygon: ConvexPolygon) -> Point2:
    # area-weighted average of the centroids of a triangle fan from vertex 0
    (x0, y0), rest = polygon.vertices[0], polygon.vertices[1:]
    total = cx = cy = 0.0
    for (x1, y1), (x2, y2) in zip(rest, rest[1:]):
        area = ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)) / 2.0
        total += area
        cx += area * (x0 + x1 + x2) / 3.0
        cy += area * (y0 + y1 + y2) / 3.0
    return Point2(cx / total, cy / total)


class GeometryTests(unittest.TestCase):
    def test_validate_polygon(self):
        polygon = validate_polygon(UNIT_SQUARE)
        self.assertEqual(polygon.n, 4)
        self.assertFalse(polygon.reversed_input)
        self.assertEqual(polygon.vertices[0], Point2(0.0, 0.0))
        self.assertEqual(list(polygon.xs), [0.0, 1.0, 1.0, 0.0])

    def test_validate_polygon_clockwise(self):
        polygon = validate_polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
        self.assertTrue(polygon.reversed_input)
        self.assertGreater(signed_area(polygon), 0)
        self.assertEqual(set(polygon.vertices), {Point2(*v) for v in UNIT_SQUARE})

    def test_validate_polygon_errors(self):
        with self.assertRaises(TooFewVertices):
            validate_polygon([(0, 0), (1, 0)])
        with self.assertRaises(NotConvex):
            validate_polygon([(0, 0), (1, 0), (2, 0), (1, 1)])
        with self.assertRaises(NotConvex):
            # reflex vertex at (1, 0.5)
            validate_polygon([(0, 0), (2, 0), (1, 0.5), (2, 2), (0, 2)])
        with self.assertRaises(DegenerateEdge):
            validate_polygon([(0, 0), (1, 0), (1, 0), (0, 1)])
        with self.assertRaises(NonFinite):
            validate_polygon([(0, 0), (1, 0), (float("nan"), 1)])
        with self.assertRaises(NonFinite):
            validate_polygon([(0, 0), (float("inf"), 0), (1, 1)])
        with self.assertRaises(GeometryError):
            validate_polygon([(0, 0), (1,), (1, 1)])

    def test_validate_polygon_pentagram(self):
        star = [
            (math.cos(math.pi / 2 + 4 * math.pi * k / 5), math.sin(math.pi / 2 + 4 * math.pi * k / 5))
            for k in range(5)
        ]
        with self.assertRaises(NotConvex):
            validate_polygon(star)

    def test_validate_polygon_eps(self):
        nearly_flat = [(0, 0), (1, 0), (2, 1e-7), (1, 1)]
        validate_polygon(nearly_flat)
        with self.assertRaises(NotConvex):
            validate_polygon(nearly_flat, eps=1e-6)

    def test_signed_area(self):
        self.assertEqual(signed_area(validate_polygon(UNIT_SQUARE)), 1.0)
        self.assertEqual(signed_area(validate_polygon([(0, 0), (1, 0), (0, 1)])), 0.5)
        hexagon = generate_regular_polygon(6, 1.0)
        self.assertAlmostEqual(signed_area(hexagon), 3 * math.sqrt(3) / 2, places=12)
        self.assertAlmostEqual(
            signed_area(hexagon), 6 / 2 * math.sin(2 * math.pi / 6), places=12
        )

    def test_signed_area_rotation_and_reversal(self):
        polygon = generate_random_convex_polygon(9, seed=3)
        area = signed_area(polygon)
        for shift in range(1, polygon.n):
            rotated = ConvexPolygon(polygon.vertices[shift:] + polygon.vertices[:shift])
            self.assertLessEqual(abs(signed_area(rotated) - area), 1e-12 * area)
        reversed_polygon = ConvexPolygon(tuple(reversed(polygon.vertices)))
        self.assertAlmostEqual(signed_area(reversed_polygon), -area, places=12)

    def test_centroid(self):
        self.assertEqual(centroid(validate_polygon(UNIT_SQUARE)), Point2(0.5, 0.5))
        cx, cy = centroid(validate_polygon([(0, 0), (1, 0), (0, 1)]))
        self.assertAlmostEqual(cx, 1 / 3, places=15)
        self.assertAlmostEqual(cy, 1 / 3, places=15)

        quad = validate_polygon([(0, 0), (2, 0), (2, 1), (0, 3)])
        expected = fan_centroid(quad)
        actual = centroid(quad)
        self.assertAlmostEqual(actual.x, expected.x, places=12)
        self.assertAlmostEqual(actual.y, expected.y, places=12)

    def test_centroid_against_fan_triangulation(self):
        for seed in range(1000):
            polygon = generate_random_convex_polygon(3 + seed % 13, seed=seed)
            expected = fan_centroid(polygon)
            actual = centroid(polygon)
            self.assertLessEqual(abs(actual.x - expected.x), 1e-10, seed)
            self.assertLessEqual(abs(actual.y - expected.y), 1e-10, seed)
            self.assertTrue(sign_of_offset_contains(polygon, actual), seed)

    def test_centroid_translation(self):
        polygon = generate_random_convex_polygon(7, seed=11)
        base = centroid(polygon)
        for dx, dy in [(3.0, -2.0), (-0.25, 1.5), (0.5, 0.5)]:
            moved = validate_polygon([(x + dx, y + dy) for x, y in polygon.vertices])
            cx, cy = centroid(moved)
            self.assertLessEqual(abs(cx - (base.x + dx)), 1e-12)
            self.assertLessEqual(abs(cy - (base.y + dy)), 1e-12)
