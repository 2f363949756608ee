import unittest
from unittest.mock import patch

import numpy as np

from _bench_utils import (
    Box,
    default_sample_box,
    generate_random_convex_polygon,
    generate_regular_polygon,
    sample_points,
)
from _engines import (
    PointBatch,
    WorkCounter,
    canonical_engine,
    edge_line_distances,
    ray_crossing_contains,
    ray_crossing_contains_batch,
    ray_crossing_counts,
    sign_of_offset_contains,
    sign_of_offset_contains_batch,
    squared_distance_table,
    voronoi_contains,
    voronoi_contains_batch,
)
from _geometry import InvalidParameter, NonFinite, Point2, TooFewVertices, validate_polygon
from _voronoi import to_voronoi

UNIT_SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]
CONCAVE = [(0, 0), (4, 0), (4, 4), (2, 1), (0, 4)]
BAND = 1e-9


def sample_polygons():
    for n in range(3, 16):
        yield generate_regular_polygon(n)
        yield generate_random_convex_polygon(n, seed=1000 + n)


class EngineTests(unittest.TestCase):
    def setUp(self):
        self.square = validate_polygon(UNIT_SQUARE)
        self.square_generators = to_voronoi(self.square)

    def test_point_batch(self):
        batch = PointBatch.from_points([(0, 1), (2, 3)])
        self.assertEqual(batch.m, 2)
        self.assertEqual(batch.point(1), (2, 3))
        self.assertEqual(list(batch.points()), [(0, 1), (2, 3)])
        self.assertEqual(PointBatch.from_points([]).m, 0)
        with self.assertRaises(InvalidParameter):
            PointBatch(xs=np.zeros(2), ys=np.zeros(3))
        with self.assertRaises(NonFinite):
            PointBatch(xs=np.array([0.0, np.inf]), ys=np.zeros(2))

    def test_canonical_engine(self):
        self.assertEqual(canonical_engine("offset"), "sign_of_offset")
        self.assertEqual(canonical_engine("Crossing"), "ray_crossing")
        self.assertEqual(canonical_engine("voronoi"), "voronoi")
        with self.assertRaises(InvalidParameter):
            canonical_engine("winding")

    def test_voronoi_contains(self):
        g = self.square_generators
        self.assertTrue(voronoi_contains(g, Point2(0.5, 0.5)))
        self.assertFalse(voronoi_contains(g, Point2(2, 2)))
        self.assertFalse(voronoi_contains(g, Point2(2, 2), early_exit=False))
        self.assertTrue(voronoi_contains(g, Point2(1, 0.5)))

    def test_sign_of_offset_contains(self):
        self.assertTrue(sign_of_offset_contains(self.square, Point2(0.5, 0.5)))
        self.assertFalse(sign_of_offset_contains(self.square, Point2(2, 2)))
        self.assertTrue(sign_of_offset_contains(self.square, Point2(1, 0.5)))
        # on the extension of an edge line, outside
        self.assertFalse(sign_of_offset_contains(self.square, Point2(2, 0)))

    def test_ray_crossing_contains(self):
        self.assertTrue(ray_crossing_contains(self.square, Point2(0.5, 0.5)))
        self.assertFalse(ray_crossing_contains(self.square, Point2(2, 0.5)))
        self.assertFalse(ray_crossing_contains(CONCAVE, Point2(2, 2)))
        self.assertTrue(ray_crossing_contains(CONCAVE, Point2(1, 2)))
        self.assertTrue(ray_crossing_contains(CONCAVE, Point2(3, 0.5)))
        with self.assertRaises(TooFewVertices):
            ray_crossing_contains([(0, 0), (1, 1)], Point2(0, 0))
        nan_vertex = [(0, 0), (1, 0), (float("nan"), 1), (0, 1)]
        with self.assertRaises(NonFinite):
            ray_crossing_contains(nan_vertex, Point2(0.5, 0.5))
        with self.assertRaises(NonFinite):
            ray_crossing_contains_batch(nan_vertex, PointBatch.from_points([(0.5, 0.5)]))

    def test_ray_crossing_counts(self):
        batch = PointBatch.from_points([(0.5, 0.5), (2, 0.5), (-1, 0.5), (2, 2)])
        self.assertEqual(list(ray_crossing_counts(self.square, batch)), [1, 0, 2, 0])
        concave = PointBatch.from_points([(2, 2), (1, 2)])
        self.assertEqual(list(ray_crossing_counts(CONCAVE, concave)), [2, 3])

    def test_empty_batches(self):
        empty = PointBatch(xs=np.empty(0), ys=np.empty(0))
        for mask in [
            voronoi_contains_batch(self.square_generators, empty),
            sign_of_offset_contains_batch(self.square, empty),
            ray_crossing_contains_batch(self.square, empty),
        ]:
            self.assertEqual(mask.shape, (0,))
            self.assertEqual(mask.dtype, bool)

    def test_small_batches(self):
        batch = PointBatch.from_points([(0.5, 0.5), (2, 2)])
        self.assertEqual(list(sign_of_offset_contains_batch(self.square, batch)), [True, False])
        self.assertEqual(list(voronoi_contains_batch(self.square_generators, batch)), [True, False])
        self.assertEqual(list(ray_crossing_contains_batch(self.square, batch)), [True, False])
        concave = PointBatch.from_points([(2, 2), (1, 2), (3, 0.5)])
        self.assertEqual(list(ray_crossing_contains_batch(CONCAVE, concave)), [False, True, True])

    def test_closed_boundary(self):
        xs, ys = self.square.xs, self.square.ys
        midpoints = [
            ((xs[i] + xs[(i + 1) % 4]) / 2, (ys[i] + ys[(i + 1) % 4]) / 2) for i in range(4)
        ]
        boundary = PointBatch.from_points(list(self.square.vertices) + midpoints)
        for p in boundary.points():
            self.assertTrue(voronoi_contains(self.square_generators, p), p)
            self.assertTrue(sign_of_offset_contains(self.square, p), p)
            self.assertTrue(ray_crossing_contains(self.square, p), p)
        self.assertTrue(voronoi_contains_batch(self.square_generators, boundary).all())
        self.assertTrue(sign_of_offset_contains_batch(self.square, boundary).all())
        self.assertTrue(ray_crossing_contains_batch(self.square, boundary).all())

    def test_three_way_agreement(self):
        for polygon in sample_polygons():
            batch = sample_points(100_000, default_sample_box(polygon), seed=polygon.n)
            clear = edge_line_distances(polygon, batch) > BAND
            offset = sign_of_offset_contains_batch(polygon, batch)[clear]
            voronoi = voronoi_contains_batch(to_voronoi(polygon), batch)[clear]
            crossing = ray_crossing_contains_batch(polygon, batch)[clear]
            self.assertTrue(np.array_equal(voronoi, offset), polygon.n)
            self.assertTrue(np.array_equal(crossing, offset), polygon.n)
            # the sample box is twice the bounding box: both sides are covered
            self.assertTrue(offset.any() and not offset.all())

    def test_square_agreement(self):
        batch = sample_points(10_000, Box(-1, -1, 2, 2), seed=7)
        offset = sign_of_offset_contains_batch(self.square, batch)
        self.assertTrue(
            np.array_equal(voronoi_contains_batch(self.square_generators, batch), offset)
        )

    def test_scalar_batch_equivalence(self):
        polygon = generate_random_convex_polygon(7, seed=17)
        g = to_voronoi(polygon)
        batch = sample_points(10_000, default_sample_box(polygon), seed=2)
        points = list(batch.points())
        self.assertEqual(
            voronoi_contains_batch(g, batch).tolist(),
            [voronoi_contains(g, p) for p in points],
        )
        self.assertEqual(
            voronoi_contains_batch(g, batch).tolist(),
            [voronoi_contains(g, p, early_exit=False) for p in points],
        )
        self.assertEqual(
            sign_of_offset_contains_batch(polygon, batch).tolist(),
            [sign_of_offset_contains(polygon, p) for p in points],
        )
        self.assertEqual(
            ray_crossing_contains_batch(polygon, batch).tolist(),
            [ray_crossing_contains(polygon, p) for p in points],
        )
        concave = sample_points(10_000, Box(-1, -1, 5, 5), seed=3)
        self.assertEqual(
            ray_crossing_contains_batch(CONCAVE, concave).tolist(),
            [ray_crossing_contains(CONCAVE, p) for p in concave.points()],
        )

    def test_squared_distance_monotonicity(self):
        polygon = generate_random_convex_polygon(10, seed=4)
        g = to_voronoi(polygon)
        batch = sample_points(100_000, default_sample_box(polygon), seed=4)
        self.assertTrue(
            np.array_equal(
                voronoi_contains_batch(g, batch),
                voronoi_contains_batch(g, batch, metric="l2"),
            )
        )
        with self.assertRaises(InvalidParameter):
            voronoi_contains_batch(g, batch, metric="l1")

    def test_work_count(self):
        for n, m in [(3, 1_000), (15, 10_000)]:
            polygon = generate_regular_polygon(n)
            batch = sample_points(m, default_sample_box(polygon), seed=n)
            for threads in (1, 2):
                counter = WorkCounter()
                voronoi_contains_batch(to_voronoi(polygon), batch, threads=threads, counter=counter)
                self.assertEqual(counter.distance_evaluations, (n + 1) * m)
                self.assertEqual(counter.comparisons, n * m)

    def test_distance_table_argmin(self):
        polygon = generate_random_convex_polygon(6, seed=8)
        g = to_voronoi(polygon)
        batch = sample_points(20_000, default_sample_box(polygon), seed=8)
        metrics = squared_distance_table(g, batch)
        self.assertEqual(metrics.shape, (7, 20_000))
        self.assertTrue((metrics >= 0).all())

        clear = edge_line_distances(polygon, batch) > BAND
        inside = sign_of_offset_contains_batch(polygon, batch) & clear
        outside = ~sign_of_offset_contains_batch(polygon, batch) & clear
        self.assertTrue((metrics[0, inside] < metrics[1:, inside].min(axis=0)).all())
        self.assertTrue((metrics[1:, outside].min(axis=0) < metrics[0, outside]).all())

    def test_ray_crossing_parity(self):
        for polygon in sample_polygons():
            batch = sample_points(20_000, default_sample_box(polygon), seed=polygon.n)
            counts = ray_crossing_counts(polygon, batch)
            self.assertLessEqual(counts.max(), 2)
            clear = edge_line_distances(polygon, batch) > BAND
            offset = sign_of_offset_contains_batch(polygon, batch)
            self.assertTrue(np.array_equal((counts % 2 == 1)[clear], offset[clear]))

    def test_threaded_partitioning(self):
        polygon = generate_random_convex_polygon(9, seed=6)
        g = to_voronoi(polygon)
        batch = sample_points(50_000, default_sample_box(polygon), seed=6)
        for threads in (2, 3, 8):
            self.assertTrue(
                np.array_equal(
                    voronoi_contains_batch(g, batch, threads=threads),
                    voronoi_contains_batch(g, batch),
                )
            )
            self.assertTrue(
                np.array_equal(
                    sign_of_offset_contains_batch(polygon, batch, threads=threads),
                    sign_of_offset_contains_batch(polygon, batch),
                )
            )
            self.assertTrue(
                np.array_equal(
                    ray_crossing_contains_batch(polygon, batch, threads=threads),
                    ray_crossing_contains_batch(polygon, batch),
                )
            )
        with self.assertRaises(InvalidParameter):
            voronoi_contains_batch(g, batch, threads=0)

    def test_edge_line_distances(self):
        batch = PointBatch.from_points([(0.5, 0.5), (0.5, -2), (1, 0.25), (3, 3)])
        self.assertEqual(edge_line_distances(self.square, batch).tolist(), [0.5, 0.5, 0.0, 2.0])

    def test_single_thread_chunking(self):
        polygon = generate_random_convex_polygon(12, seed=9)
        g = to_voronoi(polygon)
        batch = sample_points(10_000, default_sample_box(polygon), seed=9)
        expected = (
            voronoi_contains_batch(g, batch),
            sign_of_offset_contains_batch(polygon, batch),
            ray_crossing_contains_batch(polygon, batch),
        )
        calls = []

        def recording_table(g, chunk, counter=None):
            calls.append(chunk.m)
            return squared_distance_table(g, chunk, counter)

        with patch("_engines.max_chunk_size", 1000), patch(
            "_engines.squared_distance_table", side_effect=recording_table
        ):
            counter = WorkCounter()
            chunked = voronoi_contains_batch(g, batch, counter=counter)
            self.assertTrue(np.array_equal(chunked, expected[0]))
            self.assertTrue(np.array_equal(sign_of_offset_contains_batch(polygon, batch), expected[1]))
            self.assertTrue(np.array_equal(ray_crossing_contains_batch(polygon, batch), expected[2]))
        self.assertEqual(len(calls), 10)
        self.assertLessEqual(max(calls), 1000)
        self.assertEqual(counter.distance_evaluations, 13 * 10_000)
        self.assertEqual(counter.comparisons, 12 * 10_000)
