# This software is released under the GNU General Public License v3.0
# https://opensource.org/licenses/GPL-3.0

# Point inclusion engines: Voronoi generators, sign of offset, ray crossing.
# Every engine has a scalar path and a branchless batch path. Both evaluate
# the same floating point expressions in the same order so that their
# results are identical point by point.
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from _geometry import (
    ConvexPolygon,
    InvalidParameter,
    NonFinite,
    Point2,
    TooFewVertices,
)
from _voronoi import GeneratorSet

# bool array of shape (m,)
InclusionMask = np.ndarray
# float64 array of shape (n+1, m), row 0 for the inner generator
SquaredDistanceTable = np.ndarray

engine_names: Tuple[str, ...] = ("voronoi", "sign_of_offset", "ray_crossing")
engine_aliases = {"offset": "sign_of_offset", "crossing": "ray_crossing"}

# smaller batches are not worth handing to worker threads
min_partition_size = 4096
# max points per kernel call, bounds the (n+1, m) temporaries
max_chunk_size = 65536


def canonical_engine(name: str) -> str:
    engine = engine_aliases.get(name.strip().lower(), name.strip().lower())
    if engine not in engine_names:
        raise InvalidParameter(
            f"Unknown engine {name!r}, expected one of {', '.join(engine_names)}"
        )
    return engine


@dataclass(frozen=True)
class PointBatch:
    """Structure-of-arrays query points"""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.ascontiguousarray(self.xs, dtype=np.float64)
        ys = np.ascontiguousarray(self.ys, dtype=np.float64)
        if xs.ndim != 1 or ys.ndim != 1 or xs.shape != ys.shape:
            raise InvalidParameter(
                f"xs and ys must be 1-D and of equal length: {xs.shape} vs {ys.shape}"
            )
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise NonFinite("Non-finite query point coordinate")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_points(cls, points: Iterable) -> "PointBatch":
        arr = np.asarray(list(points), dtype=np.float64).reshape(-1, 2)
        return cls(xs=arr[:, 0], ys=arr[:, 1])

    @property
    def m(self) -> int:
        return len(self.xs)

    def __len__(self) -> int:
        return self.m

    def point(self, j: int) -> Point2:
        return Point2(float(self.xs[j]), float(self.ys[j]))

    def points(self) -> Iterable[Point2]:
        for x, y in zip(self.xs.tolist(), self.ys.tolist()):
            yield Point2(x, y)

    def take(self, index) -> "PointBatch":
        return PointBatch(xs=self.xs[index], ys=self.ys[index])

    def split(self, parts: int) -> List["PointBatch"]:
        return [
            PointBatch(xs=xs, ys=ys)
            for xs, ys in zip(np.array_split(self.xs, parts), np.array_split(self.ys, parts))
        ]


@dataclass
class WorkCounter:
    """Counts the work done by the Voronoi batch kernel"""

    distance_evaluations: int = 0
    comparisons: int = 0
    _lock: threading.Lock = field(
        default_factory=threading.Lock, repr=False, compare=False
    )

    def add(self, distance_evaluations: int = 0, comparisons: int = 0) -> None:
        with self._lock:
            self.distance_evaluations += distance_evaluations
            self.comparisons += comparisons


def _partitioned(
    kernel: Callable[[PointBatch], np.ndarray], batch: PointBatch, threads: int
) -> np.ndarray:
    """
    Run a batch kernel over chunks of at most max_chunk_size points,
    optionally spread over worker threads. numpy releases the GIL inside the
    elementwise loops, so the chunks run in parallel. The result does not
    depend on the partitioning.

    :param kernel:
    :param batch:
    :param threads:
    :return:
    """
    if threads < 1:
        raise InvalidParameter(f"threads must be >= 1, got {threads}")
    workers = max(1, min(threads, batch.m // min_partition_size))
    parts = max(workers, -(-batch.m // max_chunk_size))
    if parts <= 1:
        return kernel(batch)
    chunks = batch.split(parts)
    if workers == 1:
        return np.concatenate([kernel(chunk) for chunk in chunks])
    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(kernel, chunks))
    return np.concatenate(results)


def _vertex_arrays(
    vertices: Union[ConvexPolygon, Sequence],
) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(vertices, ConvexPolygon):
        return vertices.xs, vertices.ys
    arr = np.asarray([tuple(v) for v in vertices], dtype=np.float64).reshape(-1, 2)
    if len(arr) < 3:
        raise TooFewVertices(f"A polygon needs at least 3 vertices, got {len(arr)}")
    if not np.isfinite(arr).all():
        raise NonFinite("Non-finite polygon vertex coordinate")
    return arr[:, 0], arr[:, 1]


def _edge_terms(xs: np.ndarray, ys: np.ndarray):
    """
    Per-edge end point, delta and right hand side of the two-point line
    form. Edge k runs from vertex k to vertex k+1.
    """
    xe = np.roll(xs, -1)
    ye = np.roll(ys, -1)
    dvx = xe - xs
    dvy = ye - ys
    rhs = ys * dvx - xs * dvy
    return xe, ye, dvx, dvy, rhs


# ---------------------------------------------------------------- Voronoi


def voronoi_contains(g: GeneratorSet, p: Point2, early_exit: bool = True) -> bool:
    """
    Closed-set nearest generator test: p is inside iff no outer generator is
    strictly closer than the inner one.

    :param g:
    :param p:
    :param early_exit: stop at the first outer generator that is closer
    :return:
    """
    px, py = p
    x0, y0 = g.inner
    dx = px - x0
    dy = py - y0
    d0 = dx * dx + dy * dy
    inside = True
    for xk, yk in g.outer:
        dx = px - xk
        dy = py - yk
        if d0 > dx * dx + dy * dy:
            if early_exit:
                return False
            inside = False
    return inside


def squared_distance_table(
    g: GeneratorSet, batch: PointBatch, counter: Optional[WorkCounter] = None
) -> SquaredDistanceTable:
    """
    (n+1, m) squared distances, row 0 being the inner generator

    :param g:
    :param batch:
    :param counter: optional work counter
    :return:
    """
    gx = g.points[:, 0:1]
    gy = g.points[:, 1:2]
    dx = batch.xs[np.newaxis, :] - gx
    dy = batch.ys[np.newaxis, :] - gy
    metrics = dx * dx + dy * dy
    if counter is not None:
        counter.add(distance_evaluations=metrics.size)
    return metrics


def voronoi_contains_batch(
    g: GeneratorSet,
    batch: PointBatch,
    threads: int = 1,
    counter: Optional[WorkCounter] = None,
    metric: str = "squared",
) -> InclusionMask:
    """
    Batch Voronoi inclusion. Performs (n+1)*m distance evaluations and n*m
    comparisons without data-dependent branching.

    :param g:
    :param batch:
    :param threads: worker threads the batch is split over
    :param counter: optional work counter
    :param metric: "squared" or "l2" (square-rooted, for debugging)
    :return:
    """
    if metric not in ("squared", "l2"):
        raise InvalidParameter(f"Unknown metric {metric!r}")

    def kernel(chunk: PointBatch) -> np.ndarray:
        metrics = squared_distance_table(g, chunk, counter)
        if metric == "l2":
            metrics = np.sqrt(metrics)
        if counter is not None:
            counter.add(comparisons=g.n * chunk.m)
        return np.all(metrics[:1] <= metrics[1:], axis=0)

    return _partitioned(kernel, batch, threads)


# --------------------------------------------------------- sign of offset


def sign_of_offset_contains(polygon: ConvexPolygon, p: Point2) -> bool:
    px, py = p
    below = 0
    not_above = 0
    for (xi, yi), (xj, yj) in polygon.edges():
        dvx = xj - xi
        dvy = yj - yi
        lhs = py * dvx - px * dvy
        rhs = yi * dvx - xi * dvy
        below += lhs < rhs
        not_above += lhs <= rhs
    # same side of every edge; a tie sides with the majority
    return below == 0 or not_above == polygon.n


def sign_of_offset_contains_batch(
    polygon: ConvexPolygon, batch: PointBatch, threads: int = 1
) -> InclusionMask:
    _, _, dvx, dvy, rhs = _edge_terms(polygon.xs, polygon.ys)
    dvx = dvx[:, np.newaxis]
    dvy = dvy[:, np.newaxis]
    rhs = rhs[:, np.newaxis]
    n = polygon.n

    def kernel(chunk: PointBatch) -> np.ndarray:
        lhs = chunk.ys[np.newaxis, :] * dvx - chunk.xs[np.newaxis, :] * dvy
        below = np.count_nonzero(lhs < rhs, axis=0)
        not_above = np.count_nonzero(lhs <= rhs, axis=0)
        return (below == 0) | (not_above == n)

    return _partitioned(kernel, batch, threads)


# ----------------------------------------------------------- ray crossing


def ray_crossing_contains(vertices: Union[ConvexPolygon, Sequence], p: Point2) -> bool:
    """
    Crossing parity of a +x ray, for any simple polygon. Points on an edge
    are inside.

    :param vertices: polygon vertices, convexity not required
    :param p:
    :return:
    """
    xs, ys = _vertex_arrays(vertices)
    xs = xs.tolist()
    ys = ys.tolist()
    n = len(xs)
    px, py = p
    crossings = 0
    for i in range(n):
        xi, yi = xs[i], ys[i]
        xj, yj = xs[(i + 1) % n], ys[(i + 1) % n]
        dvx = xj - xi
        dvy = yj - yi
        lhs = py * dvx - px * dvy
        rhs = yi * dvx - xi * dvy
        if (
            lhs == rhs
            and min(xi, xj) <= px <= max(xi, xj)
            and min(yi, yj) <= py <= max(yi, yj)
        ):
            return True
        in_range = (yj > py) != (yi > py)
        going_up = yj > yi
        on_left = lhs > rhs if going_up else lhs < rhs
        crossings += in_range and on_left
    return crossings % 2 == 1


def _crossing_masks(xs: np.ndarray, ys: np.ndarray, batch: PointBatch):
    xe, ye, dvx, dvy, rhs = _edge_terms(xs, ys)
    qx = batch.xs[np.newaxis, :]
    qy = batch.ys[np.newaxis, :]
    lhs = qy * dvx[:, np.newaxis] - qx * dvy[:, np.newaxis]
    rhs = rhs[:, np.newaxis]

    in_range = (ye[:, np.newaxis] > qy) ^ (ys[:, np.newaxis] > qy)
    going_up = (ye > ys)[:, np.newaxis]
    on_left = np.where(going_up, lhs > rhs, lhs < rhs)
    crossing = in_range & on_left

    on_edge = (
        (lhs == rhs)
        & (qx >= np.minimum(xs, xe)[:, np.newaxis])
        & (qx <= np.maximum(xs, xe)[:, np.newaxis])
        & (qy >= np.minimum(ys, ye)[:, np.newaxis])
        & (qy <= np.maximum(ys, ye)[:, np.newaxis])
    )
    return crossing, on_edge


def ray_crossing_counts(
    vertices: Union[ConvexPolygon, Sequence], batch: PointBatch
) -> np.ndarray:
    """Number of edges crossed by the +x ray of every point"""
    xs, ys = _vertex_arrays(vertices)
    crossing, _ = _crossing_masks(xs, ys, batch)
    return np.count_nonzero(crossing, axis=0)


def ray_crossing_contains_batch(
    vertices: Union[ConvexPolygon, Sequence], batch: PointBatch, threads: int = 1
) -> InclusionMask:
    xs, ys = _vertex_arrays(vertices)

    def kernel(chunk: PointBatch) -> np.ndarray:
        crossing, on_edge = _crossing_masks(xs, ys, chunk)
        odd = np.count_nonzero(crossing, axis=0) % 2 == 1
        return odd | np.any(on_edge, axis=0)

    return _partitioned(kernel, batch, threads)


# ------------------------------------------------------------------ misc


def edge_line_distances(polygon: ConvexPolygon, batch: PointBatch) -> np.ndarray:
    """Distance of every point to the nearest supporting line of an edge"""
    xs, ys = polygon.xs, polygon.ys
    a = ys - np.roll(ys, -1)
    b = np.roll(xs, -1) - xs
    c = -(a * xs + b * ys)
    length = np.hypot(a, b)[:, np.newaxis]
    offsets = (
        a[:, np.newaxis] * batch.xs[np.newaxis, :]
        + b[:, np.newaxis] * batch.ys[np.newaxis, :]
        + c[:, np.newaxis]
    )
    return np.min(np.abs(offsets) / length, axis=0)
