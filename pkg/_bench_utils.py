# This software is released under the GNU General Public License v3.0
# https://opensource.org/licenses/GPL-3.0
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from _engines import PointBatch, canonical_engine, engine_names
from _geometry import ConvexPolygon, InvalidParameter, Point2, validate_polygon

default_batch_size = 1_000_000
default_repetitions = 10
default_edge_counts: List[int] = list(range(3, 16))
default_box_scale = 2.0
record_phases = ("convert", "query")


class Box(NamedTuple):
    """Axis-aligned box"""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    @property
    def center(self) -> Point2:
        return Point2((self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0)


@dataclass
class BenchConfig:
    """Benchmark definition"""

    edge_counts: List[int] = field(default_factory=lambda: list(default_edge_counts))
    batch_size: int = default_batch_size
    repetitions: int = default_repetitions
    seed: int = 0
    sample_box: Optional[Box] = None  # 2x the polygon's bounding box if not set
    engines: List[str] = field(default_factory=lambda: list(engine_names))
    threads: int = 1  # worker threads per batch query
    warmup: bool = True  # run and discard one repetition before timing

    def validate(self) -> "BenchConfig":
        if not self.edge_counts or any(n < 3 for n in self.edge_counts):
            raise InvalidParameter(f"Edge counts must all be >= 3: {self.edge_counts}")
        if self.batch_size < 1:
            raise InvalidParameter(f"Batch size must be >= 1: {self.batch_size}")
        if self.repetitions < 1:
            raise InvalidParameter(f"Repetitions must be >= 1: {self.repetitions}")
        if self.seed < 0:
            raise InvalidParameter(f"Seed must be unsigned: {self.seed}")
        if self.threads < 1:
            raise InvalidParameter(f"Threads must be >= 1: {self.threads}")
        if not self.engines:
            raise InvalidParameter("No engines selected")
        self.engines = [canonical_engine(e) for e in self.engines]
        if self.sample_box is not None:
            _check_box(self.sample_box)
        return self


@dataclass
class BenchRecord:
    """One timed phase of a benchmark run"""

    engine: str
    n_edges: int
    batch_size: int
    repetition: int
    phase: str  # convert or query
    wall_time_ns: int
    throughput_pts_per_s: float

    @classmethod
    def from_timing(
        cls,
        engine: str,
        n_edges: int,
        batch_size: int,
        repetition: int,
        phase: str,
        wall_time_ns: int,
    ) -> "BenchRecord":
        # clock resolution can round very short phases down to 0
        wall_time_ns = max(int(wall_time_ns), 1)
        return cls(
            engine=engine,
            n_edges=n_edges,
            batch_size=batch_size,
            repetition=repetition,
            phase=phase,
            wall_time_ns=wall_time_ns,
            throughput_pts_per_s=batch_size / (wall_time_ns * 1e-9),
        )


class RecordSummary(NamedTuple):
    engine: str
    n_edges: int
    phase: str
    repetitions: int
    median_wall_time_ns: float
    median_throughput_pts_per_s: float


def engine_sort_key(engine: str) -> int:
    try:
        return engine_names.index(engine)
    except ValueError:
        return len(engine_names)


def summarize_records(records: Sequence[BenchRecord]) -> List[RecordSummary]:
    """
    Median wall time and throughput per (engine, edges, phase)

    :param records:
    :return:
    """
    groups: Dict[Tuple[str, int, str], List[BenchRecord]] = defaultdict(list)
    for record in records:
        groups[(record.engine, record.n_edges, record.phase)].append(record)
    summaries = [
        RecordSummary(
            engine=engine,
            n_edges=n_edges,
            phase=phase,
            repetitions=len(group),
            median_wall_time_ns=float(np.median([r.wall_time_ns for r in group])),
            median_throughput_pts_per_s=float(
                np.median([r.throughput_pts_per_s for r in group])
            ),
        )
        for (engine, n_edges, phase), group in groups.items()
    ]
    return sorted(
        summaries,
        key=lambda s: (engine_sort_key(s.engine), s.engine, s.n_edges, s.phase),
    )


def _check_box(box: Box) -> None:
    if not all(math.isfinite(v) for v in box):
        raise InvalidParameter(f"Non-finite sampling box: {box}")
    if box.xmax <= box.xmin or box.ymax <= box.ymin:
        raise InvalidParameter(f"Degenerate sampling box: {box}")


def generate_regular_polygon(
    n: int, circumradius: float = 1.0, center: Point2 = Point2(0.0, 0.0)
) -> ConvexPolygon:
    """
    Regular n-gon, first vertex straight above the center, CCW

    :param n:
    :param circumradius:
    :param center:
    :return:
    """
    if n < 3:
        raise InvalidParameter(f"A regular polygon needs n >= 3, got {n}")
    if not (circumradius > 0 and math.isfinite(circumradius)):
        raise InvalidParameter(f"Circumradius must be positive: {circumradius}")
    angles = 2.0 * math.pi * np.arange(n) / n + math.pi / 2.0
    xs = center[0] + circumradius * np.cos(angles)
    ys = center[1] + circumradius * np.sin(angles)
    return validate_polygon(zip(xs.tolist(), ys.tolist()))


def generate_random_convex_polygon(
    n: int,
    seed: int,
    radius: float = 1.0,
    center: Point2 = Point2(0.0, 0.0),
    min_gap: float = 1e-3,
) -> ConvexPolygon:
    """
    Seeded random convex n-gon: n points on a circle at sorted random angles.
    Angle sets with a gap below min_gap (radians) are redrawn so that no two
    vertices nearly coincide.

    :param n:
    :param seed:
    :param radius:
    :param center:
    :param min_gap:
    :return:
    """
    if n < 3:
        raise InvalidParameter(f"A convex polygon needs n >= 3, got {n}")
    if not (radius > 0 and math.isfinite(radius)):
        raise InvalidParameter(f"Radius must be positive: {radius}")
    if not 0 < min_gap * n < 2.0 * math.pi:
        raise InvalidParameter(f"Cannot fit {n} vertices {min_gap} rad apart")
    rng = np.random.default_rng(seed)
    while True:
        angles = np.sort(rng.uniform(0.0, 2.0 * math.pi, n))
        gaps = np.diff(np.append(angles, angles[0] + 2.0 * math.pi))
        if gaps.min() >= min_gap:
            break
    xs = center[0] + radius * np.cos(angles)
    ys = center[1] + radius * np.sin(angles)
    return validate_polygon(zip(xs.tolist(), ys.tolist()))


def bounding_box(polygon: ConvexPolygon) -> Box:
    return Box(
        float(polygon.xs.min()),
        float(polygon.ys.min()),
        float(polygon.xs.max()),
        float(polygon.ys.max()),
    )


def default_sample_box(polygon: ConvexPolygon, scale: float = default_box_scale) -> Box:
    """The polygon's bounding box scaled about its center"""
    box = bounding_box(polygon)
    cx, cy = box.center
    half_w = (box.xmax - box.xmin) * scale / 2.0
    half_h = (box.ymax - box.ymin) * scale / 2.0
    return Box(cx - half_w, cy - half_h, cx + half_w, cy + half_h)


def sample_points(m: int, box: Box, seed: int) -> PointBatch:
    """
    m points i.i.d. uniform over box, identical for identical arguments

    :param m:
    :param box:
    :param seed:
    :return:
    """
    if m < 0:
        raise InvalidParameter(f"Point count must be >= 0: {m}")
    if seed < 0:
        raise InvalidParameter(f"Seed must be unsigned: {seed}")
    _check_box(box)
    rng = np.random.default_rng(seed)
    xs = rng.uniform(box.xmin, box.xmax, m)
    ys = rng.uniform(box.ymin, box.ymax, m)
    return PointBatch(xs=xs, ys=ys)
