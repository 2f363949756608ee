# This software is released under the GNU General Public License v3.0
# https://opensource.org/licenses/GPL-3.0

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from datetime import timedelta
from pathlib import Path
from timeit import default_timer as timer
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import humanize  # type: ignore
import numpy as np
import requests

from _bench_utils import (
    BenchConfig,
    BenchRecord,
    Box,
    RecordSummary,
    default_sample_box,
    engine_sort_key,
    generate_regular_polygon,
    sample_points,
    summarize_records,
)
from _engines import (
    InclusionMask,
    PointBatch,
    canonical_engine,
    edge_line_distances,
    engine_names,
    ray_crossing_contains_batch,
    sign_of_offset_contains_batch,
    voronoi_contains_batch,
)
from _formats import (
    InputFormatError,
    dump_generators,
    load_generators,
    load_points,
    load_polygon,
    load_vertices,
    write_mask_binary,
    write_mask_csv,
    write_records_csv,
)
from _geometry import ConvexPolygon, GeometryError, InvalidParameter
from _suites import default_suite, suites as default_suites
from _suites_custom import suites as custom_suites
from _utils import (
    format_duration_ns,
    format_throughput,
    get_env_bool,
    get_env_csv,
    get_env_int,
    get_logger,
)
from _voronoi import GeneratorSet, generator_residuals, to_voronoi

logger = logging.getLogger(__file__)
ch = logging.StreamHandler(sys.stdout)
ch.setLevel(logging.DEBUG)
logger.addHandler(ch)
logger.setLevel(logging.INFO)

default_validation_count = 100_000
default_boundary_band = 1e-9
default_disagreement_cap = 100

exit_ok = 0
exit_failed = 1
exit_input_error = 2


def engine_kernel(
    engine: str,
    polygon,
    generators: Optional[GeneratorSet] = None,
    threads: int = 1,
) -> Callable[[PointBatch], InclusionMask]:
    """
    Batch kernel for an engine, bound to its polygon.

    :param engine: engine name or alias
    :param polygon: ConvexPolygon, or raw vertices for ray crossing
    :param generators: precomputed generators for the Voronoi engine
    :param threads:
    :return:
    """
    engine = canonical_engine(engine)
    if engine == "voronoi":
        if generators is None:
            generators = to_voronoi(polygon)
        return lambda batch: voronoi_contains_batch(generators, batch, threads=threads)
    if engine == "sign_of_offset":
        return lambda batch: sign_of_offset_contains_batch(polygon, batch, threads=threads)
    return lambda batch: ray_crossing_contains_batch(polygon, batch, threads=threads)


class Disagreement(NamedTuple):
    index: int
    x: float
    y: float
    edge_distance: float  # to the nearest edge line
    inside: Tuple[str, ...]  # engines that report the point inside


@dataclass
class ValidationReport:
    n_edges: int
    points: int
    engines: Tuple[str, ...]
    inside_counts: Dict[str, int]
    agreements: Dict[str, int]  # "a/b" engine pair -> points agreed on
    total_disagreements: int
    boundary_disagreements: int  # disagreements within the boundary band
    disagreements: List[Disagreement] = field(default_factory=list)
    residuals: Dict[str, float] = field(default_factory=dict)
    band: float = default_boundary_band
    elapsed: timedelta = timedelta(0)

    @property
    def passed(self) -> bool:
        return self.boundary_disagreements == self.total_disagreements


def run_validation(
    polygon: ConvexPolygon,
    batch: Optional[PointBatch] = None,
    count: int = default_validation_count,
    seed: int = 0,
    box: Optional[Box] = None,
    generators: Optional[GeneratorSet] = None,
    engines: Sequence[str] = engine_names,
    band: float = default_boundary_band,
    cap: int = default_disagreement_cap,
    threads: int = 1,
    logger: Optional[logging.Logger] = None,
) -> ValidationReport:
    """
    Cross-check the engines on the same batch. The validation passes if every
    point the engines disagree on lies within band of an edge line.

    :param polygon:
    :param batch: points to check, sampled from box if not given
    :param count: number of points to sample
    :param seed:
    :param box: sampling box, defaults to 2x the bounding box
    :param generators: generator set to check instead of converting polygon
    :param engines:
    :param band: boundary band width
    :param cap: max disagreements listed in the report
    :param threads:
    :param logger:
    :return:
    """
    logger = get_logger(logger)
    start_time = timer()
    engines = tuple(sorted({canonical_engine(e) for e in engines}, key=engine_sort_key))
    if len(engines) < 2:
        raise InvalidParameter(f"Need at least 2 engines to validate: {engines}")
    if batch is None:
        batch = sample_points(count, box or default_sample_box(polygon), seed)
    if generators is None:
        generators = to_voronoi(polygon)

    masks: Dict[str, InclusionMask] = {}
    for engine in engines:
        kernel_start = timer()
        masks[engine] = engine_kernel(engine, polygon, generators, threads)(batch)
        logger.debug(
            f'"{engine}" checked {humanize.intcomma(batch.m)} points in '
            f"{humanize.precisedelta(timedelta(seconds=timer() - kernel_start))}"
        )

    agreements = {}
    disagree = np.zeros(batch.m, dtype=bool)
    for i, a in enumerate(engines):
        for b in engines[i + 1:]:
            differs = masks[a] != masks[b]
            agreements[f"{a}/{b}"] = int(batch.m - np.count_nonzero(differs))
            disagree |= differs

    index = np.flatnonzero(disagree)
    distances = edge_line_distances(polygon, batch.take(index))
    disagreements = [
        Disagreement(
            index=int(j),
            x=float(batch.xs[j]),
            y=float(batch.ys[j]),
            edge_distance=float(d),
            inside=tuple(e for e in engines if masks[e][j]),
        )
        for j, d in zip(index[:cap].tolist(), distances[:cap].tolist())
    ]
    return ValidationReport(
        n_edges=polygon.n,
        points=batch.m,
        engines=engines,
        inside_counts={e: int(np.count_nonzero(masks[e])) for e in engines},
        agreements=agreements,
        total_disagreements=len(index),
        boundary_disagreements=int(np.count_nonzero(distances <= band)),
        disagreements=disagreements,
        residuals=generator_residuals(polygon, generators),
        band=band,
        elapsed=timedelta(seconds=timer() - start_time),
    )


def format_report(report: ValidationReport) -> str:
    lines = [
        f"Validated {humanize.intcomma(report.points)} points against a "
        f"{report.n_edges}-edge polygon in {humanize.precisedelta(report.elapsed)}",
    ]
    for engine in report.engines:
        lines.append(
            f"  {engine}: {humanize.intcomma(report.inside_counts[engine])} inside"
        )
    for pair, agreed in report.agreements.items():
        lines.append(
            f"  {pair}: {humanize.intcomma(agreed)}/{humanize.intcomma(report.points)} agree"
        )
    lines.append(
        "  generator residuals: "
        + ", ".join(f"{k}={v:.3g}" for k, v in report.residuals.items())
    )
    lines.append(
        f"  disagreements: {report.total_disagreements} "
        f"({report.boundary_disagreements} within {report.band:g} of an edge line)"
    )
    for d in report.disagreements:
        lines.append(
            f"    #{d.index} ({d.x!r}, {d.y!r}) edge distance {d.edge_distance:.3g}, "
            f"inside for [{', '.join(d.inside)}]"
        )
    if len(report.disagreements) < report.total_disagreements:
        lines.append(
            f"    ... {report.total_disagreements - len(report.disagreements)} more"
        )
    lines.append("PASS" if report.passed else "FAIL")
    return "\n".join(lines)


def _time_ns(func: Callable, *args):
    start = time.perf_counter_ns()
    result = func(*args)
    return result, time.perf_counter_ns() - start


def run_benchmark(
    config: BenchConfig,
    logger: Optional[logging.Logger] = None,
) -> List[BenchRecord]:
    """
    Time every engine on regular polygons of every edge count. The Voronoi
    conversion is timed as its own "convert" record and is not part of the
    "query" records.

    :param config:
    :param logger:
    :return:
    """
    logger = get_logger(logger)
    config.validate()
    records: List[BenchRecord] = []
    start_time = timer()

    for engine in config.engines:
        logger.info(f"::group::{engine}")
        engine_records: List[BenchRecord] = []
        try:
            for n in config.edge_counts:
                n_start_time = timer()
                polygon = generate_regular_polygon(n)
                box = config.sample_box or default_sample_box(polygon)
                batch = sample_points(config.batch_size, box, config.seed)

                generators = None
                if engine == "voronoi":
                    generators, convert_ns = _time_ns(to_voronoi, polygon)
                    engine_records.append(
                        BenchRecord.from_timing(
                            engine, n, config.batch_size, 0, "convert", convert_ns
                        )
                    )
                kernel = engine_kernel(engine, polygon, generators, config.threads)
                if config.warmup:
                    kernel(batch)
                for repetition in range(config.repetitions):
                    _, query_ns = _time_ns(kernel, batch)
                    engine_records.append(
                        BenchRecord.from_timing(
                            engine, n, config.batch_size, repetition, "query", query_ns
                        )
                    )
                logger.info(
                    f'{"=" * 10} "{engine}" n={n} took '
                    f"{humanize.precisedelta(timedelta(seconds=timer() - n_start_time))} "
                    f'{"=" * 20}'
                )
        except Exception:  # noqa, pylint: disable=broad-except
            logger.exception(f'[!] "{engine}" failed, skipping its records')
            engine_records = []
        records.extend(engine_records)
        logger.info("::endgroup::")

    logger.info(
        f"Benchmark took {humanize.precisedelta(timedelta(seconds=timer() - start_time))}"
    )
    return records


def format_summary_markdown(summaries: Sequence[RecordSummary]) -> str:
    summary = """| Engine | Edges | Phase | Median | Throughput |
| ------ | ----- | ----- | ------ | ---------- |
"""
    for s in summaries:
        summary += (
            f"| {s.engine} | {s.n_edges} | {s.phase} | "
            f"{format_duration_ns(s.median_wall_time_ns)} | "
            f"{format_throughput(s.median_throughput_pts_per_s)} |\n"
        )
    return summary


def parse_edge_counts(value: str) -> List[int]:
    """
    "3..15" (inclusive range) or "3,5,7"

    :param value:
    :return:
    """
    try:
        if ".." in value:
            lo, hi = value.split("..", 1)
            counts = list(range(int(lo), int(hi) + 1))
        else:
            counts = [int(v) for v in value.split(",") if v.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"Invalid edge counts: {value!r}") from err
    if not counts:
        raise argparse.ArgumentTypeError(f"No edge counts in {value!r}")
    return counts


def _get_suite(name: str) -> BenchConfig:
    suite = custom_suites.get(name) or default_suites.get(name)
    if not suite:
        raise InvalidParameter(
            f"Unknown suite {name!r}, expected one of "
            f"{', '.join(sorted({*default_suites, *custom_suites}))}"
        )
    # copy so that command line overrides do not leak into the suite
    return replace(suite)


def _cmd_convert(args) -> int:
    polygon = load_polygon(args.polygon, logger=logger)
    if polygon.reversed_input:
        logger.warning("Polygon vertices were clockwise and have been reversed.")
    generators = to_voronoi(polygon)
    output = json.dumps(dump_generators(generators, polygon), indent=2)
    if args.out:
        Path(args.out).write_text(output + "\n", encoding="utf-8")
        logger.info(f'Saved {generators.n + 1} generators to "{args.out}"')
    else:
        sys.stdout.write(output + "\n")
    return exit_ok


def _cmd_test(args) -> int:
    engine = canonical_engine(args.engine)
    generators = None
    if args.generators:
        if engine != "voronoi":
            raise InvalidParameter("--generators only applies to the voronoi engine")
        generators, polygon = load_generators(args.generators, logger=logger)
    elif not args.polygon:
        raise InvalidParameter("--polygon or --generators is required")
    elif engine == "ray_crossing":
        # simple polygons do not need to be convex for ray crossing
        polygon = load_vertices(args.polygon, logger=logger)
    else:
        polygon = load_polygon(args.polygon, logger=logger)

    batch = load_points(args.points, logger=logger)
    mask, query_ns = _time_ns(engine_kernel(engine, polygon, generators, args.threads), batch)
    logger.debug(
        f'"{engine}" tested {humanize.intcomma(batch.m)} points in '
        f"{format_duration_ns(query_ns)}, {int(np.count_nonzero(mask))} inside"
    )

    fmt = args.format or ("bin" if args.out and args.out.endswith(".bin") else "csv")
    if fmt == "bin":
        if args.out:
            with open(args.out, "wb") as f:
                write_mask_binary(mask, f)
        else:
            write_mask_binary(mask, sys.stdout.buffer)
            sys.stdout.buffer.flush()
    elif args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            write_mask_csv(mask, f)
    else:
        write_mask_csv(mask, sys.stdout)
    return exit_ok


def _cmd_validate(args) -> int:
    polygon = load_polygon(args.polygon, logger=logger)
    batch = load_points(args.points, logger=logger) if args.points else None
    report = run_validation(
        polygon,
        batch=batch,
        count=args.count,
        seed=args.seed,
        engines=args.engines or engine_names,
        band=args.band,
        threads=args.threads,
        logger=logger,
    )
    logger.info(format_report(report))
    return exit_ok if report.passed else exit_failed


def _cmd_bench(args) -> int:
    config = _get_suite(args.suite)
    if args.edges:
        config.edge_counts = args.edges
    if args.batch is not None:
        config.batch_size = args.batch
    if args.reps is not None:
        config.repetitions = args.reps
    if args.seed is not None:
        config.seed = args.seed
    engines = args.engines or get_env_csv("engines")
    if engines:
        config.engines = engines
    config.threads = (
        args.threads if args.threads is not None else get_env_int("threads", config.threads)
    )
    if args.no_warmup:
        config.warmup = False
    config.validate()

    records = run_benchmark(config, logger=logger)
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        write_records_csv(records, f)
    logger.info(f'Saved {len(records)} records to "{args.out}"')

    summary = format_summary_markdown(summarize_records(records))
    logger.info(summary)
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as f:
            f.write(summary)
    return exit_ok


def _engine_list(value: str) -> List[str]:
    try:
        return [canonical_engine(e) for e in value.split(",") if e.strip()]
    except InvalidParameter as err:
        raise argparse.ArgumentTypeError(str(err)) from err


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Convex point-in-polygon tests via Voronoi generators"
    )
    parser.add_argument(
        "-v",
        "--verbose",
        dest="verbose",
        action="store_true",
        help="Enable more verbose messages for debugging",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    convert = subparsers.add_parser("convert", help="Convert a polygon into generators")
    convert.add_argument("--polygon", required=True, help="Polygon file or url")
    convert.add_argument("--out", help="Output JSON file, stdout if not set")
    convert.set_defaults(func=_cmd_convert)

    test = subparsers.add_parser("test", help="Test points against a polygon")
    test.add_argument("--polygon", help="Polygon file or url")
    test.add_argument("--generators", help="Generators JSON saved by convert")
    test.add_argument("--points", required=True, help="Points CSV or PIPB file")
    test.add_argument(
        "--engine",
        default="voronoi",
        choices=["voronoi", "offset", "crossing", "sign_of_offset", "ray_crossing"],
    )
    test.add_argument("--out", help="Mask output file, stdout if not set")
    test.add_argument("--format", choices=["csv", "bin"], help="Mask output format")
    test.add_argument("--threads", type=int, default=1)
    test.set_defaults(func=_cmd_test)

    validate = subparsers.add_parser("validate", help="Cross-check the engines")
    validate.add_argument("--polygon", required=True, help="Polygon file or url")
    validate.add_argument("--points", help="Points to check, sampled if not set")
    validate.add_argument("--count", type=int, default=default_validation_count)
    validate.add_argument("--seed", type=int, default=0)
    validate.add_argument("--engines", type=_engine_list)
    validate.add_argument("--band", type=float, default=default_boundary_band)
    validate.add_argument("--threads", type=int, default=1)
    validate.set_defaults(func=_cmd_validate)

    bench = subparsers.add_parser("bench", help="Benchmark the engines")
    bench.add_argument("--suite", default=default_suite, help="Named suite to start from")
    bench.add_argument("--edges", type=parse_edge_counts, help='e.g. "3..15" or "3,7,15"')
    bench.add_argument("--batch", type=int)
    bench.add_argument("--reps", type=int)
    bench.add_argument("--seed", type=int)
    bench.add_argument("--engines", type=_engine_list)
    bench.add_argument("--threads", type=int)
    bench.add_argument("--no-warmup", dest="no_warmup", action="store_true")
    bench.add_argument("--out", required=True, help="Records CSV")
    bench.add_argument("--summary", help="Markdown summary of the median timings")
    bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    verbose = get_env_bool("verbose") or args.verbose
    if verbose:
        logger.setLevel(logging.DEBUG)
    try:
        return args.func(args)
    except (
        GeometryError,
        InputFormatError,
        OSError,
        UnicodeDecodeError,
        requests.exceptions.RequestException,
    ) as err:
        if verbose:
            logger.exception(f"[!] {err.__class__.__name__}")
        else:
            logger.error(f"[!] {err.__class__.__name__}: {err}")
        return exit_input_error


if __name__ == "__main__":
    sys.exit(main())
