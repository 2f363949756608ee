# This software is released under the GNU General Public License v3.0
# https://opensource.org/licenses/GPL-3.0

# Readers and writers for polygon, generator, point batch, mask and
# benchmark record files
import csv
import io
import json
from dataclasses import asdict, fields
from pathlib import Path
from typing import IO, Dict, List, Optional, Tuple, Union

import numpy as np

from _bench_utils import BenchRecord
from _engines import InclusionMask, PointBatch
from _geometry import (
    ConvexPolygon,
    GeometryError,
    Point2,
    default_convexity_eps,
    validate_polygon,
)
from _voronoi import GeneratorSet, generators_from_points
from _utils import read_source

points_magic = b"PIPB"
mask_magic = b"PIPM"
binary_version = 1
# 16 bytes: magic, uint32 version, uint64 count, little-endian
header_dtype = np.dtype([("magic", "S4"), ("version", "<u4"), ("count", "<u8")])

record_fields: List[str] = [f.name for f in fields(BenchRecord)]


class InputFormatError(ValueError):
    """Malformed input file"""


def _parse_pairs(rows, source: str) -> List[Point2]:
    pairs = []
    for i, row in enumerate(rows):
        try:
            if isinstance(row, (str, bytes)):
                raise TypeError("a string is not a pair")
            x, y = row
            pairs.append(Point2(float(x), float(y)))
        except (TypeError, ValueError) as err:
            raise InputFormatError(f"{source}: row {i} is not an x,y pair: {row!r}") from err
    return pairs


def _csv_rows(text: str) -> List[List[str]]:
    return [
        [c.strip() for c in row]
        for row in csv.reader(io.StringIO(text))
        if row and any(c.strip() for c in row)
    ]


def _looks_like_json(path_or_url: Union[str, Path], text: str) -> bool:
    if str(path_or_url).lower().endswith(".json"):
        return True
    return text.lstrip().startswith("{")


def parse_vertices(text: str, source: str = "<polygon>", as_json: bool = False) -> List[Point2]:
    """
    Vertices from {"vertices": [[x, y], ...]} JSON or headerless x,y CSV

    :param text:
    :param source: name used in error messages
    :param as_json:
    :return:
    """
    if as_json or text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.decoder.JSONDecodeError as err:
            raise InputFormatError(f"{source}: invalid JSON: {err}") from err
        if not isinstance(doc, dict) or not isinstance(doc.get("vertices"), list):
            raise InputFormatError(f'{source}: expected an object with a "vertices" list')
        return _parse_pairs(doc["vertices"], source)
    return _parse_pairs(_csv_rows(text), source)


def load_vertices(path_or_url: Union[str, Path], logger=None) -> List[Point2]:
    """Raw polygon vertices, not checked for convexity"""
    text = read_source(path_or_url, logger).decode("utf-8")
    return parse_vertices(
        text, str(path_or_url), as_json=_looks_like_json(path_or_url, text)
    )


def load_polygon(
    path_or_url: Union[str, Path], eps: float = default_convexity_eps, logger=None
) -> ConvexPolygon:
    return validate_polygon(load_vertices(path_or_url, logger), eps=eps)


def dump_generators(
    generators: GeneratorSet, polygon: Optional[ConvexPolygon] = None
) -> Dict:
    doc: Dict = {
        "inner": list(generators.inner),
        "outer": [list(p) for p in generators.outer],
    }
    if polygon is not None:
        # stored alongside so that the conversion can be reused as is
        doc["vertices"] = [list(v) for v in polygon.vertices]
    return doc


def parse_generators(
    text: str, source: str = "<generators>"
) -> Tuple[GeneratorSet, Optional[ConvexPolygon]]:
    try:
        doc = json.loads(text)
    except json.decoder.JSONDecodeError as err:
        raise InputFormatError(f"{source}: invalid JSON: {err}") from err
    if not isinstance(doc, dict) or "inner" not in doc or "outer" not in doc:
        raise InputFormatError(f'{source}: expected "inner" and "outer" keys')
    polygon = None
    if doc.get("vertices"):
        polygon = validate_polygon(_parse_pairs(doc["vertices"], source))
    inner = _parse_pairs([doc["inner"]], source)[0]
    outer = _parse_pairs(doc["outer"], source)
    if not outer:
        raise InputFormatError(f"{source}: no outer generators")
    try:
        return generators_from_points(inner, outer, polygon), polygon
    except GeometryError as err:
        raise InputFormatError(f"{source}: {err}") from err


def load_generators(
    path_or_url: Union[str, Path], logger=None
) -> Tuple[GeneratorSet, Optional[ConvexPolygon]]:
    text = read_source(path_or_url, logger).decode("utf-8")
    return parse_generators(text, str(path_or_url))


def _read_header(data: bytes, magic: bytes, source: str) -> int:
    if len(data) < header_dtype.itemsize:
        raise InputFormatError(f"{source}: truncated header")
    header = np.frombuffer(data, dtype=header_dtype, count=1)[0]
    if header["magic"] != magic:
        raise InputFormatError(f"{source}: bad magic {header['magic']!r}")
    if header["version"] != binary_version:
        raise InputFormatError(f"{source}: unsupported version {header['version']}")
    return int(header["count"])


def _header(magic: bytes, count: int) -> bytes:
    return np.array([(magic, binary_version, count)], dtype=header_dtype).tobytes()


def parse_points(data: bytes, source: str = "<points>") -> PointBatch:
    """
    Points from the PIPB binary format (detected by its magic) or from
    headerless x,y CSV

    :param data:
    :param source:
    :return:
    """
    if data[:4] == points_magic:
        m = _read_header(data, points_magic, source)
        body = data[header_dtype.itemsize:]
        if len(body) != m * 16:
            raise InputFormatError(
                f"{source}: expected {m} points ({m * 16} bytes), got {len(body)} bytes"
            )
        pairs = np.frombuffer(body, dtype="<f8").reshape(m, 2)
        return PointBatch(xs=pairs[:, 0], ys=pairs[:, 1])
    text = data.decode("utf-8")
    pairs = _parse_pairs(_csv_rows(text), source)
    if not pairs:
        return PointBatch(xs=np.empty(0), ys=np.empty(0))
    return PointBatch.from_points(pairs)


def load_points(path_or_url: Union[str, Path], logger=None) -> PointBatch:
    return parse_points(read_source(path_or_url, logger), str(path_or_url))


def write_points_binary(batch: PointBatch, f: IO[bytes]) -> None:
    f.write(_header(points_magic, batch.m))
    pairs = np.empty((batch.m, 2), dtype="<f8")
    pairs[:, 0] = batch.xs
    pairs[:, 1] = batch.ys
    f.write(pairs.tobytes())


def write_points_csv(batch: PointBatch, f: IO[str]) -> None:
    writer = csv.writer(f, lineterminator="\n")
    for x, y in zip(batch.xs.tolist(), batch.ys.tolist()):
        writer.writerow([repr(x), repr(y)])


def write_mask_csv(mask: InclusionMask, f: IO[str]) -> None:
    f.writelines(f"{int(bit)}\n" for bit in mask.tolist())


def write_mask_binary(mask: InclusionMask, f: IO[bytes]) -> None:
    f.write(_header(mask_magic, len(mask)))
    f.write(np.packbits(mask.astype(np.uint8), bitorder="little").tobytes())


def parse_mask(data: bytes, source: str = "<mask>") -> InclusionMask:
    if data[:4] == mask_magic:
        m = _read_header(data, mask_magic, source)
        body = np.frombuffer(data[header_dtype.itemsize:], dtype=np.uint8)
        if len(body) != (m + 7) // 8:
            raise InputFormatError(f"{source}: expected {(m + 7) // 8} mask bytes")
        return np.unpackbits(body, count=m, bitorder="little").astype(bool)
    bits = [line.strip() for line in data.decode("utf-8").splitlines() if line.strip()]
    if any(b not in ("0", "1") for b in bits):
        raise InputFormatError(f"{source}: mask rows must be 0 or 1")
    return np.array([b == "1" for b in bits], dtype=bool)


def write_records_csv(records: List[BenchRecord], f: IO[str]) -> None:
    writer = csv.DictWriter(f, fieldnames=record_fields, lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow(asdict(record))


def read_records_csv(f: IO[str]) -> List[BenchRecord]:
    reader = csv.DictReader(f)
    if reader.fieldnames != record_fields:
        raise InputFormatError(f"Unexpected record header: {reader.fieldnames}")
    records = []
    for row in reader:
        try:
            records.append(
                BenchRecord(
                    engine=row["engine"],
                    n_edges=int(row["n_edges"]),
                    batch_size=int(row["batch_size"]),
                    repetition=int(row["repetition"]),
                    phase=row["phase"],
                    wall_time_ns=int(row["wall_time_ns"]),
                    throughput_pts_per_s=float(row["throughput_pts_per_s"]),
                )
            )
        except (TypeError, ValueError) as err:
            raise InputFormatError(f"Invalid record row {row}: {err}") from err
    return records
