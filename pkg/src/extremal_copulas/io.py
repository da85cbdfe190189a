"""JSON and CSV persistence for measures, maps, and reports.

Every JSON document carries a ``format`` tag ``<name>/<major>.<minor>``;
loaders reject unknown names and major versions.  Rationals are written as
``"p/q"`` strings so that exact measures round-trip exactly; loaders also
accept plain JSON numbers (converted via their binary value).
"""

from __future__ import annotations

import csv
import dataclasses
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .constructions import PiecewiseLinearMap
from .errors import DomainError, InvalidMeasureError
from .measures import (
    GridDensity,
    GridMeasure,
    GridSpec,
    MixedMeasure,
    Segment,
    SegmentMeasure,
)
from .rationals import to_fraction

FORMAT_MAJOR = 1
FORMAT_MINOR = 0


def _tag(name: str) -> str:
    return f"{name}/{FORMAT_MAJOR}.{FORMAT_MINOR}"


def _check_tag(doc: dict, name: str) -> None:
    tag = doc.get("format")
    if not isinstance(tag, str) or "/" not in tag:
        raise InvalidMeasureError(f"missing format tag (expected {name!r} document)")
    doc_name, _, version = tag.partition("/")
    if doc_name != name:
        raise InvalidMeasureError(f"expected a {name!r} document, found {doc_name!r}")
    major = version.split(".")[0]
    if not major.isdigit() or int(major) != FORMAT_MAJOR:
        raise InvalidMeasureError(f"unsupported {name} format version {version!r}")


def _enc(value: Fraction) -> str:
    return str(value)


def _dec(value) -> Fraction:
    return to_fraction(value)


def _dump(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _load(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidMeasureError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise InvalidMeasureError(f"{path}: expected a JSON object")
    return doc


# ---------------------------------------------------------------------------
# Segment measures
# ---------------------------------------------------------------------------

def segment_measure_to_doc(measure: SegmentMeasure) -> dict:
    return {
        "format": _tag("segment-measure"),
        "n": measure.n,
        "segments": [
            {
                "a": [_enc(c) for c in seg.a],
                "b": [_enc(c) for c in seg.b],
                "w": _enc(seg.weight),
            }
            for seg in measure.segments
        ],
    }


def segment_measure_from_doc(doc: dict) -> SegmentMeasure:
    _check_tag(doc, "segment-measure")
    n = int(doc["n"])
    segments = [
        Segment(
            tuple(_dec(c) for c in item["a"]),
            tuple(_dec(c) for c in item["b"]),
            _dec(item["w"]),
        )
        for item in doc["segments"]
    ]
    measure = SegmentMeasure(segments)
    if measure.n != n:
        raise InvalidMeasureError("declared dimension does not match segments")
    return measure


def save_segment_measure(measure: SegmentMeasure, path) -> None:
    _dump(segment_measure_to_doc(measure), path)


def load_segment_measure(path) -> SegmentMeasure:
    return segment_measure_from_doc(_load(path))


# ---------------------------------------------------------------------------
# Grid measures and densities
# ---------------------------------------------------------------------------

def save_grid_measure(measure: GridMeasure, path) -> None:
    _dump(
        {
            "format": _tag("grid-measure"),
            "n": measure.spec.n,
            "m": measure.spec.m,
            "D": measure.denominator,
            "t": [int(v) for v in measure.entries.reshape(-1)],
        },
        path,
    )


def grid_measure_from_doc(doc: dict) -> GridMeasure:
    _check_tag(doc, "grid-measure")
    spec = GridSpec(int(doc["n"]), int(doc["m"]))
    return GridMeasure(spec, int(doc["D"]), np.array(doc["t"], dtype=np.int64))


def load_grid_measure(path) -> GridMeasure:
    return grid_measure_from_doc(_load(path))


def save_grid_density(density: GridDensity, path) -> None:
    _dump(
        {
            "format": _tag("grid-density"),
            "n": density.spec.n,
            "m": density.spec.m,
            "values": [_enc(v) for v in density.values.reshape(-1)],
        },
        path,
    )


def grid_density_from_doc(doc: dict) -> GridDensity:
    _check_tag(doc, "grid-density")
    spec = GridSpec(int(doc["n"]), int(doc["m"]))
    values = np.empty(spec.shape, dtype=object)
    values.reshape(-1)[:] = [_dec(v) for v in doc["values"]]
    return GridDensity(spec, values)


def load_grid_density(path) -> GridDensity:
    return grid_density_from_doc(_load(path))


# ---------------------------------------------------------------------------
# Mixed measures
# ---------------------------------------------------------------------------

def save_mixed_measure(measure: MixedMeasure, path) -> None:
    doc = {
        "format": _tag("mixed-measure"),
        "ac_weight": _enc(measure.ac_weight),
        "density": None,
        "singular": None,
    }
    if measure.density is not None:
        doc["density"] = {
            "n": measure.density.spec.n,
            "m": measure.density.spec.m,
            "values": [_enc(v) for v in measure.density.values.reshape(-1)],
        }
    if measure.singular is not None:
        doc["singular"] = segment_measure_to_doc(measure.singular)
    _dump(doc, path)


def load_mixed_measure(path) -> MixedMeasure:
    doc = _load(path)
    _check_tag(doc, "mixed-measure")
    density = None
    if doc.get("density") is not None:
        d = doc["density"]
        spec = GridSpec(int(d["n"]), int(d["m"]))
        values = np.empty(spec.shape, dtype=object)
        values.reshape(-1)[:] = [_dec(v) for v in d["values"]]
        density = GridDensity(spec, values)
    singular = None
    if doc.get("singular") is not None:
        singular = segment_measure_from_doc(doc["singular"])
    return MixedMeasure(_dec(doc["ac_weight"]), density, singular)


def load_measure(path):
    """Dispatch on the format tag: segment, grid, density, or mixed."""
    doc = _load(path)
    tag = str(doc.get("format", ""))
    name = tag.partition("/")[0]
    loaders = {
        "segment-measure": segment_measure_from_doc,
        "grid-measure": grid_measure_from_doc,
        "grid-density": grid_density_from_doc,
    }
    if name in loaders:
        return loaders[name](doc)
    if name == "mixed-measure":
        return load_mixed_measure(path)
    raise InvalidMeasureError(f"unrecognized measure format {tag!r}")


# ---------------------------------------------------------------------------
# Piecewise-linear maps
# ---------------------------------------------------------------------------

def save_piecewise_linear_map(plm: PiecewiseLinearMap, path) -> None:
    pieces = []
    for row in plm.coeffs:
        for coord, (slope, intercept) in enumerate(row):
            pieces.append(
                {"coord": coord + 2, "slope": _enc(slope), "intercept": _enc(intercept)}
            )
    _dump(
        {
            "format": _tag("piecewise-linear-map"),
            "breakpoints": [_enc(x) for x in plm.breakpoints],
            "pieces": pieces,
        },
        path,
    )


def load_piecewise_linear_map(path) -> PiecewiseLinearMap:
    doc = _load(path)
    _check_tag(doc, "piecewise-linear-map")
    breakpoints = [_dec(x) for x in doc["breakpoints"]]
    entries = doc["pieces"]
    coords = sorted({int(p["coord"]) for p in entries})
    if coords != list(range(2, 2 + len(coords))):
        raise DomainError("piece coordinates must be contiguous starting at 2")
    n_out = len(coords)
    intervals = len(breakpoints) - 1
    if len(entries) != intervals * n_out:
        raise DomainError("pieces must list every (interval, coordinate) pair")
    coeffs = [[None] * n_out for _ in range(intervals)]
    counters = {c: 0 for c in coords}
    for item in entries:
        coord = int(item["coord"])
        j = counters[coord]
        if j >= intervals:
            raise DomainError(f"too many pieces for coordinate {coord}")
        coeffs[j][coord - 2] = (_dec(item["slope"]), _dec(item["intercept"]))
        counters[coord] = j + 1
    return PiecewiseLinearMap(breakpoints, coeffs)


# ---------------------------------------------------------------------------
# CSV outputs
# ---------------------------------------------------------------------------

def write_samples_csv(points: np.ndarray, path) -> None:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(pts.shape[1])])
        for row in pts:
            writer.writerow([f"{v:.17g}" for v in row])


def emit_plot_data(measure: SegmentMeasure, path) -> None:
    """Segment endpoints and weights as CSV for external plotting (n = 2, 3)."""
    n = measure.n
    if n not in (2, 3):
        raise DomainError("plot data supports dimensions 2 and 3 only")
    header = (
        ["weight"]
        + [f"a{i + 1}" for i in range(n)]
        + [f"b{i + 1}" for i in range(n)]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for seg in measure.segments:
            row = [float(seg.weight)] + [float(c) for c in seg.a] + [float(c) for c in seg.b]
            writer.writerow([f"{v:.17g}" for v in row])


def load_plot_data(path) -> SegmentMeasure:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = (len(header) - 1) // 2
        segments = []
        for row in reader:
            w = float(row[0])
            a = tuple(float(v) for v in row[1:1 + n])
            b = tuple(float(v) for v in row[1 + n:1 + 2 * n])
            segments.append(Segment(a, b, w))
    return SegmentMeasure(segments)


# ---------------------------------------------------------------------------
# Generic report serialization
# ---------------------------------------------------------------------------

def to_jsonable(obj):
    """Recursively convert reports (dataclasses, Fractions, arrays) to JSON."""
    if isinstance(obj, Fraction):
        return _enc(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()] if obj.dtype == object \
            else obj.tolist()
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, SegmentMeasure):
        return segment_measure_to_doc(obj)
    return obj
