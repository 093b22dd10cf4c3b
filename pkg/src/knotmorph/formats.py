"""Stick-knot files, mesh export, and session documents.

Knot files are plain ASCII: '#' comment lines, optional "name:", "type:"
and "closed:" headers, then one "x y z" triple per line. Polygons are
closed by convention unless the file says "closed: false".

Session documents are versioned JSON; unknown fields survive a round-trip
untouched. All exports are ASCII with floats printed at 17 significant
digits so re-imported coordinates are bit-exact.
"""
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, ParseError, ValidationError
from .knots import ControlPolygon, validate_polygon

SESSION_FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class KnotRecord:
    """A named stick knot; the type label is taken on trust from the source."""

    name: str
    claimed_type: str
    polygon: ControlPolygon

    def __eq__(self, other):
        if not isinstance(other, KnotRecord):
            return NotImplemented
        return (self.name == other.name
                and self.claimed_type == other.claimed_type
                and self.polygon == other.polygon)


def _fmt(x):
    return repr(float(x))


def parse_stick_knot(text, require_valid=True, default_name="unnamed"):
    """Parse a stick-knot file into a KnotRecord.

    Malformed lines raise ParseError with the line number. With
    require_valid (the default) the polygon must pass the initial input
    validation; violations raise ValidationError listing all of them.
    """
    name = default_name
    claimed_type = "unknown"
    closed = True
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        lower = line.lower()
        if lower.startswith("name:"):
            name = line.split(":", 1)[1].strip()
            continue
        if lower.startswith("type:"):
            claimed_type = line.split(":", 1)[1].strip()
            continue
        if lower.startswith("closed:"):
            value = line.split(":", 1)[1].strip().lower()
            if value not in ("true", "false"):
                raise ParseError(f"closed must be true or false, got {value!r}", lineno)
            closed = value == "true"
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(
                f"expected 3 coordinates, got {len(parts)}: {line!r}", lineno)
        try:
            triple = [float(p) for p in parts]
        except ValueError:
            raise ParseError(f"not a number in {line!r}", lineno) from None
        if not all(math.isfinite(v) for v in triple):
            raise ParseError(f"non-finite coordinate in {line!r}", lineno)
        points.append(triple)
    if not points:
        raise ParseError("no points in knot file", None)
    polygon = ControlPolygon(np.asarray(points, dtype=float), closed)
    if require_valid:
        verdict = validate_polygon(polygon, initial=True)
        if not verdict.ok:
            raise ValidationError(verdict)
    return KnotRecord(name, claimed_type, polygon)


def serialize_stick_knot(record):
    lines = [f"name: {record.name}", f"type: {record.claimed_type}"]
    if not record.polygon.closed:
        lines.append("closed: false")
    for p in record.polygon.points:
        lines.append(f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}")
    return "\n".join(lines) + "\n"


def read_knot_file(path, require_valid=True):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_stick_knot(text, require_valid=require_valid,
                            default_name=Path(path).stem)


def write_knot_file(record, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_stick_knot(record))


# ---------------------------------------------------------------------------
# mesh export


def export_mesh(mesh, destination, report=None, fmt="obj"):
    """Write a triangle mesh; returns the list of files written.

    OBJ meshes get witness segments (if a report with pairs is given) in a
    sibling ``<stem>.witness.obj`` file as OBJ line elements. Output is
    deterministic: same mesh, same bytes.
    """
    destination = Path(destination)
    written = []
    if fmt == "obj":
        destination = destination.with_suffix(".obj")
        _write_obj(mesh, destination)
        written.append(destination)
        if report is not None and (report.pairs or report.grazing):
            witness_path = destination.parent / (destination.stem + ".witness.obj")
            _write_witness_obj(report, witness_path)
            written.append(witness_path)
    elif fmt == "ply":
        destination = destination.with_suffix(".ply")
        _write_ply(mesh, destination)
        written.append(destination)
    else:
        raise DomainError(f"unknown mesh format {fmt!r} (use obj or ply)")
    return written


def _write_obj(mesh, path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# knotmorph triangle mesh\n")
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def _write_witness_obj(report, path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# knotmorph intersection witness segments\n")
        fh.write(f"# pairs {len(report.pairs)} grazing {len(report.grazing)}\n")
        k = 1
        for label, hits in (("pair", report.pairs), ("grazing", report.grazing)):
            for h in hits:
                fh.write(f"# {label} triangles {h.tri_a} {h.tri_b}\n")
                a, b = h.witness_a, h.witness_b
                fh.write(f"v {a[0]:.17g} {a[1]:.17g} {a[2]:.17g}\n")
                fh.write(f"v {b[0]:.17g} {b[1]:.17g} {b[2]:.17g}\n")
                fh.write(f"l {k} {k + 1}\n")
                k += 2


def _write_ply(mesh, path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(mesh.vertices)}\n")
        fh.write("property double x\nproperty double y\nproperty double z\n")
        fh.write(f"element face {len(mesh.triangles)}\n")
        fh.write("property list uchar int vertex_indices\n")
        fh.write("end_header\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for t in mesh.triangles:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")


# ---------------------------------------------------------------------------
# session documents


@dataclass(eq=False)
class SessionDocument:
    """Everything needed to reproduce an experiment session.

    ``extra`` carries unknown top-level fields verbatim so documents from
    newer writers survive a load/save round-trip.
    """

    version: int = SESSION_FORMAT_VERSION
    knots: list = field(default_factory=list)
    morphs: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_json_dict(self):
        doc = {
            "format": "knotmorph.session",
            "version": self.version,
            "knots": [knot_record_to_dict(k) for k in self.knots],
            "morphs": self.morphs,
            "results": self.results,
        }
        doc.update(self.extra)
        return doc

    @classmethod
    def from_json_dict(cls, doc):
        if doc.get("format") != "knotmorph.session":
            raise ParseError("not a knotmorph session document")
        version = doc.get("version")
        if not isinstance(version, int) or version < 1:
            raise ParseError(f"unsupported session version {version!r}")
        known = {"format", "version", "knots", "morphs", "results"}
        extra = {k: v for k, v in doc.items() if k not in known}
        return cls(
            version=version,
            knots=[knot_record_from_dict(k) for k in doc.get("knots", [])],
            morphs=list(doc.get("morphs", [])),
            results=dict(doc.get("results", {})),
            extra=extra,
        )

    def __eq__(self, other):
        if not isinstance(other, SessionDocument):
            return NotImplemented
        return self.to_json_dict() == other.to_json_dict()


def knot_record_to_dict(record):
    return {
        "name": record.name,
        "type": record.claimed_type,
        "closed": record.polygon.closed,
        "points": [[float(c) for c in p] for p in record.polygon.points],
    }


def knot_record_from_dict(d):
    try:
        polygon = ControlPolygon(np.asarray(d["points"], dtype=float),
                                 bool(d.get("closed", True)))
    except (KeyError, TypeError, ValueError, DomainError) as exc:
        raise ParseError(f"bad knot record: {exc}") from None
    return KnotRecord(str(d.get("name", "unnamed")),
                      str(d.get("type", "unknown")), polygon)


def dump_session(document):
    return json.dumps(document.to_json_dict(), indent=2, sort_keys=True) + "\n"


def parse_session(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc.msg}", exc.lineno) from None
    return SessionDocument.from_json_dict(doc)


def save_session(document, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_session(document))


def load_session(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_session(fh.read())
