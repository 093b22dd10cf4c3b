"""PL knots as control polygons, their Bezier curves, and midpoint refinement.

A closed polygon stores each vertex once; the closing edge from the last
point back to the first is implied. The Bezier curve of a closed polygon is
built over the point list with the first point appended, so the curve starts
and ends at P0 (closed, but generally with a corner at the seam).
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import coerce_points, min_dist_to_segments, subdivide_segments

# sin(angle) below which three consecutive points count as collinear
COLLINEAR_TOL = 1e-9


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationVerdict:
    violations: tuple = ()

    @property
    def ok(self):
        return not self.violations

    def describe(self):
        if self.ok:
            return "ok"
        return "\n".join(v.message for v in self.violations)


@dataclass(frozen=True, eq=False)
class ControlPolygon:
    """Ordered 3D points read both as a PL curve and as Bezier control data."""

    points: np.ndarray
    closed: bool = True

    def __post_init__(self):
        arr = coerce_points(self.points, allow_nonfinite=True)
        object.__setattr__(self, "points", arr)

    def __eq__(self, other):
        if not isinstance(other, ControlPolygon):
            return NotImplemented
        return self.closed == other.closed and np.array_equal(self.points, other.points)

    def __len__(self):
        return len(self.points)

    @property
    def segment_count(self):
        return len(self.points) if self.closed else len(self.points) - 1

    def segment_endpoints(self):
        """(a, b) arrays of shape (segment_count, 3)."""
        pts = self.points
        if self.closed:
            return pts, np.roll(pts, -1, axis=0)
        return pts[:-1], pts[1:]


def validate_polygon(polygon, initial=True):
    """Check the input assumptions for control polygons.

    With initial=True the full contract is enforced: at least 5 points
    (degree >= 4), pairwise-distinct points, and no three consecutive points
    collinear (wrapping across the closure for closed polygons). Refined
    polygons are validated with initial=False, which only checks finiteness:
    midpoint insertion deliberately creates collinear triples.

    Always returns a verdict, never raises.
    """
    violations = []
    pts = polygon.points
    n = len(pts)
    if not np.isfinite(pts).all():
        bad = sorted(set(np.argwhere(~np.isfinite(pts))[:, 0].tolist()))
        violations.append(Violation(
            "nonfinite", f"non-finite coordinates at points {bad}"))
        return ValidationVerdict(tuple(violations))
    if not initial:
        return ValidationVerdict(tuple(violations))

    if n < 5:
        violations.append(Violation(
            "too-few-points", f"fewer than 5 control points (got {n})"))
    # pairwise distinct
    seen = {}
    for i, p in enumerate(pts):
        key = (float(p[0]), float(p[1]), float(p[2]))
        if key in seen:
            violations.append(Violation(
                "duplicate-points",
                f"points {seen[key]} and {i} coincide at ({p[0]:g}, {p[1]:g}, {p[2]:g})"))
        else:
            seen[key] = i
    # no three consecutive collinear
    triples = n if polygon.closed else n - 2
    for i in range(max(triples, 0)):
        a = pts[i]
        b = pts[(i + 1) % n]
        c = pts[(i + 2) % n]
        u = b - a
        v = c - b
        lu = np.linalg.norm(u)
        lv = np.linalg.norm(v)
        if lu == 0.0 or lv == 0.0:
            continue  # reported as duplicates above
        sin_angle = np.linalg.norm(np.cross(u, v)) / (lu * lv)
        if sin_angle <= COLLINEAR_TOL:
            violations.append(Violation(
                "collinear-triple",
                f"points {i}, {(i + 1) % n}, {(i + 2) % n} are collinear"))
    return ValidationVerdict(tuple(violations))


def refine_midpoints(polygon):
    """Insert the midpoint of every segment (closure segment included).

    The polygon's image is unchanged; the segment count doubles.
    """
    pts = polygon.points
    a, b = polygon.segment_endpoints()
    mids = 0.5 * (a + b)
    if polygon.closed:
        out = np.empty((2 * len(pts), 3))
        out[0::2] = pts
        out[1::2] = mids
    else:
        out = np.empty((2 * len(pts) - 1, 3))
        out[0::2] = pts
        out[1::2] = mids
    return ControlPolygon(out, polygon.closed)


@dataclass(frozen=True, eq=False)
class RefinementSequence:
    """Midpoint-refinement iterates of a base polygon; iterates[0] is the base."""

    base: ControlPolygon
    iterates: tuple

    @classmethod
    def build(cls, base, depth):
        iterates = [base]
        for _ in range(depth):
            iterates.append(refine_midpoints(iterates[-1]))
        return cls(base, tuple(iterates))

    def __getitem__(self, j):
        return self.iterates[j]

    def __len__(self):
        return len(self.iterates)


def insert_collinear(polygon, segment_index, fraction):
    """Insert one point on a segment at the given fraction.

    The new point is collinear with the segment's endpoints, so the
    polygon's image is unchanged while its Bezier curve changes.
    """
    if not 0.0 < fraction < 1.0:
        raise DomainError(f"fraction must lie strictly inside (0, 1), got {fraction!r}")
    if not 0 <= segment_index < polygon.segment_count:
        raise DomainError(
            f"segment index {segment_index} out of range for "
            f"{polygon.segment_count} segments")
    pts = polygon.points
    i = segment_index
    j = (i + 1) % len(pts)
    new_point = (1.0 - fraction) * pts[i] + fraction * pts[j]
    out = np.insert(pts, i + 1, new_point, axis=0)
    return ControlPolygon(out, polygon.closed)


@dataclass(frozen=True, eq=False)
class BezierCurve:
    """Bezier curve over a control polygon, evaluated by convex combinations."""

    control: ControlPolygon

    def control_points(self):
        """Control data for evaluation; closed polygons get P0 appended."""
        pts = self.control.points
        if self.control.closed:
            return np.vstack([pts, pts[:1]])
        return pts

    @property
    def degree(self):
        return len(self.control_points()) - 1


def bezier_eval(curve, t):
    """Evaluate the curve at t in [0, 1] by de Casteljau recursion.

    Repeated pairwise convex combination stays stable at the degrees
    produced by refinement (hundreds and beyond), where direct Bernstein
    summation does not.
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"curve parameter must lie in [0, 1], got {t!r}")
    b = curve.control_points().astype(float)
    s = 1.0 - t
    while len(b) > 1:
        b = s * b[:-1] + t * b[1:]
    return b[0]


def _decasteljau_batch(ctrl, ts):
    """de Casteljau over many parameters at once; returns (len(ts), 3)."""
    k = len(ctrl)
    b = np.repeat(ctrl[None, :, :], len(ts), axis=0)
    w = ts[:, None, None]
    cw = 1.0 - w
    for r in range(k - 1):
        width = k - 1 - r
        # the tail overlaps the head, so materialize it before scaling in place
        tail = w * b[:, 1:width + 1]
        head = b[:, :width]
        head *= cw
        head += tail
    return b[:, 0, :].copy()


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """A curve sampled at uniform parameters k/m, k = 0..m."""

    samples: np.ndarray
    closed: bool

    def __post_init__(self):
        arr = coerce_points(self.samples)
        if len(arr) < 2:
            raise DomainError("a sampled curve needs at least 2 samples")
        if self.closed and np.linalg.norm(arr[0] - arr[-1]) > 1e-12:
            raise DomainError("closed sampled curve must end where it starts")
        object.__setattr__(self, "samples", arr)

    def __eq__(self, other):
        if not isinstance(other, SampledCurve):
            return NotImplemented
        return self.closed == other.closed and np.array_equal(self.samples, other.samples)

    @property
    def m(self):
        return len(self.samples) - 1

    def translated(self, offset):
        offset = np.asarray(offset, dtype=float).reshape(3)
        return SampledCurve(self.samples + offset, self.closed)

    def parameter_reversed(self):
        return SampledCurve(self.samples[::-1].copy(), self.closed)

    def segment_endpoints(self):
        return self.samples[:-1], self.samples[1:]

    def as_polygon(self):
        """The samples as a PL polygon (closure duplicate dropped)."""
        if self.closed:
            return ControlPolygon(self.samples[:-1].copy(), True)
        return ControlPolygon(self.samples.copy(), False)


def sample_curve(curve, m):
    """Sample a Bezier curve at m+1 uniform parameters.

    For curves over closed polygons the last sample is forced exactly equal
    to the first.
    """
    if m < 8:
        raise DomainError(f"need at least 8 samples, got {m}")
    ts = np.linspace(0.0, 1.0, m + 1)
    samples = _decasteljau_batch(curve.control_points().astype(float), ts)
    if curve.control.closed:
        samples[-1] = samples[0]
    return SampledCurve(samples, curve.control.closed)


def polygon_to_sampled(polygon):
    """The polygon itself as a sampled curve (vertices are the samples)."""
    pts = polygon.points
    if polygon.closed:
        return SampledCurve(np.vstack([pts, pts[:1]]), True)
    return SampledCurve(pts.copy(), False)


def sample_polygon(polygon, m):
    """Resample the PL curve of a polygon at m+1 uniform parameters.

    The parameter is uniform per segment (vertex i sits at i/segments), the
    same correspondence used when pairing boundary curves into surfaces.
    """
    if m < polygon.segment_count:
        raise DomainError(
            f"need at least {polygon.segment_count} samples for this polygon")
    nseg = polygon.segment_count
    pts = polygon.points
    ext = np.vstack([pts, pts[:1]]) if polygon.closed else pts
    g = np.linspace(0.0, 1.0, m + 1) * nseg
    idx = np.minimum(g.astype(int), nseg - 1)
    frac = (g - idx)[:, None]
    samples = (1.0 - frac) * ext[idx] + frac * ext[idx + 1]
    if polygon.closed:
        samples[-1] = samples[0]
    return SampledCurve(samples, polygon.closed)


def polygon_curve_distance(polygon, curve, m):
    """Sampled symmetric Hausdorff distance between a polygon and a curve.

    The curve is sampled at m+1 parameters and treated as the polyline
    through those samples; the polygon side is subdivided at comparable
    density with all vertices included. The estimate converges to the true
    Hausdorff distance from below as m grows (polylines cut corners, and
    maxima between sample points are missed).
    """
    if m < 64:
        raise DomainError(f"need at least 64 samples for the estimate, got {m}")
    sampled = sample_curve(curve, m)
    seg_a, seg_b = polygon.segment_endpoints()
    d_curve_to_polygon = min_dist_to_segments(sampled.samples, seg_a, seg_b).max()

    per_segment = max(2, -(-m // polygon.segment_count))
    poly_pts = subdivide_segments(seg_a, seg_b, per_segment)
    ca, cb = sampled.segment_endpoints()
    d_polygon_to_curve = min_dist_to_segments(poly_pts, ca, cb).max()
    return float(max(d_curve_to_polygon, d_polygon_to_curve))


def polyline_hausdorff(a, b, per_segment=4):
    """Sampled symmetric Hausdorff distance between two PL curves.

    Used to confirm image preservation (e.g. refinement leaves the polygon's
    image unchanged); exact for the zero case up to roundoff.
    """
    a_a, a_b = a.segment_endpoints()
    b_a, b_b = b.segment_endpoints()
    pts_a = subdivide_segments(a_a, a_b, per_segment)
    pts_b = subdivide_segments(b_a, b_b, per_segment)
    d1 = min_dist_to_segments(pts_a, b_a, b_b).max()
    d2 = min_dist_to_segments(pts_b, a_a, a_b).max()
    return float(max(d1, d2))
