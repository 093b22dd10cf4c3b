"""One-parameter families of boundary curves and localization of the first
morph parameter at which the ruled surface self-intersects.

Morphing interpolates sampled curves pointwise at equal parameters (not
control points): matched parameters are what both the ruled-surface blend
and the isotopy argument operate on, and refinement iterates have different
control-point counts anyway.
"""
from dataclasses import dataclass

import numpy as np

from .errors import Aborted, DomainError
from .geometry import segment_segment_distance
from .intersect import DEFAULT_EPS, self_intersections
from .knots import BezierCurve, RefinementSequence, SampledCurve, sample_curve
from .surface import (jittered_generic_direction, polygon_diameter, rule,
                      safe_sweep_length, triangulate)


@dataclass(frozen=True, eq=False)
class MorphFamily:
    """A fixed boundary plus an s-parameterized boundary.

    curve_at(s) blends start into end pointwise; the surface scanned for
    intersections is rule(fixed, curve_at(s)).
    """

    fixed: SampledCurve
    start: SampledCurve
    end: SampledCurve

    def __post_init__(self):
        if not (self.fixed.m == self.start.m == self.end.m):
            raise DomainError("family curves must share sample counts")
        if not (self.fixed.closed == self.start.closed == self.end.closed):
            raise DomainError("family curves must share the closed flag")

    def curve_at(self, s):
        """Pointwise convex blend of start and end at morph parameter s."""
        if not 0.0 <= s <= 1.0:
            raise DomainError(f"morph parameter must lie in [0, 1], got {s!r}")
        if s == 0.0:
            return self.start
        if s == 1.0:
            return self.end
        samples = (1.0 - s) * self.start.samples + s * self.end.samples
        return SampledCurve(samples, self.start.closed)


def intersects_at(family, s, v_steps=8, eps=DEFAULT_EPS):
    """Predicate: does the ruled surface at morph parameter s self-intersect?

    Returns (intersecting, report) at the given mesh resolution.
    """
    surface = rule(family.fixed, family.curve_at(s))
    mesh = triangulate(surface, v_steps)
    report = self_intersections(mesh, eps)
    return report.intersecting, report


def curve_self_proximity(curve):
    """Minimum distance between nonadjacent segments of a sampled curve.

    Diagnostic only: intermediate morph curves may approach themselves (or
    cross) as curves even while the surface stays embedded.
    """
    a, b = curve.segment_endpoints()
    nseg = len(a)
    best = np.inf
    for i in range(nseg):
        for j in range(i + 2, nseg):
            if curve.closed and i == 0 and j == nseg - 1:
                continue
            d = segment_segment_distance(a[i], b[i], a[j], b[j])
            if d < best:
                best = d
    return float(best)


@dataclass(frozen=True)
class TransitionResult:
    """Bracket around the first detected false->true transition of the
    intersection predicate, with the witnesses found at the upper end."""

    s_lo: float
    s_hi: float
    witnesses: object
    scan_grid: int
    v_steps: int
    eps: float
    already_intersecting: bool = False
    self_proximity_at_hi: float = float("nan")

    @property
    def bracket(self):
        return (self.s_lo, self.s_hi)

    @property
    def width(self):
        return self.s_hi - self.s_lo


def first_intersection_parameter(family, grid=64, tol=1e-6, v_steps=8,
                                 eps=DEFAULT_EPS, on_progress=None,
                                 on_sample=None, should_abort=None):
    """Scan-then-bisect localization of the first intersection parameter.

    The predicate is not assumed monotone in s: a uniform grid finds the
    first false->true change, then bisection narrows that bracket to width
    <= tol. Returns None when the predicate is false across the whole grid.
    If the surface already intersects at s=0 the result carries the
    (0, 0) bracket with already_intersecting set.

    Same inputs always produce the same result; the hooks (on_progress for
    step counts, on_sample for each evaluated (s, intersecting, report),
    should_abort to cancel) only observe, they never influence values.
    """
    if grid < 16:
        raise DomainError(f"scan grid must be at least 16, got {grid}")
    if not tol > 0.0:
        raise DomainError(f"tolerance must be positive, got {tol!r}")

    total = grid + 1

    def step(k):
        if should_abort is not None and should_abort():
            raise Aborted("transition search canceled")
        if on_progress is not None:
            on_progress(k, total)

    def probe(s):
        hit, report = intersects_at(family, s, v_steps, eps)
        if on_sample is not None:
            on_sample(s, hit, report)
        return hit, report

    step(0)
    hit0, report0 = probe(0.0)
    if hit0:
        return TransitionResult(
            0.0, 0.0, report0, grid, v_steps, eps, already_intersecting=True,
            self_proximity_at_hi=curve_self_proximity(family.curve_at(0.0)))

    bracket = None
    report_hi = None
    for k in range(1, grid + 1):
        step(k)
        s = k / grid
        hit, report = probe(s)
        if hit:
            bracket = ((k - 1) / grid, s)
            report_hi = report
            break
    if bracket is None:
        return None

    lo, hi = bracket
    while hi - lo > tol:
        step(grid)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # parameter resolution exhausted
        hit, report = probe(mid)
        if hit:
            hi = mid
            report_hi = report
        else:
            lo = mid
    return TransitionResult(
        lo, hi, report_hi, grid, v_steps, eps,
        self_proximity_at_hi=curve_self_proximity(family.curve_at(hi)))


def bezier_iterate_family(base, j_from, j_to, m, direction=None, rng=None,
                          safety=0.99):
    """Morph family between the Bezier curves of consecutive refinement
    iterates of a polygon.

    The fixed boundary is the iterate-j_from curve itself; the morphing
    boundary starts from a translate of that same curve at a safe sweep
    offset (so the family opens on a certified nonselfintersecting sweep)
    and ends at the iterate-j_to curve moved by the same offset.
    """
    if j_to != j_from + 1:
        raise DomainError("iterate families are built between consecutive iterates")
    if j_from < 0:
        raise DomainError("iterate index must be nonnegative")
    seq = RefinementSequence.build(base, j_to)
    curve_from = sample_curve(BezierCurve(seq[j_from]), m)
    curve_to = sample_curve(BezierCurve(seq[j_to]), m)
    offset = sweep_offset(curve_from, direction=direction, rng=rng, safety=safety)
    return MorphFamily(fixed=curve_from,
                       start=curve_from.translated(offset),
                       end=curve_to.translated(offset))


def sweep_offset(curve, direction=None, rng=None, safety=0.99):
    """A translation vector that keeps sweep(curve) free of self-contact.

    Uses safety x safe_sweep_length along a generic direction; when the
    projection is crossing-free (infinite bound) the curve's diameter is
    used as the length instead.
    """
    poly = curve.as_polygon()
    d, crossings = jittered_generic_direction(poly, direction=direction, rng=rng)
    if crossings:
        length = safety * safe_sweep_length(poly, d)
    else:
        length = polygon_diameter(poly)
    return length * d


def family_between(curve_a, curve_b, direction=None, rng=None, safety=0.99):
    """Morph family from knot a toward knot b.

    The fixed boundary is curve a; the far boundary starts as the safe
    translate of a (a certified sweep) and morphs into b moved by the same
    offset.
    """
    offset = sweep_offset(curve_a, direction=direction, rng=rng, safety=safety)
    return MorphFamily(fixed=curve_a,
                       start=curve_a.translated(offset),
                       end=curve_b.translated(offset))
