"""Swept, ruled and skinned surfaces, their triangulations, and the safe
sweep bound derived from crossing preimages of a projected knot.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GenericityError
from .geometry import normalized, orthonormal_frame, require_unit

# relative tolerance for projection-genericity checks
GENERIC_TOL = 1e-9
# triangles with area at or below this are dropped as degenerate
DEGENERATE_AREA = 1e-14


@dataclass(frozen=True, eq=False)
class RuledSurface:
    """Linear blend between two curves sampled at matching parameters."""

    c1: object
    c2: object

    def __post_init__(self):
        if self.c1.m != self.c2.m:
            raise DomainError(
                f"boundary curves must share sample counts ({self.c1.m} vs {self.c2.m})")
        if self.c1.closed != self.c2.closed:
            raise DomainError("boundary curves must both be closed or both open")

    @property
    def sample_count(self):
        return self.c1.m

    def point(self, k, v):
        """Surface point at sample index k and blend parameter v in [0, 1]."""
        return (1.0 - v) * self.c1.samples[k] + v * self.c2.samples[k]

    def section(self, v):
        from .knots import SampledCurve
        blend = (1.0 - v) * self.c1.samples + v * self.c2.samples
        return SampledCurve(blend, self.c1.closed)


def rule(c1, c2):
    """Ruled surface pairing equal parameters of two sampled curves."""
    return RuledSurface(c1, c2)


def sweep(curve, direction, length):
    """Ruled surface between a curve and its translate by length*direction."""
    d = require_unit(direction)
    if not length > 0:
        raise DomainError(f"sweep length must be positive, got {length!r}")
    return rule(curve, curve.translated(length * d))


def skin(curves):
    """Chain of ruled patches through consecutive section curves."""
    curves = list(curves)
    if len(curves) < 2:
        raise DomainError("skinning needs at least 2 section curves")
    return [rule(curves[i], curves[i + 1]) for i in range(len(curves) - 1)]


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Triangle soup with optional (u, v) provenance per vertex.

    ``patch`` tags each triangle with the index of the ruled patch it came
    from when meshes are merged (skinned composites).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    uv: np.ndarray = None
    patch: np.ndarray = None
    dropped_degenerate: int = 0

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        t = np.asarray(self.triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise DomainError("vertices must be (n, 3)")
        if t.ndim != 2 or t.shape[1] != 3:
            raise DomainError("triangles must be (n, 3) vertex indices")
        if len(t) and (t.min() < 0 or t.max() >= len(v)):
            raise DomainError("triangle indices out of range")
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)

    @property
    def triangle_count(self):
        return len(self.triangles)

    def triangle_points(self):
        return self.vertices[self.triangles]

    def vertex_classes(self):
        """Group vertices coincident within 1e-12 under one class id.

        Triangles sharing a class are treated as adjacent by the
        self-intersection tests.
        """
        keys = np.round(self.vertices * 1e12).astype(np.int64)
        _, inverse = np.unique(keys, axis=0, return_inverse=True)
        return inverse


def triangulate(surface, v_steps):
    """Quad-grid triangulation of a ruled surface.

    Each of the m x v_steps parameter quads is split along its lower-left to
    upper-right diagonal. Zero-area triangles are dropped; a surface whose
    triangles are all degenerate (e.g. both boundaries equal) is rejected.
    """
    if v_steps < 1:
        raise DomainError(f"v_steps must be at least 1, got {v_steps}")
    m = surface.sample_count
    vs = np.linspace(0.0, 1.0, v_steps + 1)
    grid = ((1.0 - vs)[None, :, None] * surface.c1.samples[:, None, :]
            + vs[None, :, None] * surface.c2.samples[:, None, :])
    vertices = grid.reshape(-1, 3)
    us = np.linspace(0.0, 1.0, m + 1)
    uv = np.stack(np.meshgrid(us, vs, indexing="ij"), axis=-1).reshape(-1, 2)

    def idx(k, l):
        return k * (v_steps + 1) + l

    ks, ls = np.meshgrid(np.arange(m), np.arange(v_steps), indexing="ij")
    ks = ks.ravel()
    ls = ls.ravel()
    lower = np.stack([idx(ks, ls), idx(ks + 1, ls), idx(ks + 1, ls + 1)], axis=1)
    upper = np.stack([idx(ks, ls), idx(ks + 1, ls + 1), idx(ks, ls + 1)], axis=1)
    triangles = np.empty((2 * len(ks), 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    pts = vertices[triangles]
    areas = 0.5 * np.linalg.norm(
        np.cross(pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0]), axis=1)
    keep = areas > DEGENERATE_AREA
    dropped = int((~keep).sum())
    if not keep.any():
        raise DomainError(
            "surface is degenerate: every triangle has zero area "
            "(are the boundary curves identical?)")
    return TriangleMesh(vertices, triangles[keep], uv=uv, dropped_degenerate=dropped)


def merge_meshes(meshes):
    """Concatenate patch meshes into one composite for intersection testing.

    Shared boundary samples stay duplicated; the coincident-vertex rule in
    the intersection tests keeps the seam triangles adjacent.
    """
    meshes = list(meshes)
    if not meshes:
        raise DomainError("nothing to merge")
    verts = []
    tris = []
    uvs = []
    patches = []
    offset = 0
    have_uv = all(m.uv is not None for m in meshes)
    for i, m in enumerate(meshes):
        verts.append(m.vertices)
        tris.append(m.triangles + offset)
        patches.append(np.full(len(m.triangles), i, dtype=np.int64))
        if have_uv:
            uvs.append(m.uv)
        offset += len(m.vertices)
    return TriangleMesh(
        np.vstack(verts), np.vstack(tris),
        uv=np.vstack(uvs) if have_uv else None,
        patch=np.concatenate(patches),
        dropped_degenerate=sum(m.dropped_degenerate for m in meshes))


@dataclass(frozen=True, eq=False)
class CrossingPreimage:
    """The two knot points over one projected crossing, and their distance."""

    point_a: np.ndarray
    point_b: np.ndarray
    gap: float
    segments: tuple


def _segment_pairs(nseg, closed):
    """Index pairs of segments that do not share an endpoint."""
    n_points = nseg if closed else nseg + 1
    ends = [{i, (i + 1) % n_points} for i in range(nseg)]
    return [(i, j)
            for i in range(nseg)
            for j in range(i + 1, nseg)
            if not (ends[i] & ends[j])]


def crossing_preimages(polygon, projection_direction):
    """Preimage pairs of all transversal crossings in the projected polygon.

    The direction must be generic: no segment (nearly) parallel to it, no
    crossing at a projected segment endpoint, no (near-)triple points, and
    no strands actually touching in 3D. Non-generic input raises
    GenericityError carrying the offending segment pair; callers retry with
    a jittered direction.
    """
    d = require_unit(projection_direction)
    e1, e2, d = orthonormal_frame(d)
    pts = polygon.points
    n = len(pts)
    ext = np.vstack([pts, pts[:1]]) if polygon.closed else pts
    p2 = np.stack([ext @ e1, ext @ e2], axis=1)
    nseg = polygon.segment_count
    diameter = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    eps_abs = GENERIC_TOL * max(diameter, 1.0)

    for i in range(nseg):
        seg3d = np.linalg.norm(ext[i + 1] - ext[i])
        proj = np.linalg.norm(p2[i + 1] - p2[i])
        if seg3d == 0.0 or proj < GENERIC_TOL * seg3d:
            raise GenericityError(
                f"segment {i} is parallel to the projection direction",
                segment_pair=(i, i))

    found = []
    for i, j in _segment_pairs(nseg, polygon.closed):
        p, r = p2[i], p2[i + 1] - p2[i]
        q, s = p2[j], p2[j + 1] - p2[j]
        det = r[0] * s[1] - r[1] * s[0]
        dq = q - p
        if abs(det) <= GENERIC_TOL * np.linalg.norm(r) * np.linalg.norm(s):
            if _segments_2d_close(p, p + r, q, q + s, eps_abs):
                raise GenericityError(
                    f"projected segments {i} and {j} are parallel and overlapping",
                    segment_pair=(i, j))
            continue
        u = (dq[0] * s[1] - dq[1] * s[0]) / det
        v = (dq[0] * r[1] - dq[1] * r[0]) / det
        if GENERIC_TOL < u < 1.0 - GENERIC_TOL and GENERIC_TOL < v < 1.0 - GENERIC_TOL:
            pa = (1.0 - u) * ext[i] + u * ext[i + 1]
            pb = (1.0 - v) * ext[j] + v * ext[j + 1]
            gap = float(np.linalg.norm(pa - pb))
            if gap <= eps_abs:
                raise GenericityError(
                    f"strands of segments {i} and {j} touch in space",
                    segment_pair=(i, j))
            found.append(CrossingPreimage(pa, pb, gap, (i, j)))
        elif -GENERIC_TOL <= u <= 1.0 + GENERIC_TOL and -GENERIC_TOL <= v <= 1.0 + GENERIC_TOL:
            raise GenericityError(
                f"projections of segments {i} and {j} cross at a segment endpoint",
                segment_pair=(i, j))

    centers = [0.5 * (c.point_a + c.point_b) for c in found]
    proj_pts = [np.array([c @ e1, c @ e2]) for c in centers]
    for a in range(len(found)):
        for b in range(a + 1, len(found)):
            if np.linalg.norm(proj_pts[a] - proj_pts[b]) < eps_abs:
                raise GenericityError(
                    "projection has a (near-)triple point",
                    segment_pair=(found[a].segments, found[b].segments))
    return found


def _segments_2d_close(a0, a1, b0, b1, eps):
    def pt_seg(p, s0, s1):
        d = s1 - s0
        den = float(d @ d)
        t = float((p - s0) @ d) / den if den > 0 else 0.0
        t = min(1.0, max(0.0, t))
        return float(np.linalg.norm(p - (s0 + t * d)))

    return min(pt_seg(a0, b0, b1), pt_seg(a1, b0, b1),
               pt_seg(b0, a0, a1), pt_seg(b1, a0, a1)) < eps


def safe_sweep_length(polygon, projection_direction):
    """Half the minimum preimage gap over all crossings of the projection.

    A sweep strictly shorter than this bound cannot bring the sheets over
    any crossing into contact. Returns +inf when the projection has no
    crossings (any sweep length is safe then).
    """
    crossings = crossing_preimages(polygon, projection_direction)
    if not crossings:
        return math.inf
    return min(c.gap for c in crossings) / 2.0


def polygon_diameter(polygon):
    """Bounding-box diagonal; the length scale used when the sweep bound is
    infinite."""
    pts = polygon.points
    return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))


def jittered_generic_direction(polygon, direction=None, rng=None, tries=64,
                               jitter=1e-3):
    """Find a generic projection direction near the requested one.

    Starts from ``direction`` (default +z) and retries with seeded jitter
    while crossing_preimages reports a degeneracy. Returns the direction and
    its preimage list.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    d = normalized(direction if direction is not None else (0.0, 0.0, 1.0))
    scale = jitter
    for _ in range(tries):
        try:
            return d, crossing_preimages(polygon, d)
        except GenericityError:
            d = normalized(d + rng.normal(scale=scale, size=3))
            scale = min(scale * 2.0, 0.5)
    raise GenericityError(
        f"no generic projection direction found after {tries} attempts")
