"""Small vector helpers shared by the knot, surface and morph modules.

Points are plain float64 numpy arrays of shape (3,); point sets are (n, 3).
"""
import numpy as np

from .errors import DomainError

# Block size for broadcasting point-vs-segment distance matrices; keeps the
# temporaries under ~100 MB even for 2048-sample curves.
_CHUNK = 512


def coerce_points(points, allow_nonfinite=False):
    """Return a read-only (n, 3) float64 copy of ``points``."""
    arr = np.array(points, dtype=float)
    if arr.ndim == 1 and arr.size == 3:
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
        raise DomainError("expected a nonempty (n, 3) array of points")
    if not allow_nonfinite and not np.isfinite(arr).all():
        raise DomainError("point coordinates must be finite")
    arr.setflags(write=False)
    return arr


def require_unit(direction, tol=1e-9):
    """Validate that ``direction`` is a unit vector within ``tol``."""
    d = np.asarray(direction, dtype=float).reshape(3)
    norm = float(np.linalg.norm(d))
    if abs(norm - 1.0) > tol:
        raise DomainError(
            f"direction must be a unit vector within {tol:g} (norm {norm:.12g})")
    return d


def normalized(v):
    v = np.asarray(v, dtype=float).reshape(3)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise DomainError("zero vector has no direction")
    return v / norm


def orthonormal_frame(direction):
    """Return (e1, e2, d): a right-handed frame with d = normalized direction."""
    d = normalized(direction)
    seed = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = seed - np.dot(seed, d) * d
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return e1, e2, d


def min_dist_to_segments(points, seg_a, seg_b):
    """For each point, the distance to the nearest of the given segments.

    points: (p, 3); seg_a, seg_b: (s, 3) segment endpoints. Returns (p,).
    """
    points = np.asarray(points, dtype=float)
    seg_a = np.asarray(seg_a, dtype=float)
    seg_b = np.asarray(seg_b, dtype=float)
    ab = seg_b - seg_a
    denom = np.einsum("sj,sj->s", ab, ab)
    safe = np.where(denom == 0.0, 1.0, denom)
    out = np.empty(len(points))
    for start in range(0, len(points), _CHUNK):
        blk = points[start:start + _CHUNK]
        ap = blk[:, None, :] - seg_a[None, :, :]
        t = np.einsum("psj,sj->ps", ap, ab) / safe
        np.clip(t, 0.0, 1.0, out=t)
        closest = seg_a[None, :, :] + t[:, :, None] * ab[None, :, :]
        d = np.linalg.norm(blk[:, None, :] - closest, axis=2)
        out[start:start + _CHUNK] = d.min(axis=1)
    return out


def segment_segment_distance(p0, p1, q0, q1):
    """Minimum distance between two 3D segments (clamped closest points)."""
    u = p1 - p0
    v = q1 - q0
    w = p0 - q0
    a = np.dot(u, u)
    b = np.dot(u, v)
    c = np.dot(v, v)
    d = np.dot(u, w)
    e = np.dot(v, w)
    den = a * c - b * b
    if den > 1e-300:
        s = np.clip((b * e - c * d) / den, 0.0, 1.0)
    else:
        s = 0.0
    t = (b * s + e) / c if c > 1e-300 else 0.0
    t = np.clip(t, 0.0, 1.0)
    # re-clamp s for the clamped t
    if a > 1e-300:
        s = np.clip((b * t - d) / a, 0.0, 1.0)
    return float(np.linalg.norm((p0 + s * u) - (q0 + t * v)))


def subdivide_segments(seg_a, seg_b, per_segment):
    """Sample each segment at per_segment+1 points, endpoints included."""
    fracs = np.linspace(0.0, 1.0, per_segment + 1)
    pts = (seg_a[:, None, :] * (1.0 - fracs)[None, :, None]
           + seg_b[:, None, :] * fracs[None, :, None])
    return pts.reshape(-1, 3)
