"""Report rendering: delimited tables plus matplotlib figures on disk.

Figures are static files (Agg backend, no display); the CLI writes them
next to the CSV tables when --figures is given.
"""
import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from mpl_toolkits.mplot3d.art3d import Line3DCollection, Poly3DCollection  # noqa: E402


def write_csv(path, header, rows):
    """Deterministic CSV: floats via repr, newline-terminated."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


def _new_3d_axes():
    fig = plt.figure(figsize=(6.0, 5.0))
    ax = fig.add_subplot(111, projection="3d")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    return fig, ax


def _equalize_3d(ax, points):
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    center = 0.5 * (lo + hi)
    radius = max((hi - lo).max() / 2.0, 1e-9)
    ax.set_xlim(center[0] - radius, center[0] + radius)
    ax.set_ylim(center[1] - radius, center[1] + radius)
    ax.set_zlim(center[2] - radius, center[2] + radius)


def figure_curves(path, curves, labels=None, title=None):
    """3D polyline plot of one or more curves (SampledCurve or polygon)."""
    import numpy as np
    fig, ax = _new_3d_axes()
    all_pts = []
    for k, curve in enumerate(curves):
        if hasattr(curve, "samples"):
            pts = curve.samples
        else:
            pts = curve.points
            if curve.closed:
                pts = np.vstack([pts, pts[:1]])
        label = labels[k] if labels else None
        ax.plot(pts[:, 0], pts[:, 1], pts[:, 2], lw=1.2, label=label)
        all_pts.append(pts)
    if labels:
        ax.legend(loc="upper right", fontsize=8)
    if title:
        ax.set_title(title)
    _equalize_3d(ax, np.vstack(all_pts))
    fig.savefig(path, dpi=140, bbox_inches="tight")
    plt.close(fig)
    return path


def figure_surface(path, mesh, report=None, title=None):
    """Translucent triangle plot with witness segments drawn on top."""
    import numpy as np
    fig, ax = _new_3d_axes()
    tris = mesh.vertices[mesh.triangles]
    ax.add_collection3d(Poly3DCollection(
        tris, facecolor="#7fa8d9", edgecolor="#2f5a8f",
        linewidths=0.2, alpha=0.45))
    if report is not None and (report.pairs or report.grazing):
        segments = [(h.witness_a, h.witness_b) for h in report.pairs]
        if segments:
            ax.add_collection3d(Line3DCollection(
                segments, colors="#c22f2f", linewidths=2.0))
        grazing = [(h.witness_a, h.witness_b) for h in report.grazing]
        if grazing:
            ax.add_collection3d(Line3DCollection(
                grazing, colors="#e0a325", linewidths=1.5))
    if title:
        ax.set_title(title)
    _equalize_3d(ax, mesh.vertices)
    fig.savefig(path, dpi=140, bbox_inches="tight")
    plt.close(fig)
    return path


def figure_distance_profile(path, iterations, distances, title=None):
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.semilogy(iterations, distances, "o-", color="#2f5a8f")
    ax.set_xlabel("refinement iteration j")
    ax.set_ylabel("polygon-curve distance")
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=140, bbox_inches="tight")
    plt.close(fig)
    return path


def figure_morph_timeline(path, scan_rows, bracket=None, title=None):
    """Predicate markers along s, with the refined bracket shaded.

    scan_rows: iterable of (s, intersecting: bool, n_pairs, n_grazing).
    """
    fig, ax = plt.subplots(figsize=(6.0, 2.4))
    false_s = [s for s, hit, _, _ in scan_rows if not hit]
    true_s = [s for s, hit, _, _ in scan_rows if hit]
    ax.scatter(false_s, [0] * len(false_s), marker="o", s=18,
               color="#3b7d3b", label="embedded")
    ax.scatter(true_s, [0] * len(true_s), marker="x", s=26,
               color="#c22f2f", label="self-intersecting")
    if bracket is not None:
        ax.axvspan(bracket[0], bracket[1], color="#e0a325", alpha=0.6,
                   label="transition bracket")
    ax.set_xlim(-0.02, 1.02)
    ax.set_yticks([])
    ax.set_xlabel("morph parameter s")
    ax.legend(loc="upper left", fontsize=7, ncol=3)
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=140, bbox_inches="tight")
    plt.close(fig)
    return path
