"""Bundled knot corpus and the six-curve iterate stack builder."""
from importlib import resources

import numpy as np

from .formats import parse_stick_knot
from .knots import BezierCurve, RefinementSequence, sample_curve

NAMES = ("unknot64", "square_unknot", "one_crossing", "fig8")
INVALID_NAMES = ("bad_collinear",)


def _corpus_dir():
    return resources.files(__package__) / "corpus"


def corpus_path(name):
    """Filesystem path of a bundled knot file.

    Invalid demo inputs live under invalid/ but resolve by bare name too,
    so `corpus/bad_collinear.knot` works on the command line.
    """
    for candidate in (name, f"invalid/{name}"):
        path = _corpus_dir() / f"{candidate}.knot"
        if path.is_file():
            return path
    raise KeyError(f"no bundled knot named {name!r}")


def load(name):
    """Load a bundled KnotRecord by name."""
    path = corpus_path(name)
    require_valid = path.parent.name != "invalid"
    return parse_stick_knot(path.read_text(encoding="utf-8"),
                            require_valid=require_valid, default_name=name)


def records():
    """All valid bundled records, in corpus order."""
    return [load(name) for name in NAMES]


def iterate_stack(depth=5, m=64, spacing=1.0, axis=(0.0, 0.0, 1.0)):
    """Section curves for a skinned surface over refinement iterates.

    Returns (curves, labels): the Bezier curves of iterates 0..depth of the
    bundled figure-eight polygon, sampled at m and stacked along ``axis``
    with the given spacing. Labels carry the knot type each iterate's curve
    is known to have: the curves of iterates 0-3 are unknotted, those of
    iterates 4 and up are figure-eights.
    """
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if norm == 0:
        raise ValueError("stack axis must be nonzero")
    axis = axis / norm
    base = load("fig8").polygon
    seq = RefinementSequence.build(base, depth)
    curves = []
    labels = []
    for j in range(depth + 1):
        curve = sample_curve(BezierCurve(seq[j]), m)
        curves.append(curve.translated(j * spacing * axis))
        labels.append("unknot" if j <= 3 else "4_1")
    return curves, labels
