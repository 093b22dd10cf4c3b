"""Command-line workbench: validate, refine, sweep, rule, morph, serve.

Exit codes: 0 success, 1 domain/validation errors (including usage), 2 I/O
errors. Every subcommand accepts --json for a machine-readable document
(schema "knotmorph.cli/1"); identical invocations produce byte-identical
stdout and output files. Projection-jitter seeding: --seed flag, else the
KNOTMORPH_SEED environment variable, else 0.
"""
import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import corpus, formats, report
from .errors import KnotMorphError, ValidationError
from .intersect import certify_isotopy, self_intersections
from .knots import (BezierCurve, RefinementSequence, polygon_curve_distance,
                    polygon_to_sampled, sample_polygon, validate_polygon)
from .morph import (bezier_iterate_family, family_between,
                    first_intersection_parameter)
from .surface import (jittered_generic_direction, polygon_diameter, rule,
                      safe_sweep_length, sweep, triangulate)

JSON_SCHEMA = "knotmorph.cli/1"


class UsageError(KnotMorphError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _resolve_knot(arg, require_valid=True):
    """A filesystem path, or a bundled name like corpus/unknot64.knot."""
    path = Path(arg)
    if path.is_file():
        return formats.read_knot_file(path, require_valid=require_valid)
    text = str(arg)
    if text.startswith("corpus/"):
        name = text[len("corpus/"):]
        if name.endswith(".knot"):
            name = name[:-len(".knot")]
        try:
            return corpus.load(name)
        except KeyError:
            pass
    raise FileNotFoundError(f"no such knot file or bundled knot: {arg}")


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("KNOTMORPH_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"KNOTMORPH_SEED must be an integer, got {env!r}")
    return 0


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_direction(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"--dir expects x,y,z, got {text!r}")
    try:
        vec = np.array([float(p) for p in parts])
    except ValueError:
        raise UsageError(f"--dir components must be numbers, got {text!r}")
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise UsageError("--dir must be nonzero")
    return vec / norm  # normalized here; the kernel wants unit vectors


def _knot_curve(record, samples):
    """Sampled PL curve of a knot record; samples=0 keeps the vertices."""
    if samples == 0:
        return polygon_to_sampled(record.polygon)
    return sample_polygon(record.polygon, samples)


def _emit(args, doc, text_lines):
    if args.json:
        doc = {"schema": JSON_SCHEMA, **doc}
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _pairs_csv(path, rep):
    rows = []
    for label, hits in (("pair", rep.pairs), ("grazing", rep.grazing)):
        for h in hits:
            rows.append([label, h.tri_a, h.tri_b,
                         float(h.witness_a[0]), float(h.witness_a[1]),
                         float(h.witness_a[2]), float(h.witness_b[0]),
                         float(h.witness_b[1]), float(h.witness_b[2]),
                         float(h.extent)])
    return report.write_csv(path, ["kind", "tri_a", "tri_b", "ax", "ay", "az",
                                   "bx", "by", "bz", "extent"], rows)


def _report_doc(rep):
    return {
        "pairs": len(rep.pairs),
        "grazing": len(rep.grazing),
        "tested_pairs": rep.tested_pairs,
        "excluded_adjacent": rep.excluded_adjacent,
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args):
    record = _resolve_knot(args.knot, require_valid=False)
    verdict = validate_polygon(record.polygon, initial=True)
    doc = {
        "command": "validate",
        "name": record.name,
        "ok": verdict.ok,
        "violations": [{"code": v.code, "message": v.message}
                       for v in verdict.violations],
    }
    lines = [f"{record.name}: ok" if verdict.ok else f"{record.name}: INVALID"]
    lines += [f"  - {v.message}" for v in verdict.violations]
    _emit(args, doc, lines)
    return 0 if verdict.ok else 1


def cmd_refine(args):
    record = _resolve_knot(args.knot)
    out = _out_dir(args)
    seq = RefinementSequence.build(record.polygon, args.iters)
    rows = []
    lines = []
    written = []
    for j in range(args.iters + 1):
        poly = seq[j]
        dist = polygon_curve_distance(record.polygon, BezierCurve(poly),
                                      args.samples)
        rows.append([j, len(poly), poly.segment_count, float(dist)])
        lines.append(f"j={j} points={len(poly)} segments={poly.segment_count} "
                     f"distance={dist!r}")
        iter_rec = formats.KnotRecord(f"{record.name}_iter{j}",
                                      record.claimed_type, poly)
        path = out / f"{record.name}_iter{j}.knot"
        formats.write_knot_file(iter_rec, path)
        written.append(str(path))
    csv_path = report.write_csv(out / f"refine_{record.name}.csv",
                                ["j", "points", "segments", "distance"], rows)
    written.append(str(csv_path))
    if args.figures:
        written.append(str(report.figure_distance_profile(
            out / f"refine_{record.name}_distance.png",
            [r[0] for r in rows], [r[3] for r in rows],
            title=f"{record.name}: polygon-curve distance")))
        from .knots import sample_curve
        curves = [record.polygon,
                  sample_curve(BezierCurve(seq[args.iters]), max(args.samples, 256))]
        written.append(str(report.figure_curves(
            out / f"refine_{record.name}_curves.png", curves,
            labels=["control polygon", f"curve at j={args.iters}"],
            title=record.name)))
    lines += [f"wrote {p}" for p in written]
    _emit(args, {"command": "refine", "name": record.name,
                 "table": [{"j": r[0], "points": r[1], "segments": r[2],
                            "distance": r[3]} for r in rows],
                 "files": written}, lines)
    return 0


def cmd_sweep(args):
    record = _resolve_knot(args.knot)
    out = _out_dir(args)
    rng = np.random.default_rng(_seed(args))
    direction = _parse_direction(args.dir)
    curve = _knot_curve(record, args.samples)

    if args.length == "auto":
        direction, crossings = jittered_generic_direction(
            record.polygon, direction=direction, rng=rng)
        bound = safe_sweep_length(record.polygon, direction)
        if math.isfinite(bound):
            length = 0.99 * bound
        else:
            length = polygon_diameter(record.polygon)
        bound_doc = None if math.isinf(bound) else float(bound)
    else:
        try:
            length = float(args.length)
        except ValueError:
            raise UsageError(f"--length expects a number or auto, got {args.length!r}")
        bound_doc = None

    surface = sweep(curve, direction, length)
    mesh = triangulate(surface, args.vsteps)
    rep = self_intersections(mesh, eps=args.eps)
    stem = f"sweep_{record.name}"
    files = [str(p) for p in formats.export_mesh(mesh, out / stem, report=rep)]
    files.append(str(_pairs_csv(out / f"{stem}_pairs.csv", rep)))
    if args.figures:
        files.append(str(report.figure_surface(
            out / f"{stem}.png", mesh, rep, title=stem)))

    if rep.pairs:
        verdict_line = f"Self-intersecting: {len(rep.pairs)} witness pairs"
    else:
        verdict_line = (f"Certified: swept surface is clear at "
                        f"{curve.m} samples x {args.vsteps} v-steps")
    lines = ["direction: " + ",".join(repr(float(x)) for x in direction),
             f"length: {float(length)!r}"]
    if bound_doc is not None:
        lines.insert(1, f"safe bound: {bound_doc!r}")
    lines.append(verdict_line)
    lines += [f"wrote {p}" for p in files]
    _emit(args, {"command": "sweep", "name": record.name,
                 "direction": [float(x) for x in direction],
                 "length": float(length), "safe_bound": bound_doc,
                 "report": _report_doc(rep), "files": files}, lines)
    return 0


def cmd_rule(args):
    rec_a = _resolve_knot(args.knot_a)
    rec_b = _resolve_knot(args.knot_b)
    out = _out_dir(args)
    c1 = _knot_curve(rec_a, args.samples)
    c2 = _knot_curve(rec_b, args.samples)
    cert = certify_isotopy(c1, c2, v_steps=args.vsteps, eps=args.eps)
    mesh = triangulate(rule(c1, c2), args.vsteps)
    stem = f"rule_{rec_a.name}_{rec_b.name}"
    files = [str(p) for p in formats.export_mesh(mesh, out / stem,
                                                 report=cert.evidence)]
    files.append(str(_pairs_csv(out / f"{stem}_pairs.csv", cert.evidence)))
    if args.figures:
        files.append(str(report.figure_surface(
            out / f"{stem}.png", mesh, cert.evidence, title=stem)))
    if cert.certified:
        verdict_line = (f"Certified: ambient isotopic at {cert.samples} samples "
                        f"x {cert.v_steps} v-steps")
    else:
        verdict_line = (f"Unknown (self-intersecting): "
                        f"{len(cert.evidence.pairs)} witness pairs")
    lines = [verdict_line] + [f"wrote {p}" for p in files]
    _emit(args, {"command": "rule", "knots": [rec_a.name, rec_b.name],
                 "verdict": cert.verdict, "samples": cert.samples,
                 "v_steps": cert.v_steps, "report": _report_doc(cert.evidence),
                 "files": files}, lines)
    return 0


def _run_transition(args, family, stem, names):
    out = _out_dir(args)
    scan_rows = []
    result = first_intersection_parameter(
        family, grid=args.grid, tol=args.tol, v_steps=args.vsteps,
        eps=args.eps,
        on_sample=lambda s, hit, rep: scan_rows.append(
            (float(s), bool(hit), len(rep.pairs), len(rep.grazing))))
    files = []
    csv_path = report.write_csv(
        out / f"{stem}_scan.csv", ["s", "intersecting", "pairs", "grazing"],
        [[s, int(hit), p, g] for s, hit, p, g in scan_rows])
    files.append(str(csv_path))

    doc = {"command": args.command, "knots": names, "grid": args.grid,
           "tol": args.tol, "v_steps": args.vsteps, "scan_evaluations":
           len(scan_rows), "files": files}
    if result is None:
        lines = ["no transition found: surface stays embedded across the grid"]
        doc["transition"] = None
    elif result.already_intersecting:
        lines = [f"already intersecting at s=0 "
                 f"({len(result.witnesses.pairs)} witness pairs)"]
        doc["transition"] = {"already_intersecting": True,
                             "pairs": len(result.witnesses.pairs)}
    else:
        for label, s in (("s_lo", result.s_lo), ("s_hi", result.s_hi)):
            mesh = triangulate(rule(family.fixed, family.curve_at(s)), args.vsteps)
            rep = self_intersections(mesh, eps=args.eps)
            files += [str(p) for p in formats.export_mesh(
                mesh, out / f"{stem}_{label}", report=rep)]
            if args.figures:
                files.append(str(report.figure_surface(
                    out / f"{stem}_{label}.png", mesh, rep,
                    title=f"{stem} at {label}")))
        lines = [
            f"transition bracket: [{result.s_lo!r}, {result.s_hi!r}]",
            f"bracket width: {result.width!r}",
            f"witness pairs at s_hi: {len(result.witnesses.pairs)}",
            f"curve self-proximity at s_hi: {result.self_proximity_at_hi!r}",
        ]
        doc["transition"] = {
            "already_intersecting": False,
            "s_lo": result.s_lo, "s_hi": result.s_hi, "width": result.width,
            "pairs_at_hi": len(result.witnesses.pairs),
            "self_proximity_at_hi": result.self_proximity_at_hi,
        }
    if args.figures:
        bracket = None if result is None else result.bracket
        files.append(str(report.figure_morph_timeline(
            out / f"{stem}_timeline.png", scan_rows, bracket, title=stem)))
    doc["files"] = files
    lines += [f"wrote {p}" for p in files]
    _emit(args, doc, lines)
    return 0


def cmd_morph(args):
    rec_a = _resolve_knot(args.knot_a)
    rec_b = _resolve_knot(args.knot_b)
    rng = np.random.default_rng(_seed(args))
    c1 = _knot_curve(rec_a, args.samples)
    c2 = _knot_curve(rec_b, args.samples)
    family = family_between(c1, c2, rng=rng)
    return _run_transition(args, family, f"morph_{rec_a.name}_{rec_b.name}",
                           [rec_a.name, rec_b.name])


def cmd_iterate_morph(args):
    record = _resolve_knot(args.knot)
    rng = np.random.default_rng(_seed(args))
    family = bezier_iterate_family(record.polygon, args.from_iter,
                                   args.from_iter + 1, m=args.samples, rng=rng)
    stem = f"iterate_{record.name}_{args.from_iter}_{args.from_iter + 1}"
    return _run_transition(args, family, stem, [record.name])


def cmd_serve(args):
    from .service import serve
    serve(port=args.port)
    return 0


# ---------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="knotmorph",
                     description="ruled surfaces over morphing stick knots")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, samples_default):
        p.add_argument("--out", default="knotmorph-out",
                       help="output directory (default: knotmorph-out)")
        p.add_argument("--json", action="store_true",
                       help="machine-readable output")
        p.add_argument("--figures", action="store_true",
                       help="also render matplotlib figures")
        p.add_argument("--seed", type=int, default=None,
                       help="projection-jitter seed (overrides KNOTMORPH_SEED)")
        p.add_argument("--samples", type=int, default=samples_default,
                       help="boundary samples (0 = polygon vertices)")
        p.add_argument("--eps", type=float, default=1e-9,
                       help="intersection degeneracy tolerance")

    p = sub.add_parser("validate", help="check a knot file against the input contract")
    p.add_argument("knot")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("refine", help="midpoint-refinement iterates and distances")
    p.add_argument("knot")
    p.add_argument("--iters", type=int, default=5)
    common(p, samples_default=512)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("sweep", help="sweep a knot along a direction and test")
    p.add_argument("knot")
    p.add_argument("--dir", default="0,0,1", help="sweep direction x,y,z")
    p.add_argument("--length", default="auto",
                   help="sweep length, or auto for 0.99 x safe bound")
    p.add_argument("--vsteps", type=int, default=8)
    common(p, samples_default=0)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rule", help="ruled surface between two knots + certificate")
    p.add_argument("knot_a")
    p.add_argument("knot_b")
    p.add_argument("--vsteps", type=int, default=16)
    common(p, samples_default=64)
    p.set_defaults(func=cmd_rule)

    p = sub.add_parser("morph", help="localize the first self-intersection parameter")
    p.add_argument("knot_a")
    p.add_argument("knot_b")
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--vsteps", type=int, default=8)
    common(p, samples_default=64)
    p.set_defaults(func=cmd_morph)

    p = sub.add_parser("iterate-morph",
                       help="morph between consecutive refinement iterates")
    p.add_argument("knot")
    p.add_argument("--from", dest="from_iter", type=int, required=True,
                   metavar="J", help="iterate index (family runs J -> J+1)")
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--vsteps", type=int, default=8)
    common(p, samples_default=64)
    p.set_defaults(func=cmd_iterate_morph)

    p = sub.add_parser("serve", help="run the session HTTP service")
    p.add_argument("--port", type=int, default=8750)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ValidationError as exc:
        print("invalid knot:", file=sys.stderr)
        for v in exc.verdict.violations:
            print(f"  - {v.message}", file=sys.stderr)
        return 1
    except KnotMorphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
