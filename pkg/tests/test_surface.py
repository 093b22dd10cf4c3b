import math

import numpy as np
import pytest

import knotmorph as km
from knotmorph import corpus
from knotmorph.errors import DomainError, GenericityError
from knotmorph.surface import polygon_diameter

from conftest import circle_curve


def brute_crossings(polygon, direction):
    """Independent oracle: all nonadjacent projected segment crossings by
    direct 2x2 solves against an explicitly constructed frame."""
    d = np.asarray(direction, float)
    d = d / np.linalg.norm(d)
    seed = np.array([1.0, 0, 0]) if abs(d[0]) < 0.9 else np.array([0.0, 1, 0])
    e1 = seed - (seed @ d) * d
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    pts = polygon.points
    ext = np.vstack([pts, pts[:1]]) if polygon.closed else pts
    nseg = polygon.segment_count
    npts = len(pts)
    out = []
    for i in range(nseg):
        for j in range(i + 1, nseg):
            ends_i = {i, (i + 1) % npts}
            ends_j = {j, (j + 1) % npts}
            if ends_i & ends_j:
                continue
            A = np.column_stack([
                [(ext[i + 1] - ext[i]) @ e1, (ext[i + 1] - ext[i]) @ e2],
                [-(ext[j + 1] - ext[j]) @ e1, -(ext[j + 1] - ext[j]) @ e2]])
            b = np.array([(ext[j] - ext[i]) @ e1, (ext[j] - ext[i]) @ e2])
            if abs(np.linalg.det(A)) < 1e-12:
                continue
            u, v = np.linalg.solve(A, b)
            if 1e-9 < u < 1 - 1e-9 and 1e-9 < v < 1 - 1e-9:
                pa = ext[i] + u * (ext[i + 1] - ext[i])
                pb = ext[j] + v * (ext[j + 1] - ext[j])
                out.append(((i, j), float(np.linalg.norm(pa - pb))))
    return out


class TestRuledSurface:
    def test_sweep_boundaries_reproduced_exactly(self):
        c = circle_curve(64)
        surf = km.sweep(c, (0.0, 0.0, 1.0), 0.5)
        assert np.array_equal(surf.c1.samples, c.samples)
        np.testing.assert_allclose(
            surf.c2.samples, c.samples + [0, 0, 0.5], atol=0)
        for k in (0, 17, 64):
            assert np.array_equal(surf.point(k, 0.0), c.samples[k])

    def test_bilinearity_at_half(self):
        c1 = circle_curve(32)
        c2 = circle_curve(32, z=1.0, radius=2.0)
        surf = km.rule(c1, c2)
        mid = surf.section(0.5).samples
        np.testing.assert_allclose(
            mid, 0.5 * (c1.samples + c2.samples), rtol=0, atol=1e-15)

    def test_sweep_argument_validation(self):
        c = circle_curve(16)
        with pytest.raises(DomainError):
            km.sweep(c, (0.0, 0.0, 0.0), 1.0)
        with pytest.raises(DomainError):
            km.sweep(c, (0.0, 0.0, 2.0), 1.0)  # not unit
        with pytest.raises(DomainError):
            km.sweep(c, (0.0, 0.0, 1.0), 0.0)

    def test_rule_requires_compatible_sampling(self):
        with pytest.raises(DomainError):
            km.rule(circle_curve(16), circle_curve(32))
        open_curve = km.SampledCurve(circle_curve(16).samples, False)
        with pytest.raises(DomainError):
            km.rule(circle_curve(16), open_curve)

    def test_degenerate_rule_rejected_by_triangulation(self):
        c = circle_curve(16)
        surf = km.rule(c, c)
        with pytest.raises(DomainError):
            km.triangulate(surf, 4)

    def test_skin_needs_two_curves(self):
        with pytest.raises(DomainError):
            km.skin([circle_curve(16)])

    def test_skin_patch_chain(self):
        curves = [circle_curve(16, z=float(k)) for k in range(4)]
        patches = km.skin(curves)
        assert len(patches) == 3
        for k, patch in enumerate(patches):
            assert np.array_equal(patch.c1.samples, curves[k].samples)
            assert np.array_equal(patch.c2.samples, curves[k + 1].samples)


class TestTriangulate:
    def test_grid_counts_and_uv(self):
        surf = km.sweep(circle_curve(8), (0, 0, 1.0), 1.0)
        mesh = km.triangulate(surf, 3)
        assert mesh.triangle_count == 2 * 8 * 3
        assert len(mesh.vertices) == 9 * 4
        assert mesh.uv.shape == (36, 2)
        assert mesh.uv[:4, 1].tolist() == [0, 1 / 3, 2 / 3, 1.0]

    def test_v_steps_validation(self):
        surf = km.sweep(circle_curve(8), (0, 0, 1.0), 1.0)
        with pytest.raises(DomainError):
            km.triangulate(surf, 0)

    def test_interior_edges_shared_by_two_triangles(self):
        surf = km.sweep(circle_curve(10), (0, 0, 1.0), 1.0)
        mesh = km.triangulate(surf, 4)
        edge_count = {}
        for tri in mesh.triangles:
            for a, b in ((0, 1), (1, 2), (2, 0)):
                e = tuple(sorted((int(tri[a]), int(tri[b]))))
                edge_count[e] = edge_count.get(e, 0) + 1
        interior = [c for c in edge_count.values() if c == 2]
        boundary = [c for c in edge_count.values() if c == 1]
        assert set(edge_count.values()) == {1, 2}
        # closed-u grid: boundary edges only at v=0, v=1 and the seam columns
        assert len(boundary) == 10 + 10 + 4 + 4

    def test_merge_meshes_keeps_patch_provenance(self):
        curves = [circle_curve(12, z=float(k)) for k in range(3)]
        meshes = [km.triangulate(p, 2) for p in km.skin(curves)]
        merged = km.merge_meshes(meshes)
        assert merged.triangle_count == sum(m.triangle_count for m in meshes)
        assert merged.patch.tolist() == [0] * meshes[0].triangle_count + \
            [1] * meshes[1].triangle_count

    def test_stacked_skin_composite_does_not_self_intersect(self):
        curves = [circle_curve(16, z=0.7 * k) for k in range(4)]
        merged = km.merge_meshes([km.triangulate(p, 2) for p in km.skin(curves)])
        report = km.self_intersections(merged)
        assert not report.pairs
        # seam triangles between consecutive patches are adjacency-excluded
        assert report.excluded_adjacent > 0


class TestCrossingPreimages:
    def test_planar_convex_polygon_has_none(self):
        square = corpus.load("square_unknot").polygon
        assert km.crossing_preimages(square, (0.0, 0.0, 1.0)) == []
        assert km.safe_sweep_length(square, (0.0, 0.0, 1.0)) == math.inf

    def test_one_crossing_curve(self):
        poly = corpus.load("one_crossing").polygon
        crossings = km.crossing_preimages(poly, (0.0, 0.0, 1.0))
        assert len(crossings) == 1
        c = crossings[0]
        assert c.segments == (0, 2)
        np.testing.assert_allclose(c.point_a, [0, 0, 0], atol=1e-12)
        np.testing.assert_allclose(c.point_b, [0, 0, 1], atol=1e-12)
        assert abs(c.gap - 1.0) < 1e-12
        assert abs(km.safe_sweep_length(poly, (0, 0, 1)) - 0.5) < 1e-12

    def test_matches_brute_oracle_on_corpus(self):
        rng = np.random.default_rng(5)
        for rec in corpus.records():
            for _ in range(5):
                d, crossings = km.jittered_generic_direction(
                    rec.polygon, direction=rng.normal(size=3), rng=rng)
                oracle = brute_crossings(rec.polygon, d)
                assert sorted(c.segments for c in crossings) == \
                    sorted(seg for seg, _ in oracle)
                gaps = {c.segments: c.gap for c in crossings}
                for seg, gap in oracle:
                    assert abs(gaps[seg] - gap) < 1e-9

    def test_fig8_has_at_least_four_crossings(self):
        rng = np.random.default_rng(10)
        poly = corpus.load("fig8").polygon
        for _ in range(10):
            _, crossings = km.jittered_generic_direction(
                poly, direction=rng.normal(size=3), rng=rng)
            assert len(crossings) >= 4

    def test_half_min_gap_identity(self):
        poly = corpus.load("fig8").polygon
        d, crossings = km.jittered_generic_direction(poly)
        bound = km.safe_sweep_length(poly, d)
        assert abs(2.0 * bound - min(c.gap for c in crossings)) <= 1e-12

    def test_parallel_segment_rejected(self):
        poly = corpus.load("one_crossing").polygon
        # direction along the first segment
        d = poly.points[1] - poly.points[0]
        d = d / np.linalg.norm(d)
        with pytest.raises(GenericityError) as err:
            km.crossing_preimages(poly, d)
        assert err.value.segment_pair is not None

    def test_endpoint_touching_projection_rejected(self):
        # projected crossing exactly at an endpoint of segment 2
        poly = km.ControlPolygon(
            [[-1, 0, 0], [1, 0, 0], [1, 1, 1], [0, 0, 1], [-1, -1, 1]],
            closed=False)
        with pytest.raises(GenericityError):
            km.crossing_preimages(poly, (0.0, 0.0, 1.0))

    def test_direction_must_be_unit(self):
        with pytest.raises(DomainError):
            km.crossing_preimages(corpus.load("fig8").polygon, (0, 0, 2.0))


class TestSweepSafety:
    def test_sweep_below_bound_certifies_100_directions(self):
        rng = np.random.default_rng(2024)
        for rec in corpus.records():
            poly = rec.polygon
            curve = km.polygon_to_sampled(poly)
            for _ in range(100):
                d, _ = km.jittered_generic_direction(
                    poly, direction=rng.normal(size=3), rng=rng)
                bound = km.safe_sweep_length(poly, d)
                length = 0.9 * bound if math.isfinite(bound) else polygon_diameter(poly)
                mesh = km.triangulate(km.sweep(curve, d, length), 2)
                report = km.self_intersections(mesh)
                assert not report.pairs, (rec.name, d, bound)

    def test_sweep_above_gap_intersects(self):
        poly = corpus.load("one_crossing").polygon
        curve = km.polygon_to_sampled(poly)
        mesh = km.triangulate(km.sweep(curve, (0.0, 0.0, 1.0), 2.0), 4)
        report = km.self_intersections(mesh)
        brute = km.self_intersections_bruteforce(mesh)
        assert report.pairs
        assert report.pair_indices() == brute.pair_indices()

    def test_point_99_of_bound_certifies_every_bundled_knot(self):
        for rec in corpus.records():
            poly = rec.polygon
            d, crossings = km.jittered_generic_direction(poly)
            if not crossings:
                continue  # crossing-free projection: any length is safe
            bound = km.safe_sweep_length(poly, d)
            mesh = km.triangulate(
                km.sweep(km.polygon_to_sampled(poly), d, 0.99 * bound), 4)
            assert not km.self_intersections(mesh).pairs, rec.name
