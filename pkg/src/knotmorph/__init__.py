"""knotmorph: ruled surfaces over morphing polygonal knots.

Sweeps, ruled and skinned surfaces between stick knots and their Bezier
curves; mesh self-intersection testing with resolution-stamped isotopy
certificates; and localization of the first morph parameter at which a
ruled surface stops being embedded.
"""
from .errors import (Aborted, DomainError, GenericityError, KnotMorphError,
                     ParseError, ValidationError)
from .intersect import (IntersectionReport, IsotopyCertificate, PairHit,
                        certify_isotopy, self_intersections,
                        self_intersections_bruteforce, tri_tri_intersect)
from .knots import (BezierCurve, ControlPolygon, RefinementSequence,
                    SampledCurve, ValidationVerdict, bezier_eval,
                    insert_collinear, polygon_curve_distance,
                    polygon_to_sampled, polyline_hausdorff, refine_midpoints,
                    sample_curve, sample_polygon, validate_polygon)
from .morph import (MorphFamily, TransitionResult, bezier_iterate_family,
                    curve_self_proximity, family_between,
                    first_intersection_parameter, intersects_at)
from .surface import (CrossingPreimage, RuledSurface, TriangleMesh,
                      crossing_preimages, jittered_generic_direction,
                      merge_meshes, rule, safe_sweep_length, skin, sweep,
                      triangulate)

__version__ = "0.1.0"
