"""Session-scoped JSON-over-HTTP service for the interactive viewer.

Single-researcher sessions: mutations are serialized by compare-and-set on
a per-session revision counter (stale base_revision gets 409), reads serve
the last committed revision, and transition searches run as cancelable
background jobs with progress polling. The service keeps no geometry state
beyond the session document: every mesh response is recomputable from the
downloadable document.
"""
import json
import re
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from . import corpus, formats
from .errors import Aborted, DomainError, KnotMorphError, ParseError
from .intersect import self_intersections
from .knots import ControlPolygon, insert_collinear, refine_midpoints, \
    sample_polygon, validate_polygon
from .morph import family_between, first_intersection_parameter
from .surface import rule, triangulate

SCHEMA_VERSION = "knotmorph.service/1"

_MORPH_DEFAULTS = {"samples": 64, "v_steps": 8, "eps": 1e-9, "seed": 0,
                   "safety": 0.99}


class ApiError(Exception):
    def __init__(self, status, code, message, **extra):
        super().__init__(message)
        self.status = status
        self.body = {"error": code, "message": message, **extra}


class Job:
    def __init__(self, job_id, base_revision):
        self.id = job_id
        self.base_revision = base_revision
        self.status = "queued"
        self.progress = [0, 1]
        self.result = None
        self.message = None
        self.cancel = threading.Event()
        self.thread = None

    def to_json(self):
        return {"job": self.id, "status": self.status,
                "progress": list(self.progress), "result": self.result,
                "base_revision": self.base_revision, "message": self.message}


class Session:
    def __init__(self, sid, record):
        self.id = sid
        self.lock = threading.RLock()
        self.revision = 1
        self.knot = record
        self.morph = None
        self.results = {}
        self.jobs = {}

    # -- state ------------------------------------------------------------

    def check_revision(self, body):
        base = body.get("base_revision")
        if base != self.revision:
            raise ApiError(409, "stale_revision",
                           f"base_revision {base!r} does not match {self.revision}",
                           revision=self.revision)

    def replace_points(self, points, closed):
        polygon = ControlPolygon(np.asarray(points, dtype=float), closed)
        verdict = validate_polygon(polygon, initial=True)
        if not verdict.ok:
            raise ApiError(422, "invalid_polygon", "polygon fails validation",
                           verdict=[{"code": v.code, "message": v.message}
                                    for v in verdict.violations])
        self.knot = formats.KnotRecord(self.knot.name, self.knot.claimed_type,
                                       polygon)
        self.revision += 1

    def morph_config(self):
        if self.morph is None:
            raise ApiError(400, "no_morph", "session has no morph definition")
        return self.morph

    def family(self):
        cfg = self.morph_config()
        target = formats.knot_record_from_dict(cfg["target"])
        m = cfg["samples"]
        c1 = sample_polygon(self.knot.polygon, m)
        c2 = sample_polygon(target.polygon, m)
        rng = np.random.default_rng(cfg["seed"])
        return family_between(c1, c2, rng=rng, safety=cfg["safety"])

    def document(self):
        knots = [self.knot]
        morphs = []
        if self.morph is not None:
            morphs.append(dict(self.morph))
        return formats.SessionDocument(knots=knots, morphs=morphs,
                                       results=dict(self.results))


class ServiceState:
    def __init__(self):
        self.lock = threading.Lock()
        self.sessions = {}

    def create(self, record):
        with self.lock:
            sid = uuid.uuid4().hex[:12]
            session = Session(sid, record)
            self.sessions[sid] = session
            return session

    def get(self, sid):
        with self.lock:
            session = self.sessions.get(sid)
        if session is None:
            raise ApiError(404, "no_session", f"unknown session {sid!r}")
        return session


def _record_from_body(body):
    if "corpus" in body:
        try:
            return corpus.load(body["corpus"])
        except KeyError:
            raise ApiError(404, "no_corpus_knot",
                           f"no bundled knot named {body['corpus']!r}")
    if "knot_text" in body:
        try:
            return formats.parse_stick_knot(body["knot_text"])
        except ParseError as exc:
            raise ApiError(422, "parse_error", str(exc))
        except KnotMorphError as exc:
            raise ApiError(422, "invalid_polygon", str(exc))
    if "knot" in body:
        try:
            record = formats.knot_record_from_dict(body["knot"])
        except ParseError as exc:
            raise ApiError(422, "parse_error", str(exc))
        verdict = validate_polygon(record.polygon, initial=True)
        if not verdict.ok:
            raise ApiError(422, "invalid_polygon", "polygon fails validation",
                           verdict=[{"code": v.code, "message": v.message}
                                    for v in verdict.violations])
        return record
    raise ApiError(400, "bad_request",
                   "expected one of: corpus, knot_text, knot")


def _mesh_payload(family, s, v_steps, eps):
    try:
        mesh = triangulate(rule(family.fixed, family.curve_at(s)), v_steps)
    except DomainError as exc:
        raise ApiError(400, "domain_error", str(exc))
    report = self_intersections(mesh, eps=eps)
    return {
        "s": s,
        "v_steps": v_steps,
        "vertices": mesh.vertices.ravel().tolist(),
        "triangles": mesh.triangles.ravel().tolist(),
        "uv": mesh.uv.ravel().tolist(),
        "witnesses": {
            "pairs": [[*map(float, h.witness_a), *map(float, h.witness_b)]
                      for h in report.pairs],
            "grazing": [[*map(float, h.witness_a), *map(float, h.witness_b)]
                        for h in report.grazing],
        },
        "report": {
            "pairs": len(report.pairs),
            "grazing": len(report.grazing),
            "tested_pairs": report.tested_pairs,
            "excluded_adjacent": report.excluded_adjacent,
        },
    }


def _transition_json(result):
    if result is None:
        return {"found": False}
    return {
        "found": True,
        "already_intersecting": result.already_intersecting,
        "s_lo": result.s_lo,
        "s_hi": result.s_hi,
        "width": result.width,
        "pairs_at_hi": len(result.witnesses.pairs),
        "self_proximity_at_hi": result.self_proximity_at_hi,
        "grid": result.scan_grid,
        "v_steps": result.v_steps,
        "eps": result.eps,
    }


def _run_job(session, job, grid, tol):
    cfg = session.morph_config()
    family = session.family()
    job.status = "running"

    def progress(k, total):
        job.progress = [k, total]

    try:
        result = first_intersection_parameter(
            family, grid=grid, tol=tol, v_steps=cfg["v_steps"],
            eps=cfg["eps"], on_progress=progress,
            should_abort=job.cancel.is_set)
    except Aborted:
        job.status = "cancelled"
        return
    except KnotMorphError as exc:
        job.status = "failed"
        job.message = str(exc)
        return
    job.result = _transition_json(result)
    with session.lock:
        if job.cancel.is_set():
            job.status = "cancelled"
            return
        session.results[job.id] = job.result
        session.revision += 1
        job.status = "done"


SCHEMAS = {
    "schema": SCHEMA_VERSION,
    "endpoints": {
        "POST /sessions": {"body": {"corpus | knot_text | knot": "..."},
                           "response": ["session", "revision", "knot"]},
        "GET /sessions/{sid}": ["revision", "document"],
        "GET /sessions/{sid}/document": "knotmorph.session document",
        "GET /sessions/{sid}/points": ["revision", "points", "closed"],
        "PUT /sessions/{sid}/points": {"body": ["points", "closed?",
                                                "base_revision"]},
        "POST /sessions/{sid}/points/insert": {"body": ["segment_index",
                                                        "fraction",
                                                        "base_revision"]},
        "POST /sessions/{sid}/points/refine": {"body": ["base_revision"]},
        "PUT /sessions/{sid}/morph": {"body": ["target_corpus | target",
                                               "samples?", "v_steps?", "eps?",
                                               "seed?", "base_revision"]},
        "GET /sessions/{sid}/curve?s=": ["revision", "s", "samples", "closed"],
        "GET /sessions/{sid}/mesh?s=&v_steps=": ["revision", "mesh"],
        "POST /sessions/{sid}/jobs": {"body": ["grid?", "tol?",
                                               "base_revision"],
                                      "response": ["job"]},
        "GET /sessions/{sid}/jobs/{jid}": ["status", "progress", "result"],
        "DELETE /sessions/{sid}/jobs/{jid}": "cancel",
    },
}


class Handler(BaseHTTPRequestHandler):
    state = None
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        pass

    # -- plumbing ----------------------------------------------------------

    def _body(self):
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise ApiError(400, "bad_json", "request body is not valid JSON")

    def _send(self, status, doc):
        payload = json.dumps(doc, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(payload)

    def _dispatch(self, method):
        try:
            doc, status = self._route(method)
            self._send(status, doc)
        except ApiError as exc:
            self._send(exc.status, exc.body)
        except KnotMorphError as exc:
            self._send(400, {"error": "domain_error", "message": str(exc)})
        except Exception as exc:  # pragma: no cover - defensive
            self._send(500, {"error": "internal", "message": str(exc)})

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PUT(self):
        self._dispatch("PUT")

    def do_DELETE(self):
        self._dispatch("DELETE")

    # -- routing -----------------------------------------------------------

    def _route(self, method):
        path, _, query = self.path.partition("?")
        params = {}
        for part in query.split("&"):
            if "=" in part:
                k, _, v = part.partition("=")
                params[k] = v
        key = (method, path)

        if key == ("GET", "/schema"):
            return SCHEMAS, 200
        if key == ("POST", "/sessions"):
            return self._create_session()
        if key == ("GET", "/sessions"):
            with self.state.lock:
                ids = sorted(self.state.sessions)
            return {"schema": SCHEMA_VERSION, "sessions": ids}, 200

        m = re.fullmatch(r"/sessions/([0-9a-f]+)(/.*)?", path)
        if not m:
            raise ApiError(404, "no_route", f"no route {method} {path}")
        session = self.state.get(m.group(1))
        rest = m.group(2) or ""
        return self._session_route(method, session, rest, params)

    def _create_session(self):
        body = self._body()
        record = _record_from_body(body)
        session = self.state.create(record)
        return {"schema": SCHEMA_VERSION, "session": session.id,
                "revision": session.revision,
                "knot": formats.knot_record_to_dict(record)}, 201

    def _session_route(self, method, session, rest, params):
        if rest == "" and method == "GET":
            with session.lock:
                return {"schema": SCHEMA_VERSION, "session": session.id,
                        "revision": session.revision,
                        "document": session.document().to_json_dict()}, 200
        if rest == "/document" and method == "GET":
            with session.lock:
                return session.document().to_json_dict(), 200
        if rest == "/points":
            return self._points(method, session)
        if rest == "/points/insert" and method == "POST":
            return self._insert(session)
        if rest == "/points/refine" and method == "POST":
            return self._refine(session)
        if rest == "/morph" and method == "PUT":
            return self._set_morph(session)
        if rest == "/curve" and method == "GET":
            return self._curve(session, params)
        if rest == "/mesh" and method == "GET":
            return self._mesh(session, params)
        if rest == "/jobs" and method == "POST":
            return self._start_job(session)
        m = re.fullmatch(r"/jobs/([0-9a-f]+)", rest)
        if m:
            return self._job(method, session, m.group(1))
        raise ApiError(404, "no_route", f"no route {method} {rest or '/'}")

    # -- handlers ----------------------------------------------------------

    def _points(self, method, session):
        if method == "GET":
            with session.lock:
                return {"schema": SCHEMA_VERSION,
                        "revision": session.revision,
                        "points": session.knot.polygon.points.tolist(),
                        "closed": session.knot.polygon.closed}, 200
        if method != "PUT":
            raise ApiError(405, "bad_method", "points supports GET and PUT")
        body = self._body()
        if "points" not in body:
            raise ApiError(400, "bad_request", "missing points")
        with session.lock:
            session.check_revision(body)
            closed = bool(body.get("closed", session.knot.polygon.closed))
            session.replace_points(body["points"], closed)
            return {"schema": SCHEMA_VERSION, "revision": session.revision}, 200

    def _insert(self, session):
        body = self._body()
        try:
            segment_index = int(body["segment_index"])
            fraction = float(body["fraction"])
        except (KeyError, TypeError, ValueError):
            raise ApiError(400, "bad_request",
                           "need integer segment_index and float fraction")
        with session.lock:
            session.check_revision(body)
            try:
                polygon = insert_collinear(session.knot.polygon,
                                           segment_index, fraction)
            except DomainError as exc:
                raise ApiError(400, "domain_error", str(exc))
            # refined/inserted polygons are exempt from the initial contract
            session.knot = formats.KnotRecord(
                session.knot.name, session.knot.claimed_type, polygon)
            session.revision += 1
            return {"schema": SCHEMA_VERSION, "revision": session.revision,
                    "points": polygon.points.tolist()}, 200

    def _refine(self, session):
        body = self._body()
        with session.lock:
            session.check_revision(body)
            polygon = refine_midpoints(session.knot.polygon)
            session.knot = formats.KnotRecord(
                session.knot.name, session.knot.claimed_type, polygon)
            session.revision += 1
            return {"schema": SCHEMA_VERSION, "revision": session.revision,
                    "points": polygon.points.tolist()}, 200

    def _set_morph(self, session):
        body = self._body()
        if "target_corpus" in body:
            try:
                target = corpus.load(body["target_corpus"])
            except KeyError:
                raise ApiError(404, "no_corpus_knot",
                               f"no bundled knot {body['target_corpus']!r}")
        elif "target" in body:
            target = formats.knot_record_from_dict(body["target"])
        else:
            raise ApiError(400, "bad_request", "missing target")
        cfg = dict(_MORPH_DEFAULTS)
        for field in ("samples", "v_steps", "seed"):
            if field in body:
                cfg[field] = int(body[field])
        for field in ("eps", "safety"):
            if field in body:
                cfg[field] = float(body[field])
        cfg["target"] = formats.knot_record_to_dict(target)
        with session.lock:
            session.check_revision(body)
            session.morph = cfg
            session.revision += 1
            return {"schema": SCHEMA_VERSION, "revision": session.revision,
                    "morph": cfg}, 200

    def _float_param(self, params, name, default=None):
        if name not in params:
            if default is None:
                raise ApiError(400, "bad_request", f"missing query param {name}")
            return default
        try:
            return float(params[name])
        except ValueError:
            raise ApiError(400, "bad_request", f"{name} must be a number")

    def _curve(self, session, params):
        s = self._float_param(params, "s")
        with session.lock:
            family = session.family()
            revision = session.revision
        try:
            curve = family.curve_at(s)
        except DomainError as exc:
            raise ApiError(400, "domain_error", str(exc))
        return {"schema": SCHEMA_VERSION, "revision": revision, "s": s,
                "samples": curve.samples.tolist(),
                "closed": curve.closed}, 200

    def _mesh(self, session, params):
        s = self._float_param(params, "s")
        with session.lock:
            cfg = session.morph_config()
            v_steps = int(self._float_param(params, "v_steps",
                                            float(cfg["v_steps"])))
            revision = session.revision
            family = session.family()
        # geometry computed outside the lock: reads never block mutations
        payload = _mesh_payload(family, s, v_steps, cfg["eps"])
        payload.update({"schema": SCHEMA_VERSION, "revision": revision})
        return payload, 200

    def _start_job(self, session):
        body = self._body()
        grid = int(body.get("grid", 64))
        tol = float(body.get("tol", 1e-6))
        with session.lock:
            session.check_revision(body)
            session.morph_config()
            job = Job(uuid.uuid4().hex[:12], session.revision)
            session.jobs[job.id] = job
        job.thread = threading.Thread(
            target=_run_job, args=(session, job, grid, tol), daemon=True)
        job.thread.start()
        return {"schema": SCHEMA_VERSION, "revision": job.base_revision,
                **job.to_json()}, 202

    def _job(self, method, session, job_id):
        with session.lock:
            job = session.jobs.get(job_id)
        if job is None:
            raise ApiError(404, "no_job", f"unknown job {job_id!r}")
        if method == "GET":
            with session.lock:
                return {"schema": SCHEMA_VERSION,
                        "revision": session.revision, **job.to_json()}, 200
        if method == "DELETE":
            job.cancel.set()
            job.thread.join(timeout=30.0)
            with session.lock:
                return {"schema": SCHEMA_VERSION,
                        "revision": session.revision, **job.to_json()}, 200
        raise ApiError(405, "bad_method", "jobs support GET and DELETE")


def make_server(port=0):
    state = ServiceState()
    handler = type("BoundHandler", (Handler,), {"state": state})
    server = ThreadingHTTPServer(("127.0.0.1", port), handler)
    return server


def serve(port=8750):
    server = make_server(port)
    host, actual_port = server.server_address
    print(f"knotmorph service on http://{host}:{actual_port} (Ctrl-C to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
