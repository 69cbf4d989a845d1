"""Stateless HTTP facade over the engine.

Endpoints: POST /api/power, /api/sweep, /api/validate and GET /api/health.
Bodies are JSON with the design inline as ``[{"count": 6, "allocation":
[0,1,1]}, ...]`` or a plain 0/1 matrix. Validation failures map to 422 with
``{"code", "message"}``; malformed requests to 400. Requests are served
concurrently and each engine call runs under a wall-clock budget.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .design import Design
from .engine import ScenarioSpec, compute_power, sweep_power, validate_scenario
from .errors import E_BUDGET, ValidationError
from .kernels import active_backend
from .version import __version__

DEFAULT_TIME_BUDGET = 60.0

_SPEC_FLOATS = (
    "meanresponse_start",
    "meanresponse_end0",
    "meanresponse_end1",
    "effectsize_beta",
    "sigma2",
)


class BadRequest(Exception):
    pass


def design_from_payload(payload) -> Design:
    if isinstance(payload, list) and payload and isinstance(payload[0], dict):
        rows = []
        for row in payload:
            try:
                rows.append((int(row["count"]), tuple(row["allocation"])))
            except (KeyError, TypeError, ValueError):
                raise BadRequest("design rows need integer 'count' and 'allocation' list")
        return Design.from_rows(rows)
    if isinstance(payload, list) and payload and isinstance(payload[0], (list, tuple)):
        return Design.from_matrix(payload)
    raise BadRequest("design must be a matrix or a list of {count, allocation} rows")


def spec_from_payload(body: dict) -> ScenarioSpec:
    if not isinstance(body, dict):
        raise BadRequest("request body must be a JSON object")
    if "design" not in body or "K" not in body:
        raise ValidationError("E-MISSING", "both 'design' and 'K' are required")
    design = design_from_payload(body["design"])
    kwargs = {}
    for key in _SPEC_FLOATS + ("typeIerror", "alpha0", "alpha1", "alpha2"):
        if key in body and body[key] is not None:
            try:
                kwargs[key] = float(body[key])
            except (TypeError, ValueError):
                raise BadRequest(f"field {key!r} must be a number")
    for key in ("family", "model", "link", "type"):
        if key in body and body[key] is not None:
            kwargs[key] = str(body[key])
    if "quad_nodes" in body and body["quad_nodes"] is not None:
        try:
            kwargs["quad_nodes"] = int(body["quad_nodes"])
        except (TypeError, ValueError):
            raise BadRequest("field 'quad_nodes' must be an integer")
    try:
        K = int(body["K"])
    except (TypeError, ValueError):
        raise BadRequest("field 'K' must be an integer")
    return ScenarioSpec(K=K, design=design, **kwargs)


def run_with_budget(fn, seconds: float):
    """Run fn in a worker thread; raise E-BUDGET if it misses the deadline."""
    done = {}

    def target():
        try:
            done["value"] = fn()
        except BaseException as exc:  # propagated to the caller below
            done["error"] = exc

    worker = threading.Thread(target=target, daemon=True)
    worker.start()
    worker.join(seconds)
    if worker.is_alive():
        raise ValidationError(
            E_BUDGET, f"computation exceeded the per-request time budget of {seconds:g} s"
        )
    if "error" in done:
        raise done["error"]
    return done["value"]


def make_handler(cors_origin: str, time_budget: float):
    class ApiHandler(BaseHTTPRequestHandler):
        server_version = f"swdpwr/{__version__}"

        def log_message(self, fmt, *args):  # diagnostics only
            import sys

            print(f"{self.address_string()} {fmt % args}", file=sys.stderr)

        def _send(self, status: int, payload: dict) -> None:
            raw = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(raw)))
            self.send_header("Access-Control-Allow-Origin", cors_origin)
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.end_headers()
            self.wfile.write(raw)

        def do_OPTIONS(self):
            self._send(204, {})

        def do_GET(self):
            if self.path == "/api/health":
                self._send(
                    200,
                    {
                        "status": "ok",
                        "name": "swdpwr",
                        "version": __version__,
                        "kernel_backend": active_backend(),
                    },
                )
            else:
                self._send(404, {"code": "E-NOTFOUND", "message": "unknown endpoint"})

        def _read_body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            try:
                return json.loads(raw.decode("utf-8") or "null")
            except (json.JSONDecodeError, UnicodeDecodeError):
                raise BadRequest("request body is not valid JSON")

        def do_POST(self):
            try:
                body = self._read_body()
                if self.path == "/api/power":
                    spec = spec_from_payload(body)
                    report = run_with_budget(lambda: compute_power(spec), time_budget)
                    self._send(200, report.as_dict())
                elif self.path == "/api/sweep":
                    if not isinstance(body, dict) or "spec" not in body:
                        raise BadRequest("sweep body needs 'spec', 'param' and 'grid'")
                    spec = spec_from_payload(body["spec"])
                    param = body.get("param")
                    grid = body.get("grid")
                    if not isinstance(grid, list) or not grid:
                        raise BadRequest("'grid' must be a non-empty list of numbers")
                    points = run_with_budget(
                        lambda: sweep_power(spec, param, [float(v) for v in grid]),
                        time_budget,
                    )
                    self._send(200, {"points": [pt.as_dict() for pt in points]})
                elif self.path == "/api/validate":
                    spec = spec_from_payload(body)
                    sc = validate_scenario(spec)
                    self._send(200, {"ok": True, "warnings": [w.as_dict() for w in sc.warnings]})
                else:
                    self._send(404, {"code": "E-NOTFOUND", "message": "unknown endpoint"})
            except BadRequest as err:
                self._send(400, {"code": "E-BADREQUEST", "message": str(err)})
            except ValidationError as err:
                payload = {"code": err.code, "message": err.message}
                if self.path == "/api/validate":
                    payload["ok"] = False
                self._send(422, payload)
            except Exception as err:  # pragma: no cover - defensive
                self._send(500, {"code": "E-INTERNAL", "message": str(err)})

    return ApiHandler


def make_server(
    bind: str = "127.0.0.1:8750",
    cors_origin: str = "*",
    time_budget: float = DEFAULT_TIME_BUDGET,
) -> ThreadingHTTPServer:
    host, _, port = bind.rpartition(":")
    if not host:
        raise ValueError(f"bind address must be host:port, got {bind!r}")
    handler = make_handler(cors_origin, time_budget)
    return ThreadingHTTPServer((host, int(port)), handler)


def serve_api(
    bind: str = "127.0.0.1:8750",
    cors_origin: str = "*",
    time_budget: float = DEFAULT_TIME_BUDGET,
) -> None:
    """Start the API and serve until interrupted."""
    server = make_server(bind, cors_origin, time_budget)
    host, port = server.server_address[:2]
    import sys

    print(f"swdpwr API listening on http://{host}:{port}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:  # pragma: no cover
        pass
    finally:
        server.server_close()
