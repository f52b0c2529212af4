"""Command-line client for the gradleak service.

Thin by design: every subcommand builds a request, sends it to the FastAPI
app (in-process by default, or to a remote --server URL), and renders the
response.  Exit codes: 0 on success/pass, 2 when a verify or sweep verdict
is "fail", 1 on any error (bad config, infeasible geometry, HTTP failure).
"""
from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

from ._version import __version__
from .jsonutil import render_json

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERDICT_FAIL = 2


class _InProcessClient:
    """Synchronous facade over the ASGI app for in-process requests.

    httpx's ASGITransport only speaks async, so each request spins up a
    short-lived event loop; a CLI invocation issues at most two requests,
    so the overhead is negligible.
    """

    def __init__(self):
        from .service.app import app

        self._app = app

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return None

    def _request(self, method: str, path: str, **kwargs) -> httpx.Response:
        async def go() -> httpx.Response:
            transport = httpx.ASGITransport(app=self._app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://gradleak.local", timeout=None
            ) as client:
                return await client.request(method, path, **kwargs)

        return asyncio.run(go())

    def get(self, path: str) -> httpx.Response:
        return self._request("GET", path)

    def post(self, path: str, json=None) -> httpx.Response:
        return self._request("POST", path, json=json)


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    return _InProcessClient()


def _post(client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise RuntimeError(f"{path} failed with HTTP {response.status_code}: {detail}")
    return response.json()


def _load_json(path: str, what: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except OSError as exc:
        raise RuntimeError(f"cannot read {what} file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise RuntimeError(f"{what} file {path!r} is not valid JSON: {exc}") from exc


def _load_config(args) -> dict:
    config = _load_json(args.config, "config")
    if not isinstance(config, dict):
        raise RuntimeError(f"config file {args.config!r} must hold a JSON object")
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    if getattr(args, "tolerance", None) is not None:
        tolerances = dict(config.get("tolerances") or {})
        tolerances["success_rtol"] = args.tolerance
        config["tolerances"] = tolerances
    return config


def _write_or_print(text: str, out: str | None, filename: str):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out) / filename
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}")


def _cmd_simulate(args) -> int:
    config = _load_config(args)
    with _client(args.server) as client:
        body = _post(client, "/simulate", {"config": config, "expose_steps": args.expose_steps})
    if args.out is None:
        sys.stdout.write(render_json(body["summary"]))
        return EXIT_OK
    base = Path(args.out)
    for rel, content in sorted(body["files"].items()):
        path = base / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content)
    print(f"wrote {len(body['files'])} files under {base}")
    return EXIT_OK


def _cmd_reconstruct(args) -> int:
    measurements = _load_json(args.measurements, "measurements")
    if not isinstance(measurements, dict) or "x" not in measurements or "y" not in measurements:
        raise RuntimeError(f"measurements file {args.measurements!r} must hold a JSON object with keys 'x' and 'y'")
    payload = {"x": measurements["x"], "y": measurements["y"], "mode": args.mode}
    if args.values:
        payload["values"] = args.values
    if args.delta is not None:
        payload["delta"] = args.delta
    if args.constraints is not None:
        constraints = _load_json(args.constraints, "constraints")
        if not isinstance(constraints, dict) or "C" not in constraints or "d" not in constraints:
            raise RuntimeError(f"constraints file {args.constraints!r} must hold a JSON object with keys 'C' and 'd'")
        payload["C"] = constraints["C"]
        payload["d"] = constraints["d"]
    if args.lambda_known is not None:
        payload["lambda_known"] = args.lambda_known
    if args.count is not None:
        payload["count"] = args.count
    if args.tolerance is not None:
        payload["tol_factor"] = args.tolerance
    with _client(args.server) as client:
        body = _post(client, "/reconstruct", payload)
    _write_or_print(render_json(body), args.out, "reconstruction.json")
    return EXIT_OK


def _cmd_verify(args) -> int:
    config = _load_config(args)
    with _client(args.server) as client:
        body = _post(client, "/verify", {"theorem": args.theorem, "config": config})
    _write_or_print(body["report_json"], args.out, f"verify_{args.theorem.replace('-', '_')}.json")
    print(f"{args.theorem}: verdict {body['verdict']} ({body['wall_clock_seconds']:.2f}s)", file=sys.stderr)
    return EXIT_OK if body["verdict"] == "pass" else EXIT_VERDICT_FAIL


def _cmd_sweep(args) -> int:
    config = _load_config(args)
    with _client(args.server) as client:
        body = _post(client, "/sweep", {"config": config})
    if args.out is None:
        sys.stdout.write(body["csv"])
    else:
        base = Path(args.out)
        base.mkdir(parents=True, exist_ok=True)
        (base / "sweep.csv").write_text(body["csv"])
        (base / "sweep.json").write_text(render_json(body["report"]))
        print(f"wrote {base / 'sweep.csv'} and {base / 'sweep.json'}")
    print(f"sweep: verdict {body['verdict']} ({body['wall_clock_seconds']:.2f}s)", file=sys.stderr)
    return EXIT_OK if body["verdict"] == "pass" else EXIT_VERDICT_FAIL


def _cmd_schema(args) -> int:
    with _client(args.server) as client:
        response = client.get("/schema/config")
        if response.status_code != 200:
            raise RuntimeError(f"/schema/config failed with HTTP {response.status_code}")
        _write_or_print(render_json(response.json()), args.out, "experiment_config.schema.json")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradleak",
        description="Simulate gradient trajectories on quadratic programs and test what an eavesdropper can recover.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config: bool):
        if needs_config:
            p.add_argument("--config", required=True, help="experiment config JSON file")
            p.add_argument("--seed", type=int, default=None, help="override the config seed")
            p.add_argument(
                "--tolerance", type=float, default=None, help="override the success tolerance (relative error)"
            )
        p.add_argument("--out", default=None, help="output directory (default: print to stdout)")
        p.add_argument("--server", default=None, help="remote service URL (default: run in-process)")

    p_sim = sub.add_parser("simulate", help="run seeded trajectories and export trace/measurement artifacts")
    add_common(p_sim, needs_config=True)
    p_sim.add_argument("--expose-steps", action="store_true", help="include realized step diagonals in sidecars")
    p_sim.set_defaults(func=_cmd_simulate)

    p_rec = sub.add_parser("reconstruct", help="run an estimator on a measurement JSON file")
    p_rec.add_argument("--measurements", required=True, help="measurement JSON file with keys x, y")
    p_rec.add_argument(
        "--mode",
        required=True,
        choices=["constant", "diminishing", "finite", "finite_enum", "finite_poly", "constrained", "agent_dependent"],
        help="estimator route",
    )
    p_rec.add_argument("--values", type=float, nargs="+", default=None, help="admissible step values")
    p_rec.add_argument("--delta", type=float, default=None, help="diminishing exponent")
    p_rec.add_argument("--constraints", default=None, help="constraint JSON file with keys C, d")
    p_rec.add_argument("--lambda-known", type=float, default=None, help="barrier weight, if known")
    p_rec.add_argument("--count", type=int, default=None, help="use only the first COUNT measurement pairs")
    p_rec.add_argument("--tolerance", type=float, default=None, help="rank tolerance factor override")
    add_common(p_rec, needs_config=False)
    p_rec.set_defaults(func=_cmd_reconstruct)

    p_ver = sub.add_parser("verify", help="run the Monte Carlo suite for one claim")
    p_ver.add_argument(
        "theorem",
        choices=["T1", "T2", "T3", "T4", "T5", "A-convergence", "L1", "L2", "L4"],
        help="claim identifier",
    )
    add_common(p_ver, needs_config=True)
    p_ver.set_defaults(func=_cmd_verify)

    p_sweep = sub.add_parser("sweep", help="success rate vs. measurement count as CSV")
    add_common(p_sweep, needs_config=True)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_schema = sub.add_parser("schema", help="print the experiment config JSON schema")
    add_common(p_schema, needs_config=False)
    p_schema.set_defaults(func=_cmd_schema)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RuntimeError, httpx.HTTPError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
