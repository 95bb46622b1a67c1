"""Command-line client: verify, table, sample, scan, check-fkg, check-domination, serve.

Every run is a thin client of the HTTP service. By default the app is mounted
in process; --server points the same commands at a remote instance. Files are
read and CSV reports are written on the client side, so remote services never
see local paths. Exit codes: 0 success, 1 a checked identity or inequality
failed, 2 configuration or parse error, 3 enumeration cap exceeded.

Set CLUSTERFIELD_THREADS to fan independent verification requests out over a
thread pool; results are identical for every thread count.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ClusterFieldError, ConfigError
from .fields import dump_field, load_field
from .graph import dump_graph, load_graph

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_INTERNAL = 4

REPORT_VERSION = "v1"


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# --- service client ------------------------------------------------------------


class ServiceClient:
    """POST/GET against a remote base URL or the in-process app."""

    def __init__(self, server=None):
        self.server = server
        self._app = None
        if server is None:
            from .service import app

            self._app = app

    def request(self, method: str, path: str, payload=None) -> dict:
        import httpx

        if self.server is not None:
            with httpx.Client(base_url=self.server, timeout=None) as client:
                resp = client.request(method, path, json=payload)
        else:
            async def _run():
                transport = httpx.ASGITransport(app=self._app)
                async with httpx.AsyncClient(
                        transport=transport, base_url="http://service",
                        timeout=None) as client:
                    return await client.request(method, path, json=payload)

            resp = asyncio.run(_run())
        body = resp.json()
        if resp.status_code == 200:
            return body
        detail = body.get("detail", body) if isinstance(body, dict) else body
        if isinstance(detail, dict) and "code" in detail:
            code = EXIT_CAP if detail["code"] == "cap_exceeded" else EXIT_CONFIG
            raise _Exit(code, f"{detail['code']}: {detail['message']}")
        if resp.status_code == 422:
            raise _Exit(EXIT_CONFIG, f"invalid request: {detail}")
        raise _Exit(EXIT_INTERNAL, f"service error {resp.status_code}: {detail}")

    def post(self, path: str, payload: dict) -> dict:
        return self.request("POST", path, payload)

    def get(self, path: str) -> dict:
        return self.request("GET", path)


# --- payload construction from flags and files ------------------------------------


def _load_json(path: str, what: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise _Exit(EXIT_CONFIG, f"cannot read {what} {path!r}: {exc}")
    except json.JSONDecodeError as exc:
        raise _Exit(EXIT_CONFIG,
                    f"malformed {what} {path!r}: {exc.msg} "
                    f"(line {exc.lineno} column {exc.colno})")


def _csv_ints(text) -> list:
    if isinstance(text, (list, tuple)):  # config files may give real lists
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v != ""]
    except ValueError:
        raise _Exit(EXIT_CONFIG, f"expected comma-separated integers, got {text!r}")


def _csv_floats(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v != ""]
    except ValueError:
        raise _Exit(EXIT_CONFIG, f"expected comma-separated numbers, got {text!r}")


def parse_bc(text: str) -> dict:
    if text == "free":
        return {"kind": "free"}
    if text == "wired":
        return {"kind": "wired", "m": 1}
    if text.startswith("wired:"):
        try:
            return {"kind": "wired", "m": int(text.split(":", 1)[1])}
        except ValueError:
            raise _Exit(EXIT_CONFIG, f"bad wired color in {text!r}")
    if text.startswith("general:"):
        doc = _load_json(text.split(":", 1)[1], "boundary file")
        try:
            return {
                "kind": "general",
                "outside_edges": [[int(a), int(b)] for a, b in doc["edges"]],
                "outside_bits": int(doc.get("bits", 0)),
                "scope": doc.get("scope"),
                "window": doc.get("window", "all"),
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise _Exit(EXIT_CONFIG, f"malformed boundary file: {exc}")
    raise _Exit(EXIT_CONFIG,
                f"bad boundary rule {text!r}; use free, wired:<m>, or general:<file>")


def add_model_flags(sp: argparse.ArgumentParser):
    g = sp.add_argument_group("model")
    g.add_argument("--corpus", help="built-in region name")
    g.add_argument("--box", help="lattice box sides, e.g. 3,3")
    g.add_argument("--origin", help="box origin coordinates, e.g. -1,-1")
    g.add_argument("--graph", help="JSON graph file (vertices, edges); free region")
    g.add_argument("--field", help="JSON field file: site id -> list of q values")
    g.add_argument("--field-uniform", type=float, default=None,
                   help="uniform two-color field value")
    g.add_argument("--field-power-law", default=None,
                   help="hstar,alpha for a centered power-law field")
    g.add_argument("--norm", default="euclidean", choices=["euclidean", "sup"])
    g.add_argument("--q", type=int, default=2, help="number of colors")
    g.add_argument("--beta", type=float, default=1.0)
    g.add_argument("--j", type=float, default=1.0, help="uniform coupling")
    g.add_argument("--bc", default="free",
                   help="free | wired:<m> | general:<file>")


def graph_payload(args) -> dict:
    chosen = [v for v in (args.corpus, args.box, args.graph) if v]
    if len(chosen) > 1:
        raise _Exit(EXIT_CONFIG, "give only one of --corpus, --box, --graph")
    if args.corpus:
        return {"kind": "corpus", "name": args.corpus}
    if args.box:
        sides = _csv_ints(args.box)
        payload = {"kind": "box", "dimension": len(sides), "sides": sides}
        if args.origin:
            origin = _csv_ints(args.origin)
            if len(origin) != len(sides):
                raise _Exit(EXIT_CONFIG, "origin dimension mismatch")
            payload["origin"] = origin
        return payload
    if args.graph:
        try:
            doc = dump_graph(load_graph(args.graph))
        except ConfigError as exc:
            raise _Exit(EXIT_CONFIG, str(exc))
        return {"kind": "explicit", "vertices": doc["vertices"],
                "edges": doc["edges"]}
    raise _Exit(EXIT_CONFIG, "specify the graph: --corpus, --box, or --graph")


def field_payload(args) -> dict:
    chosen = [v for v in (args.field, args.field_uniform, args.field_power_law)
              if v is not None]
    if len(chosen) > 1:
        raise _Exit(EXIT_CONFIG, "give at most one field generator")
    if args.field:
        try:
            spec = load_field(args.field, q=args.q)
        except ConfigError as exc:
            raise _Exit(EXIT_CONFIG, str(exc))
        return {"kind": "explicit", "q": spec.q, "h": dump_field(spec),
                "color_weights": list(spec.color_weights)}
    if args.field_uniform is not None:
        return {"kind": "uniform", "q": 2, "value": args.field_uniform}
    if args.field_power_law is not None:
        parts = _csv_floats(args.field_power_law)
        if len(parts) != 2:
            raise _Exit(EXIT_CONFIG, "--field-power-law takes hstar,alpha")
        return {"kind": "power-law", "q": 2, "hstar": parts[0],
                "alpha": parts[1], "norm": args.norm}
    return {"kind": "zero", "q": args.q}


def model_payload(args) -> dict:
    return {
        "graph": graph_payload(args),
        "field": field_payload(args),
        "beta": args.beta,
        "j": args.j,
    }


def read_table_csv(path: str) -> list:
    """Weight vector from a bitmask,weight,probability CSV."""
    weights = {}
    try:
        with open(path) as fh:
            header = fh.readline().strip()
            if header.split(",")[:2] != ["bitmask", "weight"]:
                raise _Exit(EXIT_CONFIG,
                            f"{path!r} line 1: expected bitmask,weight[,...] header")
            for ln, line in enumerate(fh, start=2):
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.strip().split(",")
                try:
                    weights[int(parts[0])] = float(parts[1])
                except (IndexError, ValueError):
                    raise _Exit(EXIT_CONFIG, f"{path!r} line {ln}: bad row {line!r}")
    except OSError as exc:
        raise _Exit(EXIT_CONFIG, f"cannot read table {path!r}: {exc}")
    n = len(weights)
    if n == 0 or n & (n - 1) or set(weights) != set(range(n)):
        raise _Exit(EXIT_CONFIG,
                    f"{path!r}: need one row per bitmask 0..2^k-1")
    return [weights[i] for i in range(n)]


def source_payload(args, side: str) -> dict:
    """TableSource for one side of a domination check."""
    table_path = getattr(args, f"{side}_table")
    doc_path = getattr(args, side)
    if (table_path is None) == (doc_path is None):
        raise _Exit(EXIT_CONFIG,
                    f"give exactly one of --{side} or --{side}-table")
    if table_path:
        return {"weights": read_table_csv(table_path)}
    doc = _load_json(doc_path, "model document")
    if "model" not in doc:
        raise _Exit(EXIT_CONFIG,
                    f"{doc_path!r} must hold a 'model' (and optional 'bc') object")
    return {"model": doc["model"], "bc": doc.get("bc", {"kind": "free"})}


# --- output writers ------------------------------------------------------------


def _open_out(path):
    return open(path, "w") if path and path != "-" else sys.stdout


def _emit(path, text: str):
    fh = _open_out(path)
    try:
        fh.write(text)
    finally:
        if fh is not sys.stdout:
            fh.close()


# --- subcommands ------------------------------------------------------------


def cmd_verify(args, client: ServiceClient) -> int:
    regions = args.regions.split(",") if args.regions else \
        [e["name"] for e in client.get("/corpus")["regions"]]
    checks = args.checks.split(",") if args.checks else None

    def one(idx_region):
        idx, region = idx_region
        seed = int(np.random.SeedSequence(
            entropy=args.seed, spawn_key=(idx,)).generate_state(1)[0])
        payload = {"regions": [region], "draws": args.draws, "seed": seed,
                   "tolerance": args.tolerance,
                   "max_wired_edges": args.max_wired_edges}
        if checks:
            payload["checks"] = checks
        return client.post("/verify", payload)

    threads = int(os.environ.get("CLUSTERFIELD_THREADS", "1"))
    jobs = list(enumerate(regions))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            responses = list(pool.map(one, jobs))
    else:
        responses = [one(job) for job in jobs]

    lines = [f"# clusterfield verify report {REPORT_VERSION}\n"]
    failures = 0
    max_err = 0.0
    n = 0
    for resp in responses:
        for r in resp["records"]:
            n += 1
            max_err = max(max_err, r["error"])
            failures += 0 if r["passed"] else 1
            lines.append(
                f"identity={r['check']} graph={r['region']} bc={r['bc']} "
                f"q={r['q']} draw={r['draw']} discrepancy={r['error']!r} "
                f"passed={int(r['passed'])}\n")
    lines.append(f"# summary records={n} failures={failures} "
                 f"max_discrepancy={max_err!r}\n")
    _emit(args.out, "".join(lines))
    return EXIT_FAILED_CHECK if failures else EXIT_OK


def cmd_table(args, client: ServiceClient) -> int:
    payload = {"model": model_payload(args), "bc": parse_bc(args.bc),
               "convention": args.convention}
    resp = client.post("/table", payload)
    lines = ["bitmask,weight,probability\n"]
    for mask, (w, p) in enumerate(zip(resp["weights"], resp["probabilities"])):
        lines.append(f"{mask},{float(w)!r},{float(p)!r}\n")
    _emit(args.out, "".join(lines))
    return EXIT_OK


def _require(args, *names):
    """Presence check after the config merge; required= would fire too early."""
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise _Exit(EXIT_CONFIG, f"missing required option(s): {flags}")


def cmd_sample(args, client: ServiceClient) -> int:
    _require(args, "observable", "sweeps")
    payload = {
        "model": model_payload(args), "bc": parse_bc(args.bc),
        "observable": args.observable, "x": args.x, "y": args.y,
        "sweeps": args.sweeps, "burn_in": args.burn_in, "seed": args.seed,
        "chain": args.chain, "dynamics": args.dynamics,
        "n_batches": args.n_batches, "include_samples": True,
    }
    resp = client.post("/sample", payload)
    lines = ["sweep,value\n"]
    for t, v in enumerate(resp["samples"]):
        lines.append(f"{resp['burn_in'] + t},{float(v)!r}\n")
    lines.append(
        f"# observable={resp['observable']} mean={float(resp['mean'])!r} "
        f"stderr={float(resp['stderr'])!r} n_batches={resp['n_batches']} "
        f"sweeps={resp['sweeps']} burn_in={resp['burn_in']} "
        f"seed={resp['seed']}\n")
    _emit(args.out, "".join(lines))
    return EXIT_OK


def cmd_scan(args, client: ServiceClient) -> int:
    _require(args, "alpha_grid", "beta_grid", "sides", "hstar")
    payload = {
        "alpha_grid": _csv_floats(args.alpha_grid),
        "beta_grid": _csv_floats(args.beta_grid),
        "box_sides": _csv_ints(args.sides),
        "hstar": args.hstar, "q": args.q, "j": args.j,
        "dimension": args.dimension, "norm": args.norm,
        "target_side": args.target_side,
        "bcs": args.bcs.split(","), "sweeps": args.sweeps,
        "burn_in": args.burn_in, "seed": args.seed,
        "exact_edge_limit": args.exact_edge_limit,
        "n_batches": args.n_batches,
        "include_trend": bool(args.trend),
    }
    resp = client.post("/scan", payload)
    lines = ["alpha,beta,side,bc,mode,estimate,stderr,sweeps,seed\n"]
    for r in resp["records"]:
        lines.append(
            f"{float(r['alpha'])!r},{float(r['beta'])!r},{r['side']},"
            f"{r['bc']},{r['mode']},{float(r['estimate'])!r},"
            f"{float(r['stderr'])!r},{r['sweeps']},{r['seed']}\n")
    _emit(args.out, "".join(lines))
    if args.trend and resp.get("trend") is not None:
        sys.stdout.write(json.dumps(resp["trend"], indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_check_fkg(args, client: ServiceClient) -> int:
    if args.table:
        source = {"weights": read_table_csv(args.table)}
    else:
        source = {"model": model_payload(args), "bc": parse_bc(args.bc)}
    resp = client.post("/check/fkg", {
        "source": source, "tolerance": args.tolerance, "method": args.method})
    hyp = resp.get("hypothesis_holds")
    _emit(args.out,
          f"# clusterfield fkg report {REPORT_VERSION}\n"
          f"passed={int(resp['passed'])} "
          f"worst_margin={float(resp['worst_margin'])!r} "
          f"worst_pair={resp['worst_pair'][0]}:{resp['worst_pair'][1]} "
          f"n_checked={resp['n_checked']} method={resp['method']}"
          + (f" hypothesis_holds={int(hyp)}" if hyp is not None else "")
          + "\n")
    return EXIT_OK if resp["passed"] else EXIT_FAILED_CHECK


def cmd_check_domination(args, client: ServiceClient) -> int:
    resp = client.post("/check/domination", {
        "lo": source_payload(args, "lo"), "hi": source_payload(args, "hi"),
        "tolerance": args.tolerance})
    parts = [f"# clusterfield domination report {REPORT_VERSION}\n"]
    dom = resp["dominates"]
    parts.append(
        f"dominates={'unknown' if dom is None else int(dom)} "
        f"holley_passed={int(resp['holley_passed'])} "
        f"holley_worst_margin={float(resp['holley_worst_margin'])!r} "
        f"n_edges={resp['n_edges']}")
    if resp.get("flow_value") is not None:
        parts.append(f" flow_value={float(resp['flow_value'])!r}")
    parts.append("\n")
    if resp.get("witness_up_set"):
        parts.append("witness_up_set=" +
                     ",".join(str(s) for s in resp["witness_up_set"]) + "\n")
    for note in resp.get("notes", []):
        parts.append(f"# note: {note}\n")
    _emit(args.out, "".join(parts))
    return EXIT_OK if dom else EXIT_FAILED_CHECK


def cmd_serve(args, client=None) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


# --- parser ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="clusterfield",
        description="Cluster measures with fields: verification, sampling, "
                    "scans, and inequality checks over an HTTP service.")
    p.add_argument("--server", default=None,
                   help="base URL of a running service; default runs in process")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None,
                        help="JSON document of defaults for this command")
        sp.add_argument("--out", default="-",
                        help="output path, - for stdout")

    sp = sub.add_parser("verify", help="exact-identity suites on the corpus")
    common(sp)
    sp.add_argument("--regions", default=None, help="comma-separated names")
    sp.add_argument("--draws", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tolerance", type=float, default=1e-10)
    sp.add_argument("--checks", default=None,
                    help="comma-separated subset: identities,marginals,"
                         "correlation,single_spin,zero_field,magnetization")
    sp.add_argument("--max-wired-edges", type=int, default=12)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("table", help="export an exact edge weight table")
    common(sp)
    add_model_flags(sp)
    sp.add_argument("--convention", default="r", choices=["r", "p"])
    sp.set_defaults(fn=cmd_table)

    sp = sub.add_parser("sample", help="cluster Monte Carlo estimates")
    common(sp)
    add_model_flags(sp)
    sp.add_argument("--observable", default=None,
                    help="magnetization | two_point(x,y) | connectivity(x,y) "
                         "| percolation(x)")
    sp.add_argument("--x", type=int, default=None)
    sp.add_argument("--y", type=int, default=None)
    sp.add_argument("--sweeps", type=int, default=None)
    sp.add_argument("--burn-in", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--chain", type=int, default=0)
    sp.add_argument("--dynamics", default="es", choices=["es", "glauber"])
    sp.add_argument("--n-batches", type=int, default=32)
    sp.set_defaults(fn=cmd_sample)

    sp = sub.add_parser("scan", help="free-versus-wired reach scans")
    common(sp)
    sp.add_argument("--alpha-grid", "--alpha", dest="alpha_grid", default=None,
                    help="comma-separated decay exponents")
    sp.add_argument("--beta-grid", default=None)
    sp.add_argument("--sides", default=None, help="odd box sides, increasing")
    sp.add_argument("--hstar", type=float, default=None)
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--j", type=float, default=1.0)
    sp.add_argument("--dimension", type=int, default=2)
    sp.add_argument("--norm", default="euclidean", choices=["euclidean", "sup"])
    sp.add_argument("--target-side", type=int, default=None)
    sp.add_argument("--bcs", default="free,wired")
    sp.add_argument("--sweeps", type=int, default=20000)
    sp.add_argument("--burn-in", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--exact-edge-limit", type=int, default=14)
    sp.add_argument("--n-batches", type=int, default=32)
    sp.add_argument("--trend", action="store_true",
                    help="also print the gap trend summary as JSON")
    sp.set_defaults(fn=cmd_scan)

    sp = sub.add_parser("check-fkg", help="lattice condition on a weight table")
    common(sp)
    add_model_flags(sp)
    sp.add_argument("--table", default=None,
                    help="raw weight-table CSV instead of a model")
    sp.add_argument("--tolerance", type=float, default=1e-12)
    sp.add_argument("--method", default="auto",
                    choices=["auto", "full", "reduction"])
    sp.set_defaults(fn=cmd_check_fkg)

    sp = sub.add_parser("check-domination",
                        help="stochastic domination between two tables")
    common(sp)
    sp.add_argument("--lo", default=None,
                    help="JSON document with model (and bc) for the lower table")
    sp.add_argument("--hi", default=None,
                    help="JSON document with model (and bc) for the upper table")
    sp.add_argument("--lo-table", default=None, help="raw weight-table CSV")
    sp.add_argument("--hi-table", default=None, help="raw weight-table CSV")
    sp.add_argument("--tolerance", type=float, default=1e-12)
    sp.set_defaults(fn=cmd_check_domination)

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.set_defaults(fn=cmd_serve)

    # configs set defaults on the owning subparser: the main parser's
    # defaults never survive the subparser's namespace pass
    p._command_parsers = {name: parser for name, parser in sub.choices.items()}
    return p


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        doc = _load_json(args.config, "config file")
        if not isinstance(doc, dict):
            raise _Exit(EXIT_CONFIG, "config file must be a JSON object")
        names = {a for a in vars(args)}
        unknown = [k for k in doc if k not in names]
        if unknown:
            raise _Exit(EXIT_CONFIG, f"unknown config keys {unknown}")
        parser._command_parsers[args.command].set_defaults(**doc)
        args = parser.parse_args(argv)  # explicit flags still win
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.fn is cmd_serve:
            return cmd_serve(args)
        client = ServiceClient(args.server)
        return args.fn(args, client)
    except _Exit as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except ClusterFieldError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
