"""HTTP service exposing verification, sampling, scans, and inequality checks.

Endpoints wrap the library one-to-one; all model construction goes through the
schemas so clients stay structural. Library errors map to stable error codes:
bad configurations to 400/"config", domain mismatches to 400/"domain", and
enumeration-cap overruns to 413/"cap_exceeded".
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .corpus import corpus
from .errors import CapExceededError, ClusterFieldError, ConfigError, DomainMismatchError
from .inequalities import (
    fkg_lattice_check,
    holley_check,
    positive_association_hypothesis,
    strassen_domination,
    FLOW_LIMIT,
)
from .randomcluster import exact_edge_measure
from .sampler import estimate
from .scan import ScanConfig, gap_trend, run_scan
from .coupling import run_verification_suite
from . import schemas as sc


def _error_payload(code: str, message: str) -> dict:
    return {"code": code, "message": message}


def create_app() -> FastAPI:
    app = FastAPI(title="clusterfield", version=__version__)

    @app.exception_handler(CapExceededError)
    async def _cap(request: Request, exc: CapExceededError):
        return JSONResponse(status_code=413,
                            content=_error_payload("cap_exceeded", str(exc)))

    @app.exception_handler(DomainMismatchError)
    async def _domain(request: Request, exc: DomainMismatchError):
        return JSONResponse(status_code=400,
                            content=_error_payload("domain", str(exc)))

    @app.exception_handler(ConfigError)
    async def _config(request: Request, exc: ConfigError):
        return JSONResponse(status_code=400,
                            content=_error_payload("config", str(exc)))

    @app.exception_handler(ClusterFieldError)
    async def _other(request: Request, exc: ClusterFieldError):
        return JSONResponse(status_code=400,
                            content=_error_payload("config", str(exc)))

    @app.get("/health", response_model=sc.HealthResponse)
    def health():
        return sc.HealthResponse(status="ok", version=__version__)

    @app.get("/corpus", response_model=sc.CorpusResponse)
    def corpus_listing():
        entries = []
        for name, region in sorted(corpus().items()):
            entries.append(sc.CorpusEntry(
                name=name,
                n_inner=len(region.inner),
                n_boundary=len(region.boundary),
                n_inner_bonds=len(region.inner_bonds),
                n_all_bonds=len(region.all_bonds),
            ))
        return sc.CorpusResponse(regions=entries)

    @app.post("/verify", response_model=sc.VerifyResponse)
    def verify(req: sc.VerifyRequest):
        table = corpus()
        if req.regions is None:
            regions = table
        else:
            unknown = [r for r in req.regions if r not in table]
            if unknown:
                raise ConfigError(f"unknown corpus regions {unknown}")
            regions = {r: table[r] for r in req.regions}
        kwargs = dict(draws=req.draws, seed=req.seed, tolerance=req.tolerance,
                      max_wired_edges=req.max_wired_edges)
        if req.checks:
            kwargs["checks"] = tuple(req.checks)
        records = run_verification_suite(regions, **kwargs)
        return sc.VerifyResponse(
            passed=all(r["passed"] for r in records),
            n_records=len(records),
            max_error=max((r["error"] for r in records), default=0.0),
            records=[sc.VerifyRecordModel(**r) for r in records],
        )

    @app.post("/sample", response_model=sc.SampleResponse)
    def sample(req: sc.SampleRequest):
        series = estimate(
            req.model.to_spec(), req.bc.to_bc(), req.observable,
            sweeps=req.sweeps, burn_in=req.burn_in, seed=req.seed,
            chain=req.chain, dynamics=req.dynamics, x=req.x, y=req.y,
            n_batches=req.n_batches)
        return sc.SampleResponse(
            observable=series.observable, mean=series.mean,
            stderr=series.stderr, n_batches=series.n_batches,
            batch_length=series.batch_length, sweeps=series.sweeps,
            burn_in=series.burn_in, seed=series.seed,
            samples=series.samples.tolist() if req.include_samples else None,
        )

    @app.post("/scan", response_model=sc.ScanResponse)
    def scan(req: sc.ScanRequest):
        config = ScanConfig(
            alpha_grid=tuple(req.alpha_grid), beta_grid=tuple(req.beta_grid),
            box_sides=tuple(req.box_sides), hstar=req.hstar, q=req.q,
            j=req.j, dimension=req.dimension, norm=req.norm,
            target_side=req.target_side, bcs=tuple(req.bcs),
            sweeps=req.sweeps, burn_in=req.burn_in, seed=req.seed,
            exact_edge_limit=req.exact_edge_limit, n_batches=req.n_batches)
        records = run_scan(config)
        trend = None
        if req.include_trend and len(set(config.box_sides)) >= 2:
            trend = gap_trend(records)
        return sc.ScanResponse(
            records=[sc.ScanRecordModel(**r.__dict__) for r in records],
            trend=trend)

    @app.post("/table", response_model=sc.TableResponse)
    def table(req: sc.TableRequest):
        wt = exact_edge_measure(req.model.to_spec(), req.bc.to_bc(),
                                req.convention)
        return sc.TableResponse(
            edges=[tuple(e) for e in wt.edges],
            weights=[float(v) for v in wt.weights],
            probabilities=[float(v) for v in wt.probabilities()],
            z=wt.z)

    def _table_weights(source: sc.TableSource):
        """(weights, spec, bc): spec/bc are None for raw weight vectors."""
        if source.weights is not None:
            w = np.asarray(source.weights, dtype=float)
            if w.ndim != 1 or len(w) < 1 or len(w) & (len(w) - 1):
                raise ConfigError("weights must have length a power of two")
            if np.any(w < 0) or not w.sum() > 0:
                raise ConfigError("weights must be nonnegative with positive sum")
            return w, None, None
        spec = source.model.to_spec()
        bc = source.bc.to_bc()
        return exact_edge_measure(spec, bc, "r"), spec, bc

    @app.post("/check/fkg", response_model=sc.FkgCheckResponse)
    def check_fkg(req: sc.FkgCheckRequest):
        table, spec, bc = _table_weights(req.source)
        report = fkg_lattice_check(table, tolerance=req.tolerance,
                                   method=req.method)
        hypothesis = None
        if spec is not None:
            summary = positive_association_hypothesis(spec, bc)
            hypothesis = bool(summary.positive_association_hypothesis)
        return sc.FkgCheckResponse(
            passed=report.passed, worst_margin=report.worst_margin,
            worst_pair=tuple(int(v) for v in report.worst_pair),
            n_checked=report.n_checked, method=report.method,
            hypothesis_holds=hypothesis)

    @app.post("/check/domination", response_model=sc.DominationCheckResponse)
    def check_domination(req: sc.DominationCheckRequest):
        lo, _, _ = _table_weights(req.lo)
        hi, _, _ = _table_weights(req.hi)
        lo_w = np.asarray(getattr(lo, "weights", lo), dtype=float)
        hi_w = np.asarray(getattr(hi, "weights", hi), dtype=float)
        if len(lo_w) != len(hi_w):
            raise ConfigError("both tables must live on the same edge cube")
        n_edges = int(len(lo_w)).bit_length() - 1
        notes = []
        holley = holley_check(lo_w, hi_w, tolerance=req.tolerance)
        dominates = None
        flow_value = None
        witness = None
        if n_edges <= FLOW_LIMIT:
            cert = strassen_domination(lo_w / lo_w.sum(), hi_w / hi_w.sum())
            dominates = cert.dominates
            flow_value = cert.flow_value
            if cert.witness_up_set is not None:
                witness = [int(s) for s in cert.witness_up_set]
        else:
            notes.append(f"flow check skipped beyond {FLOW_LIMIT} edges; "
                         "the ratio criterion is sufficient but not necessary")
            if holley.passed:
                dominates = True
        return sc.DominationCheckResponse(
            dominates=dominates, holley_passed=holley.passed,
            holley_worst_margin=holley.worst_margin, flow_value=flow_value,
            witness_up_set=witness, n_edges=n_edges, notes=notes)

    return app


app = create_app()
