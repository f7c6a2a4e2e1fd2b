"""Report handlers and the HTTP service wrapping them.

Every command is a pure function of the input document (plus explicit
options), returning a response model with a fixed field order; the CLI
calls these handlers in-process and the FastAPI app exposes them over
HTTP.  Non-finite numbers never appear in payloads: infinite exponents
are the string "infinity" and unknown quantities the string "unknown".
"""

from __future__ import annotations

import io
import math
import os
from typing import Optional, Union

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import dimension, holder, renorm_markov
from .errors import InvalidInput, NumericalFailure, PreconditionError
from .specfile import SystemBundle, SystemSpecFile, build_bundle

Numeric = Union[float, str]


def _flag(x: Optional[float]) -> Numeric:
    if x is None:
        return "unknown"
    if math.isinf(x):
        return "infinity"
    return float(x)


class _Response(BaseModel):
    # "class" is a reserved word: keep the python attribute `klass`, emit "class"
    model_config = ConfigDict(populate_by_name=True)


class ClassifyResponse(_Response):
    genus: int
    kappa: int
    rho_T: float
    hyperbolic: bool
    klass: Optional[str] = Field(serialization_alias="class")
    omega_components: Optional[dict[str, list[float]]]
    alpha_omega: Numeric


class DimsResponse(_Response):
    klass: str = Field(serialization_alias="class")
    rho_T: float
    rho_c: Numeric
    G: Numeric
    H: Numeric
    dim_invariant: float
    dim_conformal: Numeric
    kl_G_residual: Numeric
    kl_H_residual: Numeric
    theta_c: Optional[list[float]]
    zeta: Numeric
    xi: Numeric
    inequalities: Optional[dict[str, bool]]


class HolderResponse(_Response):
    klass: str = Field(serialization_alias="class")
    rho_T: float
    zeta: Numeric
    xi: Numeric
    h_exponent: Numeric
    hinv_exponent: Numeric


class SweepResponse(BaseModel):
    csv: str
    sidecar: dict


class SimulateRequest(BaseModel):
    system: SystemSpecFile
    side: str = "invariant"
    length: int = 1_000_000
    seed: Optional[int] = None


class SimulateResponse(BaseModel):
    side: str
    seed: int
    length: int
    estimate: float
    stderr: float
    closed_form: float
    z_score: float


def handle_classify(bundle: SystemBundle) -> ClassifyResponse:
    cert = bundle.certificate
    if bundle.decomposition is None:
        return ClassifyResponse(genus=cert.g, kappa=cert.kappa,
                                rho_T=bundle.system.rho_T, hyperbolic=False,
                                klass=None, omega_components=None, alpha_omega="unknown")
    dec = bundle.decomposition
    comps = {
        "omega": [float(x) for x in dec.omega],
        "unstable": [float(x) for x in dec.omega_u],
        "central": [float(x) for x in dec.omega_c],
        "stable": [float(x) for x in dec.omega_s],
    }
    return ClassifyResponse(genus=cert.g, kappa=cert.kappa, rho_T=bundle.system.rho_T,
                            hyperbolic=True, klass=dec.klass, omega_components=comps,
                            alpha_omega=_flag(dec.alpha_omega))


def handle_dims(bundle: SystemBundle) -> DimsResponse:
    dec = bundle.require_hyperbolic()
    report = dimension.dimension_report(bundle.system, bundle.spectrum, dec)
    zeta = xi = None
    inequalities = None
    if dec.klass == "central_stable":
        zeta, xi = holder.zeta_xi(bundle.system, dec)
        inequalities = {
            "xi_lt_H": bool(xi < report.H),
            "H_lt_rho_T": bool(report.H < report.rho_T),
            "rho_T_lt_G": bool(report.rho_T < report.G),
            "G_lt_zeta": bool(report.G < zeta),
        }
    return DimsResponse(
        klass=report.klass, rho_T=report.rho_T, rho_c=_flag(report.rho_c),
        G=_flag(report.G), H=_flag(report.H),
        dim_invariant=report.dim_invariant, dim_conformal=_flag(report.dim_conformal),
        kl_G_residual=_flag(report.kl_G_residual), kl_H_residual=_flag(report.kl_H_residual),
        theta_c=None if report.theta_c is None else [float(x) for x in report.theta_c],
        zeta=_flag(zeta), xi=_flag(xi), inequalities=inequalities)


def handle_holder(bundle: SystemBundle) -> HolderResponse:
    dec = bundle.require_hyperbolic()
    rep = holder.holder_exponents(bundle.system, bundle.certificate, dec)
    return HolderResponse(klass=rep.klass, rho_T=bundle.system.rho_T,
                          zeta=_flag(rep.zeta), xi=_flag(rep.xi),
                          h_exponent=_flag(rep.h_exponent),
                          hinv_exponent=_flag(rep.hinv_exponent))


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("AIET_THREADS", "1")))
    except ValueError:
        return 1


def handle_sweep(bundle: SystemBundle) -> SweepResponse:
    dec = bundle.require_hyperbolic()
    grid = bundle.file.t_grid
    if grid is None:
        raise InvalidInput("sweep requires a t_grid in the input document")
    sweep = dimension.t_sweep(bundle.system, dec.omega, grid.min, grid.max, grid.steps,
                              workers=_workers())
    out = io.StringIO()
    out.write("t,rho,rho_prime,G,H,dim_mu,dim_nu,relation_residual\n")
    for row in sweep.rows:
        residual = "unknown" if row.relation_residual is None else f"{row.relation_residual:.12g}"
        out.write(f"{row.t:.12g},{row.rho:.12g},{row.rho_prime:.12g},{row.G:.12g},"
                  f"{row.H:.12g},{row.dim_mu:.12g},{row.dim_nu:.12g},{residual}\n")
    sidecar = {
        "dim_mu_monotone": sweep.dim_mu_monotone,
        "dim_nu_monotone": sweep.dim_nu_monotone,
        "bounds_t_ge_1": list(sweep.bounds),
    }
    return SweepResponse(csv=out.getvalue(), sidecar=sidecar)


def handle_simulate(bundle: SystemBundle, side: str, length: int,
                    seed: Optional[int]) -> SimulateResponse:
    dec = bundle.require_hyperbolic()
    if side not in ("invariant", "conformal"):
        raise InvalidInput(f"side must be 'invariant' or 'conformal', got {side!r}")
    if seed is None:
        seed = bundle.file.seed if bundle.file.seed is not None else 0
    estimate, stderr = renorm_markov.birkhoff_information(
        bundle.system, dec, side, seed, length)
    closed = (dimension.big_G if side == "invariant" else dimension.big_H)(bundle.system, dec)
    z = (estimate - closed) / stderr if stderr > 0 else 0.0
    return SimulateResponse(side=side, seed=seed, length=length, estimate=estimate,
                            stderr=stderr, closed_form=closed, z_score=z)


app = FastAPI(title="aiet", description="dimension and regularity reports for "
              "affine interval exchange maps of periodic type")


@app.exception_handler(InvalidInput)
async def _invalid(request: Request, exc: InvalidInput):
    return JSONResponse(status_code=400, content={"error": str(exc), "kind": "invalid_input"})


@app.exception_handler(PreconditionError)
async def _precondition(request: Request, exc: PreconditionError):
    return JSONResponse(status_code=409, content={"error": str(exc), "kind": "precondition"})


@app.exception_handler(NumericalFailure)
async def _numerical(request: Request, exc: NumericalFailure):
    return JSONResponse(status_code=500, content={"error": str(exc), "kind": "numerical"})


@app.post("/classify", response_model=ClassifyResponse)
def classify_endpoint(spec: SystemSpecFile) -> ClassifyResponse:
    return handle_classify(build_bundle(spec))


@app.post("/dims", response_model=DimsResponse)
def dims_endpoint(spec: SystemSpecFile) -> DimsResponse:
    return handle_dims(build_bundle(spec))


@app.post("/holder", response_model=HolderResponse)
def holder_endpoint(spec: SystemSpecFile) -> HolderResponse:
    return handle_holder(build_bundle(spec))


@app.post("/sweep", response_model=SweepResponse)
def sweep_endpoint(spec: SystemSpecFile) -> SweepResponse:
    return handle_sweep(build_bundle(spec))


@app.post("/simulate", response_model=SimulateResponse)
def simulate_endpoint(req: SimulateRequest) -> SimulateResponse:
    return handle_simulate(build_bundle(req.system), req.side, req.length, req.seed)
