"""HTTP service wrapping the dispersion-potential engine.

Every computation endpoint is a pure function of its request body and the
bundled database, so responses are deterministic and the app is safe to run
with any number of workers.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .. import __version__
from ..asymptote import coeff_set
from ..cpcore import EnvConfig, QuadratureSettings, u_total, u_zero_temperature
from ..database import (
    doctor,
    load_material,
    load_molecule,
    material_ids,
    molecule_ids,
)
from ..dielectric import eval_eps_imag, model_to_dict, static_eps
from ..errors import (
    DomainError,
    FullereneCPError,
    MatsubaraBudgetExceeded,
    NonConvergence,
    QuadratureFailure,
    UnknownId,
)
from ..fitkit import SpectrumTable, fit_oscillators, fit_semi_quantum
from ..molecule import alpha_ground, alpha_sym, molecule_to_dict, static_alpha
from . import schemas

app = FastAPI(
    title="fullerene-cp",
    description="Thermal molecule-surface dispersion potentials",
    version=__version__,
)


@app.exception_handler(UnknownId)
async def _unknown_id(request, exc):
    return JSONResponse(status_code=404, content={"detail": str(exc)})


@app.exception_handler(DomainError)
async def _domain_error(request, exc):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(FullereneCPError)
async def _numerical_error(request, exc):
    # numerical failures: quadrature, frequency-sum budget
    return JSONResponse(
        status_code=500,
        content={"detail": {"kind": "numerical", "message": str(exc)}},
    )


@app.get("/health", response_model=schemas.HealthResponse)
def health():
    return schemas.HealthResponse(status="ok", version=__version__)


@app.get("/materials", response_model=schemas.MaterialList)
def materials():
    return schemas.MaterialList(materials=material_ids() + ["vacuum"])


@app.get("/materials/{material_id}", response_model=schemas.MaterialInfo)
def material_info(material_id: str):
    model = load_material(material_id)
    try:
        e0 = static_eps(model)
        e0 = None if math.isinf(e0) else e0
    except FullereneCPError:
        e0 = None
    return schemas.MaterialInfo(id=material_id, model=model_to_dict(model), static_eps=e0)


@app.get("/molecules", response_model=schemas.MoleculeList)
def molecules():
    return schemas.MoleculeList(molecules=molecule_ids())


@app.get("/molecules/{molecule_id}", response_model=schemas.MoleculeInfo)
def molecule_info(molecule_id: str):
    mol = load_molecule(molecule_id)
    return schemas.MoleculeInfo(
        id=molecule_id,
        name=mol.name,
        n_electronic=len(mol.electronic),
        n_phonon=len(mol.phonon),
        lattice_constant_m=mol.lattice_constant,
        alpha_static_electronic=static_alpha(mol, parts="electronic"),
    )


@app.get("/molecules/{molecule_id}/model")
def molecule_model(molecule_id: str):
    return molecule_to_dict(load_molecule(molecule_id))


@app.get("/doctor", response_model=schemas.DoctorResponse)
def run_doctor():
    problems = doctor()
    return schemas.DoctorResponse(ok=not problems, problems=problems)


@app.post("/coeffs", response_model=schemas.CoeffsResponse)
def coeffs(req: schemas.CoeffsRequest):
    mols = [req.molecule] if req.molecule else molecule_ids()
    surfs = [req.surface] if req.surface else [m for m in material_ids() + ["vacuum"]
                                               if not m.endswith("film-optical")
                                               and not m.endswith("film-infrared")]
    rows = []
    for sid in surfs:
        surf = load_material(sid)
        for mid in mols:
            mol = load_molecule(mid)
            cs = coeff_set(mol, surf, req.T, req.Tm, molecule_id=mid, surface_id=sid)
            rows.append(schemas.CoeffRow(
                molecule=cs.molecule, surface=cs.surface, T=cs.T, T_m=cs.T_m,
                C3=cs.C3, C3_zero_width=cs.C3_zero_width, C3_lrt=cs.C3_lrt,
                C4=cs.C4, C3T=cs.C3T, C3_phonon=cs.C3_phonon,
            ))
    return schemas.CoeffsResponse(rows=rows)


@app.post("/potential", response_model=schemas.PotentialResponse)
def potential(req: schemas.PotentialRequest):
    mol = load_molecule(req.molecule)
    surf = load_material(req.surface)
    q = QuadratureSettings(
        rel_tol=req.quadrature.rel_tol,
        matsubara_tail_tol=req.quadrature.matsubara_tail_tol,
        max_matsubara=req.quadrature.max_matsubara,
        max_subdivisions=req.quadrature.max_subdivisions,
    )
    if req.scale == "log":
        grid = np.logspace(math.log10(req.z_min_m), math.log10(req.z_max_m), req.points)
    else:
        grid = np.linspace(req.z_min_m, req.z_max_m, req.points)
    z_list, tot, nres, res, terms = [], [], [], [], []
    for z in grid:
        if req.T > 0:
            r = u_total(mol, surf, EnvConfig(req.T, req.Tm, float(z)), q,
                        parts=req.transitions)
            tot.append(r.total)
            nres.append(r.nonresonant)
            res.append(r.resonant)
            terms.append(r.matsubara_terms_used)
        else:
            u0 = u_zero_temperature(mol, surf, float(z), q, parts=req.transitions)
            tot.append(u0)
            nres.append(u0)
            res.append(0.0)
            terms.append(0)
        z_list.append(float(z))
    return schemas.PotentialResponse(
        z_m=z_list, u_total_J=tot, u_nonres_J=nres, u_res_J=res, matsubara_terms=terms
    )


def _xi_grid(req: schemas.XiGrid) -> np.ndarray:
    if req.xi_rad_s is not None:
        return np.asarray(req.xi_rad_s, dtype=float)
    if req.scale == "log":
        if not req.xi_min_rad_s > 0:
            raise HTTPException(422, "log grids need xi_min_rad_s > 0")
        return np.logspace(math.log10(req.xi_min_rad_s),
                           math.log10(req.xi_max_rad_s), req.points)
    return np.linspace(req.xi_min_rad_s, req.xi_max_rad_s, req.points)


@app.post("/eps", response_model=schemas.CurveResponse)
def eps_curve(req: schemas.EpsRequest):
    model = load_material(req.material)
    xi = _xi_grid(req)
    vals = np.atleast_1d(eval_eps_imag(model, xi))
    return schemas.CurveResponse(xi_rad_s=[float(x) for x in xi],
                                 value=[float(v) for v in vals])


@app.post("/alpha", response_model=schemas.CurveResponse)
def alpha_curve(req: schemas.AlphaRequest):
    mol = load_molecule(req.molecule)
    xi = _xi_grid(req)
    if req.symmetrised:
        vals = np.atleast_1d(alpha_sym(mol, req.Tm, xi, parts=req.transitions))
    else:
        vals = np.real(np.atleast_1d(alpha_ground(mol, 1j * xi, parts=req.transitions)))
    return schemas.CurveResponse(xi_rad_s=[float(x) for x in xi],
                                 value=[float(v) for v in vals])


@app.post("/fit", response_model=schemas.FitResponse)
def fit(req: schemas.FitRequest):
    omega = np.array([r.omega_rad_s for r in req.rows])
    im_eps = np.array([r.im_eps for r in req.rows])
    has_re = all(r.re_eps is not None for r in req.rows)
    re_eps = np.array([r.re_eps for r in req.rows]) if has_re else None
    table = SpectrumTable(omega, im_eps, re_eps)
    try:
        if req.kind == "oscillators":
            report = fit_oscillators(table, req.n, weight=req.weight)
        else:
            report = fit_semi_quantum(table, weight=req.weight)
    except NonConvergence as exc:
        return schemas.FitResponse(converged=False, message=str(exc))
    return schemas.FitResponse(
        converged=report.converged,
        model=model_to_dict(report.model),
        residual_rms=report.residual_rms,
        iterations=report.iterations,
    )
