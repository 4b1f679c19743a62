"""Request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class HealthResponse(BaseModel):
    status: str
    version: str


class MaterialList(BaseModel):
    materials: list[str]


class MoleculeList(BaseModel):
    molecules: list[str]


class MaterialInfo(BaseModel):
    id: str
    model: dict
    static_eps: Optional[float] = None   # None encodes a divergent static response


class MoleculeInfo(BaseModel):
    id: str
    name: str
    n_electronic: int
    n_phonon: int
    lattice_constant_m: Optional[float]
    alpha_static_electronic: float


class DoctorResponse(BaseModel):
    ok: bool
    problems: list[str]


class CoeffsRequest(BaseModel):
    molecule: Optional[str] = None    # default: every bundled molecule
    surface: Optional[str] = None     # default: every bundled surface
    T: float = Field(300.0, gt=0)
    Tm: float = Field(300.0, ge=0)


class CoeffRow(BaseModel):
    molecule: str
    surface: str
    T: float
    T_m: float
    C3: float
    C3_zero_width: float
    C3_lrt: float
    C4: float
    C3T: float
    C3_phonon: float


class CoeffsResponse(BaseModel):
    rows: list[CoeffRow]


class QuadratureOptions(BaseModel):
    rel_tol: float = Field(1e-8, gt=0)
    matsubara_tail_tol: float = Field(1e-10, gt=0)
    max_matsubara: int = Field(1_000_000, gt=0)
    max_subdivisions: int = Field(10_000, gt=0)


class PotentialRequest(BaseModel):
    molecule: str
    surface: str
    T: float = Field(300.0, ge=0)
    Tm: float = Field(300.0, ge=0)
    z_min_m: float = Field(..., gt=0)
    z_max_m: float = Field(..., gt=0)
    points: int = Field(..., ge=2)
    scale: Literal["log", "linear"] = "log"
    transitions: Literal["electronic", "phonon", "all"] = "electronic"
    quadrature: QuadratureOptions = QuadratureOptions()

    @model_validator(mode="after")
    def _ordered(self):
        if not self.z_min_m < self.z_max_m:
            raise ValueError("z_min_m must be strictly less than z_max_m")
        return self


class PotentialResponse(BaseModel):
    z_m: list[float]
    u_total_J: list[float]
    u_nonres_J: list[float]
    u_res_J: list[float]
    matsubara_terms: list[int]


class XiGrid(BaseModel):
    xi_rad_s: Optional[list[float]] = None
    xi_min_rad_s: Optional[float] = Field(None, ge=0)
    xi_max_rad_s: Optional[float] = Field(None, gt=0)
    points: int = Field(100, ge=1)
    scale: Literal["log", "linear"] = "log"

    @model_validator(mode="after")
    def _has_grid(self):
        if self.xi_rad_s is None and (self.xi_min_rad_s is None or self.xi_max_rad_s is None):
            raise ValueError("provide xi_rad_s or xi_min_rad_s/xi_max_rad_s")
        return self


class EpsRequest(XiGrid):
    material: str


class AlphaRequest(XiGrid):
    molecule: str
    Tm: float = Field(0.0, ge=0)
    transitions: Literal["electronic", "phonon", "all"] = "electronic"
    symmetrised: bool = True


class CurveResponse(BaseModel):
    xi_rad_s: list[float]
    value: list[float]


class FitRow(BaseModel):
    omega_rad_s: float
    re_eps: Optional[float] = None
    im_eps: float


class FitRequest(BaseModel):
    kind: Literal["oscillators", "semi-quantum"]
    n: Optional[int] = Field(None, ge=1)
    rows: list[FitRow]
    weight: Literal["none", "relative"] = "none"

    @model_validator(mode="after")
    def _n_required(self):
        if self.kind == "oscillators" and self.n is None:
            raise ValueError("n is required for oscillator fits")
        return self


class FitResponse(BaseModel):
    converged: bool
    model: Optional[dict] = None
    residual_rms: Optional[float] = None
    iterations: Optional[int] = None
    message: Optional[str] = None
