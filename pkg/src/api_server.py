"""
HTTP service for AtomLens
Read-only JSON access to the closed-form scattering and extinction results
"""
import asyncio
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional

import uvicorn
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, model_validator

from . import __version__
from .errors import AtomLensError
from .logging_config import get_logger
from .main import RB87_NATURAL_LINEWIDTH_MHZ, AtomLens
from .models import FocusGeometry, SpectrumRecord
from .scattering import DEFAULT_SEARCH_INTERVAL
from .spectra import LINEWIDTH_THRESHOLD

logger = get_logger(__name__)


# Pydantic models for API requests/responses
class GeometryRequest(BaseModel):
    """Lengths in meters, power in watts"""
    w_l: float = Field(gt=0)
    f: float = Field(default=4.5e-3, gt=0)
    wavelength: float = Field(default=780e-9, gt=0)
    rho0: Optional[float] = Field(default=None, gt=0)
    na: Optional[float] = Field(default=None, gt=0, lt=1)
    power: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _one_aperture(self) -> "GeometryRequest":
        if self.rho0 is not None and self.na is not None:
            raise ValueError("give either rho0 or na, not both")
        return self

    def geometry(self) -> FocusGeometry:
        return FocusGeometry.create(w_l=self.w_l, f=self.f, wavelength=self.wavelength,
                                    rho0=self.rho0, na=self.na)


class OptimumRequest(BaseModel):
    u_min: float = Field(default=DEFAULT_SEARCH_INTERVAL[0], gt=0)
    u_max: float = Field(default=DEFAULT_SEARCH_INTERVAL[1], gt=0)
    tolerance: float = Field(default=1e-4, gt=0)


class SpectrumRequest(BaseModel):
    """(detuning MHz, transmission[, sigma]) points"""
    points: List[List[float]]
    gamma_natural: float = Field(default=RB87_NATURAL_LINEWIDTH_MHZ, gt=0)
    threshold: float = Field(default=LINEWIDTH_THRESHOLD, gt=0)


class ServerResponse(BaseModel):
    success: bool
    data: Optional[Dict[str, Any]] = None
    message: str = ""
    timestamp: str = Field(default_factory=lambda: datetime.now().isoformat())


class AtomLensServer:
    """FastAPI service over the AtomLens orchestrator"""

    def __init__(self, lens: Optional[AtomLens] = None, host: str = "127.0.0.1",
                 port: int = 8080):
        self.host = host
        self.port = port
        self.lens = lens or AtomLens()
        self.app = FastAPI(
            title="AtomLens",
            description="Strong focusing of light onto a single atom",
            version=__version__,
        )

        self.setup_middleware()
        self.setup_routes()

    def setup_middleware(self):
        """Setup CORS middleware"""
        self.app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_credentials=False,
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    async def _compute(self, what: str, job: Callable[[], Dict[str, Any]]) -> ServerResponse:
        """Run a computation off the event loop; library errors become 422"""
        try:
            data = await asyncio.to_thread(job)
        except AtomLensError as e:
            logger.warning("%s rejected: %s", what, e.describe())
            raise HTTPException(status_code=422, detail=e.describe()) from e
        except Exception as e:
            logger.exception("%s failed", what)
            raise HTTPException(status_code=500, detail=f"{what} failed: {str(e)}") from e
        return ServerResponse(success=True, data=data, message=f"{what} computed")

    def setup_routes(self):
        """Setup API routes"""

        @self.app.get("/")
        async def root():
            return {"message": "AtomLens", "status": "running"}

        @self.app.get("/api/status")
        async def status():
            return ServerResponse(
                success=True,
                data={
                    "server": "running",
                    "version": __version__,
                    "grid_size": self.lens.grid_size,
                    "lens_model": self.lens.lens_model.value,
                    "capabilities": ["scattering-ratio", "extinction", "table1", "optimum",
                                     "fit-spectrum"],
                },
                message="AtomLens service operational",
            )

        @self.app.post("/api/scattering-ratio")
        async def scattering_ratio(request: GeometryRequest):
            """R_sc and the focal amplitude for one geometry"""
            return await self._compute(
                "scattering ratio",
                lambda: self.lens.scattering_summary(request.geometry(), request.power))

        @self.app.post("/api/extinction")
        async def extinction(request: GeometryRequest):
            return await self._compute(
                "extinction", lambda: self.lens.extinction_summary(request.geometry()))

        @self.app.get("/api/table1")
        async def table1(f: float = 4.5e-3, wavelength: float = 780e-9):
            """Theory next to the measured spectra"""
            def job() -> Dict[str, Any]:
                columns, rows = self.lens.table1(f, wavelength)
                return {"columns": columns, "rows": [dict(zip(columns, row)) for row in rows]}
            return await self._compute("table", job)

        @self.app.post("/api/optimum")
        async def optimum(request: OptimumRequest):
            return await self._compute(
                "optimum",
                lambda: self.lens.optimum((request.u_min, request.u_max),
                                          request.tolerance).to_dict())

        @self.app.post("/api/fit-spectrum")
        async def fit_spectrum(request: SpectrumRequest):
            """Lorentzian fit of posted points and the natural-linewidth check"""
            def job() -> Dict[str, Any]:
                record = SpectrumRecord.create([tuple(p) for p in request.points])
                fit, report = self.lens.fit_record(record, request.gamma_natural,
                                                   request.threshold)
                return {"fit": fit.to_dict(), "linewidth": report.to_dict()}
            return await self._compute("fit", job)

    async def run_server(self):
        """Run the HTTP service"""
        config = uvicorn.Config(
            app=self.app,
            host=self.host,
            port=self.port,
            log_level="info"
        )
        server = uvicorn.Server(config)

        print(f"🚀 AtomLens service starting on http://{self.host}:{self.port}")
        print(f"📚 API Documentation: http://{self.host}:{self.port}/docs")

        await server.serve()


async def main():
    """Main entry point for the HTTP service"""
    server = AtomLensServer()
    await server.run_server()


if __name__ == "__main__":
    asyncio.run(main())
