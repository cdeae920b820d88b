"""
linsynth - Main API
FastAPI application exposing CNOT circuit synthesis and resynthesis
"""
from datetime import datetime
from typing import List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from loguru import logger
from pydantic import BaseModel, Field

from src import __version__
from src.core.circuit import metrics
from src.core.exceptions import LinSynthError, NoMethodSucceeded, VerificationError
from src.core.gf2core import BitMatrix
from src.core.qcformat import circuit_to_qc, format_qc, parse_qc
from src.models.schemas import CircuitMetrics, PortfolioSpec, SynthesisResult
from src.pipeline.resynthesis import Resynthesizer
from src.synthesizers.portfolio import Portfolio
from src.utils.config import get_settings
from src.utils.logging import configure_logging

configure_logging()

app = FastAPI(
    title="linsynth API",
    description="Depth-oriented CNOT circuit synthesis over GF(2)",
    version=__version__
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Shared pipeline objects (singleton pattern); requests naming their own
# methods get a fresh portfolio so these counters only track the defaults
logger.info("🚀 Initializing synthesis portfolio...")
default_portfolio = Portfolio()
default_resynthesizer = Resynthesizer(default_portfolio.spec)
logger.info(f"✅ Portfolio ready: {', '.join(default_portfolio.spec.methods)}")


class SynthRequest(BaseModel):
    """Request model for synthesizing one operator"""
    matrix: List[str] = Field(..., min_length=1, description="Rows of the operator as 0/1 strings")
    methods: Optional[str] = Field(None, description="Comma separated method tags (server default when omitted)")
    seed: int = Field(0, ge=0, description="Seed for the randomized methods")

    class Config:
        json_schema_extra = {
            "example": {
                "matrix": ["011", "101", "111"],
                "methods": "gaussian,dacsynth,greedy:H_sum",
                "seed": 0
            }
        }


class MethodSummary(BaseModel):
    method: str
    depth: Optional[int]
    cnots: Optional[int]
    failure: Optional[str]
    ms: float


class SynthResponse(BaseModel):
    """Response model for a synthesized operator"""
    method: str
    depth: int
    cnots: int
    gates: List[List[int]]
    out_permutation: List[int]
    qc: str
    methods: List[MethodSummary]


class QcRequest(BaseModel):
    """Request model carrying a .qc circuit"""
    qc: str = Field(..., description=".qc file contents")
    methods: Optional[str] = Field(None, description="Comma separated method tags for resynthesis")
    seed: int = Field(0, ge=0)


class ResynthResponse(BaseModel):
    qc: str
    before: CircuitMetrics
    after: CircuitMetrics
    chunks: int
    wins: dict
    equivalence_checked: bool


def _portfolio(methods: Optional[str], seed: int) -> Portfolio:
    if methods is None and seed == default_portfolio.spec.seed:
        return default_portfolio
    text = methods or get_settings().default_methods
    return Portfolio(PortfolioSpec.parse(text, seed=seed))


def _synth_response(best: SynthesisResult, outcomes) -> SynthResponse:
    out_perm = best.out_permutation.to_list()
    return SynthResponse(
        method=best.method,
        depth=best.depth,
        cnots=best.cnot_count,
        gates=[list(g.wires) for g in best.circuit.gates],
        out_permutation=out_perm,
        qc=circuit_to_qc(best.circuit,
                         out_permutation=None if best.out_permutation.is_identity() else out_perm),
        methods=[
            MethodSummary(
                method=o.method,
                depth=o.result.depth if o.ok else None,
                cnots=o.result.cnot_count if o.ok else None,
                failure=o.failure,
                ms=round(o.ms, 3),
            )
            for o in outcomes
        ],
    )


@app.get("/")
async def root():
    """Root endpoint - API info"""
    return {
        "message": "linsynth API",
        "version": __version__,
        "status": "operational",
        "endpoints": {
            "POST /synth": "Synthesize a CNOT circuit for an invertible matrix",
            "POST /depth": "Depth, CNOT count and T metrics of a .qc circuit",
            "POST /resynth": "Resynthesize the CNOT chunks of a .qc circuit",
            "GET /stats": "Portfolio statistics",
            "GET /health": "Health check"
        }
    }


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "timestamp": datetime.now().isoformat(),
        "methods": default_portfolio.spec.methods,
    }


@app.post("/synth", response_model=SynthResponse)
async def synth(request: SynthRequest):
    """
    Synthesize an operator with every portfolio method and return the shallowest circuit

    The circuit followed by out_permutation implements the matrix: row i of
    the matrix is carried by wire out_permutation[i].
    """
    try:
        matrix = BitMatrix.from_rows(request.matrix)
        portfolio = _portfolio(request.methods, request.seed)
        best, outcomes = portfolio.process(matrix)
        if best is None:
            raise NoMethodSucceeded("every method failed")
        return _synth_response(best, outcomes)

    except NoMethodSucceeded as e:
        raise HTTPException(status_code=422, detail=str(e))
    except VerificationError as e:
        logger.exception("synthesized circuit failed verification")
        raise HTTPException(status_code=500, detail=str(e))
    except (LinSynthError, ValueError) as e:
        raise HTTPException(status_code=400, detail=f"Synthesis failed: {str(e)}")
    except Exception as e:
        logger.exception("synthesis crashed")
        raise HTTPException(status_code=500, detail=f"Synthesis failed: {str(e)}")


@app.post("/depth", response_model=CircuitMetrics)
async def circuit_depth(request: QcRequest):
    """Metrics of a .qc circuit"""
    try:
        return metrics(parse_qc(request.qc).circuit)

    except LinSynthError as e:
        raise HTTPException(status_code=400, detail=f"Depth failed: {str(e)}")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Depth failed: {str(e)}")


@app.post("/resynth", response_model=ResynthResponse)
async def resynth(request: QcRequest):
    """
    Rebuild every CNOT chunk of a .qc circuit

    T-count and T-depth are preserved; depth and CNOT count never grow.
    """
    try:
        program = parse_qc(request.qc)
        if request.methods is None and request.seed == default_portfolio.spec.seed:
            resynthesizer = default_resynthesizer
        else:
            resynthesizer = Resynthesizer(_portfolio(request.methods, request.seed).spec)
        new_program, report = resynthesizer.process(program)
        return ResynthResponse(
            qc=format_qc(new_program),
            before=report.before,
            after=report.after,
            chunks=len(report.chunks),
            wins=report.wins,
            equivalence_checked=report.equivalence_checked,
        )

    except HTTPException:
        raise
    except (LinSynthError, ValueError) as e:
        raise HTTPException(status_code=400, detail=f"Resynthesis failed: {str(e)}")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Resynthesis failed: {str(e)}")


@app.get("/stats")
async def get_stats():
    """Counters of the shared portfolio and resynthesizer"""
    try:
        return {
            "portfolio": default_portfolio.get_stats(),
            "resynthesis": default_resynthesizer.get_stats(),
        }

    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Stats retrieval failed: {str(e)}")


if __name__ == "__main__":
    import uvicorn

    settings = get_settings()
    uvicorn.run(app, host=settings.api_host, port=settings.api_port)
