"""
HTTP inspection service over a trained supernetwork.

Endpoints:
- ``GET /health``
- ``GET /supernetwork``: genotype length, matches, parents, reference costs
- ``POST /decode``: genotype -> decoded node ids, madds, active switches
- ``POST /evaluate``: genotype -> accuracy, madds, active switches
"""

import logging
from functools import lru_cache
from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.concurrency import run_in_threadpool
from pydantic import BaseModel, Field

from .errors import GenotypeError
from .netgraph import network_madds
from .phenotype import Evaluator, decode, from_digits, reference_madds
from .stitcher import Supernetwork

logger = logging.getLogger(__name__)

# distinct (split, eval_limit) evaluators kept alive at once
EVALUATOR_CACHE_SIZE = 8


class GenotypeRequest(BaseModel):
    genotype: str
    split: str = "validation"
    eval_limit: Optional[int] = Field(None, gt=0)


class MatchInfo(BaseModel):
    node_a: str
    node_b: str
    kind: str


class SupernetInfo(BaseModel):
    name: str
    parents: List[str]
    genotype_length: int
    matches: List[MatchInfo]
    switches: List[str]
    reference_madds: Dict[str, int]


class DecodeResponse(BaseModel):
    genotype: str
    nodes: List[str]
    madds: int
    active_switches: List[str]


class EvaluateResponse(BaseModel):
    genotype: str
    split: str
    accuracy: float
    madds: int
    stitches: int
    active_switches: List[str]


def create_app(supernet: Supernetwork, dataset) -> FastAPI:
    """Build the FastAPI app for one supernetwork and dataset."""
    app = FastAPI(
        title="stitchlab",
        description="Decode and evaluate genotypes of a stitched supernetwork",
        version="1.0.0",
    )
    costs = reference_madds(supernet)

    @lru_cache(maxsize=EVALUATOR_CACHE_SIZE)
    def evaluator_for(split: str, eval_limit: Optional[int]) -> Evaluator:
        return Evaluator(supernet, dataset, split, eval_limit)

    app.state.evaluator_for = evaluator_for

    def parse(digits: str):
        try:
            genotype = from_digits(digits)
            supernet.check_genotype(genotype)
            return genotype
        except GenotypeError as e:
            raise HTTPException(status_code=422, detail=str(e)) from None

    def active_switches(mask) -> List[str]:
        return [s.id for s, active in zip(supernet.switches, mask) if active]

    @app.get("/health")
    async def health() -> Dict[str, str]:
        return {"status": "ok", "supernetwork": supernet.graph.name}

    @app.get("/supernetwork", response_model=SupernetInfo)
    async def info() -> SupernetInfo:
        return SupernetInfo(
            name=supernet.graph.name,
            parents=list(supernet.parent_names),
            genotype_length=supernet.genotype_length,
            matches=[MatchInfo(node_a=m.node_a, node_b=m.node_b, kind=m.stitch_kind.value) for m in supernet.plan],
            switches=[s.id for s in supernet.switches],
            reference_madds=costs,
        )

    @app.post("/decode", response_model=DecodeResponse)
    async def decode_genotype(request: GenotypeRequest) -> DecodeResponse:
        genotype = parse(request.genotype)
        graph, active = decode(supernet, genotype)
        return DecodeResponse(
            genotype=request.genotype,
            nodes=list(graph.order),
            madds=network_madds(graph),
            active_switches=active_switches(active),
        )

    @app.post("/evaluate", response_model=EvaluateResponse)
    async def evaluate_genotype(request: GenotypeRequest) -> EvaluateResponse:
        genotype = parse(request.genotype)
        if request.split not in ("train", "validation", "test"):
            raise HTTPException(status_code=422, detail=f"unknown split '{request.split}'")
        evaluator = evaluator_for(request.split, request.eval_limit)
        result = await run_in_threadpool(evaluator.evaluate, genotype)
        logger.info(f"[API] Evaluated {request.genotype} on {request.split}: acc {result.accuracy:.4f}")
        return EvaluateResponse(
            genotype=request.genotype,
            split=request.split,
            accuracy=result.accuracy,
            madds=result.madds,
            stitches=result.stitches,
            active_switches=active_switches(result.active_mask),
        )

    return app
