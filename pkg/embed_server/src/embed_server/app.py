"""FastAPI application exposing the embedding wire contract."""

from __future__ import annotations

from dataclasses import dataclass

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .encoders import make_encoder


@dataclass
class ServerConfig:
    model_id: str = "hash"
    port: int = 8500
    max_batch: int = 64
    dim: int = 512  # hash encoder only; real encoders report their own

    def __post_init__(self):
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")


class EmbedRequest(BaseModel):
    texts: list[str]


def create_app(config: ServerConfig | None = None) -> FastAPI:
    config = config or ServerConfig()
    encoder = make_encoder(config.model_id, config.dim)
    app = FastAPI(title="embed-server")
    app.state.config = config
    app.state.encoder = encoder

    @app.get("/health")
    def health():
        return {"dim": encoder.dim}

    @app.post("/embed")
    def embed(request: EmbedRequest):
        texts = request.texts
        if not texts or any(not t for t in texts):
            return JSONResponse(
                status_code=400,
                content={"error": "texts must be a nonempty list of "
                                  "nonempty strings"})
        if len(texts) > config.max_batch:
            return JSONResponse(
                status_code=413,
                content={"error": f"batch of {len(texts)} exceeds "
                                  f"max_batch={config.max_batch}"})
        return {"vectors": encoder.encode(texts)}

    return app
