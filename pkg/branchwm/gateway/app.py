"""FastAPI surface shared by the gateway and the bare backend."""

import logging

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .. import __version__
from ..errors import BackendError, TokenizationError
from .service import (
    BareBackendService,
    GenerateRequest,
    GenerateResponse,
    RequestTooLarge,
    WatermarkGateway,
)

logger = logging.getLogger(__name__)


class LogitsRequest(BaseModel):
    ids: list[int]


class LogitsResponse(BaseModel):
    logits: list[float]


def create_app(service: BareBackendService, expose_logits: bool | None = None) -> FastAPI:
    """HTTP app for a service.

    The bare backend also serves POST /v1/logits so that a gateway elsewhere
    can use it as its remote backend. Responses carry no state field unless
    the service runs in debug mode.
    """
    if expose_logits is None:
        expose_logits = not isinstance(service, WatermarkGateway)

    app = FastAPI(title="branchwm", version=__version__, docs_url=None, redoc_url=None)
    app.state.service = service

    @app.get("/healthz", response_class=PlainTextResponse)
    def healthz() -> str:
        return "ok"

    @app.post("/v1/generate", response_model=GenerateResponse, response_model_exclude_none=True)
    def generate(request: GenerateRequest) -> GenerateResponse:
        try:
            return service.handle_generate(request)
        except TokenizationError as e:
            raise HTTPException(400, str(e)) from e
        except RequestTooLarge as e:
            raise HTTPException(413, str(e)) from e
        except BackendError as e:
            logger.warning("backend failure: %s", e)
            raise HTTPException(502, "upstream backend unavailable") from e

    if expose_logits:

        @app.post("/v1/logits", response_model=LogitsResponse)
        def logits(request: LogitsRequest) -> LogitsResponse:
            vocab_size = service.backend.vocab_size
            if any(not 0 <= i < vocab_size for i in request.ids):
                raise HTTPException(400, f"token ids must lie in 0..{vocab_size - 1}")
            return LogitsResponse(logits=service.backend.logits(request.ids).tolist())

    return app
