from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI

from . import __version__
from .api import api_router
from .config import SETTINGS, Settings
from .models import HealthResponse
from .revocation import DataCommunicationCompany
from .scheme import GlobalParams

logger = logging.getLogger(__name__)

SERVICE = "mabs DCC relay"


def create_app(
    gp: GlobalParams,
    dcc: DataCommunicationCompany,
    settings: Optional[Settings] = None,
    state_dir: Optional[Union[str, Path]] = None,
) -> FastAPI:
    """Bind one DCC to a FastAPI app; membership changes are saved to ``state_dir``."""
    settings = settings or SETTINGS
    app = FastAPI(
        title=SERVICE,
        version=__version__,
        description="Data communication company relay: access lists and revocation",
        docs_url="/docs" if settings.log_level == "DEBUG" else None,
        redoc_url="/redoc" if settings.log_level == "DEBUG" else None,
    )
    app.state.gp = gp
    app.state.dcc = dcc
    app.state.settings = settings
    app.state.state_dir = Path(state_dir) if state_dir is not None else None
    app.include_router(api_router)

    @app.get("/healthz", response_model=HealthResponse)
    def healthz():
        """Health check endpoint."""
        return HealthResponse(
            status="ok",
            service=SERVICE,
            version=__version__,
            users=len(dcc.registry),
            attributes=len(gp.attributes),
        )

    if not settings.relay_hmac_secret:
        logger.warning("Relay HMAC secret not set; any client may change access lists")
    return app
