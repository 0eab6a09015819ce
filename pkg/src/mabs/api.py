"""Access-list management and revocation endpoints of the DCC relay."""

from __future__ import annotations

import logging

from fastapi import APIRouter, Depends, HTTPException, Request, Response, status

from .errors import MabsError, RegistryError
from .models import AccessListsResponse, MembershipResponse
from .security import RelayAuth
from .wire import decode_ciphertext, encode_ciphertext

logger = logging.getLogger(__name__)

api_router = APIRouter(prefix="/api/v1", tags=["dcc"])

OCTET_STREAM = "application/octet-stream"


async def verified_body(request: Request) -> bytes:
    """Enforce the size limit and, when a secret is configured, the HMAC header."""
    settings = request.app.state.settings
    client_ip = request.client.host if request.client else "unknown"

    content_length = request.headers.get("content-length")
    if content_length and int(content_length) > settings.max_request_size:
        logger.warning(f"Request too large from {client_ip}: {content_length} bytes")
        raise HTTPException(
            status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE, detail="Request too large"
        )
    body = await request.body()
    if len(body) > settings.max_request_size:
        raise HTTPException(
            status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE, detail="Request too large"
        )

    message = RelayAuth.message(request.method, request.url.path, body)
    signature = request.headers.get(settings.relay_hmac_header)
    if not RelayAuth.verify_hmac(
        message, signature, settings.relay_hmac_secret, settings.relay_hmac_prefix
    ):
        logger.warning(f"Invalid HMAC signature from {client_ip}")
        raise HTTPException(
            status_code=status.HTTP_401_UNAUTHORIZED, detail="Invalid HMAC signature"
        )
    return body


def _persist(request: Request) -> None:
    state_dir = request.app.state.state_dir
    if state_dir is not None:
        request.app.state.dcc.save(state_dir)


def _check_attribute(request: Request, attribute: str) -> None:
    if attribute not in request.app.state.gp.attributes:
        raise HTTPException(status_code=404, detail=f"Unknown attribute {attribute}")


@api_router.get("/access-lists", response_model=AccessListsResponse)
async def get_access_lists(request: Request):
    """Current G_x for every attribute."""
    return AccessListsResponse(lists=request.app.state.dcc.table.to_document())


@api_router.put(
    "/access-lists/{attribute}/members/{gid}", response_model=MembershipResponse
)
async def add_member(
    attribute: str, gid: str, request: Request, _body: bytes = Depends(verified_body)
):
    _check_attribute(request, attribute)
    dcc = request.app.state.dcc
    try:
        dcc.grant(attribute, gid)
    except RegistryError as e:
        raise HTTPException(status_code=404, detail=str(e))
    _persist(request)
    return MembershipResponse(
        attribute=attribute, gid=gid, members=sorted(dcc.table.members(attribute))
    )


@api_router.delete(
    "/access-lists/{attribute}/members/{gid}", response_model=MembershipResponse
)
async def remove_member(
    attribute: str, gid: str, request: Request, _body: bytes = Depends(verified_body)
):
    _check_attribute(request, attribute)
    dcc = request.app.state.dcc
    if not dcc.revoke_member(attribute, gid):
        raise HTTPException(status_code=404, detail=f"{gid} is not a member of {attribute}")
    _persist(request)
    return MembershipResponse(
        attribute=attribute, gid=gid, members=sorted(dcc.table.members(attribute))
    )


@api_router.post("/revoke")
async def revoke_endpoint(request: Request, body: bytes = Depends(verified_body)):
    """Re-blind a signcrypted text against the current access lists."""
    gp = request.app.state.gp
    dcc = request.app.state.dcc
    try:
        text = decode_ciphertext(gp, body)
        revoked = dcc.revoke(text)
    except (MabsError, ValueError) as e:
        logger.error(f"Rejected ciphertext: {e}")
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    return Response(content=encode_ciphertext(gp.provider, revoked), media_type=OCTET_STREAM)
