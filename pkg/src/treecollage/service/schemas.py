"""Request/response models for the layout service."""
from __future__ import annotations

from pydantic import BaseModel


class CreateCollectionResponse(BaseModel):
    id: str
    revision: int
    item_count: int


class FocusRequest(BaseModel):
    image_id: str


class FocusResponse(BaseModel):
    id: str
    revision: int
