from .app import create_app
from .schemas import CreateCollectionResponse, FocusRequest
from .sessions import CollectionSession, SessionStore

__all__ = [
    "create_app",
    "CreateCollectionResponse",
    "FocusRequest",
    "CollectionSession",
    "SessionStore",
]
