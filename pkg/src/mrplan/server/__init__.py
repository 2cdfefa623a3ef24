"""Service layer: scenario store with transactional edits, planning jobs,
trace streaming, and overlay computation."""

from .app import create_app
from .store import RevisionConflict, SessionStore, UnknownId

__all__ = ["create_app", "SessionStore", "RevisionConflict", "UnknownId"]
