"""Services module for the pair-calibration toolkit."""

from services.storage import ArtifactStore, LocalArtifactStore, get_artifact_store

__all__ = [
    "ArtifactStore",
    "LocalArtifactStore",
    "get_artifact_store",
]
