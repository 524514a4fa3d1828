"""docrelay: supervisor-worker agent pipelines for software-engineering
documents.

Two applications ship on one engine: template-compliant test scenario
generation from a functional specification document, and retrieval over a
versioned document corpus (search, question answering, requirement change
tracing, long-document reading). A scripted model backend makes every
pipeline fully testable offline.
"""

from .artifacts import ArtifactHandle, ArtifactStore
from .gateway import HttpBackend, ModelGateway, ScriptedBackend, ScriptRule
from .orchestration import (
    AgentDescriptor,
    Envelope,
    EngineConfig,
    PipelineEngine,
    WorkerRegistry,
    WorkerReport,
)
from .store import DocumentStore, QuerySpec

__version__ = "0.1.0"

__all__ = [
    "ArtifactHandle",
    "ArtifactStore",
    "HttpBackend",
    "ModelGateway",
    "ScriptedBackend",
    "ScriptRule",
    "AgentDescriptor",
    "Envelope",
    "EngineConfig",
    "PipelineEngine",
    "WorkerRegistry",
    "WorkerReport",
    "DocumentStore",
    "QuerySpec",
    "__version__",
]
