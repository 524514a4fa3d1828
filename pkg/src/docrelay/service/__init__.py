"""HTTP service and CLI: the common interface over ingestion, the four
retrieval use cases, and scenario jobs."""

from .config import ServiceConfig, load_config_file
from .jobs import JobManager, JobRecord

__all__ = ["ServiceConfig", "load_config_file", "JobManager", "JobRecord"]
