"""Integrated search over social-science research information.

Ingests heterogeneous record sources into a common schema, materializes
typed links between items with provenance and confidence, serves a faceted
full-text search API, and analyzes the service's own usage logs.
"""

__version__ = "0.1.0"

from datanexus.model import Category, Record, SourceDescriptor  # noqa: F401
