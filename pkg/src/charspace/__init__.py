"""charspace: six-component character scores, character networks, and
corpus-level reports for novels."""

__version__ = "0.1.0"

from . import annotations, components, ingest, llm, metrics, networks, poincare, stats  # noqa: F401
from .errors import CharspaceError  # noqa: F401
