"""CLI, persistence, and the HTTP query service."""

from .archive import IndexArchive, load_archive, save_archive
from .cli import main

__all__ = ["IndexArchive", "load_archive", "main", "save_archive"]
