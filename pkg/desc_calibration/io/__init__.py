"""
Atomic output files and the versioned checkpoint container.
"""

from __future__ import annotations

from . import checkpoint
from .atomic_writer import AtomicWriter

__all__ = ["AtomicWriter", "checkpoint"]
