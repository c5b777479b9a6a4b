"""Symbolic verification of wave-equation symmetries, conservation laws and reductions."""

from __future__ import annotations

__version__ = "0.1.0"
