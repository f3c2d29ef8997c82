"""Coherent-state simulator for a scalar field coupled to slowly moving sources."""

__version__ = "0.1.0"
