"""Reduced-order models of constrained mechanical systems on spectral
submanifolds, with backbone/forced-response extraction, full-order
reference simulation and invariance diagnostics."""

__version__ = "0.1.0"
