"""Locally convex curves on the sphere: frames, lifts, diagnostics, surgery and degrees."""

__version__ = "0.1.0"
