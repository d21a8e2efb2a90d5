"""Enumeration and classification of genus-two handlebody-knot diagrams."""

__version__ = "0.1.0"
