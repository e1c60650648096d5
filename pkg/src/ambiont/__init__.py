"""Lightweight ambient-intelligence ontology toolkit with a fall-assistance simulator."""

__version__ = "0.1.0"
