"""Diachronic sentiment arcs from ensembles of sentiment models."""

__version__ = "0.1.0"
