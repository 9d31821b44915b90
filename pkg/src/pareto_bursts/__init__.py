"""Pareto-frontier approximation for districting problems by short bursts."""

__version__ = "0.1.0"
