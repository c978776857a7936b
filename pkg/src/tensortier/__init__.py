"""Trace-driven planning and simulation of tensor migration across
a GPU / host / SSD memory hierarchy."""

__version__ = "0.1.0"
