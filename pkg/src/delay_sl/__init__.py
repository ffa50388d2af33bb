"""Iso-bispectral potentials for Sturm-Liouville operators with constant delay."""
__version__ = "0.1.0"
