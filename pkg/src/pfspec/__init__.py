"""Workbench for MSO theories and spectra of partial-function graphs."""

__version__ = "0.1.0"
