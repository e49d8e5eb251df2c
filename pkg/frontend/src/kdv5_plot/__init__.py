"""Offline figure generation for kdv5 scenario outputs."""

from .render import KINDS, PlotJob, SchemaError, read_series, render

__version__ = "0.1.0"
