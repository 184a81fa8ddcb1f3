"""Keras-to-exact-arithmetic model exporter."""

from .export import ExportError, ExportReport, convert_model, export_model

__version__ = "0.1.0"
