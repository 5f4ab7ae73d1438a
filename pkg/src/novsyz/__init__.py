"""Exact barcodes, spectral sequences and tropical invariants for polygons over integral affine bases."""

__version__ = "0.1.0"
