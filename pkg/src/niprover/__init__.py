"""Saturation theorem prover guided by name-invariant graph embeddings."""

__version__ = "0.1.0"
