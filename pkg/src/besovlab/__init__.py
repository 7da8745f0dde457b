"""Numerical laboratory for anisotropic Besov embeddings."""
