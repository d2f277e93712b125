"""Generative flows driven by the Kac (telegraph) process."""

__version__ = "0.1.0"
