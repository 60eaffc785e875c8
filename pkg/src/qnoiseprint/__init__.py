"""Quantum noise fingerprints for authenticating constellation nodes."""
__version__ = "0.1.0"
