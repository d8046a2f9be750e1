"""Quantum-battery charging with Nth-root CNOT circuits on 2- and 3-qubit registers."""

__version__ = "0.1.0"
