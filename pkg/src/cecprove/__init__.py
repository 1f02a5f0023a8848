"""Hybrid combinational equivalence checker for datapath circuits."""

__version__ = "0.1.0"
