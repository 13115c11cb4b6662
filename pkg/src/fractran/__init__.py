"""FRACTRAN toolkit: exact VM, flowchart compiler, program catalog, digit oracles."""

__version__ = "0.1.0"
