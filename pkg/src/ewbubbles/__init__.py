"""Electroweak bubble nucleation: simulation, sonification and frame rendering."""

__version__ = "0.1.0"
