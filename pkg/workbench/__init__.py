"""Repumper lattice workbench."""
