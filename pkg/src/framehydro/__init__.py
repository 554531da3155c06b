"""Pseudo-spectral simulation and verification of biaxial frame hydrodynamics."""
