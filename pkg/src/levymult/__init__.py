"""Fourier multipliers with Levy-type symbols."""
