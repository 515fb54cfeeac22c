"""Numerical verification of sharp affine weighted Sobolev-type inequalities on the half-space."""

__version__ = "0.1.0"
