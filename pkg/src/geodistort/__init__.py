"""Exponential map and volume-preserving radial distortion of 2D Riemannian metrics."""
