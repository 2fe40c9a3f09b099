"""SPIKE: kernel-based linear-spline solver for 1D conservation laws on the torus."""
