"""Shared helpers: quadrature rules and configuration handling."""
