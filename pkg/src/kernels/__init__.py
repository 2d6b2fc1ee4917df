"""Polarization kernels: loading, erasure tables, exponents and constants."""
