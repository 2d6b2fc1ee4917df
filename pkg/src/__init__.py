"""PolarForge: polar-like codes over q-ary erasure channels"""
__version__ = "0.1.0"
