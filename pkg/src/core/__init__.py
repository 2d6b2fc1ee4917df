"""Finite fields, linear algebra over F_q and the q-ary erasure channel."""
