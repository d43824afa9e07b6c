"""Exact root systems, Weyl-invariant couplings and trigonometric WDVV checks."""
