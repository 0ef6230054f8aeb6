"""Exact-arithmetic descent spectral sequences for height-1 Picard/Brauer computations."""

__version__ = "0.1.0"

from .fgab import FgModule, IntMatrix, smith_normal_form, cokernel, hom_group, ext_group  # noqa: F401
