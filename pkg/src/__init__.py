"""
AtomLens - Strong Focusing onto a Single Atom
==============================================

Vectorial focal fields of a Gaussian beam behind an ideal lens, and the
scattering, extinction and reflectivity of a two-level atom sitting at the focus.
"""

__version__ = "0.1.0"
__author__ = "AtomLens Team"
__email__ = "team@atomlens.dev"
