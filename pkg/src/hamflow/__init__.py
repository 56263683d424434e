"""Generalized Hamiltonian mechanics from a fundamental 1-form: symbolic
scalar fields, symplectic brackets, generalized Hamilton equations and
Hamilton-Jacobi residuals."""

__version__ = "0.1.0"
