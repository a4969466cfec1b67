"""Elliptic dynamical r-matrices and KZB connections for twisted sl_N bundles.

Modules
-------
elliptic
    Odd theta function, Kronecker function φ and its relatives.
lie
    Root data of sl_N, the cyclic twist and representations.
gs_basis
    Generalized sine basis, its brackets and the split Casimir.
rmatrix
    Dynamical r-matrix, f-tensor and their axiom residuals.
kzb
    KZB connection, curvature and parallel transport.
felder
    Independent high-precision reference for the untwisted limit.
checks, config, cli
    Verification harness.
"""
__version__ = "0.1.0"
