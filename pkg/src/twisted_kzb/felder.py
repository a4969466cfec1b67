"""Independent reference for the untwisted (l = 1) limit.

The Felder / Etingof–Varchenko dynamical r-matrix of sl_N on the defining
representation is

    r_EV(λ, z) = E1(z) Σ_{i,j} (δ_ij − 1/N) e_ii⊗e_jj
                 + Σ_{i≠j} K(λ_i − λ_j, z) e_ij⊗e_ji,

with K(x, z) = θ1'(0)θ1(x+z)/(θ1(x)θ1(z)) in π-scaled Jacobi variables.
Everything here is computed with ``mpmath.jtheta`` at extended precision and
shares no code with the series evaluation in :mod:`twisted_kzb.elliptic`.

For l = 1 the bundle r-matrix equals r_EV after the substitution
λ = u + κτ, κ = ρ/N, and conjugation of the first factor by e(κz).  Any
remaining difference must be a constant antisymmetric element of h⊗h.
"""
from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

__all__ = ["FelderComparison", "compare_with_felder", "felder_kernel", "felder_r", "gauge_to_felder"]


def _theta1(x, q, d=0):
    return mpmath.jtheta(1, mpmath.pi * x, q, d)


def felder_kernel(x, z, tau, dps: int = 30) -> complex:
    """K(x, z) = π θ1'(0)θ1(π(x+z)) / (θ1(πx)θ1(πz)) with q = e^{iπτ}."""
    with mpmath.workdps(dps):
        x, z, tau = mpmath.mpc(x), mpmath.mpc(z), mpmath.mpc(tau)
        q = mpmath.exp(1j * mpmath.pi * tau)
        val = mpmath.pi * _theta1(0, q, 1) * _theta1(x + z, q) / (_theta1(x, q) * _theta1(z, q))
        return complex(val)


def _e1(z, tau, dps: int) -> complex:
    with mpmath.workdps(dps):
        z, tau = mpmath.mpc(z), mpmath.mpc(tau)
        q = mpmath.exp(1j * mpmath.pi * tau)
        return complex(mpmath.pi * _theta1(z, q, 1) / _theta1(z, q))


def felder_r(n: int, lam, tau: complex, z: complex, dps: int = 30) -> np.ndarray:
    """r_EV(λ, z) on C^n ⊗ C^n; ``lam`` is the diagonal of λ."""
    lam = np.asarray(lam, dtype=complex)
    out = np.zeros((n * n, n * n), dtype=complex)
    e1z = _e1(z, tau, dps)
    for i in range(n):
        for j in range(n):
            # e_ii⊗e_jj is diagonal at (i, j)
            out[i * n + j, i * n + j] += e1z * ((i == j) - 1.0 / n)
            if i != j:
                # e_ij⊗e_ji maps e_j⊗e_i to e_i⊗e_j
                out[i * n + j, j * n + i] += felder_kernel(lam[i] - lam[j], z, tau, dps)
    return out


def _kappa(n: int) -> np.ndarray:
    return np.array([((n - 1) / 2 - i) / n for i in range(n)])


def gauge_to_felder(n: int, u, tau: complex, z: complex, dps: int = 30) -> np.ndarray:
    """(Ad_{e(κz)} ⊗ 1) r_EV(u + κτ, z), the expected l = 1 bundle r-matrix."""
    kap = _kappa(n)
    lam = np.asarray(u, dtype=complex) + kap * tau
    g = np.kron(np.diag(np.exp(2j * np.pi * kap * z)), np.eye(n))
    return g @ felder_r(n, lam, tau, z, dps) @ np.linalg.inv(g)


@dataclass
class FelderComparison:
    """Difference D = r − r_EV split into its parts.

    Attributes
    ----------
    non_cartan : float
        Largest entry of D outside h⊗h.
    cartan : numpy.ndarray
        Matrix M with D|_{h⊗h} = Σ M_ij e_ii⊗e_jj (first z).
    antisymmetry : float
        max |M + Mᵀ|.
    trace : float
        Largest row or column sum of M; zero when D lies in sl_N ⊗ sl_N.
    z_dependence : float
        max |M(z) − M(z')| over the sample points.
    """

    non_cartan: float
    cartan: np.ndarray
    antisymmetry: float
    trace: float
    z_dependence: float

    @property
    def worst(self) -> float:
        return max(self.non_cartan, self.antisymmetry, self.trace, self.z_dependence)


def compare_with_felder(r_of_z, n: int, u, tau: complex, zs, dps: int = 30) -> FelderComparison:
    """Compare an l = 1 r-matrix with the gauged Felder one.

    ``r_of_z`` maps z to the n²×n² matrix on the defining representation,
    ``u`` is the dynamical variable as a traceless diagonal.
    """
    non_cartan, mats = 0.0, []
    for z in zs:
        d = r_of_z(z) - gauge_to_felder(n, u, tau, z, dps)
        diag = np.diag(d)
        non_cartan = max(non_cartan, float(np.max(np.abs(d - np.diag(diag)))))
        mats.append(diag.reshape(n, n))
    m = mats[0]
    zdep = max((float(np.max(np.abs(x - m))) for x in mats[1:]), default=0.0)
    trace = float(max(np.max(np.abs(m.sum(axis=0))), np.max(np.abs(m.sum(axis=1)))))
    return FelderComparison(non_cartan, m, float(np.max(np.abs(m + m.T))), trace, zdep)
