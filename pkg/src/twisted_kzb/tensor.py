"""Embedding of one- and two-site operators into tensor products."""
from __future__ import annotations

import numpy as np


def embed(op: np.ndarray, dims: tuple[int, ...], sites: tuple[int, ...]) -> np.ndarray:
    """Lift ``op`` acting on ⊗_{s in sites} V_s to ⊗_k V_k.

    ``op`` is a matrix on the tensor product of the listed sites, in the
    listed order; the result acts as the identity elsewhere.
    """
    n = len(dims)
    sites = tuple(sites)
    rest = [k for k in range(n) if k not in sites]
    order = list(sites) + rest
    drest = int(np.prod([dims[k] for k in rest])) if rest else 1
    big = np.kron(op, np.eye(drest))
    shape = [dims[k] for k in order]
    big = big.reshape(shape + shape)
    inv = np.argsort(order)
    big = big.transpose(list(inv) + [n + i for i in inv])
    d = int(np.prod(dims))
    return big.reshape(d, d)


def embed_stack(stack: np.ndarray, dims: tuple[int, ...], sites: tuple[int, ...]) -> np.ndarray:
    return np.stack([embed(m, dims, sites) for m in stack]) if len(stack) else np.zeros((0,) + (int(np.prod(dims)),) * 2)


def swap(da: int, dc: int) -> np.ndarray:
    """Permutation V_a ⊗ V_c → V_c ⊗ V_a."""
    p = np.zeros((da * dc, da * dc))
    for i in range(da):
        for j in range(dc):
            p[j * da + i, i * dc + j] = 1.0
    return p


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a
