"""Root systems of type A, twist data for a cyclic characteristic class, and
finite-dimensional representations.

Roots of sl_N are stored as integer vectors in the basis e_0, ..., e_{N-1}
of the ambient diagonal space, so that e_i − e_j is the root of the matrix
unit e_ij.  All lattice computations use integers or ``Fraction``; floats
appear only in representation matrices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.linalg

Root = tuple[int, ...]

__all__ = [
    "RootSystem",
    "TwistData",
    "Representation",
    "UnsupportedAlgebraError",
    "build_root_system",
    "build_twist",
    "defining_rep",
    "dual_rep",
    "adjoint_rep",
    "make_rep",
    "root_pair",
    "elementary",
]


class UnsupportedAlgebraError(ValueError):
    pass


def _root(n: int, i: int, j: int) -> Root:
    v = [0] * n
    v[i] += 1
    v[j] -= 1
    return tuple(v)


def root_pair(root: Root) -> tuple[int, int]:
    """The (i, j) with root = e_i − e_j."""
    return root.index(1), root.index(-1)


def elementary(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


def dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def neg(a: Root) -> Root:
    return tuple(-x for x in a)


def add(a: Root, b: Root) -> Root:
    return tuple(x + y for x, y in zip(a, b))


@dataclass(frozen=True)
class RootSystem:
    """Root data of sl_N (series A, rank N − 1).

    ``structure_constants[(α, β)]`` is C_{α,β} in [E_α, E_β] = C_{α,β}E_{α+β};
    with E_α the matrix unit it equals +1 when α = e_i − e_j, β = e_j − e_k
    and −1 when β = e_k − e_i.
    """

    series: str
    rank: int
    roots: tuple[Root, ...]
    simple_roots: tuple[Root, ...]
    highest_root: Root
    cartan_matrix: tuple[tuple[int, ...], ...]
    rho_covector: tuple[Fraction, ...]
    coxeter_number: int
    dual_coxeter: int
    fundamental_coweights: tuple[tuple[Fraction, ...], ...]
    structure_constants: dict = field(compare=False, repr=False)

    @property
    def n(self) -> int:
        """Size of the defining representation."""
        return self.rank + 1

    @property
    def coroots(self) -> tuple[Root, ...]:
        return self.roots

    @property
    def positive_roots(self) -> tuple[Root, ...]:
        return tuple(r for r in self.roots if root_pair(r)[0] < root_pair(r)[1])

    def norm2(self, root: Root) -> int:
        return dot(root, root)

    def is_root(self, v) -> bool:
        return tuple(v) in self._root_set

    @cached_property
    def _root_set(self) -> frozenset:
        return frozenset(self.roots)

    def simple_coefficients(self, root: Root) -> tuple[int, ...]:
        """Coefficients of ``root`` in the simple roots."""
        i, j = root_pair(root)
        c = [0] * self.rank
        lo, hi, s = (i, j, 1) if i < j else (j, i, -1)
        for k in range(lo, hi):
            c[k] = s
        return tuple(c)

    def root_matrix(self, root: Root) -> np.ndarray:
        i, j = root_pair(root)
        return elementary(self.n, i, j)

    def coroot_matrix(self, v) -> np.ndarray:
        return np.diag(np.asarray(v, dtype=complex))


def build_root_system(series: str, rank: int) -> RootSystem:
    """Root system of the simple Lie algebra of the given type.

    Only series A is implemented.
    """
    if series != "A":
        raise UnsupportedAlgebraError(f"series {series!r} is not supported (only A)")
    if rank < 1:
        raise UnsupportedAlgebraError("rank must be at least 1")
    n = rank + 1
    roots = tuple(_root(n, i, j) for i in range(n) for j in range(n) if i != j)
    simple = tuple(_root(n, i, i + 1) for i in range(rank))
    cartan = tuple(tuple(dot(a, b) for b in simple) for a in simple)
    rho = tuple(Fraction(n - 1, 2) - i for i in range(n))
    coweights = []
    for k in range(1, n):
        coweights.append(tuple(Fraction(1 if i < k else 0) - Fraction(k, n) for i in range(n)))
    consts = {}
    root_set = set(roots)
    for a in roots:
        for b in roots:
            s = add(a, b)
            if s in root_set:
                i, j = root_pair(a)
                k, m = root_pair(b)
                consts[(a, b)] = 1 if j == k else -1
    return RootSystem(
        series="A",
        rank=rank,
        roots=roots,
        simple_roots=simple,
        highest_root=_root(n, 0, n - 1),
        cartan_matrix=cartan,
        rho_covector=rho,
        coxeter_number=n,
        dual_coxeter=n,
        fundamental_coweights=tuple(coweights),
        structure_constants=consts,
    )


@dataclass(frozen=True)
class TwistData:
    """Twist of sl_N by the order-l subgroup of the centre.

    Λ_0 is the rotation of the extended Dynkin diagram by ``shift`` = j·N/l
    nodes, realized in the defining representation by S^shift with S the
    cyclic shift e_i ↦ e_{i+1}.  Extended node k is e_k − e_{k+1} (indices
    mod N); node N − 1 is the affine node α_0.

    The invariant Cartan h̃_0 has the basis b_r = f_r − f_{r+1},
    r = 0..p−2, where f_r = Σ_m e_{r+mp} and p = N/l.
    """

    rs: RootSystem
    l: int
    j: int
    p: int
    shift: int
    coweight: tuple[Fraction, ...]
    kappa: tuple[Fraction, ...]
    node_perm: tuple[int, ...]
    orbits: tuple[tuple[Root, ...], ...]
    cartan_orbits: tuple[tuple[int, ...], ...]
    affine_orbit: int
    inv_coroots: tuple[tuple[int, ...], ...]
    inv_coweights: tuple[tuple[Fraction, ...], ...]
    inv_simple_roots: tuple[tuple[Fraction, ...], ...]
    inv_roots: tuple[tuple[Fraction, ...], ...]

    @property
    def n(self) -> int:
        return self.rs.n

    @property
    def omega(self) -> complex:
        return complex(np.exp(2j * np.pi / self.l))

    @property
    def dim_h0(self) -> int:
        return len(self.inv_coroots)

    def lam(self, root: Root, t: int = 1) -> Root:
        """λ^t applied to a root (or any ambient vector)."""
        s = (self.shift * t) % self.n
        return tuple(root[(i - s) % self.n] for i in range(self.n))

    @cached_property
    def root_orbit(self) -> dict:
        """root -> (orbit index, t) with root = λ^t(orbit representative)."""
        out = {}
        for idx, orb in enumerate(self.orbits):
            for t, r in enumerate(orb):
                out.setdefault(r, (idx, t))
        return out

    def orbit_length(self, orbit: int) -> int:
        return len(set(self.orbits[orbit]))

    def fourier_indices(self, orbit: int) -> tuple[int, ...]:
        """J_{p_α}: residues mod l that are multiples of p_α = l / orbit length."""
        p_alpha = self.l // self.orbit_length(orbit)
        return tuple(range(0, self.l, p_alpha))

    def node_root(self, k: int) -> Root:
        return _root(self.n, k % self.n, (k + 1) % self.n)

    def kappa_pairing(self, root) -> Fraction:
        return dot(self.kappa, root)

    def q_matrix(self) -> np.ndarray:
        """Q = exp(2πiκ) in the defining representation."""
        return np.diag(np.exp(2j * np.pi * np.array([float(k) for k in self.kappa])))

    def lambda0_matrix(self) -> np.ndarray:
        """Λ_0 = S^shift in the defining representation."""
        return np.roll(np.eye(self.n, dtype=complex), self.shift, axis=0)

    def h0_vector(self, u) -> np.ndarray:
        """Ambient diagonal vector Σ_r u_r b_r."""
        out = np.zeros(self.n, dtype=complex)
        for c, b in zip(u, self.inv_coroots):
            out += c * np.asarray(b, dtype=float)
        return out

    def lambda_matrix(self, u) -> np.ndarray:
        """Λ = Λ_0·e(−u), whose adjoint action gives the z → z + τ monodromy."""
        return self.lambda0_matrix() @ np.diag(np.exp(-2j * np.pi * self.h0_vector(u)))

    def h0_gram(self) -> np.ndarray:
        """Trace-form Gram matrix of the basis b_r."""
        b = np.array(self.inv_coroots, dtype=float).reshape(self.dim_h0, self.n)
        return b @ b.T

    def h0_dual_basis(self) -> np.ndarray:
        """Rows b^r with (b^r, b_s) = δ_rs, as ambient vectors."""
        if self.dim_h0 == 0:
            return np.zeros((0, self.n))
        b = np.array(self.inv_coroots, dtype=float)
        return np.linalg.solve(self.h0_gram(), b)

    def coroots_in_coweights(self) -> tuple[tuple[Fraction, ...], ...]:
        """Coefficients of each b_r in the basis of invariant fundamental coweights."""
        return tuple(
            tuple(Fraction(dot(b, self.node_root(s))) for s in range(self.dim_h0))
            for b in self.inv_coroots
        )

    def serialize(self) -> str:
        return serialize_twist(self)


def build_twist(rs: RootSystem, l: int, j: int = 1) -> TwistData:
    """Twist data for the subgroup of order ``l`` of the centre of SL_N."""
    n = rs.n
    if l < 1 or n % l:
        raise UnsupportedAlgebraError(f"l = {l} does not divide N = {n}")
    if l == 1:
        j = 1
    elif math.gcd(j, l) != 1:
        raise UnsupportedAlgebraError(f"j = {j} is not coprime to l = {l}")
    p = n // l
    shift = (p * j) % n
    kw = math.gcd(p, n)  # fundamental coweight index with e(ϖ) of order l
    coweight = rs.fundamental_coweights[kw - 1] if kw < n else tuple(Fraction(0) for _ in range(n))
    kappa = tuple(r / rs.coxeter_number for r in rs.rho_covector)
    node_perm = tuple((k + shift) % n for k in range(n))

    def lam(v, t=1):
        s = (shift * t) % n
        return tuple(v[(i - s) % n] for i in range(n))

    seen = set()
    orbits = []
    for r in sorted(rs.roots, key=root_pair):
        if r in seen:
            continue
        orb = tuple(lam(r, t) for t in range(l))
        seen.update(orb)
        orbits.append(orb)

    cseen = set()
    corbits = []
    for k in range(n):
        if k in cseen:
            continue
        orb = tuple((k + shift * t) % n for t in range(l))
        cseen.update(orb)
        corbits.append(orb)
    affine = next(i for i, orb in enumerate(corbits) if n - 1 in orb)

    def f(r):
        return tuple(1 if i % p == r % p else 0 for i in range(n))

    inv_coroots = tuple(tuple(a - b for a, b in zip(f(r), f(r + 1))) for r in range(p - 1))
    inv_coweights = tuple(
        tuple(Fraction(1 if i % p <= r else 0) - Fraction(r + 1, p) for i in range(n))
        for r in range(p - 1)
    )

    def average(v):
        acc = [Fraction(0)] * n
        for t in range(l):
            for i, x in enumerate(lam(v, t)):
                acc[i] += Fraction(x, l)
        return tuple(acc)

    inv_simple = tuple(average(_root(n, r, r + 1)) for r in range(p - 1))
    inv_roots = tuple(average(_root(n, r, s)) for r in range(p) for s in range(p) if r != s)
    return TwistData(
        rs=rs,
        l=l,
        j=j,
        p=p,
        shift=shift,
        coweight=coweight,
        kappa=kappa,
        node_perm=node_perm,
        orbits=tuple(orbits),
        cartan_orbits=tuple(corbits),
        affine_orbit=affine,
        inv_coroots=inv_coroots,
        inv_coweights=inv_coweights,
        inv_simple_roots=inv_simple,
        inv_roots=inv_roots,
    )


def _fmt(v) -> str:
    return " ".join(str(x) for x in v)


def serialize_twist(tw: TwistData) -> str:
    """Exact text dump of the root system and twist data."""
    rs = tw.rs
    lines = [
        "[root_system]",
        f"series = {rs.series}",
        f"rank = {rs.rank}",
        f"coxeter_number = {rs.coxeter_number}",
        f"dual_coxeter = {rs.dual_coxeter}",
        f"rho_covector = {_fmt(rs.rho_covector)}",
        f"highest_root = {_fmt(rs.highest_root)}",
    ]
    lines += [f"cartan_row_{i} = {_fmt(row)}" for i, row in enumerate(rs.cartan_matrix)]
    lines += [f"root_{i} = {_fmt(r)}" for i, r in enumerate(rs.roots)]
    lines += [
        "",
        "[twist]",
        f"l = {tw.l}",
        f"j = {tw.j}",
        f"shift = {tw.shift}",
        f"coweight = {_fmt(tw.coweight)}",
        f"kappa = {_fmt(tw.kappa)}",
        f"node_perm = {_fmt(tw.node_perm)}",
        f"affine_orbit = {tw.affine_orbit}",
    ]
    lines += [f"orbit_{i} = " + " | ".join(_fmt(r) for r in orb) for i, orb in enumerate(tw.orbits)]
    lines += [f"cartan_orbit_{i} = {_fmt(orb)}" for i, orb in enumerate(tw.cartan_orbits)]
    lines += [f"inv_coroot_{i} = {_fmt(b)}" for i, b in enumerate(tw.inv_coroots)]
    lines += [f"inv_coweight_{i} = {_fmt(w)}" for i, w in enumerate(tw.inv_coweights)]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class Representation:
    """A representation of sl_N given by its action on defining-rep matrices.

    ``act`` maps an N×N matrix X to ρ(X); ``group`` maps an invertible N×N
    matrix g to the corresponding group element.
    """

    name: str
    rs: RootSystem
    dim: int
    act: Callable[[np.ndarray], np.ndarray]
    group: Callable[[np.ndarray], np.ndarray]

    @cached_property
    def root_matrices(self) -> dict:
        return {r: self.act(self.rs.root_matrix(r)) for r in self.rs.roots}

    @cached_property
    def cartan_matrices(self) -> tuple[np.ndarray, ...]:
        """ρ(H_{α_i}) for the simple coroots."""
        return tuple(self.act(self.rs.coroot_matrix(a)) for a in self.rs.simple_roots)

    def weights(self) -> np.ndarray:
        """Rows: eigenvalues of the simple coroots on the standard basis.

        All representations built here have diagonal Cartan action.
        """
        return np.array([np.real(np.diag(h)) for h in self.cartan_matrices]).T

    def exp(self, x: np.ndarray) -> np.ndarray:
        """Group element exp(X) for a defining-rep matrix X."""
        return self.group(scipy.linalg.expm(x))


def defining_rep(rs: RootSystem) -> Representation:
    if rs.series != "A":
        raise UnsupportedAlgebraError("defining representation implemented for series A only")
    return Representation("V", rs, rs.n, lambda x: np.asarray(x, dtype=complex), lambda g: np.asarray(g, dtype=complex))


def dual_rep(rep: Representation) -> Representation:
    """Contragredient representation, X ↦ −ρ(X)ᵀ."""
    name = rep.name[:-1] if rep.name.endswith("*") else rep.name + "*"
    return Representation(
        name,
        rep.rs,
        rep.dim,
        lambda x: -rep.act(x).T,
        lambda g: np.linalg.inv(rep.group(g)).T,
    )


def _adjoint_basis(rs: RootSystem) -> list[np.ndarray]:
    basis = [rs.root_matrix(r) for r in rs.roots]
    basis += [rs.coroot_matrix(a) for a in rs.simple_roots]
    return basis


def _adjoint_coords(rs: RootSystem, y: np.ndarray) -> np.ndarray:
    n = rs.n
    off = [y[root_pair(r)] for r in rs.roots]
    diag = np.cumsum(np.diag(y))[: n - 1]
    return np.concatenate([np.asarray(off, dtype=complex), diag])


def adjoint_rep(rs: RootSystem) -> Representation:
    """Adjoint representation on the basis (E_α for α in ``rs.roots``, H_{α_i})."""
    basis = _adjoint_basis(rs)

    def act(x):
        return np.stack([_adjoint_coords(rs, x @ b - b @ x) for b in basis], axis=1)

    def group(g):
        gi = np.linalg.inv(g)
        return np.stack([_adjoint_coords(rs, g @ b @ gi) for b in basis], axis=1)

    return Representation("ad", rs, rs.n**2 - 1, act, group)


def make_rep(rs: RootSystem, name: str) -> Representation:
    """Representation by name: ``V``, ``V*`` or ``ad``."""
    name = name.strip()
    if name == "V":
        return defining_rep(rs)
    if name == "V*":
        return dual_rep(defining_rep(rs))
    if name == "ad":
        return adjoint_rep(rs)
    raise UnsupportedAlgebraError(f"unknown representation {name!r} (expected V, V* or ad)")
