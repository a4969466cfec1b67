"""Dynamical elliptic r-matrix and f-tensor of a twisted sl_N bundle.

In the GS basis

    r(u, z) = Σ_β Σ_k ½|β|² φ_β^k(u, z) 𝔱_β^k⊗𝔱_{−β}^{−k}
              + Σ_c φ_0^c(z) Σ_ν 𝔖_ν^c⊗𝔥_ν^{−c},

where β runs over orbit representatives of λ on the roots, φ_0^0 = E1 and
φ_0^c(z) = φ(c/l, z).  The f-tensor has the same shape with f_β^k and
f_0^0 = ρ.  The dynamical variable u lives in the invariant Cartan h̃_0;
its coordinates refer either to the coroot basis b_r or to the invariant
fundamental coweights (``convention``).

Every matrix is assembled as Σ_t g_t(u, z) K_t from a fixed stack of
tensors K_t and a vector of scalar kernels g_t, so derivatives only change
the kernels.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import elliptic as el
from .elliptic import EllipticContext, PoleError
from .gs_basis import GSBasis, casimir_split, cartan_terms, root_terms
from .lie import Representation, dot, neg
from .tensor import commutator, embed, operator_norm, swap

__all__ = [
    "DiscriminantError",
    "ModuliPoint",
    "RMatrix",
    "TwoSiteTensor",
    "apply_dynamical_twist",
    "cdybe_residual",
    "du_r",
    "eval_f",
    "eval_r",
    "discriminant_residual",
    "quasiperiodicity_residual",
    "residue_residual",
    "sample_marks",
    "sample_point",
    "unitarity_residual",
    "zero_weight_residual",
]

DYNAMICAL_SIGN = 1
"""Sign s in the dynamical operator ∂̂^a = s Σ_i (b^i)^{(a)} ∂_{u_i}.

Fixed by the CDYBE residual; the opposite sign fails it by O(1)."""


class DiscriminantError(PoleError):
    def __init__(self, message: str, root=None, k=None):
        super().__init__(message, "pairing")
        self.root = root
        self.k = k


@dataclass(frozen=True)
class ModuliPoint:
    """Dynamical coordinates u over the h̃_0 basis and the modulus τ."""

    u: tuple[complex, ...]
    tau: complex

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(complex(x) for x in self.u))
        object.__setattr__(self, "tau", complex(self.tau))
        if not self.tau.imag > 0:
            raise ValueError("tau must lie in the upper half plane")

    def shifted(self, du=None, dtau: complex = 0) -> "ModuliPoint":
        u = self.u if du is None else tuple(a + b for a, b in zip(self.u, du))
        return ModuliPoint(u, self.tau + dtau)


@dataclass
class TwoSiteTensor:
    rep_a: Representation
    rep_c: Representation
    matrix: np.ndarray


@dataclass
class _Stacks:
    root: np.ndarray  # (T, D, D), includes the ½|β|² weight
    cartan: np.ndarray  # (l, D, D)


class RMatrix:
    """Evaluator for r, f and their derivatives on pairs of representations.

    Parameters
    ----------
    basis : GSBasis
    convention : str
        ``"coroot"`` (u = Σ u_r b_r) or ``"coweight"`` (u = Σ u_r ω̃_r).
    twist_matrix : array or None
        Constant antisymmetric matrix A; adds δr = Σ A_{rs} 𝔖_r^0⊗𝔖_s^0.
    dynamical_sign : int
        Sign s of the dynamical operator (see ``DYNAMICAL_SIGN``).
    """

    def __init__(
        self,
        basis: GSBasis,
        convention: str = "coroot",
        twist_matrix=None,
        dynamical_sign: int = DYNAMICAL_SIGN,
        dual_reading: str = "dual",
        series_tolerance: float = 1e-16,
        pole_radius: float = 1e-4,
    ):
        if convention not in ("coroot", "coweight"):
            raise ValueError(f"unknown coordinate convention {convention!r}")
        if dual_reading not in ("dual", "coweight"):
            raise ValueError(f"unknown reading {dual_reading!r}")
        self.basis = basis
        self.twist = basis.twist
        self.convention = convention
        self.dynamical_sign = dynamical_sign
        self.dual_reading = dual_reading
        self.series_tolerance = series_tolerance
        self.pole_radius = pole_radius
        tw = self.twist
        if convention == "coroot":
            vecs = np.array(tw.inv_coroots, dtype=float)
        else:
            vecs = np.array([[float(x) for x in w] for w in tw.inv_coweights])
        self.coord_vectors = vecs.reshape(tw.dim_h0, tw.n)
        self.dim_u = tw.dim_h0
        terms = root_terms(basis)
        self._roots = [t[0] for t in terms]
        self._ks = np.array([t[1] for t in terms])
        self._root_pairs = [(t[2], t[3]) for t in terms]
        self._weights = np.array([0.5 * dot(b, b) for b in self._roots])
        self._kappa = np.array([float(tw.kappa_pairing(b)) for b in self._roots])
        roots = np.array(self._roots, dtype=float).reshape(len(self._roots), tw.n)
        # ⟨v_i, β⟩ for every coordinate direction and root term
        self.root_coords = self.coord_vectors @ roots.T
        self._cartan_pairs = cartan_terms(basis)
        self.twist_matrix = None
        if twist_matrix is not None:
            a = np.asarray(twist_matrix, dtype=complex)
            if a.shape != (self.dim_u, self.dim_u):
                raise ValueError(f"twist matrix must be {self.dim_u}×{self.dim_u}")
            if np.max(np.abs(a + a.T), initial=0.0) > 1e-14:
                raise ValueError("twist matrix must be antisymmetric")
            self.twist_matrix = a
        self._stacks: dict = {}
        self._contexts: dict = {}

    # ------------------------------------------------------------ geometry
    def context(self, point: ModuliPoint) -> EllipticContext:
        ctx = self._contexts.get(point.tau)
        if ctx is None:
            if len(self._contexts) > 64:
                self._contexts.clear()
            ctx = EllipticContext(point.tau, self.series_tolerance, pole_radius=self.pole_radius)
            self._contexts[point.tau] = ctx
        return ctx

    def u_vector(self, point: ModuliPoint) -> np.ndarray:
        if len(point.u) != self.dim_u:
            raise ValueError(f"expected {self.dim_u} dynamical coordinates, got {len(point.u)}")
        if self.dim_u == 0:
            return np.zeros(self.twist.n, dtype=complex)
        return np.asarray(point.u) @ self.coord_vectors

    def coroot_coords(self, point: ModuliPoint) -> np.ndarray:
        """Coordinates of u over the coroot basis b_r, whatever the convention."""
        self.u_vector(point)
        return np.asarray(point.u, dtype=complex) @ _coords_to_coroot(self) if self.dim_u else np.zeros(0)

    def pairings(self, point: ModuliPoint) -> np.ndarray:
        """Shifted pairings x_t = ⟨u + κτ, β_t⟩ + k_t/l."""
        uvec = self.u_vector(point)
        roots = np.array(self._roots, dtype=float)
        return roots @ uvec + self._kappa * point.tau + self._ks / self.twist.l

    def dual_vectors(self) -> np.ndarray:
        """Ambient vectors paired with ∂_{u_i} in the dynamical operator."""
        if self.dim_u == 0:
            return np.zeros((0, self.twist.n))
        v = self.coord_vectors
        if self.dual_reading == "coweight":
            return np.array([[float(x) for x in w] for w in self.twist.inv_coweights])
        return np.linalg.solve(v @ v.T, v)

    def laplacian_metric(self) -> np.ndarray:
        """G^{ij} = (v^i, v^j) for the dual vectors."""
        d = self.dual_vectors()
        return d @ d.T

    def _check_discriminant(self, x: np.ndarray, ctx: EllipticContext) -> None:
        dist = el.lattice_distance(x, ctx.tau)
        bad = np.nonzero(dist < ctx.pole_radius)[0]
        if bad.size:
            t = int(bad[0])
            raise DiscriminantError(
                f"point lies on the discriminant: root {self._roots[t]}, k = {int(self._ks[t])}",
                self._roots[t],
                int(self._ks[t]),
            )

    # ------------------------------------------------------------- kernels
    def kernels(self, kind: str, point: ModuliPoint, z: complex, direction=None, direction2=None):
        """Scalar kernels (root part, Cartan part) for the requested tensor.

        ``kind`` is one of ``r``, ``dz_r``, ``du_r``, ``duu_r``, ``dtau_r``,
        ``f``, ``dz_f``, ``du_f``, ``f_diag``, ``du_f_diag``.  ``direction``
        selects a coordinate index for u-derivatives.
        """
        ctx = self.context(point)
        l = self.twist.l
        x = self.pairings(point)
        self._check_discriminant(x, ctx)
        kap = self._kappa
        z = complex(z)
        ph = np.exp(2j * np.pi * kap * z)
        cs = np.arange(l) / l
        cart = np.zeros(l, dtype=complex)
        if direction is not None:
            dvec = self.root_coords[direction]
        if direction2 is not None:
            dvec2 = self.root_coords[direction2]

        def part(du, dz):
            return np.asarray(el.phi_partial(x, z, du, dz, ctx))

        if kind in ("r", "f") and l > 1:
            # root and twisted Cartan kernels in one series evaluation
            du = 0 if kind == "r" else 1
            both = np.asarray(el.phi_partial(np.concatenate([x, cs[1:]]), z, du, 0, ctx))
            root = ph * both[: len(x)]
            cart[1:] = both[len(x) :]
            cart[0] = el.e1(z, ctx) if kind == "r" else el.rho(z, ctx)
            return np.asarray(root, dtype=complex), cart

        if kind == "r":
            root = ph * part(0, 0)
            cart[0] = el.e1(z, ctx)
            if l > 1:
                cart[1:] = el.phi(cs[1:], z, ctx)
        elif kind == "dz_r":
            root = ph * (part(0, 1) + 2j * np.pi * kap * part(0, 0))
            cart[0] = -el.e2(z, ctx)
            if l > 1:
                cart[1:] = el.phi_partial(cs[1:], z, 0, 1, ctx)
        elif kind == "du_r":
            root = dvec * ph * part(1, 0)
        elif kind == "duu_r":
            root = dvec * dvec2 * ph * part(2, 0)
        elif kind == "dtau_r":
            root = ph * (kap * part(1, 0) + np.asarray(el.phi_dtau(x, z, ctx)))
            cart[0] = el.e1_dtau(z, ctx)
            if l > 1:
                cart[1:] = el.phi_dtau(cs[1:], z, ctx)
        elif kind == "f":
            root = ph * part(1, 0)
            cart[0] = el.rho(z, ctx)
            if l > 1:
                cart[1:] = el.phi_partial(cs[1:], z, 1, 0, ctx)
        elif kind == "dz_f":
            root = ph * (part(1, 1) + 2j * np.pi * kap * part(1, 0))
            cart[0] = -el.e1(z, ctx) * el.e2(z, ctx) - 0.5 * el.wp_deriv(z, ctx)
            if l > 1:
                cart[1:] = el.phi_partial(cs[1:], z, 1, 1, ctx)
        elif kind == "du_f":
            root = dvec * ph * part(2, 0)
        elif kind == "f_diag":
            root = -np.asarray(el.e2(x, ctx))
            cart[0] = -2.0 * ctx.eta1
            if l > 1:
                cart[1:] = -np.asarray(el.e2(cs[1:], ctx))
        elif kind == "du_f_diag":
            root = -dvec * np.asarray(el.e2_deriv(x, ctx))
        else:
            raise ValueError(f"unknown kernel {kind!r}")
        return np.asarray(root, dtype=complex), cart

    # --------------------------------------------------------------- stacks
    def stacks(self, rep_a: Representation, rep_c: Representation) -> _Stacks:
        key = (rep_a.name, rep_c.name)
        if key not in self._stacks:
            root = np.array([w * np.kron(rep_a.act(x), rep_c.act(y)) for w, (x, y) in zip(self._weights, self._root_pairs)])
            d = rep_a.dim * rep_c.dim
            cart = np.zeros((self.twist.l, d, d), dtype=complex)
            for c, pairs in self._cartan_pairs:
                for x, y in pairs:
                    cart[c] += np.kron(rep_a.act(x), rep_c.act(y))
            self._stacks[key] = _Stacks(root.reshape(len(self._weights), d, d), cart)
        return self._stacks[key]

    def diag_stacks(self, rep: Representation) -> _Stacks:
        """Single-site products X_t·Y_t used by f^{cc}."""
        key = ("diag", rep.name)
        if key not in self._stacks:
            root = np.array([w * rep.act(x) @ rep.act(y) for w, (x, y) in zip(self._weights, self._root_pairs)])
            cart = np.zeros((self.twist.l, rep.dim, rep.dim), dtype=complex)
            for c, pairs in self._cartan_pairs:
                for x, y in pairs:
                    cart[c] += rep.act(x) @ rep.act(y)
            self._stacks[key] = _Stacks(root.reshape(len(self._weights), rep.dim, rep.dim), cart)
        return self._stacks[key]

    def delta_r(self, rep_a: Representation, rep_c: Representation) -> np.ndarray:
        d = rep_a.dim * rep_c.dim
        out = np.zeros((d, d), dtype=complex)
        if self.twist_matrix is None:
            return out
        duals = self.zero_layer_duals()
        for i, x in enumerate(duals):
            for j, y in enumerate(duals):
                if self.twist_matrix[i, j] != 0:
                    out += self.twist_matrix[i, j] * np.kron(rep_a.act(x), rep_c.act(y))
        return out

    def zero_layer_duals(self) -> list[np.ndarray]:
        """𝔖^0 for the non-affine orbits, matched to the coordinate order."""
        pairs = dict(self._cartan_pairs)[0]
        return [x for x, _ in pairs]

    @staticmethod
    def assemble(stacks: _Stacks, root: np.ndarray, cart: np.ndarray) -> np.ndarray:
        out = np.tensordot(root, stacks.root, axes=1) if len(root) else np.zeros(stacks.cartan.shape[1:], dtype=complex)
        return out + np.tensordot(cart, stacks.cartan, axes=1)

    def tensor(self, kind, rep_a, rep_c, point, z, direction=None, direction2=None) -> np.ndarray:
        root, cart = self.kernels(kind, point, z, direction, direction2)
        if kind in ("du_r", "duu_r", "du_f", "du_f_diag"):
            cart = np.zeros_like(cart)
        if kind in ("f_diag", "du_f_diag"):
            out = self.assemble(self.diag_stacks(rep_a), root, cart)
        else:
            out = self.assemble(self.stacks(rep_a, rep_c), root, cart)
        if kind == "r":
            out = out + self.delta_r(rep_a, rep_c)
        return out

    # ----------------------------------------------------------- shortcuts
    def r(self, rep_a, rep_c, point, z) -> np.ndarray:
        return self.tensor("r", rep_a, rep_c, point, z)

    def f(self, rep_a, rep_c, point, z) -> np.ndarray:
        return self.tensor("f", rep_a, rep_c, point, z)

    def f_diag(self, rep, point) -> np.ndarray:
        return self.tensor("f_diag", rep, rep, point, 0.0)

    def du_r(self, rep_a, rep_c, point, z, direction: int) -> np.ndarray:
        return self.tensor("du_r", rep_a, rep_c, point, z, direction)

    def dynamical_generators(self, rep: Representation) -> list[np.ndarray]:
        """s·ρ(v^i): the matrix multiplying ∂_{u_i} in ∂̂ at one site."""
        return [self.dynamical_sign * rep.act(np.diag(v.astype(complex))) for v in self.dual_vectors()]

    def casimir(self, rep_a, rep_c) -> np.ndarray:
        return casimir_split(self.basis, rep_a, rep_c)

    def h0_casimir(self, rep_a, rep_c) -> np.ndarray:
        """Ω of h̃_0: Σ 𝔖^0⊗𝔥^0 over the non-affine orbits."""
        return self.stacks(rep_a, rep_c).cartan[0]


# ------------------------------------------------------------------ API
def _evaluator(basis: GSBasis) -> RMatrix:
    ev = basis._cache.get("rmatrix")
    if ev is None:
        ev = RMatrix(basis)
        basis._cache["rmatrix"] = ev
    return ev


def eval_r(basis: GSBasis, rep_a, rep_c, point: ModuliPoint, z: complex) -> TwoSiteTensor:
    """r(u, z) on V_a ⊗ V_c."""
    return TwoSiteTensor(rep_a, rep_c, _evaluator(basis).r(rep_a, rep_c, point, z))


def eval_f(basis: GSBasis, rep_a, rep_c, point, z: complex = 0.0, diagonal: bool = False) -> TwoSiteTensor:
    """f^{ac}(u, z), or the one-site f^{cc}(u) when ``diagonal``."""
    ev = _evaluator(basis)
    if diagonal:
        return TwoSiteTensor(rep_a, rep_a, ev.f_diag(rep_a, point))
    return TwoSiteTensor(rep_a, rep_c, ev.f(rep_a, rep_c, point, z))


def du_r(basis: GSBasis, reps, point, z: complex, direction: int) -> TwoSiteTensor:
    rep_a, rep_c = reps
    return TwoSiteTensor(rep_a, rep_c, _evaluator(basis).du_r(rep_a, rep_c, point, z, direction))


def cdybe_tensor(ev: RMatrix, reps: Sequence[Representation], point, z1, z2, z3) -> np.ndarray:
    """Left-hand side of the classical dynamical Yang–Baxter equation on V1⊗V2⊗V3."""
    dims = tuple(r.dim for r in reps)
    zs = (z1, z2, z3)

    def rr(i, j):
        return embed(ev.r(reps[i], reps[j], point, zs[i] - zs[j]), dims, (i, j))

    r12, r13, r23 = rr(0, 1), rr(0, 2), rr(1, 2)
    out = commutator(r12, r13) + commutator(r12, r23) + commutator(r13, r23)
    # [∂̂^a, r^{bc}] for (a, b, c) = (1, 2, 3), (3, 1, 2), (2, 3, 1)
    for a, b, c in ((0, 1, 2), (2, 0, 1), (1, 2, 0)):
        gens = ev.dynamical_generators(reps[a])
        for i, g in enumerate(gens):
            d = ev.du_r(reps[b], reps[c], point, zs[b] - zs[c], i)
            out = out + embed(g, dims, (a,)) @ embed(d, dims, (b, c))
    return out


def cdybe_residual(basis_or_ev, reps, point, z1, z2, z3) -> float:
    ev = basis_or_ev if isinstance(basis_or_ev, RMatrix) else _evaluator(basis_or_ev)
    return operator_norm(cdybe_tensor(ev, reps, point, z1, z2, z3))


def _ad_first(g: np.ndarray, m: np.ndarray, dc: int) -> np.ndarray:
    big = np.kron(g, np.eye(dc))
    return big @ m @ np.linalg.inv(big)


def _scaled(lhs: np.ndarray, rhs: np.ndarray) -> float:
    # entries grow like e^{2π|Im z|} under the τ-shifts, so compare at their scale
    return float(np.max(np.abs(lhs - rhs)) / max(1.0, float(np.max(np.abs(rhs)))))


def quasiperiodicity_residual(basis_or_ev, reps, point: ModuliPoint, z: complex) -> dict:
    """Residuals of the shifts z → z+1, z → z+τ and the u-lattice shifts.

    Each residual is max|lhs − rhs| / max(1, max|rhs|): absolute for O(1)
    tensors, relative once the shift inflates the entries.
    """
    ev = basis_or_ev if isinstance(basis_or_ev, RMatrix) else _evaluator(basis_or_ev)
    rep_a, rep_c = reps
    tw = ev.twist
    dc = rep_c.dim
    tau = point.tau
    r0 = ev.r(rep_a, rep_c, point, z)
    out = {}
    q = rep_a.group(tw.q_matrix())
    out["z+1"] = _scaled(ev.r(rep_a, rep_c, point, z + 1), _ad_first(q, r0, dc))
    lam = rep_a.group(tw.lambda_matrix(ev.coroot_coords(point)))
    omega = ev.h0_casimir(rep_a, rep_c)
    out["z+tau"] = _scaled(ev.r(rep_a, rep_c, point, z + tau), _ad_first(lam, r0, dc) - 2j * np.pi * omega)
    lattices = {"coroot": np.array(tw.inv_coroots, dtype=float).reshape(tw.dim_h0, tw.n)}
    lattices["coweight"] = np.array([[float(x) for x in w] for w in tw.inv_coweights]).reshape(tw.dim_h0, tw.n)
    for name, vecs in lattices.items():
        per, quasi = 0.0, 0.0
        for v in vecs:
            du = _ambient_to_coords(ev, v)
            per = max(per, _scaled(ev.r(rep_a, rep_c, point.shifted(du), z), r0))
            r2 = ev.r(rep_a, rep_c, point.shifted(tau * du), z)
            g = rep_a.group(np.diag(np.exp(-2j * np.pi * v * z)))
            quasi = max(quasi, _scaled(r2, _ad_first(g, r0, dc)))
        out[f"u+{name}"] = per
        out[f"u+tau*{name}"] = quasi
    return out


def _coords_to_coroot(ev: RMatrix) -> np.ndarray:
    """Matrix taking coordinates in the evaluator's convention to coroot coordinates."""
    tw = ev.twist
    if ev.dim_u == 0:
        return np.zeros((0, 0))
    b = np.array(tw.inv_coroots, dtype=float)
    return np.linalg.lstsq(b.T, ev.coord_vectors.T, rcond=None)[0].T


def _ambient_to_coords(ev: RMatrix, v: np.ndarray) -> np.ndarray:
    return np.linalg.lstsq(ev.coord_vectors.T, v, rcond=None)[0]


def unitarity_residual(ev: RMatrix, reps, point, z) -> float:
    rep_a, rep_c = reps
    r12 = ev.r(rep_a, rep_c, point, z)
    r21 = ev.r(rep_c, rep_a, point, -z)
    p = swap(rep_c.dim, rep_a.dim)
    return float(np.max(np.abs(r12 + p @ r21 @ p.T)))


def zero_weight_residual(ev: RMatrix, reps, point, z, full_cartan: bool = False) -> float:
    """max |[x⊗1 + 1⊗x, r]| over x in h̃_0 (or all of h when ``full_cartan``)."""
    rep_a, rep_c = reps
    m = ev.r(rep_a, rep_c, point, z)
    tw = ev.twist
    if full_cartan:
        xs = [np.asarray(a, dtype=float) for a in tw.rs.simple_roots]
    else:
        xs = [np.asarray(b, dtype=float) for b in tw.inv_coroots]
    worst = 0.0
    for x in xs:
        xm = np.diag(x.astype(complex))
        tot = np.kron(rep_a.act(xm), np.eye(rep_c.dim)) + np.kron(np.eye(rep_a.dim), rep_c.act(xm))
        worst = max(worst, float(np.max(np.abs(commutator(tot, m)))))
    return worst


RESIDUE_RAYS = (1.0, 1j, -1.0, -1j)


def residue_residual(ev: RMatrix, reps, point, h: float = 5e-4, rays=RESIDUE_RAYS) -> float:
    """Distance of lim_{z→0} z·r(z) from C2, worst over the rays.

    Along each ray the limit is read off by cubic-accurate polynomial
    extrapolation from z = h, 2h, 4h.
    """
    rep_a, rep_c = reps
    c2 = ev.casimir(rep_a, rep_c)
    worst = 0.0
    for d in rays:
        g = [s * h * d * ev.r(rep_a, rep_c, point, s * h * d) for s in (1, 2, 4)]
        lim = (8 * g[0] - 6 * g[1] + g[2]) / 3
        worst = max(worst, float(np.max(np.abs(lim - c2))))
    return worst


def discriminant_residual(ev: RMatrix, reps, point: ModuliPoint, z, term: int, delta: float = 1e-7) -> float:
    """Leading singularity of r as the pairing of root term ``term`` tends to 0.

    Moves u along the root direction so that x_t = δ, then compares x_t·r
    with e(⟨κ,β⟩z)𝔱_β^k⊗𝔱_{−β}^{−k} − e(−⟨κ,β⟩z)𝔱_{−β}^{−k}⊗𝔱_β^k.  Needs a
    root that pairs nontrivially with h̃_0.
    """
    rep_a, rep_c = reps
    # the pole guard of ``ev`` would reject a point this close to the wall
    near = RMatrix(
        ev.basis,
        convention=ev.convention,
        twist_matrix=ev.twist_matrix,
        dynamical_sign=ev.dynamical_sign,
        dual_reading=ev.dual_reading,
        series_tolerance=ev.series_tolerance,
        pole_radius=0.1 * delta,
    )
    coeffs = ev.root_coords[:, term]
    if not np.any(np.abs(coeffs) > 0):
        raise ValueError("root does not pair with the dynamical directions")
    x = ev.pairings(point)[term]
    step = (delta - x) / float(coeffs @ coeffs)
    moved = point.shifted(step * coeffs)
    m = near.r(rep_a, rep_c, moved, z)
    xt = ev.pairings(moved)[term]
    beta = ev._roots[term]
    k = int(ev._ks[term])
    tx, ty = ev._root_pairs[term]
    kap = ev._kappa[term]
    lead = np.exp(2j * np.pi * kap * z) * np.kron(rep_a.act(tx), rep_c.act(ty))
    lead -= np.exp(-2j * np.pi * kap * z) * np.kron(rep_a.act(ty), rep_c.act(tx))
    lead *= 0.5 * dot(beta, beta)
    return float(np.max(np.abs(xt * m - lead)))


def apply_dynamical_twist(ev: RMatrix, a) -> RMatrix:
    """Evaluator for r + δr with δr = Σ A_{rs} 𝔖_r^0⊗𝔖_s^0 for constant antisymmetric A."""
    return RMatrix(
        ev.basis,
        convention=ev.convention,
        twist_matrix=a,
        dynamical_sign=ev.dynamical_sign,
        dual_reading=ev.dual_reading,
        series_tolerance=ev.series_tolerance,
        pole_radius=ev.pole_radius,
    )


# -------------------------------------------------------------- sampling
def sample_point(ev: RMatrix, rng: np.random.Generator, tau: complex, min_distance: float = 0.05, max_draws: int = 500) -> ModuliPoint:
    """Random point whose shifted pairings stay ``min_distance`` from the lattice."""
    tau = complex(tau)
    for _ in range(max_draws):
        u = rng.uniform(-0.4, 0.4, ev.dim_u) + 1j * tau.imag * rng.uniform(-0.2, 0.2, ev.dim_u)
        point = ModuliPoint(tuple(u), tau)
        x = ev.pairings(point)
        if not len(x) or np.min(el.lattice_distance(x, tau)) >= min_distance:
            return point
    raise el.SamplingError(f"no point off the discriminant after {max_draws} draws")


def sample_marks(rng: np.random.Generator, n: int, tau: complex, min_distance: float = 0.1, max_draws: int = 500) -> tuple:
    """``n`` marked points with pairwise differences ``min_distance`` from the lattice."""
    tau = complex(tau)
    for _ in range(max_draws):
        z = rng.uniform(-0.45, 0.45, n) + 1j * tau.imag * rng.uniform(-0.4, 0.4, n)
        diffs = np.array([z[i] - z[j] for i in range(n) for j in range(i + 1, n)])
        if not len(diffs) or np.min(el.lattice_distance(diffs, tau)) >= min_distance:
            return tuple(complex(x) for x in z)
    raise el.SamplingError(f"no separated marked points after {max_draws} draws")
