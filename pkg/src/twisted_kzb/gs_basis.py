"""Generalized sine (GS) basis of sl_N adapted to a twist.

For an orbit representative β of λ and a residue a mod l,

    𝔱_β^a = l^{-1/2} Σ_m ω^{ma} E_{λ^m β},     ω = e^{2πi/l},

and for an orbit representative ν of the extended simple roots,

    𝔥_ν^c = l^{-1/2} Σ_m ω^{mc} H_{λ^m ν},

with the c = 0 element of the affine orbit dropped.  Ad_{Λ_0} multiplies
both by ω^{-a} (resp. ω^{-c}), so the residue is the grade.  The dual
family 𝔖_ν^c lies in the span of the 𝔥^c and satisfies
(𝔖_ν^c, 𝔥_μ^{-c}) = δ_{νμ} for the trace form.

Linear combinations are plain ``dict`` objects mapping generator index to
coefficient.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .lie import Representation, Root, TwistData, dot, neg, root_pair

__all__ = [
    "GSGenerator",
    "GSBasis",
    "SingularPairingError",
    "adjoint_phases",
    "build_gs",
    "casimir_split",
    "gs_bracket",
]


class SingularPairingError(RuntimeError):
    pass


@dataclass(frozen=True)
class GSGenerator:
    """One element of the GS family.

    ``kind`` is ``"root"`` (𝔱), ``"cartan"`` (𝔥) or ``"dual"`` (𝔖);
    ``orbit`` indexes ``twist.orbits`` for roots and ``twist.cartan_orbits``
    otherwise; ``index`` is the Fourier index, which is also the grade.
    """

    kind: str
    orbit: int
    index: int

    @property
    def grade(self) -> int:
        return self.index


@dataclass
class GSBasis:
    twist: TwistData
    generators: list[GSGenerator]
    matrices: list[np.ndarray]
    duals: list[GSGenerator]
    dual_coeffs: dict  # dual generator -> {cartan generator index: coeff}
    pairing: dict  # c -> 𝒜^c matrix over the layer-c Cartan family
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def l(self) -> int:
        return self.twist.l

    @property
    def dim(self) -> int:
        return len(self.generators)

    @cached_property
    def index_of(self) -> dict:
        return {g: i for i, g in enumerate(self.generators)}

    def cartan_layer(self, c: int) -> list[int]:
        """Generator indices of the 𝔥^c family, in orbit order."""
        c %= self.l
        return [i for i, g in enumerate(self.generators) if g.kind == "cartan" and g.index == c]

    def dual_matrix(self, d: GSGenerator) -> np.ndarray:
        return sum(co * self.matrices[i] for i, co in self.dual_coeffs[d].items())

    def root_generator_matrix(self, root: Root, a: int) -> np.ndarray:
        """𝔱_γ^a for an arbitrary root γ (not only orbit representatives)."""
        tw = self.twist
        w = tw.omega
        acc = np.zeros((tw.n, tw.n), dtype=complex)
        for m in range(tw.l):
            i, j = root_pair(tw.lam(root, m))
            acc[i, j] += w ** (m * a)
        return acc / math.sqrt(tw.l)

    def matrix(self, g: GSGenerator) -> np.ndarray:
        if g.kind == "dual":
            return self.dual_matrix(g)
        return self.matrices[self.index_of[g]]

    def rep_matrices(self, rep: Representation) -> list[np.ndarray]:
        key = ("rep", rep.name)
        if key not in self._cache:
            self._cache[key] = [rep.act(m) for m in self.matrices]
        return self._cache[key]

    def dump(self) -> str:
        """Text dump of the bracket table for regression comparisons."""
        lines = []
        for i in range(self.dim):
            for j in range(self.dim):
                res = gs_bracket(self, i, j)
                if not res:
                    continue
                terms = " ".join(
                    f"{k}:{_fmt_c(v)}" for k, v in sorted(res.items()) if abs(v) > 1e-15
                )
                lines.append(f"{_label(self.generators[i])} {_label(self.generators[j])} -> {terms}")
        return "\n".join(lines) + "\n"


def _fmt_c(v: complex) -> str:
    return f"{v.real:.17g}{v.imag:+.17g}i"


def _label(g: GSGenerator) -> str:
    return f"{g.kind}[{g.orbit}]^{g.index}"


def _cartan_matrix_of(tw: TwistData, orbit: int, c: int) -> np.ndarray:
    w = tw.omega
    acc = np.zeros(tw.n, dtype=complex)
    for m, k in enumerate(tw.cartan_orbits[orbit]):
        acc += w ** (m * c) * np.asarray(tw.node_root(k), dtype=float)
    return np.diag(acc) / math.sqrt(tw.l)


def _node_gram(tw: TwistData, reps: list[int], c: int) -> np.ndarray:
    """G^c_{νμ} = (𝔥_ν^c, 𝔥_μ^{-c}) = Σ_s ω^{-sc} a(ν, λ^s μ)."""
    w = tw.omega
    g = np.zeros((len(reps), len(reps)), dtype=complex)
    for x, nu in enumerate(reps):
        a = tw.node_root(tw.cartan_orbits[nu][0])
        for y, mu in enumerate(reps):
            b = tw.node_root(tw.cartan_orbits[mu][0])
            g[x, y] = sum(w ** (-s * c) * dot(a, tw.lam(b, s)) for s in range(tw.l))
    return g


def build_gs(twist: TwistData) -> GSBasis:
    """Build the GS basis, its dual Cartan family and the pairing matrices."""
    tw = twist
    gens: list[GSGenerator] = []
    mats: list[np.ndarray] = []
    for o, orb in enumerate(tw.orbits):
        for a in tw.fourier_indices(o):
            g = GSGenerator("root", o, a)
            gens.append(g)
            mats.append(None)
    for o in range(len(tw.cartan_orbits)):
        for c in range(tw.l):
            if c == 0 and o == tw.affine_orbit:
                continue
            gens.append(GSGenerator("cartan", o, c))
            mats.append(_cartan_matrix_of(tw, o, c))
    basis = GSBasis(tw, gens, mats, [], {}, {})
    for i, g in enumerate(gens):
        if g.kind == "root":
            basis.matrices[i] = basis.root_generator_matrix(tw.orbits[g.orbit][0], g.index)

    for c in range(tw.l):
        layer = basis.cartan_layer(c)
        reps = [gens[i].orbit for i in layer]
        if not reps:
            continue
        # (𝔥^c_ν, 𝔥^{-c}_μ) Gram; the dual 𝔖^c is its inverse applied to 𝔥^c
        gram = _node_gram(tw, reps, c)
        basis.pairing[c] = _node_gram(tw, reps, -c)
        if abs(np.linalg.det(gram)) < 1e-12:
            raise SingularPairingError(f"singular Cartan pairing in layer {c}")
        inv = np.linalg.inv(gram)
        for x, nu in enumerate(reps):
            d = GSGenerator("dual", nu, c)
            basis.duals.append(d)
            basis.dual_coeffs[d] = {layer[y]: complex(inv[x, y]) for y in range(len(reps))}
    return basis


def _add(acc: dict, key: int, val: complex) -> None:
    acc[key] = acc.get(key, 0) + val


def _root_term(basis: GSBasis, root: Root, a: int, coeff: complex, acc: dict) -> None:
    """Add coeff·𝔱_root^a, rewriting via 𝔱_{λ^t β}^a = ω^{-ta}𝔱_β^a."""
    tw = basis.twist
    o, t = tw.root_orbit[root]
    a %= tw.l
    if a not in tw.fourier_indices(o):
        return
    _add(acc, basis.index_of[GSGenerator("root", o, a)], coeff * tw.omega ** (-t * a))


def _node_term(basis: GSBasis, k: int, c: int, coeff: complex, acc: dict) -> None:
    """Add coeff·𝔥^c of the extended node k."""
    tw = basis.twist
    c %= tw.l
    for o, orb in enumerate(tw.cartan_orbits):
        if k in orb:
            t = orb.index(k)
            break
    phase = coeff * tw.omega ** (-t * c)
    if c == 0 and o == tw.affine_orbit:
        # the affine element is minus the sum of the other c = 0 elements
        for o2 in range(len(tw.cartan_orbits)):
            if o2 != o:
                _add(acc, basis.index_of[GSGenerator("cartan", o2, 0)], -phase)
        return
    _add(acc, basis.index_of[GSGenerator("cartan", o, c)], phase)


def _coroot_term(basis: GSBasis, root: Root, c: int, coeff: complex, acc: dict) -> None:
    """Add coeff·𝔥_root^c by expanding H_root along the nodes."""
    n = basis.twist.n
    i, j = root_pair(root)
    k = i
    while k != j:
        _node_term(basis, k, c, coeff, acc)
        k = (k + 1) % n


def _bracket_root_root(basis: GSBasis, g: GSGenerator, h: GSGenerator) -> dict:
    tw = basis.twist
    rs = tw.rs
    w = tw.omega
    alpha = tw.orbits[g.orbit][0]
    beta = tw.orbits[h.orbit][0]
    a, b = g.index, h.index
    norm = 1 / math.sqrt(tw.l)
    acc: dict = {}
    for s in range(tw.l):
        lb = tw.lam(beta, s)
        if lb == neg(alpha):
            _coroot_term(basis, alpha, a + b, norm * w ** (s * b), acc)
        else:
            cst = rs.structure_constants.get((alpha, lb))
            if cst:
                gamma = tuple(x + y for x, y in zip(alpha, lb))
                _root_term(basis, gamma, a + b, norm * w ** (s * b) * cst, acc)
    return acc


def _bracket_cartan_root(basis: GSBasis, g: GSGenerator, h: GSGenerator) -> dict:
    tw = basis.twist
    w = tw.omega
    nu = tw.node_root(tw.cartan_orbits[g.orbit][0])
    beta = tw.orbits[h.orbit][0]
    k, m = g.index, h.index
    coeff = sum(w ** (-k * s) * dot(nu, tw.lam(beta, s)) for s in range(tw.l)) / math.sqrt(tw.l)
    acc: dict = {}
    _root_term(basis, beta, k + m, coeff, acc)
    return acc


def _scale(d: dict, c: complex) -> dict:
    return {k: c * v for k, v in d.items()}


def _combine(items) -> dict:
    acc: dict = {}
    for d in items:
        for k, v in d.items():
            _add(acc, k, v)
    return acc


def gs_bracket(basis: GSBasis, x, y) -> dict:
    """[X, Y] for GS generators (or their indices) as a linear combination.

    Dual generators are expanded through their Cartan coefficients.
    """
    g = basis.generators[x] if isinstance(x, int) else x
    h = basis.generators[y] if isinstance(y, int) else y
    key = ("br", g, h)
    if key in basis._cache:
        return basis._cache[key]
    if g.kind == "dual":
        out = _combine(_scale(gs_bracket(basis, i, h), c) for i, c in basis.dual_coeffs[g].items())
    elif h.kind == "dual":
        out = _combine(_scale(gs_bracket(basis, g, i), c) for i, c in basis.dual_coeffs[h].items())
    elif g.kind == "root" and h.kind == "root":
        out = _bracket_root_root(basis, g, h)
    elif g.kind == "cartan" and h.kind == "root":
        out = _bracket_cartan_root(basis, g, h)
    elif g.kind == "root" and h.kind == "cartan":
        out = _scale(_bracket_cartan_root(basis, h, g), -1)
    else:
        out = {}
    basis._cache[key] = out
    return out


def adjoint_phases(basis: GSBasis, u) -> dict:
    """Scalars by which Ad_Λ and Ad_Q act on each generator.

    Returns ``{generator: (phase_lambda, phase_q)}`` with Λ = Λ_0·e(−u):
    Ad_Λ 𝔱_β^c = e(−⟨u,β⟩ − c/l)𝔱_β^c, Ad_Q 𝔱_β^c = e(⟨κ,β⟩)𝔱_β^c and
    e(−c/l), 1 on the Cartan family.
    """
    tw = basis.twist
    uvec = tw.h0_vector(u)
    out = {}
    for g in basis.generators + basis.duals:
        if g.kind == "root":
            beta = tw.orbits[g.orbit][0]
            lam = np.exp(2j * np.pi * (-np.dot(uvec, beta) - g.index / tw.l))
            q = np.exp(2j * np.pi * float(tw.kappa_pairing(beta)))
        else:
            lam = np.exp(-2j * np.pi * g.index / tw.l)
            q = 1.0 + 0j
        out[g] = (complex(lam), complex(q))
    return out


def root_terms(basis: GSBasis):
    """(β, k, 𝔱_β^k, 𝔱_{-β}^{-k}) for every orbit representative β and k ∈ J."""
    key = ("root_terms",)
    if key not in basis._cache:
        tw = basis.twist
        out = []
        for g, m in zip(basis.generators, basis.matrices):
            if g.kind != "root":
                continue
            beta = tw.orbits[g.orbit][0]
            out.append((beta, g.index, m, basis.root_generator_matrix(neg(beta), -g.index)))
        basis._cache[key] = out
    return basis._cache[key]


def cartan_terms(basis: GSBasis):
    """(c, [(𝔖_ν^c, 𝔥_ν^{-c})]) for each residue c."""
    key = ("cartan_terms",)
    if key not in basis._cache:
        tw = basis.twist
        out = []
        for c in range(tw.l):
            pairs = []
            for d in basis.duals:
                if d.index != c:
                    continue
                partner = GSGenerator("cartan", d.orbit, (-c) % tw.l)
                pairs.append((basis.dual_matrix(d), basis.matrix(partner)))
            out.append((c, pairs))
        basis._cache[key] = out
    return basis._cache[key]


def casimir_split(basis: GSBasis, rep_a: Representation, rep_c: Representation) -> np.ndarray:
    """Split Casimir C2 as a matrix on V_a ⊗ V_c.

    C2 = Σ_β Σ_k ½|β|² 𝔱_β^k⊗𝔱_{-β}^{-k} + Σ_c Σ_ν 𝔖_ν^c⊗𝔥_ν^{-c}, the first sum
    running over orbit representatives.
    """
    out = np.zeros((rep_a.dim * rep_c.dim,) * 2, dtype=complex)
    for beta, k, x, y in root_terms(basis):
        out += 0.5 * dot(beta, beta) * np.kron(rep_a.act(x), rep_c.act(y))
    for c, pairs in cartan_terms(basis):
        for x, y in pairs:
            out += np.kron(rep_a.act(x), rep_c.act(y))
    return out
