"""KZB connection on V_1 ⊗ ... ⊗ V_n, its curvature, and parallel transport.

    ∇_a = ∂_{z_a} + ∂̂^a + R_a,            R_a = Σ_{c≠a} r^{ac}(z_a − z_c),
    ∇_τ = 2πi∂_τ + Δ + T,                T = ½Σ_{b≠d} f^{bd}(z_b − z_d) + ½Σ_c f^{cc},

with ∂̂^a = s Σ_i ρ_a(v^i) ∂_{u_i} and Δ = (s/2) Σ_{ij} (v^i, v^j) ∂_{u_i}∂_{u_j},
where v^i is the trace-dual basis to the u-coordinate directions.  The
diagonal block f^{cc} is the regular part of f^{ac} as the two sites merge:
root terms carry −E2(x) = −℘(x) − 2η1 and the Cartan layer c carries
−E2(c/l) (−2η1 for c = 0).

Curvatures are returned as operator polynomials in ∂_u: a zeroth-order
matrix and one matrix per ∂_{u_i}.  Flatness is tested after compressing
both to the joint kernel of the total h̃_0 action.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .elliptic import lattice_distance
from .lie import Representation
from .rmatrix import ModuliPoint, RMatrix
from .tensor import commutator, embed, operator_norm

__all__ = [
    "CurvatureReport",
    "FirstOrderOperator",
    "KZBSystem",
    "MarkedConfig",
    "RegimeError",
    "TransportError",
    "WeightZeroProjector",
    "build_nabla_a",
    "build_nabla_tau",
    "curvature_ztau",
    "curvature_zz",
    "monodromy",
    "transport",
    "weight_zero_projector",
]


class RegimeError(ValueError):
    """Transport requested with dynamical parameters present."""


class TransportError(RuntimeError):
    """Step size collapsed near a singularity."""


@dataclass(frozen=True)
class MarkedConfig:
    z: tuple[complex, ...]
    reps: tuple[Representation, ...]
    point: ModuliPoint
    min_separation: float = 1e-4

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(complex(x) for x in self.z))
        object.__setattr__(self, "reps", tuple(self.reps))
        if len(self.z) != len(self.reps):
            raise ValueError("one representation per marked point is required")
        for a in range(len(self.z)):
            for b in range(a + 1, len(self.z)):
                if lattice_distance(self.z[a] - self.z[b], self.point.tau) < self.min_separation:
                    raise ValueError(f"marked points {a} and {b} coincide modulo the lattice")

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(r.dim for r in self.reps)

    def moved(self, a: int | None = None, za: complex | None = None, tau: complex | None = None) -> "MarkedConfig":
        z = list(self.z)
        if a is not None:
            z[a] = za
        point = self.point if tau is None else ModuliPoint(self.point.u, tau)
        return MarkedConfig(tuple(z), self.reps, point, self.min_separation)


@dataclass
class FirstOrderOperator:
    """Differential operator zeroth + Σ du_i ∂_{u_i} + Σ dz_a ∂_{z_a} + dtau ∂_τ + Σ duu_ij ∂_i∂_j."""

    zeroth: np.ndarray
    du_coeffs: list[np.ndarray]
    dz_coeffs: dict = field(default_factory=dict)
    dtau_coeff: complex = 0.0
    duu_coeffs: dict = field(default_factory=dict)


@dataclass
class WeightZeroProjector:
    matrix: np.ndarray

    @property
    def rank(self) -> int:
        return int(round(np.real(np.trace(self.matrix))))

    def compress(self, m: np.ndarray) -> np.ndarray:
        return self.matrix @ m @ self.matrix


@dataclass
class CurvatureReport:
    zeroth: np.ndarray
    du_linear: list[np.ndarray]
    norm_zeroth: float
    norm_du: float
    projected_zeroth: float
    projected_du: float

    @property
    def worst(self) -> float:
        return max(self.projected_zeroth, self.projected_du)


_LINEAR = ("du_r", "duu_r", "du_f", "du_f_diag")


class KZBSystem:
    """Connection data for one set of representations at the marked points.

    The embedded tensor stacks depend only on the representations, so one
    system serves every configuration with the same ``reps``.
    """

    def __init__(self, ev: RMatrix, reps: Sequence[Representation]):
        self.ev = ev
        self.reps = tuple(reps)
        self.dims = tuple(r.dim for r in self.reps)
        self.n = len(self.reps)
        self.dim = int(np.prod(self.dims))
        self._pair: dict = {}
        self._diag: dict = {}
        self._dyn = [
            [embed(g, self.dims, (a,)) for g in ev.dynamical_generators(rep)] for a, rep in enumerate(self.reps)
        ]

    # --------------------------------------------------------------- blocks
    def _pair_stacks(self, a: int, c: int):
        key = (a, c)
        if key not in self._pair:
            st = self.ev.stacks(self.reps[a], self.reps[c])
            root = np.array([embed(m, self.dims, (a, c)) for m in st.root]).reshape(-1, self.dim, self.dim)
            cart = np.array([embed(m, self.dims, (a, c)) for m in st.cartan])
            delta = embed(self.ev.delta_r(self.reps[a], self.reps[c]), self.dims, (a, c))
            self._pair[key] = (root, cart, delta)
        return self._pair[key]

    def _diag_stacks(self, a: int):
        if a not in self._diag:
            st = self.ev.diag_stacks(self.reps[a])
            root = np.array([embed(m, self.dims, (a,)) for m in st.root]).reshape(-1, self.dim, self.dim)
            cart = np.array([embed(m, self.dims, (a,)) for m in st.cartan])
            self._diag[a] = (root, cart)
        return self._diag[a]

    def pair(self, kind: str, cfg: MarkedConfig, a: int, c: int, i=None, j=None) -> np.ndarray:
        """Embedded two-site tensor of the given kind at z_a − z_c."""
        root, cart, delta = self._pair_stacks(a, c)
        kr, kc = self.ev.kernels(kind, cfg.point, cfg.z[a] - cfg.z[c], i, j)
        out = np.tensordot(kr, root, axes=1) if len(kr) else np.zeros((self.dim, self.dim), dtype=complex)
        if kind not in _LINEAR:
            out = out + np.tensordot(kc, cart, axes=1)
        if kind == "r":
            out = out + delta
        return out

    def diag(self, kind: str, cfg: MarkedConfig, a: int, i=None) -> np.ndarray:
        root, cart = self._diag_stacks(a)
        kr, kc = self.ev.kernels(kind, cfg.point, 0.0, i)
        out = np.tensordot(kr, root, axes=1) if len(kr) else np.zeros((self.dim, self.dim), dtype=complex)
        if kind not in _LINEAR:
            out = out + np.tensordot(kc, cart, axes=1)
        return out

    def dynamical(self, a: int) -> list[np.ndarray]:
        """Matrices multiplying ∂_{u_i} in ∂̂^a."""
        return self._dyn[a]

    # --------------------------------------------------------- connection
    def R(self, cfg: MarkedConfig, a: int, kind: str = "r", i=None, j=None) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c in range(self.n):
            if c != a:
                out += self.pair(kind, cfg, a, c, i, j)
        return out

    def T(self, cfg: MarkedConfig, offdiag: str = "f", diag: str | None = "f_diag", i=None) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for b in range(self.n):
            for d in range(self.n):
                if b != d:
                    out += 0.5 * self.pair(offdiag, cfg, b, d, i)
            if diag is not None:
                out += 0.5 * self.diag(diag, cfg, b, i)
        return out

    def dz_T(self, cfg: MarkedConfig, a: int) -> np.ndarray:
        """∂_{z_a} T."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for d in range(self.n):
            if d != a:
                out += 0.5 * self.pair("dz_f", cfg, a, d)
                out -= 0.5 * self.pair("dz_f", cfg, d, a)
        return out

    def laplacian_metric(self) -> np.ndarray:
        return 0.5 * self.ev.dynamical_sign * self.ev.laplacian_metric()

    def nabla_a(self, cfg: MarkedConfig, a: int) -> FirstOrderOperator:
        eye = np.eye(self.dim, dtype=complex)
        return FirstOrderOperator(self.R(cfg, a), list(self.dynamical(a)), {a: eye})

    def nabla_tau(self, cfg: MarkedConfig) -> FirstOrderOperator:
        eye = np.eye(self.dim, dtype=complex)
        g = self.laplacian_metric()
        duu = {(i, j): g[i, j] * eye for i in range(len(g)) for j in range(len(g))}
        return FirstOrderOperator(self.T(cfg), [], {}, 2j * np.pi, duu)

    # ------------------------------------------------------------ flatness
    def projector(self) -> WeightZeroProjector:
        tw = self.ev.twist
        if tw.dim_h0 == 0:
            return WeightZeroProjector(np.eye(self.dim, dtype=complex))
        rows = []
        for b in tw.inv_coroots:
            x = np.diag(np.asarray(b, dtype=complex))
            rows.append(sum(embed(rep.act(x), self.dims, (a,)) for a, rep in enumerate(self.reps)))
        stacked = np.vstack(rows)
        _, s, vh = np.linalg.svd(stacked)
        tol = 1e-10 * max(1.0, s[0] if s.size else 1.0)
        null = vh[np.sum(s > tol):].conj().T
        return WeightZeroProjector(null @ null.conj().T)

    def _report(self, zeroth, linear) -> CurvatureReport:
        p = self.projector()
        pz = operator_norm(p.compress(zeroth))
        pl = max((operator_norm(p.compress(m)) for m in linear), default=0.0)
        return CurvatureReport(
            zeroth,
            linear,
            operator_norm(zeroth),
            max((operator_norm(m) for m in linear), default=0.0),
            pz,
            pl,
        )

    def curvature_zz(self, cfg: MarkedConfig, a: int, b: int) -> CurvatureReport:
        """[∇_a, ∇_b] as zeroth-order matrix plus ∂_u coefficients."""
        if a == b:
            raise ValueError("curvature_zz needs two distinct marked points")
        ra, rb = self.R(cfg, a), self.R(cfg, b)
        # ∂_{z_a} R_b = −r'^{ba}(z_b − z_a), ∂_{z_b} R_a = −r'^{ab}(z_a − z_b)
        zeroth = -self.pair("dz_r", cfg, b, a) + self.pair("dz_r", cfg, a, b)
        zeroth = zeroth + commutator(ra, rb)
        da, db = self.dynamical(a), self.dynamical(b)
        linear = []
        for i in range(len(da)):
            dra = self.R(cfg, a, "du_r", i)
            drb = self.R(cfg, b, "du_r", i)
            zeroth = zeroth + da[i] @ drb - db[i] @ dra
            linear.append(commutator(da[i], rb) - commutator(db[i], ra))
        return self._report(zeroth, linear)

    def curvature_ztau(self, cfg: MarkedConfig, a: int) -> CurvatureReport:
        """[∇_a, ∇_τ] as zeroth-order matrix plus ∂_u coefficients."""
        ra = self.R(cfg, a)
        t = self.T(cfg)
        zeroth = self.dz_T(cfg, a) - 2j * np.pi * self.R(cfg, a, "dtau_r") + commutator(ra, t)
        da = self.dynamical(a)
        g = self.laplacian_metric()
        m = len(da)
        dr = [self.R(cfg, a, "du_r", i) for i in range(m)]
        linear = []
        for i in range(m):
            zeroth = zeroth + da[i] @ self.T(cfg, "du_f", "du_f_diag", i)
            for j in range(m):
                if g[i, j] != 0:
                    zeroth = zeroth - g[i, j] * self.R(cfg, a, "duu_r", i, j)
        for j in range(m):
            lin = commutator(da[j], t)
            for i in range(m):
                lin = lin - 2 * g[i, j] * dr[i]
            linear.append(lin)
        return self._report(zeroth, linear)

    # ----------------------------------------------------------- transport
    def _rhs(self, cfg: MarkedConfig, which, w: complex) -> np.ndarray:
        if which == "tau":
            return -self.T(cfg.moved(tau=w)) / (2j * np.pi)
        return -self.R(cfg.moved(which, w), which)

    def transport(
        self,
        cfg: MarkedConfig,
        which,
        path: Sequence[complex],
        f0: np.ndarray,
        steps: int | None = None,
        rtol: float = 1e-10,
        min_step: float = 1e-9,
    ) -> np.ndarray:
        """Solve ∇F = 0 along a polyline in z_a (``which`` = a) or τ (``which`` = "tau").

        With ``steps`` given, every segment uses that many classical RK4 steps;
        otherwise the step is controlled by step doubling to relative
        tolerance ``rtol``.
        """
        if self.ev.twist.dim_h0 != 0:
            raise RegimeError("transport needs h̃_0 = 0 (no dynamical parameters)")
        f = np.array(f0, dtype=complex)
        path = [complex(p) for p in path]
        if len(path) < 2:
            return f
        start = cfg.point.tau if which == "tau" else cfg.z[which]
        if abs(path[0] - start) > 1e-12:
            raise ValueError("path must start at the current position")
        for w0, w1 in zip(path[:-1], path[1:]):
            f = self._segment(cfg, which, w0, w1, f, steps, rtol, min_step)
        return f

    def _rk4(self, cfg, which, w0, dw, h, f):
        k1 = dw * (self._rhs(cfg, which, w0) @ f)
        k2 = dw * (self._rhs(cfg, which, w0 + 0.5 * h * dw) @ (f + 0.5 * h * k1))
        k3 = dw * (self._rhs(cfg, which, w0 + 0.5 * h * dw) @ (f + 0.5 * h * k2))
        k4 = dw * (self._rhs(cfg, which, w0 + h * dw) @ (f + h * k3))
        return f + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    def _segment(self, cfg, which, w0, w1, f, steps, rtol, min_step):
        dw = w1 - w0
        if dw == 0:
            return f
        if steps is not None:
            h = 1.0 / steps
            for s in range(steps):
                f = self._rk4(cfg, which, w0 + s * h * dw, dw, h, f)
            return f
        t, h = 0.0, 0.05
        while t < 1.0:
            h = min(h, 1.0 - t)
            full = self._rk4(cfg, which, w0 + t * dw, dw, h, f)
            half = self._rk4(cfg, which, w0 + t * dw, dw, h / 2, f)
            half = self._rk4(cfg, which, w0 + (t + h / 2) * dw, dw, h / 2, half)
            err = np.max(np.abs(half - full)) / 15.0
            scale = max(1.0, float(np.max(np.abs(half))))
            if err <= rtol * scale:
                f = half + (half - full) / 15.0
                t += h
            if h * abs(dw) < min_step:
                raise TransportError(f"step size collapsed at {w0 + t * dw}")
            ratio = (rtol * scale / err) ** 0.2 if err > 0 else 4.0
            h *= min(4.0, max(0.2, 0.9 * ratio))
        return f


# ------------------------------------------------------------------ API
def _system(ev: RMatrix, cfg: MarkedConfig) -> KZBSystem:
    key = ("kzb", tuple(r.name for r in cfg.reps))
    sys_ = ev._stacks.get(key)
    if sys_ is None:
        sys_ = KZBSystem(ev, cfg.reps)
        ev._stacks[key] = sys_
    return sys_


def build_nabla_a(ev: RMatrix, cfg: MarkedConfig, a: int) -> FirstOrderOperator:
    return _system(ev, cfg).nabla_a(cfg, a)


def build_nabla_tau(ev: RMatrix, cfg: MarkedConfig) -> FirstOrderOperator:
    return _system(ev, cfg).nabla_tau(cfg)


def curvature_zz(ev: RMatrix, cfg: MarkedConfig, a: int, b: int) -> CurvatureReport:
    return _system(ev, cfg).curvature_zz(cfg, a, b)


def curvature_ztau(ev: RMatrix, cfg: MarkedConfig, a: int) -> CurvatureReport:
    return _system(ev, cfg).curvature_ztau(cfg, a)


def weight_zero_projector(ev: RMatrix, cfg: MarkedConfig) -> WeightZeroProjector:
    return _system(ev, cfg).projector()


def transport(ev: RMatrix, cfg: MarkedConfig, which, path, f0, **kw) -> np.ndarray:
    return _system(ev, cfg).transport(cfg, which, path, f0, **kw)


def monodromy(ev: RMatrix, cfg: MarkedConfig, which, loop, **kw) -> np.ndarray:
    """Transport of the identity around a closed polyline."""
    loop = list(loop)
    if abs(loop[0] - loop[-1]) > 1e-12:
        raise ValueError("monodromy loop must be closed")
    sys_ = _system(ev, cfg)
    return sys_.transport(cfg, which, loop, np.eye(sys_.dim, dtype=complex), **kw)
