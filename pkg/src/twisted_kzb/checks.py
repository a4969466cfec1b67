"""Catalog of verification checks and the runner behind ``verify``.

A check has an id ``<suite>.<name>``, an anchor string locating the
statement it tests, a default tolerance and an evaluator.  Evaluators are
generators yielding ``(params, residual)`` pairs; the runner times each
yield, compares against the tolerance and builds one record per pair.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
import zlib
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator

import numpy as np

from . import elliptic as el
from .config import RunConfig, format_complex
from .felder import compare_with_felder
from .gs_basis import adjoint_phases, build_gs, casimir_split, gs_bracket
from .kzb import MarkedConfig, curvature_ztau, curvature_zz, monodromy, transport
from .lie import build_root_system, build_twist, make_rep
from .rmatrix import (
    ModuliPoint,
    RMatrix,
    apply_dynamical_twist,
    cdybe_residual,
    quasiperiodicity_residual,
    residue_residual,
    sample_marks,
    sample_point,
    unitarity_residual,
    zero_weight_residual,
)
from .tensor import commutator

__all__ = ["CATALOG", "Check", "RunContext", "catalog_lines", "run_checks", "param_hash"]

Measurement = tuple[dict, float]


@dataclass(frozen=True)
class Check:
    id: str
    anchor: str
    tolerance: float
    evaluate: Callable[["RunContext"], Iterator[Measurement]]

    @property
    def suite(self) -> str:
        return self.id.split(".", 1)[0]


class RunContext:
    """Lazily built objects shared by the checks of one run."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self._memo: dict = {}

    def rng(self, name: str) -> np.random.Generator:
        """Generator seeded by the run seed and ``name``, independent of suite order."""
        return np.random.default_rng([self.cfg.seed, zlib.crc32(name.encode())])

    def memo(self, key, fn):
        if key not in self._memo:
            self._memo[key] = fn()
        return self._memo[key]

    @cached_property
    def rs(self):
        return build_root_system(self.cfg.series, self.cfg.rank)

    @cached_property
    def twist(self):
        return build_twist(self.rs, self.cfg.l, self.cfg.j)

    @cached_property
    def basis(self):
        return build_gs(self.twist)

    @cached_property
    def ev(self) -> RMatrix:
        return RMatrix(self.basis, convention=self.cfg.coordinates, dual_reading=self.cfg.dual_reading)

    @cached_property
    def defining(self):
        return make_rep(self.rs, "V")

    @cached_property
    def reps(self) -> tuple:
        cache = {}
        return tuple(cache.setdefault(name, make_rep(self.rs, name)) for name in self.cfg.reps)

    @cached_property
    def pair_reps(self) -> tuple:
        reps = self.reps
        return (reps[0], reps[1 % len(reps)])

    @cached_property
    def triple_reps(self) -> tuple:
        reps = self.reps
        return tuple(reps[i % len(reps)] for i in range(3))

    @cached_property
    def points(self) -> list[ModuliPoint]:
        rng = self.rng("points")
        return [sample_point(self.ev, rng, self.cfg.tau) for _ in range(self.cfg.samples)]

    def z_samples(self, name: str, n: int) -> list[tuple]:
        rng = self.rng(name)
        return [sample_marks(rng, n, self.cfg.tau) for _ in range(self.cfg.samples)]

    @cached_property
    def positions(self) -> tuple:
        if self.cfg.positions is not None:
            return self.cfg.positions
        return sample_marks(self.rng("marked"), self.cfg.n, self.cfg.tau, min_distance=0.2)

    def marked(self, point: ModuliPoint) -> MarkedConfig:
        return MarkedConfig(self.positions, self.reps, point)


def _u_text(point: ModuliPoint) -> list[str]:
    return [format_complex(x) for x in point.u]


def _max(x) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


# ------------------------------------------------------------- elliptic
def _identities(ctx: RunContext) -> dict:
    spec = el.IdentitySample(taus=(ctx.cfg.tau,), ls=(ctx.cfg.l,), n_samples=64, seed=ctx.cfg.seed, series_tolerance=1e-14)
    return ctx.memo("identities", lambda: el.identity_residuals(spec))


def _identity_check(name: str):
    def evaluate(ctx: RunContext):
        yield {"tau": format_complex(ctx.cfg.tau), "l": ctx.cfg.l, "samples": 64}, _identities(ctx)[name]

    return evaluate


# ------------------------------------------------------------------- gs
def _generators(ctx: RunContext):
    b = ctx.basis
    return list(range(b.dim))


def gs_bracket_check(ctx: RunContext):
    b = ctx.basis
    mats = b.matrices
    worst = 0.0
    for i in _generators(ctx):
        for j in _generators(ctx):
            res = gs_bracket(b, i, j)
            lhs = commutator(mats[i], mats[j])
            rhs = sum((c * mats[k] for k, c in res.items()), np.zeros_like(lhs))
            worst = max(worst, _max(lhs - rhs))
    yield {"algebra": ctx.cfg.algebra, "l": ctx.cfg.l, "pairs": b.dim**2}, worst


def gs_duality_check(ctx: RunContext):
    b = ctx.basis
    worst = 0.0
    for d in b.duals:
        s = b.dual_matrix(d)
        for g, h in zip(b.generators, b.matrices):
            if g.kind != "cartan":
                continue
            want = 1.0 if (g.orbit == d.orbit and (g.index + d.index) % b.l == 0) else 0.0
            worst = max(worst, abs(np.trace(s @ h) - want))
    yield {"algebra": ctx.cfg.algebra, "l": ctx.cfg.l}, worst


def gs_grading_check(ctx: RunContext):
    b = ctx.basis
    bad = 0.0
    for i in _generators(ctx):
        for j in _generators(ctx):
            grade = (b.generators[i].grade + b.generators[j].grade) % b.l
            for k, c in gs_bracket(b, i, j).items():
                if b.generators[k].grade % b.l != grade:
                    bad += abs(c)
    yield {"algebra": ctx.cfg.algebra, "l": ctx.cfg.l}, bad


def gs_phases_check(ctx: RunContext):
    b = ctx.basis
    tw = ctx.twist
    q = tw.q_matrix()
    qi = np.linalg.inv(q)
    for idx, point in enumerate(ctx.points):
        u = ctx.ev.coroot_coords(point)
        lam = tw.lambda_matrix(u)
        lami = np.linalg.inv(lam)
        phases = adjoint_phases(b, u)
        worst = 0.0
        for g in b.generators + b.duals:
            m = b.matrix(g)
            pl, pq = phases[g]
            worst = max(worst, _max(lam @ m @ lami - pl * m), _max(q @ m @ qi - pq * m))
        yield {"sample": idx, "u": _u_text(point)}, worst


def gs_casimir_check(ctx: RunContext):
    b = ctx.basis
    ra, rc = ctx.pair_reps
    c2 = casimir_split(b, ra, rc)
    worst = 0.0
    for x in b.matrices:
        tot = np.kron(ra.act(x), np.eye(rc.dim)) + np.kron(np.eye(ra.dim), rc.act(x))
        worst = max(worst, _max(commutator(c2, tot)))
    yield {"reps": [ra.name, rc.name]}, worst


# ---------------------------------------------------------------- twist
def twist_commutation_check(ctx: RunContext):
    tw = ctx.twist
    q, lam = tw.q_matrix(), tw.lambda0_matrix()
    m = q @ lam @ np.linalg.inv(q) @ np.linalg.inv(lam)
    # ζ = exp(2πiϖ^∨) acts on the defining representation as e(−1/l)
    zeta_j = np.exp(-2j * np.pi * tw.j / tw.l)
    yield {"algebra": ctx.cfg.algebra, "l": tw.l, "j": tw.j}, _max(m - zeta_j * np.eye(tw.n))


def twist_isometry_check(ctx: RunContext):
    tw = ctx.twist
    rs = tw.rs
    bad = 0
    for a in rs.roots:
        if tw.lam(a, tw.l) != a:
            bad += 1
        for b in rs.roots:
            if sum(x * y for x, y in zip(tw.lam(a, 1), tw.lam(b, 1))) != sum(x * y for x, y in zip(a, b)):
                bad += 1
    yield {"algebra": ctx.cfg.algebra, "l": tw.l}, float(bad)


def twist_center_check(ctx: RunContext):
    tw = ctx.twist
    w = np.array([float(x) for x in tw.coweight]) if tw.coweight else np.zeros(tw.n)
    yield {"algebra": ctx.cfg.algebra, "l": tw.l}, _max(np.exp(2j * np.pi * tw.l * w) - 1.0)


# -------------------------------------------------------------- rmatrix
def _two_site(ctx: RunContext, fn):
    zs = ctx.z_samples("rmatrix", 2)
    for idx, (point, (za, zb)) in enumerate(zip(ctx.points, zs)):
        z = za - zb
        yield {"sample": idx, "u": _u_text(point), "z": format_complex(z)}, fn(point, z)


def residue_check(ctx: RunContext):
    for idx, point in enumerate(ctx.points):
        yield {"sample": idx, "u": _u_text(point)}, residue_residual(ctx.ev, ctx.pair_reps, point)


def unitarity_check(ctx: RunContext):
    yield from _two_site(ctx, lambda p, z: unitarity_residual(ctx.ev, ctx.pair_reps, p, z))


def zero_weight_check(ctx: RunContext):
    yield from _two_site(ctx, lambda p, z: zero_weight_residual(ctx.ev, ctx.pair_reps, p, z))


# ---------------------------------------------------- quasi-periodicity
def _qp_check(key: str):
    def evaluate(ctx: RunContext):
        zs = ctx.z_samples("quasiperiodicity", 2)
        for idx, (point, (za, zb)) in enumerate(zip(ctx.points, zs)):
            z = za - zb
            res = ctx.memo(("qp", idx), lambda: quasiperiodicity_residual(ctx.ev, ctx.pair_reps, point, z))
            yield {"sample": idx, "u": _u_text(point), "z": format_complex(z)}, res[key]

    return evaluate


# ---------------------------------------------------------------- cdybe
def _cdybe(ctx: RunContext, ev: RMatrix, name: str):
    zs = ctx.z_samples(name, 3)
    for idx, (point, z) in enumerate(zip(ctx.points, zs)):
        params = {"sample": idx, "u": _u_text(point), "z": [format_complex(x) for x in z]}
        params["reps"] = [r.name for r in ctx.triple_reps]
        yield params, cdybe_residual(ev, ctx.triple_reps, point, *z)


def cdybe_check(ctx: RunContext):
    yield from _cdybe(ctx, ctx.ev, "cdybe")


def cdybe_twisted_check(ctx: RunContext):
    d = ctx.ev.dim_u
    a = ctx.rng("twist_matrix").normal(size=(d, d))
    ev = apply_dynamical_twist(ctx.ev, a - a.T)
    yield from _cdybe(ctx, ev, "cdybe")


# --------------------------------------------------------------- felder
def felder_check(ctx: RunContext):
    if ctx.cfg.l != 1:
        return
    v = ctx.defining
    zs = ctx.z_samples("felder", 2)
    for idx, (point, (za, zb)) in enumerate(zip(ctx.points, zs)):
        cmp = compare_with_felder(
            lambda z: ctx.ev.r(v, v, point, z), ctx.twist.n, ctx.ev.u_vector(point), point.tau, [za, zb]
        )
        yield {"sample": idx, "u": _u_text(point), "z": [format_complex(za), format_complex(zb)]}, cmp.worst


# ------------------------------------------------------------ curvature
def curvature_zz_check(ctx: RunContext):
    n = ctx.cfg.n
    for idx, point in enumerate(ctx.points):
        cfg = ctx.marked(point)
        for a in range(n):
            for b in range(a + 1, n):
                rep = curvature_zz(ctx.ev, cfg, a, b)
                yield {"sample": idx, "u": _u_text(point), "a": a, "b": b}, rep.worst


def curvature_ztau_check(ctx: RunContext):
    for idx, point in enumerate(ctx.points):
        cfg = ctx.marked(point)
        for a in range(ctx.cfg.n):
            rep = curvature_ztau(ctx.ev, cfg, a)
            yield {"sample": idx, "u": _u_text(point), "a": a}, rep.worst


# ------------------------------------------------------------ transport
def transport_geometry(ctx: RunContext):
    """Base configuration and radius of a disc around z_1 free of other points."""
    cfg = ctx.marked(ModuliPoint((), ctx.cfg.tau))
    z = cfg.z
    tau = ctx.cfg.tau
    gaps = [float(el.lattice_distance(z[0] - z[c], tau)) for c in range(1, len(z))]
    # the disc must also avoid the lattice translates of z_1 itself
    radius = min(gaps + [1.0, tau.imag, abs(1 + tau), abs(1 - tau)])
    return cfg, radius


def initial_vector(ctx: RunContext, dim: int) -> np.ndarray:
    f0 = ctx.cfg.f0
    if f0.startswith("e"):
        k = int(f0[1:])
        if not 0 <= k < dim:
            raise ValueError(f"basis vector index {k} out of range for dimension {dim}")
        out = np.zeros(dim, dtype=complex)
        out[k] = 1.0
        return out
    rng = ctx.rng("f0")
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _transport_ready(ctx: RunContext) -> bool:
    return ctx.twist.dim_h0 == 0 and ctx.cfg.n >= 2


def _homotopic_paths(ctx: RunContext):
    cfg, radius = transport_geometry(ctx)
    z0 = cfg.z[0]
    # two paths from a base point on the disc boundary to the opposite side
    base = z0 + 0.25 * radius
    cfg = cfg.moved(0, base)
    end = z0 + 0.25 * radius * 1j
    via = z0 + 0.35 * radius * (1 + 1j)
    return cfg, [base, end], [base, via, end]


def transport_homotopy_check(ctx: RunContext):
    if not _transport_ready(ctx):
        return
    cfg, p1, p2 = _homotopic_paths(ctx)
    f0 = initial_vector(ctx, int(np.prod(cfg.dims)))
    f1 = transport(ctx.ev, cfg, 0, p1, f0, rtol=ctx.cfg.rtol)
    f2 = transport(ctx.ev, cfg, 0, p2, f0, rtol=ctx.cfg.rtol)
    yield {"paths": [[format_complex(p) for p in p1], [format_complex(p) for p in p2]]}, float(
        np.linalg.norm(f1 - f2) / np.linalg.norm(f0)
    )


def transport_convergence_check(ctx: RunContext):
    if not _transport_ready(ctx):
        return
    cfg, _, path = _homotopic_paths(ctx)
    f0 = initial_vector(ctx, int(np.prod(cfg.dims)))
    ref = transport(ctx.ev, cfg, 0, path, f0, rtol=1e-13)
    errs = [np.linalg.norm(transport(ctx.ev, cfg, 0, path, f0, steps=s) - ref) for s in (4, 8, 16)]
    ratio = max(errs[1] / errs[0], errs[2] / errs[1])
    yield {"steps": [4, 8, 16], "errors": [float(e) for e in errs]}, float(ratio)


def _loops(ctx: RunContext):
    cfg, radius = transport_geometry(ctx)
    z0 = cfg.z[0]
    r = 0.3 * radius
    circle = [z0 + r * np.exp(2j * np.pi * k / 48) for k in range(48)] + [z0 + r]
    s = 0.45 * radius
    square = [z0 + r, z0 + s, z0 + s + s * 1j, z0 - s + s * 1j, z0 - s - s * 1j, z0 + s - s * 1j, z0 + s, z0 + r]
    # the moving point circles z_1's old position, so place z_1 on the loop and
    # move the second point into the centre
    z = list(cfg.z)
    z[0], z[1] = z0 + r, z0
    return MarkedConfig(tuple(z), cfg.reps, cfg.point), circle, square


def _monodromies(ctx: RunContext):
    def compute():
        cfg, circle, square = _loops(ctx)
        m1 = monodromy(ctx.ev, cfg, 0, circle, rtol=ctx.cfg.rtol)
        m2 = monodromy(ctx.ev, cfg, 0, square, rtol=ctx.cfg.rtol)
        return cfg, m1, m2

    return ctx.memo("monodromy", compute)


def transport_monodromy_check(ctx: RunContext):
    if not _transport_ready(ctx):
        return
    cfg, m1, m2 = _monodromies(ctx)
    yield {"loops": ["circle", "square"], "point": format_complex(cfg.z[1])}, _max(m1 - m2)


def transport_symmetry_check(ctx: RunContext):
    if not _transport_ready(ctx):
        return
    cfg, m1, _ = _monodromies(ctx)
    tw = ctx.twist
    worst = 0.0
    for name, g in (("Q", tw.q_matrix()), ("Lambda0", tw.lambda0_matrix())):
        big = np.ones((1, 1), dtype=complex)
        for rep in cfg.reps:
            big = np.kron(big, rep.group(g))
        worst = max(worst, _max(commutator(m1, big)))
    yield {"generators": ["Q", "Lambda0"]}, worst


# -------------------------------------------------------------- catalog
_B_MORE = '(B.21)–(B.23), "More Fay identities:"'
_QP_Z = '(4.31) "Behavior under the shifts by the generators"'
_QP_U = '(4.34)/(4.35), "In all cases the adjoint actions"'
_LEMMA = '(4.33), Lemma 1, "has the form"'
_TRANSPORT = '(4.41), "we study the following system"'

CATALOG: tuple[Check, ...] = tuple(
    sorted(
        [
            Check("elliptic.theta_quasi_periodicity", 'Appendix B, "The basic function is the theta-function"', 1e-9, _identity_check("theta_quasi_periodicity")),
            Check("elliptic.phi_symmetry", '(B.1), "Define the ration of the theta-functions"', 1e-9, _identity_check("phi_symmetry")),
            Check("elliptic.phi_quasi_periodicity", '(B.3)/(4.38), "φ_α^k(u, z) = e^{2πi⟨κ,α⟩z} φ(⟨u+κτ,α⟩ + k/l, z)"', 1e-9, _identity_check("phi_quasi_periodicity")),
            Check("elliptic.heat", '(B.18), "this identity takes the form"', 1e-9, _identity_check("heat")),
            Check("elliptic.fay", '(B.19), "Fay identity:"', 1e-9, _identity_check("fay")),
            Check("elliptic.fay_degenerate", '(B.20), "Taking the limit m = 0"', 1e-9, _identity_check("fay_degenerate")),
            Check("elliptic.fay_diag", _B_MORE, 1e-9, _identity_check("fay_diag")),
            Check("elliptic.fay_opposite", _B_MORE, 1e-9, _identity_check("fay_opposite")),
            Check("elliptic.fay_rho", _B_MORE, 1e-9, _identity_check("fay_rho")),
            Check("gs.bracket", 'Appendix A, "Commutation relations in the GS basis:"', 1e-12, gs_bracket_check),
            Check("gs.duality", '(A.5), "The dual basis is generated"', 1e-13, gs_duality_check),
            Check("gs.grading", '(A.1), "l-periodic gradation"', 0.0, gs_grading_check),
            Check("gs.adjoint_phases", '(A.6)–(A.8), "action of the adjoint operators"', 1e-12, gs_phases_check),
            Check("gs.casimir_invariance", '§4.5.1 item 1, "Res|_{z=0} r(z) = C_2"', 1e-12, gs_casimir_check),
            Check("twist.commutation", '(4.6), "QΛ_jQ^{−1}Λ_j^{−1} = ζ^j Id"', 1e-12, twist_commutation_check),
            Check("twist.isometry", '§4.2 (4.9), "Λ_0 is an element of the Weyl group defined by ζ^j"', 0.0, twist_isometry_check),
            Check("twist.center_order", '(4.9), "the solutions of (4.4) have the form"', 1e-12, twist_center_check),
            Check("rmatrix.residue", '§4.5.1 item 1, "Res|_{z=0} r(z) = C_2"', 1e-6, residue_check),
            Check("rmatrix.unitarity", _LEMMA, 1e-11, unitarity_check),
            Check("rmatrix.zero_weight", _LEMMA, 1e-11, zero_weight_check),
            Check("quasiperiodicity.z_one", _QP_Z, 1e-10, _qp_check("z+1")),
            Check("quasiperiodicity.z_tau", _QP_Z, 1e-10, _qp_check("z+tau")),
            Check("quasiperiodicity.u_coroot", _QP_U, 1e-10, _qp_check("u+coroot")),
            Check("quasiperiodicity.u_tau_coroot", _QP_U, 1e-10, _qp_check("u+tau*coroot")),
            Check("quasiperiodicity.u_coweight", _QP_U, 1e-10, _qp_check("u+coweight")),
            Check("quasiperiodicity.u_tau_coweight", _QP_U, 1e-10, _qp_check("u+tau*coweight")),
            Check("cdybe.residual", '(4.44) classical dynamical Yang–Baxter, Proposition 1, "classical dynamical Yang–Baxter equations"', 1e-9, cdybe_check),
            Check("cdybe.twisted", 'Lemma 1, "is called the dynamical twist", "δr(u) ∈ h̃_0 ⊗ h̃_0"', 1e-9, cdybe_twisted_check),
            Check("felder.limit", _LEMMA, 1e-10, felder_check),
            Check("curvature.zz", '(C.1)–(C.3), (C.2) "[∇_a, ∇_b] = Σ CDYB^{abc} − [Σ_c ∂̂^c, r^{ab}]"', 1e-8, curvature_zz_check),
            Check("curvature.ztau", 'Proposition 2 and Appendix C steps 1–4, "are valid for the r-matrix (4.38)"', 1e-7, curvature_ztau_check),
            Check("transport.homotopy", _TRANSPORT, 1e-6, transport_homotopy_check),
            Check("transport.convergence", _TRANSPORT, 0.125, transport_convergence_check),
            Check("transport.monodromy", _TRANSPORT, 1e-5, transport_monodromy_check),
            Check("transport.monodromy_symmetry", _TRANSPORT, 1e-5, transport_symmetry_check),
        ],
        key=lambda c: c.id,
    )
)
CHECK_IDS = tuple(c.id for c in CATALOG)


def catalog_lines() -> list[str]:
    return [f"{c.id}\t{c.anchor}\ttolerance={c.tolerance!r}" for c in CATALOG]


def param_hash(params: dict) -> str:
    text = json.dumps(params, sort_keys=True, ensure_ascii=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def tolerance_for(check: Check, cfg: RunConfig) -> float:
    if check.id in cfg.tolerances:
        return cfg.tolerances[check.id]
    return cfg.tolerances.get(check.suite, check.tolerance)


def run_checks(cfg: RunConfig, ctx: RunContext | None = None) -> list[dict]:
    """Evaluate every check of the selected suites; records sorted by (id, param hash)."""
    ctx = ctx or RunContext(cfg)
    records = []
    for check in CATALOG:
        if check.suite not in cfg.suites:
            continue
        tol = tolerance_for(check, cfg)
        start = time.perf_counter()
        try:
            for params, residual in check.evaluate(ctx):
                now = time.perf_counter()
                residual = float(residual)
                ok = math.isfinite(residual) and residual <= tol
                records.append(_record(check, params, residual if math.isfinite(residual) else None, tol, ok, now - start))
                start = now
        except Exception as err:  # reported, not raised: the report stays well-formed
            params = {"error": f"{type(err).__name__}: {err}"}
            records.append(_record(check, params, None, tol, False, time.perf_counter() - start))
    records.sort(key=lambda r: (r["id"], r["param_hash"]))
    return records


def _record(check: Check, params: dict, residual, tol: float, ok: bool, wall: float) -> dict:
    return {
        "record": "check",
        "id": check.id,
        "suite": check.suite,
        "anchor": check.anchor,
        "params": params,
        "param_hash": param_hash(params),
        "residual": residual,
        "tolerance": tol,
        "pass": bool(ok),
        "wall_time": wall,
    }
