"""Theta function and the elliptic kernels built from it.

All kernels are derived from the odd Jacobi theta function

    ϑ(z|τ) = q^{1/8} Σ_n (−1)^n exp(πi(n(n+1)τ + (2n+1)z)),   q = e^{2πiτ},

which satisfies ϑ(−z) = −ϑ(z), ϑ(z+1) = −ϑ(z) and
ϑ(z+τ) = −q^{−1/2} e^{−2πiz} ϑ(z).  Arguments are reduced to the
fundamental parallelogram before summation so that the series is always
well conditioned; derivatives of the reduced evaluation are recovered with
the Leibniz rule applied to the quasi-periodicity factor.

Every public function accepts a scalar or an array and returns the same
shape.  Scalars come back as Python ``complex``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "ConvergenceError",
    "EllipticContext",
    "IDENTITIES",
    "IdentitySample",
    "PoleError",
    "SamplingError",
    "contour_derivative",
    "e",
    "e1",
    "e1_dtau",
    "e2",
    "e2_deriv",
    "eta1",
    "f_kernel",
    "f_twisted",
    "identity_residuals",
    "lattice_distance",
    "phi",
    "phi_dtau",
    "phi_partial",
    "phi_twisted",
    "phi_twisted_dz",
    "rho",
    "theta",
    "theta_deriv",
    "theta_derivs",
    "wp",
    "wp_deriv",
]

_MAX_ORDER = 3


class PoleError(ValueError):
    """An argument is within the exclusion radius of the period lattice."""

    def __init__(self, message: str, which: str = "z"):
        super().__init__(message)
        self.which = which


class ConvergenceError(RuntimeError):
    """The theta series needs more than ``max_terms`` terms."""


@dataclass(frozen=True)
class EllipticContext:
    """Modular parameter plus the numerical contract for theta evaluation.

    Parameters
    ----------
    tau : complex
        Point of the upper half plane.
    series_tolerance : float
        Relative size of the largest dropped term of the theta series.
    max_terms : int
        Upper bound on the number of series terms.
    pole_radius : float
        Arguments closer than this to the lattice ``Z + τZ`` raise
        :class:`PoleError`.
    """

    tau: complex
    series_tolerance: float = 1e-16
    max_terms: int = 200
    pole_radius: float = 1e-4

    def __post_init__(self):
        tau = complex(self.tau)
        object.__setattr__(self, "tau", tau)
        if not tau.imag > 0:
            raise ValueError(f"tau must lie in the upper half plane, got {tau}")
        if not self.series_tolerance > 0:
            raise ValueError("series_tolerance must be positive")
        if self.max_terms < 2:
            raise ValueError("max_terms must be at least 2")

    @property
    def q(self) -> complex:
        return complex(np.exp(2j * np.pi * self.tau))

    @cached_property
    def theta_at_zero(self) -> np.ndarray:
        """ϑ^{(k)}(0) for k = 0..3."""
        return theta_derivs(np.zeros(1), self, _MAX_ORDER)[:, 0]

    @cached_property
    def dtheta0(self) -> complex:
        return complex(self.theta_at_zero[1])

    @cached_property
    def eta1(self) -> complex:
        t = self.theta_at_zero
        return complex(-t[3] / (6.0 * t[1]))

    def with_tau(self, tau: complex) -> "EllipticContext":
        return EllipticContext(tau, self.series_tolerance, self.max_terms, self.pole_radius)


def e(x):
    """The character e(x) = exp(2πix)."""
    return np.exp(2j * np.pi * np.asarray(x, dtype=complex))


def _out(value, like):
    if np.ndim(like) == 0:
        return complex(np.asarray(value).reshape(()))
    return value


def _reduce(z: np.ndarray, tau: complex):
    """Split z = z0 + m + nτ with z0 in the centred fundamental cell."""
    n = np.round(z.imag / tau.imag)
    w = z - n * tau
    m = np.round(w.real)
    return w - m, m, n


def lattice_distance(z, tau: complex) -> np.ndarray:
    """Distance from z to the nearest point of Z + τZ."""
    z = np.asarray(z, dtype=complex)
    z0, _, _ = _reduce(z, tau)
    best = np.abs(z0)
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            if a or b:
                best = np.minimum(best, np.abs(z0 - a - b * tau))
    return best


def _check_poles(z: np.ndarray, ctx: EllipticContext, which: str) -> None:
    if z.size and np.min(lattice_distance(z, ctx.tau)) < ctx.pole_radius:
        raise PoleError(f"argument {which} lies on the period lattice", which)


def _series_range(y_max: float, t: float, order: int, ctx: EllipticContext) -> np.ndarray:
    # |term_n| = exp(-π t m² - 2π m y) with m = n + 1/2; centred at m* = -y/t
    budget = -math.log(ctx.series_tolerance) + 5.0
    centre = y_max / t
    radius = math.sqrt(budget / (math.pi * t)) + 1.0
    # polynomial growth of differentiated terms
    budget += order * math.log(2 * math.pi * (centre + radius + 1.0))
    radius = math.sqrt(budget / (math.pi * t)) + 1.0
    nmax = int(math.ceil(centre + radius))
    if 2 * nmax + 1 > ctx.max_terms:
        raise ConvergenceError(
            f"theta series needs {2 * nmax + 1} terms (max_terms={ctx.max_terms}); "
            f"tau={ctx.tau} is too close to the real axis"
        )
    return np.arange(-nmax - 1, nmax + 1)


def theta_derivs(z, ctx: EllipticContext, max_order: int) -> np.ndarray:
    """Array of ϑ^{(k)}(z) for k = 0..max_order, stacked on axis 0."""
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    tau = ctx.tau
    z0, m, n = _reduce(z, tau)
    ns = _series_range(float(np.max(np.abs(z0.imag), initial=0.0)), tau.imag, max_order, ctx)
    odd = 2 * ns + 1
    # exponent of each term: πi((n+1/2)²τ + (2n+1)z0)
    expo = 1j * np.pi * (((ns + 0.5) ** 2)[:, None] * tau + odd[:, None] * z0[None, :])
    terms = np.where((ns % 2 == 0)[:, None], 1.0, -1.0) * np.exp(expo)
    base = np.empty((max_order + 1, z.size), dtype=complex)
    factor = (1j * np.pi * odd)[:, None]
    for k in range(max_order + 1):
        base[k] = np.sum(terms, axis=0)
        terms = terms * factor
    # undo the reduction: ϑ(z) = (−1)^{m+n} e^{πiτn²} e^{−2πinz} ϑ(z0)
    sign = np.where((m + n) % 2 == 0, 1.0, -1.0)
    pref = sign * np.exp(1j * np.pi * tau * n**2 - 2j * np.pi * n * z)
    shift = -2j * np.pi * n
    out = np.empty_like(base)
    for k in range(max_order + 1):
        acc = np.zeros(z.size, dtype=complex)
        for j in range(k + 1):
            acc += math.comb(k, j) * shift ** (k - j) * base[j]
        out[k] = pref * acc
    return out.reshape((max_order + 1,) + shape)


def theta(z, ctx: EllipticContext):
    """The odd theta function ϑ(z|τ)."""
    return _out(theta_derivs(z, ctx, 0)[0], z)


def theta_deriv(z, order: int, ctx: EllipticContext):
    """``order``-th derivative of ϑ in z, for order in 0..4."""
    if not 0 <= order <= 4:
        raise ValueError("order must lie in 0..4")
    return _out(theta_derivs(z, ctx, order)[order], z)


def _log_ratios(z, ctx: EllipticContext, which: str = "z"):
    z = np.asarray(z, dtype=complex)
    _check_poles(z, ctx, which)
    t = theta_derivs(z, ctx, 3)
    return t[1] / t[0], t[2] / t[0], t[3] / t[0]


def e1(z, ctx: EllipticContext):
    """E1(z) = ϑ'(z)/ϑ(z); odd, with principal part 1/z and E1(z+τ) = E1(z) − 2πi."""
    r1, _, _ = _log_ratios(z, ctx)
    return _out(r1, z)


def e2(z, ctx: EllipticContext):
    """E2(z) = −E1'(z) = ℘(z) + 2η1."""
    r1, r2, _ = _log_ratios(z, ctx)
    return _out(r1 * r1 - r2, z)


def e2_deriv(z, ctx: EllipticContext):
    """E2'(z), which equals ℘'(z)."""
    r1, r2, r3 = _log_ratios(z, ctx)
    return _out(-(r3 - 3.0 * r2 * r1 + 2.0 * r1**3), z)


wp_deriv = e2_deriv


def eta1(ctx: EllipticContext) -> complex:
    """η1 = −ϑ'''(0)/(6ϑ'(0)); equals π²E₂(τ)/6 with E₂ the Eisenstein series."""
    return ctx.eta1


def wp(z, ctx: EllipticContext):
    """Weierstrass ℘(z) = E2(z) − 2η1."""
    return _out(np.asarray(e2(z, ctx)) - 2.0 * ctx.eta1, z)


def rho(z, ctx: EllipticContext):
    """ρ(z) = (E1(z)² − ℘(z))/2."""
    r1, r2, _ = _log_ratios(z, ctx)
    wpz = r1 * r1 - r2 - 2.0 * ctx.eta1
    return _out(0.5 * (r1 * r1 - wpz), z)


def e1_dtau(z, ctx: EllipticContext):
    """∂_τ E1(z) at fixed z, from the heat equation 4πi∂_τϑ = ϑ''."""
    r1, r2, r3 = _log_ratios(z, ctx)
    return _out((r3 - r1 * r2) / (4j * np.pi), z)


def _reciprocal_derivs(t: np.ndarray, order: int) -> np.ndarray:
    """Derivatives of 1/g from those of g (stacked on axis 0)."""
    g = np.empty((order + 1,) + t.shape[1:], dtype=complex)
    g[0] = 1.0 / t[0]
    for k in range(1, order + 1):
        acc = np.zeros(t.shape[1:], dtype=complex)
        for j in range(k):
            acc += math.comb(k, j) * g[j] * t[k - j]
        g[k] = -acc * g[0]
    return g


def phi_partial(u, z, du: int, dz: int, ctx: EllipticContext):
    """∂_u^du ∂_z^dz φ(u, z), computed from theta derivatives.

    Only ϑ(u) and ϑ(z) appear in denominators, so the result is finite
    when u + z hits the lattice.
    """
    u = np.asarray(u, dtype=complex)
    z = np.asarray(z, dtype=complex)
    u, z = np.broadcast_arrays(u, z)
    _check_poles(u, ctx, "u")
    _check_poles(z, ctx, "z")
    m = u.size
    # one series evaluation for ϑ(u+z), ϑ(u), ϑ(z)
    t = theta_derivs(np.concatenate([(u + z).ravel(), u.ravel(), z.ravel()]), ctx, du + dz)
    a = t[:, :m].reshape((-1,) + u.shape)
    gu = _reciprocal_derivs(t[: du + 1, m : 2 * m].reshape((-1,) + u.shape), du)
    hz = _reciprocal_derivs(t[: dz + 1, 2 * m :].reshape((-1,) + u.shape), dz)
    acc = np.zeros(u.shape, dtype=complex)
    for i in range(du + 1):
        for j in range(dz + 1):
            acc += math.comb(du, i) * math.comb(dz, j) * a[i + j] * gu[du - i] * hz[dz - j]
    return _out(ctx.dtheta0 * acc, u)


def phi(u, z, ctx: EllipticContext):
    """Kronecker function φ(u, z) = ϑ(u+z)ϑ'(0)/(ϑ(u)ϑ(z))."""
    return phi_partial(u, z, 0, 0, ctx)


def f_kernel(u, z, ctx: EllipticContext):
    """f(u, z) = ∂_u φ(u, z) = φ(u, z)(E1(u+z) − E1(u))."""
    u = np.asarray(u, dtype=complex)
    z = np.asarray(z, dtype=complex)
    p = np.asarray(phi(u, z, ctx))
    s = u + z
    val = p * (np.asarray(e1(s, ctx)) - np.asarray(e1(u, ctx)))
    return _out(val, np.broadcast_to(u, p.shape))


def phi_dtau(u, z, ctx: EllipticContext):
    """∂_τ φ(u, z) at fixed (u, z)."""
    u = np.asarray(u, dtype=complex)
    z = np.asarray(z, dtype=complex)
    u, z = np.broadcast_arrays(u, z)
    _check_poles(u, ctx, "u")
    _check_poles(z, ctx, "z")
    ta = theta_derivs(u + z, ctx, 2)
    tu = theta_derivs(u, ctx, 2)
    tz = theta_derivs(z, ctx, 2)
    t0 = ctx.theta_at_zero
    gu = 1.0 / tu[0]
    hz = 1.0 / tz[0]
    inner = ta[0] * (t0[3] / t0[1] - tu[2] * gu - tz[2] * hz) + ta[2]
    return _out(ctx.dtheta0 * gu * hz * inner / (4j * np.pi), u)


def _is_zero(x) -> bool:
    return np.ndim(x) == 0 and complex(x) == 0


def _shift(pairing, k: int, l: int):
    return np.asarray(pairing, dtype=complex) + (k % l) / l


def phi_twisted(pairing, k: int, l: int, kappa_pairing, z, ctx: EllipticContext):
    """φ_α^k(z) = e(⟨κ,α⟩z)·φ(⟨u+κτ,α⟩ + k/l, z).

    ``pairing`` is ⟨u+κτ, α⟩ and ``kappa_pairing`` is ⟨κ, α⟩.  The
    degenerate case α = 0, k = 0 gives E1(z).
    """
    if k % l == 0 and _is_zero(pairing) and _is_zero(kappa_pairing):
        return e1(z, ctx)
    x = _shift(pairing, k, l)
    try:
        val = np.asarray(phi(x, z, ctx))
    except PoleError as err:
        if err.which == "u":
            raise PoleError("discriminant: shifted pairing lies on the lattice", "pairing") from err
        raise
    return _out(e(np.asarray(kappa_pairing) * np.asarray(z)) * val, val)


def f_twisted(pairing, k: int, l: int, kappa_pairing, z, ctx: EllipticContext):
    """f_α^k(z) = e(⟨κ,α⟩z)·f(⟨u+κτ,α⟩ + k/l, z).

    Degenerate cases: α = 0, k = 0 gives ρ(z); z = 0 gives −E2 of the
    shifted pairing.
    """
    if k % l == 0 and _is_zero(pairing) and _is_zero(kappa_pairing):
        return rho(z, ctx)
    x = _shift(pairing, k, l)
    if _is_zero(z):
        return _out(-np.asarray(e2(x, ctx)), x)
    try:
        val = np.asarray(f_kernel(x, z, ctx))
    except PoleError as err:
        if err.which == "u":
            raise PoleError("discriminant: shifted pairing lies on the lattice", "pairing") from err
        raise
    return _out(e(np.asarray(kappa_pairing) * np.asarray(z)) * val, val)


def phi_twisted_dz(pairing, k: int, l: int, kappa_pairing, z, order: int, ctx: EllipticContext):
    """``order``-th z-derivative of φ_α^k, order in 0..3."""
    if not 0 <= order <= 3:
        raise ValueError("order must lie in 0..3")
    if order == 0:
        return phi_twisted(pairing, k, l, kappa_pairing, z, ctx)
    if k % l == 0 and _is_zero(pairing) and _is_zero(kappa_pairing):
        # derivatives of E1 = ϑ'/ϑ
        zz = np.asarray(z, dtype=complex)
        _check_poles(zz, ctx, "z")
        t = theta_derivs(zz, ctx, order + 1)
        g = _reciprocal_derivs(t[: order + 1], order)
        acc = sum(math.comb(order, j) * t[1 + j] * g[order - j] for j in range(order + 1))
        return _out(acc, z)
    x = _shift(pairing, k, l)
    kap = np.asarray(kappa_pairing, dtype=complex)
    pref = e(kap * np.asarray(z))
    acc = 0
    for j in range(order + 1):
        acc = acc + math.comb(order, j) * (2j * np.pi * kap) ** (order - j) * np.asarray(phi_partial(x, z, 0, j, ctx))
    return _out(pref * acc, np.asarray(acc))


# ---------------------------------------------------------------- identities
class SamplingError(RuntimeError):
    """No pole-free sample point found."""


@dataclass(frozen=True)
class IdentitySample:
    """Seeded sampling plan for :func:`identity_residuals`.

    Each sample draws two twisted roots, given by a dynamical pairing ⟨u, α⟩,
    a κ-pairing and a residue k mod l, and three marked points.
    """

    taus: tuple[complex, ...] = (1j, 0.3 + 0.9j)
    ls: tuple[int, ...] = (1, 2, 3, 4)
    n_samples: int = 64
    seed: int = 0
    series_tolerance: float = 1e-16
    min_distance: float = 0.05
    max_draws: int = 200


IDENTITIES = (
    "theta_quasi_periodicity",
    "phi_symmetry",
    "phi_quasi_periodicity",
    "heat",
    "fay",
    "fay_degenerate",
    "fay_diag",
    "fay_opposite",
    "fay_rho",
)


@dataclass(frozen=True)
class _Twisted:
    """Twisted roots φ_α^k(z) = e(κz)·φ(xu + κτ + k/l, z), vectorized over samples."""

    xu: np.ndarray
    kappa: np.ndarray
    k: np.ndarray
    l: int

    def __add__(self, other: "_Twisted") -> "_Twisted":
        return _Twisted(self.xu + other.xu, self.kappa + other.kappa, (self.k + other.k) % self.l, self.l)

    def __neg__(self) -> "_Twisted":
        return _Twisted(-self.xu, -self.kappa, (-self.k) % self.l, self.l)

    def arg(self, tau: complex) -> np.ndarray:
        return self.xu + self.kappa * tau + self.k / self.l

    def phi(self, z, ctx):
        # the residue k/l is folded into the pairing
        return phi_twisted(self.arg(ctx.tau), 0, self.l, self.kappa, z, ctx)

    def f(self, z, ctx):
        return f_twisted(self.arg(ctx.tau), 0, self.l, self.kappa, z, ctx)

    def du_f(self, z, ctx):
        return e(self.kappa * z) * phi_partial(self.arg(ctx.tau), z, 2, 0, ctx)

    def dz_f(self, z, ctx):
        x = self.arg(ctx.tau)
        return e(self.kappa * z) * (phi_partial(x, z, 1, 1, ctx) + 2j * np.pi * self.kappa * phi_partial(x, z, 1, 0, ctx))


def contour_derivative(fn, x0: complex, radius: float = 5e-3, points: int = 24):
    """First derivative of a holomorphic function by the trapezoidal Cauchy integral.

    ``fn`` may return arrays; the derivative is taken elementwise.
    """
    th = 2 * np.pi * np.arange(points) / points
    acc = 0
    for t in th:
        acc = acc + np.asarray(fn(x0 + radius * np.exp(1j * t))) * np.exp(-1j * t)
    return acc / (points * radius)


def _draw(rng, l, tau, spec):
    t = tau.imag
    ring = 0.01 * np.exp(1j * np.linspace(0, 2 * np.pi, 8, endpoint=False))
    for _ in range(spec.max_draws):
        xa = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3) * t)
        xb = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3) * t)
        ka, kb = rng.uniform(-1, 1, size=2)
        ma, mb = rng.integers(l, size=2)
        za, zb, zc = (complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.4, 0.4) * t) for _ in range(3))
        x, y = xa + ka * tau + ma / l, xb + kb * tau + mb / l
        args = [x, y, x + y, za - zb, za - zc, zb - zc]
        # keep the heat-equation contour in τ away from the discriminant
        args += list(x + ka * ring)
        if np.min(lattice_distance(np.array(args), tau)) >= spec.min_distance:
            return (xa, ka, ma), (xb, kb, mb), (za, zb, zc)
    raise SamplingError(f"no pole-free sample found after {spec.max_draws} draws (tau={tau}, l={l})")


def _sample_residuals(a: _Twisted, b: _Twisted, zs, ctx: EllipticContext) -> dict:
    tau = ctx.tau
    za, zb, zc = zs
    ab, ac, bc, cb = za - zb, za - zc, zb - zc, zc - zb
    out = {}
    th = theta(za, ctx)
    out["theta_quasi_periodicity"] = np.maximum(
        np.abs(theta(za + 1, ctx) + th),
        np.abs(theta(za + tau, ctx) + ctx.q**-0.5 * e(-za) * th),
    )
    x, y = a.arg(tau), b.arg(tau)
    out["phi_symmetry"] = np.maximum(np.abs(phi(x, ab, ctx) - phi(ab, x, ctx)), np.abs(phi(-x, -ab, ctx) + phi(x, ab, ctx)))
    p0 = a.phi(ac, ctx)
    mult = e(a.kappa * tau - x)
    out["phi_quasi_periodicity"] = np.maximum(
        np.abs(a.phi(ac + 1, ctx) - e(a.kappa) * p0),
        np.abs(a.phi(ac + tau, ctx) - mult * p0),
    )
    dtau = contour_derivative(lambda t: a.phi(ac, ctx.with_tau(t)), tau)
    out["heat"] = np.abs(2j * np.pi * dtau - a.dz_f(ac, ctx))
    s = a + b
    out["fay"] = np.abs(
        a.phi(ac, ctx) * b.f(ab, ctx)
        - b.phi(ab, ctx) * a.f(ac, ctx)
        + s.phi(ab, ctx) * a.f(bc, ctx)
        - s.phi(ac, ctx) * (-b).f(bc, ctx)
    )
    out["fay_degenerate"] = np.abs(
        a.phi(ac, ctx) * rho(ab, ctx)
        - e1(ab, ctx) * a.f(ac, ctx)
        + a.phi(ab, ctx) * a.f(bc, ctx)
        - a.phi(ac, ctx) * rho(cb, ctx)
        + 0.5 * a.du_f(ac, ctx)
    )
    out["fay_diag"] = np.abs(a.phi(ac, ctx) * b.f(ac, ctx) - b.phi(ac, ctx) * a.f(ac, ctx) - s.phi(ac, ctx) * (wp(x, ctx) - wp(y, ctx)))
    out["fay_opposite"] = np.abs(b.phi(ab, ctx) * (-b).f(ab, ctx) - (-b).phi(ab, ctx) * b.f(ab, ctx) - wp_deriv(y, ctx))
    out["fay_rho"] = np.abs(
        a.phi(bc, ctx) * wp(x, ctx) - a.phi(bc, ctx) * rho(bc, ctx) + e1(bc, ctx) * a.f(bc, ctx) - 0.5 * a.du_f(bc, ctx)
    )
    return out


def identity_residuals(spec: IdentitySample = IdentitySample()) -> dict:
    """Maximum absolute residual of each elliptic identity over a seeded sample.

    Keys are listed in ``IDENTITIES``.  For every τ in ``spec.taus`` and l in
    ``spec.ls`` the sample has ``spec.n_samples`` points.
    """
    rng = np.random.default_rng(spec.seed)
    worst = {k: 0.0 for k in IDENTITIES}
    for tau in spec.taus:
        ctx = EllipticContext(tau, spec.series_tolerance)
        for l in spec.ls:
            draws = [_draw(rng, l, ctx.tau, spec) for _ in range(spec.n_samples)]
            a, b = (_Twisted(*(np.array(c) for c in zip(*(d[i] for d in draws))), l) for i in (0, 1))
            zs = tuple(np.array(c) for c in zip(*(d[2] for d in draws)))
            for k, v in _sample_residuals(a, b, zs, ctx).items():
                worst[k] = max(worst[k], float(np.max(v)))
    return worst
