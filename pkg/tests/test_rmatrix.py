"""Dynamical r-matrix: CDYBE, symmetries, residue and the untwisted limit."""
import numpy as np
import pytest

from twisted_kzb import elliptic as el
from twisted_kzb.felder import compare_with_felder, felder_kernel
from twisted_kzb.rmatrix import (
    DiscriminantError,
    ModuliPoint,
    RMatrix,
    apply_dynamical_twist,
    cdybe_residual,
    discriminant_residual,
    eval_f,
    eval_r,
    quasiperiodicity_residual,
    residue_residual,
    sample_marks,
    sample_point,
    unitarity_residual,
    zero_weight_residual,
)

from conftest import SWEEP, evaluator, random_tau, rep, setup


def _points(ev, rng, count):
    for _ in range(count):
        tau = random_tau(rng)
        yield sample_point(ev, rng, tau), sample_marks(rng, 3, tau)


# ------------------------------------------------------------------ CDYBE
@pytest.mark.parametrize("n,l", SWEEP)
def test_cdybe_on_defining_reps(n, l, rng):
    ev = evaluator(n, l)
    v = rep(n, "V")
    for point, z in _points(ev, rng, 2):
        assert cdybe_residual(ev, (v, v, v), point, *z) < 1e-9


@pytest.mark.parametrize("n,l", [(2, 2), (3, 1), (4, 2)])
def test_cdybe_mixed_reps_and_wide_separation(n, l, rng):
    ev = evaluator(n, l)
    reps = (rep(n, "V"), rep(n, "V*"), rep(n, "V"))
    point, z = next(_points(ev, rng, 1))
    assert cdybe_residual(ev, reps, point, *z) < 1e-9
    # marked points spread over twice the range
    assert cdybe_residual(ev, reps, point, *(2 * x for x in z)) < 1e-9


def test_cdybe_accepts_a_basis():
    _, _, basis = setup(2, 2)
    v = rep(2, "V")
    point = ModuliPoint((), 0.1 + 1.1j)
    assert cdybe_residual(basis, (v, v, v), point, 0.1, -0.2 + 0.1j, 0.3j) < 1e-9


def test_opposite_dynamical_sign_breaks_cdybe(rng):
    _, _, basis = setup(3, 1)
    v = rep(3, "V")
    ev = RMatrix(basis, dynamical_sign=-1)
    point, z = next(_points(ev, rng, 1))
    assert cdybe_residual(ev, (v, v, v), point, *z) > 1e-3


def test_coweight_reading_of_dual_fails_when_twisted(rng):
    _, _, basis = setup(4, 2)
    v = rep(4, "V")
    ev = RMatrix(basis, dual_reading="coweight")
    point, z = next(_points(ev, rng, 1))
    assert cdybe_residual(ev, (v, v, v), point, *z) > 1e-3
    assert cdybe_residual(evaluator(4, 2), (v, v, v), point, *z) < 1e-9


@pytest.mark.parametrize("n", [2, 3, 4])
def test_coweight_reading_of_dual_agrees_when_untwisted(n):
    _, _, basis = setup(n, 1)
    a = RMatrix(basis, dual_reading="coweight").dual_vectors()
    b = RMatrix(basis).dual_vectors()
    assert np.abs(a - b).max() < 1e-13


# --------------------------------------------------------- symmetries
@pytest.mark.parametrize("n,l", SWEEP)
def test_unitarity_and_zero_weight(n, l, rng):
    ev = evaluator(n, l)
    for names in [("V", "V"), ("V", "V*"), ("ad", "V")]:
        reps = (rep(n, names[0]), rep(n, names[1]))
        point, z = next(_points(ev, rng, 1))
        assert unitarity_residual(ev, reps, point, z[0] - z[1]) < 1e-11
        assert zero_weight_residual(ev, reps, point, z[0] - z[1]) < 1e-11


@pytest.mark.parametrize("n,l", [(2, 2), (3, 3), (4, 2)])
def test_full_cartan_is_not_a_symmetry_when_twisted(n, l, rng):
    ev = evaluator(n, l)
    v = rep(n, "V")
    point, z = next(_points(ev, rng, 1))
    assert zero_weight_residual(ev, (v, v), point, z[0], full_cartan=True) > 1e-3


@pytest.mark.parametrize("n", [2, 3])
def test_full_cartan_is_a_symmetry_when_untwisted(n, rng):
    ev = evaluator(n, 1)
    v = rep(n, "V")
    point, z = next(_points(ev, rng, 1))
    assert zero_weight_residual(ev, (v, v), point, z[0], full_cartan=True) < 1e-11


@pytest.mark.parametrize("n,l", SWEEP)
def test_quasi_periodicity(n, l, rng):
    ev = evaluator(n, l)
    reps = (rep(n, "V"), rep(n, "V*"))
    point, z = next(_points(ev, rng, 1))
    res = quasiperiodicity_residual(ev, reps, point, z[0])
    assert set(res) == {"z+1", "z+tau", "u+coroot", "u+tau*coroot", "u+coweight", "u+tau*coweight"}
    assert max(res.values()) < 1e-10


@pytest.mark.parametrize("n,l", [(3, 1), (4, 2)])
def test_coordinate_conventions_describe_the_same_tensor(n, l, rng):
    _, tw, basis = setup(n, l)
    coroot, coweight = RMatrix(basis), RMatrix(basis, convention="coweight")
    v = rep(n, "V")
    point = sample_point(coroot, rng, 1j)
    ambient = coroot.u_vector(point)
    # coordinates of the same ambient vector over the coweights
    w = np.linalg.lstsq(coweight.coord_vectors.T, ambient, rcond=None)[0]
    other = ModuliPoint(tuple(w), point.tau)
    assert np.abs(coweight.u_vector(other) - ambient).max() < 1e-13
    assert np.abs(coweight.r(v, v, other, 0.2 + 0.1j) - coroot.r(v, v, point, 0.2 + 0.1j)).max() < 1e-12
    assert np.abs(coweight.coroot_coords(other) - np.asarray(point.u)).max() < 1e-13
    # the coweight quasi-periodicity residuals are convention independent too
    res = quasiperiodicity_residual(coweight, (v, v), other, 0.13 - 0.2j)
    assert max(res.values()) < 1e-10


def test_coweight_convention_coordinates():
    _, tw, basis = setup(4, 1)
    ev = RMatrix(basis, convention="coweight")
    u = ev.u_vector(ModuliPoint((1, 0, 0), 1j))
    assert np.allclose(u, [0.75, -0.25, -0.25, -0.25])


# ------------------------------------------------------------- residue
@pytest.mark.parametrize("n,l", SWEEP)
def test_residue_is_the_split_casimir(n, l, rng):
    ev = evaluator(n, l)
    reps = (rep(n, "V"), rep(n, "V*"))
    point = sample_point(ev, rng, random_tau(rng))
    assert residue_residual(ev, reps, point) < 1e-6


def test_discriminant_raises():
    ev = evaluator(2, 1)
    v = rep(2, "V")
    tau = 0.1 + 1j
    # ⟨u b + κτ, β⟩ = 2u + τ/2 vanishes at u = −τ/4
    with pytest.raises(DiscriminantError) as info:
        ev.r(v, v, ModuliPoint((-tau / 4,), tau), 0.2)
    assert info.value.root == (1, -1) and info.value.k == 0
    assert isinstance(info.value, el.PoleError)


def test_leading_singularity_at_the_discriminant(rng):
    ev = evaluator(3, 1)
    v = rep(3, "V")
    point = sample_point(ev, rng, 1j)
    assert discriminant_residual(ev, (v, v), point, 0.21 + 0.1j, term=0) < 1e-5


def test_wrong_number_of_coordinates():
    with pytest.raises(ValueError):
        evaluator(3, 1).r(rep(3, "V"), rep(3, "V"), ModuliPoint((0.1,), 1j), 0.2)


def test_moduli_point_validation():
    with pytest.raises(ValueError):
        ModuliPoint((), -1j)
    p = ModuliPoint((0.1,), 1j).shifted((0.2,), 0.5)
    assert p.u == (0.1 + 0.2 + 0j,) and p.tau == 0.5 + 1j


# ------------------------------------------------------ derivatives
def test_derivative_kernels_match_finite_differences(rng):
    ev = evaluator(3, 1)
    v, d = rep(3, "V"), rep(3, "V*")
    point = sample_point(ev, rng, 0.1 + 1.05j)
    z, h = 0.23 - 0.11j, 1e-5
    r = lambda p, w: ev.r(v, d, p, w)  # noqa: E731
    fd_z = (r(point, z + h) - r(point, z - h)) / (2 * h)
    assert np.abs(ev.tensor("dz_r", v, d, point, z) - fd_z).max() < 1e-6
    for i in range(ev.dim_u):
        e = np.zeros(ev.dim_u)
        e[i] = h
        fd_u = (r(point.shifted(e), z) - r(point.shifted(-e), z)) / (2 * h)
        assert np.abs(ev.du_r(v, d, point, z, i) - fd_u).max() < 1e-6
    fd_tau = el.contour_derivative(lambda t: r(ModuliPoint(point.u, t), z), point.tau)
    assert np.abs(ev.tensor("dtau_r", v, d, point, z) - fd_tau).max() < 1e-9


def test_f_tensor_kernels():
    """f carries ∂_u φ on root terms and ρ on the untwisted Cartan layer."""
    ev = evaluator(2, 2)
    point = ModuliPoint((), 0.2 + 1.1j)
    z = 0.17 + 0.09j
    root_f, cart_f = ev.kernels("f", point, z)
    ctx = ev.context(point)
    x = ev.pairings(point)
    ph = np.exp(2j * np.pi * ev._kappa * z)
    assert np.abs(root_f - ph * el.f_kernel(x, z, ctx)).max() < 1e-13
    assert abs(cart_f[0] - el.rho(z, ctx)) < 1e-13


def test_api_wrappers():
    _, _, basis = setup(2, 2)
    v = rep(2, "V")
    point = ModuliPoint((), 1j)
    t = eval_r(basis, v, v, point, 0.3)
    assert t.matrix.shape == (4, 4) and t.rep_a is v
    assert eval_f(basis, v, v, point, diagonal=True).matrix.shape == (2, 2)
    assert eval_f(basis, v, v, point, 0.3).matrix.shape == (4, 4)


# ------------------------------------------------- untwisted limit
def test_felder_kernel_is_the_phi_kernel():
    ctx = el.EllipticContext(0.3 + 0.9j)
    assert abs(felder_kernel(0.21 + 0.1j, 0.3 - 0.2j, ctx.tau) - el.phi(0.21 + 0.1j, 0.3 - 0.2j, ctx)) < 1e-13


@pytest.mark.parametrize("n", [2, 3, 4])
def test_untwisted_limit_is_felder_up_to_gauge(n, rng):
    ev = evaluator(n, 1)
    v = rep(n, "V")
    for _ in range(2):
        point = sample_point(ev, rng, random_tau(rng))
        zs = sample_marks(rng, 2, point.tau)
        cmp = compare_with_felder(lambda z: ev.r(v, v, point, z), n, ev.u_vector(point), point.tau, zs)
        assert cmp.worst < 1e-10


def test_felder_difference_is_a_dynamical_twist(rng):
    n = 3
    ev = evaluator(n, 1)
    v = rep(n, "V")
    point = sample_point(ev, rng, 0.1 + 1.1j)
    zs = (0.2 + 0.1j, -0.3 + 0.25j)
    cmp = compare_with_felder(lambda z: ev.r(v, v, point, z), n, ev.u_vector(point), point.tau, zs)
    # write the constant h⊗h difference as Σ A_rs 𝔖_r⊗𝔖_s and remove it
    s = np.array([np.real(np.diag(x)) for x in ev.zero_layer_duals()])
    a = np.linalg.pinv(s.T) @ cmp.cartan @ np.linalg.pinv(s)
    assert np.abs(a + a.T).max() < 1e-10
    gauged = apply_dynamical_twist(ev, -(a - a.T) / 2)
    again = compare_with_felder(lambda z: gauged.r(v, v, point, z), n, ev.u_vector(point), point.tau, zs)
    assert np.abs(again.cartan).max() < 1e-10


# ----------------------------------------------------- dynamical twist
def test_zero_twist_matrix_changes_nothing(rng):
    ev = evaluator(4, 2)
    v = rep(4, "V")
    point = sample_point(ev, rng, 1j)
    tw = apply_dynamical_twist(ev, np.zeros((1, 1)))
    assert np.array_equal(tw.r(v, v, point, 0.2), ev.r(v, v, point, 0.2))


def test_twist_matrix_must_be_antisymmetric():
    _, _, basis = setup(3, 1)
    with pytest.raises(ValueError):
        RMatrix(basis, twist_matrix=np.eye(2))
    with pytest.raises(ValueError):
        RMatrix(basis, twist_matrix=np.zeros((3, 3)))


def test_dynamical_twist_keeps_cdybe_and_residue(rng):
    ev = evaluator(4, 1)
    v = rep(4, "V")
    a = rng.normal(size=(3, 3))
    twisted = apply_dynamical_twist(ev, a - a.T)
    point, z = next(_points(ev, rng, 1))
    assert cdybe_residual(twisted, (v, v, v), point, *z) < 1e-9
    assert residue_residual(twisted, (v, v), point) < 1e-6
    assert np.abs(twisted.r(v, v, point, z[0]) - ev.r(v, v, point, z[0])).max() > 1e-3


def test_invalid_options():
    _, _, basis = setup(2, 1)
    with pytest.raises(ValueError):
        RMatrix(basis, convention="weights")
    with pytest.raises(ValueError):
        RMatrix(basis, dual_reading="other")
    with pytest.raises(ValueError):
        evaluator(2, 1).kernels("nope", ModuliPoint((0.1,), 1j), 0.2)


def test_samplers_are_seeded_and_separated():
    ev = evaluator(4, 2)
    p1 = sample_point(ev, np.random.default_rng(5), 1j)
    p2 = sample_point(ev, np.random.default_rng(5), 1j)
    assert p1 == p2
    assert np.min(el.lattice_distance(ev.pairings(p1), 1j)) >= 0.05
    z = sample_marks(np.random.default_rng(1), 4, 1j)
    diffs = [z[i] - z[j] for i in range(4) for j in range(i + 1, 4)]
    assert np.min(el.lattice_distance(np.array(diffs), 1j)) >= 0.1
    with pytest.raises(el.SamplingError):
        sample_marks(np.random.default_rng(1), 30, 1j, max_draws=3)


def test_tau_shift_residual_is_measured_at_the_tensor_scale():
    """Entries of r(u + τb) reach e^{2π|Im z|·|⟨b,β⟩|}; roundoff grows with them."""
    from twisted_kzb.rmatrix import _ambient_to_coords

    ev, v = evaluator(2, 1), rep(2, "V")
    tau, z = -0.276 + 1.326j, 0.142 + 0.792j
    point = ModuliPoint((-0.206 + 0.193j,), tau)
    shifted = ev.r(v, v, point.shifted(tau * _ambient_to_coords(ev, np.array([1.0, -1.0]))), z)
    assert np.abs(shifted).max() > 1e5
    assert quasiperiodicity_residual(ev, (v, v), point, z)["u+tau*coroot"] < 1e-13
