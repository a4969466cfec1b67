"""Root systems, twist data and representations."""
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from twisted_kzb.lie import (
    UnsupportedAlgebraError,
    add,
    build_root_system,
    build_twist,
    dot,
    make_rep,
    root_pair,
)

from conftest import SWEEP, setup


def commutator(a, b):
    return a @ b - b @ a


@pytest.mark.parametrize(
    "rank,n_roots,cartan",
    [
        (1, 2, ((2,),)),
        (2, 6, ((2, -1), (-1, 2))),
        (3, 12, ((2, -1, 0), (-1, 2, -1), (0, -1, 2))),
    ],
)
def test_type_a_root_data(rank, n_roots, cartan):
    rs = build_root_system("A", rank)
    assert len(rs.roots) == n_roots
    assert len(rs.positive_roots) == n_roots // 2
    assert rs.cartan_matrix == cartan
    assert rs.coxeter_number == rs.dual_coxeter == rank + 1
    assert rs.highest_root == tuple([1] + [0] * (rank - 1) + [-1])
    assert rs.simple_coefficients(rs.highest_root) == (1,) * rank
    # ρ pairs to 1 with each simple root
    assert all(dot(rs.rho_covector, a) == 1 for a in rs.simple_roots)
    # fundamental coweights are dual to simple roots
    for i, w in enumerate(rs.fundamental_coweights):
        assert sum(w) == 0
        assert [dot(w, a) for a in rs.simple_roots] == [int(i == k) for k in range(rank)]


@pytest.mark.parametrize("rank", [1, 2, 3, 4])
def test_structure_constants_match_commutators(rank):
    rs = build_root_system("A", rank)
    for a, b in product(rs.roots, repeat=2):
        c = commutator(rs.root_matrix(a), rs.root_matrix(b))
        s = add(a, b)
        if rs.is_root(s):
            assert np.allclose(c, rs.structure_constants[(a, b)] * rs.root_matrix(s), atol=0)
        elif any(s):
            assert not c.any()
        else:
            assert np.array_equal(c, rs.coroot_matrix(a))


@pytest.mark.parametrize("rank", [2, 3])
def test_structure_constant_jacobi(rank):
    rs = build_root_system("A", rank)
    C = rs.structure_constants

    def bracket(x, y):
        # x, y: dicts root -> coefficient
        out = {}
        for a, ca in x.items():
            for b, cb in y.items():
                s = add(a, b)
                if rs.is_root(s):
                    out[s] = out.get(s, 0) + ca * cb * C[(a, b)]
        return out

    for a, b, c in product(rs.roots, repeat=3):
        # only triples whose brackets stay among root vectors
        if all(any(v) for v in (add(a, b), add(b, c), add(c, a), add(add(a, b), c))):
            total = {}
            for x, y, z in [(a, b, c), (b, c, a), (c, a, b)]:
                for k, v in bracket(bracket({x: 1}, {y: 1}), {z: 1}).items():
                    total[k] = total.get(k, 0) + v
            assert not any(total.values())


def test_unsupported_root_systems():
    with pytest.raises(UnsupportedAlgebraError):
        build_root_system("D", 4)
    with pytest.raises(UnsupportedAlgebraError):
        build_root_system("A", 0)


# ------------------------------------------------------------------ twist
def test_a1_order_two_twist():
    rs, tw, _ = setup(2, 2)
    assert tw.kappa == (Fraction(1, 4), Fraction(-1, 4))
    q = tw.q_matrix()
    assert np.allclose(q, np.diag([1j, -1j]), atol=1e-15)
    assert np.array_equal(tw.lambda0_matrix(), np.array([[0, 1], [1, 0]]))
    assert tw.dim_h0 == 0
    assert tw.coweight == (Fraction(1, 2), Fraction(-1, 2))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_trivial_twist(n):
    rs, tw, _ = setup(n, 1)
    assert np.array_equal(tw.lambda0_matrix(), np.eye(n))
    assert all(len(o) == 1 for o in tw.orbits)
    assert tw.dim_h0 == n - 1
    assert all(x == 0 for x in tw.coweight)
    assert tw.fourier_indices(0) == (0,)


def test_a3_order_two_twist():
    rs, tw, _ = setup(4, 2)
    assert tw.dim_h0 == 1
    assert tw.inv_coroots == ((1, -1, 1, -1),)
    # l·ϖ lies in the coroot lattice and ϖ does not
    w = tw.coweight
    assert all((tw.l * x).denominator == 1 for x in w)
    assert not all(x.denominator == 1 for x in w)
    assert sum(w) == 0


@pytest.mark.parametrize("n,l", SWEEP)
def test_lambda_is_an_isometry_of_the_root_system(n, l):
    rs, tw, _ = setup(n, l)
    roots = set(rs.roots)
    for a in rs.roots:
        assert tw.lam(a) in roots
        assert tw.lam(a, l) == a
        for b in rs.roots:
            assert dot(tw.lam(a), tw.lam(b)) == dot(a, b)
    # Λ_0 permutes the extended Dynkin nodes as node_perm says
    for k in range(n):
        assert tw.lam(tw.node_root(k)) == tw.node_root(tw.node_perm[k])


@pytest.mark.parametrize("n,l", SWEEP)
def test_orbit_counts(n, l):
    rs, tw, _ = setup(n, l)
    members = [r for orb in tw.orbits for r in orb]
    assert sorted(members) == sorted(rs.roots)
    assert len(tw.orbits) == n * (n - 1) // l
    assert all(tw.orbit_length(i) == l for i in range(len(tw.orbits)))
    assert len(tw.cartan_orbits) == n // l
    assert n - 1 in tw.cartan_orbits[tw.affine_orbit]
    assert tw.dim_h0 == n // l - 1


@pytest.mark.parametrize("n,l", SWEEP)
def test_twist_commutation(n, l):
    for j in [k for k in range(1, max(l, 2)) if np.gcd(k, l) == 1]:
        _, tw, _ = setup(n, l, j)
        q, lam0 = tw.q_matrix(), tw.lambda0_matrix()
        comm = q @ lam0 @ np.linalg.inv(q) @ np.linalg.inv(lam0)
        assert np.allclose(comm, np.exp(-2j * np.pi * j / l) * np.eye(n), atol=1e-13)
        # Λ_0 has order l modulo the centre
        assert np.allclose(np.linalg.matrix_power(lam0, l), np.eye(n))


@pytest.mark.parametrize("n,l", [(4, 2), (4, 1), (3, 1)])
def test_invariant_cartan_is_fixed(n, l):
    _, tw, _ = setup(n, l)
    for b in tw.inv_coroots:
        assert tw.lam(b) == b and sum(b) == 0
    # coweights of h̃_0 are dual to its simple roots
    for r, w in enumerate(tw.inv_coweights):
        assert [dot(w, a) for a in tw.inv_simple_roots] == [int(r == s) for s in range(tw.dim_h0)]
    g = tw.h0_gram()
    assert np.allclose(tw.h0_dual_basis() @ np.array(tw.inv_coroots, dtype=float).T, np.eye(tw.dim_h0))
    assert np.allclose(g, g.T)


def test_lambda_matrix_is_twisted_by_u():
    _, tw, _ = setup(4, 2)
    u = (0.3 + 0.1j,)
    lam = tw.lambda_matrix(u)
    expected = tw.lambda0_matrix() @ np.diag(np.exp(-2j * np.pi * u[0] * np.array([1, -1, 1, -1])))
    assert np.allclose(lam, expected)


@pytest.mark.parametrize("n,l,j", [(2, 3, 1), (4, 3, 1), (4, 2, 2), (6, 4, 2)])
def test_invalid_twist(n, l, j):
    rs = build_root_system("A", n - 1)
    with pytest.raises(UnsupportedAlgebraError):
        build_twist(rs, l, j)


def test_serialization_is_deterministic_and_exact():
    rs = build_root_system("A", 3)
    a = build_twist(rs, 2).serialize()
    b = build_twist(build_root_system("A", 3), 2).serialize()
    assert a == b
    assert "kappa = 3/8 1/8 -1/8 -3/8" in a
    assert "inv_coroot_0 = 1 -1 1 -1" in a
    assert "." not in a  # no floats anywhere


# --------------------------------------------------------- representations
matrices = st.integers(0, 2**31).map(
    lambda s: (np.random.default_rng(s).normal(size=(2, 3, 3)) + 1j * np.random.default_rng(s + 1).normal(size=(2, 3, 3)))
)


def traceless(m):
    return m - np.trace(m) / m.shape[0] * np.eye(m.shape[0])


@pytest.mark.parametrize("name", ["V", "V*", "ad"])
@given(pair=matrices)
def test_representations_are_homomorphisms(name, pair):
    rs = build_root_system("A", 2)
    rep = make_rep(rs, name)
    x, y = traceless(pair[0]), traceless(pair[1])
    assert np.allclose(rep.act(commutator(x, y)), commutator(rep.act(x), rep.act(y)), atol=1e-10)
    g = scipy.linalg.expm(0.3 * x)
    assert np.allclose(rep.group(g), scipy.linalg.expm(0.3 * rep.act(x)), atol=1e-9)


def test_defining_rep_sends_roots_to_matrix_units():
    rs = build_root_system("A", 2)
    v = make_rep(rs, "V")
    for r, m in v.root_matrices.items():
        i, j = root_pair(r)
        assert m[i, j] == 1 and np.count_nonzero(m) == 1
    assert v.dim == 3


def test_dual_is_an_involution():
    rs = build_root_system("A", 2)
    v = make_rep(rs, "V")
    from twisted_kzb.lie import dual_rep

    vv = dual_rep(dual_rep(v))
    assert vv.name == "V"
    x = traceless(np.arange(9.0).reshape(3, 3))
    assert np.array_equal(vv.act(x), v.act(x))
    assert np.allclose(make_rep(rs, "V*").weights(), -v.weights())


def test_weight_zero_dimension_of_v_tensor_dual():
    rs = build_root_system("A", 2)
    wv, wd = make_rep(rs, "V").weights(), make_rep(rs, "V*").weights()
    total = (wv[:, None, :] + wd[None, :, :]).reshape(-1, 2)
    assert int(np.sum(np.all(np.abs(total) < 1e-12, axis=1))) == 3


def test_adjoint_weights_are_roots_and_zeros():
    rs = build_root_system("A", 2)
    ad = make_rep(rs, "ad")
    assert ad.dim == 8
    w = ad.weights()
    zero = np.all(np.abs(w) < 1e-12, axis=1)
    assert zero.sum() == 2
    cartan = np.array(rs.cartan_matrix)
    # nonzero weights are the roots, in simple-root pairings
    expected = {tuple(int(x) for x in np.array(rs.simple_coefficients(r)) @ cartan) for r in rs.roots}
    assert {tuple(int(round(x)) for x in row) for row in w[~zero]} == expected


def test_unknown_representation():
    with pytest.raises(UnsupportedAlgebraError):
        make_rep(build_root_system("A", 1), "Sym2")
