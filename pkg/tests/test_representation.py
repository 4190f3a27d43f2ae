import numpy as np
import pytest

from twistrep import factory
from twistrep.operators import GradedVector, LatticeOperator, LatticeSpace, equal_on_window
from twistrep.representation import AlgebraSpec, TwistedTuple, direct_sum, induce_from_s
from twistrep.tensorspace import FiberSpec


def shift(space, coord):
    return LatticeOperator.single(space, tuple(1 if c == coord else 0 for c in range(space.rank)))


def test_polydisc_passes_all_checks():
    t = factory.make_polydisc(2)
    for rep in t.check_all(window=6):
        assert rep.ok
        assert rep.max_deviation == 0.0


def test_single_isometry_trivially_twisted():
    t = factory.make_polydisc(1)
    assert t.check_twisted(window=6).ok
    assert t.check_doubly_twisted(window=6).ok  # k=1 is vacuous


def test_contraction_fails_isometric_with_expected_deviation():
    sp = LatticeSpace.create(1, 1)
    half = LatticeOperator.single(sp, (1,), coeff=0.5)
    t = TwistedTuple(1, FiberSpec((1,)), [[half]], {})
    rep = t.check_isometric(window=4)
    assert not rep.ok
    assert abs(rep.max_deviation - 0.75) < 1e-14


def test_equal_shifts_fail_doubly_twisted_at_vacuum():
    sp = LatticeSpace.create(1, 1)
    s = shift(sp, 0)
    t = TwistedTuple(2, FiberSpec((1, 1)), [[s], [s]], {})
    assert t.check_twisted(window=5).ok        # S commutes with itself
    rep = t.check_doubly_twisted(window=5)
    assert not rep.ok
    assert tuple(rep.worst["degree"]) == (0,)  # S*S = I vs SS* = I - P0 shows at the vacuum


def test_corrupted_twist_located():
    t = factory.make_doubly_noncommuting(1j)
    # replace the scalar twist by the identity; relations fail away from zero
    bad = TwistedTuple(2, t.fibers, t.ops, {})
    rep = bad.check_twisted(window=5)
    assert not rep.ok
    assert rep.worst["check"] == "twisted"
    rep2 = bad.check_doubly_twisted(window=5)
    assert not rep2.ok


def test_twisted_check_symmetric_in_the_pair():
    t = factory.make_doubly_noncommuting(np.exp(0.7j))
    rep = t.check_twisted(window=5)
    assert rep.ok
    # flipping the stored direction of the twist must not change the verdict
    u = t.twist(0, 1)
    t2 = TwistedTuple(2, t.fibers, t.ops, {(1, 0): u.adjoint()})
    assert t2.check_twisted(window=5).ok
    assert t2.check_doubly_twisted(window=5).ok


def test_all_identity_twists_reduce_to_doubly_commuting():
    # with U = I the twisted checks are exactly the doubly commuting relations
    t = factory.make_polydisc(3)
    assert t.check_twisted(window=4).ok
    assert t.check_doubly_twisted(window=4).ok
    bad = factory.make_doubly_noncommuting(1j)
    untw = TwistedTuple(2, bad.fibers, bad.ops, {})
    assert not untw.check_twisted(window=4).ok


def test_c3_permutation_fixture():
    t = factory.make_c3_permutation()
    reports = {r.name: r for r in t.check_all(window=2)}
    assert all(r.ok for r in reports.values())
    s1 = t.coordinate_op(0)
    s2 = t.coordinate_op(1)
    eye = LatticeOperator.identity(t.space)
    assert equal_on_window(s1 @ s2, eye, 2, 0.0).equal
    assert equal_on_window(s2 @ s1, eye, 2, 0.0).equal


def test_c3_wrong_automorphism_fails_covariance():
    t = factory.make_c3_permutation()
    algebra = AlgebraSpec("diagonal", 3, automorphisms=[(0, 1, 2), (0, 1, 2)])
    bad = TwistedTuple(2, t.fibers, t.ops, {}, algebra=algebra, sigma=t.sigma_ops)
    rep = bad.check_covariance_automorphic(window=2)
    assert not rep.ok


@pytest.mark.parametrize("lam", [np.exp(1j * np.pi / 3), 1.0])
def test_m2_hardy_fixture(lam):
    t = factory.make_m2_hardy(lam)
    reports = {r.name: r for r in t.check_all(window=4, tol=1e-12)}
    for name, rep in reports.items():
        assert rep.ok, (name, rep.max_deviation)


def test_m2_twist_relation_matches_construction():
    lam = np.exp(1j * np.pi / 3)
    t = factory.make_m2_hardy(lam)
    s1, s2 = t.coordinate_op(0), t.coordinate_op(1)
    u = t.twist(0, 1)
    assert equal_on_window(s1 @ s2, u @ s2 @ s1, 4, 1e-12).equal
    assert equal_on_window(s1.adjoint() @ s2, u.adjoint() @ s2 @ s1.adjoint(), 4, 1e-12).equal


def test_fully_coisometric_twisted_implies_doubly_twisted():
    # unitypical instances: every fixture whose coordinates are all unitary on
    # the window must pass the doubly twisted check whenever twisted passes
    for t in (factory.make_c3_permutation(),):
        assert t.check_twisted(window=2).ok
        defects_vanish = all(
            equal_on_window(t.coordinate_op(i) @ t.coordinate_op(i).adjoint(),
                            LatticeOperator.identity(t.space), 2, 1e-12).equal
            for i in range(t.k))
        assert defects_vanish
        assert t.check_doubly_twisted(window=2).ok


def test_induce_from_s_packages_and_validates():
    sp = LatticeSpace.create(2, 1)
    v1 = shift(sp, 0)
    z = np.exp(0.3j)
    v2 = LatticeOperator.single(sp, (0, 1), [(np.conj(z) * np.eye(1), (1, 0), 0)])
    u12 = LatticeOperator.const_block(sp, z * np.eye(1))
    t = induce_from_s([[v1], [v2]], FiberSpec((1, 1)), {(0, 1): u12}, window=5)
    assert t.check_twisted(window=5).ok
    assert t.check_doubly_twisted(window=5).ok
    with pytest.raises(ValueError, match="row-contraction"):
        induce_from_s([[v1.scale(1.5)], [v2]], FiberSpec((1, 1)), {(0, 1): u12}, window=4)


def test_scalar_flip_coefficient_branch_detects_mismatch():
    # a two-dimensional fiber pair with swap flip and incompatible operators
    # must fail through the coefficient-expanded relation
    sp = LatticeSpace.create(1, 2)
    a = LatticeOperator.single(sp, (1,), [(np.diag([1.0, -1.0]), (0,), 1)])
    b = LatticeOperator.single(sp, (1,), [(np.array([[0, 1], [1, 0]]), (0,), 1)])
    t = TwistedTuple(2, FiberSpec((2, 1)), [[a, b], [a]], {})
    rep = t.check_twisted(window=4)
    assert not rep.ok


def test_direct_sum_of_models_passes_checks():
    t, fm1, fm2 = factory.make_model_direct_sum(seed=4)
    assert t.space.dim == fm1.core_dim + fm2.core_dim
    for rep in t.check_all(window=4):
        assert rep.ok, (rep.name, rep.max_deviation)


def test_random_seeded_fock_models_pass(seed_count=3):
    for seed in range(seed_count):
        for subset in [(0,), (1,), (0, 1)]:
            t = factory.make_fock_model(2, subset, 2, seed=seed).tuple
            for rep in t.check_all(window=4, tol=1e-10):
                assert rep.ok, (seed, subset, rep.name, rep.max_deviation)
