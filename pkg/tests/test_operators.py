import numpy as np
import pytest

from twistrep import _kernels
from twistrep.operators import (
    DenseOperator,
    DenseSpace,
    GradedVector,
    LatticeOperator,
    LatticeSpace,
    equal_on_window,
    is_zero_on_window,
)


def shift(space, coord, factors=()):
    off = tuple(1 if c == coord else 0 for c in range(space.rank))
    return LatticeOperator.single(space, off, factors)


def test_zero_and_basis_vectors():
    sp = LatticeSpace.create(2, 1)
    v = GradedVector.basis(sp, (0, 0))
    assert LatticeOperator.zero(sp).apply(v).norm() == 0.0
    assert v.norm() == 1.0
    assert abs(v.inner(v) - 1.0) == 0.0


def test_unilateral_shift_creation_on_vacuum():
    sp = LatticeSpace.create(1, 2)
    s = shift(sp, 0)
    h = GradedVector(sp, [(0,)], [[0.5, 0.5j]])
    out = s.apply(h)
    assert out.to_dict().keys() == {(1,)}
    assert np.array_equal(out.component((1,)), [0.5, 0.5j])


def test_twisted_creation_term_hand_evaluated():
    # single-term operator delta_n (x) h -> delta_{n+e2} (x) U^{n1} h, checked
    # against matrix_power directly for several degrees
    sp = LatticeSpace.create(2, 2)
    u = np.array([[0, -1], [1, 0]], dtype=complex)
    m2 = LatticeOperator.single(sp, (0, 1), [(u, (1, 0), 0)])
    h = np.array([1.0, 2.0j])
    for n1 in range(4):
        v = GradedVector(sp, [(n1, 3)], [h])
        out = m2.apply(v)
        assert out.to_dict().keys() == {(n1, 4)}
        expected = np.linalg.matrix_power(u, n1) @ h
        assert np.abs(out.component((n1, 4)) - expected).max() < 1e-15


def test_adjoint_is_termwise_involution():
    sp = LatticeSpace.create(2, 2)
    u = np.array([[0, 1j], [1j, 0]])
    op = LatticeOperator.single(sp, (1, -1), [(u, (1, 2), -1)], coeff=2.5 - 1j,
                                window=((0, 5), (None, None)))
    again = op.adjoint().adjoint()
    assert again.terms == op.terms


def test_adjoint_of_shift_kills_vacuum():
    sp = LatticeSpace.create(1, 1)
    s = shift(sp, 0)
    vac = GradedVector.basis(sp, (0,))
    assert s.adjoint().apply(vac).norm() == 0.0
    assert s.adjoint().apply(GradedVector.basis(sp, (3,))).to_dict().keys() == {(2,)}


def test_adjoint_pairing_random_vectors():
    rng = np.random.default_rng(42)
    sp = LatticeSpace.create(2, 2)
    u = np.array([[0.6, 0.8], [-0.8, 0.6]], dtype=complex)
    op = LatticeOperator.single(sp, (1, 0), [(u, (0, 1), 1)]) \
        + LatticeOperator.single(sp, (0, -1), [(u, (1, 0), 0)], coeff=0.3j)
    for _ in range(20):
        degs = rng.integers(0, 4, size=(3, 2))
        v = GradedVector(sp, degs, rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2)))
        degs = rng.integers(0, 4, size=(3, 2))
        w = GradedVector(sp, degs, rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2)))
        lhs = w.inner(op.apply(v))
        rhs = op.adjoint().apply(w).inner(v)
        assert abs(lhs - rhs) < 1e-12


def test_shift_relations_on_halfline():
    # S*S = I everywhere; SS* = I - P0, checked on degrees <= 5
    sp = LatticeSpace.create(1, 1)
    s = shift(sp, 0)
    eye = LatticeOperator.identity(sp)
    assert equal_on_window(s.adjoint() @ s, eye, window=8, tol=0.0)
    ssa = s @ s.adjoint()
    for n in range(6):
        v = GradedVector.basis(sp, (n,))
        out = ssa.apply(v)
        expected = 0.0 if n == 0 else 1.0
        assert abs(out.inner(v).real - expected) == 0.0
    report = equal_on_window(ssa, eye, window=5, tol=1e-14)
    assert not report.equal
    assert report.worst == ((0,), 0)
    assert abs(report.max_deviation - 1.0) == 0.0


def test_compose_matches_sequential_apply():
    rng = np.random.default_rng(9)
    sp = LatticeSpace.create(2, 2)
    u = np.array([[1, 1], [0, 1]], dtype=complex)  # non-unitary on purpose
    a = LatticeOperator.single(sp, (1, 0), [(u, (0, 1), 0)], coeff=1.5) \
        + LatticeOperator.single(sp, (0, 0), [(u, (0, 0), 1)], coeff=-0.5j)
    b = LatticeOperator.single(sp, (0, -1), [(u, (1, 0), 1)]) \
        + LatticeOperator.single(sp, (1, 1), [], coeff=2.0)
    ab = a @ b
    for _ in range(10):
        degs = rng.integers(0, 4, size=(4, 2))
        v = GradedVector(sp, degs, rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2)))
        direct = ab.apply(v)
        seq = a.apply(b.apply(v))
        assert (direct - seq).norm() < 1e-12


def test_compose_truncation_boundary_exact():
    # composing through the boundary must keep the annihilation: S S* != I, and
    # the termwise composite must agree with sequential application at degree 0
    sp = LatticeSpace.create(1, 1)
    s = shift(sp, 0)
    ssa = s @ s.adjoint()
    vac = GradedVector.basis(sp, (0,))
    assert ssa.apply(vac).norm() == 0.0
    assert s.apply(s.adjoint().apply(vac)).norm() == 0.0


def test_untwisted_shifts_commute():
    sp = LatticeSpace.create(2, 1)
    s1, s2 = shift(sp, 0), shift(sp, 1)
    assert equal_on_window(s1 @ s2, s2 @ s1, window=6, tol=0.0)


def test_identity_compose_neutral():
    sp = LatticeSpace.create(1, 3)
    u = np.diag([1.0, 1j, -1.0])
    op = LatticeOperator.single(sp, (1,), [(u, (1,), 0)])
    eye = LatticeOperator.identity(sp)
    assert (op @ eye).terms == op.terms
    assert (eye @ op).terms == op.terms


def test_signed_lattice_bilateral_shift_unitary():
    sp = LatticeSpace.create(1, 1, signed=True)
    s = shift(sp, 0)
    eye = LatticeOperator.identity(sp)
    assert equal_on_window(s.adjoint() @ s, eye, window=6, tol=0.0)
    assert equal_on_window(s @ s.adjoint(), eye, window=6, tol=0.0)


def test_windowed_two_term_operator():
    # identity below zero, shift above: V2 of the decomposition counterexample
    sp = LatticeSpace.create(1, 1, signed=True)
    v2 = LatticeOperator.single(sp, (0,), window=((None, -1),)) \
        + LatticeOperator.single(sp, (1,), window=((0, None),))
    eye = LatticeOperator.identity(sp)
    assert equal_on_window(v2.adjoint() @ v2, eye, window=6, tol=0.0)
    vva = v2 @ v2.adjoint()
    vac = GradedVector.basis(sp, (0,))
    assert vva.apply(vac).norm() == 0.0
    for n in (-3, -1, 1, 2):
        v = GradedVector.basis(sp, (n,))
        assert (vva.apply(v) - v).norm() == 0.0


def test_signed_continuation_of_halfline_shift():
    sp = LatticeSpace.create(1, 1)
    s = shift(sp, 0)
    bs = s.continued_on(sp.signed_version())
    eye = LatticeOperator.identity(bs.space)
    assert equal_on_window(bs @ bs.adjoint(), eye, window=5, tol=0.0)
    # forward action restricted to the half-line agrees with the original
    for n in range(4):
        a = s.apply(GradedVector.basis(sp, (n,)))
        b = bs.apply(GradedVector.basis(bs.space, (n,)))
        assert a.to_dict().keys() == b.to_dict().keys()


def test_equal_on_window_locates_corruption():
    sp = LatticeSpace.create(1, 2)
    u = np.diag([1.0, -1.0])
    good = LatticeOperator.single(sp, (1,), [(u, (1,), 0)])
    bad = LatticeOperator.single(sp, (1,), [(np.diag([1.0, 1.0]), (1,), 0)])
    report = equal_on_window(good, bad, window=4, tol=1e-12)
    assert not report.equal
    deg, fiber = report.worst
    assert deg[0] % 2 == 1 and fiber == 1  # (-1)^n differs first in the odd fibers
    assert equal_on_window(good, good, window=4, tol=0.0).max_deviation == 0.0


def test_dense_operator_surface():
    sp = DenseSpace(3)
    a = DenseOperator(sp, np.diag([1.0, 2.0, 3.0]))
    b = DenseOperator(sp, np.ones((3, 3)))
    assert np.array_equal((a @ b).matrix, a.matrix @ b.matrix)
    assert np.array_equal(a.adjoint().matrix, a.matrix.conj().T)
    rep = equal_on_window(a, a, tol=0.0)
    assert rep.equal
    assert not equal_on_window(a, b, tol=1e-12).equal
    assert is_zero_on_window(a - a, tol=0.0).equal


def test_kernel_paths_agree():
    rng = np.random.default_rng(17)
    d = 3
    tables = np.stack([
        np.stack([rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(5)])
        for _ in range(2)
    ])
    bases = np.array([-2, 0], dtype=np.int64)
    expo = np.stack([rng.integers(-2, 3, size=10), rng.integers(0, 5, size=10)], axis=1).astype(np.int64)
    comps = rng.normal(size=(10, d)) + 1j * rng.normal(size=(10, d))
    blocks_np = _kernels.chain_blocks_numpy(tables, bases, expo)
    applied_np = _kernels.apply_chain_numpy(tables, bases, expo, comps)
    blocks = _kernels.chain_blocks(tables, bases, expo)
    applied = _kernels.apply_chain(tables, bases, expo, comps)
    assert np.abs(blocks - blocks_np).max() < 1e-13
    assert np.abs(applied - applied_np).max() < 1e-13


def test_merge_of_equal_terms():
    sp = LatticeSpace.create(1, 1)
    s = shift(sp, 0)
    twice = s + s
    assert len(twice.terms) == 1
    assert twice.terms[0].coeff == 2.0
    cancel = s - s
    assert len(cancel.terms) == 0
