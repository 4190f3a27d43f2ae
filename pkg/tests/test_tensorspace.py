import itertools

import numpy as np
import pytest

from twistrep.tensorspace import (
    FiberSpec,
    MultiIndex,
    check_hexagon,
    flip_block,
    flip_iterated,
    kron,
    swap_matrix,
)

S1 = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=complex)
S2 = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=complex)


def random_unitary(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_multiindex_invariants():
    n = MultiIndex((1, 2, 0))
    assert n.rank == 3
    assert (n + MultiIndex.unit(3, 1)).coords == (1, 3, 0)
    with pytest.raises(ValueError):
        MultiIndex((1, -1))
    MultiIndex((1, -1), signed=True)


def test_kron_identity_cases():
    assert np.array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))
    x = np.array([[0, 1], [1, 0]])
    assert np.array_equal(kron(x, np.eye(1)), x)


def test_kron_c3_permutations_brute_force():
    # S1: e_a -> e_{a+1 mod 3}, S2: e_b -> e_{b+2 mod 3}; oracle checks all 9
    # basis vectors of the fixed row-major tensor order.
    big = kron(S1, S2)
    for a in range(3):
        for b in range(3):
            vin = np.zeros(9)
            vin[a * 3 + b] = 1.0
            out = big @ vin
            expected = np.zeros(9)
            expected[((a + 1) % 3) * 3 + ((b + 2) % 3)] = 1.0
            assert np.array_equal(out, expected)


def test_flip_iterated_base_cases():
    spec = FiberSpec.swaps((2, 3))
    assert np.array_equal(flip_iterated(spec, 0, 1, 0), np.eye(2))
    assert np.array_equal(flip_iterated(spec, 0, 1, 1), spec.flip(0, 1))
    with pytest.raises(ValueError):
        flip_iterated(spec, 1, 1, 2)


def test_flip_iterated_swap_n2_moves_first_slot_past_two():
    # oracle: on e_al ⊗ e_be ⊗ e_ga the map must produce e_be ⊗ e_ga ⊗ e_al
    spec = FiberSpec.swaps((2, 2))
    t2 = flip_iterated(spec, 0, 1, 2)
    assert t2.shape == (8, 8)
    for al, be, ga in itertools.product(range(2), repeat=3):
        vin = np.zeros(8)
        vin[al * 4 + be * 2 + ga] = 1.0
        expected = np.zeros(8)
        expected[be * 4 + ga * 2 + al] = 1.0
        assert np.array_equal(t2 @ vin, expected)
    t = spec.flip(0, 1)
    composed = kron(np.eye(2), t) @ kron(t, np.eye(2))
    assert np.array_equal(t2, composed)


def test_flip_iterated_recursion_random_flips():
    rng = np.random.default_rng(7)
    spec = FiberSpec((2, 3), {(0, 1): random_unitary(rng, 6)})
    for n in range(1, 4):
        lhs = flip_iterated(spec, 0, 1, n + 1)
        rhs = kron(np.eye(3 ** n), spec.flip(0, 1)) @ kron(flip_iterated(spec, 0, 1, n), np.eye(3))
        assert np.abs(lhs - rhs).max() < 1e-14


def test_flip_block_collapse_cases():
    rng = np.random.default_rng(3)
    spec = FiberSpec((2, 2), {(0, 1): random_unitary(rng, 4)})
    for n in range(4):
        assert np.abs(flip_block(spec, 0, 1, 1, n) - flip_iterated(spec, 0, 1, n)).max() < 1e-15
    assert np.array_equal(flip_block(spec, 0, 1, 3, 0), np.eye(8))
    one = FiberSpec((1, 1), {(0, 1): np.array([[1.0]])})
    assert flip_block(one, 0, 1, 2, 2).shape == (1, 1)
    assert abs(flip_block(one, 0, 1, 2, 2)[0, 0] - 1.0) == 0.0


def test_flip_block_second_index_recursion():
    rng = np.random.default_rng(11)
    spec = FiberSpec((2, 2), {(0, 1): random_unitary(rng, 4)})
    for m in range(1, 3):
        for n in range(1, 3):
            lhs = flip_block(spec, 0, 1, m, n)
            rhs = kron(np.eye(2 ** (n - 1)), flip_block(spec, 0, 1, m, 1)) \
                @ kron(flip_block(spec, 0, 1, m, n - 1), np.eye(2))
            assert np.abs(lhs - rhs).max() < 1e-13


def test_flip_block_unitary_and_inverse_pairing():
    rng = np.random.default_rng(23)
    spec = FiberSpec((2, 3), {(0, 1): random_unitary(rng, 6)})
    for m, n in [(1, 2), (2, 1), (2, 2)]:
        x = flip_block(spec, 0, 1, m, n)
        assert np.abs(x.conj().T @ x - np.eye(x.shape[1])).max() < 1e-12
        back = flip_block(spec, 1, 0, n, m)
        assert np.abs(back @ x - np.eye(x.shape[1])).max() < 1e-12


def test_swap_matrix_action():
    s = swap_matrix(2, 3)
    for al in range(2):
        for be in range(3):
            vin = np.zeros(6)
            vin[al * 3 + be] = 1.0
            out = s @ vin
            expected = np.zeros(6)
            expected[be * 2 + al] = 1.0
            assert np.array_equal(out, expected)


def test_hexagon_swaps_all_small_dims():
    for dims in itertools.product((1, 2), repeat=3):
        report = check_hexagon(FiberSpec.swaps(dims), nmax=3)
        assert report.ok
        assert report.max_deviation == 0.0


def test_hexagon_scalar_unimodular_flips():
    # with one-dimensional fibers both braid routes reduce to the same scalar
    # product, so any unimodular flips satisfy the identity exactly
    rng = np.random.default_rng(5)
    phases = {pair: np.exp(2j * np.pi * rng.random()) for pair in [(0, 1), (0, 2), (1, 2)]}
    spec = FiberSpec((1, 1, 1), {p: np.array([[z]]) for p, z in phases.items()})
    report = check_hexagon(spec, nmax=3)
    assert report.ok
    assert report.max_deviation < 1e-15
    def phase(i, j):
        return phases[(i, j)] if i < j else np.conj(phases[(j, i)])

    for (i, j, l, n), dev in report.triple_deviations.items():
        lhs = phase(i, j) * phase(j, l) ** n * phase(i, l) ** n
        rhs = phase(j, l) ** n * phase(i, l) ** n * phase(i, j)
        assert abs(lhs - rhs) < 1e-14
        assert dev <= 1e-14


# Bell-basis braid matrix: a non-monomial unitary whose all-pairs family
# satisfies the hexagon, so corruptions are actually detectable.
BELL = np.array([[1, 0, 0, 1], [0, 1, 1, 0], [0, -1, 1, 0], [-1, 0, 0, 1]], dtype=complex) / np.sqrt(2)


def test_hexagon_bell_family_valid():
    spec = FiberSpec((2, 2, 2), {(0, 1): BELL, (0, 2): BELL, (1, 2): BELL})
    report = check_hexagon(spec, nmax=3)
    assert report.ok
    assert report.max_deviation < 1e-14


def test_hexagon_corrupted_flip_detected():
    # flipping the sign of one column keeps the flip unitary but breaks the
    # braid identity; the report must locate the offending triple and level
    bad = BELL @ np.diag([1.0, 1.0, 1.0, -1.0])
    spec = FiberSpec((2, 2, 2), {(0, 1): bad, (0, 2): BELL, (1, 2): BELL})
    report = check_hexagon(spec, nmax=2)
    assert not report.ok
    assert max(report.pair_deviations.values()) < 1e-14
    assert report.max_deviation > 0.5
    i, j, l, n = report.first_violation
    assert report.triple_deviations[(i, j, l, n)] > 0.5


def test_hexagon_nonunitary_corruption_detected_in_pair_checks():
    bad = BELL.copy()
    bad[0, 3] = -bad[0, 3]  # single-entry sign flip destroys unitarity
    spec = FiberSpec((2, 2, 2), {(0, 1): bad, (0, 2): BELL, (1, 2): BELL})
    report = check_hexagon(spec, nmax=2)
    assert not report.ok
    assert report.first_violation == (0, 1)
    assert report.pair_deviations[(0, 1)] > 0.5
