"""Deterministic constructors for the concrete example tuples.

Every constructor is pure given its arguments (and seed, where sampling is
involved); the fixtures double as the corpus for the whole test suite.
"""

import numpy as np

from .model import build_model_operators
from .operators import LatticeOperator, LatticeSpace
from .representation import AlgebraSpec, TwistedTuple, direct_sum
from .tensorspace import FiberSpec

EXAMPLE_IDS = (
    "c3_permutation",
    "m2_hardy",
    "fock_model",
    "scalar_s_family",
    "polydisc",
    "bilateral_counterexample",
    "unilateral_plus_bilateral",
)


def make(example, **params):
    """Dispatch on the example id; see the individual constructors."""
    fns = {
        "c3_permutation": make_c3_permutation,
        "m2_hardy": make_m2_hardy,
        "fock_model": lambda **p: make_fock_model(**p).tuple,
        "scalar_s_family": make_scalar_s_family,
        "polydisc": make_polydisc,
        "bilateral_counterexample": make_bilateral_counterexample,
        "unilateral_plus_bilateral": make_unilateral_plus_bilateral,
    }
    if example not in fns:
        raise ValueError(f"unknown example {example!r}; choose from {EXAMPLE_IDS}")
    return fns[example](**params)


def haar_unitary(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def unimodular(rng, d):
    return np.exp(2j * np.pi * rng.random(d))


# ---------------------------------------------------------------------------
# dense automorphic example on C^3


def make_c3_permutation():
    """The cyclic-permutation pair over the diagonal algebra ℂ³ (U₁₂ = I)."""
    space = LatticeSpace.create(0, 3)
    s1 = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=complex)
    s2 = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=complex)
    sigma = [LatticeOperator.const_block(space, _unit_diag(3, a)) for a in range(3)]
    s_ops = [LatticeOperator.const_block(space, s1), LatticeOperator.const_block(space, s2)]
    ops = [[s_ops[i] @ sigma[a] for a in range(3)] for i in range(2)]
    algebra = AlgebraSpec("diagonal", 3, automorphisms=[(1, 2, 0), (2, 0, 1)])
    return TwistedTuple(2, FiberSpec((3, 3)), ops, {}, algebra=algebra, sigma=sigma)


def _unit_diag(n, a):
    m = np.zeros((n, n), dtype=complex)
    m[a, a] = 1.0
    return m


# ---------------------------------------------------------------------------
# the M2 x Hardy-space example


def make_m2_hardy(lam=np.exp(1j * np.pi / 3)):
    """The doubly twisted pair U_i ⊗ V_i over M₂(ℂ) with twist W ⊗ U.

    The Hardy spaces are realized as the unsigned rank-2 lattice; the fiber
    ℂ⁴ is (algebra factor) ⊗ (direct-summand index), row-major.
    """
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > 1e-12:
        raise ValueError("the twist parameter must be unimodular")
    space = LatticeSpace.create(2, 4)
    u1 = np.diag([1.0, -1.0]).astype(complex)
    u2 = np.array([[0, 1], [1, 0]], dtype=complex)
    e00 = _unit_diag(2, 0)
    e11 = _unit_diag(2, 1)
    lam4 = lam * np.eye(4)
    # V1 = diag(M_z ⊗ I, D[λ] ⊗ M_z), V2 = diag(D[λ] ⊗ M_z, M_z ⊗ I)
    s1 = LatticeOperator.single(space, (1, 0), [(np.kron(u1, e00), (0, 0), 1)]) \
        + LatticeOperator.single(space, (0, 1), [(lam4, (1, 0), 0), (np.kron(u1, e11), (0, 0), 1)])
    s2 = LatticeOperator.single(space, (0, 1), [(lam4, (1, 0), 0), (np.kron(u2, e00), (0, 0), 1)]) \
        + LatticeOperator.single(space, (1, 0), [(np.kron(u2, e11), (0, 0), 1)])
    twist = LatticeOperator.const_block(
        space, np.kron(-np.eye(2), np.diag([np.conj(lam), lam])))
    sigma = []
    for a in range(2):
        for b in range(2):
            mat = np.zeros((2, 2), dtype=complex)
            mat[a, b] = 1.0
            sigma.append(LatticeOperator.const_block(space, np.kron(mat, np.eye(2))))
    ops = [[s1 @ sigma[alpha] for alpha in range(4)],
           [s2 @ sigma[alpha] for alpha in range(4)]]
    algebra = AlgebraSpec("matrix", 2, automorphisms=[u1, u2])
    return TwistedTuple(2, FiberSpec((4, 4)), ops, {(0, 1): twist}, algebra=algebra, sigma=sigma)


# ---------------------------------------------------------------------------
# Fock models with sampled commuting cores


def make_fock_model(k, subset, core_dim=2, seed=0, lattice_coords=None):
    """A seeded model instance: twists simultaneously diagonal in a Haar basis.

    Pairs inside the complement get the identity twist so the sampled core
    operators (diagonal in the same basis) satisfy the twisted relations
    exactly by construction.
    """
    subset = tuple(sorted(subset))
    rng = np.random.default_rng(seed)
    q = haar_unitary(rng, core_dim)
    comp = [c for c in range(k) if c not in subset]
    core_u = {}
    for i in range(k):
        for j in range(i + 1, k):
            if i in comp and j in comp:
                continue
            core_u[(i, j)] = q @ np.diag(unimodular(rng, core_dim)) @ q.conj().T
    core_w = {l: q @ np.diag(unimodular(rng, core_dim)) @ q.conj().T for l in comp}
    return build_model_operators(k, subset, core_dim, core_w, core_u,
                                 lattice_coords=lattice_coords)


def make_model_direct_sum(seed=0, core_dims=(2, 2)):
    """Direct sum of an A={0} and an A={0,1} model for k=2 on one rank-2 lattice."""
    fm1 = make_fock_model(2, (0,), core_dims[0], seed=seed, lattice_coords=(0, 1))
    fm2 = make_fock_model(2, (0, 1), core_dims[1], seed=seed + 1)
    return direct_sum(fm1.tuple, fm2.tuple), fm1, fm2


# ---------------------------------------------------------------------------
# scalar families


def make_polydisc(n):
    """The coordinate multishifts on the unsigned rank-n lattice (all twists I)."""
    if n < 1:
        raise ValueError("need at least one variable")
    space = LatticeSpace.create(n, 1)
    ops = [[LatticeOperator.single(space, tuple(1 if c == i else 0 for c in range(n)))]
           for i in range(n)]
    return TwistedTuple(n, FiberSpec((1,) * n), ops, {})


def make_doubly_noncommuting(z=1j):
    """A pair with V₁V₂ = z·V₂V₁ and the matching adjoint relation (scalar twist z)."""
    z = complex(z)
    if abs(abs(z) - 1.0) > 1e-12:
        raise ValueError("the commutation scalar must be unimodular")
    space = LatticeSpace.create(2, 1)
    zbar = np.conj(z) * np.eye(1)
    v1 = LatticeOperator.single(space, (1, 0))
    v2 = LatticeOperator.single(space, (0, 1), [(zbar, (1, 0), 0)])
    u12 = LatticeOperator.const_block(space, z * np.eye(1))
    return TwistedTuple(2, FiberSpec((1, 1)), [[v1], [v2]], {(0, 1): u12})


def make_scalar_s_family(seed=0):
    """A seeded doubly non-commuting pair (random unimodular twist)."""
    rng = np.random.default_rng(seed)
    return make_doubly_noncommuting(np.exp(2j * np.pi * rng.random()))


# ---------------------------------------------------------------------------
# decomposition fixtures


def make_bilateral_counterexample():
    """V₁ the bilateral shift; V₂ identity below zero and the shift above.

    Both are isometries, but the shift part of V₂ is not reduced by V₁, so no
    Wold decomposition exists for the pair.
    """
    space = LatticeSpace.create(1, 1, signed=True)
    v1 = LatticeOperator.single(space, (1,))
    v2 = LatticeOperator.single(space, (0,), window=((None, -1),)) \
        + LatticeOperator.single(space, (1,), window=((0, None),))
    return TwistedTuple(2, FiberSpec((1, 1)), [[v1], [v2]], {})


def make_unilateral_plus_bilateral():
    """k = 1: a unilateral shift direct-sum a bilateral shift, on one half-line lattice.

    Fiber 0 is the shift; the bilateral summand is folded onto the half-line as
    fibers 1 (degrees ≥ 0) and 2 (degrees < 0, reversed), so the classical Wold
    split is visible per degree.
    """
    space = LatticeSpace.create(1, 3)
    e = np.zeros((3, 3), dtype=complex)
    cross = e.copy()
    cross[1, 2] = 1.0   # f_{-1} -> f_0 stitches the fold at degree 0
    v = LatticeOperator.single(space, (1,), [(_unit_diag(3, 0), (0,), 1)]) \
        + LatticeOperator.single(space, (1,), [(_unit_diag(3, 1), (0,), 1)]) \
        + LatticeOperator.single(space, (-1,), [(_unit_diag(3, 2), (0,), 1)], window=((1, None),)) \
        + LatticeOperator.single(space, (0,), [(cross, (0,), 1)], window=((0, 0),))
    return TwistedTuple(1, FiberSpec((1,)), [[v]], {})
