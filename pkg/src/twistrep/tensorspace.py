"""Tensor bookkeeping: multi-indices, fiber data, iterated flips, hexagon checks.

Tensor factors are ordered row-major with the left factor slow: the basis
vector e_α ⊗ e_β of ℂ^a ⊗ ℂ^b sits at flat index α·b + β, and kron below is
exactly numpy's.  Every matrix identity in the package is stated in this fixed
order so results are comparable entrywise across modules.
"""

import itertools
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MultiIndex:
    """A lattice degree: point of ℤ^k, or of ℤ₊^k when unsigned."""

    coords: tuple
    signed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        if not self.signed and any(c < 0 for c in self.coords):
            raise ValueError(f"unsigned multi-index with negative coordinate: {self.coords}")

    @property
    def rank(self):
        return len(self.coords)

    def __add__(self, other):
        coords = tuple(a + b for a, b in zip(self.coords, other.coords))
        return MultiIndex(coords, self.signed or other.signed)

    @staticmethod
    def unit(rank, i, signed=False):
        return MultiIndex(tuple(1 if c == i else 0 for c in range(rank)), signed)


def kron(a, b):
    """Kronecker product in the fixed row-major order (left factor slow)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def swap_matrix(da, db):
    """The coordinate flip ℂ^da ⊗ ℂ^db → ℂ^db ⊗ ℂ^da, e_α⊗e_β ↦ e_β⊗e_α."""
    m = np.zeros((db * da, da * db))
    for al in range(da):
        for be in range(db):
            m[be * da + al, al * db + be] = 1.0
    return m


class FiberSpec:
    """Fiber dimensions d_1..d_k plus one unitary flip per unordered pair.

    Flips are stored for i < j as matrices E_i ⊗ E_j → E_j ⊗ E_i; the reverse
    direction is the inverse (= adjoint, the flips being unitary).
    """

    def __init__(self, dims, flips=None):
        self.dims = tuple(int(d) for d in dims)
        self.k = len(self.dims)
        self._flips = {}
        flips = flips or {}
        for (i, j), mat in flips.items():
            self.set_flip(i, j, mat)

    def set_flip(self, i, j, mat):
        if i == j:
            raise ValueError("flips are defined for distinct coordinates only")
        mat = np.array(mat, dtype=complex)
        want = (self.dims[j] * self.dims[i], self.dims[i] * self.dims[j])
        if mat.shape != want:
            raise ValueError(f"flip ({i},{j}) has shape {mat.shape}, expected {want}")
        if i < j:
            self._flips[(i, j)] = mat
        else:
            self._flips[(j, i)] = mat.conj().T

    def flip(self, i, j):
        """The unitary t_{ij}: E_i ⊗ E_j → E_j ⊗ E_i."""
        if i == j:
            raise ValueError("invalid pair: i = j")
        if i < j:
            mat = self._flips.get((i, j))
        else:
            stored = self._flips.get((j, i))
            mat = None if stored is None else stored.conj().T
        if mat is None:
            # default product-system structure: the coordinate swap
            return swap_matrix(self.dims[i], self.dims[j]).astype(complex)
        return mat

    @staticmethod
    def swaps(dims):
        """All-coordinate-swap flips (the symmetric product system)."""
        return FiberSpec(dims)


def flip_iterated(spec, i, j, n):
    """The unitary E_i ⊗ E_j^n → E_j^n ⊗ E_i moving the i-slot past n j-slots.

    Satisfies t^(n+1) = (I_{E_j^n} ⊗ t)(t^(n) ⊗ I_{E_j}); n = 0 is the identity.
    """
    if i == j:
        raise ValueError("invalid pair: i = j")
    if n < 0:
        raise ValueError("n must be nonnegative")
    di, dj = spec.dims[i], spec.dims[j]
    if n == 0:
        return np.eye(di, dtype=complex)
    t = spec.flip(i, j)
    out = t
    for level in range(1, n):
        out = kron(np.eye(dj ** level), t) @ kron(out, np.eye(dj))
    return out


def flip_block(spec, i, j, m, n):
    """The unitary E_i^m ⊗ E_j^n → E_j^n ⊗ E_i^m (each i-slot crosses all j-slots)."""
    if i == j:
        raise ValueError("invalid pair: i = j")
    if m < 0 or n < 0:
        raise ValueError("m, n must be nonnegative")
    di, dj = spec.dims[i], spec.dims[j]
    if m == 0:
        return np.eye(dj ** n, dtype=complex)
    tn = flip_iterated(spec, i, j, n)
    out = np.eye(di ** m * dj ** n, dtype=complex)
    for kk in range(m, 0, -1):
        factor = kron(np.eye(di ** (kk - 1)), kron(tn, np.eye(di ** (m - kk))))
        out = factor @ out
    return out


@dataclass
class HexagonReport:
    ok: bool
    max_deviation: float
    pair_deviations: dict      # (i, j) -> max(‖t†t − I‖_max, ‖t_ji t_ij − I‖_max)
    triple_deviations: dict    # (i, j, l, n) -> max-entry deviation
    first_violation: object    # (i, j, l, n) or (i, j) or None


def check_hexagon(spec, nmax=3, tol=0.0):
    """Verify flip unitarity, inverse pairing, and the braid identity at levels ≤ nmax.

    For every triple i > j > l and 1 ≤ n ≤ nmax the two routes
    E_i ⊗ E_j ⊗ E_l^n → E_l^n ⊗ E_j ⊗ E_i must agree as exact matrix equations.
    """
    thresh = max(tol, 1e-14)
    pair_devs = {}
    triple_devs = {}
    first = None
    for i, j in itertools.combinations(range(spec.k), 2):
        t = spec.flip(i, j)
        uni = np.abs(t.conj().T @ t - np.eye(t.shape[1])).max()
        inv = np.abs(spec.flip(j, i) @ t - np.eye(t.shape[1])).max()
        pair_devs[(i, j)] = float(max(uni, inv))
        if pair_devs[(i, j)] > thresh and first is None:
            first = (i, j)
    for i in range(spec.k - 1, -1, -1):
        for j in range(i - 1, -1, -1):
            for l in range(j - 1, -1, -1):
                di, dj, dl = spec.dims[i], spec.dims[j], spec.dims[l]
                for n in range(1, nmax + 1):
                    til = flip_iterated(spec, i, l, n)
                    tjl = flip_iterated(spec, j, l, n)
                    lhs = kron(np.eye(dl ** n), spec.flip(i, j)) @ kron(til, np.eye(dj)) \
                        @ kron(np.eye(di), tjl)
                    rhs = kron(tjl, np.eye(di)) @ kron(np.eye(dj), til) \
                        @ kron(spec.flip(i, j), np.eye(dl ** n))
                    dev = float(np.abs(lhs - rhs).max())
                    triple_devs[(i, j, l, n)] = dev
                    if dev > thresh and first is None:
                        first = (i, j, l, n)
    devs = list(pair_devs.values()) + list(triple_devs.values())
    worst = max(devs) if devs else 0.0
    return HexagonReport(first is None, worst, pair_devs, triple_devs, first)
