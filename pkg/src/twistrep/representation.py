"""Twisted-tuple data model and the relation checkers.

A tuple is stored through the basis-explicit operator family: for coordinate i
and fiber basis index α the operator S^i_α realizes the action of the i-th
coordinate map on the α-th fiber basis vector.  Relations are verified per
basis pair on a degree window; each check returns a report with the worst
deviation and a locator for the first offending (indices, degree, fiber).

Three coefficient-algebra kinds are supported:

* ``scalar``  - algebra ℂ, arbitrary fiber dimensions and explicit flips; the
  twisted/doubly twisted relations are checked in their coefficient-expanded
  form against the flip matrices.
* ``diagonal`` - algebra ℂ^m with commuting permutation automorphisms,
  fibers the algebra itself; relations are checked in operator form through
  the single coordinate operators S_i (with S^i_α = S_i σ(b_α)).
* ``matrix``  - algebra M_d(ℂ) with commuting unitary-conjugation
  automorphisms, same operator-form checks.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .operators import (
    DenseOperator,
    Factor,
    LatticeOperator,
    LatticeSpace,
    Term,
    equal_on_window,
    windowed_matrix,
)
from .tensorspace import FiberSpec


# ---------------------------------------------------------------------------
# coefficient algebras


class AlgebraSpec:
    """ℂ, ℂ^m with permutation automorphisms, or M_d(ℂ) with unitary ones."""

    def __init__(self, kind, size=1, automorphisms=None):
        if kind not in ("scalar", "diagonal", "matrix"):
            raise ValueError(f"unknown algebra kind {kind!r}")
        self.kind = kind
        self.size = int(size)
        self.automorphisms = automorphisms
        if kind == "diagonal" and automorphisms is not None:
            perms = [tuple(int(x) for x in p) for p in automorphisms]
            for p, q in itertools.combinations(perms, 2):
                if tuple(p[q[t]] for t in range(self.size)) != tuple(q[p[t]] for t in range(self.size)):
                    raise ValueError("diagonal automorphisms must commute")
            self.automorphisms = perms
        if kind == "matrix" and automorphisms is not None:
            mats = [np.array(q, dtype=complex) for q in automorphisms]
            for p, q in itertools.combinations(range(len(mats)), 2):
                a, b = mats[p], mats[q]
                lhs = a @ b @ a.conj().T @ b.conj().T
                # conjugations commute iff the commutator is central (a phase)
                if np.abs(lhs - lhs[0, 0] * np.eye(len(a))).max() > 1e-12:
                    raise ValueError("matrix automorphisms must commute")
            self.automorphisms = mats

    @staticmethod
    def scalar():
        return AlgebraSpec("scalar")

    @property
    def basis_size(self):
        if self.kind == "scalar":
            return 1
        if self.kind == "diagonal":
            return self.size
        return self.size * self.size

    @property
    def unit_indices(self):
        """Basis indices whose elements sum to the algebra unit."""
        if self.kind == "scalar":
            return (0,)
        if self.kind == "diagonal":
            return tuple(range(self.size))
        return tuple(a * self.size + a for a in range(self.size))

    def basis_matrix(self, alpha):
        """The basis element itself, as a matrix (diagonal kinds embed as diag)."""
        if self.kind == "scalar":
            return np.eye(1, dtype=complex)
        if self.kind == "diagonal":
            m = np.zeros((self.size, self.size), dtype=complex)
            m[alpha, alpha] = 1.0
            return m
        a, b = divmod(alpha, self.size)
        m = np.zeros((self.size, self.size), dtype=complex)
        m[a, b] = 1.0
        return m

    def gram(self, alpha, beta):
        """Coefficients of ⟨b_α, b_β⟩ = b_α^* b_β over the basis."""
        out = np.zeros(self.basis_size, dtype=complex)
        if self.kind == "scalar":
            out[0] = 1.0 if alpha == beta else 0.0
        elif self.kind == "diagonal":
            if alpha == beta:
                out[alpha] = 1.0
        else:
            a, b = divmod(alpha, self.size)
            c, d = divmod(beta, self.size)
            if a == c:
                out[b * self.size + d] = 1.0
        return out

    def auto_image(self, i, alpha):
        """Coefficients of α_i(b_α) over the basis."""
        out = np.zeros(self.basis_size, dtype=complex)
        if self.kind == "scalar":
            out[0] = 1.0
            return out
        if self.automorphisms is None:
            raise ValueError("automorphisms not set")
        if self.kind == "diagonal":
            p = self.automorphisms[i]
            # alpha_i(x)_t = x_{p(t)}, so the idempotent e_alpha maps to e_{p^{-1}(alpha)}
            out[p.index(alpha)] = 1.0
            return out
        q = self.automorphisms[i]
        a, b = divmod(alpha, self.size)
        image = np.outer(q[:, a], q[:, b].conj())
        return image.reshape(-1)

    def product(self, alpha, beta):
        """Coefficients of b_α · b_β over the basis."""
        out = np.zeros(self.basis_size, dtype=complex)
        if self.kind == "scalar":
            out[0] = 1.0
        elif self.kind == "diagonal":
            if alpha == beta:
                out[alpha] = 1.0
        else:
            a, b = divmod(alpha, self.size)
            c, d = divmod(beta, self.size)
            if b == c:
                out[a * self.size + d] = 1.0
        return out

    def star(self, alpha):
        """Basis index/coefficients of b_α^*."""
        out = np.zeros(self.basis_size, dtype=complex)
        if self.kind == "scalar":
            out[0] = 1.0
        elif self.kind == "diagonal":
            out[alpha] = 1.0
        else:
            a, b = divmod(alpha, self.size)
            out[b * self.size + a] = 1.0
        return out


# ---------------------------------------------------------------------------
# reports


@dataclass
class CheckReport:
    name: str
    ok: bool
    max_deviation: float
    tol: float
    worst: dict | None

    def __bool__(self):
        return self.ok

    def as_dict(self):
        return {
            "name": self.name,
            "passed": bool(self.ok),
            "max_deviation": self.max_deviation,
            "tol": self.tol,
            "worst": self.worst,
        }


class _Collector:
    """Accumulates labelled window-equality outcomes into one CheckReport."""

    def __init__(self, name, tol):
        self.name = name
        self.tol = tol
        self.max_dev = 0.0
        self.worst = None
        self.first_failure = None

    def take(self, label, report):
        if report.max_deviation > self.max_dev or self.worst is None:
            self.max_dev = report.max_deviation
            self.worst = dict(label, degree=list(report.worst[0]), fiber=report.worst[1],
                              deviation=report.max_deviation)
        if not report.equal and self.first_failure is None:
            self.first_failure = dict(label, degree=list(report.worst[0]), fiber=report.worst[1],
                                      deviation=report.max_deviation)

    def report(self):
        return CheckReport(self.name, self.first_failure is None, self.max_dev, self.tol,
                           self.first_failure or self.worst)


# ---------------------------------------------------------------------------
# the tuple


class TwistedTuple:
    """A candidate (doubly) twisted isometric tuple in basis-explicit form."""

    def __init__(self, k, fibers, ops, twists, algebra=None, sigma=None):
        self.k = int(k)
        self.fibers = fibers if isinstance(fibers, FiberSpec) else FiberSpec(fibers)
        self.algebra = algebra or AlgebraSpec.scalar()
        self.ops = [list(row) for row in ops]
        if len(self.ops) != self.k:
            raise ValueError("need one operator family per coordinate")
        for i, row in enumerate(self.ops):
            if len(row) != self.fibers.dims[i]:
                raise ValueError(f"coordinate {i}: {len(row)} operators for fiber dim {self.fibers.dims[i]}")
        self.space = self.ops[0][0].space
        self._twists = {}
        for (i, j), u in (twists or {}).items():
            if i == j:
                raise ValueError("twists are indexed by distinct pairs")
            if i < j:
                self._twists[(i, j)] = u
            else:
                self._twists[(j, i)] = u.adjoint()
        self.sigma_ops = list(sigma) if sigma is not None else None
        if self.algebra.kind != "scalar" and self.sigma_ops is None:
            raise ValueError("nonscalar algebra requires sigma")

    # -- accessors -----------------------------------------------------------

    def op(self, i, alpha=0):
        return self.ops[i][alpha]

    def twist(self, i, j):
        """U_{ij}; the reverse direction is the adjoint."""
        if i == j:
            raise ValueError("invalid pair")
        if i < j:
            u = self._twists.get((i, j))
            return u if u is not None else self._identity()
        u = self._twists.get((j, i))
        return u.adjoint() if u is not None else self._identity()

    def twist_pairs(self):
        return sorted(self._twists.keys())

    def coordinate_op(self, i):
        """The single operator S_i of the automorphic encodings (sum over units)."""
        if self.algebra.kind == "scalar":
            if self.fibers.dims[i] != 1:
                raise ValueError("coordinate_op needs one-dimensional fibers in the scalar case")
            return self.ops[i][0]
        total = None
        for alpha in self.algebra.unit_indices:
            total = self.ops[i][alpha] if total is None else total + self.ops[i][alpha]
        return total

    def sigma(self, coeffs):
        """σ applied to the algebra element with the given basis coefficients."""
        if self.algebra.kind == "scalar":
            return self._identity().scale(complex(coeffs[0]))
        total = None
        for alpha, c in enumerate(coeffs):
            if c == 0:
                continue
            piece = self.sigma_ops[alpha].scale(complex(c))
            total = piece if total is None else total + piece
        return total if total is not None else self._zero()

    def _identity(self):
        if self.space.is_dense:
            return DenseOperator.identity(self.space)
        return LatticeOperator.identity(self.space)

    def _zero(self):
        if self.space.is_dense:
            return DenseOperator.zero(self.space)
        return LatticeOperator.zero(self.space)

    # -- word machinery -------------------------------------------------------

    def word_op(self, i, word):
        """S^i_{w_0} ∘ S^i_{w_1} ∘ ... (leftmost fiber slot outermost)."""
        out = self._identity()
        for alpha in word:
            out = out @ self.ops[i][alpha]
        return out

    def words(self, i, length):
        return itertools.product(range(self.fibers.dims[i]), repeat=length)

    def row_defect(self, i):
        """I − Σ_α S^i_α S^i_α*  (the wandering projection when isometric)."""
        total = self._identity()
        for alpha in range(self.fibers.dims[i]):
            s = self.ops[i][alpha]
            total = total - s @ s.adjoint()
        return total

    # -- checks ---------------------------------------------------------------

    def check_isometric(self, window=8, tol=1e-12):
        col = _Collector("isometric", tol)
        for i in range(self.k):
            d = self.fibers.dims[i]
            for alpha in range(d):
                for beta in range(alpha, d):
                    if self.algebra.kind == "scalar":
                        expected = self._identity() if alpha == beta else self._zero()
                    else:
                        expected = self.sigma(self.algebra.gram(alpha, beta))
                    lhs = self.ops[i][alpha].adjoint() @ self.ops[i][beta]
                    rep = equal_on_window(lhs, expected, window, tol)
                    col.take({"check": "isometric", "i": i, "alpha": alpha, "beta": beta}, rep)
        return col.report()

    def _check_twist_family(self, col, window, tol):
        pairs = [(i, j) for i in range(self.k) for j in range(self.k) if i < j]
        for i, j in pairs:
            u = self.twist(i, j)
            for ell in range(self.k):
                for alpha in range(self.fibers.dims[ell]):
                    s = self.ops[ell][alpha]
                    rep = equal_on_window(u @ s, s @ u, window, tol)
                    col.take({"check": "twist-compat", "ij": [i, j], "l": ell, "alpha": alpha}, rep)
            if self.algebra.kind != "scalar":
                for alpha in range(self.algebra.basis_size):
                    sig = self.sigma_ops[alpha]
                    rep = equal_on_window(u @ sig, sig @ u, window, tol)
                    col.take({"check": "twist-sigma", "ij": [i, j], "alpha": alpha}, rep)
        for (i, j), (p, q) in itertools.combinations(pairs, 2):
            a, b = self.twist(i, j), self.twist(p, q)
            rep = equal_on_window(a @ b, b @ a, window, tol)
            col.take({"check": "twist-commute", "ij": [i, j], "pq": [p, q]}, rep)

    def check_twisted(self, window=8, tol=1e-12):
        col = _Collector("twisted", tol)
        self._check_twist_family(col, window, tol)
        if self.algebra.kind == "scalar":
            for i, j in itertools.permutations(range(self.k), 2):
                t = self.fibers.flip(i, j)
                u = self.twist(i, j)
                di, dj = self.fibers.dims[i], self.fibers.dims[j]
                for alpha in range(di):
                    for beta in range(dj):
                        lhs = self.ops[i][alpha] @ self.ops[j][beta]
                        rhs = self._zero()
                        for gamma in range(dj):
                            for delta in range(di):
                                c = t[gamma * di + delta, alpha * dj + beta]
                                if c == 0:
                                    continue
                                rhs = rhs + (self.ops[j][gamma] @ self.ops[i][delta] @ u).scale(c)
                        rep = equal_on_window(lhs, rhs, window, tol)
                        col.take({"check": "twisted", "ij": [i, j], "alpha": alpha, "beta": beta}, rep)
        else:
            self._check_family_consistency(col, window, tol)
            for i, j in itertools.permutations(range(self.k), 2):
                si, sj = self.coordinate_op(i), self.coordinate_op(j)
                u = self.twist(i, j)
                rep = equal_on_window(si @ sj, u @ sj @ si, window, tol)
                col.take({"check": "twisted", "ij": [i, j]}, rep)
        return col.report()

    def _check_family_consistency(self, col, window, tol):
        # stored S^i_α must be S_i σ(b_α); guards the automorphic encoding
        for i in range(self.k):
            si = self.coordinate_op(i)
            for alpha in range(self.algebra.basis_size):
                rep = equal_on_window(self.ops[i][alpha],
                                      si @ self.sigma_ops[alpha], window, tol)
                col.take({"check": "family-consistency", "i": i, "alpha": alpha}, rep)

    def check_doubly_twisted(self, window=8, tol=1e-12):
        col = _Collector("doubly-twisted", tol)
        if self.k == 1:
            return col.report()
        if self.algebra.kind == "scalar":
            for i, j in itertools.permutations(range(self.k), 2):
                t = self.fibers.flip(i, j)
                u = self.twist(i, j)
                di, dj = self.fibers.dims[i], self.fibers.dims[j]
                for alpha in range(di):
                    for beta in range(dj):
                        lhs = self.ops[j][beta].adjoint() @ self.ops[i][alpha]
                        rhs = self._zero()
                        for delta in range(di):
                            for gamma in range(dj):
                                c = t[beta * di + delta, alpha * dj + gamma]
                                if c == 0:
                                    continue
                                piece = self.ops[i][delta] @ u @ self.ops[j][gamma].adjoint()
                                rhs = rhs + piece.scale(c)
                        rep = equal_on_window(lhs, rhs, window, tol)
                        col.take({"check": "doubly-twisted", "ij": [i, j], "alpha": alpha, "beta": beta},
                                 rep)
        else:
            for i, j in itertools.permutations(range(self.k), 2):
                si, sj = self.coordinate_op(i), self.coordinate_op(j)
                u = self.twist(i, j)
                lhs = si.adjoint() @ sj
                rhs = u.adjoint() @ sj @ si.adjoint()
                rep = equal_on_window(lhs, rhs, window, tol)
                col.take({"check": "doubly-twisted", "ij": [i, j]}, rep)
        return col.report()

    def check_covariance_automorphic(self, window=8, tol=1e-12):
        if self.algebra.kind == "scalar":
            raise ValueError("covariance check applies to nonscalar algebras")
        col = _Collector("covariance", tol)
        for i in range(self.k):
            si = self.coordinate_op(i)
            for alpha in range(self.algebra.basis_size):
                lhs = self.sigma_ops[alpha] @ si
                rhs = si @ self.sigma(self.algebra.auto_image(i, alpha))
                rep = equal_on_window(lhs, rhs, window, tol)
                col.take({"check": "covariance", "i": i, "alpha": alpha}, rep)
        return col.report()

    def check_all(self, window=8, tol=1e-12, include_covariance=None):
        """Run the standard battery; covariance only for automorphic algebras."""
        reports = [
            self.check_isometric(window, tol),
            self.check_twisted(window, tol),
            self.check_doubly_twisted(window, tol),
        ]
        if include_covariance is None:
            include_covariance = self.algebra.kind != "scalar"
        if include_covariance:
            reports.append(self.check_covariance_automorphic(window, tol))
        return reports


def induce_from_s(family, flips, twists, window=8, tol=1e-12, row_tol=1e-10):
    """Package a scalar S-family as a TwistedTuple, enforcing row contraction.

    The necessary condition Σ_α S^i_α S^i_α* ≤ I is tested through the window
    compression (compressions preserve positivity, so a negative eigenvalue is
    a genuine violation).
    """
    k = len(family)
    dims = tuple(len(row) for row in family)
    fibers = flips if isinstance(flips, FiberSpec) else FiberSpec(dims, flips)
    t = TwistedTuple(k, fibers, family, twists)
    space = t.space
    for i in range(k):
        defect = t.row_defect(i)
        if space.is_dense:
            mat = defect.matrix
        else:
            mat = windowed_matrix(defect, space.window_degrees(window))
        low = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2).min())
        if low < -row_tol:
            raise ValueError(f"row-contraction violated at coordinate {i}: min eigenvalue {low:.3e}")
    return t


def direct_sum(t1, t2):
    """Block-diagonal direct sum of two scalar-algebra lattice tuples."""
    if t1.k != t2.k or t1.space.rank != t2.space.rank or t1.space.signed != t2.space.signed:
        raise ValueError("direct sum requires matching rank and signedness")
    if t1.algebra.kind != "scalar" or t2.algebra.kind != "scalar":
        raise ValueError("direct sum implemented for scalar algebras")
    if t1.fibers.dims != t2.fibers.dims:
        raise ValueError("direct sum requires equal fiber dimensions")
    d1, d2 = t1.space.dim, t2.space.dim
    space = LatticeSpace.create(t1.space.rank, d1 + d2, t1.space.signed)

    def lift(op, side):
        lo = d1 if side else 0
        size = d2 if side else d1
        src = op.space.registry
        proj = np.zeros((d1 + d2, d1 + d2), dtype=complex)
        proj[lo:lo + size, lo:lo + size] = np.eye(size)
        pname = space.registry.intern(proj, hint="p")
        terms = []
        for t in op.terms:
            factors = [Factor(pname, (0,) * space.rank, 1)]
            for f in t.factors:
                big = np.eye(d1 + d2, dtype=complex)
                big[lo:lo + size, lo:lo + size] = src.matrix(f.name)
                factors.append(Factor(space.registry.intern(big, hint="b"), f.coeffs, f.const))
            terms.append(Term(t.offset, t.coeff, tuple(factors), t.window))
        return LatticeOperator(space, terms)

    ops = [[lift(t1.ops[i][a], 0) + lift(t2.ops[i][a], 1) for a in range(t1.fibers.dims[i])]
           for i in range(t1.k)]
    twists = {}
    for i, j in sorted(set(t1.twist_pairs()) | set(t2.twist_pairs())):
        twists[(i, j)] = lift(t1.twist(i, j), 0) + lift(t2.twist(i, j), 1)
    return TwistedTuple(t1.k, t1.fibers, ops, twists)
