"""Fock-space model operators and the canonical transport onto them.

The model for a subset A lives on the lattice ℤ₊^{|A|} with fiber the core
space 𝒟_A.  Coordinates inside A act as twisted creation operators (shift by
one step, block a product of twist powers indexed by the lower coordinates);
coordinates outside A act degree-diagonally through their core operator times
twist powers over all of A.  The canonical unitary identifies the summand
H_A of the original space with the model degreewise and is materialized as a
degree-indexed table of original-space vectors (never as a global operator).
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .operators import GradedVector, LatticeOperator, LatticeSpace, equal_on_window
from .representation import AlgebraSpec, CheckReport, TwistedTuple, _Collector
from .tensorspace import FiberSpec
from . import wold


def _u_matrix(core_u, i, j, dim):
    if i == j:
        raise ValueError("twists are indexed by distinct pairs")
    key = (i, j) if i < j else (j, i)
    mat = core_u.get(key)
    if mat is None:
        return np.eye(dim, dtype=complex)
    mat = np.asarray(mat, dtype=complex)
    return mat if i < j else mat.conj().T


@dataclass
class FockModel:
    """A model tuple over ℤ₊^{|A|} ⊗ 𝒟_A plus its construction data."""

    k: int
    subset: tuple
    core_dim: int
    core_w: dict                 # l in A^c -> core operator matrix
    core_u: dict                 # (i, j), i < j -> twist matrix on the core
    tuple: TwistedTuple
    pi_table: dict = field(default_factory=dict)   # model degree -> [original-space vectors]
    notes: list = field(default_factory=list)

    @property
    def space(self):
        return self.tuple.space


def _check_core(k, subset, core_dim, core_w, core_u, tol=1e-10):
    """The core data must be a fully coisometric twisted family with commuting twists."""
    comp = [c for c in range(k) if c not in subset]
    eye = np.eye(core_dim)
    problems = []
    mats = {key: np.asarray(m, dtype=complex) for key, m in core_u.items()}
    for key, m in mats.items():
        if np.abs(m @ m.conj().T - eye).max() > tol:
            problems.append(f"twist {key} is not unitary")
    for (k1, m1), (k2, m2) in itertools.combinations(mats.items(), 2):
        if np.abs(m1 @ m2 - m2 @ m1).max() > tol:
            problems.append(f"twists {k1} and {k2} do not commute")
    for l in comp:
        w = np.asarray(core_w[l], dtype=complex)
        if np.abs(w @ w.conj().T - eye).max() > tol or np.abs(w.conj().T @ w - eye).max() > tol:
            problems.append(f"core operator {l} is not unitary (fully coisometric + isometric)")
        for key, m in mats.items():
            if np.abs(m @ w - w @ m).max() > tol:
                problems.append(f"twist {key} does not commute with core operator {l}")
    for l1, l2 in itertools.combinations(comp, 2):
        w1 = np.asarray(core_w[l1], dtype=complex)
        w2 = np.asarray(core_w[l2], dtype=complex)
        u = _u_matrix(core_u, l1, l2, core_dim)
        if np.abs(w1 @ w2 - u @ w2 @ w1).max() > tol:
            problems.append(f"core operators {l1},{l2} fail the twisted relation")
    if problems:
        raise ValueError("core data invalid: " + "; ".join(problems))


def build_model_operators(k, subset, core_dim, core_w=None, core_u=None, verify=True,
                          lattice_coords=None):
    """Assemble the model tuple for the given subset from core data.

    Fibers are one-dimensional (coefficient algebra ℂ); lattice coordinate r
    carries the r-th smallest element of A.  `lattice_coords` may name a
    superset of A to place the model on a larger lattice whose extra
    directions are untouched (used for direct sums across different subsets).
    """
    subset = tuple(sorted(subset))
    core_w = {l: np.asarray(m, dtype=complex) for l, m in (core_w or {}).items()}
    core_u = {key: np.asarray(m, dtype=complex) for key, m in (core_u or {}).items()}
    comp = [c for c in range(k) if c not in subset]
    if set(core_w) != set(comp):
        raise ValueError(f"core operators must be given exactly for the complement {comp}")
    if verify:
        _check_core(k, subset, core_dim, core_w, core_u)
    lattice_coords = tuple(sorted(lattice_coords)) if lattice_coords else subset
    if not set(subset) <= set(lattice_coords):
        raise ValueError("lattice coordinates must contain the subset")
    p = len(lattice_coords)
    space = LatticeSpace.create(p, core_dim)

    def unit(i):
        pos = lattice_coords.index(i)
        return tuple(1 if c == pos else 0 for c in range(p))

    zero = (0,) * p
    ops = []
    for i in range(k):
        if i in subset:
            j = subset.index(i)
            factors = [(_u_matrix(core_u, i, subset[r], core_dim), unit(subset[r]), 0)
                       for r in range(j)]
            op = LatticeOperator.single(space, unit(i), factors)
        else:
            factors = [(core_w[i], zero, 1)]
            factors += [(_u_matrix(core_u, i, subset[r], core_dim), unit(subset[r]), 0)
                        for r in range(len(subset))]
            op = LatticeOperator.single(space, zero, factors)
        ops.append([op])
    twists = {}
    for (a, b), mat in core_u.items():
        twists[(a, b)] = LatticeOperator.const_block(space, mat)
    t = TwistedTuple(k, FiberSpec((1,) * k), ops, twists)
    return FockModel(k, subset, core_dim, core_w, core_u, t)


# ---------------------------------------------------------------------------
# transport of a tuple onto its model


def pi_a(t, subset, window=6, depth=3, tol=1e-10):
    """Build the canonical identification of H_A with the Fock model.

    Returns a FockModel whose operators are assembled from the transported
    core data and whose pi_table maps each model degree to the orthonormal
    images T̃_A^(n)(core basis) inside the original space.
    """
    subset = tuple(sorted(subset))
    core = wold.d_space(t, subset, window, depth, tol)
    basis = list(core.basis_vectors())
    dim = len(basis)
    if dim == 0:
        raise ValueError(f"summand for subset {subset} is trivial on the window")
    comp = [c for c in range(t.k) if c not in subset]

    def compress(op, label):
        cols = [op.apply(w) for w in basis]
        mat = np.zeros((dim, dim), dtype=complex)
        worst = 0.0
        for c, vec in enumerate(cols):
            rem = vec
            for b, w in enumerate(basis):
                mat[b, c] = w.inner(vec)
                rem = rem - w.scale(mat[b, c])
            worst = max(worst, rem.norm())
        if worst > max(tol, 1e-8):
            raise ValueError(f"{label} does not leave the core invariant (residual {worst:.2e})")
        return mat

    core_u = {}
    for i, j in itertools.combinations(range(t.k), 2):
        core_u[(i, j)] = compress(t.twist(i, j), f"twist ({i},{j})")
    core_w = {}
    for l in comp:
        rows = wold.effective_rows(t, l)
        if len(rows) != 1:
            raise ValueError("model transport needs one-dimensional effective fibers")
        core_w[l] = compress(rows[0], f"coordinate {l}")
    fm = build_model_operators(t.k, subset, dim, core_w, core_u)

    table = {}
    gram_dev = 0.0
    for n in itertools.product(range(window + 1), repeat=len(subset)):
        vecs = []
        for w in basis:
            assignment = [(c, (0,) * n[r]) for r, c in enumerate(subset)]
            vecs.append(wold._apply_coordinate_word(t, assignment, w))
        gram = np.array([[a.inner(b) for b in vecs] for a in vecs])
        gram_dev = max(gram_dev, float(np.abs(gram - np.eye(dim)).max()))
        table[n] = vecs
    if gram_dev > max(tol, 1e-8):
        raise ValueError(f"transported bases are not orthonormal (deviation {gram_dev:.2e})")
    fm.pi_table = table
    fm.notes.append(f"transport window {window}, core dimension {dim}")
    return fm


def verify_equivalence(t, fm, window=None, tol=1e-10):
    """Check Π S_i = M_i Π and Π U_{ij} = U_{A,ij} Π on the tabulated window."""
    if not fm.pi_table:
        raise ValueError("model carries no transport table; build it with pi_a")
    col = _Collector("model-equivalence", tol)
    degrees = sorted(fm.pi_table.keys())
    top = max(max(n) for n in degrees) if degrees else 0
    if window is None:
        window = top
    lut = {}          # original-space expansion lookup
    for n, vecs in fm.pi_table.items():
        for b, v in enumerate(vecs):
            lut[n, b] = v

    def transport(v):
        """Expand an original-space vector over the tabulated H_A basis."""
        out = {}
        rem = v
        for (n, b), w in lut.items():
            c = w.inner(v)
            if abs(c) > 1e-14:
                out[(n, b)] = c
                rem = rem - w.scale(c)
        return out, rem.norm()

    def model_vec(entries):
        space = fm.space
        comps = {}
        for (n, b), c in entries.items():
            comps.setdefault(n, np.zeros(fm.core_dim, dtype=complex))[b] += c
        return GradedVector.from_dict(space, comps)

    interior = [n for n in degrees if max(n, default=0) + 1 <= window]
    checks = [("coordinate", i, fm.tuple.op(i)) for i in range(t.k)]
    checks += [("twist", (i, j), fm.tuple.twist(i, j))
               for i, j in itertools.combinations(range(t.k), 2)]
    for n in interior:
        for b in range(fm.core_dim):
            v = lut[(n, b)]
            for kind, which, model_op in checks:
                if kind == "coordinate":
                    orig = wold.effective_rows(t, which)[0].apply(v)
                else:
                    orig = t.twist(*which).apply(v)
                entries, residual = transport(orig)
                lhs = model_vec(entries)
                rhs = model_op.apply(GradedVector.basis(fm.space, n, b))
                dev = max((lhs - rhs).norm(), residual)
                label = {"check": "equivalence", "kind": kind, "which": which,
                         "degree": list(n), "fiber": b, "deviation": dev}
                if dev > col.max_dev or col.worst is None:
                    col.max_dev = dev
                    col.worst = label
                if dev > tol and col.first_failure is None:
                    col.first_failure = label
    return col.report()
