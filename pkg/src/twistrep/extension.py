"""Unitary extensions through the concrete bilateral realization.

The abstract direct limit along an injective shift-type connecting map Φ is a
union of shifted copies of the original graded space, so it is realized
literally: the extension lives on the lattice with the Φ-shifted directions
made bilateral, copy m sits at offset −m·(shift degree of Φ), and every
extended operator is the signed-lattice continuation of its defining term
data.  The continuation is the direct-limit operator exactly when the twisted
intertwining  Φ V_i = Z_i V_i Φ  continues to the bilateral lattice; that
identity is verified on the window as part of the construction.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .operators import LatticeOperator, LatticeSpace, equal_on_window
from .representation import CheckReport, TwistedTuple, _Collector
from .tensorspace import FiberSpec
from . import wold


@dataclass
class ExtensionResult:
    original: TwistedTuple
    extended: TwistedTuple
    shift_coords: tuple          # coordinates whose product forms Φ
    phi_offset: tuple            # lattice shift of one application of Φ
    z_ops: dict                  # coordinate -> twist correction Z_i (on the original space)
    level_reports: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def embedding_offset(self, m):
        """Lattice offset of the m-th copy inside the bilateral realization."""
        return tuple(-m * s for s in self.phi_offset)


def _continue_tuple(t, target):
    ops = [[op.continued_on(target) for op in row] for row in t.ops]
    twists = {pair: t.twist(*pair).continued_on(target) for pair in t.twist_pairs()}
    return TwistedTuple(t.k, t.fibers, ops, twists)


def _single_offset(op):
    offsets = {term.offset for term in op.terms}
    if len(offsets) != 1:
        raise ValueError("connecting map must be a single uniform shift")
    return next(iter(offsets))


def extend_doubly_twisted_isometries(t, window=6, tol=1e-10, precheck=True):
    """Bilateral unitary extension of a doubly twisted isometric tuple.

    The connecting map is Φ = ∏ V_i over the shift-type coordinates only
    (coordinates already unitary on the window are left out), with twist
    corrections Z_i = ∏_{j≠i} U_{ji} at level m = Z_i^m V_i.
    """
    if t.algebra.kind != "scalar" or any(d != 1 for d in t.fibers.dims):
        raise ValueError("extension expects a scalar tuple with one-dimensional fibers")
    if precheck:
        failures = [r for r in (t.check_isometric(window, tol),
                                t.check_twisted(window, tol),
                                t.check_doubly_twisted(window, tol)) if not r.ok]
        if failures:
            names = ", ".join(f"{r.name} ({r.max_deviation:.2e})" for r in failures)
            raise ValueError(f"extension preconditions failed: {names}")
    notes = []
    shift_coords = tuple(i for i in range(t.k)
                         if not wold.coordinate_coisometric(t, i, min(window, 4), tol))
    space = t.space
    phi = None
    for i in shift_coords:
        phi = t.op(i) if phi is None else phi @ t.op(i)
    if phi is None:
        phi_offset = (0,) * space.rank
        notes.append("all coordinates already unitary; extension is the identity continuation")
    else:
        phi_offset = _single_offset(phi)
    mask = tuple(bool(s) or off != 0 for s, off in zip(space.signed, phi_offset))
    target = LatticeSpace(space.rank, space.dim, mask, space.registry)
    extended = _continue_tuple(t, target)

    # moving V_i through Φ collects one U_{ji} per factor V_j of Φ, so the
    # level corrections only involve the shift-type coordinates
    z_ops = {}
    for i in range(t.k):
        z = LatticeOperator.identity(space)
        for j in shift_coords:
            if j != i:
                z = z @ t.twist(j, i)
        z_ops[i] = z

    level_reports = []
    if phi is not None:
        col = _Collector("limit-intertwining", tol)
        phi_ext = phi.continued_on(target)
        eye = LatticeOperator.identity(target)
        rep = equal_on_window(phi_ext @ phi_ext.adjoint(), eye, window, tol)
        col.take({"check": "phi-unitary"}, rep)
        for i in range(t.k):
            lhs = phi_ext @ extended.op(i)
            rhs = z_ops[i].continued_on(target) @ extended.op(i) @ phi_ext
            rep = equal_on_window(lhs, rhs, window, tol)
            col.take({"check": "phi-intertwine", "i": i}, rep)
        report = col.report()
        level_reports.append(report)
        if not report.ok:
            raise ValueError("the bilateral continuation does not realize the direct limit: "
                             f"worst {report.worst}")
    return ExtensionResult(t, extended, shift_coords, phi_offset, z_ops,
                           level_reports, notes)


def extend_commutative_lattice(fm, window=6, tol=1e-10, levels=3):
    """Extension of a Fock model over a commutative algebra, level by level.

    Builds the level-m tuples M_{m,i} = M_{A,i} Z_i^m with the connecting map
    φ = S_A ⊗ I, verifies the intertwining φ M̃_{m,i} = M̃_{n,i} φ for
    m ≤ n ≤ levels, and returns the bilateral continuation.
    """
    t = fm.tuple
    space = t.space
    subset = fm.subset
    p = len(subset)
    dim = fm.core_dim

    def u(i, j):
        from .model import _u_matrix

        return _u_matrix(fm.core_u, i, j, dim)

    z_mats = {}
    for i in range(fm.k):
        if i in subset:
            j = subset.index(i)
            z = np.eye(dim, dtype=complex)
            for r in range(j):
                z = z @ u(subset[r], i)
        else:
            z = np.eye(dim, dtype=complex)
            for a in subset:
                z = z @ u(a, i)
        z_mats[i] = z
    z_ops = {i: LatticeOperator.const_block(space, m) for i, m in z_mats.items()}

    phi = LatticeOperator.single(space, (1,) * p)

    def level_op(i, m):
        return t.op(i) @ LatticeOperator.const_block(space, np.linalg.matrix_power(z_mats[i], m))

    col = _Collector("level-intertwining", tol)
    for m in range(levels + 1):
        for n in range(m, levels + 1):
            conn = LatticeOperator.identity(space)
            for _ in range(n - m):
                conn = phi @ conn
            for i in range(fm.k):
                rep = equal_on_window(conn @ level_op(i, m), level_op(i, n) @ conn, window, tol)
                col.take({"check": "intertwine", "m": m, "n": n, "i": i}, rep)
    report = col.report()
    if not report.ok:
        raise ValueError(f"level intertwining failed: {report.worst}")

    target = space.signed_version()
    extended = _continue_tuple(t, target)
    res = ExtensionResult(t, extended, tuple(range(p)), (1,) * p, z_ops, [report])
    res.notes.append(f"levels verified up to {levels}")
    return res


def verify_extension(res, original=None, window=6, tol=1e-10):
    """Restriction, unitarity, twisted relations, and the algebra map, itemized."""
    t = original or res.original
    ext = res.extended
    reports = {}

    col = _Collector("restriction", tol)
    degrees = t.space.window_degrees(window)
    for i in range(t.k):
        for alpha in range(t.fibers.dims[i]):
            col.take({"check": "restriction", "kind": "coordinate", "i": i, "alpha": alpha},
                     _restriction_deviation(t.op(i, alpha), ext.op(i, alpha), degrees))
    for pair in set(t.twist_pairs()) | set(ext.twist_pairs()):
        col.take({"check": "restriction", "kind": "twist", "ij": list(pair)},
                 _restriction_deviation(t.twist(*pair), ext.twist(*pair), degrees))
    reports["restriction"] = col.report()

    col = _Collector("unitarity", tol)
    eye = LatticeOperator.identity(ext.space)
    for i in range(ext.k):
        for alpha in range(ext.fibers.dims[i]):
            v = ext.op(i, alpha)
            col.take({"check": "isometry", "i": i, "alpha": alpha},
                     equal_on_window(v.adjoint() @ v, eye, window, tol))
            col.take({"check": "coisometry", "i": i, "alpha": alpha},
                     equal_on_window(v @ v.adjoint(), eye, window, tol))
    reports["unitarity"] = col.report()

    reports["twisted"] = ext.check_twisted(window, tol)
    reports["doubly-twisted"] = ext.check_doubly_twisted(window, tol)

    if t.algebra.kind == "scalar":
        reports["algebra-map"] = CheckReport("algebra-map", True, 0.0, tol,
                                             {"note": "scalar coefficients, map is λ ↦ λI"})
    else:
        col = _Collector("algebra-map", tol)
        # the continued sigma must stay a *-homomorphism on the basis
        for a in range(t.algebra.basis_size):
            for b in range(t.algebra.basis_size):
                prod = t.algebra.product(a, b)
                lhs = ext.sigma_ops[a] @ ext.sigma_ops[b]
                col.take({"check": "multiplicativity", "a": a, "b": b},
                         equal_on_window(lhs, ext.sigma(prod), window, tol))
            col.take({"check": "star", "a": a},
                     equal_on_window(ext.sigma_ops[a].adjoint(),
                                     ext.sigma(t.algebra.star(a)), window, tol))
        reports["algebra-map"] = col.report()
    return reports


def _restriction_deviation(orig_op, ext_op, degrees):
    """Forward action of the continuation must agree with the original on ψ₀."""
    from .operators import EqualityReport, GradedVector

    worst = 0.0
    where = ((0,) * len(degrees[0]) if len(degrees) else (), 0)
    for deg in degrees:
        for b in range(orig_op.space.dim):
            v0 = GradedVector.basis(orig_op.space, deg, b)
            v1 = GradedVector.basis(ext_op.space, deg, b)
            a = orig_op.apply(v0)
            c = ext_op.apply(v1)
            dev = np.sqrt(sum(float(np.linalg.norm(a.component(d) - c.component(d)) ** 2)
                              for d in {tuple(x) for x in a.degrees} | {tuple(x) for x in c.degrees}))
            if dev > worst:
                worst = float(dev)
                where = (tuple(deg), b)
    return EqualityReport(worst <= 1e-12, worst, 1e-12, where)
