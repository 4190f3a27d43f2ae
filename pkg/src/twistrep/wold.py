"""Wandering subspaces, Wold summand subspaces, and the existence criterion.

All subspaces here are graded: per-degree orthonormal bases over a validity
window.  Computations go through the "effective" coordinate family of a tuple
(the basis-explicit operators for scalar algebras, the single coordinate
operators for automorphic ones), so everything below works uniformly for
dense (rank-0) and lattice instances.

Truncation discipline: operator applications are exact, the only finite cuts
are (a) the degree window a subspace is reported over and (b) the level at
which strongly convergent projection series are stopped.  Both cuts are
parameters with defaults that exceed the exactness demands of the test suite.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .operators import GradedVector, equal_on_window

RANK_TOL = 1e-8


# ---------------------------------------------------------------------------
# effective coordinate view


def effective_rows(t, i):
    """The operator family generating coordinate i on the identified space.

    For automorphic algebras the balanced tensor E_i ⊗_σ H collapses to H and
    the whole fiber acts through the single operator S_i.
    """
    if t.algebra.kind == "scalar":
        return list(t.ops[i])
    return [t.coordinate_op(i)]


def effective_dim(t, i):
    return len(effective_rows(t, i))


def wandering_projection(t, i):
    """I − T̃_i T̃_i* as an exact symbolic operator."""
    rows = effective_rows(t, i)
    total = None
    for s in rows:
        piece = s @ s.adjoint()
        total = piece if total is None else total + piece
    ident = _identity_like(t)
    return ident - total


def _identity_like(t):
    from .operators import LatticeOperator

    return LatticeOperator.identity(t.space)


def apply_word(rows, word, v):
    """Apply S_{w_0} S_{w_1} ... S_{w_last} to v (rightmost letter first)."""
    for letter in reversed(word):
        v = rows[letter].apply(v)
    return v


def apply_word_adjoint(rows, word, v):
    """Apply (S_{w_0} ... S_{w_last})* to v."""
    for letter in word:
        v = rows[letter].adjoint().apply(v)
    return v


# ---------------------------------------------------------------------------
# graded subspaces


@dataclass
class GradedSubspace:
    """Per-degree orthonormal bases, valid on degrees within the stated window."""

    space: object
    blocks: dict            # degree tuple -> (d, m) orthonormal columns
    window: int
    stable: bool = True     # False when an intersection had not stabilized
    notes: list = field(default_factory=list)

    def dim_at(self, degree):
        b = self.blocks.get(tuple(degree))
        return 0 if b is None else b.shape[1]

    def dims(self):
        return {deg: b.shape[1] for deg, b in sorted(self.blocks.items()) if b.shape[1]}

    def total_dim(self):
        return sum(b.shape[1] for b in self.blocks.values())

    def degrees(self):
        return sorted(deg for deg, b in self.blocks.items() if b.shape[1])

    def basis_vectors(self):
        for deg in self.degrees():
            b = self.blocks[deg]
            for col in range(b.shape[1]):
                yield GradedVector(self.space, [deg], [b[:, col]], canonical=True)

    def residual(self, v):
        """Norm of the component of v orthogonal to the subspace."""
        rem = 0.0
        for idx, deg in enumerate(v.degrees):
            comp = v.comps[idx]
            b = self.blocks.get(tuple(deg))
            if b is None or b.shape[1] == 0:
                rem += float(np.linalg.norm(comp) ** 2)
            else:
                proj = b @ (b.conj().T @ comp)
                rem += float(np.linalg.norm(comp - proj) ** 2)
        return np.sqrt(rem)


def orth_columns(cols, tol=RANK_TOL):
    """Orthonormal basis of the column span, rank decided at the given tolerance."""
    cols = np.asarray(cols, dtype=complex)
    if cols.size == 0:
        return cols.reshape(cols.shape[0] if cols.ndim == 2 else 0, 0)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    rank = int((s > tol).sum())
    return u[:, :rank]


def intersect_columns(bases, dim, tol=RANK_TOL):
    """Intersection of column spans: nullspace of the stacked complement projections."""
    if not bases:
        return np.eye(dim, dtype=complex)
    stacked = np.vstack([np.eye(dim, dtype=complex) - b @ b.conj().T for b in bases])
    _, s, vh = np.linalg.svd(stacked, full_matrices=True)
    null_dim = dim - int((s > tol).sum())
    if null_dim == 0:
        return np.zeros((dim, 0), dtype=complex)
    return vh.conj().T[:, dim - null_dim:]


def _degree_blocks(op, degrees, tol=1e-10):
    """Per-degree d×d blocks of a degree-preserving operator, with a gradedness guard."""
    blocks = {}
    d = op.space.dim
    for deg in degrees:
        deg = tuple(int(x) for x in deg)
        mat = np.zeros((d, d), dtype=complex)
        off = 0.0
        for b in range(d):
            out = op.apply(GradedVector.basis(op.space, deg, b))
            for idx, odeg in enumerate(out.degrees):
                if tuple(odeg) == deg:
                    mat[:, b] = out.comps[idx]
                else:
                    off = max(off, float(np.linalg.norm(out.comps[idx])))
        if off > tol:
            raise ValueError(f"operator is not degree-preserving at {deg} (off-degree mass {off:.2e})")
        blocks[deg] = mat
    return blocks


# ---------------------------------------------------------------------------
# wandering subspaces


def wandering(t, i, window=8, tol=1e-10):
    """Orthonormal per-degree basis of Ran(I − T̃_i T̃_i*) up to the window."""
    proj = wandering_projection(t, i)
    degrees = t.space.window_degrees(window)
    blocks = _degree_blocks(proj, degrees, tol)
    out = {}
    worst = 0.0
    for deg, mat in blocks.items():
        worst = max(worst, float(np.abs(mat @ mat - mat).max()))
        out[deg] = orth_columns(mat)
    if worst > max(tol, 1e-8):
        raise ValueError(f"wandering defect is not a projection (deviation {worst:.2e}); "
                         "is the tuple isometric?")
    return GradedSubspace(t.space, out, window)


def joint_wandering(t, subset, window=8, tol=1e-10):
    """Basis of Ran(∏_{i∈A} (I − T̃_i T̃_i*)) = ⋂_{i∈A} W_i.

    Requires the wandering projections to commute on the window (guaranteed
    for doubly twisted tuples); non-commutation is reported as invalid input.
    """
    subset = sorted(subset)
    degrees = t.space.window_degrees(window)
    if not subset:
        d = t.space.dim
        blocks = {tuple(int(x) for x in deg): np.eye(d, dtype=complex) for deg in degrees}
        return GradedSubspace(t.space, blocks, window)
    projs = {i: wandering_projection(t, i) for i in subset}
    for i, j in itertools.combinations(subset, 2):
        rep = equal_on_window(projs[i] @ projs[j], projs[j] @ projs[i], window, tol)
        if not rep.equal:
            raise ValueError(
                "wandering projections do not commute "
                f"(pair {i},{j}, deviation {rep.max_deviation:.2e}); "
                "the doubly twisted hypothesis is violated")
    prod = None
    for i in subset:
        prod = projs[i] if prod is None else prod @ projs[i]
    blocks = _degree_blocks(prod, degrees, tol)
    out = {deg: orth_columns(mat) for deg, mat in blocks.items()}
    return GradedSubspace(t.space, out, window)


# ---------------------------------------------------------------------------
# images and intersections


def _coordinate_words(t, coords, powers):
    """All fiber words for the ordered coordinate powers: list of (coord, word) lists."""
    per_coord = []
    for c, p in zip(coords, powers):
        letters = range(effective_dim(t, c))
        per_coord.append([(c, w) for w in itertools.product(letters, repeat=p)])
    return itertools.product(*per_coord)


def _apply_coordinate_word(t, assignment, v):
    """Apply the ordered word T̃_{c_1}-word ∘ ... ∘ T̃_{c_p}-word (last coordinate first)."""
    for coord, word in reversed(list(assignment)):
        v = apply_word(effective_rows(t, coord), word, v)
    return v


def _collect_graded(vectors, window, tol=RANK_TOL):
    """Graded hull of a family of vectors: per-degree orthonormal bases."""
    per_degree = {}
    for v in vectors:
        for idx, deg in enumerate(v.degrees):
            key = tuple(int(x) for x in deg)
            if any(abs(x) > window for x in key):
                continue
            per_degree.setdefault(key, []).append(v.comps[idx])
    return {deg: orth_columns(np.stack(cols, axis=1), tol) for deg, cols in per_degree.items()}


def image_subspace(t, coords, powers, sub, window):
    """Per-degree basis of T̃_coords^(powers)(I ⊗ sub) restricted to the window."""
    vectors = []
    for assignment in _coordinate_words(t, coords, powers):
        for v in sub.basis_vectors():
            out = _apply_coordinate_word(t, assignment, v)
            if out.norm() > 1e-14:
                vectors.append(out)
    return GradedSubspace(t.space, _collect_graded(vectors, window), window)


def coordinate_coisometric(t, i, window=4, tol=1e-10):
    """Whether T̃_i T̃_i* = I holds on the window."""
    from .operators import LatticeOperator

    defect = wandering_projection(t, i)
    return equal_on_window(defect, LatticeOperator.zero(t.space), window, tol).equal


def d_space(t, subset, window=8, depth=3, tol=1e-10):
    """The core 𝒟_A = ⋂_m T̃_{A^c}^(m)(I ⊗ W_A) on the window.

    For a doubly twisted tuple W_A is invariant under the complementary
    coordinates, so each single-coordinate image tower is nested decreasing and
    the multi-index intersection collapses to one image per complementary
    coordinate at its cut level.  Fully coisometric coordinates stabilize at
    level `depth`; shift-type coordinates are cut at window+1, which is exact
    on the window.  The result carries stable=False when the dimensions still
    moved between the last two levels.
    """
    subset = sorted(subset)
    comp = [c for c in range(t.k) if c not in subset]
    if not comp:
        wa = joint_wandering(t, subset, window, tol)
        return GradedSubspace(t.space, dict(wa.blocks), window)
    levels = {}
    for c in comp:
        levels[c] = depth if coordinate_coisometric(t, c, min(window, 4), tol) else window + 1
    reach = max(levels[c] * max((op.max_offset() for op in effective_rows(t, c)), default=0)
                for c in comp)
    wa = joint_wandering(t, subset, window + reach, tol)
    d = t.space.dim
    towers = {}
    stable = True
    for c in comp:
        img = image_subspace(t, [c], (levels[c],), wa, window)
        probe = image_subspace(t, [c], (levels[c] - 1,), wa, window)
        # one image level moves degrees by at most maxoff; compare away from
        # the window edge where the deeper tower is still fully resolved
        maxoff = max((op.max_offset() for op in effective_rows(t, c)), default=0)
        for deg in set(img.blocks) | set(probe.blocks):
            if all(abs(x) <= window - maxoff for x in deg) and img.dim_at(deg) != probe.dim_at(deg):
                stable = False
        towers[c] = img
    blocks = {}
    degrees = set.intersection(*(set(tw.blocks) for tw in towers.values())) if towers else set()
    for deg in degrees:
        bases = [towers[c].blocks[deg] for c in comp]
        if any(b.shape[1] == 0 for b in bases):
            continue
        basis = intersect_columns(bases, d, tol=RANK_TOL)
        if basis.shape[1]:
            blocks[deg] = basis
    out = GradedSubspace(t.space, blocks, window, stable=stable)
    if not stable:
        out.notes.append(f"core image tower not stabilized at depth {depth}")
    return out


def summand(t, subset, window=8, depth=3, tol=1e-10):
    """The Wold summand H_A = ⊕_n T̃_A^(n)(I ⊗ 𝒟_A), assembled degreewise."""
    subset = sorted(subset)
    core = d_space(t, subset, window, depth, tol)
    if not subset:
        return core
    vectors = []
    for powers in itertools.product(range(window + 1), repeat=len(subset)):
        for assignment in _coordinate_words(t, subset, powers):
            for v in core.basis_vectors():
                out = _apply_coordinate_word(t, assignment, v)
                if out.norm() > 1e-14:
                    vectors.append(out)
    blocks = _collect_graded(vectors, window)
    return GradedSubspace(t.space, blocks, window, stable=core.stable, notes=list(core.notes))


# ---------------------------------------------------------------------------
# existence characterization


@dataclass
class ExistenceReport:
    ok: bool
    max_deviation: float
    tol: float
    witness: dict | None

    def __bool__(self):
        return self.ok


def shift_part_projection(t, i, levels):
    """Σ_{n ≤ levels} T̃_i^(n)(I ⊗ P_{W_i}) T̃_i^(n)* as a symbolic operator."""
    rows = effective_rows(t, i)
    q = wandering_projection(t, i)
    total = q
    for _ in range(levels):
        nxt = None
        for s in rows:
            piece = s @ q @ s.adjoint()
            nxt = piece if nxt is None else nxt + piece
        q = nxt
        total = total + q
    return total


def check_existence(t, window=6, tol=1e-10, levels=None):
    """The mutual-reducibility criterion for a Wold decomposition to exist.

    Truncates the shift-part projection of each coordinate at the given level
    (default 2·window + 1, exact for shift-realized instances on the window)
    and tests commutation with every coordinate operator.
    """
    if levels is None:
        levels = 2 * window + 1
    worst = 0.0
    witness = None
    first_bad = None
    for i in range(t.k):
        p = shift_part_projection(t, i, levels)
        for j in range(t.k):
            for alpha, s in enumerate(effective_rows(t, j)):
                rep = equal_on_window(p @ s, s @ p, window, tol)
                loc = {"i": i, "j": j, "alpha": alpha, "degree": list(rep.worst[0]),
                       "fiber": rep.worst[1], "deviation": rep.max_deviation}
                if rep.max_deviation > worst:
                    worst = rep.max_deviation
                    witness = loc
                if not rep.equal and first_bad is None:
                    first_bad = loc
    return ExistenceReport(first_bad is None, worst, tol, first_bad or witness)


# ---------------------------------------------------------------------------
# full decomposition verification


@dataclass
class DecompositionReport:
    ok: bool
    items: dict                 # item name -> (ok, max deviation)
    summand_dims: dict          # frozenset A -> {degree: dim}
    tol: float

    def __bool__(self):
        return self.ok


def verify_decomposition(t, window=6, depth=3, tol=1e-8):
    """Check completeness, orthogonality, and per-summand behavior of the Wold split."""
    subsets = [tuple(sorted(s)) for r in range(t.k + 1)
               for s in itertools.combinations(range(t.k), r)]
    summands = {s: summand(t, s, window, depth, tol) for s in subsets}
    margin = max(op.max_offset() for i in range(t.k) for op in effective_rows(t, i))
    interior = [tuple(int(x) for x in deg) for deg in t.space.window_degrees(window)
                if all(abs(x) <= window - margin * depth if t.space.signed[c] else x <= window
                       for c, x in enumerate(deg))]
    items = {}

    # (a) per-degree dimensions add up to the full fiber dimension
    comdev = 0.0
    for deg in interior:
        total = sum(sub.dim_at(deg) for sub in summands.values())
        comdev = max(comdev, abs(total - t.space.dim))
    items["completeness"] = (comdev == 0.0, float(comdev))

    # (b) summands are pairwise orthogonal
    orthodev = 0.0
    for (s1, sub1), (s2, sub2) in itertools.combinations(summands.items(), 2):
        for deg in set(sub1.blocks) & set(sub2.blocks):
            b1, b2 = sub1.blocks[deg], sub2.blocks[deg]
            if b1.shape[1] and b2.shape[1]:
                orthodev = max(orthodev, float(np.abs(b1.conj().T @ b2).max()))
    items["orthogonality"] = (orthodev <= tol, orthodev)

    # (c) coordinate behavior on each summand
    shiftdev = 0.0
    coisodev = 0.0
    for s, sub in summands.items():
        inside = set(s)
        for v in sub.basis_vectors():
            deg = tuple(v.degrees[0])
            if deg not in interior:
                continue
            maxdeg = max((abs(x) for x in deg), default=0)
            for i in range(t.k):
                rows = effective_rows(t, i)
                if i in inside:
                    # wandering exhausts: the range projection at one level past
                    # the degree must kill v
                    level = min(maxdeg + 1, window + 1)
                    mass = 0.0
                    for word in itertools.product(range(len(rows)), repeat=level):
                        mass += apply_word_adjoint(rows, word, v).norm() ** 2
                    shiftdev = max(shiftdev, float(np.sqrt(mass)))
                else:
                    out = None
                    for srow in rows:
                        piece = srow.apply(srow.adjoint().apply(v))
                        out = piece if out is None else out + piece
                    coisodev = max(coisodev, (out - v).norm())
    items["shift-part"] = (shiftdev <= tol, float(shiftdev))
    items["coisometric-part"] = (coisodev <= tol, float(coisodev))

    ok = all(flag for flag, _ in items.values())
    dims = {s: summands[s].dims() for s in subsets}
    return DecompositionReport(ok, items, dims, tol)
