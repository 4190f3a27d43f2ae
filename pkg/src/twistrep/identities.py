"""Operator identities behind the decomposition and model constructions.

Each function asserts one displayed identity as a window equality of exact
symbolic operators and returns a CheckReport.  Everything is phrased through
the effective coordinate family (see wold.effective_rows), under which all
package fixtures have one-dimensional fibers; the mixed-fiber variants accept
general dimensions where the flip matrices enter the statement.
"""

import itertools

import numpy as np

from .operators import LatticeOperator, equal_on_window
from .representation import _Collector
from .tensorspace import FiberSpec, flip_block, flip_iterated
from . import wold


def _eff_fibers(t):
    dims = tuple(wold.effective_dim(t, i) for i in range(t.k))
    if t.algebra.kind == "scalar":
        flips = dict(t.fibers._flips)
        return FiberSpec(dims, flips)
    return FiberSpec(dims)


def _word_op(t, i, word):
    rows = wold.effective_rows(t, i)
    out = LatticeOperator.identity(t.space)
    for letter in word:
        out = out @ rows[letter]
    return out


def _power_op(op, n, space):
    out = LatticeOperator.identity(space)
    for _ in range(n):
        out = out @ op
    return out


def _range_projection(t, i, n):
    """P_i^(n) = T̃_i^(n) T̃_i^(n)* as a symbolic word sum."""
    d = wold.effective_dim(t, i)
    total = None
    for word in itertools.product(range(d), repeat=n):
        w = _word_op(t, i, word)
        piece = w @ w.adjoint()
        total = piece if total is None else total + piece
    return total


def dtr_relation(t, i, j, p, q, window=8, tol=1e-10):
    """T̃_i^(p)* T̃_j^(q) = (I ⊗ T̃_j^(q)) (t_ji^(q,p) ⊗ U_ji^{qp}) (I ⊗ T̃_i^(p)*).

    Expanded against the fiber words: for every output word μ and input word ν,
    word_μ* word_ν equals the flip-weighted sum of word U^{qp} word* pieces.
    """
    if i == j:
        raise ValueError("invalid pair")
    fibers = _eff_fibers(t)
    di, dj = fibers.dims[i], fibers.dims[j]
    tmat = flip_block(fibers, j, i, q, p)   # E_j^q ⊗ E_i^p -> E_i^p ⊗ E_j^q
    u = _power_op(t.twist(j, i), q * p, t.space)
    col = _Collector(f"dtr({i},{j},p={p},q={q})", tol)
    for mu in itertools.product(range(di), repeat=p):
        mu_flat = _flat(mu, di)
        wi = _word_op(t, i, mu)
        for nu in itertools.product(range(dj), repeat=q):
            nu_flat = _flat(nu, dj)
            lhs = wi.adjoint() @ _word_op(t, j, nu)
            rhs = LatticeOperator.zero(t.space)
            for mu2 in itertools.product(range(di), repeat=p):
                row_hi = _flat(mu2, di)
                for nu2 in itertools.product(range(dj), repeat=q):
                    c = tmat[row_hi * dj ** q + _flat(nu2, dj), nu_flat * di ** p + mu_flat]
                    if c == 0:
                        continue
                    piece = _word_op(t, j, nu2) @ u @ _word_op(t, i, mu2).adjoint()
                    rhs = rhs + piece.scale(c)
            rep = equal_on_window(lhs, rhs, window, tol)
            col.take({"check": "dtr", "ij": [i, j], "pq": [p, q],
                      "mu": list(mu), "nu": list(nu)}, rep)
    return col.report()


def _flat(word, d):
    out = 0
    for letter in word:
        out = out * d + letter
    return out


def simplify_lemma(t, subset, powers, window=8, tol=1e-10):
    """∏_{i∈A} T̃_i^(m_i)(I ⊗ P_{W_i}) T̃_i^(m_i)* = T̃_A^(m)(I ⊗ P_{W_A}) T̃_A^(m)*."""
    subset = sorted(subset)
    col = _Collector(f"simplify(A={subset},m={list(powers)})", tol)
    lhs = None
    for i, m in zip(subset, powers):
        p_i = wold.wandering_projection(t, i)
        q = None
        for word in itertools.product(range(wold.effective_dim(t, i)), repeat=m):
            w = _word_op(t, i, word)
            piece = w @ p_i @ w.adjoint()
            q = piece if q is None else q + piece
        lhs = q if lhs is None else lhs @ q
    p_a = None
    for i in subset:
        p_i = wold.wandering_projection(t, i)
        p_a = p_i if p_a is None else p_a @ p_i
    rhs = None
    word_sets = [list(itertools.product(range(wold.effective_dim(t, i)), repeat=m))
                 for i, m in zip(subset, powers)]
    for combo in itertools.product(*word_sets):
        w = LatticeOperator.identity(t.space)
        for i, word in zip(subset, combo):
            w = w @ _word_op(t, i, word)
        piece = w @ p_a @ w.adjoint()
        rhs = piece if rhs is None else rhs + piece
    rep = equal_on_window(lhs, rhs, window, tol)
    col.take({"check": "simplify", "A": subset, "m": list(powers)}, rep)
    return col.report()


def intertwining_twists(t, level=3, window=8, tol=1e-10):
    """U_{ij} T̃_m^(n) = T̃_m^(n)(I ⊗ U_{ij}) and U_{ij} P_m^(n) = P_m^(n) U_{ij}, n ≤ level."""
    col = _Collector(f"twist-intertwining(n<={level})", tol)
    for i, j in itertools.combinations(range(t.k), 2):
        u = t.twist(i, j)
        for m in range(t.k):
            d = wold.effective_dim(t, m)
            for n in range(1, level + 1):
                for word in itertools.product(range(d), repeat=n):
                    w = _word_op(t, m, word)
                    rep = equal_on_window(u @ w, w @ u, window, tol)
                    col.take({"check": "U-word", "ij": [i, j], "m": m, "word": list(word)}, rep)
                p = _range_projection(t, m, n)
                rep = equal_on_window(u @ p, p @ u, window, tol)
                col.take({"check": "U-range-projection", "ij": [i, j], "m": m, "n": n}, rep)
    return col.report()


def twist_power_commutation(t, level=3, window=8, tol=1e-10):
    """U_{ij}^n T̃_l^(m) = T̃_l^(m)(I ⊗ U_{ij}^n) for n, m ≤ level."""
    col = _Collector(f"twist-power-commutation(<={level})", tol)
    for i, j in itertools.combinations(range(t.k), 2):
        for n in range(1, level + 1):
            u = _power_op(t.twist(i, j), n, t.space)
            for l in range(t.k):
                d = wold.effective_dim(t, l)
                for m in range(1, level + 1):
                    for word in itertools.product(range(d), repeat=m):
                        w = _word_op(t, l, word)
                        rep = equal_on_window(u @ w, w @ u, window, tol)
                        col.take({"check": "Un-word", "ij": [i, j], "n": n, "l": l,
                                  "m": m}, rep)
    return col.report()


def creation_block_commutation(t, i, j, level=3, window=8, tol=1e-10):
    """T̃_i(I ⊗ T̃_j^(n)) = T̃_j^(n)(I ⊗ T̃_i)(t_ij^(n) ⊗ U_ij^n) for n ≤ level."""
    if i == j:
        raise ValueError("invalid pair")
    fibers = _eff_fibers(t)
    di, dj = fibers.dims[i], fibers.dims[j]
    col = _Collector(f"creation-block({i},{j},n<={level})", tol)
    for n in range(1, level + 1):
        tmat = flip_iterated(fibers, i, j, n)
        u = _power_op(t.twist(i, j), n, t.space)
        for alpha in range(di):
            for word in itertools.product(range(dj), repeat=n):
                lhs = wold.effective_rows(t, i)[alpha] @ _word_op(t, j, word)
                rhs = LatticeOperator.zero(t.space)
                for word2 in itertools.product(range(dj), repeat=n):
                    for delta in range(di):
                        c = tmat[_flat(word2, dj) * di + delta, alpha * dj ** n + _flat(word, dj)]
                        if c == 0:
                            continue
                        piece = _word_op(t, j, word2) @ wold.effective_rows(t, i)[delta] @ u
                        rhs = rhs + piece.scale(c)
                rep = equal_on_window(lhs, rhs, window, tol)
                col.take({"check": "creation-block", "ij": [i, j], "n": n,
                          "alpha": alpha, "word": list(word)}, rep)
    return col.report()


def _ordered_power_op(t, subset, powers):
    """T̃_A^(n) for one-dimensional effective fibers: the ascending product of powers."""
    out = LatticeOperator.identity(t.space)
    for i, m in zip(sorted(subset), powers):
        rows = wold.effective_rows(t, i)
        if len(rows) != 1:
            raise ValueError("ordered powers need one-dimensional effective fibers")
        out = out @ _power_op(rows[0], m, t.space)
    return out


def creation_insertion(t, subset, powers, window=8, tol=1e-10):
    """T̃_{i_j}(I ⊗ T̃_A^(n)) = T̃_A^(n+e_j) ∏_{r<j} U_{i_j i_r}^{n_r}, plus the A^c form.

    Stated for one-dimensional effective fibers (every package fixture).
    """
    subset = sorted(subset)
    col = _Collector(f"creation-insertion(A={subset},n={list(powers)})", tol)
    base = _ordered_power_op(t, subset, powers)
    for pos, i in enumerate(subset):
        lhs = wold.effective_rows(t, i)[0] @ base
        bumped = list(powers)
        bumped[pos] += 1
        correction = LatticeOperator.identity(t.space)
        for r in range(pos):
            correction = correction @ _power_op(t.twist(i, subset[r]), powers[r], t.space)
        rhs = _ordered_power_op(t, subset, bumped) @ correction
        rep = equal_on_window(lhs, rhs, window, tol)
        col.take({"check": "insert-inside", "A": subset, "i": i, "n": list(powers)}, rep)
    for l in range(t.k):
        if l in subset:
            continue
        lhs = wold.effective_rows(t, l)[0] @ base
        correction = LatticeOperator.identity(t.space)
        for r, i_r in enumerate(subset):
            correction = correction @ _power_op(t.twist(l, i_r), powers[r], t.space)
        rhs = base @ wold.effective_rows(t, l)[0] @ correction
        rep = equal_on_window(lhs, rhs, window, tol)
        col.take({"check": "insert-outside", "A": subset, "l": l, "n": list(powers)}, rep)
    return col.report()


def intersection_lemma(t, subset, depth=2, window=4, tol=1e-10):
    """Grid and per-coordinate core intersections agree in per-degree dimensions."""
    subset = sorted(subset)
    comp = [c for c in range(t.k) if c not in subset]
    col = _Collector(f"intersection(A={subset})", tol)
    if not comp:
        return col.report()
    reach = depth * max((op.max_offset() for c in comp for op in effective_rows_all(t, comp)), default=0)
    wa = wold.joint_wandering(t, subset, window + reach, tol)
    grid = list(itertools.product(range(depth + 1), repeat=len(comp)))
    d = t.space.dim
    grid_blocks = _grid_intersection(t, comp, grid, wa, window, d)
    per_coord = []
    for idx, c in enumerate(comp):
        for m in range(depth + 1):
            powers = tuple(m if jj == idx else 0 for jj in range(len(comp)))
            per_coord.append(wold.image_subspace(t, comp, powers, wa, window))
    coord_blocks = {}
    degrees = set.intersection(*(set(img.blocks) for img in per_coord)) if per_coord else set()
    for deg in degrees:
        bases = [img.blocks[deg] for img in per_coord]
        if any(b.shape[1] == 0 for b in bases):
            continue
        basis = wold.intersect_columns(bases, d)
        if basis.shape[1]:
            coord_blocks[deg] = basis
    devs = []
    for deg in set(grid_blocks) | set(coord_blocks):
        a = grid_blocks.get(deg)
        b = coord_blocks.get(deg)
        da = 0 if a is None else a.shape[1]
        db = 0 if b is None else b.shape[1]
        devs.append(abs(da - db))
    worst = max(devs, default=0)
    from .operators import EqualityReport

    col.take({"check": "intersection-dims", "A": subset},
             EqualityReport(worst == 0, float(worst), tol, ((), 0)))
    return col.report()


def effective_rows_all(t, coords):
    for c in coords:
        for op in wold.effective_rows(t, c):
            yield op


def _grid_intersection(t, comp, grid, wa, window, d):
    images = {m: wold.image_subspace(t, comp, m, wa, window) for m in grid}
    out = {}
    degrees = set.intersection(*(set(img.blocks) for img in images.values()))
    for deg in degrees:
        bases = [images[m].blocks[deg] for m in grid]
        if any(b.shape[1] == 0 for b in bases):
            continue
        basis = wold.intersect_columns(bases, d)
        if basis.shape[1]:
            out[deg] = basis
    return out


def core_reduction(t, subset, window=4, depth=3, tol=1e-8):
    """σ(a), the twists, and the A^c coordinates map W_A and 𝒟_A into themselves."""
    subset = sorted(subset)
    col = _Collector(f"core-reduction(A={subset})", tol)
    from .operators import EqualityReport

    spaces = {"wandering": wold.joint_wandering(t, subset, window, tol),
              "core": wold.d_space(t, subset, window, depth, tol)}
    margin = max((op.max_offset() for i in range(t.k) for op in wold.effective_rows(t, i)),
                 default=0)
    movers = []
    for i, j in itertools.combinations(range(t.k), 2):
        movers.append((f"twist({i},{j})", t.twist(i, j)))
    for l in range(t.k):
        if l not in subset:
            movers.append((f"coordinate {l}", wold.effective_rows(t, l)[0]))
    if t.algebra.kind != "scalar":
        for a in range(t.algebra.basis_size):
            movers.append((f"sigma[{a}]", t.sigma_ops[a]))
    for sp_name, sub in spaces.items():
        for op_name, op in movers:
            worst = 0.0
            where = ((), 0)
            for v in sub.basis_vectors():
                if any(abs(int(x)) > window - margin for x in v.degrees[0]):
                    continue
                res = sub.residual(op.apply(v))
                if res > worst:
                    worst = res
                    where = (tuple(int(x) for x in v.degrees[0]), 0)
            col.take({"check": "reduction", "space": sp_name, "op": op_name},
                     EqualityReport(worst <= tol, worst, tol, where))
    return col.report()
