"""Exact operator backends: graded lattice operators and dense matrices.

A lattice operator acts on the graded space  ⊕_{n ∈ L} ℂ^d  where L is either
ℤ^r or a half-space product (per-coordinate signed mask).  It is a finite sum
of terms

    (offset s, coefficient c, factor chain B(n), window W):
        (T v)(n + s) += c · B(n) · v(n)      whenever n ∈ W,

with B(n) an ordered product of registered d×d matrices raised to affine
integer exponents of the degree.  Contributions whose output degree leaves the
lattice are dropped; on unsigned coordinates this reproduces annihilation at
the boundary and is the only lossy rule in the calculus.  Composition and
adjoints are computed termwise and are exact as operator identities because
intermediate boundary truncations are recorded as explicit windows.

Dense operators are plain square matrices with the same calling surface.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

RANK_TOL = 1e-8


# ---------------------------------------------------------------------------
# matrix registry


class MatrixRegistry:
    """Named d×d matrices plus a cache of their integer powers."""

    def __init__(self, dim):
        self.dim = dim
        self._mats = {}
        self._by_bytes = {}
        self._pow = {}
        self._auto = 0

    def register(self, name, matrix):
        matrix = np.array(matrix, dtype=complex)
        if matrix.shape != (self.dim, self.dim):
            raise ValueError(f"matrix {name!r} has shape {matrix.shape}, expected {(self.dim, self.dim)}")
        if name in self._mats:
            if not np.array_equal(self._mats[name], matrix):
                raise ValueError(f"name {name!r} already registered with different entries")
            return name
        matrix.setflags(write=False)
        self._mats[name] = matrix
        self._by_bytes.setdefault(matrix.tobytes(), name)
        return name

    def is_scalar(self, name):
        """True when the matrix is a multiple of the identity (commutes freely)."""
        m = self._mats[name]
        return bool(np.array_equal(m, m[0, 0] * np.eye(self.dim)))

    def is_zero(self, name):
        return not self._mats[name].any()

    def intern(self, matrix, hint="c"):
        """Register under a content-derived name, reusing an existing one if equal."""
        matrix = np.ascontiguousarray(matrix, dtype=complex)
        key = matrix.tobytes()
        if key in self._by_bytes:
            return self._by_bytes[key]
        while f"_{hint}{self._auto}" in self._mats:
            self._auto += 1
        return self.register(f"_{hint}{self._auto}", matrix)

    def matrix(self, name):
        return self._mats[name]

    def adjoint_name(self, name):
        return self.intern(self._mats[name].conj().T, hint="adj")

    def power(self, name, e):
        key = (name, e)
        cached = self._pow.get(key)
        if cached is not None:
            return cached
        m = self._mats[name]
        if e >= 0:
            p = np.linalg.matrix_power(m, e)
        else:
            eye = np.eye(self.dim)
            if np.allclose(m @ m.conj().T, eye, atol=1e-12):
                inv = m.conj().T
            else:
                inv = np.linalg.inv(m)
            p = np.linalg.matrix_power(inv, -e)
        self._pow[key] = p
        return p

    def table(self, name, emin, emax, span):
        """Stacked powers M^emin .. M^emax padded to `span` rows."""
        d = self.dim
        out = np.zeros((span, d, d), dtype=complex)
        for e in range(emin, emax + 1):
            out[e - emin] = self.power(name, e)
        return out


# ---------------------------------------------------------------------------
# spaces


@dataclass(frozen=True)
class LatticeSpace:
    """⊕_{n ∈ L} ℂ^dim with L = ∏_c (ℤ or ℤ₊) per the signed mask."""

    rank: int
    dim: int
    signed: tuple
    registry: MatrixRegistry = field(compare=False, repr=False)

    @staticmethod
    def create(rank, dim, signed=False):
        if isinstance(signed, bool):
            signed = (signed,) * rank
        return LatticeSpace(rank, dim, tuple(bool(s) for s in signed), MatrixRegistry(dim))

    @property
    def is_dense(self):
        return False

    def signed_version(self):
        """Same fiber and registry, every coordinate bilateral."""
        return LatticeSpace(self.rank, self.dim, (True,) * self.rank, self.registry)

    def contains(self, degrees):
        ok = np.ones(len(degrees), dtype=bool)
        for c, s in enumerate(self.signed):
            if not s:
                ok &= degrees[:, c] >= 0
        return ok

    def window_degrees(self, n):
        """All degrees with per-coordinate magnitude ≤ n, as an (m, rank) array."""
        axes = [np.arange(-n if s else 0, n + 1) for s in self.signed]
        grids = np.meshgrid(*axes, indexing="ij") if self.rank else []
        if not grids:
            return np.zeros((1, 0), dtype=np.int64)
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


@dataclass(frozen=True)
class DenseSpace:
    """A plain finite-dimensional Hilbert space ℂ^dim."""

    dim: int

    @property
    def is_dense(self):
        return True


# ---------------------------------------------------------------------------
# windows: per-coordinate integer intervals, None = unbounded

FULL = None


def _window_intersect(a, b, rank):
    if a is FULL:
        return b
    if b is FULL:
        return a
    out = []
    for (alo, ahi), (blo, bhi) in zip(a, b):
        lo = alo if blo is None else (blo if alo is None else max(alo, blo))
        hi = ahi if bhi is None else (bhi if ahi is None else min(ahi, bhi))
        out.append((lo, hi))
    return tuple(out)


def _window_shift(w, s):
    """{n : n - s ∈ w}"""
    if w is FULL:
        return FULL
    return tuple(
        (None if lo is None else lo + si, None if hi is None else hi + si)
        for (lo, hi), si in zip(w, s)
    )


def _window_canonical(w, space):
    if w is FULL:
        return FULL
    out = []
    trivial = True
    for c, (lo, hi) in enumerate(w):
        if lo is not None and not space.signed[c] and lo <= 0:
            lo = None
        if lo is not None and hi is not None and lo > hi:
            return "empty"
        if lo is not None or hi is not None:
            trivial = False
        out.append((lo, hi))
    return FULL if trivial else tuple(out)


def _window_mask(w, degrees):
    ok = np.ones(len(degrees), dtype=bool)
    if w is FULL:
        return ok
    for c, (lo, hi) in enumerate(w):
        if lo is not None:
            ok &= degrees[:, c] >= lo
        if hi is not None:
            ok &= degrees[:, c] <= hi
    return ok


# ---------------------------------------------------------------------------
# factors and terms


@dataclass(frozen=True)
class Factor:
    """A registered matrix raised to an affine exponent coeffs·n + const."""

    name: str
    coeffs: tuple
    const: int

    def exponents(self, degrees):
        e = np.full(len(degrees), self.const, dtype=np.int64)
        for c, a in enumerate(self.coeffs):
            if a:
                e += a * degrees[:, c]
        return e

    @property
    def is_constant(self):
        return not any(self.coeffs)


@dataclass(frozen=True)
class Term:
    offset: tuple
    coeff: complex
    factors: tuple
    window: object  # FULL or tuple of (lo, hi)


def _normalize_factors(factors, registry, rank):
    """Canonicalize a factor chain.

    Scalar multiples of the identity commute with everything, so they are
    slid to the front (sorted by name); adjacent same-name powers merge by
    adding exponents; adjacent runs of constants fold into one interned
    product.  Returns None when the chain is identically zero.
    """
    scalars = [f for f in factors if registry.is_scalar(f.name)]
    others = [f for f in factors if not registry.is_scalar(f.name)]
    scalars.sort(key=lambda f: f.name)
    out = []
    for f in scalars + others:
        if f.is_constant and f.const == 0:
            continue
        while out:
            g = out[-1]
            if g.name == f.name:
                f = Factor(f.name, tuple(a + b for a, b in zip(g.coeffs, f.coeffs)), g.const + f.const)
                out.pop()
                if f.is_constant and f.const == 0:
                    f = None
                break
            if g.is_constant and f.is_constant:
                prod = registry.power(g.name, g.const) @ registry.power(f.name, f.const)
                out.pop()
                if not prod.any():
                    return None
                if np.array_equal(prod, np.eye(registry.dim)):
                    f = None
                    break
                f = Factor(registry.intern(prod), (0,) * rank, 1)
                continue
            break
        if f is not None:
            out.append(f)
    return tuple(out)


class LatticeOperator:
    """Finite sum of (offset, coefficient, factor chain, window) terms."""

    def __init__(self, space, terms):
        self.space = space
        norm_terms = []
        for t in terms:
            if abs(t.coeff) == 0.0:
                continue
            w = _window_canonical(t.window, space)
            if w == "empty":
                continue
            factors = _normalize_factors(t.factors, space.registry, space.rank)
            if factors is None:
                continue
            # a constant zero factor with nonzero exponent kills the term
            if any(space.registry.is_zero(f.name) and f.is_constant and f.const != 0 for f in factors):
                continue
            norm_terms.append(Term(tuple(int(x) for x in t.offset), complex(t.coeff), factors, w))
        merged = {}
        order = []
        for t in norm_terms:
            key = (t.offset, t.factors, t.window)
            if key in merged:
                merged[key] = Term(t.offset, merged[key].coeff + t.coeff, t.factors, t.window)
            else:
                merged[key] = t
                order.append(key)
        self.terms = tuple(merged[k] for k in order if abs(merged[k].coeff) > 0.0)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(space):
        return LatticeOperator(space, [])

    @staticmethod
    def identity(space):
        return LatticeOperator(space, [Term((0,) * space.rank, 1.0, (), FULL)])

    @staticmethod
    def single(space, offset, factors=(), coeff=1.0, window=FULL):
        """One-term operator; factors given as (matrix-or-name, coeffs, const)."""
        fs = []
        for mat, coeffs, const in factors:
            name = mat if isinstance(mat, str) else space.registry.intern(np.asarray(mat))
            fs.append(Factor(name, tuple(coeffs), int(const)))
        return LatticeOperator(space, [Term(tuple(offset), coeff, tuple(fs), window)])

    @staticmethod
    def const_block(space, matrix, offset=None, window=FULL):
        """Degree-independent block, offset 0 by default."""
        if offset is None:
            offset = (0,) * space.rank
        return LatticeOperator.single(space, offset, [(matrix, (0,) * space.rank, 1)], window=window)

    # -- algebra -----------------------------------------------------------

    def adjoint(self):
        reg = self.space.registry
        terms = []
        for t in self.terms:
            neg = tuple(-s for s in t.offset)
            factors = []
            for f in reversed(t.factors):
                shift = sum(a * s for a, s in zip(f.coeffs, t.offset))
                factors.append(Factor(reg.adjoint_name(f.name), f.coeffs, f.const - shift))
            terms.append(Term(neg, np.conj(t.coeff), tuple(factors), _window_shift(t.window, t.offset)))
        return LatticeOperator(self.space, terms)

    def compose(self, other):
        """self ∘ other, exact (intermediate boundary truncation becomes a window)."""
        if other.space is not self.space:
            raise ValueError("operators live on different spaces")
        out = []
        for ta in self.terms:
            for tb in other.terms:
                offset = tuple(a + b for a, b in zip(ta.offset, tb.offset))
                shifted = tuple(
                    Factor(f.name, f.coeffs, f.const + sum(a * s for a, s in zip(f.coeffs, tb.offset)))
                    for f in ta.factors
                )
                w = _window_intersect(tb.window, _window_shift(ta.window, tuple(-s for s in tb.offset)),
                                      self.space.rank)
                mid = []
                nontrivial = False
                for c in range(self.space.rank):
                    if not self.space.signed[c] and tb.offset[c] < 0:
                        mid.append((-tb.offset[c], None))
                        nontrivial = True
                    else:
                        mid.append((None, None))
                if nontrivial:
                    w = _window_intersect(w, tuple(mid), self.space.rank)
                out.append(Term(offset, ta.coeff * tb.coeff, shifted + tb.factors, w))
        return LatticeOperator(self.space, out)

    def add(self, other):
        if other.space is not self.space:
            raise ValueError("operators live on different spaces")
        return LatticeOperator(self.space, self.terms + other.terms)

    def scale(self, c):
        return LatticeOperator(self.space, [Term(t.offset, c * t.coeff, t.factors, t.window) for t in self.terms])

    def __matmul__(self, other):
        return self.compose(other)

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.add(other.scale(-1.0))

    def __rmul__(self, c):
        return self.scale(c)

    def continued_on(self, space):
        """Reinterpret the same term data on another lattice (signed continuation)."""
        if space.registry is not self.space.registry or space.rank != self.space.rank:
            raise ValueError("continuation requires the shared registry and rank")
        return LatticeOperator(space, self.terms)

    def max_offset(self):
        return max((max(abs(s) for s in t.offset) for t in self.terms if t.offset), default=0)

    # -- evaluation --------------------------------------------------------

    def _term_blocks(self, term, degrees):
        """Evaluate one term's blocks at the given degrees: (m, d, d)."""
        reg = self.space.registry
        d = self.space.dim
        if not term.factors:
            return np.broadcast_to(np.eye(d, dtype=complex) * term.coeff, (len(degrees), d, d))
        expo = np.stack([f.exponents(degrees) for f in term.factors], axis=1)
        emin = expo.min(axis=0)
        emax = expo.max(axis=0)
        span = int((emax - emin).max()) + 1
        tables = np.stack([reg.table(f.name, int(emin[j]), int(emax[j]), span)
                           for j, f in enumerate(term.factors)])
        return _kernels.chain_blocks(tables, emin.astype(np.int64), expo) * term.coeff

    def apply(self, v):
        """Exact application to a finitely supported graded vector."""
        if v.space.rank != self.space.rank or v.space.dim != self.space.dim:
            raise ValueError("vector/operator shape mismatch")
        pieces = []
        for t in self.terms:
            mask = _window_mask(t.window, v.degrees)
            if t.offset != (0,) * self.space.rank:
                mask &= self.space.contains(v.degrees + np.array(t.offset, dtype=np.int64))
            if not mask.any():
                continue
            degs = v.degrees[mask]
            if t.factors:
                expo = np.stack([f.exponents(degs) for f in t.factors], axis=1)
                emin = expo.min(axis=0)
                emax = expo.max(axis=0)
                span = int((emax - emin).max()) + 1
                reg = self.space.registry
                tables = np.stack([reg.table(f.name, int(emin[j]), int(emax[j]), span)
                                   for j, f in enumerate(t.factors)])
                out = _kernels.apply_chain(tables, emin.astype(np.int64), expo, v.comps[mask])
            else:
                out = v.comps[mask].copy()
            pieces.append((degs + np.array(t.offset, dtype=np.int64), out * t.coeff))
        if not pieces:
            return GradedVector.empty(self.space)
        return GradedVector(self.space,
                            np.concatenate([p[0] for p in pieces]),
                            np.concatenate([p[1] for p in pieces]))

    def column_norms(self, degrees):
        """‖T(δ_n ⊗ e_b)‖ for every input degree n and fiber index b: (m, d)."""
        m = len(degrees)
        d = self.space.dim
        acc = [{} for _ in range(m)]
        for t in self.terms:
            mask = _window_mask(t.window, degrees)
            mask &= self.space.contains(degrees + np.array(t.offset, dtype=np.int64))
            idx = np.nonzero(mask)[0]
            if len(idx) == 0:
                continue
            blocks = self._term_blocks(t, degrees[idx])
            outdeg = degrees[idx] + np.array(t.offset, dtype=np.int64)
            for j, i in enumerate(idx):
                key = tuple(outdeg[j])
                slot = acc[i].get(key)
                if slot is None:
                    acc[i][key] = blocks[j].copy()
                else:
                    slot += blocks[j]
        devs = np.zeros((m, d))
        for i in range(m):
            for blk in acc[i].values():
                devs[i] += (np.abs(blk) ** 2).sum(axis=0)
        return np.sqrt(devs)


# ---------------------------------------------------------------------------
# graded vectors


class GradedVector:
    """Finitely supported element of ⊕_n ℂ^d, canonical (sorted, merged) storage."""

    def __init__(self, space, degrees, comps, canonical=False):
        self.space = space
        comps = np.asarray(comps, dtype=complex).reshape(-1, space.dim)
        degrees = np.asarray(degrees, dtype=np.int64).reshape(len(comps), space.rank)
        if not canonical and len(degrees) > 0:
            if space.rank > 0:
                order = np.lexsort(degrees.T[::-1])
                degrees = degrees[order]
                comps = comps[order]
            new = np.ones(len(degrees), dtype=bool)
            if space.rank > 0:
                new[1:] = np.any(degrees[1:] != degrees[:-1], axis=1)
            else:
                new[1:] = False
            starts = np.nonzero(new)[0]
            degrees = degrees[starts]
            comps = np.add.reduceat(comps, starts, axis=0)
            keep = np.abs(comps).sum(axis=1) > 0.0
            degrees = degrees[keep]
            comps = comps[keep]
        self.degrees = degrees
        self.comps = comps

    @staticmethod
    def empty(space):
        return GradedVector(space, np.zeros((0, space.rank)), np.zeros((0, space.dim)), canonical=True)

    @staticmethod
    def basis(space, degree, fiber=0):
        comp = np.zeros(space.dim, dtype=complex)
        comp[fiber] = 1.0
        return GradedVector(space, [degree], [comp], canonical=True)

    @staticmethod
    def from_dict(space, entries):
        if not entries:
            return GradedVector.empty(space)
        return GradedVector(space, list(entries.keys()), list(entries.values()))

    def to_dict(self):
        return {tuple(d): self.comps[i].copy() for i, d in enumerate(self.degrees)}

    def component(self, degree):
        for i, d in enumerate(self.degrees):
            if tuple(d) == tuple(degree):
                return self.comps[i].copy()
        return np.zeros(self.space.dim, dtype=complex)

    def norm(self):
        return float(np.linalg.norm(self.comps))

    def inner(self, other):
        """⟨self, other⟩, conjugate-linear in the first argument."""
        lut = {tuple(d): i for i, d in enumerate(self.degrees)}
        total = 0.0 + 0.0j
        for j, d in enumerate(other.degrees):
            i = lut.get(tuple(d))
            if i is not None:
                total += np.vdot(self.comps[i], other.comps[j])
        return total

    def add(self, other):
        return GradedVector(self.space,
                            np.concatenate([self.degrees, other.degrees]),
                            np.concatenate([self.comps, other.comps]))

    def scale(self, c):
        return GradedVector(self.space, self.degrees.copy(), self.comps * c, canonical=True)

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return self.add(other.scale(-1.0))

    def __rmul__(self, c):
        return self.scale(c)


# ---------------------------------------------------------------------------
# dense operators


class DenseOperator:
    """A square complex matrix with the lattice-operator calling surface."""

    def __init__(self, space, matrix):
        self.space = space
        self.matrix = np.array(matrix, dtype=complex)
        if self.matrix.shape != (space.dim, space.dim):
            raise ValueError("dense operator must be square on the space dimension")

    @staticmethod
    def zero(space):
        return DenseOperator(space, np.zeros((space.dim, space.dim)))

    @staticmethod
    def identity(space):
        return DenseOperator(space, np.eye(space.dim))

    def adjoint(self):
        return DenseOperator(self.space, self.matrix.conj().T)

    def compose(self, other):
        return DenseOperator(self.space, self.matrix @ other.matrix)

    def add(self, other):
        return DenseOperator(self.space, self.matrix + other.matrix)

    def scale(self, c):
        return DenseOperator(self.space, c * self.matrix)

    def __matmul__(self, other):
        return self.compose(other)

    def __add__(self, other):
        return self.add(other)

    def __sub__(self, other):
        return DenseOperator(self.space, self.matrix - other.matrix)

    def __rmul__(self, c):
        return self.scale(c)

    def apply(self, v):
        return self.matrix @ v


# ---------------------------------------------------------------------------
# window equality


@dataclass
class EqualityReport:
    equal: bool
    max_deviation: float
    tol: float
    worst: object  # (degree tuple, fiber index) of the worst basis vector

    def __bool__(self):
        return self.equal


def equal_on_window(a, b, window=8, tol=1e-12):
    """‖(a−b)v‖ ≤ tol for every basis vector v of degree ≤ window, with witness."""
    if isinstance(a, DenseOperator):
        diff = np.abs(a.matrix - b.matrix)
        devs = np.sqrt((diff ** 2).sum(axis=0))
        worst = int(np.argmax(devs)) if devs.size else 0
        dev = float(devs.max()) if devs.size else 0.0
        return EqualityReport(dev <= tol, dev, tol, ((), worst))
    diff = a - b
    degrees = a.space.window_degrees(window)
    devs = diff.column_norms(degrees)
    flat = int(np.argmax(devs))
    i, fiber = divmod(flat, a.space.dim)
    dev = float(devs.max())
    return EqualityReport(dev <= tol, dev, tol, (tuple(degrees[i]), fiber))


def windowed_matrix(op, degrees):
    """Compression of a lattice operator to the span of the given degrees.

    Contributions leaving the degree set are dropped; callers own the margin
    discipline (compose symbolically first, compress once).
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    d = op.space.dim
    index = {tuple(deg): i for i, deg in enumerate(degrees)}
    big = np.zeros((len(degrees) * d, len(degrees) * d), dtype=complex)
    for t in op.terms:
        mask = _window_mask(t.window, degrees)
        mask &= op.space.contains(degrees + np.array(t.offset, dtype=np.int64))
        idx = np.nonzero(mask)[0]
        if len(idx) == 0:
            continue
        blocks = op._term_blocks(t, degrees[idx])
        outdeg = degrees[idx] + np.array(t.offset, dtype=np.int64)
        for j, i in enumerate(idx):
            row = index.get(tuple(outdeg[j]))
            if row is None:
                continue
            big[row * d:(row + 1) * d, i * d:(i + 1) * d] += blocks[j]
    return big


def is_zero_on_window(a, window=8, tol=1e-12):
    if isinstance(a, DenseOperator):
        return equal_on_window(a, DenseOperator.zero(a.space), window, tol)
    return equal_on_window(a, LatticeOperator.zero(a.space), window, tol)
