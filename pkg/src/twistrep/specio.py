"""Operator-spec files: a canonical JSON tree for tuples, and report encoding.

Complex scalars are always two-element arrays [re, im]; matrices are nested
lists of those.  The canonical form is JSON with sorted keys and compact
separators, so parse → serialize is idempotent byte-for-byte.

Format version: twistrep-spec/1 (documents), twistrep-report/1 (reports).
"""

import json

import numpy as np

from .operators import Factor, LatticeOperator, LatticeSpace, Term
from .representation import AlgebraSpec, TwistedTuple
from .tensorspace import FiberSpec

SPEC_FORMAT = "twistrep-spec/1"
REPORT_FORMAT = "twistrep-report/1"


class SpecError(ValueError):
    """Schema or reference error in an operator-spec document."""


# ---------------------------------------------------------------------------
# scalar/matrix encoding


def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(v):
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise SpecError(f"complex numbers are [re, im] pairs, got {v!r}")
    return complex(float(v[0]), float(v[1]))


def encode_matrix(m):
    m = np.asarray(m, dtype=complex)
    return [[encode_complex(z) for z in row] for row in m]


def decode_matrix(rows, name="matrix"):
    try:
        return np.array([[decode_complex(z) for z in row] for row in rows], dtype=complex)
    except (TypeError, SpecError) as exc:
        raise SpecError(f"{name}: {exc}") from exc


# ---------------------------------------------------------------------------
# serialization


def _encode_window(window, rank):
    if window is None:
        return None
    return [[lo, hi] for lo, hi in window]


def _encode_operator(op):
    terms = []
    for t in op.terms:
        terms.append({
            "offset": list(t.offset),
            "coeff": encode_complex(t.coeff),
            "factors": [{"name": f.name, "coeffs": list(f.coeffs), "const": f.const}
                        for f in t.factors],
            "window": _encode_window(t.window, op.space.rank),
        })
    return terms


def tuple_to_document(t, subset=None, window=None):
    """Serialize a TwistedTuple into a spec document (plain dict)."""
    space = t.space
    doc = {
        "format": SPEC_FORMAT,
        "k": t.k,
        "backend": ("dense" if space.rank == 0
                    else "lattice-signed" if all(space.signed)
                    else "lattice-unsigned" if not any(space.signed)
                    else "lattice-mixed"),
        "lattice": {
            "rank": space.rank,
            "fiber_dim": space.dim,
            "signed": [bool(s) for s in space.signed],
        },
    }
    used = set()
    operators = {}

    def add_op(name, op):
        operators[name] = _encode_operator(op)
        for term in op.terms:
            for f in term.factors:
                used.add(f.name)
        return name

    ops_names = []
    for i, row in enumerate(t.ops):
        ops_names.append([add_op(f"S{i}_{a}", op) for a, op in enumerate(row)])
    twists = {}
    for (i, j) in t.twist_pairs():
        twists[f"{i},{j}"] = add_op(f"U{i}_{j}", t.twist(i, j))
    sigma_names = None
    if t.sigma_ops is not None:
        sigma_names = [add_op(f"sigma_{a}", op) for a, op in enumerate(t.sigma_ops)]

    flips = {}
    flip_mats = {}
    for (i, j), mat in t.fibers._flips.items():
        fname = f"flip_{i}_{j}"
        flip_mats[fname] = encode_matrix(mat)
        flips[f"{i},{j}"] = fname

    algebra = {"kind": t.algebra.kind}
    algebra_autos = {}
    if t.algebra.kind == "diagonal":
        algebra["size"] = t.algebra.size
        algebra["automorphisms"] = [list(p) for p in t.algebra.automorphisms or []]
    elif t.algebra.kind == "matrix":
        algebra["size"] = t.algebra.size
        names = []
        for idx, q in enumerate(t.algebra.automorphisms or []):
            names.append(f"auto_{idx}")
            algebra_autos[f"auto_{idx}"] = encode_matrix(q)
        algebra["automorphisms"] = names

    doc["matrices"] = {name: encode_matrix(space.registry.matrix(name)) for name in sorted(used)}
    doc["flip_matrices"] = flip_mats
    doc["algebra_matrices"] = algebra_autos
    doc["operators"] = operators
    doc["tuple"] = {
        "fiber_dims": list(t.fibers.dims),
        "flips": flips,
        "ops": ops_names,
        "twists": twists,
        "algebra": algebra,
        "sigma": sigma_names,
    }
    if subset is not None:
        doc["subset"] = sorted(int(x) for x in subset)
    if window is not None:
        doc["window"] = int(window)
    return doc


def canonical_json(doc):
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def dump_tuple(t, subset=None, window=None):
    return canonical_json(tuple_to_document(t, subset, window))


# ---------------------------------------------------------------------------
# parsing


def _require(doc, key, kind, where="document"):
    if key not in doc:
        raise SpecError(f"{where}: missing key {key!r}")
    val = doc[key]
    if kind is not None and not isinstance(val, kind):
        raise SpecError(f"{where}: key {key!r} must be {kind}, got {type(val).__name__}")
    return val


def _decode_window(raw, rank, where):
    if raw is None:
        return None
    if len(raw) != rank:
        raise SpecError(f"{where}: window must list {rank} coordinate bounds")
    out = []
    for pair in raw:
        lo, hi = pair
        if lo is not None:
            lo = int(lo)
        if hi is not None:
            hi = int(hi)
        out.append((lo, hi))
    return tuple(out)


def _decode_operator(space, name, terms):
    decoded = []
    for idx, raw in enumerate(terms):
        where = f"operators.{name}[{idx}]"
        offset = tuple(int(x) for x in _require(raw, "offset", list, where))
        if len(offset) != space.rank:
            raise SpecError(f"{where}: offset rank mismatch")
        coeff = decode_complex(_require(raw, "coeff", list, where))
        factors = []
        for fraw in raw.get("factors", []):
            fname = _require(fraw, "name", str, where)
            if fname not in space.registry._mats:
                raise SpecError(f"{where}: unknown matrix {fname!r}")
            coeffs = tuple(int(x) for x in _require(fraw, "coeffs", list, where))
            if len(coeffs) != space.rank:
                raise SpecError(f"{where}: factor exponent rank mismatch")
            factors.append(Factor(fname, coeffs, int(fraw.get("const", 0))))
        window = _decode_window(raw.get("window"), space.rank, where)
        decoded.append(Term(offset, coeff, tuple(factors), window))
    return LatticeOperator(space, decoded)


def _parse_pair_key(key, k, where):
    try:
        i, j = (int(x) for x in key.split(","))
    except ValueError as exc:
        raise SpecError(f"{where}: pair keys look like 'i,j', got {key!r}") from exc
    if not (0 <= i < k and 0 <= j < k and i != j):
        raise SpecError(f"{where}: pair {key!r} out of range for k={k}")
    return i, j


def document_to_tuple(doc):
    """Parse a spec document into (TwistedTuple, extras dict)."""
    if not isinstance(doc, dict):
        raise SpecError("document must be a JSON object")
    fmt = _require(doc, "format", str)
    if fmt != SPEC_FORMAT:
        raise SpecError(f"unsupported format {fmt!r} (expected {SPEC_FORMAT})")
    k = _require(doc, "k", int)
    lat = _require(doc, "lattice", dict)
    rank = _require(lat, "rank", int, "lattice")
    dim = _require(lat, "fiber_dim", int, "lattice")
    signed = _require(lat, "signed", list, "lattice")
    if len(signed) != rank:
        raise SpecError("lattice: signed mask length must equal the rank")
    space = LatticeSpace.create(rank, dim, tuple(bool(s) for s in signed))
    for name, rows in sorted(_require(doc, "matrices", dict).items()):
        mat = decode_matrix(rows, f"matrices.{name}")
        if mat.shape != (dim, dim):
            raise SpecError(f"matrices.{name}: expected shape {(dim, dim)}, got {mat.shape}")
        space.registry.register(name, mat)

    operators = {}
    for name, terms in _require(doc, "operators", dict).items():
        if not isinstance(terms, list):
            raise SpecError(f"operators.{name}: must be a list of terms")
        operators[name] = _decode_operator(space, name, terms)

    tup = _require(doc, "tuple", dict)
    fiber_dims = tuple(int(x) for x in _require(tup, "fiber_dims", list, "tuple"))
    if len(fiber_dims) != k:
        raise SpecError("tuple.fiber_dims must list one dimension per coordinate")
    flips = {}
    flip_mats = doc.get("flip_matrices", {})
    for key, fname in tup.get("flips", {}).items():
        i, j = _parse_pair_key(key, k, "tuple.flips")
        if fname not in flip_mats:
            raise SpecError(f"tuple.flips: unknown flip matrix {fname!r}")
        flips[(i, j)] = decode_matrix(flip_mats[fname], f"flip_matrices.{fname}")
    fibers = FiberSpec(fiber_dims, flips)

    def lookup(name, where):
        if name not in operators:
            raise SpecError(f"{where}: unknown operator {name!r}")
        return operators[name]

    ops_names = _require(tup, "ops", list, "tuple")
    if len(ops_names) != k:
        raise SpecError("tuple.ops must list one family per coordinate")
    ops = []
    for i, row in enumerate(ops_names):
        if len(row) != fiber_dims[i]:
            raise SpecError(f"tuple.ops[{i}]: need {fiber_dims[i]} operators")
        ops.append([lookup(n, f"tuple.ops[{i}]") for n in row])
    twists = {}
    for key, name in tup.get("twists", {}).items():
        i, j = _parse_pair_key(key, k, "tuple.twists")
        twists[(i, j)] = lookup(name, "tuple.twists")

    algebra_raw = tup.get("algebra", {"kind": "scalar"})
    kind = algebra_raw.get("kind", "scalar")
    if kind == "scalar":
        algebra = AlgebraSpec.scalar()
    elif kind == "diagonal":
        algebra = AlgebraSpec("diagonal", int(algebra_raw["size"]),
                              [tuple(int(x) for x in p) for p in algebra_raw["automorphisms"]])
    elif kind == "matrix":
        autos = [decode_matrix(doc.get("algebra_matrices", {})[n], f"algebra_matrices.{n}")
                 for n in algebra_raw["automorphisms"]]
        algebra = AlgebraSpec("matrix", int(algebra_raw["size"]), autos)
    else:
        raise SpecError(f"unknown algebra kind {kind!r}")
    sigma = None
    if tup.get("sigma") is not None:
        sigma = [lookup(n, "tuple.sigma") for n in tup["sigma"]]

    t = TwistedTuple(k, fibers, ops, twists, algebra=algebra, sigma=sigma)
    extras = {
        "subset": tuple(int(x) for x in doc["subset"]) if "subset" in doc else None,
        "window": int(doc["window"]) if "window" in doc else None,
    }
    return t, extras


def load_tuple(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {exc}") from exc
    return document_to_tuple(doc)


# ---------------------------------------------------------------------------
# reports


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples for JSON emission."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, complex):
        return encode_complex(obj)
    return obj


def report_document(command, reports, extra=None):
    checks = []
    ok = True
    for r in reports:
        checks.append(jsonable(r.as_dict()))
        ok = ok and bool(r.ok)
    doc = {
        "format": REPORT_FORMAT,
        "command": command,
        "passed": ok,
        "checks": checks,
    }
    if extra:
        doc.update(jsonable(extra))
    return doc
