"""Batched evaluation of degree-dependent operator blocks.

A lattice operator term carries a block of the form

    B(n) = M_1^{e_1(n)} M_2^{e_2(n)} ... M_f^{e_f(n)},

where the exponents are affine functions of the lattice degree n.  Applying a
term to a graded vector means evaluating B(n) at every degree in the support
and multiplying it into the fiber component there.  That inner loop is the hot
path of the whole package; it is implemented twice:

* a numba ``@njit`` kernel (default when numba is importable), and
* a pure-numpy fallback.

Set ``TWISTREP_NO_NUMBA=1`` to force the numpy path.  ``benchmarks/bench_apply.py``
compares the two.

Both paths consume the same precomputed data: for each factor a power table
``tables[f, e - bases[f]] == M_f^e`` covering the exponent range that occurs
in the batch.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("TWISTREP_NO_NUMBA", "").lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        numba = None
        USE_NUMBA = False


def chain_blocks_numpy(tables, bases, expo):
    """Evaluate the factor chain at every degree.  Returns (m, d, d)."""
    m, nf = expo.shape
    blocks = tables[0][expo[:, 0] - bases[0]]
    for f in range(1, nf):
        blocks = np.einsum("mab,mbc->mac", blocks, tables[f][expo[:, f] - bases[f]])
    return blocks


def apply_chain_numpy(tables, bases, expo, comps):
    """Evaluate the chain and multiply into fiber components.  Returns (m, d)."""
    if expo.shape[1] == 0:
        return comps.copy()
    blocks = chain_blocks_numpy(tables, bases, expo)
    return np.einsum("mab,mb->ma", blocks, comps)


if USE_NUMBA:

    @numba.njit(cache=True)
    def _chain_blocks_nb(tables, bases, expo):  # pragma: no cover - jitted
        m, nf = expo.shape
        d = tables.shape[2]
        out = np.empty((m, d, d), dtype=np.complex128)
        for i in range(m):
            acc = tables[0, expo[i, 0] - bases[0]]
            for f in range(1, nf):
                acc = acc @ tables[f, expo[i, f] - bases[f]]
            out[i] = acc
        return out

    @numba.njit(cache=True)
    def _apply_chain_nb(tables, bases, expo, comps):  # pragma: no cover - jitted
        m, nf = expo.shape
        d = comps.shape[1]
        out = np.empty((m, d), dtype=np.complex128)
        for i in range(m):
            acc = tables[0, expo[i, 0] - bases[0]]
            for f in range(1, nf):
                acc = acc @ tables[f, expo[i, f] - bases[f]]
            out[i] = acc @ comps[i]
        return out

    def chain_blocks(tables, bases, expo):
        return _chain_blocks_nb(tables, bases, expo)

    def apply_chain(tables, bases, expo, comps):
        if expo.shape[1] == 0:
            return comps.copy()
        return _apply_chain_nb(tables, bases, expo, comps)

else:
    chain_blocks = chain_blocks_numpy
    apply_chain = apply_chain_numpy
