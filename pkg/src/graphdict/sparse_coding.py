"""Orthogonal matching pursuit against the normalized dictionary.

The sparse approximation step works on unit-norm atoms; afterwards each
coefficient is divided by the corresponding atom norm so that the product
of the unnormalized dictionary with the code reproduces the same
approximation.
"""
import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import EmptyCandidateSet
from .kernels import (
    PolynomialDictionary,
    ZERO_ATOM_NORM,
    atom,
    atom_norms,
    normalize_atoms,
)

# Correlations at or below this fraction of the residual norm count as
# numerically orthogonal; selection stops instead of picking noise.
ORTHOGONAL_FLOOR = 1e-13

# Dense materialization is allowed while N * S * N stays under this many
# float64 entries; beyond it the adjoint fast path supplies correlations.
DENSE_BUDGET = 2 ** 24


def worker_count() -> int:
    """Worker fan-out cap from GRAPHDICT_THREADS (default 1)."""
    raw = os.environ.get("GRAPHDICT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class SparseCode:
    """Per-signal supports and coefficients produced by OMP.

    indices[m] holds flat atom indices s*N + n for signal m, coeffs[m] the
    aligned coefficients. No atom repeats within a signal and every support
    has at most max_sparsity entries.
    """

    n_kernels: int
    n_vertices: int
    indices: tuple
    coeffs: tuple
    max_sparsity: int

    def __post_init__(self):
        if len(self.indices) != len(self.coeffs):
            raise ValueError("indices and coeffs must align per signal")
        total = self.n_kernels * self.n_vertices
        for idx, cf in zip(self.indices, self.coeffs):
            if idx.size != cf.size:
                raise ValueError("support and coefficient lengths differ")
            if idx.size > self.max_sparsity:
                raise ValueError("support exceeds the sparsity budget")
            if idx.size and (idx.min() < 0 or idx.max() >= total):
                raise ValueError("atom index out of range")
            if np.unique(idx).size != idx.size:
                raise ValueError("repeated atom within one signal")

    @property
    def n_signals(self) -> int:
        return len(self.indices)

    def support_pairs(self, m: int):
        """(kernel, vertex) pairs for signal m."""
        return [divmod(int(j), self.n_vertices) for j in self.indices[m]]

    def nnz_per_signal(self) -> np.ndarray:
        return np.array([idx.size for idx in self.indices], dtype=np.int64)

    def to_matrix(self, fmt: str = "csr") -> sp.spmatrix:
        """Coefficients as an SN x M sparse matrix."""
        rows = np.concatenate(self.indices) if self.indices else np.empty(0, int)
        data = np.concatenate(self.coeffs) if self.coeffs else np.empty(0)
        cols = np.repeat(np.arange(self.n_signals),
                         [idx.size for idx in self.indices])
        shape = (self.n_kernels * self.n_vertices, self.n_signals)
        return sp.coo_matrix((data, (rows, cols)), shape=shape).asformat(fmt)


class NormalizedDictionary:
    """Unit-norm atom access for OMP, dense or via the fast operators.

    valid marks atoms whose unnormalized norm is above the zero-flag
    threshold; flagged atoms never enter the candidate set.
    """

    def __init__(self, dense, norms, source=None):
        self.dense = dense
        self.norms = np.asarray(norms, dtype=np.float64)
        self.valid = self.norms > 0.0
        self._source = source
        self.n_atoms = self.norms.size

    @staticmethod
    def from_dense(matrix) -> "NormalizedDictionary":
        """Wrap an explicitly normalized dense dictionary.

        Columns with (numerically) zero norm are treated as flagged.
        """
        m = np.asarray(matrix, dtype=np.float64)
        norms = np.linalg.norm(m, axis=0)
        flagged = norms < ZERO_ATOM_NORM
        norms = np.where(flagged, 0.0, norms)
        return NormalizedDictionary(m, norms)

    @staticmethod
    def from_polynomial(d: PolynomialDictionary,
                        dense_budget: int = DENSE_BUDGET):
        """Normalized view of a polynomial dictionary.

        Materializes the dense normalized dictionary when it fits the
        budget; otherwise correlations run through the adjoint operator and
        only selected columns are ever formed.
        """
        size = d.n_vertices * d.n_atoms
        if size <= dense_budget:
            dense, norms = normalize_atoms(d)
            return NormalizedDictionary(dense, norms, source=d)
        norms = atom_norms(d)
        norms = np.where(norms < ZERO_ATOM_NORM, 0.0, norms)
        return NormalizedDictionary(None, norms, source=d)

    def correlations(self, residual: np.ndarray) -> np.ndarray:
        from .kernels import apply_adjoint

        if self.dense is not None:
            return self.dense.T @ residual
        raw = apply_adjoint(self._source, residual)
        out = np.zeros_like(raw)
        np.divide(raw, self.norms, out=out, where=self.valid)
        return out

    def columns(self, idx) -> np.ndarray:
        if self.dense is not None:
            return self.dense[:, idx]
        n = self._source.n_vertices
        cols = np.empty((n, len(idx)))
        for pos, j in enumerate(idx):
            s, v = divmod(int(j), n)
            cols[:, pos] = atom(self._source, s, v) / self.norms[j]
        return cols


def _refit(cols: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Least-squares coefficients of y on the accumulated support."""
    gram = cols.T @ cols
    rhs = cols.T @ y
    try:
        return np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(cols, y, rcond=None)[0]


def omp_encode(dict_cols, y, t0: int, tol: float = 1e-12):
    """Greedy OMP for a single signal against unit-norm atoms.

    Repeatedly selects the atom with the largest absolute correlation with
    the residual (ties broken by lowest flat index), then refits all
    selected coefficients by least squares. Stops after t0 atoms, when the
    residual norm drops to tol, or when every remaining correlation is
    numerically zero.

    Returns (support indices, coefficients, residual norm).
    """
    if t0 < 1:
        raise ValueError("t0 must be at least 1")
    handle = (dict_cols if isinstance(dict_cols, NormalizedDictionary)
              else NormalizedDictionary.from_dense(dict_cols))
    if not handle.valid.any():
        raise EmptyCandidateSet("all atoms are zero-flagged")
    y = np.asarray(y, dtype=np.float64)
    residual = y.copy()
    rnorm = float(np.linalg.norm(residual))
    support: list[int] = []
    coeffs = np.empty(0)
    cols = np.empty((y.shape[0], 0))
    while len(support) < t0 and rnorm > tol:
        corr = np.abs(handle.correlations(residual))
        corr[~handle.valid] = -1.0
        if support:
            corr[np.array(support)] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= ORTHOGONAL_FLOOR * max(rnorm, 1.0):
            break
        support.append(j)
        cols = np.column_stack([cols, handle.columns([j])])
        coeffs = _refit(cols, y)
        residual = y - cols @ coeffs
        rnorm = float(np.linalg.norm(residual))
    return np.array(support, dtype=np.int64), coeffs, rnorm


def _encode_batch_dense(handle: NormalizedDictionary, Y, t0, tol):
    """All signals at once; one correlation matmul per OMP step.

    Per-signal selection, refit, and stopping are identical to omp_encode;
    only the correlation products are batched.
    """
    n, m = Y.shape
    supports = [[] for _ in range(m)]
    residual = Y.copy()
    rnorms = np.linalg.norm(residual, axis=0)
    active = rnorms > tol
    coeff_store = [np.empty(0) for _ in range(m)]
    dense = handle.dense
    for _ in range(t0):
        if not active.any():
            break
        corr = np.abs(dense.T @ residual)
        corr[~handle.valid, :] = -1.0
        for sig in np.flatnonzero(active):
            sel = supports[sig]
            if sel:
                corr[sel, sig] = -1.0
            j = int(np.argmax(corr[:, sig]))
            if corr[j, sig] <= ORTHOGONAL_FLOOR * max(rnorms[sig], 1.0):
                active[sig] = False
                continue
            sel.append(j)
            cols = dense[:, sel]
            coeff_store[sig] = _refit(cols, Y[:, sig])
            residual[:, sig] = Y[:, sig] - cols @ coeff_store[sig]
            rnorms[sig] = np.linalg.norm(residual[:, sig])
            if rnorms[sig] <= tol:
                active[sig] = False
    return supports, coeff_store


def _encode_batch_fast(handle: NormalizedDictionary, Y, t0, tol):
    """Per-signal OMP through the adjoint operator, optionally threaded.

    Output order is by column index regardless of completion order; the
    shared handle is read-only.
    """
    def one(m):
        idx, cf, _ = omp_encode(handle, Y[:, m], t0, tol)
        return idx.tolist(), cf

    cols = range(Y.shape[1])
    workers = worker_count()
    if workers == 1:
        results = [one(m) for m in cols]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, cols))
    supports = [r[0] for r in results]
    coeff_store = [r[1] for r in results]
    return supports, coeff_store


def encode_batch(d: PolynomialDictionary, Y, t0: int, tol: float = 1e-12,
                 dense_budget: int = DENSE_BUDGET) -> SparseCode:
    """Sparse-code every column of Y and undo the atom normalization.

    Atoms are scaled to unit norm for the pursuit, then each coefficient is
    divided by its atom's norm, so the reconstruction of the unnormalized
    dictionary with the returned code equals the normalized-dictionary
    approximation.
    """
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[0] != d.n_vertices:
        raise ValueError(f"Y must be {d.n_vertices} x M")
    handle = NormalizedDictionary.from_polynomial(d, dense_budget)
    if not handle.valid.any():
        raise EmptyCandidateSet("all atoms are zero-flagged")
    if handle.dense is not None:
        supports, coeff_store = _encode_batch_dense(handle, Y, t0, tol)
    else:
        supports, coeff_store = _encode_batch_fast(handle, Y, t0, tol)
    indices, coeffs = [], []
    for sel, cf in zip(supports, coeff_store):
        sel = np.asarray(sel, dtype=np.int64)
        rescaled = cf / handle.norms[sel] if sel.size else np.empty(0)
        indices.append(sel)
        coeffs.append(np.asarray(rescaled, dtype=np.float64))
    return SparseCode(d.n_kernels, d.n_vertices,
                      tuple(indices), tuple(coeffs), max_sparsity=t0)
