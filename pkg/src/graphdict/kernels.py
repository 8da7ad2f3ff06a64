"""Polynomial spectral kernels and the structured dictionary they generate.

A dictionary is a concatenation of S subdictionaries, each a degree-K
polynomial of the normalized Laplacian. Row s of the coefficient matrix
holds the polynomial for subdictionary s, so the whole dictionary is
determined by S*(K+1) numbers plus the graph.

Dense materialization goes through the eigendecomposition and is the
debugging/oracle path; the production operators below use sparse mat-vec
recurrences only.
"""
from dataclasses import dataclass

import numpy as np

from .graphs import LaplacianSpectrum

ZERO_ATOM_NORM = 1e-12


@dataclass(frozen=True, eq=False)
class KernelCoefficients:
    """Polynomial coefficients for S spectral kernels of degree K.

    alpha[s, k] multiplies lambda^k in kernel s.
    """

    alpha: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.alpha, dtype=np.float64))
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("alpha must be a nonempty S x (K+1) matrix")
        if not np.all(np.isfinite(a)):
            raise ValueError("alpha entries must be finite")
        object.__setattr__(self, "alpha", a)

    @property
    def n_kernels(self) -> int:
        return self.alpha.shape[0]

    @property
    def degree(self) -> int:
        return self.alpha.shape[1] - 1

    def flat(self) -> np.ndarray:
        """Row-major flattening [kernel 0 coeffs; kernel 1 coeffs; ...]."""
        return self.alpha.ravel().copy()

    @staticmethod
    def from_flat(vec, n_kernels, degree) -> "KernelCoefficients":
        return KernelCoefficients(
            np.asarray(vec, dtype=np.float64).reshape(n_kernels, degree + 1)
        )


def eval_kernel(kc: KernelCoefficients, s: int, lam: float) -> float:
    """Kernel s evaluated at a single eigenvalue, by Horner's rule."""
    row = kc.alpha[s]
    acc = 0.0
    for a in row[::-1]:
        acc = acc * lam + a
    return float(acc)


def kernel_matrix(kc: KernelCoefficients, lambdas) -> np.ndarray:
    """All kernels on a grid of eigenvalues; shape (len(lambdas), S)."""
    lam = np.asarray(lambdas, dtype=np.float64)
    acc = np.zeros((lam.size, kc.n_kernels))
    for k in range(kc.degree, -1, -1):
        acc = acc * lam[:, None] + kc.alpha[:, k][None, :]
    return acc


@dataclass(frozen=True, eq=False)
class FrameCertificate:
    """Frame bounds of the dictionary on the discrete spectrum.

    lower/upper are the exact min/max over sigma(L) of sum_s g_s(lambda)^2;
    analytic_lower/analytic_upper are the looser constants implied by the
    spectral constraint box, (c-eps1)^2/S and (c+eps2)^2.
    """

    lower: float
    upper: float
    analytic_lower: float
    analytic_upper: float


@dataclass(frozen=True, eq=False)
class PolynomialDictionary:
    """Kernel coefficients bound to a graph spectrum.

    bounds = (c, eps1, eps2) are the constraint constants the kernels were
    (or will be) trained under. Feasibility is checkable, not enforced.
    """

    kernels: KernelCoefficients
    spectrum: LaplacianSpectrum
    bounds: tuple = (1.0, 0.01, 0.01)

    @property
    def n_vertices(self) -> int:
        return self.spectrum.n

    @property
    def n_kernels(self) -> int:
        return self.kernels.n_kernels

    @property
    def n_atoms(self) -> int:
        return self.n_kernels * self.n_vertices

    def kernel_values(self) -> np.ndarray:
        """Kernels sampled on sigma(L); shape (N, S)."""
        return kernel_matrix(self.kernels, self.spectrum.eigenvalues)

    def feasibility_violation(self) -> float:
        """Worst violation of the spectral constraints over sigma(L).

        Zero (up to roundoff) means the kernels satisfy
        0 <= g_s(lambda) <= c and c-eps1 <= sum_s g_s(lambda) <= c+eps2
        at every eigenvalue.
        """
        c, eps1, eps2 = self.bounds
        vals = self.kernel_values()
        sums = vals.sum(axis=1)
        worst = max(
            float(np.max(-vals, initial=0.0)),
            float(np.max(vals - c, initial=0.0)),
            float(np.max((c - eps1) - sums, initial=0.0)),
            float(np.max(sums - (c + eps2), initial=0.0)),
        )
        return max(worst, 0.0)

    def is_feasible(self, tol: float = 1e-6) -> bool:
        return self.feasibility_violation() <= tol


def subdictionary_dense(d: PolynomialDictionary, s: int) -> np.ndarray:
    """Dense N x N subdictionary chi g_s(Lambda) chi^T (oracle path)."""
    chi = d.spectrum.eigenvectors
    g = kernel_matrix(d.kernels, d.spectrum.eigenvalues)[:, s]
    return (chi * g) @ chi.T


def dense_dictionary(d: PolynomialDictionary) -> np.ndarray:
    """All subdictionaries concatenated column-wise, N x SN."""
    return np.hstack([subdictionary_dense(d, s) for s in range(d.n_kernels)])


def _laplacian_krylov(spec: LaplacianSpectrum, y: np.ndarray,
                      degree: int) -> np.ndarray:
    """Stack [y, Ly, ..., L^degree y] as rows; degree sparse mat-vecs."""
    powers = np.empty((degree + 1, y.shape[0]))
    powers[0] = y
    for k in range(1, degree + 1):
        powers[k] = spec.lap @ powers[k - 1]
    return powers


def atom(d: PolynomialDictionary, s: int, n: int) -> np.ndarray:
    """Column n of subdictionary s, via K sparse mat-vecs on a delta.

    The result is exactly zero at vertices more than K hops from n: each
    mat-vec spreads support by one hop only.
    """
    if not 0 <= s < d.n_kernels:
        raise IndexError(f"kernel index {s} out of range")
    if not 0 <= n < d.n_vertices:
        raise IndexError(f"vertex index {n} out of range")
    delta = np.zeros(d.n_vertices)
    delta[n] = 1.0
    powers = _laplacian_krylov(d.spectrum, delta, d.kernels.degree)
    return d.kernels.alpha[s] @ powers


def apply_dictionary(d: PolynomialDictionary, x: np.ndarray) -> np.ndarray:
    """D x for a stacked coefficient vector x of length S*N.

    Block s of x multiplies subdictionary s; each block is applied by a
    Horner recurrence in L, so the cost is O(S K |E| + N S K).
    """
    x = np.asarray(x, dtype=np.float64)
    S, N, K = d.n_kernels, d.n_vertices, d.kernels.degree
    if x.shape[0] != S * N:
        raise ValueError(f"expected length {S * N}, got {x.shape[0]}")
    out = np.zeros(N)
    for s in range(S):
        xs = x[s * N:(s + 1) * N]
        acc = d.kernels.alpha[s, K] * xs
        for k in range(K - 1, -1, -1):
            acc = d.spectrum.lap @ acc + d.kernels.alpha[s, k] * xs
        out += acc
    return out


def apply_adjoint(d: PolynomialDictionary, y: np.ndarray) -> np.ndarray:
    """D^T y, length S*N; block s equals g_s(L) y.

    The Krylov stack {L^k y} is computed once and shared across the S
    blocks: O(K |E| + N S K) total.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] != d.n_vertices:
        raise ValueError(f"expected length {d.n_vertices}, got {y.shape[0]}")
    powers = _laplacian_krylov(d.spectrum, y, d.kernels.degree)
    return (d.kernels.alpha @ powers).ravel()


def gram_kernel_coefficients(kc: KernelCoefficients) -> np.ndarray:
    """Coefficients of sum_s g_s(lambda)^2, a degree-2K polynomial."""
    out = np.zeros(2 * kc.degree + 1)
    for row in kc.alpha:
        out += np.convolve(row, row)
    return out


def apply_gram(d: PolynomialDictionary, y: np.ndarray) -> np.ndarray:
    """D D^T y evaluated as the single degree-2K polynomial sum_s g_s^2(L)."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] != d.n_vertices:
        raise ValueError(f"expected length {d.n_vertices}, got {y.shape[0]}")
    coeffs = gram_kernel_coefficients(d.kernels)
    acc = coeffs[-1] * y
    for k in range(coeffs.size - 2, -1, -1):
        acc = d.spectrum.lap @ acc + coeffs[k] * y
    return acc


def frame_bounds(d: PolynomialDictionary) -> FrameCertificate:
    """Exact frame bounds on sigma(L) plus the analytic constraint bounds."""
    c, eps1, eps2 = d.bounds
    sq = (d.kernel_values() ** 2).sum(axis=1)
    return FrameCertificate(
        lower=float(sq.min()),
        upper=float(sq.max()),
        analytic_lower=(c - eps1) ** 2 / d.n_kernels,
        analytic_upper=(c + eps2) ** 2,
    )


def atom_norms(d: PolynomialDictionary) -> np.ndarray:
    """2-norms of all S*N atoms without materializing the dictionary.

    norm^2 of atom (s, n) is sum_l g_s(lambda_l)^2 chi_l(n)^2, the diagonal
    of g_s^2(L).
    """
    chi_sq = d.spectrum.eigenvectors ** 2
    g_sq = d.kernel_values() ** 2
    per_block = chi_sq @ g_sq  # (N vertices, S kernels)
    return np.sqrt(np.maximum(per_block.T.ravel(), 0.0))


def normalize_atoms(d: PolynomialDictionary):
    """Column-normalized dense dictionary and the norms used for it.

    Columns whose norm falls below 1e-12 are flagged by a zero entry in the
    returned norms and left as (numerically) zero columns; callers exclude
    them from sparse-coding candidates instead of treating them as errors.
    """
    dense = dense_dictionary(d)
    norms = np.linalg.norm(dense, axis=0)
    flagged = norms < ZERO_ATOM_NORM
    safe = np.where(flagged, 1.0, norms)
    normalized = dense / safe
    normalized[:, flagged] = 0.0
    norms = np.where(flagged, 0.0, norms)
    return normalized, norms
