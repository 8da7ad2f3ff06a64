"""Synthetic corpora: generating dictionaries, signal draws, noise models.

Two generator families: a feasible random polynomial kernel set (the
idealized case the learner can represent exactly) and a bank of atoms with
random spectral masks confined to eigenvalue bands (deliberately outside
the polynomial model).
"""
from dataclasses import dataclass

import numpy as np

from .errors import BandOutOfRange
from .graphs import LaplacianSpectrum
from .kernels import (
    KernelCoefficients,
    PolynomialDictionary,
    dense_dictionary,
)
from .qp import projection_qp, solve_qp
from .sparse_coding import encode_batch

# Eigenvalue-index bands of the two synthetic band experiments (N = 100).
FOUR_BANDS = (
    tuple(range(0, 25)),
    tuple(range(25, 40)) + tuple(range(90, 100)),
    tuple(range(40, 65)),
    tuple(range(65, 90)),
)
TWO_BANDS = (
    tuple(range(0, 10)),
    tuple(range(89, 100)),
)

COEFF_DISTS = ("normal", "uniform", "unit")


@dataclass(frozen=True, eq=False)
class GeneratingDictionary:
    """Ground-truth atom source for synthetic signals.

    kind "polynomial" carries kernel coefficients (atoms are the columns of
    the induced dictionary); kind "banded-random" carries explicit atoms
    with per-atom spectral masks and center vertices.
    """

    kind: str
    atoms: np.ndarray
    kernels: KernelCoefficients | None = None
    masks: np.ndarray | None = None
    centers: np.ndarray | None = None
    bands: tuple | None = None

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[1]


def _bump_targets(rng, lambdas, n_kernels, c):
    """Random smooth positive bumps over the spectrum, normalized to sum c.

    Each kernel gets a Gaussian profile with a random center and width;
    dividing by the pointwise total makes the set partition the constant c.
    Heights follow a fixed geometric ladder (shuffled, lightly jittered) so
    every pair of kernels ends up at clearly separated levels: same-level
    kernels are nearly interchangeable in the training data, which makes
    recovery ill-posed rather than merely hard.
    """
    lam_max = max(float(lambdas[-1]), 1e-12)
    centers = rng.permutation(
        np.linspace(0.0, lam_max, n_kernels)
        + rng.uniform(-0.15, 0.15, n_kernels) * lam_max
    )
    widths = rng.uniform(0.3, 0.6, n_kernels) * lam_max
    ladder = 0.55 ** np.arange(n_kernels)
    heights = rng.permutation(ladder) * rng.uniform(0.85, 1.15, n_kernels)
    bumps = heights * np.exp(
        -((lambdas[:, None] - centers[None, :]) ** 2)
        / (2.0 * widths[None, :] ** 2)
    )
    return c * bumps / bumps.sum(axis=1, keepdims=True)


def make_polynomial_generator(spectrum: LaplacianSpectrum, seed: int,
                              n_kernels: int = 4, degree: int = 5,
                              c: float = 1.0, eps1: float = 0.01,
                              eps2: float = 0.01) -> GeneratingDictionary:
    """Seeded feasible polynomial kernels and their atom matrix.

    A random draw of smooth bump profiles over the spectrum is projected
    onto the feasible polynomial set by the constrained least-squares QP
    min ||B alpha - targets||^2, which guarantees feasibility and yields
    distinct kernels covering different spectral regions.
    """
    rng = np.random.default_rng(seed)
    from .qp import QuadraticProgram, spectral_constraint_rows, vandermonde

    targets = _bump_targets(rng, spectrum.eigenvalues, n_kernels, c)
    bmat = vandermonde(spectrum.eigenvalues, degree)
    dim = n_kernels * (degree + 1)
    # block-diagonal least squares toward the targets, one block per kernel
    q_blocks = 2.0 * (bmat.T @ bmat)
    Q = np.kron(np.eye(n_kernels), q_blocks)
    q = -2.0 * (bmat.T @ targets).T.ravel()
    const = float((targets ** 2).sum())
    a, b = spectral_constraint_rows(spectrum.eigenvalues, n_kernels, degree,
                                    c, eps1, eps2)
    qp = QuadraticProgram(Q + 1e-9 * np.eye(dim), q, const, a, b,
                          n_kernels, degree, c, eps1, eps2)
    kc = solve_qp(qp, tol=1e-9).alpha
    d = PolynomialDictionary(kc, spectrum, (c, eps1, eps2))
    return GeneratingDictionary(
        kind="polynomial", atoms=dense_dictionary(d), kernels=kc
    )


def make_banded_generator(spectrum: LaplacianSpectrum, bands, n_atoms: int,
                          seed: int) -> GeneratingDictionary:
    """Atoms with uniform[0,1] spectral masks confined to one band each.

    Per atom: pick a band uniformly, fill its eigenvalue indices with
    uniform draws, zero elsewhere, and center the resulting operator on a
    uniformly chosen vertex.
    """
    if n_atoms < 1:
        raise ValueError("need at least one atom")
    n = spectrum.n
    bands = tuple(tuple(int(i) for i in band) for band in bands)
    for band in bands:
        if not band:
            raise BandOutOfRange("empty band")
        if min(band) < 0 or max(band) >= n:
            raise BandOutOfRange(
                f"band indices {min(band)}..{max(band)} outside [0, {n - 1}]"
            )
    rng = np.random.default_rng(seed)
    chi = spectrum.eigenvectors
    masks = np.zeros((n_atoms, n))
    centers = np.empty(n_atoms, dtype=np.int64)
    atoms = np.empty((n, n_atoms))
    for j in range(n_atoms):
        band = bands[rng.integers(len(bands))]
        masks[j, list(band)] = rng.uniform(size=len(band))
        centers[j] = rng.integers(n)
        # chi h(Lambda) chi^T delta_n with the mask as h's diagonal
        atoms[:, j] = chi @ (masks[j] * chi[centers[j], :])
    return GeneratingDictionary(
        kind="banded-random", atoms=atoms, masks=masks,
        centers=centers, bands=bands,
    )


@dataclass(frozen=True)
class SignalSpec:
    """How to draw a signal matrix from a generating dictionary.

    noise_sigma is a standard deviation by default; set
    noise_sigma_is_variance when the configured number is a variance.
    """

    n_signals: int
    max_sparsity: int = 4
    coeff_dist: str = "normal"
    noise_sigma: float = 0.0
    noise_sigma_is_variance: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.n_signals < 1 or self.max_sparsity < 1:
            raise ValueError("n_signals and max_sparsity must be >= 1")
        if self.coeff_dist not in COEFF_DISTS:
            raise ValueError(f"coeff_dist must be one of {COEFF_DISTS}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


def synth_signals(gen: GeneratingDictionary, spec: SignalSpec) -> np.ndarray:
    """N x M signal matrix: random sparse atom combinations plus noise.

    Each signal combines t atoms, t uniform on {1..max_sparsity}, atoms
    distinct uniform, coefficients per spec.coeff_dist. Bit-for-bit
    reproducible from (gen, spec).
    """
    rng = np.random.default_rng(spec.seed)
    n = gen.atoms.shape[0]
    out = np.zeros((n, spec.n_signals))
    for m in range(spec.n_signals):
        t = int(rng.integers(1, spec.max_sparsity + 1))
        idx = rng.choice(gen.n_atoms, size=t, replace=False)
        if spec.coeff_dist == "normal":
            coeff = rng.standard_normal(t)
        elif spec.coeff_dist == "uniform":
            coeff = rng.uniform(-1.0, 1.0, size=t)
        else:
            coeff = np.ones(t)
        out[:, m] = gen.atoms[:, idx] @ coeff
    if spec.noise_sigma > 0:
        sigma = (np.sqrt(spec.noise_sigma) if spec.noise_sigma_is_variance
                 else spec.noise_sigma)
        out += sigma * rng.standard_normal(out.shape)
    return out


def normalize_signals(Y) -> np.ndarray:
    """Scale all columns by the largest column 2-norm.

    The maximum-energy signal ends up with unit norm; relative energies are
    preserved. This is the ingestion convention for real datasets.
    """
    Y = np.asarray(Y, dtype=np.float64)
    top = np.linalg.norm(Y, axis=0).max()
    if top == 0:
        return Y.copy()
    return Y / top


def approximation_error(d: PolynomialDictionary, Y_test, sparsity_grid,
                        tol: float = 1e-12) -> np.ndarray:
    """Mean squared residual per sparsity level: ||Y - D X||_F^2 / M."""
    Y_test = np.asarray(Y_test, dtype=np.float64)
    m = Y_test.shape[1]
    errors = np.empty(len(sparsity_grid))
    for pos, t0 in enumerate(sparsity_grid):
        code = encode_batch(d, Y_test, int(t0), tol=tol)
        recon = _reconstruct(d, code)
        errors[pos] = float(((Y_test - recon) ** 2).sum()) / m
    return errors


def _reconstruct(d: PolynomialDictionary, code) -> np.ndarray:
    """D X for a whole code matrix via the per-block Horner recurrence."""
    x = code.to_matrix("csr")
    n, deg = d.n_vertices, d.kernels.degree
    out = np.zeros((n, code.n_signals))
    for s in range(d.n_kernels):
        xs = np.asarray(x[s * n:(s + 1) * n].todense())
        acc = d.kernels.alpha[s, deg] * xs
        for k in range(deg - 1, -1, -1):
            acc = d.spectrum.lap @ acc + d.kernels.alpha[s, k] * xs
        out += acc
    return out
