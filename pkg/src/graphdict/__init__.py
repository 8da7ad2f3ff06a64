"""Parametric dictionary learning for signals on weighted graphs.

Dictionaries are concatenations of polynomial matrix functions of the
normalized graph Laplacian; training alternates OMP sparse coding with a
constrained quadratic program over the kernel coefficients.
"""
from .errors import (
    BandOutOfRange,
    CoincidentVertices,
    DegenerateSpectrum,
    DisconnectedAfterRetries,
    DisconnectedGraph,
    EmptyCandidateSet,
    GraphDictError,
    InfeasibleInit,
    InfeasibleProblem,
    IsolatedVertex,
)
from .graphs import (
    LaplacianSpectrum,
    WeightedGraph,
    build_distance_graph,
    build_geometric_graph,
    laplacian_power_apply,
    normalized_laplacian,
    random_geometric_graph,
)
from .kernels import (
    FrameCertificate,
    KernelCoefficients,
    PolynomialDictionary,
    apply_adjoint,
    apply_dictionary,
    apply_gram,
    atom,
    atom_norms,
    dense_dictionary,
    eval_kernel,
    frame_bounds,
    kernel_matrix,
    normalize_atoms,
    subdictionary_dense,
)
from .qp import (
    QpSolution,
    QuadraticProgram,
    assemble_qp,
    projection_qp,
    solve_qp,
    spectral_constraint_rows,
    vandermonde,
)
from .sparse_coding import SparseCode, encode_batch, omp_encode
from .synthetic import (
    FOUR_BANDS,
    TWO_BANDS,
    GeneratingDictionary,
    SignalSpec,
    approximation_error,
    make_banded_generator,
    make_polynomial_generator,
    normalize_signals,
    synth_signals,
)
from .training import (
    TrainConfig,
    TrainTrace,
    default_ridge,
    initialize,
    kernel_snr,
    train,
)

__version__ = "0.1.0"
