"""Exception and warning types shared across the package."""


class GraphDictError(Exception):
    """Base class for all graphdict errors."""


class DisconnectedAfterRetries(GraphDictError):
    """No connected geometric graph was found within the retry budget."""


class DisconnectedGraph(GraphDictError):
    """The constructed graph is not connected."""


class CoincidentVertices(GraphDictError):
    """Two vertices share a coordinate, so 1/distance weights are undefined."""


class IsolatedVertex(GraphDictError):
    """A vertex has zero degree; the normalized Laplacian does not exist."""


class EmptyCandidateSet(GraphDictError):
    """Every dictionary atom was zero-flagged; nothing to select from."""


class InfeasibleProblem(GraphDictError):
    """The QP constraint set is empty (inconsistent bound constants)."""


class InfeasibleInit(GraphDictError):
    """A from-file initialization violates the spectral constraints."""


class BandOutOfRange(GraphDictError):
    """A spectral band references eigenvalue indices outside [0, N-1]."""


class DegenerateSpectrum(UserWarning):
    """Repeated eigenvalues make the spectral constraint matrix rank-deficient.

    Informational only: duplicate constraint rows are harmless.
    """
