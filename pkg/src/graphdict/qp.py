"""Dictionary-update quadratic program: assembly and an ADMM solver.

The fit term over the stacked kernel coefficients has Hessian blocks built
from traces of Laplacian powers against the code blocks, which equals the
literal per-entry vector enumeration but costs sparse mat-vecs instead.
Spectral constraints become affine rows through the Vandermonde matrix of
eigenvalue powers.

The solver is operator splitting (ADMM) over the inequality rows, with
internal row scaling to unit infinity-norm for conditioning and an
active-set polish step that pins the returned iterate to the exact KKT
system of the detected active constraints.
"""
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateSpectrum, InfeasibleProblem
from .graphs import LaplacianSpectrum
from .kernels import KernelCoefficients
from .sparse_coding import SparseCode


def vandermonde(eigenvalues, degree: int) -> np.ndarray:
    """N x (degree+1) matrix of eigenvalue powers, column k = lambda^k."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    return np.vander(lam, degree + 1, increasing=True)


def spectral_constraint_rows(eigenvalues, n_kernels, degree, c, eps1, eps2):
    """Affine inequality rows A x <= b for the kernel box and sum bounds.

    Stacked in order: +(I_S (x) B) <= c, -(I_S (x) B) <= 0,
    +(1^T (x) B) <= c+eps2, -(1^T (x) B) <= -(c-eps1).
    """
    bmat = vandermonde(eigenvalues, degree)
    n = bmat.shape[0]
    per_kernel = np.kron(np.eye(n_kernels), bmat)
    summed = np.kron(np.ones((1, n_kernels)), bmat)
    a = np.vstack([per_kernel, -per_kernel, summed, -summed])
    b = np.concatenate([
        np.full(n_kernels * n, float(c)),
        np.zeros(n_kernels * n),
        np.full(n, float(c + eps2)),
        np.full(n, -float(c - eps1)),
    ])
    return a, b


@dataclass(frozen=True, eq=False)
class QuadraticProgram:
    """min over x of 0.5 x^T Q x + q^T x + const subject to A_ineq x <= b_ineq.

    x stacks the kernel coefficient rows: entry s*(degree+1)+k multiplies
    lambda^k in kernel s. Q is symmetric PSD, strictly PD when ridge > 0.
    """

    Q: np.ndarray
    q: np.ndarray
    const: float
    A_ineq: np.ndarray
    b_ineq: np.ndarray
    n_kernels: int
    degree: int
    c: float
    eps1: float
    eps2: float

    @property
    def dim(self) -> int:
        return self.q.size

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=np.float64).ravel()
        return float(0.5 * x @ self.Q @ x + self.q @ x + self.const)

    def violation(self, x) -> float:
        """Worst inequality violation at x, in original row units."""
        return float(np.maximum(self.A_ineq @ x - self.b_ineq, 0.0).max(initial=0.0))

    def uniform_feasible_point(self) -> np.ndarray:
        """The flat-kernel point g_s = c/S, feasible whenever eps1, eps2 >= 0.

        Also the phase-1 consistency check: if this point violates the
        rows, the bound constants are inconsistent.
        """
        x = np.zeros(self.dim)
        x[::self.degree + 1] = self.c / self.n_kernels
        if self.violation(x) > 1e-9 * max(1.0, abs(self.c)):
            raise InfeasibleProblem(
                f"uniform kernels violate the constraint rows by "
                f"{self.violation(x):.3e}; bounds (c={self.c}, "
                f"eps1={self.eps1}, eps2={self.eps2}) are inconsistent"
            )
        return x


@dataclass(eq=False)
class QpSolution:
    """Solver output: the reshaped coefficients plus optimality evidence.

    kkt_residual is the max of (relative) primal infeasibility, dual
    infeasibility, and complementary slackness. state carries the splitting
    variables for warm starting the next outer iteration.
    """

    alpha: KernelCoefficients
    x: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool
    status: str
    state: tuple = field(default=None, repr=False)


def _code_blocks(code: SparseCode):
    x = code.to_matrix("csr")
    n = code.n_vertices
    out = []
    for s in range(code.n_kernels):
        blk = x[s * n:(s + 1) * n].tocoo()
        out.append((blk.row, blk.col, blk.data))
    return out


def assemble_qp(spectrum: LaplacianSpectrum, Y, code: SparseCode, mu,
                c, eps1, eps2, degree: int, n_kernels: int) -> QuadraticProgram:
    """Build the dictionary-update QP from the current sparse code.

    Hessian entry ((s,k),(s',k')) = 2 tr(X_{s'} X_s^T L^{k+k'}) + 2 mu on
    the diagonal; linear entry (s,k) = -2 tr(Y^T L^k X_s). Laplacian powers
    are applied to the code blocks by repeated sparse mat-vecs, never formed
    as dense N x N matrices.
    """
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if c <= 0:
        raise ValueError("c must be positive")
    if not 0 <= eps1 <= c:
        raise ValueError("eps1 must lie in [0, c]")
    if eps2 < 0:
        raise ValueError("eps2 must be nonnegative")
    Y = np.asarray(Y, dtype=np.float64)
    n = spectrum.n
    if Y.shape[0] != n:
        raise ValueError("Y rows must match the graph size")
    if code.n_kernels != n_kernels or code.n_vertices != n:
        raise ValueError("sparse code shape disagrees with (S, N)")

    distinct = np.unique(np.round(spectrum.eigenvalues, 10)).size
    if distinct < degree + 1:
        warnings.warn(
            f"only {distinct} distinct eigenvalues for degree {degree}; "
            "the Vandermonde constraint matrix is rank-deficient",
            DegenerateSpectrum,
        )

    blocks = _code_blocks(code)
    n_pow = 2 * degree + 1
    gram = np.zeros((n_kernels, n_kernels, n_pow))
    lin = np.zeros((n_kernels, degree + 1))
    for s2 in range(n_kernels):
        rows, cols, vals = blocks[s2]
        z = np.zeros((n, code.n_signals))
        z[rows, cols] = vals
        for p in range(n_pow):
            if p > 0:
                z = spectrum.lap @ z
            for s in range(n_kernels):
                r, cc, v = blocks[s]
                gram[s, s2, p] = float(np.dot(z[r, cc], v)) if v.size else 0.0
            if p <= degree:
                lin[s2, p] = float(np.vdot(Y, z))

    dim = n_kernels * (degree + 1)
    Q = np.empty((dim, dim))
    kk = np.add.outer(np.arange(degree + 1), np.arange(degree + 1))
    for s in range(n_kernels):
        for s2 in range(n_kernels):
            Q[s * (degree + 1):(s + 1) * (degree + 1),
              s2 * (degree + 1):(s2 + 1) * (degree + 1)] = 2.0 * gram[s, s2][kk]
    Q[np.diag_indices_from(Q)] += 2.0 * mu
    Q = 0.5 * (Q + Q.T)
    q = -2.0 * lin.ravel()
    a, b = spectral_constraint_rows(spectrum.eigenvalues, n_kernels, degree,
                                    c, eps1, eps2)
    return QuadraticProgram(Q, q, float(np.vdot(Y, Y)), a, b,
                            n_kernels, degree, float(c), float(eps1), float(eps2))


def projection_qp(eigenvalues, target: KernelCoefficients,
                  c, eps1, eps2) -> QuadraticProgram:
    """QP whose solution is the Euclidean projection of target onto the
    feasible kernel set: min ||x - target||^2 over the constraint rows."""
    t = target.flat()
    a, b = spectral_constraint_rows(eigenvalues, target.n_kernels,
                                    target.degree, c, eps1, eps2)
    return QuadraticProgram(2.0 * np.eye(t.size), -2.0 * t, float(t @ t),
                            a, b, target.n_kernels, target.degree,
                            float(c), float(eps1), float(eps2))


class _Equilibrated:
    """Ruiz row/column equilibration of the QP for the splitting solver.

    The solver iterates on x_s with x = d_col * x_s; constraint rows are
    scaled by d_row. The feasible set and optimum are unchanged, only the
    coordinates. Multipliers for the original rows are d_row * y_s.
    """

    def __init__(self, qp: QuadraticProgram, sweeps: int = 10):
        a = qp.A_ineq
        rows, dim = a.shape
        d_row = np.ones(rows)
        d_col = np.ones(dim)
        for _ in range(sweeps):
            scaled = np.abs(a) * d_row[:, None] * d_col[None, :]
            r = np.sqrt(np.maximum(scaled.max(axis=1), 1e-12))
            c = np.sqrt(np.maximum(scaled.max(axis=0), 1e-12))
            d_row /= r
            d_col /= c
        self.qp = qp
        self.d_row = d_row
        self.d_col = d_col
        self.A = a * d_row[:, None] * d_col[None, :]
        self.b = qp.b_ineq * d_row
        self.Q = qp.Q * d_col[:, None] * d_col[None, :]
        self.q = qp.q * d_col

    def x_orig(self, x_s):
        return self.d_col * x_s

    def x_scaled(self, x):
        return x / self.d_col

    def y_orig(self, y_s):
        return self.d_row * y_s


def _kkt_residual(eq: _Equilibrated, x, y_s):
    """Relative KKT measure: primal, stationarity, slackness, dual sign.

    x is in original coordinates; y_s carries scaled-row multipliers.
    """
    qp = eq.qp
    y = eq.y_orig(y_s)
    slack = qp.A_ineq @ x - qp.b_ineq
    prim = max(0.0, slack.max(initial=0.0)) / max(1.0, np.abs(qp.b_ineq).max())
    grad = qp.Q @ x + qp.q
    aty = qp.A_ineq.T @ y
    stat_scale = max(1.0, np.abs(grad).max(initial=0.0),
                     np.abs(aty).max(initial=0.0))
    stat = np.abs(grad + aty).max() / stat_scale
    slack_s = eq.A @ eq.x_scaled(x) - eq.b
    comp_scale = max(1.0, np.abs(y_s).max(initial=0.0))
    comp = np.abs(y_s * slack_s).max(initial=0.0) / comp_scale
    dual = max(0.0, -y.min(initial=0.0)) / max(1.0, np.abs(y).max(initial=0.0))
    return float(max(prim, stat, comp, dual))


def _polish(eq: _Equilibrated, x, y_s, tol):
    """Solve the equality KKT system on the detected active set.

    Works in the equilibrated coordinates; validation (feasibility and
    objective) happens on the original problem. Returns (x, y_s, True) with
    x in original coordinates when the polished point is primal and dual
    feasible; otherwise reports failure and the inputs stand.
    """
    qp = eq.qp
    x_s = eq.x_scaled(x)
    slack = eq.b - eq.A @ x_s
    act = np.flatnonzero((y_s > 1e-8) | (slack < 1e-7))
    dim = qp.dim
    if act.size == 0:
        try:
            xs_new = np.linalg.solve(eq.Q, -eq.q)
        except np.linalg.LinAlgError:
            return x, y_s, False
        x_new = eq.x_orig(xs_new)
        feas = qp.violation(x_new) <= tol * max(1.0, np.abs(qp.b_ineq).max())
        if feas:
            return x_new, np.zeros_like(y_s), True
        return x, y_s, False
    a_act = eq.A[act]
    reg = 1e-9
    kkt = np.block([
        [eq.Q, a_act.T],
        [a_act, -reg * np.eye(act.size)],
    ])
    rhs = np.concatenate([-eq.q, eq.b[act]])
    try:
        lu, piv = scipy.linalg.lu_factor(kkt)
    except (np.linalg.LinAlgError, ValueError):
        return x, y_s, False
    sol = scipy.linalg.lu_solve((lu, piv), rhs)
    # two refinement sweeps against the unregularized system
    for _ in range(2):
        res = np.concatenate([
            eq.Q @ sol[:dim] + a_act.T @ sol[dim:] + eq.q,
            a_act @ sol[:dim] - eq.b[act],
        ])
        sol -= scipy.linalg.lu_solve((lu, piv), res)
    x_new = eq.x_orig(sol[:dim])
    nu = sol[dim:]
    y_new = np.zeros_like(y_s)
    y_new[act] = nu
    # KKT sufficiency: primal + dual feasibility (stationarity and
    # slackness hold by construction of the equality solve)
    dual_ok = nu.min(initial=0.0) >= -1e-7 * max(1.0, np.abs(nu).max(initial=0.0))
    prim_ok = (qp.violation(x_new)
               <= 1e-8 * max(1.0, np.abs(qp.b_ineq).max()))
    if dual_ok and prim_ok:
        return x_new, np.maximum(y_new, 0.0), True
    return x, y_s, False


def solve_qp(qp: QuadraticProgram, tol: float = 1e-8,
             max_iter: int = 20000, warm_start=None) -> QpSolution:
    """ADMM over the inequality rows, then an active-set polish.

    warm_start may be a previous QpSolution.state. On hitting max_iter the
    best iterate comes back with converged=False and its residual.
    """
    feasible0 = qp.uniform_feasible_point()
    eq = _Equilibrated(qp)
    n_rows = eq.b.size

    if warm_start is not None:
        x, z, u, rho = warm_start
        xs = eq.x_scaled(x)
        z, u = z.copy(), u.copy()
    else:
        xs = eq.x_scaled(feasible0)
        z = np.minimum(eq.A @ xs, eq.b)
        u = np.zeros(n_rows)
        rho = 1.0

    def factor(rho_val):
        m = eq.Q + rho_val * (eq.A.T @ eq.A)
        try:
            return scipy.linalg.cho_factor(m)
        except np.linalg.LinAlgError:
            m = m + 1e-12 * np.trace(m) / qp.dim * np.eye(qp.dim)
            return scipy.linalg.cho_factor(m)

    chol = factor(rho)
    check_every = 25
    polish_every = 500
    kkt = np.inf
    it = 0
    done = False
    for it in range(1, max_iter + 1):
        xs = scipy.linalg.cho_solve(chol, -eq.q + rho * (eq.A.T @ (z - u)))
        ax = eq.A @ xs
        z_prev = z
        z = np.minimum(ax + u, eq.b)
        u = u + ax - z
        if it % polish_every == 0:
            x_pol, y_pol, polished = _polish(eq, eq.x_orig(xs), rho * u, tol)
            if polished:
                kkt_pol = _kkt_residual(eq, x_pol, y_pol)
                if kkt_pol <= tol:
                    xs, kkt, done = eq.x_scaled(x_pol), kkt_pol, True
                    break
        if it % check_every == 0 or it == max_iter:
            kkt = _kkt_residual(eq, eq.x_orig(xs), rho * u)
            if kkt <= tol:
                break
            r_prim = np.abs(ax - z).max(initial=0.0)
            r_dual = rho * np.abs(eq.A.T @ (z - z_prev)).max(initial=0.0)
            if r_prim > 10.0 * r_dual and rho < 1e6:
                rho *= 5.0
                u /= 5.0
                chol = factor(rho)
            elif r_dual > 10.0 * r_prim and rho > 1e-6:
                rho /= 5.0
                u *= 5.0
                chol = factor(rho)

    x = eq.x_orig(xs)
    if not done:
        x_pol, y_pol, polished = _polish(eq, x, rho * u, tol)
        if polished:
            kkt_pol = _kkt_residual(eq, x_pol, y_pol)
            if kkt_pol <= kkt:
                x, kkt = x_pol, kkt_pol
    converged = kkt <= tol
    alpha = KernelCoefficients.from_flat(x, qp.n_kernels, qp.degree)
    return QpSolution(
        alpha=alpha,
        x=x,
        objective=qp.objective(x),
        kkt_residual=kkt,
        iterations=it,
        converged=converged,
        status="converged" if converged else "not_converged",
        state=(x.copy(), z.copy(), u.copy(), rho),
    )


QP_DUMP_MAX_DIM = 256
QP_DUMP_MAX_ROWS = 4096


def dump_qp(qp: QuadraticProgram, path):
    """Write the dense QP to JSON for debugging; small instances only."""
    if qp.dim > QP_DUMP_MAX_DIM or qp.b_ineq.size > QP_DUMP_MAX_ROWS:
        raise ValueError(
            f"QP too large to dump ({qp.dim} vars, {qp.b_ineq.size} rows)"
        )
    payload = {
        "Q": qp.Q.tolist(),
        "q": qp.q.tolist(),
        "const": qp.const,
        "A_ineq": qp.A_ineq.tolist(),
        "b_ineq": qp.b_ineq.tolist(),
        "S": qp.n_kernels,
        "K": qp.degree,
        "c": qp.c,
        "eps1": qp.eps1,
        "eps2": qp.eps2,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
