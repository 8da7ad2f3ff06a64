"""Independent reference computations used by unit and acceptance tests.

These deliberately avoid the library's production code paths: dense matrix
powers instead of sparse recurrences, literal per-entry enumeration instead
of trace accumulation, exhaustive search instead of the ADMM solver.
"""
import numpy as np

import graphdict as gd
from graphdict.synthetic import _reconstruct


def random_sparse_code(rng, n_kernels, n, m, t0):
    indices, coeffs = [], []
    for _ in range(m):
        t = int(rng.integers(1, t0 + 1))
        indices.append(rng.choice(n_kernels * n, size=t, replace=False))
        coeffs.append(rng.standard_normal(t))
    return gd.SparseCode(n_kernels, n, tuple(indices), tuple(coeffs),
                         max_sparsity=t0)


def exact_fit_qp_instance(spectrum, seed, n_kernels, degree,
                          min_curvature=0.05):
    """Seeded dictionary-update QP whose optimum sits near the interior.

    Signals are exact sparse combinations of a strictly feasible kernel
    set, the code is regenerated until the fit Hessian is well conditioned,
    and the ridge is small, so the minimizer stays close to the generating
    point instead of a narrow constraint vertex (where an axis-aligned
    grid oracle cannot resolve it). Returns (qp, generating kernels) or
    None when the curvature check fails for this seed.
    """
    rng = np.random.default_rng(seed)
    c, e1, e2 = 1.0, 0.4, 0.4
    shape = (n_kernels, degree + 1)
    draw = gd.KernelCoefficients(rng.standard_normal(shape) * 0.4)
    proj = gd.solve_qp(
        gd.projection_qp(spectrum.eigenvalues, draw, c, e1, e2), tol=1e-10
    ).alpha
    uniform = np.zeros(shape)
    uniform[:, 0] = c / n_kernels
    center = gd.KernelCoefficients(0.6 * proj.alpha + 0.4 * uniform)
    d = gd.PolynomialDictionary(center, spectrum, (c, e1, e2))
    m = int(rng.integers(2, 5))
    code = random_sparse_code(rng, n_kernels, spectrum.n, m, t0=3)
    Y = _reconstruct(d, code)
    mu = float(rng.uniform(1e-3, 1e-2))
    qp = gd.assemble_qp(spectrum, Y, code, mu, c, e1, e2, degree, n_kernels)
    if np.linalg.eigvalsh(qp.Q).min() < min_curvature:
        return None
    return qp, center


def pnm_qp_oracle(spectrum, Y, X_dense, mu, n_kernels, degree):
    """(Q, q, const) by literal enumeration of the per-entry vectors.

    X_dense is the SN x M coefficient matrix. Laplacian powers are formed
    densely with matrix_power; every (n, m) cell contributes its stacked
    vector of (L^k X_s)_{nm} entries.
    """
    n = spectrum.n
    m_count = Y.shape[1]
    dense_l = spectrum.lap.toarray()
    powers = [np.linalg.matrix_power(dense_l, k) for k in range(degree + 1)]
    dim = n_kernels * (degree + 1)
    acc = np.zeros((dim, dim))
    lin = np.zeros(dim)
    blocks = [X_dense[s * n:(s + 1) * n] for s in range(n_kernels)]
    for row in range(n):
        for col in range(m_count):
            p_vec = np.concatenate([
                np.array([(powers[k][row] @ blocks[s][:, col])
                          for k in range(degree + 1)])
                for s in range(n_kernels)
            ])
            acc += np.outer(p_vec, p_vec)
            lin += Y[row, col] * p_vec
    Q = 2.0 * (acc + mu * np.eye(dim))
    q = -2.0 * lin
    return Q, q, float((Y ** 2).sum())


def objective_on_points(qp, points):
    """Vectorized 0.5 x^T Q x + q^T x + const over rows of points."""
    quad = 0.5 * np.einsum("ij,jk,ik->i", points, qp.Q, points)
    return quad + points @ qp.q + qp.const


def kkt_enumeration_qp(qp, max_active=None, feas_tol=1e-9, dual_tol=1e-9):
    """Exact QP optimum by exhaustive active-set enumeration.

    Solves the equality KKT system for every subset of constraint rows up
    to size max_active (default: the variable count), keeps candidates that
    are primal feasible with nonnegative multipliers, and returns the best.
    Practical for small dimensions only.
    """
    from itertools import combinations

    dim = qp.dim
    if max_active is None:
        max_active = dim
    rows = qp.A_ineq.shape[0]
    best_x, best_f = None, np.inf
    scale = max(1.0, np.abs(qp.b_ineq).max())
    for size in range(max_active + 1):
        for subset in combinations(range(rows), size):
            idx = list(subset)
            a_act = qp.A_ineq[idx]
            kkt = np.block([
                [qp.Q, a_act.T],
                [a_act, np.zeros((size, size))],
            ]) if size else qp.Q
            rhs = np.concatenate([-qp.q, qp.b_ineq[idx]]) if size else -qp.q
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            x = sol[:dim]
            nu = sol[dim:]
            if size and nu.min(initial=0.0) < -dual_tol:
                continue
            if np.max(qp.A_ineq @ x - qp.b_ineq, initial=0.0) > feas_tol * scale:
                continue
            f = qp.objective(x)
            if f < best_f:
                best_f, best_x = f, x.copy()
    return best_x, best_f


def grid_search_qp(qp, span=4.0, points=9, target_step=5e-8, max_levels=60,
                   feas_slack=1e-9):
    """Multilevel exhaustive grid minimization over the feasible box.

    Starts from a box of the given span centered on the uniform feasible
    point, keeps only grid points satisfying the inequalities, and zooms on
    the best one. Each new box spans four grid steps of the previous level
    (two cells of margin around the incumbent), and levels continue until
    the step falls below target_step, so constrained optima are approached
    to sub-tolerance resolution even along active faces.

    Returns (x, objective, history of per-level best values).
    """
    center = qp.uniform_feasible_point()
    dim = center.size
    width = float(span)
    best_x = center.copy()
    best_f = qp.objective(center)
    history = []
    for _ in range(max_levels):
        axes = [np.linspace(center[d] - width / 2.0, center[d] + width / 2.0,
                            points) for d in range(dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        cand = np.stack([m.ravel() for m in mesh], axis=1)
        feas = np.all(qp.A_ineq @ cand.T <= qp.b_ineq[:, None] + feas_slack,
                      axis=0)
        cand = cand[feas]
        step = width / (points - 1)
        if cand.shape[0] > 0:
            vals = objective_on_points(qp, cand)
            pos = int(np.argmin(vals))
            if vals[pos] < best_f:
                best_f = float(vals[pos])
                best_x = cand[pos].copy()
        center = best_x.copy()
        width = 4.0 * step
        history.append(best_f)
        if step < target_step:
            break
    return best_x, best_f, history
