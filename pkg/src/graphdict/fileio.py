"""On-disk formats: CSV edge lists, signal matrices, kernel JSON, traces.

All numeric CSV output uses 17 significant digits so float64 round-trips
are lossless.
"""
import json
import os

import numpy as np

from .graphs import WeightedGraph
from .kernels import KernelCoefficients

FLOAT_FMT = "%.17g"


def _fmt(x: float) -> str:
    return FLOAT_FMT % x


def write_graph_csv(g: WeightedGraph, path):
    """Edge list with header i,j,w; 0-based vertex indices."""
    with open(path, "w") as fh:
        fh.write("i,j,w\n")
        for i, j, w in zip(g.edge_i, g.edge_j, g.edge_w):
            fh.write(f"{int(i)},{int(j)},{_fmt(w)}\n")


def read_graph_csv(path, n_vertices=None, coords=None) -> WeightedGraph:
    data = np.genfromtxt(path, delimiter=",", names=True, dtype=None,
                         encoding="utf-8", ndmin=1)
    i = np.atleast_1d(data["i"]).astype(np.int64)
    j = np.atleast_1d(data["j"]).astype(np.int64)
    w = np.atleast_1d(data["w"]).astype(np.float64)
    if n_vertices is None:
        if coords is not None:
            n_vertices = len(coords)
        else:
            n_vertices = int(max(i.max(), j.max())) + 1 if i.size else 1
    return WeightedGraph(n_vertices, i, j, w, coords=coords)


def write_coords_csv(coords, path):
    """Per-vertex coordinates with header x,y."""
    with open(path, "w") as fh:
        fh.write("x,y\n")
        for row in np.asarray(coords):
            fh.write(",".join(_fmt(v) for v in row[:2]) + "\n")


def read_coords_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def write_signals_csv(Y, path):
    """N rows x M columns, no header."""
    np.savetxt(path, np.asarray(Y, dtype=np.float64),
               delimiter=",", fmt=FLOAT_FMT)


def read_signals_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_kernels_json(kc: KernelCoefficients, bounds, path):
    """Kernel parameter file: S, K, bound constants, row-major alpha."""
    c, eps1, eps2 = bounds
    payload = {
        "S": kc.n_kernels,
        "K": kc.degree,
        "c": float(c),
        "eps1": float(eps1),
        "eps2": float(eps2),
        "alpha": [[float(v) for v in row] for row in kc.alpha],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def read_kernels_json(path):
    """Returns (KernelCoefficients, (c, eps1, eps2))."""
    with open(path) as fh:
        payload = json.load(fh)
    alpha = np.asarray(payload["alpha"], dtype=np.float64)
    if alpha.shape != (payload["S"], payload["K"] + 1):
        raise ValueError(
            f"alpha shape {alpha.shape} disagrees with "
            f"S={payload['S']}, K={payload['K']}"
        )
    bounds = (float(payload["c"]), float(payload["eps1"]),
              float(payload["eps2"]))
    return KernelCoefficients(alpha), bounds


def write_sparse_code_csv(code, path):
    """Triples signal,atom_flat_index,coeff; one row per nonzero."""
    with open(path, "w") as fh:
        fh.write("signal,atom_flat_index,coeff\n")
        for m in range(code.n_signals):
            for j, v in zip(code.indices[m], code.coeffs[m]):
                fh.write(f"{m},{int(j)},{_fmt(v)}\n")


def write_trace_csv(trace, path):
    """Header iter,fit_error,objective,kkt,mean_sparsity,secs."""
    with open(path, "w") as fh:
        fh.write("iter,fit_error,objective,kkt,mean_sparsity,secs\n")
        for it, fit, obj, kkt, spars, secs in trace.rows():
            fh.write(f"{it},{_fmt(fit)},{_fmt(obj)},{_fmt(kkt)},"
                     f"{_fmt(spars)},{_fmt(secs)}\n")


def write_kernel_curve_csv(lambdas, values, path):
    """Sampled kernel curves: header lambda,g_1..g_S, one row per sample."""
    values = np.asarray(values)
    names = ",".join(f"g_{s + 1}" for s in range(values.shape[1]))
    with open(path, "w") as fh:
        fh.write(f"lambda,{names}\n")
        for lam, row in zip(lambdas, values):
            fh.write(_fmt(lam) + "," + ",".join(_fmt(v) for v in row) + "\n")


def write_metrics_csv(sparsity_grid, errors, path):
    with open(path, "w") as fh:
        fh.write("sparsity,error\n")
        for t0, err in zip(sparsity_grid, errors):
            fh.write(f"{int(t0)},{_fmt(err)}\n")


def write_manifest(manifest: dict, path):
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def load_corpus(data_dir):
    """Read graph.csv, coords.csv (optional), signals.csv, manifest.json.

    Returns (graph, signals, manifest).
    """
    coords_path = os.path.join(data_dir, "coords.csv")
    coords = read_coords_csv(coords_path) if os.path.exists(coords_path) else None
    manifest_path = os.path.join(data_dir, "manifest.json")
    manifest = read_manifest(manifest_path) if os.path.exists(manifest_path) else {}
    n = manifest.get("n_vertices")
    graph = read_graph_csv(os.path.join(data_dir, "graph.csv"),
                           n_vertices=n, coords=coords)
    signals = read_signals_csv(os.path.join(data_dir, "signals.csv"))
    return graph, signals, manifest
