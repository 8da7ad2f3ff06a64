"""Figure rendering for the CLI report paths (PNG next to the CSV output)."""
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

DPI = 150


def plot_kernels(grid_lambdas, grid_values, sigma_lambdas, sigma_values, path,
                 title="Spectral kernels"):
    """Kernel curves over the spectrum interval, eigenvalue samples marked."""
    fig, ax = plt.subplots(figsize=(7, 4.2))
    n_kernels = grid_values.shape[1]
    for s in range(n_kernels):
        line, = ax.plot(grid_lambdas, grid_values[:, s], label=f"kernel {s + 1}")
        ax.plot(sigma_lambdas, sigma_values[:, s], ".", ms=3,
                color=line.get_color(), alpha=0.5)
    ax.plot(grid_lambdas, grid_values.sum(axis=1), "k--", lw=1, label="sum")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("kernel value")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_trace(trace_rows, path):
    """Fit error and regularized objective against the round number."""
    rows = np.asarray(trace_rows, dtype=np.float64)
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    axes[0].plot(rows[:, 0], rows[:, 1], "o-", ms=3)
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("fit error")
    axes[0].set_yscale("log")
    axes[1].plot(rows[:, 0], rows[:, 2], "o-", ms=3, color="tab:orange")
    axes[1].set_xlabel("iteration")
    axes[1].set_ylabel("regularized objective")
    axes[1].set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_error_curve(sparsity_grid, errors, path):
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(sparsity_grid, errors, "o-")
    ax.set_xlabel("sparsity budget")
    ax.set_ylabel("mean approximation error")
    ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_graph(graph, path, signal=None):
    """Vertex scatter with edges; optional signal colouring."""
    if graph.coords is None:
        return
    pts = graph.coords
    fig, ax = plt.subplots(figsize=(5, 5))
    segs = np.stack([pts[graph.edge_i, :2], pts[graph.edge_j, :2]], axis=1)
    from matplotlib.collections import LineCollection

    ax.add_collection(LineCollection(segs, colors="0.8", lw=0.5, zorder=1))
    if signal is not None:
        sc = ax.scatter(pts[:, 0], pts[:, 1], c=signal, s=25, cmap="viridis",
                        zorder=2)
        fig.colorbar(sc, ax=ax, shrink=0.8)
    else:
        ax.scatter(pts[:, 0], pts[:, 1], s=15, color="tab:blue", zorder=2)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
